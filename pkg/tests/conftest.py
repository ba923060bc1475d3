"""Shared fixtures: random point generators per space and an
affine-reparameterized chart wrapper used by the invariance tests."""

import numpy as np
import pytest

from frechetstats.geometry import Chart, Space, euclidean_point, openbook_point, spd_point, sphere_point
from frechetstats.spaces import EuclideanSpace, OpenBookSpace, SPDSpace, SphereSpace
from frechetstats.spaces.spd import spd_expm, spd_vech_inv


def random_euclidean(rng, dim=3):
    return euclidean_point(rng.normal(size=dim))


def random_sphere(rng, ambient=3):
    v = rng.normal(size=ambient)
    return sphere_point(v / np.linalg.norm(v))


def random_spd(rng, p=3, log_scale=1.0):
    b = spd_vech_inv(log_scale * rng.normal(size=p * (p + 1) // 2), p)
    return spd_point(spd_expm(b))


def random_openbook(rng, n_leaves=3, spine_dim=2, spine_prob=0.2):
    if rng.random() < spine_prob:
        return openbook_point(0, np.concatenate([[0.0], rng.normal(size=spine_dim)]))
    leaf = int(rng.integers(1, n_leaves + 1))
    x0 = abs(rng.normal()) + 1e-12
    return openbook_point(leaf, np.concatenate([[x0], rng.normal(size=spine_dim)]))


def space_instances():
    return [
        EuclideanSpace(3),
        SphereSpace(3, "intrinsic"),
        SphereSpace(3, "extrinsic"),
        SPDSpace(3, "euclidean"),
        SPDSpace(3, "log_euclidean"),
        OpenBookSpace(3, 2),
    ]


def random_point(space, rng):
    if space.kind == "euclidean":
        return random_euclidean(rng, space.dim)
    if space.kind == "sphere":
        return random_sphere(rng, space.ambient_dim)
    if space.kind == "spd":
        return random_spd(rng, space.p)
    return random_openbook(rng, space.n_leaves, space.spine_dim)


class AffineChart(Chart):
    """Chart composed with an invertible affine map y = A x + b."""

    def __init__(self, inner, mat, offset):
        self.inner = inner
        self.mat = np.asarray(mat, dtype=float)
        self.offset = np.asarray(offset, dtype=float)
        self.mat_inv = np.linalg.inv(self.mat)
        self.s = inner.s
        self.base = inner.base

    def _pull(self, y):
        return self.mat_inv @ (np.asarray(y, dtype=float) - self.offset)

    def forward(self, p):
        return self.mat @ self.inner.forward(p) + self.offset

    def forward_many(self, sample):
        return self.inner.forward_many(sample) @ self.mat.T + self.offset

    def inverse(self, y):
        return self.inner.inverse(self._pull(y))

    def pack(self, sample):
        return self.inner.pack(sample)

    def h_many(self, y, packed):
        return self.inner.h_many(self._pull(y), packed)


class AffineChartSpace(Space):
    """Same metric space, charts reparameterized by a fixed affine map;
    derivative information flows through central differences only."""

    def __init__(self, inner, mat, offset):
        self.inner = inner
        self.mat = mat
        self.offset = offset
        self.kind = inner.kind
        self.chart_dim = inner.chart_dim
        self.has_global_chart = inner.has_global_chart

    def distance(self, p, q):
        return self.inner.distance(p, q)

    def chart_at(self, base=None):
        inner_chart = self.inner.chart_at(base) if base is not None else self.inner.chart_at()
        return AffineChart(inner_chart, self.mat, self.offset)

    def initial_guess(self, sample):
        return self.inner.initial_guess(sample)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

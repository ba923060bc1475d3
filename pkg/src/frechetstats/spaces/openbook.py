"""Open book: K half-spaces R^D x [0, inf) glued along the shared spine R^D.

A point is (leaf k; x0, x1, ..., xD) with x0 > 0 on leaves and x0 = 0 on
the spine (leaf 0).  Within one closed leaf the distance is Euclidean;
across leaves the path runs through the spine, which amounts to reflecting
one point's x0 across the spine.  Folding leaf k to the full hyperplane
(identity on leaf k and the spine, x0 negated elsewhere) turns the Frechet
function into an ordinary least-squares problem, so sample means are exact:
the mean sits on leaf k at height m_k when the folded mean m_k is positive,
and on the spine when every m_k <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import Chart, Space, openbook_point
from ..errors import InvalidPoint


def openbook_distance(a, b):
    """Distance between two open-book points.

    Same leaf (or either point on the spine): Euclidean distance of the
    half-space coordinates.  Different leaves: Euclidean distance after
    reflecting one x0, i.e. sqrt((x0 + y0)^2 + ||rest difference||^2).
    """
    if a.leaf == b.leaf or a.leaf == 0 or b.leaf == 0:
        return float(np.linalg.norm(a.data - b.data))
    d0 = a.data[0] + b.data[0]
    rest = a.data[1:] - b.data[1:]
    return float(np.sqrt(d0 * d0 + rest @ rest))


def openbook_fold(k, p):
    """Folding map f_k: identity on leaf k and the spine, x0 negated on
    other leaves.  Returns a plain (D+1,) vector."""
    if k < 1:
        raise ValueError("fold index must be a leaf label >= 1")
    out = np.array(p.data, dtype=float)
    if p.leaf != k and p.leaf != 0:
        out[0] = -out[0]
    return out


@dataclass(frozen=True)
class OpenBookMoments:
    """Sample moments driving the location of the open-book mean.

    ``folded_means[k-1]`` is the sample mean of the zero-th coordinate of
    f_k; ``leaf_weights[k-1]`` the fraction of the sample on leaf k;
    ``spine_mean`` the mean of coordinates 1..D over the whole sample.
    """

    leaf_weights: np.ndarray
    folded_means: np.ndarray
    spine_mean: np.ndarray
    spine_fraction: float
    n: int


@dataclass(frozen=True)
class Classification:
    """Stratum of the mean: kind is ``leaf`` (m_k > 0), ``spine`` (all
    m_k < 0), or ``boundary`` (max_k m_k exactly 0)."""

    kind: str
    leaf: int | None = None


def openbook_moments(sample, n_leaves=None):
    """Per-leaf occupation weights, folded means and the spine-block mean.

    ``n_leaves`` defaults to the largest leaf label present in the sample.
    """
    if len(sample) == 0:
        raise ValueError("sample must be nonempty")
    leaves = np.array([p.leaf for p in sample], dtype=int)
    coords = np.stack([p.data for p in sample])
    k_max = int(leaves.max(initial=0))
    n_leaves = k_max if n_leaves is None else int(n_leaves)
    if n_leaves < k_max:
        raise ValueError("sample contains leaf labels beyond n_leaves")
    n = len(sample)
    x0 = coords[:, 0]
    total = float(x0.sum())
    weights = np.empty(n_leaves)
    folded = np.empty(n_leaves)
    for k in range(1, n_leaves + 1):
        on_k = leaves == k
        s_k = float(x0[on_k].sum())
        weights[k - 1] = float(on_k.sum()) / n
        # f_k keeps leaf-k heights, negates the others, fixes the spine
        folded[k - 1] = (2.0 * s_k - total) / n
    return OpenBookMoments(
        leaf_weights=weights,
        folded_means=folded,
        spine_mean=coords[:, 1:].mean(axis=0),
        spine_fraction=float((leaves == 0).sum()) / n,
        n=n,
    )


def openbook_classify(moments):
    """Trichotomy of the mean's stratum from the folded means.

    At most one folded mean can be positive; the boundary case uses an
    exact zero (it has probability zero under continuous sampling).
    """
    m = moments.folded_means
    if m.size == 0:
        return Classification("spine")
    k = int(np.argmax(m)) + 1
    top = float(m[k - 1])
    if top > 0.0:
        return Classification("leaf", k)
    if top == 0.0:
        return Classification("boundary", k)
    return Classification("spine")


def openbook_frechet_mean(sample, n_leaves=None):
    """Exact sample Frechet mean of an open-book sample.

    The squared distance separates into the folded zero-th coordinate and
    the spine block, so no iteration is needed: leaf case (k; m_k, mean of
    rest), otherwise the spine point (0; 0, mean of rest).
    """
    mom = openbook_moments(sample, n_leaves)
    tag = openbook_classify(mom)
    if tag.kind == "leaf":
        coords = np.concatenate([[mom.folded_means[tag.leaf - 1]], mom.spine_mean])
        return openbook_point(tag.leaf, coords)
    return openbook_point(0, np.concatenate([[0.0], mom.spine_mean]))


class OpenBookLeafChart(Chart):
    """Chart of a leaf stratum: the folding map f_k, s = D + 1.

    h(x; q) = ||x - f_k(q)||^2 exactly, hence analytic derivatives.
    """

    def __init__(self, space, base):
        self.s = space.spine_dim + 1
        self.base = base
        self.leaf = base.leaf
        self._space = space

    def forward(self, p):
        self._space.check_point(p)
        return openbook_fold(self.leaf, p)

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        if x[0] < 0.0:
            raise InvalidPoint("coordinates outside the closed-leaf chart domain")
        return openbook_point(self.leaf if x[0] > 0.0 else 0, x)

    def pack(self, sample):
        return np.stack([openbook_fold(self.leaf, p) for p in sample])

    def forward_many(self, sample):
        return self.pack(sample)

    def h_many(self, x, packed):
        diff = packed - np.asarray(x, dtype=float)
        return np.einsum("ij,ij->i", diff, diff)

    def grad_h_many(self, x, packed):
        return 2.0 * (np.asarray(x, dtype=float) - packed)

    def hess_h_mean(self, x, packed):
        return 2.0 * np.eye(self.s)


class OpenBookSpineChart(Chart):
    """Chart of the spine stratum, s = D; the x0 offsets of the sample enter
    h only as an additive constant."""

    def __init__(self, space, base):
        self.s = space.spine_dim
        self.base = base
        self._space = space

    def forward(self, p):
        self._space.check_point(p)
        if p.leaf != 0:
            raise InvalidPoint("spine chart is only defined on the spine")
        return np.array(p.data[1:], dtype=float)

    def inverse(self, x):
        return openbook_point(0, np.concatenate([[0.0], np.asarray(x, dtype=float)]))

    def pack(self, sample):
        coords = np.stack([p.data for p in sample])
        return coords[:, 0] ** 2, coords[:, 1:]

    def h_many(self, x, packed):
        x0sq, rest = packed
        diff = rest - np.asarray(x, dtype=float)
        return x0sq + np.einsum("ij,ij->i", diff, diff)

    def grad_h_many(self, x, packed):
        _, rest = packed
        return 2.0 * (np.asarray(x, dtype=float) - rest)

    def hess_h_mean(self, x, packed):
        return 2.0 * np.eye(self.s)


class OpenBookSpace(Space):
    """Open book with ``n_leaves`` leaves glued along a D-dimensional spine."""

    kind = "openbook"

    def __init__(self, n_leaves, spine_dim):
        if n_leaves < 2:
            raise ValueError("an open book needs at least 2 leaves")
        if spine_dim < 0:
            raise ValueError("spine dimension must be >= 0")
        self.n_leaves = int(n_leaves)
        self.spine_dim = int(spine_dim)
        self.chart_dim = self.spine_dim + 1

    def __repr__(self):
        return f"OpenBookSpace(n_leaves={self.n_leaves}, spine_dim={self.spine_dim})"

    def check_point(self, p):
        super().check_point(p)
        if p.data.shape != (self.spine_dim + 1,):
            raise ValueError(f"expected {self.spine_dim + 1} half-space coordinates")
        if p.leaf > self.n_leaves:
            raise ValueError(f"leaf label {p.leaf} exceeds n_leaves={self.n_leaves}")

    def distance(self, p, q):
        self.check_point(p)
        self.check_point(q)
        return openbook_distance(p, q)

    def chart_at(self, base):
        self.check_point(base)
        if base.leaf == 0:
            return OpenBookSpineChart(self, base)
        return OpenBookLeafChart(self, base)

    def initial_guess(self, sample):
        return self.mean(sample)

    def mean(self, sample):
        """Exact sample Frechet mean (no iteration)."""
        self.check_sample(sample)
        return openbook_frechet_mean(sample, self.n_leaves)

    def moments(self, sample):
        self.check_sample(sample)
        return openbook_moments(sample, self.n_leaves)

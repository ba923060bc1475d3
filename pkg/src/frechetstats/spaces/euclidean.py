"""Euclidean space R^s with its identity chart.

Serves both as a usable space and as the exactness oracle for the
estimator: here the Frechet mean is the arithmetic mean and the sandwich
covariance collapses to the sample covariance.
"""

from __future__ import annotations

import numpy as np

from ..geometry import Chart, Space, euclidean_point


class EuclideanChart(Chart):
    """Identity chart; h(x; q) = ||x - q||^2 with analytic derivatives."""

    def __init__(self, space, base):
        self.s = space.chart_dim
        self.base = base
        self._space = space

    def forward(self, p):
        self._space.check_point(p)
        return np.array(p.data, dtype=float)

    def inverse(self, x):
        return euclidean_point(x)

    def pack(self, sample):
        return np.stack([p.data for p in sample])

    def h_many(self, x, packed):
        diff = packed - np.asarray(x, dtype=float)
        return np.einsum("ij,ij->i", diff, diff)

    def grad_h_many(self, x, packed):
        return 2.0 * (np.asarray(x, dtype=float) - packed)

    def hess_h_mean(self, x, packed):
        return 2.0 * np.eye(self.s)


class EuclideanSpace(Space):
    """R^dim with the usual distance."""

    kind = "euclidean"
    has_global_chart = True

    def __init__(self, dim):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)
        self.chart_dim = self.dim

    def __repr__(self):
        return f"EuclideanSpace(dim={self.dim})"

    def check_point(self, p):
        super().check_point(p)
        if p.data.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}")

    def distance(self, p, q):
        self.check_point(p)
        self.check_point(q)
        return float(np.linalg.norm(p.data - q.data))

    def chart_at(self, base=None):
        if base is not None:
            self.check_point(base)
        return EuclideanChart(self, base)

    def initial_guess(self, sample):
        self.check_sample(sample)
        return euclidean_point(np.mean([p.data for p in sample], axis=0))

    def mean(self, sample):
        """Arithmetic mean (the exact Frechet mean of R^s)."""
        return self.initial_guess(sample)

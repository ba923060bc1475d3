"""Symmetric positive definite p x p matrices under the Euclidean
(Frobenius) and log-Euclidean metrics.

Both metrics admit a global isometric chart: ``vech`` of the matrix itself,
or of its matrix logarithm.  The off-diagonal entries of ``vech`` carry a
sqrt(2) factor so the chart preserves the Frobenius norm exactly, which
reduces both geometries to the Euclidean case (closed-form means, analytic
derivatives, sandwich covariance equal to the chart-vector covariance).
"""

from __future__ import annotations

import numpy as np

from ..errors import NotPositiveDefinite
from ..geometry import Chart, Space, spd_point

_SQRT2 = np.sqrt(2.0)


def _eigh_checked(a):
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    if w[0] <= 1e-14 * max(w[-1], 0.0):
        raise NotPositiveDefinite(
            f"matrix has near-zero or negative eigenvalue {w[0]:.3e}"
        )
    return w, v


def spd_logm(a):
    """Matrix logarithm of an SPD matrix via symmetric eigendecomposition."""
    w, v = _eigh_checked(np.asarray(a, dtype=float))
    out = (v * np.log(w)) @ v.T
    return 0.5 * (out + out.T)


def spd_expm(b):
    """Matrix exponential of a symmetric matrix (always SPD)."""
    b = np.asarray(b, dtype=float)
    w, v = np.linalg.eigh(0.5 * (b + b.T))
    out = (v * np.exp(w)) @ v.T
    return 0.5 * (out + out.T)


def _logm_rows(mats):
    """Batched spd_logm over an (n, p, p) stack."""
    w, v = np.linalg.eigh(mats)
    if np.any(w[:, 0] <= 1e-14 * np.maximum(w[:, -1], 0.0)):
        raise NotPositiveDefinite("a sample matrix is not positive definite")
    out = np.einsum("nij,nj,nkj->nik", v, np.log(w), v)
    return 0.5 * (out + np.swapaxes(out, 1, 2))


def _expm_rows(mats):
    """Batched spd_expm over an (n, p, p) symmetric stack."""
    w, v = np.linalg.eigh(mats)
    out = np.einsum("nij,nj,nkj->nik", v, np.exp(w), v)
    return 0.5 * (out + np.swapaxes(out, 1, 2))


def spd_vech(b):
    """Isometric vectorization: diagonal entries, then sqrt(2)-scaled upper
    off-diagonals in row-major order, so ||vech(B)||_2 = ||B||_F."""
    b = np.asarray(b, dtype=float)
    p = b.shape[0]
    iu = np.triu_indices(p, k=1)
    return np.concatenate([np.diagonal(b), _SQRT2 * b[iu]])


def spd_vech_inv(x, p):
    """Inverse of spd_vech for a p x p symmetric matrix."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p * (p + 1) // 2,):
        raise ValueError(f"expected a vector of length {p * (p + 1) // 2}")
    b = np.diag(x[:p].astype(float))
    iu = np.triu_indices(p, k=1)
    off = x[p:] / _SQRT2
    b[iu] = off
    b[(iu[1], iu[0])] = off
    return b


def _vech_rows(mats):
    """Batched spd_vech over an (n, p, p) stack."""
    p = mats.shape[-1]
    iu = np.triu_indices(p, k=1)
    diag = mats[:, np.arange(p), np.arange(p)]
    return np.concatenate([diag, _SQRT2 * mats[:, iu[0], iu[1]]], axis=1)


def _vech_inv_rows(x, p):
    """Batched spd_vech_inv over (n, p(p+1)/2) rows."""
    x = np.asarray(x, dtype=float)
    b = np.zeros((x.shape[0], p, p))
    idx = np.arange(p)
    b[:, idx, idx] = x[:, :p]
    iu = np.triu_indices(p, k=1)
    off = x[:, p:] / _SQRT2
    b[:, iu[0], iu[1]] = off
    b[:, iu[1], iu[0]] = off
    return b


def spd_mean(sample, metric="log_euclidean"):
    """Closed-form Frechet mean of SPD matrices under either metric.

    Euclidean: entrywise mean (SPD by convexity of the cone).
    Log-Euclidean: expm of the mean of matrix logs.
    """
    mats = np.stack([p.data for p in sample])
    if metric == "euclidean":
        return spd_point(mats.mean(axis=0))
    if metric == "log_euclidean":
        return spd_point(spd_expm(_logm_rows(mats).mean(axis=0)))
    raise ValueError(f"unknown spd metric {metric!r}")


class SPDChart(Chart):
    """Global vech chart (of the matrix, or of its log); h is exactly the
    squared chart-space Euclidean distance."""

    def __init__(self, space):
        self.s = space.chart_dim
        self.base = None
        self._space = space
        self._log = space.metric == "log_euclidean"

    def forward(self, p):
        self._space.check_point(p)
        m = spd_logm(p.data) if self._log else p.data
        return spd_vech(m)

    def inverse(self, x):
        b = spd_vech_inv(x, self._space.p)
        return spd_point(spd_expm(b) if self._log else b)

    def pack(self, sample):
        mats = np.stack([p.data for p in sample])
        if self._log:
            mats = _logm_rows(mats)
        return _vech_rows(mats)

    def forward_many(self, sample):
        return self.pack(sample)

    def h_many(self, x, packed):
        diff = packed - np.asarray(x, dtype=float)
        return np.einsum("ij,ij->i", diff, diff)

    def grad_h_many(self, x, packed):
        return 2.0 * (np.asarray(x, dtype=float) - packed)

    def hess_h_mean(self, x, packed):
        return 2.0 * np.eye(self.s)


class SPDSpace(Space):
    """SPD(p) under the Euclidean or log-Euclidean metric."""

    kind = "spd"
    has_global_chart = True

    def __init__(self, p, metric="log_euclidean"):
        if p < 1:
            raise ValueError("matrix size must be >= 1")
        if metric not in ("euclidean", "log_euclidean"):
            raise ValueError(f"unknown spd metric {metric!r}")
        self.p = int(p)
        self.metric = metric
        self.chart_dim = self.p * (self.p + 1) // 2

    def __repr__(self):
        return f"SPDSpace(p={self.p}, metric={self.metric!r})"

    def check_point(self, p):
        super().check_point(p)
        if p.data.shape != (self.p, self.p):
            raise ValueError(f"expected a {self.p}x{self.p} matrix")

    def distance(self, p, q):
        self.check_point(p)
        self.check_point(q)
        if self.metric == "euclidean":
            return float(np.linalg.norm(p.data - q.data))
        return float(np.linalg.norm(spd_logm(p.data) - spd_logm(q.data)))

    def chart_at(self, base=None):
        if base is not None:
            self.check_point(base)
        return SPDChart(self)

    def initial_guess(self, sample):
        self.check_sample(sample)
        return self.mean(sample)

    def mean(self, sample):
        self.check_sample(sample)
        return spd_mean(sample, self.metric)

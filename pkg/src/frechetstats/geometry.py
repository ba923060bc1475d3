"""Core abstractions: tagged points, sample-space descriptors and charts,
finite differences, and the empirical Frechet function.

A *space* bundles a distance with a chart ``phi`` mapping a neighborhood of
the mean onto an open subset of R^s; ``h(x; q) = distance(phi^-1(x), q)^2``
is the squared-distance function expressed in chart coordinates.  Everything
downstream (mean estimation, sandwich covariances, two-sample tests) works on
``h`` and its first two derivatives.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPoint, MixedSpacePoints, NonFiniteValue

_EPS = float(np.finfo(float).eps)

#: Default step scale for first-order central differences, eps**(1/3).
GRADIENT_STEP_SCALE = _EPS ** (1.0 / 3.0)

#: Default step scale for second-order central differences, eps**(1/4).
#: The larger step keeps the roundoff error of the twice-differenced
#: quadratic terms below ~1e-6.
HESSIAN_STEP_SCALE = _EPS ** 0.25


def _frozen_array(values, shape=None):
    a = np.array(values, dtype=float)
    if shape is not None and a.shape != shape:
        raise InvalidPoint(f"expected payload of shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidPoint("point payload contains non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Point:
    """Element of one of the supported sample spaces.

    ``kind`` is one of ``euclidean | sphere | spd | openbook``; ``data``
    holds the coordinate payload (vector, unit vector, SPD matrix, or the
    half-space coordinates ``(x0, x1, ..., xD)``).  ``leaf`` is meaningful
    for open-book points only: leaf 0 is the spine, and spine points always
    carry ``leaf == 0`` and ``x0 == 0``.
    """

    kind: str
    data: np.ndarray
    leaf: int = 0

    def close_to(self, other, atol=1e-12):
        if self.kind != other.kind or self.leaf != other.leaf:
            return False
        return bool(np.allclose(self.data, other.data, rtol=0.0, atol=atol))

    def __repr__(self):
        if self.kind == "openbook":
            return f"Point(openbook, leaf={self.leaf}, {np.array2string(self.data, precision=6)})"
        return f"Point({self.kind}, {np.array2string(self.data, precision=6)})"


def _point_unchecked(kind, data, leaf=0):
    """Wrap a payload known-valid by construction (hot paths only)."""
    a = np.array(data, dtype=float)
    a.setflags(write=False)
    return Point(kind, a, leaf)


def euclidean_point(v):
    """Point of R^s."""
    return Point("euclidean", _frozen_array(np.atleast_1d(v)))


def sphere_point(v, atol=1e-12):
    """Unit vector in R^{d+1}; the norm must already be 1 within ``atol``."""
    a = np.atleast_1d(np.asarray(v, dtype=float))
    nrm = float(np.linalg.norm(a))
    if abs(nrm - 1.0) > atol:
        raise InvalidPoint(f"sphere point has norm {nrm!r}, not 1 within {atol}")
    return Point("sphere", _frozen_array(a / nrm))


def spd_point(a, atol=1e-12):
    """Symmetric positive definite matrix."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidPoint("spd payload must be a square matrix")
    if not np.allclose(m, m.T, rtol=0.0, atol=atol):
        raise InvalidPoint("spd payload is not symmetric within tolerance")
    m = 0.5 * (m + m.T)
    if np.linalg.eigvalsh(m)[0] <= 0.0:
        raise InvalidPoint("spd payload has a non-positive eigenvalue")
    return Point("spd", _frozen_array(m))


def openbook_point(leaf, coords):
    """Open-book point: leaf label plus half-space coordinates (x0 >= 0).

    Points with ``x0 == 0`` lie on the spine and are canonicalized to leaf 0,
    so equality of glued boundary points is well defined.
    """
    c = np.atleast_1d(np.asarray(coords, dtype=float))
    if c[0] < 0.0:
        raise InvalidPoint("open-book coordinate x0 must be nonnegative")
    leaf = int(leaf)
    if leaf < 0:
        raise InvalidPoint("leaf label must be nonnegative")
    if c[0] == 0.0:
        leaf = 0
    elif leaf == 0:
        raise InvalidPoint("spine points (leaf 0) must have x0 == 0")
    return Point("openbook", _frozen_array(c), leaf)


@dataclass(frozen=True)
class DiffConfig:
    """Finite-difference configuration.

    Steps are scaled per coordinate as ``h_r = scale * max(1, |x_r|)``.
    Unless overridden, ``gradient_scale`` is eps**(1/3) (first differences)
    and ``hessian_scale`` eps**(1/4) (second differences); with Richardson
    extrapolation (one step halving, off by default) the defaults widen to
    eps**(1/5) and eps**(1/6), the optima of the fourth-order schemes.
    """

    gradient_scale: float | None = None
    hessian_scale: float | None = None
    richardson: bool = False

    def __post_init__(self):
        for scale in (self.gradient_scale, self.hessian_scale):
            if scale is not None and scale <= 0.0:
                raise ValueError("finite-difference step scales must be positive")

    def _gradient_scale(self):
        if self.gradient_scale is not None:
            return self.gradient_scale
        return _EPS ** 0.2 if self.richardson else GRADIENT_STEP_SCALE

    def _hessian_scale(self):
        if self.hessian_scale is not None:
            return self.hessian_scale
        return _EPS ** (1.0 / 6.0) if self.richardson else HESSIAN_STEP_SCALE

    def gradient_steps(self, x):
        return self._gradient_scale() * np.maximum(1.0, np.abs(x))

    def hessian_steps(self, x):
        return self._hessian_scale() * np.maximum(1.0, np.abs(x))


def _check_finite(value):
    if not np.all(np.isfinite(value)):
        raise NonFiniteValue("function returned a non-finite value at a probe point")
    return value


def _gradient_fixed_steps(f, x, steps):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for r in range(x.size):
        e = np.zeros_like(x)
        e[r] = steps[r]
        fp = _check_finite(f(x + e))
        fm = _check_finite(f(x - e))
        g[r] = (fp - fm) / (2.0 * steps[r])
    return g


def numeric_gradient(f, x, cfg=None):
    """Central-difference gradient of a scalar function ``f: R^s -> R``.

    Raises NonFiniteValue if any probe evaluation is NaN or infinite.
    """
    cfg = cfg or DiffConfig()
    x = np.asarray(x, dtype=float)
    steps = cfg.gradient_steps(x)
    g = _gradient_fixed_steps(f, x, steps)
    if cfg.richardson:
        g_half = _gradient_fixed_steps(f, x, steps / 2.0)
        g = (4.0 * g_half - g) / 3.0
    return g


def _hessian_fixed_steps(f, x, steps):
    x = np.asarray(x, dtype=float)
    s = x.size
    h = np.empty((s, s))
    f0 = _check_finite(f(x))
    for r in range(s):
        er = np.zeros_like(x)
        er[r] = steps[r]
        fp = _check_finite(f(x + er))
        fm = _check_finite(f(x - er))
        h[r, r] = (fp - 2.0 * f0 + fm) / steps[r] ** 2
        for c in range(r + 1, s):
            ec = np.zeros_like(x)
            ec[c] = steps[c]
            fpp = _check_finite(f(x + er + ec))
            fpm = _check_finite(f(x + er - ec))
            fmp = _check_finite(f(x - er + ec))
            fmm = _check_finite(f(x - er - ec))
            h[r, c] = h[c, r] = (fpp - fpm - fmp + fmm) / (4.0 * steps[r] * steps[c])
    return h


def numeric_hessian(f, x, cfg=None):
    """Second-order central-difference Hessian, symmetrized as (H + H^T)/2."""
    cfg = cfg or DiffConfig()
    x = np.asarray(x, dtype=float)
    steps = cfg.hessian_steps(x)
    h = _hessian_fixed_steps(f, x, steps)
    if cfg.richardson:
        h_half = _hessian_fixed_steps(f, x, steps / 2.0)
        h = (4.0 * h_half - h) / 3.0
    return 0.5 * (h + h.T)


def gradient_rows(fvec, x, cfg=None):
    """Per-row central-difference gradients of a vector map ``fvec: R^s -> R^n``.

    Returns the (n, s) matrix whose j-th row is the gradient of the j-th
    component.  Used to differentiate ``h(.; Y_j)`` for all sample points at
    once when a chart has no analytic gradient.
    """
    cfg = cfg or DiffConfig()
    x = np.asarray(x, dtype=float)
    steps = cfg.gradient_steps(x)
    cols = []
    for r in range(x.size):
        e = np.zeros_like(x)
        e[r] = steps[r]
        fp = _check_finite(np.asarray(fvec(x + e), dtype=float))
        fm = _check_finite(np.asarray(fvec(x - e), dtype=float))
        cols.append((fp - fm) / (2.0 * steps[r]))
    if not cols:
        return np.zeros((np.asarray(fvec(x)).size, 0))
    return np.column_stack(cols)


class Chart(ABC):
    """Chart ``phi: G -> U`` of a space, anchored at a base point.

    Subclasses provide the forward/inverse maps and a vectorized squared
    distance ``h_many``; analytic derivative hooks may return ``None`` when a
    closed form is unavailable at the requested point, in which case callers
    fall back to central differences on ``h_many``.
    """

    #: chart dimension s
    s: int
    #: base point the chart is anchored at
    base: Point

    @abstractmethod
    def forward(self, p):
        """Chart coordinates phi(p) in R^s."""

    @abstractmethod
    def inverse(self, x):
        """Point phi^-1(x) for x in the chart domain."""

    @abstractmethod
    def pack(self, sample):
        """Precompute per-sample arrays reused across h/derivative calls."""

    @abstractmethod
    def h_many(self, x, packed):
        """Vector of h(x; Y_j) = distance(phi^-1(x), Y_j)^2 over the sample."""

    def h(self, x, q):
        return float(self.h_many(np.asarray(x, dtype=float), self.pack([q]))[0])

    def forward_many(self, sample):
        """Chart coordinates of every sample point, as an (n, s) matrix."""
        return np.stack([self.forward(p) for p in sample])

    def grad_h_many(self, x, packed):
        """Analytic (n, s) gradient rows of h(.; Y_j) at x, or None."""
        return None

    def hess_h_mean(self, x, packed):
        """Analytic s x s Hessian of the averaged h at x, or None."""
        return None


class Space(ABC):
    """Sample-space descriptor: distance plus charts.

    ``kind`` names the Point variant the space accepts and ``chart_dim`` is
    the dimension of the chart at a generic (top-stratum) point.
    """

    kind: str
    chart_dim: int
    #: True when chart_at ignores the base point (one global chart)
    has_global_chart = False

    @abstractmethod
    def distance(self, p, q):
        """Metric distance between two points of the space."""

    @abstractmethod
    def chart_at(self, base):
        """Chart anchored at ``base`` whose domain contains ``base``."""

    @abstractmethod
    def initial_guess(self, sample):
        """Cheap starting point for iterative mean estimation."""

    def check_point(self, p):
        if not isinstance(p, Point) or p.kind != self.kind:
            got = getattr(p, "kind", type(p).__name__)
            raise MixedSpacePoints(f"expected a {self.kind} point, got {got}")

    def check_sample(self, sample):
        if len(sample) == 0:
            raise ValueError("sample must be nonempty")
        for p in sample:
            self.check_point(p)


def frechet_value(space, sample, p, weights=None):
    """Empirical Frechet function: sum of weighted squared distances to ``p``.

    ``weights`` default to uniform 1/n; when given they must be nonnegative
    and sum to 1.
    """
    space.check_sample(sample)
    space.check_point(p)
    if weights is None:
        w = np.full(len(sample), 1.0 / len(sample))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(sample),):
            raise ValueError("weights length must match the sample")
        if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
    d2 = np.array([space.distance(p, q) ** 2 for q in sample])
    return float(w @ d2)

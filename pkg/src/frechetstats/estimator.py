"""Sample Frechet means and their asymptotic sandwich covariance.

``estimate_mean`` finds a stationary point of the empirical Frechet
function, dispatching on the space: closed forms where they exist
(Euclidean, SPD under both metrics, chordal sphere, open book), Karcher
fixed-point iteration for the geodesic sphere, and a damped Newton descent
on chart coordinates as the generic fallback.

``sandwich_covariance`` then forms, in the chart anchored at the estimate,

    Lambda_n = average Hessian of h(.; Y_j),
    C_n      = average outer product of the gradients of h(.; Y_j),

and the asymptotic covariance Lambda_n^-1 C_n Lambda_n^-1 of the chart
coordinates (to be divided by n for the covariance of the estimate).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import NearSingularCovariance, NearSingularHessian, NoConvergence
from .geometry import (
    DiffConfig,
    Point,
    gradient_rows,
    numeric_gradient,
    numeric_hessian,
)
from .spaces.euclidean import EuclideanSpace
from .spaces.openbook import OpenBookSpace
from .spaces.spd import SPDSpace
from .geometry import sphere_point
from .spaces.sphere import SphereSpace, _geodesic_sq_rows, _log_rows, sphere_exp

#: condition-number ceiling beyond which Lambda_n (or a covariance) is
#: treated as numerically singular
COND_LIMIT = 1e12


@dataclass(frozen=True)
class FrechetFit:
    """Estimated Frechet mean with optional sandwich covariance.

    ``chart`` is the chart anchored at the estimate in which
    ``chart_coords``, ``lambda_n``, ``c_n`` and ``asym_cov`` live.  The
    covariance of the chart coordinates of the estimate is ``asym_cov / n``.
    """

    mean: Point
    chart_coords: np.ndarray
    n: int
    iterations: int
    grad_norm: float
    strategy: str
    chart: object
    lambda_n: np.ndarray | None = None
    c_n: np.ndarray | None = None
    asym_cov: np.ndarray | None = None
    lambda_cond: float | None = None
    lambda_pd: bool | None = None


def _mean_gradient(chart, x, packed, diff, force_numeric=False):
    if not force_numeric:
        rows = chart.grad_h_many(x, packed)
        if rows is not None:
            return rows.mean(axis=0)
    return numeric_gradient(lambda xx: float(np.mean(chart.h_many(xx, packed))), x, diff)


def _karcher_sphere(space, sample, tol, max_iter):
    points = np.stack([p.data for p in sample])
    mu = space.initial_guess(sample).data
    for it in range(max_iter):
        step = _log_rows(mu, points).mean(axis=0)
        if 2.0 * np.linalg.norm(step) <= tol:
            return sphere_point(mu), it
        f0 = float(np.mean(_geodesic_sq_rows(mu, points)))
        # allow rounding-level increases, or the damping loop can stall the
        # iteration just above the gradient tolerance
        slack = 1e-15 * (1.0 + abs(f0))
        tau = 1.0
        while True:
            cand = sphere_exp(mu, tau * step)
            if float(np.mean(_geodesic_sq_rows(cand, points))) <= f0 + slack or tau < 1e-8:
                break
            tau *= 0.5
        mu = cand
    return sphere_point(mu), max_iter


def _newton(space, sample, tol, max_iter, diff):
    start = space.initial_guess(sample)
    chart = space.chart_at(start)
    packed = chart.pack(sample)
    x = chart.forward(start)

    def fmean(xx):
        return float(np.mean(chart.h_many(xx, packed)))

    for it in range(max_iter):
        g = _mean_gradient(chart, x, packed, diff)
        if np.linalg.norm(g) <= tol:
            return chart.inverse(x), it
        hess = chart.hess_h_mean(x, packed)
        if hess is None:
            hess = numeric_hessian(fmean, x, diff)
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            step = -g
        f0 = fmean(x)
        tau = 1.0
        while fmean(x + tau * step) > f0 and tau > 1e-10:
            tau *= 0.5
        x = x + tau * step
    return chart.inverse(x), max_iter


def _dispatch_strategy(space, strategy):
    if strategy is not None:
        return strategy
    if isinstance(space, (EuclideanSpace, SPDSpace)):
        return "closed_form"
    if isinstance(space, OpenBookSpace):
        return "openbook_exact"
    if isinstance(space, SphereSpace):
        return "karcher" if space.metric == "intrinsic" else "closed_form"
    return "newton"


def estimate_mean(space, sample, *, tol=1e-10, max_iter=200, strategy=None, diff=None):
    """Stationary point of the empirical Frechet function.

    Parameters
    ----------
    space : Space
    sample : list of Point
        Nonempty, all of the space's kind.
    tol : float
        Convergence threshold on the chart-coordinate gradient norm of the
        empirical Frechet function.
    max_iter : int
        Iteration budget for the iterative strategies.
    strategy : str, optional
        Force one of ``closed_form | karcher | newton | openbook_exact``
        instead of the per-space default.
    diff : DiffConfig, optional
        Finite-difference settings for numeric fallbacks.

    Raises
    ------
    NoConvergence
        Iteration budget exhausted; the partial fit rides on the exception.
    MixedSpacePoints
        Some sample point is from a different space.
    """
    space.check_sample(sample)
    diff = diff or DiffConfig()
    strategy = _dispatch_strategy(space, strategy)

    iterations = 0
    if strategy == "closed_form":
        if isinstance(space, SphereSpace):
            mean = space.extrinsic_mean(sample)
        else:
            mean = space.mean(sample)
    elif strategy == "openbook_exact":
        mean = space.mean(sample)
    elif strategy == "karcher":
        mean, iterations = _karcher_sphere(space, sample, tol, max_iter)
    elif strategy == "newton":
        mean, iterations = _newton(space, sample, tol, max_iter, diff)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    chart = space.chart_at(mean)
    coords = chart.forward(mean)
    packed = chart.pack(sample)
    if chart.s == 0:
        grad_norm = 0.0
    else:
        grad_norm = float(np.linalg.norm(_mean_gradient(chart, coords, packed, diff)))
    fit = FrechetFit(
        mean=mean,
        chart_coords=coords,
        n=len(sample),
        iterations=iterations,
        grad_norm=grad_norm,
        strategy=strategy,
        chart=chart,
    )
    if strategy in ("karcher", "newton") and grad_norm > tol and iterations >= max_iter:
        raise NoConvergence(
            f"{strategy} exhausted {max_iter} iterations (grad norm {grad_norm:.3e})",
            fit=fit,
        )
    return fit


def _inverse_with_guard(matrix, error_cls, label):
    m = np.asarray(matrix, dtype=float)
    if m.shape[0] == 0:
        return m.copy(), 1.0, True
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    amax = float(np.max(np.abs(w)))
    amin = float(np.min(np.abs(w)))
    if amin == 0.0 or amax / amin > COND_LIMIT:
        cond = np.inf if amin == 0.0 else amax / amin
        raise error_cls(f"{label} is numerically singular (condition number {cond:.3e})")
    inv = (v / w) @ v.T
    return 0.5 * (inv + inv.T), amax / amin, bool(np.min(w) > 0.0)


def sandwich_covariance(space, sample, fit, *, derivatives="auto", diff=None):
    """Populate Lambda_n, C_n and the sandwich covariance of a fit.

    ``derivatives`` selects the gradient/Hessian route: ``auto`` prefers a
    chart's closed forms, ``numeric`` forces central differences (same
    estimator contract, useful for validating the analytic path).

    Raises NearSingularHessian when Lambda_n has condition number beyond
    1e12, which signals a boundary or otherwise degenerate configuration.
    """
    space.check_sample(sample)
    diff = diff or DiffConfig()
    if derivatives not in ("auto", "numeric"):
        raise ValueError(f"unknown derivatives mode {derivatives!r}")
    force_numeric = derivatives == "numeric"
    chart = fit.chart
    x = np.asarray(fit.chart_coords, dtype=float)
    packed = chart.pack(sample)
    n = len(sample)

    if chart.s == 0:
        # fully degenerate stratum: the mean is pinned, covariance is exact
        empty = np.zeros((0, 0))
        return dataclasses.replace(
            fit, lambda_n=empty, c_n=empty.copy(), asym_cov=empty.copy(),
            lambda_cond=1.0, lambda_pd=True,
        )

    rows = None if force_numeric else chart.grad_h_many(x, packed)
    if rows is None:
        rows = gradient_rows(lambda xx: chart.h_many(xx, packed), x, diff)
    lam = None if force_numeric else chart.hess_h_mean(x, packed)
    if lam is None:
        lam = numeric_hessian(lambda xx: float(np.mean(chart.h_many(xx, packed))), x, diff)
    lam = 0.5 * (lam + lam.T)
    # raw (uncentered) second moments: the gradients average to ~0 at a
    # stationary point, and the raw form stays valid when the residual is not
    # exactly zero
    c = rows.T @ rows / n
    c = 0.5 * (c + c.T)
    lam_inv, cond, is_pd = _inverse_with_guard(lam, NearSingularHessian, "Lambda_n")
    asym = lam_inv @ c @ lam_inv
    return dataclasses.replace(
        fit,
        lambda_n=lam,
        c_n=c,
        asym_cov=0.5 * (asym + asym.T),
        lambda_cond=cond,
        lambda_pd=is_pd,
    )


def confidence_region_contains(fit, candidate_chart_coords, alpha):
    """Membership test for the CLT confidence ellipsoid.

    Returns whether ``n (nu_n - x)^T asym_cov^-1 (nu_n - x)`` is at most the
    chi-square(s) quantile at level 1 - alpha (boundary inclusive).
    """
    from .inference import chi2_quantile

    if fit.asym_cov is None:
        raise ValueError("fit has no covariance; run sandwich_covariance first")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    s = fit.chart.s
    if s == 0:
        return True
    x = np.asarray(candidate_chart_coords, dtype=float)
    d = fit.chart_coords - x
    if not np.any(d):
        return True  # statistic is identically 0, even for degenerate fits
    inv, _, _ = _inverse_with_guard(fit.asym_cov, NearSingularCovariance, "asym_cov")
    statistic = float(fit.n * d @ inv @ d)
    return statistic <= chi2_quantile(s, 1.0 - alpha)

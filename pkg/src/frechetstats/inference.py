"""Two-sample chi-square tests on chart coordinates and multiple-testing
procedures (Bonferroni, Benjamini-Hochberg), plus the chi-square
distribution functions they rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import NearSingularCovariance

COND_LIMIT = 1e12


def chi2_sf(x, k):
    """Upper tail P(chi2_k > x) via the regularized upper incomplete gamma
    function Q(k/2, x/2)."""
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if k < 1:
        raise ValueError("degrees of freedom must be >= 1")
    return float(special.gammaincc(0.5 * k, 0.5 * x))


def chi2_cdf(x, k):
    """Lower tail P(chi2_k <= x)."""
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if k < 1:
        raise ValueError("degrees of freedom must be >= 1")
    return float(special.gammainc(0.5 * k, 0.5 * x))


def chi2_quantile(k, prob):
    """Value q with P(chi2_k <= q) = prob."""
    if not 0.0 < prob < 1.0:
        raise ValueError("prob must be in (0, 1)")
    return float(2.0 * special.gammainccinv(0.5 * k, 1.0 - prob))


@dataclass(frozen=True)
class TwoSampleResult:
    """Chi-square two-sample comparison of chart-coordinate means."""

    statistic: float
    df: int
    p_value: float
    n1: int
    n2: int
    mean_x: np.ndarray
    mean_y: np.ndarray
    pooled_cov: np.ndarray


def two_sample_test(space, sample_x, sample_y):
    """Test equality of two distributions through their chart-mean difference.

    Both samples are vectorized with the *same* chart (the space's global
    chart when it has one, otherwise the chart at the pooled mean estimate).
    The statistic is the Mahalanobis form

        T = (xbar - ybar)^T (S_x/n1 + S_y/n2)^-1 (xbar - ybar)

    with unbiased (n-1) group covariances, compared against chi-square(s).
    """
    space.check_sample(sample_x)
    space.check_sample(sample_y)
    n1, n2 = len(sample_x), len(sample_y)
    s = space.chart_dim
    if n1 < 2 or n2 < 2:
        raise ValueError("each group needs at least 2 observations")
    if n1 + n2 < s + 2:
        raise ValueError(f"need n1 + n2 >= {s + 2} for a rank-{s} covariance")

    if getattr(space, "has_global_chart", False):
        chart = space.chart_at()
    else:
        from .estimator import estimate_mean

        chart = space.chart_at(estimate_mean(space, list(sample_x) + list(sample_y)).mean)
    vx = chart.forward_many(sample_x)
    vy = chart.forward_many(sample_y)
    mean_x = vx.mean(axis=0)
    mean_y = vy.mean(axis=0)
    cov_x = np.cov(vx, rowvar=False, ddof=1).reshape(s, s)
    cov_y = np.cov(vy, rowvar=False, ddof=1).reshape(s, s)
    pooled = cov_x / n1 + cov_y / n2

    w, v = np.linalg.eigh(0.5 * (pooled + pooled.T))
    amin, amax = float(np.min(np.abs(w))), float(np.max(np.abs(w)))
    if amin == 0.0 or amax / amin > COND_LIMIT:
        raise NearSingularCovariance("pooled two-sample covariance is near-singular")
    diff = mean_x - mean_y
    statistic = float(diff @ ((v / w) @ v.T) @ diff)
    statistic = max(statistic, 0.0)
    return TwoSampleResult(
        statistic=statistic,
        df=s,
        p_value=chi2_sf(statistic, s),
        n1=n1,
        n2=n2,
        mean_x=mean_x,
        mean_y=mean_y,
        pooled_cov=pooled,
    )


@dataclass(frozen=True)
class MultiTestResult:
    """Outcome of a multiple-testing procedure over m p-values.

    ``order`` lists original site indices by ascending p-value (ties broken
    by original index); ``rejected`` is indexed by original site.  For
    Bonferroni ``global_p`` is min(1, m * min p); for BH it is None and
    ``n_rejected`` counts the rejected prefix of ``order``.
    """

    method: str
    alpha: float
    order: np.ndarray
    sorted_pvalues: np.ndarray
    rejected: np.ndarray
    n_rejected: int
    global_p: float | None


def _validated_pvalues(pvalues):
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("pvalues must be a nonempty 1-d sequence")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("pvalues must lie in [0, 1]")
    return p


def bonferroni(pvalues, alpha=0.05):
    """Bonferroni correction: global p = min(1, m * min p); site i is
    rejected at level alpha iff p_i <= alpha / m."""
    p = _validated_pvalues(pvalues)
    m = p.size
    order = np.argsort(p, kind="stable")
    rejected = p <= alpha / m
    return MultiTestResult(
        method="bonferroni",
        alpha=float(alpha),
        order=order,
        sorted_pvalues=p[order],
        rejected=rejected,
        n_rejected=int(rejected.sum()),
        global_p=min(1.0, m * float(p.min())),
    )


def bh_fdr(pvalues, alpha=0.05):
    """Benjamini-Hochberg step-up procedure at false discovery rate alpha.

    Rejects the i smallest p-values, where i is the largest index with
    p_(i) <= i * alpha / m (none when no index qualifies).
    """
    p = _validated_pvalues(pvalues)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    m = p.size
    order = np.argsort(p, kind="stable")
    sorted_p = p[order]
    thresholds = alpha * np.arange(1, m + 1) / m
    hits = np.nonzero(sorted_p <= thresholds)[0]
    k = int(hits[-1]) + 1 if hits.size else 0
    rejected = np.zeros(m, dtype=bool)
    rejected[order[:k]] = True
    return MultiTestResult(
        method="bh",
        alpha=float(alpha),
        order=order,
        sorted_pvalues=sorted_p,
        rejected=rejected,
        n_rejected=k,
        global_p=None,
    )

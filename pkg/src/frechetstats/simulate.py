"""Seeded samplers for each space and Monte Carlo experiments that check
the asymptotic behavior of the estimators empirically: confidence-region
coverage, open-book stickiness fractions, two-sample type-I error, and
consistency decay of the mean.

Randomness runs through counter-based Philox streams keyed by
(seed, replication), so replication r is reproducible independent of the
order in which replications execute.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CutLocus,
    FrechetStatsError,
    InvalidDescriptor,
    InvalidPoint,
    NearSingularCovariance,
    NearSingularHessian,
    NoConvergence,
    NotPositiveDefinite,
)
from .estimator import estimate_mean, sandwich_covariance, confidence_region_contains
from .geometry import _point_unchecked, euclidean_point, openbook_point, sphere_point, spd_point
from .inference import two_sample_test
from .spaces.euclidean import EuclideanSpace
from .spaces.openbook import OpenBookSpace
from .spaces.spd import SPDSpace, spd_expm
from .spaces.sphere import SphereSpace, sphere_exp, sphere_log, tangent_basis

#: estimation failures tolerated (as a fraction of replications) before a
#: Monte Carlo run is aborted instead of silently dropping replications
FAILURE_BUDGET = 0.01

_REP_FAILURES = (
    NoConvergence,
    NearSingularHessian,
    NearSingularCovariance,
    CutLocus,
    NotPositiveDefinite,
)


def _stream(seed, key):
    key = (key,) if isinstance(key, (int, np.integer)) else tuple(int(k) for k in key)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# distribution descriptors


@dataclass(frozen=True)
class GaussianDescriptor:
    """Multivariate normal on R^s; ``cov`` may be a scalar (isotropic) or a
    full covariance matrix."""

    mean: tuple
    cov: object = 1.0

    def _cov_matrix(self, dim):
        c = np.asarray(self.cov, dtype=float)
        if c.ndim == 0:
            return float(c) * np.eye(dim)
        if c.shape != (dim, dim):
            raise InvalidDescriptor("covariance shape does not match the dimension")
        return c

    def validate(self, space):
        if not isinstance(space, EuclideanSpace):
            raise InvalidDescriptor("gaussian descriptor requires a Euclidean space")
        m = np.asarray(self.mean, dtype=float)
        if m.shape != (space.dim,):
            raise InvalidDescriptor("mean length does not match the space dimension")
        c = self._cov_matrix(space.dim)
        if not np.allclose(c, c.T) or np.linalg.eigvalsh(c)[0] < 0.0:
            raise InvalidDescriptor("covariance must be symmetric PSD")

    def draw(self, rng, n, space):
        c = self._cov_matrix(space.dim)
        # eigen root instead of Cholesky: singular PSD covariances are legal
        w, v = np.linalg.eigh(c)
        root = v * np.sqrt(np.maximum(w, 0.0))
        z = rng.standard_normal((n, space.dim))
        rows = np.asarray(self.mean, dtype=float) + z @ root.T
        return [euclidean_point(r) for r in rows]

    def population_mean(self, space):
        return euclidean_point(self.mean)


@dataclass(frozen=True)
class SphereCapDescriptor:
    """Uniform distribution on a geodesic cap; radius 0 is a point mass at
    the center.  The population mean is the center by symmetry."""

    center: tuple
    radius: float

    def validate(self, space):
        if not isinstance(space, SphereSpace):
            raise InvalidDescriptor("cap descriptor requires a sphere space")
        c = np.asarray(self.center, dtype=float)
        if c.shape != (space.ambient_dim,):
            raise InvalidDescriptor("center length does not match the ambient dimension")
        if abs(np.linalg.norm(c) - 1.0) > 1e-9:
            raise InvalidDescriptor("cap center must be a unit vector")
        if not 0.0 <= self.radius < np.pi:
            raise InvalidDescriptor("cap radius must lie in [0, pi)")

    def draw(self, rng, n, space):
        center = np.asarray(self.center, dtype=float)
        center = center / np.linalg.norm(center)
        if self.radius == 0.0:
            return [sphere_point(center) for _ in range(n)]
        if space.ambient_dim == 3:
            # exact inverse-CDF sampling of the colatitude on S^2
            u = rng.random(n)
            theta = np.arccos(1.0 - u * (1.0 - np.cos(self.radius)))
            phi = 2.0 * np.pi * rng.random(n)
            basis = tangent_basis(center)
            dirs = np.cos(phi)[:, None] * basis[0] + np.sin(phi)[:, None] * basis[1]
            rows = np.cos(theta)[:, None] * center + np.sin(theta)[:, None] * dirs
            rows /= np.linalg.norm(rows, axis=1, keepdims=True)
            return [_point_unchecked("sphere", r) for r in rows]
        # general dimension: rejection from the uniform sphere
        out = []
        cos_r = np.cos(self.radius)
        while len(out) < n:
            z = rng.standard_normal((max(2048, 2 * n), space.ambient_dim))
            z /= np.linalg.norm(z, axis=1, keepdims=True)
            for row in z[z @ center >= cos_r]:
                out.append(sphere_point(row))
                if len(out) == n:
                    break
        return out

    def population_mean(self, space):
        c = np.asarray(self.center, dtype=float)
        return sphere_point(c / np.linalg.norm(c))


@dataclass(frozen=True)
class SphereTwoPointDescriptor:
    """Half/half mixture of two fixed points; the population mean is their
    geodesic midpoint."""

    a: tuple
    b: tuple

    def validate(self, space):
        if not isinstance(space, SphereSpace):
            raise InvalidDescriptor("two-point descriptor requires a sphere space")
        for v in (self.a, self.b):
            u = np.asarray(v, dtype=float)
            if u.shape != (space.ambient_dim,) or abs(np.linalg.norm(u) - 1.0) > 1e-9:
                raise InvalidDescriptor("two-point support must be unit vectors")
        if np.linalg.norm(np.asarray(self.a) + np.asarray(self.b)) < 1e-9:
            raise InvalidDescriptor("antipodal support has no unique mean")

    def draw(self, rng, n, space):
        pa = sphere_point(np.asarray(self.a, dtype=float))
        pb = sphere_point(np.asarray(self.b, dtype=float))
        picks = rng.random(n) < 0.5
        return [pa if take_a else pb for take_a in picks]

    def population_mean(self, space):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        return sphere_point(sphere_exp(a, 0.5 * sphere_log(a, b)))


@dataclass(frozen=True)
class SPDLogGaussianDescriptor:
    """expm of a Gaussian symmetric matrix: isotropic normal with standard
    deviation ``scale`` per isometric-vech coordinate around ``mean_log``."""

    mean_log: tuple
    scale: float

    def validate(self, space):
        if not isinstance(space, SPDSpace):
            raise InvalidDescriptor("spd descriptor requires an SPD space")
        m = np.asarray(self.mean_log, dtype=float)
        if m.shape != (space.p, space.p) or not np.allclose(m, m.T, atol=1e-10):
            raise InvalidDescriptor("mean_log must be a symmetric matrix of the space's size")
        if self.scale < 0.0:
            raise InvalidDescriptor("scale must be nonnegative")

    def draw(self, rng, n, space):
        from .spaces.spd import _expm_rows, _vech_inv_rows, spd_vech

        base = spd_vech(np.asarray(self.mean_log, dtype=float))
        z = base + self.scale * rng.standard_normal((n, base.size))
        mats = _expm_rows(_vech_inv_rows(z, space.p))
        return [_point_unchecked("spd", m) for m in mats]

    def population_mean(self, space):
        if space.metric != "log_euclidean":
            raise InvalidDescriptor(
                "closed-form population mean of the expm-gaussian family is only "
                "available under the log-Euclidean metric"
            )
        return spd_point(spd_expm(np.asarray(self.mean_log, dtype=float)))


_X0_FAMILIES = ("constant", "exponential", "half_gaussian")


def _x0_mean(family, param):
    if family == "constant":
        return float(param)
    if family == "exponential":
        return 1.0 / float(param)
    return float(param) * np.sqrt(2.0 / np.pi)


def _x0_second_moment(family, param):
    if family == "constant":
        return float(param) ** 2
    if family == "exponential":
        return 2.0 / float(param) ** 2
    return float(param) ** 2


@dataclass(frozen=True)
class OpenBookDescriptor:
    """Open-book sampling law: leaf occupation probabilities (any remainder
    is spine mass), a nonnegative height family per leaf, and a shared
    Gaussian law for the spine-parallel coordinates.

    Height families: ``("constant", c)``, ``("exponential", rate)``,
    ``("half_gaussian", scale)``.
    """

    leaf_probs: tuple
    x0: object = ("exponential", 1.0)
    spine_mean: tuple = ()
    spine_sd: float = 1.0

    def _families(self, n_leaves):
        fams = self.x0
        if fams and isinstance(fams[0], str):
            fams = [tuple(fams)] * n_leaves
        fams = [tuple(f) for f in fams]
        if len(fams) != n_leaves:
            raise InvalidDescriptor("need one height family per leaf")
        for name, param in fams:
            if name not in _X0_FAMILIES:
                raise InvalidDescriptor(f"unknown height family {name!r}")
            if float(param) < 0.0 or (name != "constant" and float(param) <= 0.0):
                raise InvalidDescriptor(f"invalid parameter for height family {name!r}")
        return fams

    def validate(self, space):
        if not isinstance(space, OpenBookSpace):
            raise InvalidDescriptor("open-book descriptor requires an open-book space")
        probs = np.asarray(self.leaf_probs, dtype=float)
        if probs.shape != (space.n_leaves,):
            raise InvalidDescriptor("need one occupation probability per leaf")
        if np.any(probs < 0.0) or probs.sum() > 1.0 + 1e-12:
            raise InvalidDescriptor("leaf probabilities must be nonnegative with sum <= 1")
        if np.asarray(self.spine_mean, dtype=float).shape != (space.spine_dim,):
            raise InvalidDescriptor("spine_mean length must equal the spine dimension")
        if self.spine_sd < 0.0:
            raise InvalidDescriptor("spine_sd must be nonnegative")
        self._families(space.n_leaves)

    def _draw_x0(self, rng, family, count):
        name, param = family
        if name == "constant":
            return np.full(count, float(param))
        if name == "exponential":
            return rng.exponential(scale=1.0 / float(param), size=count)
        return np.abs(rng.normal(0.0, float(param), size=count))

    def draw(self, rng, n, space):
        probs = np.asarray(self.leaf_probs, dtype=float)
        fams = self._families(space.n_leaves)
        edges = np.cumsum(probs)
        labels = np.searchsorted(edges, rng.random(n), side="right") + 1
        labels[labels > space.n_leaves] = 0  # spine mass
        x0 = np.zeros(n)
        for k in range(1, space.n_leaves + 1):
            mask = labels == k
            if mask.any():
                x0[mask] = self._draw_x0(rng, fams[k - 1], int(mask.sum()))
        rest = np.asarray(self.spine_mean, dtype=float) + self.spine_sd * rng.standard_normal(
            (n, space.spine_dim)
        )
        return [
            openbook_point(labels[j], np.concatenate([[x0[j]], rest[j]]))
            for j in range(n)
        ]

    def population_folded_means(self, space):
        """Closed-form folded means m_k of the sampling law."""
        probs = np.asarray(self.leaf_probs, dtype=float)
        fams = self._families(space.n_leaves)
        contrib = probs * np.array([_x0_mean(*f) for f in fams])
        total = contrib.sum()
        return 2.0 * contrib - total

    def population_folded_variance(self, space, k):
        """Variance of the zero-th coordinate of f_k under the law."""
        probs = np.asarray(self.leaf_probs, dtype=float)
        fams = self._families(space.n_leaves)
        second = float(
            (probs * np.array([_x0_second_moment(*f) for f in fams])).sum()
        )
        m_k = float(self.population_folded_means(space)[k - 1])
        return second - m_k**2

    def population_mean(self, space):
        m = self.population_folded_means(space)
        mu_rest = np.asarray(self.spine_mean, dtype=float)
        k = int(np.argmax(m)) + 1
        if m[k - 1] > 0.0:
            return openbook_point(k, np.concatenate([[m[k - 1]], mu_rest]))
        return openbook_point(0, np.concatenate([[0.0], mu_rest]))


# ---------------------------------------------------------------------------
# sampler and experiments


@dataclass(frozen=True)
class Sampler:
    """Space + distribution descriptor + seed; the only source of randomness
    for the Monte Carlo experiments."""

    space: object
    descriptor: object
    seed: int

    def __post_init__(self):
        self.descriptor.validate(self.space)

    def rng(self, rep=0):
        return _stream(self.seed, rep)

    def draw(self, n, rep=0):
        if n < 1:
            raise ValueError("n must be >= 1")
        return self.descriptor.draw(self.rng(rep), n, self.space)

    def population_mean(self):
        return self.descriptor.population_mean(self.space)


def draw(sampler, n, rep=0):
    """n i.i.d. points from the sampler's replication-``rep`` stream."""
    return sampler.draw(n, rep)


@dataclass(frozen=True)
class MCReport:
    """Monte Carlo summary: point estimate with binomial standard error,
    per-replication outcomes, and the count of failed replications."""

    experiment: str
    reps: int
    estimate: float
    std_error: float
    failures: int
    outcomes: tuple
    details: dict = field(default_factory=dict)


def _binomial_se(p_hat, n_eff):
    return float(np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_eff)) if n_eff else float("nan")


def _check_failures(failures, reps, experiment):
    if failures > FAILURE_BUDGET * reps:
        raise FrechetStatsError(
            f"{experiment}: {failures}/{reps} replications failed "
            f"(budget {FAILURE_BUDGET:.0%})"
        )


def mc_coverage(sampler, n, reps, alpha, derivatives="auto"):
    """Empirical coverage of the (1 - alpha) sandwich confidence ellipsoid.

    Each replication fits the mean and covariance on a fresh sample and
    checks whether the chart image of the *true* population mean falls in
    the region.  Replications where the true mean lies outside the fitted
    chart's domain count as misses; numeric failures are counted separately
    and tolerated only up to the failure budget.
    """
    space = sampler.space
    truth = sampler.population_mean()
    outcomes = []
    failures = 0
    for rep in range(reps):
        sample = sampler.draw(n, rep)
        try:
            fit = estimate_mean(space, sample)
            fit = sandwich_covariance(space, sample, fit, derivatives=derivatives)
        except _REP_FAILURES:
            failures += 1
            continue
        try:
            candidate = fit.chart.forward(truth)
        except (InvalidPoint, CutLocus):
            outcomes.append(False)
            continue
        outcomes.append(bool(confidence_region_contains(fit, candidate, alpha)))
    _check_failures(failures, reps, "mc_coverage")
    est = float(np.mean(outcomes)) if outcomes else float("nan")
    return MCReport(
        experiment="coverage",
        reps=reps,
        estimate=est,
        std_error=_binomial_se(est, len(outcomes)),
        failures=failures,
        outcomes=tuple(outcomes),
        details={"alpha": alpha, "n": n, "derivatives": derivatives},
    )


def mc_stickiness(sampler, n, reps):
    """Fractions of replications whose exact open-book mean lands on the
    spine versus each leaf.

    The point estimate is the fraction landing in the population-predicted
    stratum (spine fraction when the population folded means have no strict
    winner).  ``details['mean_x0']`` records the height of each
    replication's mean for boundary-regime diagnostics.
    """
    space = sampler.space
    if not isinstance(space, OpenBookSpace):
        raise InvalidDescriptor("mc_stickiness requires an open-book sampler")
    pop_m = sampler.descriptor.population_folded_means(space)
    pop_leaf = int(np.argmax(pop_m)) + 1 if float(np.max(pop_m)) > 0.0 else 0
    tags = []
    heights = []
    for rep in range(reps):
        sample = sampler.draw(n, rep)
        mean = space.mean(sample)
        tags.append("spine" if mean.leaf == 0 else f"leaf_{mean.leaf}")
        heights.append(float(mean.data[0]))
    fractions = {tag: tags.count(tag) / reps for tag in sorted(set(tags))}
    target = "spine" if pop_leaf == 0 else f"leaf_{pop_leaf}"
    est = fractions.get(target, 0.0)
    return MCReport(
        experiment="stickiness",
        reps=reps,
        estimate=est,
        std_error=_binomial_se(est, reps),
        failures=0,
        outcomes=tuple(tags),
        details={
            "n": n,
            "target": target,
            "fractions": fractions,
            "mean_x0": tuple(heights),
            "population_folded_means": tuple(float(v) for v in pop_m),
        },
    )


def mc_type1(space, sampler, n1, n2, reps, alpha, identical_groups=False):
    """Empirical type-I error of the two-sample chart test under H0.

    Both groups are drawn from the sampler's distribution; with
    ``identical_groups`` the second group reuses the first group's stream
    (degenerate sanity mode with statistic 0).
    """
    if repr(sampler.space) != repr(space):
        raise InvalidDescriptor("sampler and space arguments disagree")
    outcomes = []
    failures = 0
    for rep in range(reps):
        x = sampler.draw(n1, (rep, 0))
        y = sampler.draw(n2, (rep, 0) if identical_groups else (rep, 1))
        try:
            res = two_sample_test(space, x, y)
        except _REP_FAILURES:
            failures += 1
            continue
        outcomes.append(bool(res.p_value <= alpha))
    _check_failures(failures, reps, "mc_type1")
    est = float(np.mean(outcomes)) if outcomes else float("nan")
    return MCReport(
        experiment="type1",
        reps=reps,
        estimate=est,
        std_error=_binomial_se(est, len(outcomes)),
        failures=failures,
        outcomes=tuple(outcomes),
        details={"alpha": alpha, "n1": n1, "n2": n2, "df": space.chart_dim},
    )


def mc_consistency(space, sampler, n_grid, reps):
    """Median distance between the estimated and true mean at each sample
    size; returns a list of (n, median error) rows."""
    if repr(sampler.space) != repr(space):
        raise InvalidDescriptor("sampler and space arguments disagree")
    truth = sampler.population_mean()
    table = []
    failures = 0
    total = 0
    for n in n_grid:
        errs = []
        for rep in range(reps):
            total += 1
            try:
                fit = estimate_mean(space, sampler.draw(int(n), (int(n), rep)))
            except _REP_FAILURES:
                failures += 1
                continue
            errs.append(space.distance(fit.mean, truth))
        table.append((int(n), float(np.median(errs))))
    _check_failures(failures, total, "mc_consistency")
    return table

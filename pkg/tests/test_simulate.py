import numpy as np
import pytest

from frechetstats.errors import FrechetStatsError, InvalidDescriptor
from frechetstats.simulate import (
    GaussianDescriptor,
    OpenBookDescriptor,
    Sampler,
    SphereCapDescriptor,
    SphereTwoPointDescriptor,
    SPDLogGaussianDescriptor,
    _check_failures,
    draw,
    mc_consistency,
    mc_coverage,
    mc_stickiness,
    mc_type1,
)
from frechetstats.spaces import EuclideanSpace, OpenBookSpace, SPDSpace, SphereSpace
from frechetstats.spaces.spd import spd_expm


def euclid_sampler(seed=0):
    return Sampler(
        EuclideanSpace(2), GaussianDescriptor(mean=(0.5, -1.0), cov=2.0), seed
    )


# ---------------------------------------------------------------------------
# draw determinism and descriptor validation


def test_draw_is_deterministic_per_seed_and_rep():
    s = euclid_sampler(seed=123)
    a = draw(s, 20, rep=4)
    b = draw(s, 20, rep=4)
    assert all(np.array_equal(p.data, q.data) for p, q in zip(a, b))
    c = draw(s, 20, rep=5)
    assert not all(np.array_equal(p.data, q.data) for p, q in zip(a, c))


def test_draw_requires_positive_n():
    with pytest.raises(ValueError):
        euclid_sampler().draw(0)


def test_openbook_all_mass_on_one_leaf():
    space = OpenBookSpace(3, 1)
    d = OpenBookDescriptor(leaf_probs=(1.0, 0.0, 0.0), x0=("exponential", 1.0), spine_mean=(0.0,))
    pts = Sampler(space, d, 1).draw(50)
    assert all(p.leaf == 1 for p in pts)


def test_cap_radius_zero_is_point_mass():
    space = SphereSpace(3)
    d = SphereCapDescriptor(center=(0.0, 0.0, 1.0), radius=0.0)
    pts = Sampler(space, d, 0).draw(10)
    assert all(np.allclose(p.data, [0, 0, 1]) for p in pts)


def test_invalid_descriptors_rejected():
    with pytest.raises(InvalidDescriptor):
        Sampler(SphereSpace(3), SphereCapDescriptor(center=(0, 0, 1.0), radius=-0.5), 0)
    with pytest.raises(InvalidDescriptor):
        Sampler(
            OpenBookSpace(2, 0),
            OpenBookDescriptor(leaf_probs=(0.7, 0.7), x0=("exponential", 1.0), spine_mean=()),
            0,
        )
    with pytest.raises(InvalidDescriptor):
        Sampler(EuclideanSpace(3), SphereCapDescriptor(center=(0, 0, 1.0), radius=0.1), 0)
    with pytest.raises(InvalidDescriptor):
        Sampler(
            OpenBookSpace(2, 0),
            OpenBookDescriptor(leaf_probs=(0.5, 0.5), x0=("poisson", 1.0), spine_mean=()),
            0,
        )


def test_gaussian_descriptor_allows_singular_covariance():
    space = EuclideanSpace(2)
    d = GaussianDescriptor(mean=(0.0, 0.0), cov=((1.0, 1.0), (1.0, 1.0)))
    pts = Sampler(space, d, 0).draw(50)
    rows = np.stack([p.data for p in pts])
    assert np.allclose(rows[:, 0], rows[:, 1], atol=1e-12)  # degenerate direction


def test_cap_rejection_sampling_matches_radius_bound():
    space = SphereSpace(4)  # exercises the rejection path (ambient != 3)
    d = SphereCapDescriptor(center=(0.0, 0.0, 0.0, 1.0), radius=0.4)
    pts = Sampler(space, d, 0).draw(200)
    center = np.array([0.0, 0.0, 0.0, 1.0])
    dists = [2 * np.arcsin(min(1.0, np.linalg.norm(p.data - center) / 2)) for p in pts]
    assert max(dists) <= 0.4 + 1e-12


# ---------------------------------------------------------------------------
# closed-form population means


def test_population_means():
    s = euclid_sampler()
    assert np.allclose(s.population_mean().data, [0.5, -1.0])

    sph = SphereSpace(3)
    cap = Sampler(sph, SphereCapDescriptor(center=(0, 0, 1.0), radius=0.3), 0)
    assert np.allclose(cap.population_mean().data, [0, 0, 1])

    two = Sampler(
        sph, SphereTwoPointDescriptor(a=(1.0, 0, 0), b=(0, 1.0, 0)), 0
    )
    mid = two.population_mean()
    assert np.allclose(mid.data, np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0))
    from frechetstats.geometry import sphere_point

    assert sph.distance(mid, sphere_point((1.0, 0, 0))) == pytest.approx(
        sph.distance(mid, sphere_point((0, 1.0, 0))), abs=1e-12
    )

    spd = SPDSpace(3, "log_euclidean")
    mlog = np.diag([0.5, 0.0, -0.5])
    lg = Sampler(spd, SPDLogGaussianDescriptor(mean_log=tuple(map(tuple, mlog)), scale=0.1), 0)
    assert np.allclose(lg.population_mean().data, spd_expm(mlog), atol=1e-12)

    with pytest.raises(InvalidDescriptor):
        Sampler(
            SPDSpace(3, "euclidean"),
            SPDLogGaussianDescriptor(mean_log=tuple(map(tuple, mlog)), scale=0.1),
            0,
        ).population_mean()


def test_openbook_population_moments():
    space = OpenBookSpace(3, 2)
    d = OpenBookDescriptor(
        leaf_probs=(0.5, 0.25, 0.25),
        x0=("exponential", 1.0),
        spine_mean=(1.0, -1.0),
        spine_sd=1.0,
    )
    m = d.population_folded_means(space)
    assert np.allclose(m, [0.0, -0.5, -0.5])
    # folded second moment of exp(1) is 2 on every leaf, so var = 2 - m^2
    assert d.population_folded_variance(space, 1) == pytest.approx(2.0)
    assert d.population_folded_variance(space, 2) == pytest.approx(2.0 - 0.25)
    mu = d.population_mean(space)
    assert mu.leaf == 0 and np.allclose(mu.data, [0.0, 1.0, -1.0])

    d2 = OpenBookDescriptor(
        leaf_probs=(0.6, 0.2, 0.2), x0=("constant", 1.0), spine_mean=(0.0, 0.0)
    )
    assert np.allclose(d2.population_folded_means(space), [0.2, -0.6, -0.6])
    mu2 = d2.population_mean(space)
    assert mu2.leaf == 1 and mu2.data[0] == pytest.approx(0.2)

    d3 = OpenBookDescriptor(
        leaf_probs=(0.5, 0.5), x0=("half_gaussian", 2.0), spine_mean=()
    )
    m3 = d3.population_folded_means(OpenBookSpace(2, 0))
    assert np.allclose(m3, [0.0, 0.0])


def test_empirical_folded_means_match_population():
    space = OpenBookSpace(3, 1)
    d = OpenBookDescriptor(
        leaf_probs=(0.5, 0.3, 0.1), x0=("half_gaussian", 1.5), spine_mean=(0.0,)
    )
    sampler = Sampler(space, d, 99)
    from frechetstats.spaces import openbook_moments

    mom = openbook_moments(sampler.draw(40_000), 3)
    assert np.allclose(mom.folded_means, d.population_folded_means(space), atol=0.03)
    assert mom.spine_fraction == pytest.approx(0.1, abs=0.01)


# ---------------------------------------------------------------------------
# Monte Carlo experiments (fast smoke versions; full runs are acceptance)


def test_mc_coverage_euclidean_rough_band():
    rep = mc_coverage(euclid_sampler(7), n=100, reps=300, alpha=0.05)
    assert 0.90 <= rep.estimate <= 0.99
    assert rep.failures == 0
    assert rep.std_error == pytest.approx(
        np.sqrt(rep.estimate * (1 - rep.estimate) / 300), abs=1e-12
    )


def test_mc_coverage_alpha_half():
    rep = mc_coverage(euclid_sampler(11), n=200, reps=400, alpha=0.5)
    assert abs(rep.estimate - 0.5) < 0.09


def test_mc_coverage_numeric_matches_analytic_outcomes():
    a = mc_coverage(euclid_sampler(3), n=60, reps=200, alpha=0.05, derivatives="auto")
    b = mc_coverage(euclid_sampler(3), n=60, reps=200, alpha=0.05, derivatives="numeric")
    assert a.outcomes == b.outcomes


def test_mc_type1_identical_groups_never_rejects():
    spd = SPDSpace(3, "log_euclidean")
    d = SPDLogGaussianDescriptor(mean_log=((0.2, 0, 0), (0, 0.0, 0), (0, 0, -0.2)), scale=0.2)
    rep = mc_type1(spd, Sampler(spd, d, 5), n1=30, n2=30, reps=50, alpha=0.05, identical_groups=True)
    assert rep.estimate == 0.0


def test_mc_type1_reports_df():
    spd = SPDSpace(3, "log_euclidean")
    d = SPDLogGaussianDescriptor(mean_log=((0.0, 0, 0), (0, 0.0, 0), (0, 0, 0.0)), scale=0.2)
    rep = mc_type1(spd, Sampler(spd, d, 5), n1=40, n2=40, reps=100, alpha=0.05)
    assert rep.details["df"] == 6
    assert 0.0 <= rep.estimate <= 0.2


def test_mc_stickiness_fractions_sum_to_one():
    space = OpenBookSpace(3, 2)
    d = OpenBookDescriptor(
        leaf_probs=(0.45, 0.3, 0.25), x0=("exponential", 1.0), spine_mean=(0.0, 0.0)
    )
    rep = mc_stickiness(Sampler(space, d, 2), n=60, reps=100)
    assert sum(rep.details["fractions"].values()) == pytest.approx(1.0)
    assert len(rep.details["mean_x0"]) == 100


def test_mc_consistency_point_mass_has_zero_error():
    sph = SphereSpace(3)
    cap = Sampler(sph, SphereCapDescriptor(center=(0, 0, 1.0), radius=0.0), 0)
    table = mc_consistency(sph, cap, [50, 500], reps=5)
    assert all(err == 0.0 for _, err in table)


def test_failure_budget_enforced():
    with pytest.raises(FrechetStatsError):
        _check_failures(failures=25, reps=100, experiment="unit")
    _check_failures(failures=1, reps=200, experiment="unit")


def test_mc_reports_are_reproducible():
    a = mc_coverage(euclid_sampler(21), n=50, reps=100, alpha=0.05)
    b = mc_coverage(euclid_sampler(21), n=50, reps=100, alpha=0.05)
    assert a.estimate == b.estimate and a.outcomes == b.outcomes

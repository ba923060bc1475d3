"""Frechet means and CLT-based nonparametric inference on non-Euclidean
sample spaces: spheres, SPD matrices, and open-book stratified spaces.
"""

from . import errors
from .geometry import (
    DiffConfig,
    Point,
    Space,
    Chart,
    euclidean_point,
    frechet_value,
    numeric_gradient,
    numeric_hessian,
    openbook_point,
    spd_point,
    sphere_point,
)
from .estimator import (
    FrechetFit,
    confidence_region_contains,
    estimate_mean,
    sandwich_covariance,
)
from .inference import (
    MultiTestResult,
    TwoSampleResult,
    bh_fdr,
    bonferroni,
    chi2_cdf,
    chi2_quantile,
    chi2_sf,
    two_sample_test,
)
from .simulate import (
    GaussianDescriptor,
    MCReport,
    OpenBookDescriptor,
    Sampler,
    SphereCapDescriptor,
    SphereTwoPointDescriptor,
    SPDLogGaussianDescriptor,
    draw,
    mc_consistency,
    mc_coverage,
    mc_stickiness,
    mc_type1,
)
from .spaces import (
    EuclideanSpace,
    OpenBookSpace,
    SPDSpace,
    SphereSpace,
    openbook_classify,
    openbook_distance,
    openbook_fold,
    openbook_frechet_mean,
    openbook_moments,
    spd_expm,
    spd_logm,
    spd_mean,
    spd_vech,
    spd_vech_inv,
    sphere_exp,
    sphere_extrinsic_project,
    sphere_log,
)

__version__ = "0.1.0"

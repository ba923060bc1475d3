"""Concrete sample spaces: Euclidean, sphere, SPD matrices, open book."""

from .euclidean import EuclideanSpace
from .sphere import (
    SphereSpace,
    sphere_distance,
    sphere_exp,
    sphere_extrinsic_project,
    sphere_log,
    tangent_basis,
)
from .spd import (
    SPDSpace,
    spd_expm,
    spd_logm,
    spd_mean,
    spd_vech,
    spd_vech_inv,
)
from .openbook import (
    Classification,
    OpenBookMoments,
    OpenBookSpace,
    openbook_classify,
    openbook_distance,
    openbook_fold,
    openbook_frechet_mean,
    openbook_moments,
)

__all__ = [
    "EuclideanSpace",
    "SphereSpace",
    "SPDSpace",
    "OpenBookSpace",
    "Classification",
    "OpenBookMoments",
    "sphere_distance",
    "sphere_exp",
    "sphere_log",
    "sphere_extrinsic_project",
    "tangent_basis",
    "spd_logm",
    "spd_expm",
    "spd_vech",
    "spd_vech_inv",
    "spd_mean",
    "openbook_distance",
    "openbook_fold",
    "openbook_moments",
    "openbook_classify",
    "openbook_frechet_mean",
]

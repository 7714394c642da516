"""Numerical checks of eventual positivity for matrix resolvents and semigroups on R^n."""

__version__ = "0.1.0"

from . import config
from .certify import (
    CertReport,
    certify_all,
    krein_rutman,
    kr_resolvent,
    kr_semigroup,
    nonneg_in_subspace,
    pf_conclusion,
    pf_resolvent,
    pf_semigroup,
    pf_semigroup_corollary,
)
from .errors import (
    ClusterAmbiguityError,
    EigensolverError,
    EvposError,
    LatticeError,
    MatrixMarketError,
    NearSingularError,
    NotAnEigenvalueError,
    OverflowRiskError,
    ProjectionDisagreementError,
    SpectralError,
)
from .lattice import ConeNorm, OrderUnit, dist_to_cone, gauge_norm, strong_pos_margin
from .resolvent import (
    ScanSchedule,
    asymptotic_positivity,
    scan_individual_negative,
    scan_individual_positive,
    scan_uniform_negative,
    scan_uniform_positive,
)
from .semigroup import TimeGrid, expm, find_t0, find_t0_uniform, modulus_estimate, rescaled_bound, smoothing_check
from .spectral import Operator, analyze, spectral_projection

__all__ = [name for name in dir() if not name.startswith("_")]

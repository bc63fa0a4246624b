"""Rate functions, cumulant generating functions and their conjugates for
general real-valued source sequences, with a theorem-checking harness."""

from .conjugate import (
    Grid,
    SampledFunction,
    biconjugate,
    is_closed_convex,
    legendre_conjugate,
)
from .cumulant import CgfCurves, TruncationWindow, cgf_curves, rate_from_cgf, tail_cgf, truncated_cgf
from .sources import (
    DivergentPM,
    GaussianIID,
    InterleavedGaussian,
    MixedGaussian,
    SourceCapabilities,
    analytic_rate,
    exact_cgf,
    exact_interval_prob,
    sample,
    source_from_json,
)
from .spectrum import (
    RateCurve,
    ShrinkSchedule,
    c_tightness_diagnostic,
    e_tightness_diagnostic,
    estimate_point_rate,
    estimate_rate_curve,
    sigma_convergence_diagnostic,
)
from .verify import (
    GammaSet,
    Interval,
    VerificationReport,
    inf_over_set,
    random_gamma_suite,
    verify_cge_upper,
    verify_duality,
    verify_full_ldp,
    verify_locality,
    verify_reduction,
    verify_sandwich_lower,
    verify_sandwich_upper,
)

__version__ = "0.1.0"

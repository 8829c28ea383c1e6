"""Neumann-series precoding for massive MIMO downlink: simulation and closed-form analysis."""
from .analysis import (
    Case1Gaps,
    IcnsCoefficients,
    InsCoefficients,
    case1_gaps,
    icns_coefficients,
    icns_sum_rate,
    ins_coefficients,
    ins_sinr_asymptotic,
    ins_sum_rate,
    ins_zf_ratio,
    mrt_cross_threshold,
    mrt_sum_rate_lb,
    r_star,
    zf_sum_rate,
)
from .channel import (
    ChannelRealization,
    NormMode,
    SystemConfig,
    draw_realization,
    gram_offdiag,
    trial_seed,
    validate_config,
)
from .complexity import ComplexityReport, op_counts
from .errors import (
    BadRange,
    ConfigError,
    DegenerateZF,
    NonIntegerEffectiveDimension,
    OverloadedSystem,
    SingularGram,
    SingularPrecondition,
)
from .kernels import BACKEND
from .preconditioners import (
    Kind,
    MpEdges,
    PreconditionKind,
    PreconditionMatrix,
    build_precondition,
    invert_precondition,
    mp_edges,
    omega_star,
    spectral_check,
)
from .precoders import PrecoderSpec, PrecodingOutput, Scheme, build_precoder, ns_approx_inverse, sinr_per_user
from .simulate import (
    MomentReport,
    MonteCarloPlan,
    SumRateEstimate,
    compare_schemes,
    eigen_edge_report,
    ergodic_sum_rate,
    lemma2_moments,
    sum_rate_simu_approx,
)

__version__ = "0.1.0"

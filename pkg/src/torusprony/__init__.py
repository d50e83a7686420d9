"""Recovery of Dirac ensembles on the torus from trigonometric moments,
with Ingham-type certificates for when recovery is guaranteed."""

from .ensemble import (
    COINCIDENCE_TOL,
    EXPONENT_SIGN,
    DiracEnsemble,
    SeparationReport,
    TorusPoint,
    canonicalize,
    separation,
    wrap_distance,
)
from .ingham import (
    InghamBoundReport,
    InghamCertificate,
    InghamConstants,
    PsiSpec,
    WindowFunction,
    autocorr,
    autocorr_at_zero,
    build_certificate,
    constant_Cp,
    constant_cd,
    deriv_autocorr,
    deriv_autocorr_at_zero,
    eval_phi,
    eval_psi,
    eval_psi_hat,
    ingham_lower_bound,
    log_bound_cd,
    lp_ball_indices,
    phi_hat,
    psi_at_zero,
    psi_hat_max,
    sigma_root,
    threshold_nq,
    window_for_order,
)
from .moments import (
    ConditioningReport,
    MomentTable,
    MultiIndexBox,
    RankResult,
    ToeplitzMatrix,
    VandermondeMatrix,
    build_toeplitz,
    build_vandermonde,
    compute_moments,
    condition_report,
    equispaced_kappa_formula,
    factorization_residual,
    numerical_rank,
    write_matrix_csv,
)
from .prony import (
    IdentificationReport,
    KernelBasis,
    MatchReport,
    RankStabilizationReport,
    RecoveryError,
    RecoveryResult,
    Variety,
    extract_variety,
    full_pipeline,
    kernel_basis,
    kernel_basis_of_vandermonde,
    match_to_truth,
    rank_stabilization_check,
    recover_coefficients,
    spectral_function,
    spectral_function_batch,
    variety_identification_check,
)

__version__ = "0.1.0"

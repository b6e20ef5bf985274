"""Verification laboratory for noisy high-frequency volatility models.

Modules
-------
linalg : dense symmetric linear algebra (Cholesky, eigen, PSD and
    Loewner-order tests) on bit-exactly symmetric arrays
structures : the structured matrices A, Q, Q^-1, E, V1 with closed-form
    spectra, plus the fast orthonormal sine transform
kl : exact Gaussian Kullback-Leibler divergence and its Frobenius bounds
profiles : squared-volatility profiles with exact weighted integrals
models : exact raw and differenced covariances of the observation models
hypotheses : bump kernels, Hoelder checks, binary codes, hypothesis
    families and the L2 separation identity
certificate : finite-n certification of the lower-bound conditions,
    rate tables and KL scaling probes
montecarlo : exact Gaussian sampling, the spectral constant-volatility
    MLE, a binned baseline, and rate experiments
cli : the ``mnlab`` command-line frontend
"""

from ._version import __version__
from .certificate import (
    Certificate,
    evaluate,
    kl_scaling_probe,
    rate_exponent,
    rate_table,
    two_point_certificate_m3,
)
from .hypotheses import (
    BumpKernel,
    HypothesisFamily,
    build_family,
    bump_kernel,
    holder_check,
    kernel_constant,
    l2_separation,
    single_bump_profile,
    vg_code,
)
from .kl import (
    KLReport,
    find_loewner_constant,
    kl_bound,
    kl_bound_symmetrized,
    kl_exact,
    kl_report,
)
from .linalg import (
    EigenResult,
    cholesky_lower,
    frobenius_norm,
    is_psd,
    loewner_leq,
    solve_spd,
    sym,
    sym_eigen,
)
from .models import (
    ModelSpec,
    cov_differenced,
    cov_raw,
    diff_matrix,
    extract_v2,
    model2_decomposition,
    model3_reference_decomposition,
)
from .montecarlo import (
    ExperimentResult,
    binned_estimator,
    mle_const_sigma_m1,
    rate_experiment,
    sample_gaussian,
)
from .profiles import CallableProfile, ConstantProfile, PiecewiseConstantProfile
from .structures import (
    eig_lower_bound,
    eigvals_closed,
    eigvecs_closed,
    matrix_a,
    matrix_q,
    matrix_q_inv,
    sine_transform,
    sine_transform_inverse,
    verify_psd_majorization,
)

__all__ = [name for name in dir() if not name.startswith("_")]

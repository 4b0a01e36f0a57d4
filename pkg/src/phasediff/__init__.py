"""Phase estimation with homodyne detection under phase diffusion.

Fock-basis probe states and channels, quantum and classical Fisher
information, Bayesian inference on homodyne data, and a Monte Carlo
harness comparing estimator variance with Cramer-Rao bounds.
"""
from .fockspace import (
    FockStateMatrix,
    NoiseLevel,
    ProbeKind,
    ProbeSpec,
    TruncationError,
    apply_phase_diffusion,
    apply_phase_shift,
    choose_truncation,
    make_coherent,
    make_probe,
    make_squeezed_vacuum,
)
from .metrology import QfiResult, analytic_qfi, cr_bound, phase_derivative, qfi, sld_qfi
from .homodyne import (
    HomodyneSample,
    LikelihoodModel,
    classical_fisher,
    likelihood_point,
    log_likelihood_set,
    sample_homodyne,
)
from .bayes import EstimationResult, PosteriorGrid, estimate, jeffreys_prior, posterior_from_samples
from .experiments import CurvePoint, RunConfig, run_km_curve, run_vm_sweep, summarize

__version__ = "0.1.0"

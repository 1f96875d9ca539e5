"""Bayesian function-on-scalar regression emulator for simulator ensembles."""

from .ar1 import Ar1Spec, build_cov, cov_logdet, cov_solve, rho_domain
from .basis import BasisSystem, eval_basis, make_basis
from .diagnostics import acf_series, autocorr, convergence_table, ess, format_table, rhat
from .empirical_bayes import EBEstimates, PilotEstimates, eb_hyperparams, fit_pilot
from .errors import (
    BfosrError,
    ConfigError,
    IngestionError,
    InitializationError,
    InvalidDimensionError,
    InvalidRangeError,
    MisalignedGridError,
    OutOfDomainError,
    SingularDesignError,
)
from .io import (
    PRESETS,
    RunConfig,
    ingest,
    load_config,
    load_draws,
    save_draws,
    write_dataset_csv,
)
from .model import (
    EnsembleDataset,
    HyperParams,
    ParamState,
    log_likelihood,
    log_prior,
    simulate_dataset,
    synthetic_design,
)
from .posterior import (
    CurveSummary,
    KrigeResult,
    RopeResult,
    default_pred_times,
    krige,
    kriging_blocks,
    rope_probability,
    summarize_beta,
    summarize_mean_curve,
    summarize_scenario,
)
from .sampler import DrawStore, GibbsKernel, SamplerConfig, run_chains
from .scoring import LpmlResult, WaicResult, lpml, predictive_mse, waic

__version__ = "0.1.0"

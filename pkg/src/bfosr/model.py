"""Dataset and parameter containers plus the joint log-density of the model.

The observation model for a trajectory from scenario i and simulator j is

    y_ij = Theta @ b_z[:, i] + eps_ij,     eps_ij ~ N_D(0, sigma2 * R(rho))

with hierarchically centered priors on the spline scores:

    b_z[:, i] | b_w, sig2_z   ~ N_K(b_w @ w_i, sig2_z * P^-1)
    b_w[:, k] | sig2_w[k]     ~ N_K(0, sig2_w[k] * P^-1)

inverse-gamma priors on all variance components, a gamma prior on the
scale hyperparameter psi of the residual variance, and a standard normal
prior on rho truncated (without renormalization) to the domain of the
active covariance mode.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import gammaln

from .ar1 import Ar1Spec, build_cov, rho_domain
from .basis import BasisSystem, eval_basis
from .errors import InvalidDimensionError, InvalidRangeError

__all__ = [
    "EnsembleDataset",
    "HyperParams",
    "ParamState",
    "log_likelihood",
    "log_prior",
    "simulate_dataset",
    "synthetic_design",
    "invgamma_logpdf",
    "gamma_logpdf",
]


def invgamma_logpdf(x: float, a: float, b: float) -> float:
    """log density of the inverse gamma with shape a and scale b at x."""
    if x <= 0:
        return -np.inf
    return a * np.log(b) - gammaln(a) - (a + 1.0) * np.log(x) - b / x


def gamma_logpdf(x: float, shape: float, rate: float) -> float:
    """log density of the gamma with given shape and rate at x."""
    if x <= 0:
        return -np.inf
    return shape * np.log(rate) - gammaln(shape) + (shape - 1.0) * np.log(x) - rate * x


@dataclass(frozen=True)
class EnsembleDataset:
    """Observed trajectories with their scenario covariates and time grid.

    Y holds one row per (scenario, simulator) trajectory, already on the
    modeling (log) scale.  W has one row per scenario with a leading 1.
    ``group_of[n]`` is the 0-based scenario index of row n.
    """

    Y: np.ndarray
    W: np.ndarray
    group_of: np.ndarray
    times: np.ndarray
    scenario_ids: tuple = ()
    model_ids: tuple = ()
    covariate_names: tuple = ()

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=float)
        W = np.asarray(self.W, dtype=float)
        group = np.asarray(self.group_of, dtype=int)
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "group_of", group)
        object.__setattr__(self, "times", times)
        if Y.ndim != 2 or W.ndim != 2 or group.ndim != 1 or times.ndim != 1:
            raise InvalidDimensionError("Y and W must be 2-D; group_of and times 1-D")
        if Y.shape[0] != group.size:
            raise InvalidDimensionError("one group index per Y row is required")
        if Y.shape[1] != times.size:
            raise InvalidDimensionError("Y columns must match the time grid")
        if np.any(np.diff(times) <= 0):
            raise InvalidRangeError("times must be strictly increasing")
        if not np.all(np.isfinite(Y)):
            raise InvalidRangeError("Y contains non-finite entries")
        if not np.allclose(W[:, 0], 1.0):
            raise InvalidRangeError("the first column of W must be all ones")
        if np.linalg.matrix_rank(W) < W.shape[1]:
            raise InvalidRangeError("W must have full column rank")
        if group.min(initial=0) < 0 or (group.size and group.max() >= W.shape[0]):
            raise InvalidRangeError("group_of entries must index rows of W")
        counts = np.bincount(group, minlength=W.shape[0])
        if np.any(counts == 0):
            raise InvalidRangeError("every scenario needs at least one trajectory")

    @property
    def I(self) -> int:
        return self.W.shape[0]

    @property
    def D(self) -> int:
        return self.times.size

    @property
    def N(self) -> int:
        return self.Y.shape[0]

    @property
    def p(self) -> int:
        return self.W.shape[1] - 1

    @property
    def counts(self) -> np.ndarray:
        """Trajectories per scenario (J_i)."""
        return np.bincount(self.group_of, minlength=self.I)

    def scenario_sums(self) -> np.ndarray:
        """I x D matrix of per-scenario response sums."""
        out = np.zeros((self.I, self.D))
        np.add.at(out, self.group_of, self.Y)
        return out


@dataclass(frozen=True)
class HyperParams:
    """Fixed prior constants of the hierarchy."""

    a_w: np.ndarray
    b_w: np.ndarray
    a_z: float
    b_z: float
    nu: float
    nu0: float
    psi0: float
    alpha: float = 0.01
    K: int = 8

    def __post_init__(self):
        object.__setattr__(self, "a_w", np.asarray(self.a_w, dtype=float))
        object.__setattr__(self, "b_w", np.asarray(self.b_w, dtype=float))
        vals = np.concatenate([self.a_w, self.b_w, [self.a_z, self.b_z, self.nu, self.nu0, self.psi0]])
        if np.any(vals <= 0):
            raise InvalidRangeError("all hyperparameters must be strictly positive")
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidRangeError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.a_w.shape != self.b_w.shape:
            raise InvalidDimensionError("a_w and b_w must have matching length p+1")


@dataclass(frozen=True)
class ParamState:
    """One point in the sampler's state space."""

    b_w: np.ndarray     # K x (p+1) fixed-effect scores
    b_z: np.ndarray     # K x I random-effect scores
    sig2_w: np.ndarray  # p+1 prior variances of b_w columns
    sig2_z: float
    sigma2: float
    psi: float
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "b_w", np.asarray(self.b_w, dtype=float))
        object.__setattr__(self, "b_z", np.asarray(self.b_z, dtype=float))
        object.__setattr__(self, "sig2_w", np.asarray(self.sig2_w, dtype=float))
        if self.b_w.ndim != 2 or self.b_z.ndim != 2:
            raise InvalidDimensionError("b_w and b_z must be 2-D score matrices")
        if self.b_w.shape[0] != self.b_z.shape[0]:
            raise InvalidDimensionError("b_w and b_z must share the basis dimension K")
        if self.sig2_w.shape != (self.b_w.shape[1],):
            raise InvalidDimensionError("sig2_w needs one entry per b_w column")

    def replace(self, **changes) -> "ParamState":
        return replace(self, **changes)


def _mean_rows(state: ParamState, data: EnsembleDataset, theta: np.ndarray) -> np.ndarray:
    """N x D fitted means Theta @ b_z[:, group] per trajectory row."""
    curves = theta @ state.b_z  # D x I
    return curves[:, data.group_of].T


def log_likelihood(
    state: ParamState,
    data: EnsembleDataset,
    basis: BasisSystem,
    cov_mode: str = "continuous",
    base_step: float = 10.0,
    literal_variant: str = "obs",
) -> float:
    """Sum of N_D log densities of all trajectories at the current state.

    Dimension mismatches raise; a state outside the parameter domain
    (non-positive variance, rho outside the mode's interval, a numerically
    singular covariance) yields -inf so the value is safe to use in
    Metropolis ratios.
    """
    theta = eval_basis(basis, data.times)
    if state.b_z.shape != (basis.K, data.I):
        raise InvalidDimensionError(
            f"b_z must be K x I = {(basis.K, data.I)}, got {state.b_z.shape}"
        )
    lo, hi = rho_domain(cov_mode, literal_variant)
    if state.sigma2 <= 0 or not lo < state.rho < hi:
        return -np.inf
    spec = Ar1Spec(state.sigma2, state.rho, cov_mode, base_step, literal_variant)
    try:
        factor = cho_factor(build_cov(spec, data.times), lower=True)
    except np.linalg.LinAlgError:
        return -np.inf
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    resid = data.Y - _mean_rows(state, data, theta)
    quad = float(np.sum(resid.T * cho_solve(factor, resid.T)))
    n, d = data.N, data.D
    return -0.5 * (n * d * np.log(2.0 * np.pi) + n * logdet + quad)


def log_prior(
    state: ParamState,
    hp: HyperParams,
    W: np.ndarray,
    basis: BasisSystem,
    cov_mode: str = "continuous",
    literal_variant: str = "obs",
) -> float:
    """Sum of all prior log densities at the current state.

    Non-positive variances and out-of-domain rho return -inf rather than
    raising.  The truncation of rho's standard normal prior is left
    unnormalized; the missing constant cancels in every Metropolis ratio.
    """
    W = np.asarray(W, dtype=float)
    K = basis.K
    if np.any(state.sig2_w <= 0) or state.sig2_z <= 0 or state.sigma2 <= 0 or state.psi <= 0:
        return -np.inf
    lo, hi = rho_domain(cov_mode, literal_variant)
    if not lo < state.rho < hi:
        return -np.inf

    P = basis.P
    sign, logdet_p = np.linalg.slogdet(P)
    total = 0.0

    # random-effect scores around their regression means
    resid = state.b_z - state.b_w @ W.T  # K x I
    quad_z = float(np.sum(resid * (P @ resid)))
    n_i = W.shape[0]
    total += 0.5 * n_i * (logdet_p - K * np.log(state.sig2_z))
    total += -0.5 * n_i * K * np.log(2.0 * np.pi) - 0.5 * quad_z / state.sig2_z

    # fixed-effect scores, one variance per column
    quad_w = np.einsum("lk,lm,mk->k", state.b_w, P, state.b_w)
    total += 0.5 * float(np.sum(logdet_p - K * np.log(state.sig2_w)))
    total += -0.5 * state.sig2_w.size * K * np.log(2.0 * np.pi)
    total += -0.5 * float(np.sum(quad_w / state.sig2_w))

    for k in range(state.sig2_w.size):
        total += invgamma_logpdf(state.sig2_w[k], hp.a_w[k], hp.b_w[k])
    total += invgamma_logpdf(state.sig2_z, hp.a_z, hp.b_z)
    total += invgamma_logpdf(state.sigma2, hp.nu / 2.0, hp.nu * state.psi / 2.0)
    total += gamma_logpdf(state.psi, hp.nu0 / 2.0, hp.nu0 / (2.0 * hp.psi0))
    total += -0.5 * state.rho**2 - 0.5 * np.log(2.0 * np.pi)
    return float(total)


def simulate_dataset(
    truth: ParamState,
    design: EnsembleDataset,
    basis: BasisSystem,
    seed,
    cov_mode: str = "continuous",
    base_step: float = 10.0,
    literal_variant: str = "obs",
) -> EnsembleDataset:
    """Draw responses from the observation model at the given truth.

    The design argument supplies W, group_of, times, and labels; its Y is
    ignored.  Deterministic given the seed.
    """
    rng = np.random.default_rng(seed)
    theta = eval_basis(basis, design.times)
    mean = _mean_rows(truth, design, theta)
    spec = Ar1Spec(truth.sigma2, truth.rho, cov_mode, base_step, literal_variant)
    chol = np.linalg.cholesky(build_cov(spec, design.times))
    eps = rng.standard_normal((design.N, design.D)) @ chol.T
    return replace(design, Y=mean + eps)


def synthetic_design(
    I: int,
    J: int,
    times,
    p: int = 5,
    seed=0,
    levels=(1.0, 2.0, 3.0),
) -> EnsembleDataset:
    """A balanced design skeleton (Y zeroed) with covariate levels.

    The first min(3, I) scenarios hold every covariate at a common level,
    mirroring the reference scenarios of ensemble studies; the rest draw
    levels at random.  Retries until W has full column rank.
    """
    if I < 1 or J < 1:
        raise InvalidRangeError("need at least one scenario and one simulator")
    times = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    levels = np.asarray(levels, dtype=float)
    for _ in range(64):
        X = rng.choice(levels, size=(I, p))
        for r in range(min(3, I)):
            X[r] = levels[min(r, levels.size - 1)]
        W = np.column_stack([np.ones(I), X])
        if np.linalg.matrix_rank(W) == p + 1:
            break
    else:
        raise InvalidRangeError("could not draw a full-rank design")
    group = np.repeat(np.arange(I), J)
    return EnsembleDataset(
        Y=np.zeros((I * J, times.size)),
        W=W,
        group_of=group,
        times=times,
        scenario_ids=tuple(f"s{i + 1:02d}" for i in range(I)),
        model_ids=tuple(f"m{j + 1}" for _ in range(I) for j in range(J)),
        covariate_names=("intercept",) + tuple(f"x{k + 1}" for k in range(p)),
    )

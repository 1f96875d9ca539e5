"""Blocked Gibbs sampler with a random-walk step for the correlation parameter.

Every full conditional the sweep uses is exposed as a distribution object
with ``sample`` and ``logpdf`` methods, built by :class:`GibbsKernel`.
The sweep itself draws from exactly those objects, so tests that verify
the conditionals against the joint density exercise the production path.

Update order per sweep: scenario scores, fixed-effect scores, the three
variance groups, the residual-scale hyperparameter, then the correlation
parameter by a reflective Metropolis step whose step size adapts toward a
0.4 acceptance rate during warmup only.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .ar1 import Ar1Spec, build_cov, rho_domain
from .basis import BasisSystem, eval_basis
from .errors import InitializationError, InvalidRangeError
from .model import (
    EnsembleDataset,
    HyperParams,
    ParamState,
    gamma_logpdf,
    invgamma_logpdf,
    log_likelihood,
    log_prior,
)
from .empirical_bayes import fit_pilot

__all__ = [
    "SamplerConfig",
    "DrawStore",
    "GibbsKernel",
    "ScenarioScoresConditional",
    "MatrixNormalConditional",
    "InvGammaDist",
    "GammaDist",
    "run_chains",
]

TARGET_ACCEPT = 0.4


@dataclass(frozen=True)
class SamplerConfig:
    """Chain layout, seeding, and covariance-mode settings for a run."""

    n_chains: int = 4
    n_iter: int = 20000
    n_warmup: int = 15000
    thin: int = 1
    seed: int = 0
    rho_step: float = 0.05
    cov_mode: str = "continuous"
    base_step: float = 10.0
    literal_variant: str = "obs"
    progress: bool = False

    def __post_init__(self):
        if self.n_chains < 1:
            raise InvalidRangeError("n_chains must be at least 1")
        if self.n_warmup < 0 or self.n_iter <= self.n_warmup:
            raise InvalidRangeError("need 0 <= n_warmup < n_iter")
        if self.thin < 1:
            raise InvalidRangeError("thin must be at least 1")
        if not self.rho_step > 0:
            raise InvalidRangeError("rho_step must be positive")

    @property
    def kept_per_chain(self) -> int:
        return (self.n_iter - self.n_warmup + self.thin - 1) // self.thin


@dataclass
class DrawStore:
    """Retained posterior draws from all chains, stacked chain-major.

    Row r belongs to chain ``chain[r]`` and post-warmup iteration
    ``iteration[r]``.  ``loglik[r, n]`` is the log density of trajectory n
    under the state of row r, the unit the predictive scores work on.
    """

    b_w: np.ndarray       # R x K x (p+1)
    b_z: np.ndarray       # R x K x I
    sig2_w: np.ndarray    # R x (p+1)
    sig2_z: np.ndarray    # R
    sigma2: np.ndarray    # R
    psi: np.ndarray       # R
    rho: np.ndarray       # R
    loglik: np.ndarray    # R x N
    chain: np.ndarray     # R, 0-based chain index
    iteration: np.ndarray  # R, iteration number within the chain
    seed: int
    rho_accept: np.ndarray      # per chain, post-warmup acceptance rate
    rho_step_final: np.ndarray  # per chain, adapted step size
    rho_step_log: np.ndarray | None = None  # R, proposal step at each draw

    @property
    def n_draws(self) -> int:
        return self.rho.size

    @property
    def n_chains(self) -> int:
        return int(self.chain.max()) + 1 if self.chain.size else 0

    def by_chain(self, values: np.ndarray) -> np.ndarray:
        """Reshape a length-R draw vector to (n_chains, kept_per_chain)."""
        values = np.asarray(values)
        R, C = values.shape[0], self.n_chains
        if R % C:
            raise InvalidRangeError("draws are not evenly split across chains")
        return values.reshape(C, R // C, *values.shape[1:])

    def state_at(self, r: int) -> ParamState:
        return ParamState(
            b_w=self.b_w[r], b_z=self.b_z[r], sig2_w=self.sig2_w[r],
            sig2_z=float(self.sig2_z[r]), sigma2=float(self.sigma2[r]),
            psi=float(self.psi[r]), rho=float(self.rho[r]),
        )


@dataclass
class InvGammaDist:
    """Inverse gamma in shape/scale form."""

    a: float
    b: float

    def sample(self, rng) -> float:
        return float(self.b / rng.gamma(self.a))

    def logpdf(self, x: float) -> float:
        return invgamma_logpdf(x, self.a, self.b)


@dataclass
class GammaDist:
    """Gamma in shape/rate form."""

    shape: float
    rate: float

    def sample(self, rng) -> float:
        return float(rng.gamma(self.shape) / self.rate)

    def logpdf(self, x: float) -> float:
        return gamma_logpdf(x, self.shape, self.rate)


@dataclass
class ScenarioScoresConditional:
    """Independent K-variate Gaussians, one per scenario, in precision form."""

    means: np.ndarray            # K x I
    chol_precs: list             # scenario index -> lower Cholesky of its precision

    def sample(self, rng) -> np.ndarray:
        K, I = self.means.shape
        out = np.empty((K, I))
        eps = rng.standard_normal((K, I))
        for i in range(I):
            out[:, i] = self.means[:, i] + solve_triangular(
                self.chol_precs[i], eps[:, i], lower=True, trans="T", check_finite=False
            )
        return out

    def logpdf(self, b_z: np.ndarray) -> float:
        K, I = self.means.shape
        total = -0.5 * K * I * np.log(2.0 * np.pi)
        for i in range(I):
            L = self.chol_precs[i]
            u = L.T @ (b_z[:, i] - self.means[:, i])
            total += float(np.sum(np.log(np.diag(L)))) - 0.5 * float(u @ u)
        return float(total)


@dataclass
class MatrixNormalConditional:
    """Gaussian on a K x q score matrix with separable precision M kron P."""

    mean: np.ndarray    # K x q
    L_P: np.ndarray     # lower Cholesky of the row precision P
    L_M: np.ndarray     # lower Cholesky of the column precision M

    def sample(self, rng) -> np.ndarray:
        K, q = self.mean.shape
        eps = rng.standard_normal((K, q))
        half = solve_triangular(self.L_P, eps, lower=True, trans="T", check_finite=False)
        return self.mean + solve_triangular(
            self.L_M, half.T, lower=True, trans="T", check_finite=False
        ).T

    def logpdf(self, x: np.ndarray) -> float:
        K, q = self.mean.shape
        delta = x - self.mean
        P = self.L_P @ self.L_P.T
        M = self.L_M @ self.L_M.T
        quad = float(np.sum(delta * (P @ delta @ M)))
        logdet = 2.0 * (K * np.sum(np.log(np.diag(self.L_M)))
                        + q * np.sum(np.log(np.diag(self.L_P))))
        return float(-0.5 * K * q * np.log(2.0 * np.pi) + 0.5 * logdet - 0.5 * quad)


class GibbsKernel:
    """Precomputed quantities and full-conditional builders for one dataset."""

    def __init__(
        self,
        data: EnsembleDataset,
        basis: BasisSystem,
        hp: HyperParams,
        cov_mode: str = "continuous",
        base_step: float = 10.0,
        literal_variant: str = "obs",
    ):
        self.data = data
        self.basis = basis
        self.hp = hp
        self.cov_mode = cov_mode
        self.base_step = base_step
        self.literal_variant = literal_variant

        self.theta = eval_basis(basis, data.times)          # D x K
        self.S = data.scenario_sums()                       # I x D
        self.counts = data.counts                           # I
        self.WtW = data.W.T @ data.W
        self.L_P = np.linalg.cholesky(basis.P)
        self.rho_lo, self.rho_hi = rho_domain(cov_mode, literal_variant)
        self._corr_cache = (None, None, None)               # rho -> (factor, logdet)

    # -- shared pieces -------------------------------------------------

    def _corr(self, rho: float):
        """Cholesky factor and log determinant of the unit-variance correlation."""
        cached_rho, factor, logdet = self._corr_cache
        if cached_rho == rho:
            return factor, logdet
        spec = Ar1Spec(1.0, rho, self.cov_mode, self.base_step, self.literal_variant)
        R = build_cov(spec, self.data.times)
        factor = cho_factor(R, lower=True, check_finite=False)
        logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
        self._corr_cache = (rho, factor, logdet)
        return factor, logdet

    def _residuals(self, state: ParamState) -> np.ndarray:
        return self.data.Y - (self.theta @ state.b_z)[:, self.data.group_of].T

    def joint_log_density(self, state: ParamState) -> float:
        return log_likelihood(
            state, self.data, self.basis, self.cov_mode, self.base_step, self.literal_variant
        ) + log_prior(
            state, self.hp, self.data.W, self.basis, self.cov_mode, self.literal_variant
        )

    # -- full conditionals ----------------------------------------------

    def bz_conditional(self, state: ParamState) -> ScenarioScoresConditional:
        factor, _ = self._corr(state.rho)
        theta = self.theta
        A = theta.T @ cho_solve(factor, theta, check_finite=False) / state.sigma2  # K x K
        H = theta.T @ cho_solve(factor, self.S.T, check_finite=False) / state.sigma2  # K x I
        H = H + (self.basis.P @ (state.b_w @ self.data.W.T)) / state.sig2_z
        chols = {}
        for c in np.unique(self.counts):
            chols[int(c)] = np.linalg.cholesky(c * A + self.basis.P / state.sig2_z)
        means = np.empty_like(H)
        chol_list = []
        for i, c in enumerate(self.counts):
            L = chols[int(c)]
            chol_list.append(L)
            y = solve_triangular(L, H[:, i], lower=True, check_finite=False)
            means[:, i] = solve_triangular(L, y, lower=True, trans="T", check_finite=False)
        return ScenarioScoresConditional(means=means, chol_precs=chol_list)

    def bw_conditional(self, state: ParamState) -> MatrixNormalConditional:
        M = self.WtW / state.sig2_z + np.diag(1.0 / state.sig2_w)
        L_M = np.linalg.cholesky(M)
        rhs = state.b_z @ self.data.W / state.sig2_z  # K x q
        y = solve_triangular(L_M, rhs.T, lower=True, check_finite=False)
        mean = solve_triangular(L_M, y, lower=True, trans="T", check_finite=False).T
        return MatrixNormalConditional(mean=mean, L_P=self.L_P, L_M=L_M)

    def sig2w_conditional(self, state: ParamState, k: int) -> InvGammaDist:
        col = state.b_w[:, k]
        return InvGammaDist(
            a=self.hp.a_w[k] + self.basis.K / 2.0,
            b=self.hp.b_w[k] + 0.5 * float(col @ self.basis.P @ col),
        )

    def sig2z_conditional(self, state: ParamState) -> InvGammaDist:
        resid = state.b_z - state.b_w @ self.data.W.T
        quad = float(np.sum(resid * (self.basis.P @ resid)))
        return InvGammaDist(
            a=self.hp.a_z + self.data.I * self.basis.K / 2.0,
            b=self.hp.b_z + 0.5 * quad,
        )

    def sigma2_conditional(self, state: ParamState) -> InvGammaDist:
        factor, _ = self._corr(state.rho)
        resid = self._residuals(state)
        quad = float(np.sum(resid.T * cho_solve(factor, resid.T, check_finite=False)))
        n, d = self.data.N, self.data.D
        return InvGammaDist(
            a=self.hp.nu / 2.0 + n * d / 2.0,
            b=self.hp.nu * state.psi / 2.0 + 0.5 * quad,
        )

    def psi_conditional(self, state: ParamState) -> GammaDist:
        return GammaDist(
            shape=self.hp.nu0 / 2.0 + self.hp.nu / 2.0,
            rate=self.hp.nu0 / (2.0 * self.hp.psi0) + self.hp.nu / (2.0 * state.sigma2),
        )

    def rho_log_target(self, state: ParamState, rho: float) -> float:
        """Unnormalized log full conditional of the correlation parameter."""
        if not self.rho_lo < rho < self.rho_hi:
            return -np.inf
        try:
            factor, logdet = self._corr(rho)
        except np.linalg.LinAlgError:
            return -np.inf
        resid = self._residuals(state)
        quad = float(np.sum(resid.T * cho_solve(factor, resid.T, check_finite=False)))
        return -0.5 * self.data.N * logdet - 0.5 * quad / state.sigma2 - 0.5 * rho * rho

    # -- sweep ----------------------------------------------------------

    def _reflect(self, value: float) -> float:
        lo, hi = self.rho_lo, self.rho_hi
        span = hi - lo
        for _ in range(64):
            if value > hi:
                value = 2.0 * hi - value
            elif value < lo:
                value = 2.0 * lo - value
            else:
                return value
        return lo + span / 2.0  # pathologically large step; land mid-domain

    def sweep(self, state: ParamState, rng, rho_step: float) -> tuple[ParamState, bool]:
        """One full Gibbs scan.  Returns the new state and whether rho moved."""
        b_z = self.bz_conditional(state).sample(rng)
        state = state.replace(b_z=b_z)

        b_w = self.bw_conditional(state).sample(rng)
        state = state.replace(b_w=b_w)

        sig2_w = np.array([
            self.sig2w_conditional(state, k).sample(rng) for k in range(state.sig2_w.size)
        ])
        state = state.replace(sig2_w=sig2_w)
        state = state.replace(sig2_z=self.sig2z_conditional(state).sample(rng))
        state = state.replace(sigma2=self.sigma2_conditional(state).sample(rng))
        state = state.replace(psi=self.psi_conditional(state).sample(rng))

        proposal = self._reflect(state.rho + rho_step * rng.standard_normal())
        log_acc = self.rho_log_target(state, proposal) - self.rho_log_target(state, state.rho)
        accepted = np.log(rng.uniform()) < log_acc
        if accepted:
            state = state.replace(rho=float(proposal))
        return state, bool(accepted)

    def loglik_rows(self, state: ParamState) -> np.ndarray:
        """Per-trajectory Gaussian log densities at the current state."""
        factor, logdet = self._corr(state.rho)
        resid = self._residuals(state)
        quad = np.sum(resid.T * cho_solve(factor, resid.T, check_finite=False), axis=0)
        d = self.data.D
        return -0.5 * (d * np.log(2.0 * np.pi * state.sigma2) + logdet + quad / state.sigma2)

    # -- initialization ---------------------------------------------------

    def default_init(self, rng) -> ParamState:
        """Pilot estimates with multiplicative jitter; variances at prior means."""
        pilot = fit_pilot(self.data, self.basis)
        hp = self.hp

        def ig_center(a, b):
            return b / (a - 1.0) if a > 1.0 else b / (a + 1.0)

        jit = lambda shape=(): rng.uniform(0.9, 1.1, size=shape)
        sig2_w = np.array([ig_center(hp.a_w[k], hp.b_w[k]) for k in range(hp.a_w.size)])
        state = ParamState(
            b_w=pilot.b_w * jit(pilot.b_w.shape),
            b_z=pilot.b_z * jit(pilot.b_z.shape),
            sig2_w=sig2_w * jit(sig2_w.shape),
            sig2_z=float(ig_center(hp.a_z, hp.b_z) * jit()),
            sigma2=float(ig_center(hp.nu / 2.0, hp.nu * hp.psi0 / 2.0) * jit()),
            psi=float(hp.psi0 * jit()),
            rho=(self.rho_lo + self.rho_hi) / 2.0,
        )
        return state


def run_chains(
    data: EnsembleDataset,
    basis: BasisSystem,
    hp: HyperParams,
    config: SamplerConfig,
    init: ParamState | None = None,
) -> DrawStore:
    """Run the configured chains sequentially and collect retained draws.

    Chains get independent child streams of the run seed, so results are
    reproducible for a given (data, config) regardless of platform.  When
    ``init`` is given it is used for every chain as is; otherwise each
    chain starts from independently jittered pilot estimates.
    """
    kernel = GibbsKernel(
        data, basis, hp, config.cov_mode, config.base_step, config.literal_variant
    )
    kept = config.kept_per_chain
    R = config.n_chains * kept
    K, I, q = basis.K, data.I, data.p + 1

    store = DrawStore(
        b_w=np.empty((R, K, q)),
        b_z=np.empty((R, K, I)),
        sig2_w=np.empty((R, q)),
        sig2_z=np.empty(R),
        sigma2=np.empty(R),
        psi=np.empty(R),
        rho=np.empty(R),
        loglik=np.empty((R, data.N)),
        chain=np.empty(R, dtype=np.int64),
        iteration=np.empty(R, dtype=np.int64),
        seed=config.seed,
        rho_accept=np.zeros(config.n_chains),
        rho_step_final=np.zeros(config.n_chains),
        rho_step_log=np.empty(R),
    )

    children = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    report_every = max(1, config.n_iter // 10)
    row = 0
    for c in range(config.n_chains):
        rng = np.random.default_rng(children[c])
        state = kernel.default_init(rng) if init is None else init
        joint = kernel.joint_log_density(state)
        if not np.isfinite(joint):
            raise InitializationError(
                f"chain {c}: joint log density is {joint} at the initial state"
            )
        rho_step = config.rho_step
        accepted_post = 0
        accepted_total = 0
        for t in range(config.n_iter):
            state, accepted = kernel.sweep(state, rng, rho_step)
            accepted_total += int(accepted)
            if t < config.n_warmup:
                # stochastic approximation toward the target acceptance rate
                gain = (t + 1.0) ** -0.6
                rho_step = float(np.clip(
                    rho_step * np.exp(gain * (float(accepted) - TARGET_ACCEPT)),
                    1e-5, kernel.rho_hi - kernel.rho_lo,
                ))
            else:
                accepted_post += int(accepted)
                if (t - config.n_warmup) % config.thin == 0:
                    store.b_w[row] = state.b_w
                    store.b_z[row] = state.b_z
                    store.sig2_w[row] = state.sig2_w
                    store.sig2_z[row] = state.sig2_z
                    store.sigma2[row] = state.sigma2
                    store.psi[row] = state.psi
                    store.rho[row] = state.rho
                    store.loglik[row] = kernel.loglik_rows(state)
                    store.chain[row] = c
                    store.iteration[row] = t
                    store.rho_step_log[row] = rho_step
                    row += 1
            if config.progress and (t + 1) % report_every == 0:
                rate = accepted_total / (t + 1.0)
                print(
                    f"chain {c + 1}/{config.n_chains}: iteration "
                    f"{t + 1}/{config.n_iter}, rho acceptance {rate:.2f}",
                    file=sys.stderr,
                )
        store.rho_accept[c] = accepted_post / max(1, config.n_iter - config.n_warmup)
        store.rho_step_final[c] = rho_step
    return store

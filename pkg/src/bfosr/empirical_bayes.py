"""Pilot least-squares fits and the data-driven prior constants built on them.

Each inverse-gamma prior on a variance component gets its shape from the
number of penalized scores it governs and its scale from the penalized
sum of squares of the corresponding pilot estimates:

    a_z     = I * K / 2          b_z     = sum_i r_i' P r_i / 2
    a_w[k]  = K / 2              b_w[k]  = b_w_pilot[:, k]' P b_w_pilot[:, k] / 2

with r_i the pilot residual of scenario i's scores around the regression
plane.  The implied prior then concentrates near the spread the pilot fit
actually exhibits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, eval_basis
from .errors import InvalidRangeError, SingularDesignError
from .model import EnsembleDataset, HyperParams

__all__ = ["PilotEstimates", "EBEstimates", "fit_pilot", "eb_hyperparams"]


@dataclass(frozen=True)
class PilotEstimates:
    """Least-squares score estimates and residual moments used to seed priors."""

    b_z: np.ndarray             # K x I, per-scenario ordinary least squares
    b_w: np.ndarray             # K x (p+1), penalty-weighted regression of b_z on W
    scenario_means: np.ndarray  # I x D response means the OLS fit targets
    sigma2: float               # mean squared trajectory residual
    rho: float                  # pooled lag-1 residual autocorrelation, clipped


@dataclass(frozen=True)
class EBEstimates:
    """Prior constants derived from a pilot fit."""

    a_w: np.ndarray
    b_w: np.ndarray
    a_z: float
    b_z: float
    K: int
    alpha: float
    pilot: PilotEstimates

    def to_hyperparams(self, nu: float = 7.0, nu0: float = 2.0, psi0: float = 0.047) -> HyperParams:
        """Combine the derived constants with residual-variance settings."""
        return HyperParams(
            a_w=self.a_w, b_w=self.b_w, a_z=self.a_z, b_z=self.b_z,
            nu=nu, nu0=nu0, psi0=psi0, alpha=self.alpha, K=self.K,
        )


def fit_pilot(data: EnsembleDataset, basis: BasisSystem) -> PilotEstimates:
    """Two-stage least squares: scores per scenario, then scores on covariates.

    Stage one solves (Theta' Theta) b_z[:, i] = Theta' ybar_i against each
    scenario's mean trajectory.  Stage two regresses those scores on the
    covariate rows under the penalty inner product, solving the normal
    equations (W'W kron P) vec(b_w) = vec(P b_z W); the penalty drops out
    of the solution algebraically but is kept in the system solved.
    """
    theta = eval_basis(basis, data.times)
    K = basis.K
    if np.linalg.matrix_rank(theta) < K:
        raise SingularDesignError(
            f"time grid supports rank {np.linalg.matrix_rank(theta)} < K={K}; "
            "more distinct times or a smaller basis is needed"
        )
    if np.linalg.matrix_rank(data.W) < data.W.shape[1]:
        raise SingularDesignError("covariate matrix W is rank deficient")

    ybar = data.scenario_sums() / data.counts[:, None]  # I x D
    gram = theta.T @ theta
    b_z = np.linalg.solve(gram, theta.T @ ybar.T)       # K x I

    WtW = data.W.T @ data.W
    rhs = (basis.P @ b_z @ data.W).reshape(-1, order="F")
    vec = np.linalg.solve(np.kron(WtW, basis.P), rhs)
    b_w = vec.reshape((K, data.W.shape[1]), order="F")

    resid = data.Y - (theta @ b_z)[:, data.group_of].T
    sigma2 = float(np.mean(resid**2))
    num = float(np.sum(resid[:, :-1] * resid[:, 1:]))
    den = float(np.sum(resid**2))
    rho = float(np.clip(num / den if den > 0 else 0.5, 0.01, 0.99))
    return PilotEstimates(b_z=b_z, b_w=b_w, scenario_means=ybar, sigma2=sigma2, rho=rho)


def eb_hyperparams(data: EnsembleDataset, basis: BasisSystem) -> EBEstimates:
    """Prior shape/scale constants matched to the pilot fit's penalized spread."""
    pilot = fit_pilot(data, basis)
    K, I = basis.K, data.I
    P = basis.P

    resid = pilot.b_z - pilot.b_w @ data.W.T  # K x I
    b_z_scale = 0.5 * float(np.sum(resid * (P @ resid)))
    b_w_scale = 0.5 * np.einsum("lk,lm,mk->k", pilot.b_w, P, pilot.b_w)
    if b_z_scale <= 0 or np.any(b_w_scale <= 0):
        raise InvalidRangeError(
            "pilot fit is degenerate: a penalized sum of squares vanished, "
            "so no positive prior scale can be derived"
        )
    return EBEstimates(
        a_w=np.full(data.p + 1, K / 2.0),
        b_w=b_w_scale,
        a_z=I * K / 2.0,
        b_z=b_z_scale,
        K=K,
        alpha=basis.alpha,
        pilot=pilot,
    )

"""Predictive scores over trajectories: WAIC, LPML, and mean squared error.

The observation unit is one whole trajectory (one row of Y); ``loglik``
arrays are draw-by-trajectory matrices of Gaussian log densities, exactly
what the sampler stores.  All averages over draws run through
log-sum-exp so the scores stay finite wherever the inputs allow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .basis import BasisSystem, eval_basis
from .errors import InvalidDimensionError
from .model import EnsembleDataset
from .sampler import DrawStore

__all__ = ["WaicResult", "LpmlResult", "waic", "lpml", "predictive_mse"]


def _check_loglik(loglik) -> np.ndarray:
    ll = np.asarray(loglik, dtype=float)
    if ll.ndim != 2 or ll.shape[0] < 2:
        raise InvalidDimensionError("loglik must be (n_draws >= 2) x n_trajectories")
    return ll


@dataclass(frozen=True)
class WaicResult:
    """Widely applicable information criterion on the deviance scale."""

    waic: float
    lppd: float
    p_waic: float
    pointwise_lppd: np.ndarray
    pointwise_p: np.ndarray


@dataclass(frozen=True)
class LpmlResult:
    """Log pseudo marginal likelihood from harmonic-mean CPOs.

    ``n_unstable`` counts trajectories whose CPO underflowed to zero;
    each contributes -inf to the total, which is reported as is.
    """

    lpml: float
    log_cpo: np.ndarray
    n_unstable: int


def waic(loglik) -> WaicResult:
    """-2 * (lppd - p_waic) with the variance-based effective complexity."""
    ll = _check_loglik(loglik)
    R = ll.shape[0]
    pointwise_lppd = logsumexp(ll, axis=0) - np.log(R)
    pointwise_p = ll.var(axis=0, ddof=1)
    lppd = float(pointwise_lppd.sum())
    p = float(pointwise_p.sum())
    return WaicResult(
        waic=-2.0 * (lppd - p), lppd=lppd, p_waic=p,
        pointwise_lppd=pointwise_lppd, pointwise_p=pointwise_p,
    )


def lpml(loglik) -> LpmlResult:
    """Sum of log conditional predictive ordinates across trajectories."""
    ll = _check_loglik(loglik)
    R = ll.shape[0]
    log_cpo = -(logsumexp(-ll, axis=0) - np.log(R))
    n_unstable = int(np.sum(~np.isfinite(log_cpo)))
    return LpmlResult(lpml=float(log_cpo.sum()), log_cpo=log_cpo, n_unstable=n_unstable)


def predictive_mse(store: DrawStore, data: EnsembleDataset, basis: BasisSystem) -> float:
    """Mean squared error of the posterior-mean fitted curves against Y."""
    theta = eval_basis(basis, data.times)
    b_z_bar = store.b_z.mean(axis=0)  # K x I
    fitted = (theta @ b_z_bar)[:, data.group_of].T
    return float(np.mean((data.Y - fitted) ** 2))

"""AR(1)-structured error covariance in three selectable modes.

All modes share the shape ``Sigma = sigma2 * R(rho)`` with unit-diagonal
correlation R:

* ``decade``: R[i, j] = rho**|i-j| by grid index; times must be uniformly
  spaced.  rho in (-1, 1).
* ``continuous``: R[i, j] = rho**(|t_i-t_j| / base_step); any strictly
  increasing times.  rho in (0, 1), since fractional powers of a
  non-positive base are undefined.
* ``supplementary-literal``: reproduces the two audited reference
  constructors on a uniform grid.  The ``obs`` variant has lag-k entry
  rho**(2k-1); the ``full`` variant has lag-k entry rho**k.

The ``obs`` lag pattern is not positive definite for strongly negative rho
(e.g. rho = -0.5 at 8 points already fails), so its rho domain is
restricted to (0, 1), where positive definiteness holds for every size;
the ``full`` variant keeps (-1, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InvalidDimensionError, InvalidRangeError, MisalignedGridError

MODES = ("decade", "continuous", "supplementary-literal")
LITERAL_VARIANTS = ("obs", "full")


def rho_domain(mode: str, literal_variant: str = "obs") -> tuple[float, float]:
    """Open interval of valid correlation parameters for a covariance mode."""
    if mode == "continuous":
        return (0.0, 1.0)
    if mode == "decade":
        return (-1.0, 1.0)
    if mode == "supplementary-literal":
        return (0.0, 1.0) if literal_variant == "obs" else (-1.0, 1.0)
    raise InvalidRangeError(f"unknown covariance mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class Ar1Spec:
    """Marginal variance, correlation parameter, and mode of the error kernel."""

    sigma2: float
    rho: float
    mode: str = "continuous"
    base_step: float = 10.0
    literal_variant: str = "obs"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidRangeError(f"unknown covariance mode {self.mode!r}; expected one of {MODES}")
        if self.literal_variant not in LITERAL_VARIANTS:
            raise InvalidRangeError(f"literal_variant must be one of {LITERAL_VARIANTS}")
        if not self.sigma2 > 0:
            raise InvalidRangeError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.base_step > 0:
            raise InvalidRangeError(f"base_step must be positive, got {self.base_step}")
        lo, hi = rho_domain(self.mode, self.literal_variant)
        # rho = 0 is admitted only where integer exponents make it well defined
        if self.mode == "decade" or (self.mode == "supplementary-literal" and self.literal_variant == "full"):
            ok = lo < self.rho < hi or self.rho == 0.0
        else:
            ok = lo < self.rho < hi
        if not ok:
            raise InvalidRangeError(
                f"rho={self.rho} outside the domain ({lo}, {hi}) of mode {self.mode!r}"
            )


def _check_times(spec: Ar1Spec, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise InvalidDimensionError("times must be a nonempty 1-D array")
    if np.any(np.diff(t) <= 0):
        raise InvalidRangeError("times must be strictly increasing")
    if spec.mode in ("decade", "supplementary-literal") and t.size > 1:
        steps = np.diff(t)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-9):
            raise MisalignedGridError(
                f"{spec.mode} mode requires a uniform time grid, got steps {steps}"
            )
    return t


def _signed_power(rho: float, expo: np.ndarray) -> np.ndarray:
    """rho**expo with exact handling of negative bases at integer exponents."""
    mag = np.power(np.abs(rho), expo)
    if rho < 0:
        odd = np.mod(expo, 2.0) == 1.0
        mag = np.where(odd, -mag, mag)
    return mag


def _correlation(spec: Ar1Spec, t: np.ndarray) -> np.ndarray:
    if spec.mode == "continuous":
        expo = np.abs(np.subtract.outer(t, t)) / spec.base_step
        return _signed_power(spec.rho, expo)
    lag = np.abs(np.subtract.outer(np.arange(t.size), np.arange(t.size))).astype(float)
    if spec.mode == "decade" or spec.literal_variant == "full":
        return _signed_power(spec.rho, lag)
    # supplementary-literal "obs": lag-k entry rho**(2k-1), unit diagonal
    expo = np.where(lag > 0, 2.0 * lag - 1.0, 0.0)
    return _signed_power(spec.rho, expo)


def build_cov(spec: Ar1Spec, times) -> np.ndarray:
    """Materialize the |times| x |times| covariance matrix of the mode."""
    t = _check_times(spec, times)
    return spec.sigma2 * _correlation(spec, t)


def cov_logdet(spec: Ar1Spec, D: int) -> float:
    """log det of the covariance over the canonical D-point uniform grid.

    Markov modes (decade, continuous, supplementary ``full``) use the
    closed form D*log(sigma2) + (D-1)*log(1 - r^2) with lag-1 correlation
    r = rho; the supplementary ``obs`` pattern has no assumed closed form
    and is evaluated through a dense factorization.
    """
    if D < 1:
        raise InvalidDimensionError(f"need D >= 1, got {D}")
    if spec.mode == "supplementary-literal" and spec.literal_variant == "obs":
        grid = spec.base_step * np.arange(D)
        sign, val = np.linalg.slogdet(build_cov(spec, grid))
        if sign <= 0:
            raise np.linalg.LinAlgError("covariance is not positive definite")
        return float(val)
    return D * float(np.log(spec.sigma2)) + (D - 1) * float(np.log1p(-spec.rho**2))


def cov_solve(spec: Ar1Spec, times, rhs) -> np.ndarray:
    """Solve Sigma @ x = rhs through a Cholesky factorization."""
    t = _check_times(spec, times)
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != t.size:
        raise InvalidDimensionError(
            f"rhs has {b.shape[0]} rows but there are {t.size} times"
        )
    sigma = build_cov(spec, t)
    return cho_solve(cho_factor(sigma, lower=True), b)

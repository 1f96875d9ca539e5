"""Cubic B-spline bases over a time interval and their penalty matrices.

The basis is clamped (boundary knots repeated degree+1 times) with equally
spaced interior knots.  The penalty ``P = alpha * P0 + (1 - alpha) * P2``
blends a ridge/shrinkage component ``P0 = I`` with a second-order difference
smoothness component ``P2 = D2' D2``; it is positive definite for any
``alpha > 0`` and is used as a prior precision on spline scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .errors import InvalidDimensionError, InvalidRangeError, OutOfDomainError

DEGREE = 3  # cubic


@dataclass(frozen=True)
class BasisSystem:
    """A clamped cubic B-spline basis with its blended penalty.

    Attributes
    ----------
    K : int
        Number of basis functions (>= 4).
    degree : int
        Spline degree, always 3.
    knots : ndarray
        Full clamped knot vector of length K + degree + 1.
    alpha : float
        Blend weight in (0, 1] between shrinkage and smoothness.
    P0, P2, P : ndarray
        K x K shrinkage matrix (identity), second-difference Gram matrix,
        and the blended penalty ``alpha*P0 + (1-alpha)*P2``.
    """

    K: int
    degree: int
    knots: np.ndarray
    alpha: float
    P0: np.ndarray = field(repr=False)
    P2: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)

    @property
    def t_min(self) -> float:
        return float(self.knots[0])

    @property
    def t_max(self) -> float:
        return float(self.knots[-1])


def _second_difference(K: int) -> np.ndarray:
    """(K-2) x K operator with rows (1, -2, 1)."""
    d2 = np.zeros((K - 2, K))
    for r in range(K - 2):
        d2[r, r : r + 3] = (1.0, -2.0, 1.0)
    return d2


def make_basis(K: int, t_min: float, t_max: float, alpha: float) -> BasisSystem:
    """Construct a clamped cubic B-spline basis on [t_min, t_max].

    Interior knots are equally spaced.  Raises InvalidDimensionError for
    K < 4 and InvalidRangeError for a degenerate interval or alpha
    outside (0, 1].
    """
    if K < 4:
        raise InvalidDimensionError(f"need at least 4 cubic basis functions, got K={K}")
    if not t_min < t_max:
        raise InvalidRangeError(f"need t_min < t_max, got [{t_min}, {t_max}]")
    if not 0.0 < alpha <= 1.0:
        raise InvalidRangeError(f"alpha must lie in (0, 1], got {alpha}")

    n_interior = K - DEGREE - 1
    interior = np.linspace(t_min, t_max, n_interior + 2)[1:-1]
    knots = np.concatenate(
        [np.full(DEGREE + 1, float(t_min)), interior, np.full(DEGREE + 1, float(t_max))]
    )

    P0 = np.eye(K)
    d2 = _second_difference(K)
    P2 = d2.T @ d2
    P = alpha * P0 + (1.0 - alpha) * P2
    np.linalg.cholesky(P)  # fail fast if the blend is not positive definite

    for arr in (knots, P0, P2, P):
        arr.setflags(write=False)
    return BasisSystem(K=K, degree=DEGREE, knots=knots, alpha=float(alpha), P0=P0, P2=P2, P=P)


def eval_basis(basis: BasisSystem, times) -> np.ndarray:
    """Evaluate all K basis functions at the given times.

    Returns a |times| x K matrix whose rows sum to 1.  Times outside
    [t_min, t_max] raise OutOfDomainError; there is no extrapolation.
    """
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1:
        raise InvalidDimensionError("times must be one-dimensional")
    lo, hi = basis.t_min, basis.t_max
    bad = (t < lo) | (t > hi)
    if np.any(bad):
        raise OutOfDomainError(
            f"times {t[bad]} outside the basis domain [{lo}, {hi}]"
        )
    theta = BSpline.design_matrix(t, basis.knots, basis.degree).toarray()
    return theta

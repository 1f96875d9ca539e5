"""Convergence diagnostics: split-chain R-hat, paired-autocorrelation ESS, ACF.

Conventions for degenerate inputs: a quantity that is constant across all
chains gets NaN (nothing to diagnose); chains that are each constant but
disagree with one another get an R-hat of +inf (they cannot have mixed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError
from .sampler import DrawStore

__all__ = [
    "rhat", "ess", "autocorr", "DiagnosticRow", "convergence_table",
    "acf_series", "format_table",
]


def _split(chains: np.ndarray) -> np.ndarray:
    """Halve each chain, giving 2C sequences; drops the middle draw if odd."""
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 2:
        raise InvalidDimensionError("chains must be a (n_chains, n_draws) array")
    n = chains.shape[1]
    half = n // 2
    return np.concatenate([chains[:, :half], chains[:, n - half:]], axis=0)


def rhat(chains: np.ndarray) -> float:
    """Split potential scale reduction factor.

    Values near 1 indicate the split sequences agree in location and
    spread.  NaN when every draw is identical; +inf when the individual
    sequences are flat but sit at different values.
    """
    seqs = _split(chains)
    m, n = seqs.shape
    if n < 2:
        return np.nan
    if np.all(seqs == seqs.flat[0]):
        return np.nan
    means = seqs.mean(axis=1)
    variances = seqs.var(axis=1, ddof=1)
    W = variances.mean()
    B = n * means.var(ddof=1)
    if W == 0.0:
        return np.inf
    var_plus = (n - 1) / n * W + B / n
    # within-split sampling noise can push the ratio a hair under 1
    return float(max(np.sqrt(var_plus / W), 1.0))


def _autocov(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of a 1-D sequence via FFT, lags 0..n-1."""
    n = x.size
    centered = x - x.mean()
    size = int(2 ** np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(centered, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n].real
    return acov / n


def ess(chains: np.ndarray) -> float:
    """Effective sample size from split chains with Geyer's pairing rule.

    Autocorrelations are combined across sequences, summed in adjacent
    pairs, truncated at the first non-positive pair, and forced to be
    non-increasing before summation.  NaN for constant input.
    """
    seqs = _split(chains)
    m, n = seqs.shape
    if n < 4 or np.all(seqs == seqs.flat[0]):
        return np.nan
    means = seqs.mean(axis=1)
    variances = seqs.var(axis=1, ddof=1)
    W = variances.mean()
    if W == 0.0:
        return np.nan
    B_over_n = means.var(ddof=1)
    var_plus = (n - 1) / n * W + B_over_n

    acov = np.stack([_autocov(s) for s in seqs])  # m x n
    mean_acov = acov.mean(axis=0)
    rho = 1.0 - (W - mean_acov) / var_plus
    rho[0] = 1.0

    # Geyer pairs: keep while positive, then enforce monotone decrease
    n_pairs = n // 2
    pairs = rho[0:2 * n_pairs:2] + rho[1:2 * n_pairs:2]
    total = 0.0
    prev = np.inf
    for val in pairs:
        if val <= 0.0:
            break
        val = min(val, prev)
        total += val
        prev = val
    tau = max(-1.0 + 2.0 * total, 1.0 / np.log10(max(m * n, 10)))
    return float(m * n / tau)


def autocorr(x: np.ndarray, max_lag: int = 50) -> np.ndarray:
    """Sample autocorrelation of a 1-D sequence at lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidDimensionError("autocorr needs a 1-D sequence of length >= 2")
    acov = _autocov(x)
    if acov[0] == 0.0:
        out = np.full(min(max_lag, x.size - 1) + 1, np.nan)
        out[0] = 1.0
        return out
    upto = min(max_lag, x.size - 1)
    return acov[: upto + 1] / acov[0]


@dataclass(frozen=True)
class DiagnosticRow:
    """Summary and convergence measures of one scalar in the chain."""

    name: str
    mean: float
    sd: float
    q05: float
    q50: float
    q95: float
    rhat: float
    ess: float


def _scalar_series(store: DrawStore):
    """Yield (name, length-R draw vector) pairs for every tracked scalar."""
    yield "sigma2", store.sigma2
    yield "sig2_z", store.sig2_z
    yield "psi", store.psi
    yield "rho", store.rho
    for j in range(store.sig2_w.shape[1]):
        yield f"sig2_w[{j}]", store.sig2_w[:, j]
    K, q = store.b_w.shape[1:]
    for j in range(q):
        for k in range(K):
            yield f"b_w[{k}.{j}]", store.b_w[:, k, j]
    yield "log_likelihood", store.loglik.sum(axis=1)


def convergence_table(store: DrawStore) -> list:
    """Per-scalar summary rows with split R-hat and ESS across chains."""
    if store.n_chains < 2:
        raise InvalidDimensionError(
            f"convergence diagnostics need >= 2 chains, got {store.n_chains}"
        )
    if store.n_draws // store.n_chains < 4:
        raise InvalidDimensionError("convergence diagnostics need >= 4 draws per chain")
    rows = []
    for name, values in _scalar_series(store):
        chains = store.by_chain(values)
        q05, q50, q95 = np.quantile(values, [0.05, 0.5, 0.95])
        rows.append(DiagnosticRow(
            name=name,
            mean=float(values.mean()),
            sd=float(values.std(ddof=1)),
            q05=float(q05), q50=float(q50), q95=float(q95),
            rhat=rhat(chains),
            ess=ess(chains),
        ))
    return rows


def acf_series(store: DrawStore, max_lag: int = 50):
    """Per-chain autocorrelation of each tracked scalar.

    Yields (name, chain_index, acf) with acf covering lags 0..max_lag
    (shorter if a chain holds fewer draws).
    """
    for name, values in _scalar_series(store):
        chains = store.by_chain(values)
        for c in range(chains.shape[0]):
            yield name, c, autocorr(chains[c], max_lag=max_lag)


def format_table(rows: list) -> str:
    """Fixed-width text rendering of diagnostic rows; NaN prints as n/a."""
    header = f"{'parameter':<18} {'mean':>10} {'sd':>10} {'5%':>10} {'50%':>10} {'95%':>10} {'rhat':>8} {'ess':>10}"
    lines = [header, "-" * len(header)]

    def fmt(v, width, dec):
        if np.isnan(v):
            return f"{'n/a':>{width}}"
        if np.isinf(v):
            return f"{'inf':>{width}}"
        return f"{v:>{width}.{dec}f}"

    for r in rows:
        lines.append(
            f"{r.name:<18} {fmt(r.mean, 10, 4)} {fmt(r.sd, 10, 4)} {fmt(r.q05, 10, 4)} "
            f"{fmt(r.q50, 10, 4)} {fmt(r.q95, 10, 4)} {fmt(r.rhat, 8, 3)} {fmt(r.ess, 10, 1)}"
        )
    return "\n".join(lines)

"""Readers for the upstream CSV contracts.

Every file the fitting pipeline writes starts with '#' provenance comment
lines followed by one header row.  Readers here only check structure; all
statistics were computed upstream and are taken at face value.
"""

import os

import pandas as pd

from .errors import SchemaError

__all__ = [
    "load_acf",
    "load_curves",
    "load_dataset",
    "load_rope",
    "load_trace",
]


def _read(path: str) -> pd.DataFrame:
    if not os.path.isfile(path):
        raise SchemaError(f"input CSV does not exist: {path}")
    try:
        frame = pd.read_csv(path, comment="#", skipinitialspace=True)
    except Exception as exc:
        raise SchemaError(f"could not parse {path}: {exc}") from exc
    if frame.empty:
        raise SchemaError(f"{path} contains no data rows")
    return frame


def _require(frame: pd.DataFrame, path: str, columns: tuple) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(
            f"{path} is missing required column(s) {missing}; found {list(frame.columns)}"
        )


def load_curves(path: str) -> pd.DataFrame:
    """Long-format pointwise band file: curve_id, t, mean, lo, hi."""
    frame = _read(path)
    _require(frame, path, ("curve_id", "t", "mean", "lo", "hi"))
    return frame


def load_rope(path: str) -> pd.DataFrame:
    """Significance screen file: curve_id, t, pi0, delta, flagged."""
    frame = _read(path)
    _require(frame, path, ("curve_id", "t", "pi0", "delta", "flagged"))
    return frame


def load_trace(path: str) -> pd.DataFrame:
    """Per-draw scalar series: chain, iteration, then one column per scalar."""
    frame = _read(path)
    _require(frame, path, ("chain", "iteration"))
    if len(frame.columns) < 3:
        raise SchemaError(f"{path} has no scalar series beyond chain/iteration")
    return frame


def load_acf(path: str) -> pd.DataFrame:
    """Autocorrelation file: name, chain, lag, acf."""
    frame = _read(path)
    _require(frame, path, ("name", "chain", "lag", "acf"))
    return frame


def load_dataset(path: str) -> pd.DataFrame:
    """Raw ensemble table used for data overlays."""
    frame = _read(path)
    _require(frame, path, ("scenario_id", "model_id", "year", "value"))
    return frame

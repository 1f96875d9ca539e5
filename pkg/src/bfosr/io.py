"""Configuration files, dataset CSV ingestion, and draw persistence.

The run configuration is a flat ``key = value`` text file; datasets travel
as long-format CSV with one row per (scenario, model, year); posterior
draws persist in a chunked little-endian binary layout that reloads
bit-identically.  Every output file carries a provenance header with the
package version, a hash of the effective configuration, and the run seed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import struct
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .ar1 import LITERAL_VARIANTS, MODES
from .empirical_bayes import eb_hyperparams
from .errors import ConfigError, IngestionError
from .model import EnsembleDataset, HyperParams
from .sampler import DrawStore, SamplerConfig

__all__ = [
    "PRESETS", "RunConfig", "load_config", "config_hash", "provenance_lines",
    "resolve_hyperparams", "sampler_config_from", "ingest", "write_dataset_csv",
    "save_draws", "load_draws", "export_draws_csv", "write_curves_csv",
    "write_json",
]

# named hyperparameter configurations for the decade-resolution ensemble
# (I = 23 scenarios, 5 simulators, p = 5 covariates, K = 8)
PRESETS = {
    "paper-reference": {
        "a_w": (4.0,) * 6,
        "b_w": (0.51, 0.0002, 0.002, 0.001, 0.0005, 0.0001),
        "a_z": 92.0,
        "b_z": 0.0038,
        "nu": 7.0,
        "nu0": 2.0,
        "psi0": 0.047,
    },
    "alt1": {
        "a_w": (3.0,) * 6,
        "b_w": (2.0, 3.0, 4.0, 5.0, 6.0, 7.0),
        "a_z": 2.0,
        "b_z": 6.0,
        "nu": 11.0,
        "nu0": 2.0,
        "psi0": 0.047,
    },
    "alt2": {
        "a_w": (5.0,) * 6,
        "b_w": (2.0, 4.0, 6.0, 8.0, 10.0, 12.0),
        "a_z": 4.0,
        "b_z": 7.0,
        "nu": 20.0,
        "nu0": 2.0,
        "psi0": 0.047,
    },
}

_BOOL_WORDS = {
    "true": True, "on": True, "yes": True, "1": True,
    "false": False, "off": False, "no": False, "0": False,
}

_HYPER_KEYS = ("a_w", "b_w", "a_z", "b_z", "nu", "nu0", "psi0")


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_WORDS[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"expected a boolean (true/false/on/off/yes/no/1/0), got {text!r}")


def _parse_floats(text: str) -> tuple:
    parts = [p for p in (s.strip() for s in text.split(",")) if p]
    if not parts:
        return ()
    return tuple(float(p) for p in parts)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command run needs, from one flat key = value file.

    Hyperparameters come from explicit keys, from a named preset, or from
    the moment-matching pilot fit when ``hyperparams = empirical-bayes``
    (the default).  Explicit keys override preset entries.
    """

    data: str = ""
    draws: str = ""
    out: str = "."
    seed: int = 0
    preset: str = ""
    hyperparams: str = "empirical-bayes"
    a_w: tuple | None = None
    b_w: tuple | None = None
    a_z: float | None = None
    b_z: float | None = None
    nu: float | None = None
    nu0: float | None = None
    psi0: float | None = None
    K: int = 8
    alpha: float = 0.01
    log_transform: bool = True
    cov_mode: str = "continuous"
    base_step: float = 10.0
    literal_variant: str = "obs"
    n_chains: int = 4
    n_iter: int = 20000
    n_warmup: int = 15000
    thin: int = 1
    rho_step: float = 0.05
    progress: bool = False
    pred_times: tuple = ()
    grid_points: int = 101
    level: float = 0.95
    rope_threshold: float = 0.9
    export_csv: bool = False
    sim_scenarios: int = 23
    sim_models: int = 5
    sim_covariates: int = 5
    sim_sigma2: float = 0.04
    sim_rho: float = 0.6
    sim_sig2_z: float = 0.01
    sim_coef_scale: float = 0.4
    sim_times: tuple = ()

    def __post_init__(self):
        if self.hyperparams not in ("empirical-bayes", "explicit"):
            raise ConfigError(
                f"hyperparams must be 'empirical-bayes' or 'explicit', got {self.hyperparams!r}"
            )
        if self.preset and self.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}"
            )
        if self.cov_mode not in MODES:
            raise ConfigError(f"cov_mode must be one of {sorted(MODES)}, got {self.cov_mode!r}")
        if self.literal_variant not in LITERAL_VARIANTS:
            raise ConfigError(
                f"literal_variant must be one of {sorted(LITERAL_VARIANTS)}"
            )
        if self.K < 4:
            raise ConfigError(f"K must be at least 4, got {self.K}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.n_chains < 1 or self.n_iter < 1 or self.thin < 1:
            raise ConfigError("n_chains, n_iter, and thin must be positive")
        if not 0 <= self.n_warmup < self.n_iter:
            raise ConfigError(
                f"need 0 <= n_warmup < n_iter, got {self.n_warmup} and {self.n_iter}"
            )
        if self.rho_step <= 0:
            raise ConfigError(f"rho_step must be positive, got {self.rho_step}")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must be in (0, 1), got {self.level}")
        if not 0.0 < self.rope_threshold < 1.0:
            raise ConfigError(f"rope_threshold must be in (0, 1), got {self.rope_threshold}")
        if self.grid_points < 2:
            raise ConfigError(f"grid_points must be at least 2, got {self.grid_points}")
        if min(self.sim_scenarios, self.sim_models) < 1 or self.sim_covariates < 0:
            raise ConfigError("simulation design sizes out of range")
        if self.sim_sigma2 <= 0 or self.sim_sig2_z <= 0 or self.sim_coef_scale <= 0:
            raise ConfigError("simulation variances must be positive")
        if not -1.0 < self.sim_rho < 1.0:
            raise ConfigError(f"sim_rho must be in (-1, 1), got {self.sim_rho}")
        if self.data and not os.path.exists(self.data):
            raise ConfigError(f"data file does not exist: {self.data}")
        if self.draws and not os.path.exists(self.draws):
            raise ConfigError(f"draws file does not exist: {self.draws}")

    def as_mapping(self) -> dict:
        """Canonical flat mapping of every field, for hashing and echoing."""
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, bool):
                v = "on" if v else "off"
            elif v is None:
                v = ""
            out[f.name] = str(v)
        return out


_FIELD_PARSERS = {}
for _f in dataclasses.fields(RunConfig):
    if _f.type in ("tuple", "tuple | None"):
        _FIELD_PARSERS[_f.name] = _parse_floats
    elif _f.type == "bool":
        _FIELD_PARSERS[_f.name] = _parse_bool
    elif _f.type == "int":
        _FIELD_PARSERS[_f.name] = int
    elif _f.type in ("float", "float | None"):
        _FIELD_PARSERS[_f.name] = float
    else:
        _FIELD_PARSERS[_f.name] = str


def parse_kv_text(text: str) -> dict:
    """Key = value lines to a string dict; '#' starts a comment."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus string overrides."""
    entries = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                entries.update(parse_kv_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if overrides:
        entries.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(entries) - set(_FIELD_PARSERS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kwargs = {}
    for key, value in entries.items():
        try:
            kwargs[key] = _FIELD_PARSERS[key](value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return RunConfig(**kwargs)


# Filesystem locations and output toggles never change the numbers, so they
# stay out of the fingerprint: the same analysis run in two scratch
# directories must stamp identical provenance.
_UNHASHED_FIELDS = frozenset({"data", "draws", "out", "progress", "export_csv"})


def config_hash(config: RunConfig) -> str:
    """Stable short digest of the statistically effective configuration."""
    canon = "\n".join(
        f"{k}={v}"
        for k, v in sorted(config.as_mapping().items())
        if k not in _UNHASHED_FIELDS
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def provenance_lines(config: RunConfig) -> tuple:
    """Comment lines stamped at the top of every CSV output."""
    from . import __version__

    return (
        f"# bfosr_version={__version__} config_hash={config_hash(config)} seed={config.seed}",
    )


def provenance_dict(config: RunConfig) -> dict:
    from . import __version__

    return {
        "bfosr_version": __version__,
        "config_hash": config_hash(config),
        "seed": config.seed,
    }


def resolve_hyperparams(config: RunConfig, data, basis) -> HyperParams:
    """Assemble HyperParams from explicit keys, a preset, or the pilot fit."""
    vals = {k: getattr(config, k) for k in _HYPER_KEYS}
    if config.preset:
        for key, preset_value in PRESETS[config.preset].items():
            if vals[key] is None:
                vals[key] = preset_value
    structural = ("a_w", "b_w", "a_z", "b_z")
    missing = [k for k in structural if vals[k] is None]
    if missing and config.hyperparams == "explicit":
        raise ConfigError(
            f"hyperparams = explicit but {', '.join(missing)} not given"
        )
    if missing:
        eb = eb_hyperparams(data, basis)
        fill = {"a_w": eb.a_w, "b_w": eb.b_w, "a_z": eb.a_z, "b_z": eb.b_z}
        for key in missing:
            vals[key] = fill[key]
    for key, default in (("nu", 7.0), ("nu0", 2.0), ("psi0", 0.047)):
        if vals[key] is None:
            vals[key] = default
    q = data.p + 1
    for key in ("a_w", "b_w"):
        arr = np.atleast_1d(np.asarray(vals[key], dtype=float))
        if arr.size == 1:
            arr = np.repeat(arr, q)
        if arr.size != q:
            raise ConfigError(
                f"{key} must have 1 or {q} entries for this design, got {arr.size}"
            )
        vals[key] = arr
    return HyperParams(
        a_w=vals["a_w"], b_w=vals["b_w"], a_z=float(vals["a_z"]),
        b_z=float(vals["b_z"]), nu=float(vals["nu"]), nu0=float(vals["nu0"]),
        psi0=float(vals["psi0"]), alpha=config.alpha, K=config.K,
    )


def sampler_config_from(config: RunConfig) -> SamplerConfig:
    return SamplerConfig(
        n_chains=config.n_chains, n_iter=config.n_iter, n_warmup=config.n_warmup,
        thin=config.thin, seed=config.seed, rho_step=config.rho_step,
        cov_mode=config.cov_mode, base_step=config.base_step,
        literal_variant=config.literal_variant, progress=config.progress,
    )


# -- dataset CSV ------------------------------------------------------------

def ingest(path: str, log_transform: bool = True) -> EnsembleDataset:
    """Read a long-format trajectory CSV into a validated dataset.

    Expected header: ``scenario_id, model_id, <covariate columns...>, year,
    value`` with one row per (scenario, model, year).  Row order is
    irrelevant: trajectories are keyed and sorted by their identifiers, so
    shuffled files ingest identically.
    """
    try:
        df = pd.read_csv(
            path, comment="#", skipinitialspace=True, float_precision="round_trip"
        )
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise IngestionError(f"malformed CSV {path}: {exc}") from exc
    cols = [str(c).strip() for c in df.columns]
    if (
        len(cols) < 4
        or cols[0] != "scenario_id"
        or cols[1] != "model_id"
        or cols[-2:] != ["year", "value"]
    ):
        raise IngestionError(
            "header must be 'scenario_id, model_id, <covariates...>, year, value', "
            f"got {', '.join(cols)}"
        )
    df.columns = cols
    cov_cols = cols[2:-2]
    for col in ("year", "value", *cov_cols):
        if not np.issubdtype(df[col].dtype, np.number):
            raise IngestionError(f"column {col!r} must be numeric")
    if df[["year", "value", *cov_cols]].isna().any().any():
        raise IngestionError("missing numeric values in data file")
    if df[["scenario_id", "model_id"]].isna().any().any():
        raise IngestionError("missing scenario or model identifiers")
    df["scenario_id"] = df["scenario_id"].astype(str)
    df["model_id"] = df["model_id"].astype(str)

    dup = df.duplicated(subset=["scenario_id", "model_id", "year"])
    if dup.any():
        row = df[dup].iloc[0]
        raise IngestionError(
            f"duplicate row for scenario {row['scenario_id']!r}, "
            f"model {row['model_id']!r}, year {row['year']}"
        )

    years = np.sort(df["year"].unique()).astype(float)
    counts = df.groupby(["scenario_id", "model_id"], sort=True)["year"].count()
    short = counts[counts != years.size]
    if len(short) > 0:
        sid, mid = short.index[0]
        raise IngestionError(
            f"ragged time grid: trajectory ({sid!r}, {mid!r}) has "
            f"{short.iloc[0]} of {years.size} years"
        )

    for col in cov_cols:
        spread = df.groupby("scenario_id", sort=True)[col].nunique()
        varying = spread[spread > 1]
        if len(varying) > 0:
            raise IngestionError(
                f"covariate {col!r} varies within scenario {varying.index[0]!r}"
            )

    if log_transform:
        bad = df.index[df["value"].to_numpy() <= 0.0]
        if bad.size > 0:
            # +2: one for the header line, one for 1-based numbering
            raise IngestionError(
                f"value must be positive under the log transform; file row "
                f"{int(bad[0]) + 2} has value {df.loc[bad[0], 'value']}"
            )

    df = df.sort_values(
        ["scenario_id", "model_id", "year"], kind="mergesort"
    ).reset_index(drop=True)
    scenario_ids = df["scenario_id"].astype(str).drop_duplicates().tolist()
    pairs = df[["scenario_id", "model_id"]].drop_duplicates().reset_index(drop=True)
    D = years.size
    values = df["value"].to_numpy(dtype=float).reshape(len(pairs), D)
    Y = np.log(values) if log_transform else values

    scen_index = {sid: i for i, sid in enumerate(scenario_ids)}
    group_of = np.array(
        [scen_index[str(s)] for s in pairs["scenario_id"]], dtype=np.int64
    )
    first_rows = df.drop_duplicates("scenario_id").set_index("scenario_id")
    X = np.column_stack([
        np.ones(len(scenario_ids)),
        *[first_rows.loc[scenario_ids, col].to_numpy(dtype=float) for col in cov_cols],
    ]) if cov_cols else np.ones((len(scenario_ids), 1))
    return EnsembleDataset(
        Y=Y,
        W=X,
        group_of=group_of,
        times=years,
        scenario_ids=tuple(scenario_ids),
        model_ids=tuple(str(m) for m in pairs["model_id"]),
        covariate_names=("intercept", *cov_cols),
    )


def write_dataset_csv(
    data: EnsembleDataset,
    path: str,
    log_transform: bool = True,
    header_lines: tuple = (),
) -> None:
    """Inverse of ingest: one row per (scenario, model, year), sorted."""
    cov_cols = data.covariate_names[1:]
    values = np.exp(data.Y) if log_transform else data.Y
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write(",".join(["scenario_id", "model_id", *cov_cols, "year", "value"]) + "\n")
        for n in range(data.N):
            i = data.group_of[n]
            covs = [repr(float(v)) for v in data.W[i, 1:]]
            for d, year in enumerate(data.times):
                row = [
                    data.scenario_ids[i], data.model_ids[n], *covs,
                    repr(float(year)), repr(float(values[n, d])),
                ]
                fh.write(",".join(row) + "\n")


# -- draw persistence -------------------------------------------------------

_MAGIC = b"BFOSRDRW"
_FORMAT_VERSION = 1
_DTYPE_CODES = {0: "<f8", 1: "<i8"}
_ARRAY_FIELDS = (
    "b_w", "b_z", "sig2_w", "sig2_z", "sigma2", "psi", "rho", "loglik",
    "chain", "iteration", "rho_accept", "rho_step_final", "rho_step_log",
)


def _write_chunk(fh, name: str, arr: np.ndarray) -> None:
    code = 1 if np.issubdtype(arr.dtype, np.integer) else 0
    payload = np.ascontiguousarray(arr, dtype=_DTYPE_CODES[code])
    encoded = name.encode("ascii")
    fh.write(struct.pack("<H", len(encoded)))
    fh.write(encoded)
    fh.write(struct.pack("<BB", arr.ndim, code))
    fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    fh.write(payload.tobytes())


def save_draws(store: DrawStore, path: str) -> None:
    """Persist a draw container in the chunked little-endian layout.

    Layout: magic ``BFOSRDRW``, format version (u32), seed (u64), then the
    counts R, N, K, I, q, n_chains (u32 each), then one chunk per array:
    name length (u16), ASCII name, ndim (u8), dtype code (u8; 0 = f64,
    1 = i64), the dims (u32 each), and the raw little-endian payload.
    """
    R, K, q = store.b_w.shape
    I = store.b_z.shape[2]
    N = store.loglik.shape[1]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _FORMAT_VERSION))
        fh.write(struct.pack("<Q", store.seed))
        fh.write(struct.pack("<6I", R, N, K, I, q, store.n_chains))
        for name in _ARRAY_FIELDS:
            arr = getattr(store, name)
            if arr is None:
                continue
            _write_chunk(fh, name, np.asarray(arr))


def load_draws(path: str) -> DrawStore:
    """Reload a persisted draw container bit-identically."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != _MAGIC:
        raise IngestionError(f"{path} is not a draw file (bad magic)")
    version, = struct.unpack_from("<I", blob, 8)
    if version != _FORMAT_VERSION:
        raise IngestionError(f"unsupported draw format version {version}")
    seed, = struct.unpack_from("<Q", blob, 12)
    offset = 20 + 6 * 4  # counts are recoverable from the arrays themselves
    arrays = {}
    while offset < len(blob):
        name_len, = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset:offset + name_len].decode("ascii")
        offset += name_len
        ndim, code = struct.unpack_from("<BB", blob, offset)
        offset += 2
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        arr = np.frombuffer(blob, dtype=_DTYPE_CODES[code], count=count, offset=offset)
        offset += arr.nbytes
        arrays[name] = arr.reshape(shape).copy()
    missing = [n for n in _ARRAY_FIELDS[:-1] if n not in arrays]
    if missing:
        raise IngestionError(f"draw file missing arrays: {', '.join(missing)}")
    return DrawStore(seed=int(seed), **{n: arrays.get(n) for n in _ARRAY_FIELDS})


def export_draws_csv(store: DrawStore, path: str, header_lines: tuple = ()) -> None:
    """Scalar draw table (the spline scores stay in the binary file)."""
    K, q = store.b_w.shape[1:]
    names = ["chain", "iteration", "sigma2", "sig2_z", "psi", "rho"]
    names += [f"sig2_w[{j}]" for j in range(q)]
    names += [f"b_w[{k}.{j}]" for j in range(q) for k in range(K)]
    names += ["log_likelihood"]
    columns = [store.chain, store.iteration, store.sigma2, store.sig2_z,
               store.psi, store.rho]
    columns += [store.sig2_w[:, j] for j in range(q)]
    columns += [store.b_w[:, k, j] for j in range(q) for k in range(K)]
    columns += [store.loglik.sum(axis=1)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write(",".join(names) + "\n")
        for r in range(store.n_draws):
            fields = []
            for col in columns:
                v = col[r]
                fields.append(str(int(v)) if np.issubdtype(col.dtype, np.integer)
                              else repr(float(v)))
            fh.write(",".join(fields) + "\n")


# -- summaries --------------------------------------------------------------

def write_curves_csv(summaries, path: str, header_lines: tuple = ()) -> None:
    """Long-format pointwise bands: curve_id, t, mean, lo, hi."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write("curve_id,t,mean,lo,hi\n")
        for cs in summaries:
            for t, m, lo, hi in zip(cs.times, cs.mean, cs.lower, cs.upper):
                fh.write(
                    f"{cs.name},{float(t)!r},{float(m)!r},{float(lo)!r},{float(hi)!r}\n"
                )


def write_json(obj: dict, path: str) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")

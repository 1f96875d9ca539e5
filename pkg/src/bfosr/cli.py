"""Command-line front end: fit, summarize, krige, rope, score, diagnose,
eb-hyperparams, and simulate.

Each subcommand reads one flat key = value config file (plus the --out,
--seed, and --preset overrides), runs the corresponding pipeline, and
writes its outputs under the output directory.  Failures exit nonzero
after printing a single ``error: <Type>: <message>`` line to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
from scipy.linalg import solve_triangular

from .basis import BasisSystem, make_basis
from .diagnostics import acf_series, convergence_table, format_table
from .errors import ConfigError
from .io import (
    PRESETS,
    RunConfig,
    export_draws_csv,
    ingest,
    load_config,
    load_draws,
    provenance_dict,
    provenance_lines,
    resolve_hyperparams,
    sampler_config_from,
    save_draws,
    write_curves_csv,
    write_dataset_csv,
    write_json,
)
from .empirical_bayes import eb_hyperparams
from .model import EnsembleDataset, ParamState, simulate_dataset, synthetic_design
from .posterior import (
    default_pred_times,
    krige,
    rope_probability,
    summarize_beta,
    summarize_scenario,
)
from .sampler import run_chains
from .scoring import lpml, predictive_mse, waic

__all__ = ["dispatch", "main"]

_DEFAULT_SIM_TIMES = tuple(2020.0 + 10.0 * np.arange(8))


def _basis_for(config: RunConfig, times: np.ndarray) -> BasisSystem:
    return make_basis(config.K, float(times[0]), float(times[-1]), config.alpha)


def _require_data(config: RunConfig) -> EnsembleDataset:
    if not config.data:
        raise ConfigError("this command needs a 'data' path in the config")
    return ingest(config.data, log_transform=config.log_transform)


def _draws_path(config: RunConfig) -> str:
    return config.draws or os.path.join(config.out, "draws.bin")


def _grid(config: RunConfig, times: np.ndarray) -> np.ndarray:
    if config.pred_times:
        return np.asarray(config.pred_times, dtype=float)
    return np.linspace(float(times[0]), float(times[-1]), config.grid_points)


def _finite_or_none(x: float):
    return float(x) if np.isfinite(x) else None


def _note(path: str) -> None:
    print(f"wrote {path}")


# -- subcommands ------------------------------------------------------------

def cmd_fit(config: RunConfig) -> None:
    data = _require_data(config)
    basis = _basis_for(config, data.times)
    hp = resolve_hyperparams(config, data, basis)
    store = run_chains(data, basis, hp, sampler_config_from(config))
    draws_path = os.path.join(config.out, "draws.bin")
    save_draws(store, draws_path)
    _note(draws_path)
    if config.export_csv:
        csv_path = os.path.join(config.out, "draws.csv")
        export_draws_csv(store, csv_path, provenance_lines(config))
        _note(csv_path)
    meta = {
        "draws_file": "draws.bin",
        "n_draws": store.n_draws,
        "n_chains": store.n_chains,
        "rho_accept": [float(a) for a in store.rho_accept],
        "rho_step_final": [float(s) for s in store.rho_step_final],
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "fit.json")
    write_json(meta, path)
    _note(path)


def cmd_summarize(config: RunConfig) -> None:
    data = _require_data(config)
    store = load_draws(_draws_path(config))
    basis = _basis_for(config, data.times)
    grid = _grid(config, data.times)
    header = provenance_lines(config)

    betas = [
        summarize_beta(store, basis, grid, k, level=config.level)
        for k in range(data.p + 1)
    ]
    path = os.path.join(config.out, "beta_curves.csv")
    write_curves_csv(betas, path, header)
    _note(path)

    scenarios = [
        summarize_scenario(store, basis, grid, i, level=config.level)
        for i in range(data.I)
    ]
    path = os.path.join(config.out, "scenario_curves.csv")
    write_curves_csv(scenarios, path, header)
    _note(path)

    meta = {
        "level": config.level,
        "beta_curves": {f"beta[{k}]": name
                        for k, name in enumerate(data.covariate_names)},
        "scenario_curves": {f"c[{i}]": sid
                            for i, sid in enumerate(data.scenario_ids)},
        "grid": [float(t) for t in grid],
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "summary.json")
    write_json(meta, path)
    _note(path)


def cmd_krige(config: RunConfig) -> None:
    data = _require_data(config)
    store = load_draws(_draws_path(config))
    basis = _basis_for(config, data.times)
    pred = (np.asarray(config.pred_times, dtype=float) if config.pred_times
            else default_pred_times(data.times))
    result = krige(
        store, data, basis, pred_times=pred, level=config.level,
        cov_mode=config.cov_mode, base_step=config.base_step,
        literal_variant=config.literal_variant, keep_samples=False,
        seed=config.seed,
    )
    path = os.path.join(config.out, "kriging.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in provenance_lines(config):
            fh.write(line + "\n")
        fh.write("curve_id,t,mean,lo,hi\n")
        for n in range(data.N):
            cid = f"{data.scenario_ids[data.group_of[n]]}:{data.model_ids[n]}"
            for j, t in enumerate(result.times):
                fh.write(
                    f"{cid},{float(t)!r},{float(result.mean[n, j])!r},"
                    f"{float(result.lower[n, j])!r},{float(result.upper[n, j])!r}\n"
                )
    _note(path)
    meta = {
        "level": config.level,
        "cov_mode": config.cov_mode,
        "pred_times": [float(t) for t in result.times],
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "kriging.json")
    write_json(meta, path)
    _note(path)


def cmd_rope(config: RunConfig) -> None:
    data = _require_data(config)
    store = load_draws(_draws_path(config))
    basis = _basis_for(config, data.times)
    grid = _grid(config, data.times)
    result = rope_probability(store, basis, grid, threshold=config.rope_threshold)
    path = os.path.join(config.out, "rope.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in provenance_lines(config):
            fh.write(line + "\n")
        fh.write("curve_id,t,pi0,delta,flagged\n")
        for k in range(data.p + 1):
            for j, t in enumerate(grid):
                fh.write(
                    f"beta[{k}],{float(t)!r},{float(result.pi0[k, j])!r},"
                    f"{float(result.delta[k, j])!r},{int(result.flagged[k, j])}\n"
                )
    _note(path)
    meta = {
        "threshold": config.rope_threshold,
        "covariates": {f"beta[{k}]": name
                       for k, name in enumerate(data.covariate_names)},
        "flagged_anywhere": {
            f"beta[{k}]": bool(result.flagged[k].any()) for k in range(data.p + 1)
        },
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "rope.json")
    write_json(meta, path)
    _note(path)


def cmd_score(config: RunConfig) -> None:
    data = _require_data(config)
    store = load_draws(_draws_path(config))
    basis = _basis_for(config, data.times)
    w = waic(store.loglik)
    lp = lpml(store.loglik)
    report = {
        "waic": w.waic,
        "p_waic": w.p_waic,
        "lppd": w.lppd,
        "lpml": lp.lpml,
        "n_unstable_cpo": lp.n_unstable,
        "log_cpo": [_finite_or_none(v) for v in lp.log_cpo],
        "mse": predictive_mse(store, data, basis),
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "score.json")
    write_json(report, path)
    _note(path)


def cmd_diagnose(config: RunConfig) -> None:
    store = load_draws(_draws_path(config))
    rows = convergence_table(store)
    print(format_table(rows))
    finite_rhat = [r.rhat for r in rows if np.isfinite(r.rhat)]
    finite_ess = [r.ess for r in rows if np.isfinite(r.ess)]
    report = {
        "rows": [
            {
                "name": r.name, "mean": r.mean, "sd": r.sd,
                "q05": r.q05, "q50": r.q50, "q95": r.q95,
                "rhat": _finite_or_none(r.rhat), "ess": _finite_or_none(r.ess),
            }
            for r in rows
        ],
        "max_rhat": max(finite_rhat) if finite_rhat else None,
        "min_ess": min(finite_ess) if finite_ess else None,
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "diagnostics.json")
    write_json(report, path)
    _note(path)

    path = os.path.join(config.out, "trace.csv")
    export_draws_csv(store, path, provenance_lines(config))
    _note(path)

    path = os.path.join(config.out, "acf.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in provenance_lines(config):
            fh.write(line + "\n")
        fh.write("name,chain,lag,acf\n")
        for name, c, acf in acf_series(store):
            for lag, value in enumerate(acf):
                fh.write(f"{name},{c},{lag},{float(value)!r}\n")
    _note(path)


def cmd_eb_hyperparams(config: RunConfig) -> None:
    data = _require_data(config)
    basis = _basis_for(config, data.times)
    eb = eb_hyperparams(data, basis)
    print(f"a_z = {float(eb.a_z)!r}")
    print(f"b_z = {float(eb.b_z)!r}")
    for k, name in enumerate(data.covariate_names):
        print(
            f"a_w[{k}] = {float(eb.a_w[k])!r}  "
            f"b_w[{k}] = {float(eb.b_w[k])!r}  # {name}"
        )
    report = {
        "a_w": [float(v) for v in eb.a_w],
        "b_w": [float(v) for v in eb.b_w],
        "a_z": float(eb.a_z),
        "b_z": float(eb.b_z),
        "K": eb.K,
        "alpha": eb.alpha,
        "covariates": list(data.covariate_names),
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "eb_hyperparams.json")
    write_json(report, path)
    _note(path)


def cmd_simulate(config: RunConfig) -> None:
    times = np.asarray(config.sim_times or _DEFAULT_SIM_TIMES, dtype=float)
    design = synthetic_design(
        config.sim_scenarios, config.sim_models, times,
        p=config.sim_covariates, seed=config.seed,
    )
    basis = _basis_for(config, times)
    rng = np.random.default_rng(config.seed)
    q = design.p + 1
    b_w = rng.normal(0.0, config.sim_coef_scale, size=(config.K, q))
    # scenario scores follow the hierarchy: N(B_W w_i, sig2_z P^-1)
    L = np.linalg.cholesky(basis.P)
    eps = rng.standard_normal((config.K, design.I))
    dev = solve_triangular(L.T, eps, lower=False, check_finite=False)
    truth = ParamState(
        b_w=b_w,
        b_z=b_w @ design.W.T + np.sqrt(config.sim_sig2_z) * dev,
        sig2_w=np.full(q, config.sim_coef_scale**2),
        sig2_z=config.sim_sig2_z,
        sigma2=config.sim_sigma2,
        psi=config.sim_sigma2,
        rho=config.sim_rho,
    )
    data = simulate_dataset(
        truth, design, basis, seed=config.seed + 1, cov_mode=config.cov_mode,
        base_step=config.base_step, literal_variant=config.literal_variant,
    )
    path = os.path.join(config.out, "dataset.csv")
    write_dataset_csv(
        data, path, log_transform=config.log_transform,
        header_lines=provenance_lines(config),
    )
    _note(path)
    report = {
        "b_w": [[float(v) for v in row] for row in truth.b_w],
        "b_z": [[float(v) for v in row] for row in truth.b_z],
        "sig2_z": config.sim_sig2_z,
        "sigma2": config.sim_sigma2,
        "rho": config.sim_rho,
        "cov_mode": config.cov_mode,
        "times": [float(t) for t in times],
        "scenario_ids": list(data.scenario_ids),
        "covariates": list(data.covariate_names),
        "W": [[float(v) for v in row] for row in design.W],
        "provenance": provenance_dict(config),
    }
    path = os.path.join(config.out, "truth.json")
    write_json(report, path)
    _note(path)


_COMMANDS = {
    "fit": cmd_fit,
    "summarize": cmd_summarize,
    "krige": cmd_krige,
    "rope": cmd_rope,
    "score": cmd_score,
    "diagnose": cmd_diagnose,
    "eb-hyperparams": cmd_eb_hyperparams,
    "simulate": cmd_simulate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bfosr",
        description="Hierarchical functional emulation of simulator ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--seed", help="unsigned integer run seed")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="named hyperparameter configuration")
        if name == "fit":
            p.add_argument("--export-csv", action="store_true",
                           help="also write the scalar draws as CSV")
    return parser


def dispatch(argv) -> int:
    """Parse arguments, run one subcommand, report failures on stderr."""
    args = _build_parser().parse_args(argv)
    overrides = {"out": args.out, "seed": args.seed, "preset": args.preset}
    if getattr(args, "export_csv", False):
        overrides["export_csv"] = "on"
    try:
        config = load_config(args.config, overrides)
        os.makedirs(config.out, exist_ok=True)
        _COMMANDS[args.command](config)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))

"""The six figure kinds, each a pure function of its CSV inputs.

No statistic is recomputed here: means, bands, probabilities, and
autocorrelations arrive ready-made, and the renderers only arrange them.
``build_figure`` returns the matplotlib Figure so tests can inspect the
drawn artists; ``render`` saves it to the requested output path.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import csvio
from .errors import SchemaError
from .spec import FigureSpec

__all__ = ["build_figure", "contains_zero_spans", "render"]

_MEAN_COLOR = "crimson"
_BAND_COLOR = "steelblue"
_SHADE_COLOR = "0.55"


def _panel_grid(n: int):
    cols = 1 if n == 1 else (2 if n <= 4 else 3)
    rows = -(-n // cols)
    return rows, cols


def _subplots(n: int, width=4.2, height=3.0):
    rows, cols = _panel_grid(n)
    fig, axes = plt.subplots(
        rows, cols, figsize=(width * cols, height * rows),
        squeeze=False, constrained_layout=True,
    )
    flat = axes.ravel()
    for ax in flat[n:]:
        ax.set_visible(False)
    return fig, flat[:n]


def _curve_ids(frame, ids, max_panels, path):
    present = list(dict.fromkeys(frame["curve_id"]))
    if ids:
        missing = [i for i in ids if i not in present]
        if missing:
            raise SchemaError(f"curve id(s) {missing} not present in {path}")
        return list(ids)
    return present[:max_panels]


def contains_zero_spans(t, lo, hi):
    """Merged [start, end] time spans of grid cells whose band straddles 0.

    A grid point owns the cell reaching halfway to each neighbour (clipped
    at the ends), so single flagged points still shade a visible strip, and
    adjacent flagged points merge into one span.
    """
    t = np.asarray(t, dtype=float)
    inside = (np.asarray(lo, dtype=float) <= 0.0) & (0.0 <= np.asarray(hi, dtype=float))
    left = np.concatenate([[t[0]], 0.5 * (t[:-1] + t[1:])])
    right = np.concatenate([0.5 * (t[:-1] + t[1:]), [t[-1]]])
    spans = []
    for g in range(t.size):
        if not inside[g]:
            continue
        if spans and spans[-1][1] == left[g]:
            spans[-1][1] = right[g]
        else:
            spans.append([left[g], right[g]])
    return [(a, b) for a, b in spans]


def _draw_band_panel(ax, sub, title, shade_zero):
    t = sub["t"].to_numpy(dtype=float)
    order = np.argsort(t, kind="stable")
    t = t[order]
    mean = sub["mean"].to_numpy(dtype=float)[order]
    lo = sub["lo"].to_numpy(dtype=float)[order]
    hi = sub["hi"].to_numpy(dtype=float)[order]
    if shade_zero:
        for a, b in contains_zero_spans(t, lo, hi):
            ax.axvspan(a, b, color=_SHADE_COLOR, alpha=0.35, linewidth=0)
    ax.fill_between(t, lo, hi, color=_BAND_COLOR, alpha=0.3, linewidth=0)
    ax.plot(t, mean, color=_MEAN_COLOR, linewidth=1.6)
    ax.axhline(0.0, color="0.2", linewidth=0.6)
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("year", fontsize=8)
    ax.tick_params(labelsize=8)


def _beta_bands(spec: FigureSpec):
    frame = csvio.load_curves(spec.inputs[0])
    ids = _curve_ids(frame, spec.ids, spec.max_panels, spec.inputs[0])
    fig, axes = _subplots(len(ids))
    for ax, cid in zip(axes, ids):
        _draw_band_panel(ax, frame[frame["curve_id"] == cid], cid, shade_zero=True)
    return fig


def _scenario_means(spec: FigureSpec):
    frame = csvio.load_curves(spec.inputs[0])
    overlay = csvio.load_dataset(spec.inputs[1]) if len(spec.inputs) > 1 else None
    ids = _curve_ids(frame, spec.ids, spec.max_panels, spec.inputs[0])
    # c[i] refers to the i-th scenario in sorted id order, by upstream contract
    scenario_of = {}
    if overlay is not None:
        for i, sid in enumerate(sorted(overlay["scenario_id"].astype(str).unique())):
            scenario_of[f"c[{i}]"] = sid
    fig, axes = _subplots(len(ids))
    for ax, cid in zip(axes, ids):
        if overlay is not None and cid in scenario_of:
            rows = overlay[overlay["scenario_id"].astype(str) == scenario_of[cid]]
            for _, run in rows.groupby("model_id"):
                run = run.sort_values("year")
                ax.plot(run["year"], run["value"], color="0.6", linewidth=0.7)
        _draw_band_panel(ax, frame[frame["curve_id"] == cid], cid, shade_zero=False)
    return fig


def _kriging(spec: FigureSpec):
    frame = csvio.load_curves(spec.inputs[0])
    ids = _curve_ids(frame, spec.ids, spec.max_panels, spec.inputs[0])
    fig, axes = _subplots(len(ids))
    for ax, cid in zip(axes, ids):
        sub = frame[frame["curve_id"] == cid].sort_values("t")
        ax.fill_between(sub["t"], sub["lo"], sub["hi"],
                        color=_BAND_COLOR, alpha=0.3, linewidth=0)
        ax.plot(sub["t"], sub["mean"], color=_MEAN_COLOR,
                linewidth=1.2, marker="o", markersize=3)
        ax.set_title(cid, fontsize=10)
        ax.set_xlabel("year", fontsize=8)
        ax.tick_params(labelsize=8)
    return fig


def _rope(spec: FigureSpec):
    frame = csvio.load_rope(spec.inputs[0])
    ids = _curve_ids(frame, spec.ids, spec.max_panels, spec.inputs[0])
    fig, axes = _subplots(len(ids))
    for ax, cid in zip(axes, ids):
        sub = frame[frame["curve_id"] == cid].sort_values("t")
        ax.plot(sub["t"], sub["pi0"], color=_MEAN_COLOR, linewidth=1.4)
        flagged = sub[sub["flagged"] == 1]
        if not flagged.empty:
            ax.plot(flagged["t"], flagged["pi0"], linestyle="none",
                    marker="o", markersize=3, color="black")
        ax.axhline(spec.threshold, color="black", linestyle=":", linewidth=1.0)
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(cid, fontsize=10)
        ax.set_xlabel("year", fontsize=8)
        ax.tick_params(labelsize=8)
    return fig


def _trace_params(frame, params, max_panels, path):
    scalars = [c for c in frame.columns if c not in ("chain", "iteration")]
    if params:
        missing = [p for p in params if p not in scalars]
        if missing:
            raise SchemaError(f"series {missing} not present in {path}")
        return list(params)
    preferred = [c for c in ("sigma2", "sig2_z", "psi", "rho") if c in scalars]
    return (preferred or scalars)[:max_panels]


def _trace(spec: FigureSpec):
    frame = csvio.load_trace(spec.inputs[0])
    params = _trace_params(frame, spec.params, spec.max_panels, spec.inputs[0])
    fig, axes = _subplots(len(params), width=5.0, height=2.2)
    for ax, name in zip(axes, params):
        for chain, sub in frame.groupby("chain"):
            ax.plot(sub["iteration"], sub[name], linewidth=0.6,
                    label=f"chain {chain}")
        ax.set_title(name, fontsize=10)
        ax.set_xlabel("iteration", fontsize=8)
        ax.tick_params(labelsize=8)
    axes[0].legend(fontsize=7, loc="upper right")
    return fig


def _acf(spec: FigureSpec):
    frame = csvio.load_acf(spec.inputs[0])
    names = list(dict.fromkeys(frame["name"]))
    if spec.params:
        missing = [p for p in spec.params if p not in names]
        if missing:
            raise SchemaError(f"series {missing} not present in {spec.inputs[0]}")
        use = list(spec.params)
    else:
        preferred = [n for n in ("sigma2", "sig2_z", "psi", "rho") if n in names]
        use = (preferred or names)[: spec.max_panels]
    fig, axes = _subplots(len(use), width=4.2, height=2.4)
    for ax, name in zip(axes, use):
        for chain, sub in frame[frame["name"] == name].groupby("chain"):
            sub = sub.sort_values("lag")
            ax.plot(sub["lag"], sub["acf"], linewidth=0.9, marker=".",
                    markersize=3, label=f"chain {chain}")
        ax.axhline(0.0, color="0.2", linewidth=0.6)
        ax.set_ylim(-0.3, 1.05)
        ax.set_title(name, fontsize=10)
        ax.set_xlabel("lag", fontsize=8)
        ax.tick_params(labelsize=8)
    axes[0].legend(fontsize=7, loc="upper right")
    return fig


_BUILDERS = {
    "beta-bands": _beta_bands,
    "scenario-means": _scenario_means,
    "kriging": _kriging,
    "rope": _rope,
    "trace": _trace,
    "acf": _acf,
}


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib Figure for a spec without saving it."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> str:
    """Draw the figure and write it to spec.out.  Returns the output path.

    The image is a deterministic function of the input CSVs: the PNG
    date metadata is suppressed so byte-identical inputs give
    byte-identical files.
    """
    fig = build_figure(spec)
    try:
        metadata = {"Date": None} if spec.out.lower().endswith(".png") else None
        fig.savefig(spec.out, dpi=spec.dpi, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.out

"""Renderer behavior on hand-built CSVs: artists, shading, and failures."""

import numpy as np
import pandas as pd
import pytest
from matplotlib.patches import Rectangle

from bfosr_figures import (
    FigureSpec,
    InvalidOptionError,
    SchemaError,
    build_figure,
    contains_zero_spans,
    render,
)
from bfosr_figures.cli import dispatch


GRID = 2020.0 + 10.0 * np.arange(8)


def write_curves(path, bands):
    """bands: {curve_id: (mean, lo, hi) arrays on GRID}."""
    rows = ["# provenance line", "curve_id,t,mean,lo,hi"]
    for cid, (mean, lo, hi) in bands.items():
        for g, t in enumerate(GRID):
            rows.append(
                f"{cid},{float(t)!r},{float(mean[g])!r},"
                f"{float(lo[g])!r},{float(hi[g])!r}"
            )
    path.write_text("\n".join(rows) + "\n")
    return str(path)


@pytest.fixture()
def curves_csv(tmp_path):
    ones = np.ones_like(GRID)
    bands = {
        "beta[0]": (0.0 * ones, -0.5 * ones, 0.5 * ones),   # always straddles 0
        "beta[1]": (2.0 * ones, 1.0 * ones, 3.0 * ones),    # never does
        # dips through zero on the middle four points only
        "beta[2]": (
            np.where((GRID >= 2040) & (GRID <= 2070), 0.0, 2.0),
            np.where((GRID >= 2040) & (GRID <= 2070), -1.0, 1.0),
            np.where((GRID >= 2040) & (GRID <= 2070), 1.0, 3.0),
        ),
    }
    return write_curves(tmp_path / "beta_curves.csv", bands)


def spans_of(ax):
    """x-extents of the grey axvspan rectangles drawn on an axis."""
    out = []
    for patch in ax.patches:
        if isinstance(patch, Rectangle):
            x0 = patch.get_x()
            out.append((x0, x0 + patch.get_width()))
    return sorted(out)


class TestZeroSpans:
    def test_full_cover_is_one_full_width_span(self):
        lo, hi = -np.ones_like(GRID), np.ones_like(GRID)
        assert contains_zero_spans(GRID, lo, hi) == [(GRID[0], GRID[-1])]

    def test_no_cover_is_empty(self):
        lo, hi = np.ones_like(GRID), 2.0 * np.ones_like(GRID)
        assert contains_zero_spans(GRID, lo, hi) == []

    def test_single_point_gets_half_cells(self):
        lo = np.ones_like(GRID)
        hi = 2.0 * np.ones_like(GRID)
        lo[3] = -1.0
        assert contains_zero_spans(GRID, lo, hi) == [(2045.0, 2055.0)]

    def test_adjacent_points_merge(self):
        lo = np.ones_like(GRID)
        lo[2:4] = -1.0
        spans = contains_zero_spans(GRID, lo, 2.0 * np.ones_like(GRID))
        assert spans == [(2035.0, 2055.0)]


class TestBetaBands:
    def test_shading_matches_band_contains_zero(self, curves_csv, tmp_path):
        spec = FigureSpec("beta-bands", (curves_csv,), str(tmp_path / "b.png"))
        fig = build_figure(spec)
        axes = [ax for ax in fig.axes if ax.get_visible()]
        frame = pd.read_csv(curves_csv, comment="#")
        for ax, cid in zip(axes, ("beta[0]", "beta[1]", "beta[2]")):
            sub = frame[frame["curve_id"] == cid].sort_values("t")
            expected = contains_zero_spans(
                sub["t"].to_numpy(), sub["lo"].to_numpy(), sub["hi"].to_numpy()
            )
            got = spans_of(ax)
            assert len(got) == len(expected), cid
            for (a, b), (c, d) in zip(got, expected):
                assert a == pytest.approx(c) and b == pytest.approx(d)

    def test_mean_line_reproduces_csv_values(self, curves_csv, tmp_path):
        spec = FigureSpec("beta-bands", (curves_csv,), str(tmp_path / "b.png"),
                          ids=("beta[2]",))
        fig = build_figure(spec)
        ax = fig.axes[0]
        line = ax.lines[0]  # mean curve is drawn before the zero rule
        xs, ys = line.get_xdata(), line.get_ydata()
        frame = pd.read_csv(curves_csv, comment="#")
        sub = frame[frame["curve_id"] == "beta[2]"].sort_values("t")
        for g in (0, 3, 7):
            assert xs[g] == sub["t"].iloc[g]
            assert ys[g] == sub["mean"].iloc[g]

    def test_unknown_id_is_rejected_by_name(self, curves_csv, tmp_path):
        spec = FigureSpec("beta-bands", (curves_csv,), str(tmp_path / "b.png"),
                          ids=("beta[9]",))
        with pytest.raises(SchemaError, match=r"beta\[9\]"):
            build_figure(spec)


class TestRope:
    def make_rope(self, tmp_path, pi0_value=1.0):
        rows = ["# provenance", "curve_id,t,pi0,delta,flagged"]
        for t in GRID:
            flag = int(pi0_value > 0.9)
            rows.append(f"beta[0],{float(t)!r},{float(pi0_value)!r},0.1,{flag}")
        path = tmp_path / "rope.csv"
        path.write_text("\n".join(rows) + "\n")
        return str(path)

    def test_constant_one_sits_above_threshold(self, tmp_path):
        path = self.make_rope(tmp_path, pi0_value=1.0)
        spec = FigureSpec("rope", (path,), str(tmp_path / "r.png"))
        fig = build_figure(spec)
        ax = fig.axes[0]
        curve = ax.lines[0].get_ydata()
        assert np.all(curve > spec.threshold)
        levels = [ln.get_ydata()[0] for ln in ax.lines if ln.get_linestyle() == ":"]
        assert levels == [0.9]

    def test_threshold_option_moves_the_line(self, tmp_path):
        path = self.make_rope(tmp_path, pi0_value=0.5)
        spec = FigureSpec("rope", (path,), str(tmp_path / "r.png"), threshold=0.75)
        fig = build_figure(spec)
        levels = [ln.get_ydata()[0] for ln in fig.axes[0].lines
                  if ln.get_linestyle() == ":"]
        assert levels == [0.75]


class TestScenarioMeans:
    def test_overlay_draws_each_simulator_run(self, tmp_path):
        ones = np.ones_like(GRID)
        curves = write_curves(tmp_path / "scen.csv",
                              {"c[0]": (ones, 0.5 * ones, 1.5 * ones)})
        rows = ["scenario_id,model_id,x1,year,value"]
        for model in ("m1", "m2", "m3"):
            for t in GRID:
                rows.append(f"s1,{model},2.0,{t:.0f},1.1")
        data = tmp_path / "dataset.csv"
        data.write_text("\n".join(rows) + "\n")
        spec = FigureSpec("scenario-means", (curves, str(data)),
                          str(tmp_path / "s.png"))
        fig = build_figure(spec)
        ax = fig.axes[0]
        # 3 grey run overlays + mean curve + zero rule
        assert len(ax.lines) == 5

    def test_third_input_rejected(self, tmp_path):
        with pytest.raises(InvalidOptionError, match="at most 2"):
            FigureSpec("scenario-means", ("a.csv", "b.csv", "c.csv"), "s.png")


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(InvalidOptionError, match="kind"):
            FigureSpec("pie", ("a.csv",), "out.png")

    def test_threshold_range(self):
        with pytest.raises(InvalidOptionError, match="threshold"):
            FigureSpec("rope", ("a.csv",), "out.png", threshold=1.0)

    def test_second_input_only_for_overlay_kinds(self):
        with pytest.raises(InvalidOptionError, match="at most 1"):
            FigureSpec("beta-bands", ("a.csv", "b.csv"), "out.png")


class TestSchemaFailures:
    def test_missing_file_names_the_path(self, tmp_path):
        spec = FigureSpec("beta-bands", (str(tmp_path / "no.csv"),), "out.png")
        with pytest.raises(SchemaError, match="no.csv"):
            build_figure(spec)

    def test_missing_column_names_it(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("curve_id,t,mean,lo\nbeta[0],2020,0,0\n")
        spec = FigureSpec("beta-bands", (str(path),), "out.png")
        with pytest.raises(SchemaError, match="hi"):
            build_figure(spec)

    def test_trace_needs_scalar_series(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("chain,iteration\n0,0\n")
        spec = FigureSpec("trace", (str(path),), "out.png")
        with pytest.raises(SchemaError, match="scalar"):
            build_figure(spec)


class TestCliAndOutput:
    def test_cli_renders_png(self, curves_csv, tmp_path, capsys):
        out = tmp_path / "beta.png"
        rc = dispatch(["beta-bands", "--in", curves_csv, "--out", str(out)])
        assert rc == 0
        assert out.stat().st_size > 0
        assert capsys.readouterr().out.strip() == f"wrote {out}"

    def test_cli_reports_schema_error(self, tmp_path, capsys):
        rc = dispatch(["rope", "--in", str(tmp_path / "ghost.csv"),
                       "--out", str(tmp_path / "r.png")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: SchemaError:")

    def test_png_bytes_deterministic(self, curves_csv, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            render(FigureSpec("beta-bands", (curves_csv,), str(out)))
        assert a.read_bytes() == b.read_bytes()

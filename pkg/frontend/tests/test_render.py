import json
import os
import subprocess
import sys

import numpy as np
import pytest

from entbuffer_plots.plotspec import CATALOG, PlotKind, SchemaMismatch
from entbuffer_plots.rendering import (find_manifest_entry, main, render)

HERE = os.path.dirname(os.path.abspath(__file__))
RENDER_SCRIPT = os.path.join(HERE, "..", "render.py")


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(x) for x in row) + "\n")


def synthetic_rows(figure_id):
    """Small but schema-exact sample data for each cataloged figure."""
    spec = CATALOG[figure_id]
    cols = spec.columns
    if cols == ["alpha", "theta", "delta", "E"]:
        return cols, [[a, t, 0.0, min(1.0, a + t)]
                      for a in (0.25, 0.5, 1.0) for t in (0.0, 0.25, 0.5)]
    if cols == ["k", "alpha", "beta", "E"]:
        return cols, [[k, a, 0.0, min(k, 2 * a * k)]
                      for k in (1, 2) for a in (0.25, 0.5, 1.0)]
    if figure_id == "fig3b":
        return cols, [[k, 0.02, int(50 / np.sqrt(k)),
                       round(np.sqrt(k) * 1.01, 4), round(np.sqrt(k), 4),
                       "threshold"] for k in (1, 2, 3, 4)]
    if cols == ["alpha", "beta", "E_infinity", "residual", "kernel_dim"]:
        rows = []
        for a in (0.25, 0.5, 0.75, 1.0):
            for frac in (0.0, 0.5, 1.0):
                rows.append([a, round(a * frac, 6), 2 * a * (0.2 + frac),
                             1e-12, 1])
        return cols, rows
    if cols == ["alpha", "n", "E"]:
        return cols, [[a, n, min(1.0, 0.2 * n * a)]
                      for a in (0.5, 1.0) for n in range(6)]
    if figure_id == "appendix-fig10d":
        return cols, [[k, 1.0, fam, 1.0, 0.1 * n, 0.01, n, 500, 0.5, 7]
                      for k in (1, 2) for fam in ("swap", "iswap")
                      for n in (1, 3, 5)]
    if cols[0] == "k" and "q_hat" in cols:  # loss sweeps
        rows = [[1, a, fam, thr, 0.3 * a, 0.01, 10, 500, 0.5, 7]
                for a in (0.5, 0.75, 1.0) for fam in ("swap", "iswap")
                for thr in (0.9,)]
        rows.append([1, 1.0, "ref_p2", 0.9, 0.25, 0.0, 10, 0, 0.5, 7])
        rows.append([1, 1.0, "ref_asymptote_swap", 0.9, 1 / 3, 0.0, 10, 0, 0.5, 7])
        rows.append([1, 1.0, "ref_asymptote_iswap", 0.9, 1 / 9, 0.0, 10, 0, 0.5, 7])
        return cols, rows
    if figure_id == "appendix-fig7":
        return cols, [[panel, 0.5, 0.5, t, d, (t + d) / 2]
                      for panel in ("a", "b")
                      for t in (0.0, 0.5) for d in (0.0, 0.5, 1.0)]
    raise AssertionError(f"no synthetic data for {figure_id}")


class TestCatalogRendersEverything:
    @pytest.mark.parametrize("figure_id", sorted(CATALOG))
    def test_renders_without_error(self, figure_id, tmp_path):
        cols, rows = synthetic_rows(figure_id)
        csv_path = str(tmp_path / f"{figure_id}.csv")
        write_csv(csv_path, cols, rows)
        out = str(tmp_path / f"{figure_id}.png")
        result = render(figure_id, csv_path, out)
        assert os.path.exists(out)
        assert os.path.getsize(out) > 1000
        assert result.n_rows == len(rows)


class TestReferenceOverlays:
    def test_loss_panel_draws_dotted_and_dash_dotted_lines(self, tmp_path):
        cols, rows = synthetic_rows("fig6a")
        csv_path = str(tmp_path / "fig6a.csv")
        write_csv(csv_path, cols, rows)
        result = render("fig6a", csv_path, str(tmp_path / "fig6a.png"))
        assert "p2:dotted:0.25" in result.overlays
        assert any(o.startswith("ref_asymptote_swap:dash-dotted:0.333")
                   for o in result.overlays)
        assert any(o.startswith("ref_asymptote_iswap:dash-dotted:0.111")
                   for o in result.overlays)

    def test_scaling_panel_draws_sqrt_reference(self, tmp_path):
        cols, rows = synthetic_rows("fig3b")
        csv_path = str(tmp_path / "fig3b.csv")
        write_csv(csv_path, cols, rows)
        result = render("fig3b", csv_path, str(tmp_path / "fig3b.png"))
        assert "sqrt_k:dashed" in result.overlays

    def test_contour_overlay_when_sibling_file_present(self, tmp_path):
        cols, rows = synthetic_rows("fig5a")
        csv_path = str(tmp_path / "fig5a.csv")
        write_csv(csv_path, cols, rows)
        write_csv(str(tmp_path / "fig5a_contour.csv"),
                  ["segment", "alpha", "beta"],
                  [[0, 0.5, 0.0], [0, 0.55, 0.25], [0, 0.6, 0.5]])
        result = render("fig5a", csv_path, str(tmp_path / "fig5a.png"))
        assert "one_ebit_contour:solid" in result.overlays


class TestFailureModes:
    def test_schema_mismatch_raises_with_column_diff(self, tmp_path):
        csv_path = str(tmp_path / "bad.csv")
        write_csv(csv_path, ["alpha", "WRONG", "delta", "E"],
                  [[0.5, 0.1, 0.0, 0.3]])
        with pytest.raises(SchemaMismatch) as err:
            render("fig2a", csv_path, str(tmp_path / "x.png"))
        assert "theta" in str(err.value) and "WRONG" in str(err.value)
        assert not os.path.exists(tmp_path / "x.png")

    def test_empty_table_fails_cleanly(self, tmp_path):
        csv_path = str(tmp_path / "empty.csv")
        write_csv(csv_path, CATALOG["fig4b"].columns, [])
        with pytest.raises(ValueError, match="no data rows"):
            render("fig4b", csv_path, str(tmp_path / "x.png"))
        assert not os.path.exists(tmp_path / "x.png")

    def test_unknown_figure_id(self, tmp_path):
        with pytest.raises(KeyError):
            render("nope", str(tmp_path / "a.csv"), str(tmp_path / "x.png"))

    def test_cli_exit_codes(self, tmp_path, capsys):
        csv_path = str(tmp_path / "bad.csv")
        write_csv(csv_path, ["alpha", "WRONG", "delta", "E"],
                  [[0.5, 0.1, 0.0, 0.3]])
        rc = main(["--figure", "fig2a", "--in", csv_path,
                   "--out", str(tmp_path / "x.png")])
        assert rc == 2
        assert "schema mismatch" in capsys.readouterr().err
        assert not os.path.exists(tmp_path / "x.png")

    def test_input_csv_not_modified(self, tmp_path):
        cols, rows = synthetic_rows("fig4b")
        csv_path = str(tmp_path / "fig4b.csv")
        write_csv(csv_path, cols, rows)
        before = open(csv_path, "rb").read()
        render("fig4b", csv_path, str(tmp_path / "fig4b.png"))
        assert open(csv_path, "rb").read() == before


class TestManifestEmbedding:
    def test_caption_carries_version_and_seed(self, tmp_path):
        cols, rows = synthetic_rows("fig6a")
        csv_path = str(tmp_path / "fig6a.csv")
        write_csv(csv_path, cols, rows)
        manifest = {
            "figure_id": "fig6a", "experiment": "loss-sweep",
            "parameters": {"seed": 2024, "k": 1},
            "output_path": csv_path, "tool_version": "0.1.0",
            "wall_time_s": 1.0,
        }
        (tmp_path / "manifests.jsonl").write_text(json.dumps(manifest) + "\n")
        result = render("fig6a", csv_path, str(tmp_path / "fig6a.png"))
        assert "0.1.0" in result.caption and "2024" in result.caption

    def test_missing_manifest_is_reported_not_fatal(self, tmp_path):
        cols, rows = synthetic_rows("fig4b")
        csv_path = str(tmp_path / "fig4b.csv")
        write_csv(csv_path, cols, rows)
        result = render("fig4b", csv_path, str(tmp_path / "fig4b.png"))
        assert result.caption == "no manifest found"

    def test_entry_lookup_matches_basename(self, tmp_path):
        path = str(tmp_path / "manifests.jsonl")
        entries = [
            {"figure_id": "a", "output_path": "out/f1.csv",
             "tool_version": "1", "parameters": {}},
            {"figure_id": "fig4b", "output_path": "out/f2.csv",
             "tool_version": "2", "parameters": {"seed": 5}},
        ]
        with open(path, "w") as fh:
            for e in entries:
                fh.write(json.dumps(e) + "\n")
        got = find_manifest_entry(str(tmp_path / "f2.csv"), "zzz",
                                  manifest_path=path)
        assert got["tool_version"] == "2"


class TestScriptInterface:
    def test_render_script_runs(self, tmp_path):
        cols, rows = synthetic_rows("fig4b")
        csv_path = str(tmp_path / "fig4b.csv")
        write_csv(csv_path, cols, rows)
        out = str(tmp_path / "fig4b.png")
        proc = subprocess.run(
            [sys.executable, RENDER_SCRIPT, "--figure", "fig4b",
             "--in", csv_path, "--out", out],
            capture_output=True, text=True,
            cwd=os.path.join(HERE, ".."))
        assert proc.returncode == 0, proc.stderr
        assert os.path.exists(out)

    def test_end_to_end_with_producer_cli(self, tmp_path):
        # exercise the real external interface: entbuffer figure -> render
        proc = subprocess.run(
            ["entbuffer", "figure", "fig4b", "--out", str(tmp_path)],
            capture_output=True, text=True)
        if proc.returncode != 0:
            pytest.skip("producer CLI not installed")
        result = render("fig4b", str(tmp_path / "fig4b.csv"),
                        str(tmp_path / "fig4b.png"))
        assert "tool" in result.caption
        assert os.path.exists(tmp_path / "fig4b.png")

"""Draw a cataloged figure from its CSV; inputs are never modified.

The producing run's manifest line (manifests.jsonl next to the CSV, or a
path given explicitly) supplies the tool version and seed embedded in the
image caption so every picture can be traced back to its data.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .plotspec import CATALOG, PlotKind, PlotSpec, SchemaMismatch  # noqa: E402


@dataclass(frozen=True)
class RenderResult:
    figure_id: str
    output_path: str
    n_rows: int
    overlays: tuple[str, ...]
    caption: str


def read_table(path: str, spec: PlotSpec) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        got = reader.fieldnames or []
        if list(got) != list(spec.columns):
            raise SchemaMismatch(spec.figure_id, list(spec.columns), list(got))
        rows = list(reader)
    if not rows:
        raise ValueError(f"{spec.figure_id}: no data rows in {path}")
    return rows


def _f(row: dict, col: str) -> float:
    return float(row[col])


def find_manifest_entry(csv_path: str, figure_id: str,
                        manifest_path: str | None = None) -> dict | None:
    path = manifest_path or os.path.join(
        os.path.dirname(os.path.abspath(csv_path)), "manifests.jsonl")
    if not os.path.exists(path):
        return None
    chosen = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            if (os.path.basename(entry.get("output_path", ""))
                    == os.path.basename(csv_path)
                    or entry.get("figure_id") == figure_id):
                chosen = entry  # last matching line wins
    return chosen


def _caption_from(entry: dict | None) -> str:
    if entry is None:
        return "no manifest found"
    seed = entry.get("parameters", {}).get("seed", "n/a")
    return f"tool {entry.get('tool_version', '?')}, seed {seed}"


def _series_key(row: dict, spec: PlotSpec) -> str:
    return ", ".join(f"{c}={row[c]}" for c in spec.series)


def _draw_lines(ax, rows, spec: PlotSpec):
    reference_families = {spec.reference.get("p2_row", "")}
    reference_families |= set(spec.reference.get("asymptote_rows", ()))
    data_rows = [r for r in rows if r.get("family") not in reference_families]
    series: dict[str, list] = {}
    for row in data_rows:
        series.setdefault(_series_key(row, spec), []).append(row)
    for label, group in series.items():
        group.sort(key=lambda r: _f(r, spec.x))
        xs = [_f(r, spec.x) for r in group]
        ys = [_f(r, spec.y) for r in group]
        style = "--" if "iswap" in label else "-"
        if spec.x == "k":
            ax.plot(xs, ys, "o", label=label or None)
        else:
            ax.plot(xs, ys, style, marker=".", label=label or None)
    return data_rows


def _draw_references(ax, rows, spec: PlotSpec) -> list[str]:
    overlays = []
    ref = spec.reference
    if "sqrt_k_column" in ref:
        col = ref["sqrt_k_column"]
        pts = sorted({(_f(r, spec.x), _f(r, col)) for r in rows})
        ks = np.linspace(min(p[0] for p in pts), max(p[0] for p in pts), 64)
        ax.plot(ks, np.sqrt(ks), "k--", label="sqrt(k)")
        overlays.append("sqrt_k:dashed")
    if "p2_row" in ref:
        for row in rows:
            if row.get("family") == ref["p2_row"]:
                val = _f(row, spec.y)
                ax.axhline(val, linestyle=":", color="gray",
                           label=f"p^2 = {val:g}")
                overlays.append(f"p2:dotted:{val:g}")
                break
    for family in ref.get("asymptote_rows", ()):
        for row in rows:
            if row.get("family") == family:
                val = _f(row, spec.y)
                ax.axhline(val, linestyle="-.", color="black",
                           label=f"{family.removeprefix('ref_')} = {val:g}")
                overlays.append(f"{family}:dash-dotted:{val:g}")
                break
    return overlays


def _pivot(rows, spec: PlotSpec):
    xs = sorted({_f(r, spec.x) for r in rows})
    ys = sorted({_f(r, spec.y) for r in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for r in rows:
        grid[yi[_f(r, spec.y)], xi[_f(r, spec.x)]] = _f(r, spec.value)
    return np.array(xs), np.array(ys), grid


def _draw_heatmap(ax, rows, spec: PlotSpec):
    xs, ys, grid = _pivot(rows, spec)
    mesh = ax.pcolormesh(xs, ys, grid, vmin=0.0, vmax=spec.color_max,
                         shading="nearest", cmap="viridis")
    return mesh


def _load_contour(path: str):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if list(reader.fieldnames or []) != ["segment", "alpha", "beta"]:
            raise SchemaMismatch("contour", ["segment", "alpha", "beta"],
                                 list(reader.fieldnames or []))
        rows = list(reader)
    segments: dict[str, list] = {}
    for r in rows:
        segments.setdefault(r["segment"], []).append(
            (float(r["alpha"]), float(r["beta"])))
    return segments


def render(figure_id: str, csv_path: str, out_path: str,
           contour_path: str | None = None,
           manifest_path: str | None = None) -> RenderResult:
    """Render one cataloged figure; raises on schema or data problems."""
    if figure_id not in CATALOG:
        raise KeyError(f"unknown figure id {figure_id!r}")
    spec = CATALOG[figure_id]
    rows = read_table(csv_path, spec)
    caption = _caption_from(find_manifest_entry(csv_path, figure_id,
                                                manifest_path))
    overlays: list[str] = []

    if spec.kind is PlotKind.HEATMAP and spec.panel_column:
        panels = sorted({r[spec.panel_column] for r in rows})
        ncols = 4
        nrows_fig = (len(panels) + ncols - 1) // ncols
        fig, axes = plt.subplots(nrows_fig, ncols,
                                 figsize=(3.2 * ncols, 3.0 * nrows_fig),
                                 squeeze=False)
        mesh = None
        for i, panel in enumerate(panels):
            ax = axes[i // ncols][i % ncols]
            sub = [r for r in rows if r[spec.panel_column] == panel]
            mesh = _draw_heatmap(ax, sub, spec)
            ax.set_title(f"({panel}) alpha={sub[0]['alpha']}pi, "
                         f"beta={sub[0]['beta']}pi", fontsize=9)
            ax.set_xlabel(spec.x_label)
            ax.set_ylabel(spec.y_label)
        for j in range(len(panels), nrows_fig * ncols):
            axes[j // ncols][j % ncols].axis("off")
        fig.colorbar(mesh, ax=axes, label="E (ebits)")
    else:
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        if spec.kind is PlotKind.HEATMAP:
            mesh = _draw_heatmap(ax, rows, spec)
            fig.colorbar(mesh, ax=ax, label="E (ebits)")
            if spec.reference.get("contour"):
                cpath = contour_path or _default_contour_path(csv_path)
                if os.path.exists(cpath):
                    for seg in _load_contour(cpath).values():
                        al, be = zip(*seg)
                        ax.plot(be, al, "w-", linewidth=2)
                    overlays.append("one_ebit_contour:solid")
        else:
            _draw_lines(ax, rows, spec)
            if spec.kind is PlotKind.LINES_WITH_REFERENCE:
                overlays.extend(_draw_references(ax, rows, spec))
            ax.legend(fontsize=7)
        ax.set_xlabel(spec.x_label)
        ax.set_ylabel(spec.y_label)
        ax.set_title(figure_id)
    fig.text(0.99, 0.01, caption, ha="right", fontsize=6, color="gray")
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return RenderResult(figure_id, out_path, len(rows), tuple(overlays),
                        caption)


def _default_contour_path(csv_path: str) -> str:
    base, ext = os.path.splitext(csv_path)
    return base + "_contour" + ext


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render.py",
        description="render an entbuffer CSV into its figure panel")
    parser.add_argument("--figure", required=True, help="catalog id, e.g. fig4a")
    parser.add_argument("--in", dest="csv_path", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--contour", default=None,
                        help="contour CSV (defaults to <in>_contour.csv)")
    parser.add_argument("--manifest", default=None,
                        help="manifest file (defaults to manifests.jsonl "
                             "next to the input)")
    args = parser.parse_args(argv)
    try:
        result = render(args.figure, args.csv_path, args.out,
                        contour_path=args.contour,
                        manifest_path=args.manifest)
    except SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{result.figure_id}: {result.n_rows} rows -> {result.output_path} "
          f"[{result.caption}]")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

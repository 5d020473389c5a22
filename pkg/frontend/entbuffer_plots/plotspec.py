"""Plot specifications: one entry per cataloged figure id.

The catalog mirrors the producer CLI (`entbuffer list`): figure ids, the CSV
schema each id writes, and how its panel is drawn. All angle columns are in
units of pi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class SchemaMismatch(ValueError):
    """Input CSV columns differ from the documented schema."""

    def __init__(self, figure_id: str, expected: list[str], got: list[str]):
        self.expected = expected
        self.got = got
        missing = [c for c in expected if c not in got]
        unexpected = [c for c in got if c not in expected]
        super().__init__(
            f"{figure_id}: column mismatch; missing {missing}, "
            f"unexpected {unexpected} (expected {expected})"
        )


class PlotKind(Enum):
    HEATMAP = "heatmap"
    LINES = "lines"
    LINES_WITH_REFERENCE = "lines-with-reference"


LOSS_COLUMNS = ["k", "alpha_over_pi", "family", "E_threshold", "q_hat",
                "stderr", "n", "M", "p", "seed"]


@dataclass(frozen=True)
class PlotSpec:
    figure_id: str
    columns: list[str]
    kind: PlotKind
    x: str
    y: str
    value: str = ""
    series: tuple[str, ...] = ()
    x_label: str = ""
    y_label: str = ""
    color_max: float = 1.0  # heatmaps are normalized to [0, k]
    panel_column: str = ""
    reference: dict = field(default_factory=dict)


CATALOG: dict[str, PlotSpec] = {}


def _add(spec: PlotSpec):
    CATALOG[spec.figure_id] = spec


_PURE_SWEEP_COLS = ["alpha", "theta", "delta", "E"]

_add(PlotSpec("fig2a", _PURE_SWEEP_COLS, PlotKind.HEATMAP,
              x="theta", y="alpha", value="E",
              x_label="theta / pi", y_label="alpha / pi"))
_add(PlotSpec("fig2b", _PURE_SWEEP_COLS, PlotKind.HEATMAP,
              x="theta", y="alpha", value="E",
              x_label="theta / pi", y_label="alpha / pi"))
_add(PlotSpec("fig3a", ["k", "alpha", "beta", "E"], PlotKind.LINES,
              x="alpha", y="E", series=("k",),
              x_label="alpha / pi", y_label="E (ebits)"))
_add(PlotSpec("fig3b",
              ["k", "alpha", "n_star", "time_scaled", "sqrt_k", "criterion"],
              PlotKind.LINES_WITH_REFERENCE,
              x="k", y="time_scaled",
              x_label="buffer pairs k", y_label="n k alpha / pi",
              reference={"sqrt_k_column": "sqrt_k"}))
_add(PlotSpec("fig4a",
              ["alpha", "beta", "E_infinity", "residual", "kernel_dim"],
              PlotKind.HEATMAP, x="beta", y="alpha", value="E_infinity",
              x_label="beta / pi", y_label="alpha / pi"))
_add(PlotSpec("fig4b", ["alpha", "n", "E"], PlotKind.LINES,
              x="n", y="E", series=("alpha",),
              x_label="caching steps n", y_label="E (ebits)"))
_add(PlotSpec("fig5a",
              ["alpha", "beta", "E_infinity", "residual", "kernel_dim"],
              PlotKind.HEATMAP, x="beta", y="alpha", value="E_infinity",
              x_label="beta / pi", y_label="alpha / pi", color_max=2.0,
              reference={"contour": True}))
_add(PlotSpec("fig5b",
              ["alpha", "beta", "E_infinity", "residual", "kernel_dim"],
              PlotKind.HEATMAP, x="beta", y="alpha", value="E_infinity",
              x_label="beta / pi", y_label="alpha / pi", color_max=3.0,
              reference={"contour": True}))
for fid in ("fig6a", "fig6b", "appendix-fig10c", "appendix-fig11a",
            "appendix-fig11b", "appendix-fig11c"):
    _add(PlotSpec(fid, LOSS_COLUMNS, PlotKind.LINES_WITH_REFERENCE,
                  x="alpha_over_pi", y="q_hat",
                  series=("family", "E_threshold"),
                  x_label="alpha / pi", y_label="q_n(E)",
                  reference={"p2_row": "ref_p2",
                             "asymptote_rows": ("ref_asymptote_swap",
                                                "ref_asymptote_iswap")}))
_add(PlotSpec("appendix-fig10d", LOSS_COLUMNS, PlotKind.LINES,
              x="n", y="q_hat", series=("k", "family"),
              x_label="caching steps n", y_label="q_n(1 ebit)"))
_add(PlotSpec("appendix-fig7",
              ["panel", "alpha", "beta", "theta", "delta", "E"],
              PlotKind.HEATMAP, x="theta", y="delta", value="E",
              x_label="theta / pi", y_label="delta / pi",
              panel_column="panel"))
_add(PlotSpec("appendix-fig8", _PURE_SWEEP_COLS, PlotKind.HEATMAP,
              x="theta", y="alpha", value="E",
              x_label="theta / pi", y_label="alpha / pi", color_max=2.0))

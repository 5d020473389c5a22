"""Figure rendering for entbuffer CSV outputs."""

__version__ = "0.1.0"

from .plotspec import CATALOG, PlotKind, PlotSpec, SchemaMismatch
from .rendering import RenderResult, main, render

"""Offline figure renderer for chemoblow outputs.

Reads only the documented file interfaces (trajectory CSV, radial profile
CSV, sweep aggregate CSV, and the sibling JSON summaries) and renders
deterministic PNG figures: density profiles, energy histories, the
five-term rate decomposition, bound-versus-observed blow-up times, and
sweep heatmaps.
"""

from .schema import SchemaVersionError, load_summary, load_table
from .figures import FigureSpec, render, FIGURE_KINDS

__version__ = "0.1.0"

__all__ = ["FigureSpec", "render", "FIGURE_KINDS", "SchemaVersionError",
           "load_summary", "load_table"]

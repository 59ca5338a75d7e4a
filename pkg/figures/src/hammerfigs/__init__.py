"""CSV-to-figure rendering for hammerlab experiment output."""

__version__ = "0.1.0"

from .render import PlotSpec, RenderError, build_series, render

__all__ = ["PlotSpec", "RenderError", "build_series", "render"]

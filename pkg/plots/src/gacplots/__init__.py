"""Offline rendering of gaclab CSV outputs into figures."""

__version__ = "0.1.0"

from .render import PlotJob, render

__all__ = ["__version__", "PlotJob", "render"]

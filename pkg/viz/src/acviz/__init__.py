"""Read-only plotting tools for acsphere diagnostics and snapshots."""

__version__ = "0.1.0"

from .io import (
    DIAGNOSTICS_HEADER,
    DiagnosticsFrame,
    FormatError,
    read_diagnostics,
    read_snapshot,
)
from .plots import plot_snapshot, plot_timeseries

__all__ = [
    "DIAGNOSTICS_HEADER",
    "DiagnosticsFrame",
    "FormatError",
    "plot_snapshot",
    "plot_timeseries",
    "read_diagnostics",
    "read_snapshot",
]

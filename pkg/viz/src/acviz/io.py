"""Strict readers for the solver's diagnostics and snapshot files.

These parsers are read-only consumers of the text formats the solver
command line writes.  They are deliberately strict: any drift in the
header contract fails loudly instead of plotting wrong columns.
"""

import re
from dataclasses import dataclass

import numpy as np

DIAGNOSTICS_HEADER = (
    "n,time,uniform_norm,discrete_energy,continuous_energy,envelope,l2_norm"
)
DIAGNOSTICS_COLUMNS = DIAGNOSTICS_HEADER.split(",")

_SNAPSHOT_HEADER = re.compile(
    r"^#\s*t=(?P<t>\S+)\s+nlat=(?P<nlat>\d+)\s+nlon=(?P<nlon>\d+)\s*$"
)


class FormatError(ValueError):
    """An input file does not match the documented format."""


@dataclass
class DiagnosticsFrame:
    """Parsed diagnostics table, one series per column."""

    columns: dict

    @property
    def n_rows(self) -> int:
        return len(self.columns["n"])

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise FormatError(f"unknown column '{name}'")
        return self.columns[name]


def read_diagnostics(path) -> DiagnosticsFrame:
    """Parse a diagnostics file, enforcing the exact header contract."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != DIAGNOSTICS_HEADER:
            raise FormatError(
                f"{path}: unexpected header {header!r}; expected "
                f"{DIAGNOSTICS_HEADER!r}"
            )
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: malformed row: {exc}") from None
    if data.size == 0:
        raise FormatError(f"{path}: no data rows")
    if data.shape[1] != len(DIAGNOSTICS_COLUMNS):
        raise FormatError(
            f"{path}: expected {len(DIAGNOSTICS_COLUMNS)} columns, "
            f"got {data.shape[1]}"
        )
    return DiagnosticsFrame(
        columns={
            name: data[:, i] for i, name in enumerate(DIAGNOSTICS_COLUMNS)
        }
    )


def read_snapshot(path):
    """Parse a snapshot grid file; returns (time, grid)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        match = _SNAPSHOT_HEADER.match(header)
        if match is None:
            raise FormatError(f"{path}: malformed snapshot header {header!r}")
        t = float(match.group("t"))
        nlat = int(match.group("nlat"))
        nlon = int(match.group("nlon"))
        try:
            grid = np.loadtxt(fh, ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: malformed grid row: {exc}") from None
    if grid.shape != (nlat, nlon):
        raise FormatError(
            f"{path}: header promises {nlat} x {nlon} values, "
            f"file holds {grid.shape[0]} x {grid.shape[1]}"
        )
    return t, grid

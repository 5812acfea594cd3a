"""CSV time-series output (format version 1)."""

from __future__ import annotations

import csv
from typing import List, TextIO

import numpy as np

from .simulation import DiagnosticsRecord

FORMAT_VERSION = 1


def columns(n_modes: int) -> List[str]:
    cols = ["t"]
    for block in ("a1", "p1", "a2", "p2"):
        cols += [f"{block}_{k}" for k in range(1, n_modes + 1)]
    cols += ["omega1", "omega2", "omega3", "q1", "q2", "q3", "q4",
             "V", "Vdot", "gamma1", "gamma2", "gamma3", "decay_residual", "y",
             "q_drift", "dist_X", "u1", "u2", "u3", "taug1", "taug2", "taug3"]
    return cols


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


class CsvSink:
    """Callable sink writing one row per diagnostics record."""

    def __init__(self, stream: TextIO, n_modes: int):
        self.n_modes = n_modes
        self._writer = csv.writer(stream, lineterminator="\n")
        stream.write(f"# format={FORMAT_VERSION}\n")
        self._writer.writerow(columns(n_modes))

    def __call__(self, rec: DiagnosticsRecord) -> None:
        g = rec.gamma
        values = [rec.t, *rec.state, rec.V, rec.Vdot, g.gamma1, g.gamma2, g.gamma3,
                  rec.decay_residual, rec.y, rec.q_drift, rec.dist_X,
                  *rec.u.components, *rec.tau_g.components]
        self._writer.writerow([_fmt(v) for v in values])


def read_csv(path):
    """Return ``(column names, float array of rows)`` from a format-1 file."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# format={FORMAT_VERSION}":
            raise ValueError(f"{path}: unsupported header {first!r}")
        reader = csv.reader(fh)
        names = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    return names, rows


def state_from_csv(path, row: int = -1) -> np.ndarray:
    """Flat state stored in one row of an output file (last row by default)."""
    names, rows = read_csv(path)
    start = names.index("t") + 1
    stop = names.index("q4") + 1
    return rows[row, start:stop].copy()

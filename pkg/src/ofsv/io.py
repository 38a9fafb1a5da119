"""CSV tables and legacy-ASCII VTK structured-points output."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .basis import SolutionState
from .physics import Euler


def fmt(value) -> str:
    """17 significant digits in scientific notation; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.16e}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Header list and float array (empty cells become NaN)."""
    with Path(path).open() as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) if v else np.nan for v in row] for row in r]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def field_names(law, m: int):
    if isinstance(law, Euler):
        vel = ["u", "v"][:law.dim]
        return ["rho", *vel, "p"]
    return ["u"] if m == 1 else [f"u{i}" for i in range(m)]


def output_fields(state: SolutionState, law) -> np.ndarray:
    """Primitive fields for Euler, raw components otherwise, laid out along the axes."""
    flat = state.flat_fields()
    if isinstance(law, Euler):
        return law.primitive(flat)
    return flat


def write_profile_csv(path, state: SolutionState, law) -> Path:
    """1D snapshot: CV centres and CV-average fields."""
    x = state.cv_centers()
    fields = output_fields(state, law)
    names = field_names(law, state.m)
    return write_csv(path, ["x", *names], zip(x, *fields))


def write_vtk(path, state: SolutionState, law, title: Optional[str] = None) -> Path:
    """2D snapshot as legacy ASCII STRUCTURED_POINTS, one point per CV.

    Points sit at CV centres; with non-uniform CV widths the spacing written
    is the mean CV width, so coordinates are approximate.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = output_fields(state, law)
    names = field_names(law, state.m)
    cx, cy = state.cv_centers()
    nx, ny = len(cx), len(cy)
    dx = (state.mesh.x.b - state.mesh.x.a) / nx
    dy = (state.mesh.y.b - state.mesh.y.a) / ny
    lines = ["# vtk DataFile Version 3.0",
             (title or f"ofsv t={state.t:.16e}")[:255],
             "ASCII",
             "DATASET STRUCTURED_POINTS",
             f"DIMENSIONS {nx} {ny} 1",
             f"ORIGIN {fmt(cx[0])} {fmt(cy[0])} 0",
             f"SPACING {fmt(dx)} {fmt(dy)} 1",
             f"POINT_DATA {nx * ny}"]
    for name, f in zip(names, fields):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        # VTK ordering: x fastest
        lines.extend(fmt(v) for v in f.T.ravel())
    path.write_text("\n".join(lines) + "\n")
    return path


def read_vtk(path):
    """Parse a file written by :func:`write_vtk` into (dims, {name: (ny, nx) array})."""
    tokens = Path(path).read_text().split("\n")
    dims = None
    out = {}
    i = 0
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("DIMENSIONS"):
            dims = tuple(int(v) for v in line.split()[1:3])
        elif line.startswith("SCALARS"):
            name = line.split()[1]
            n = dims[0] * dims[1]
            vals = np.array([float(v) for v in tokens[i + 2:i + 2 + n]])
            out[name] = vals.reshape(dims[1], dims[0])
            i += 1 + n
        i += 1
    return dims, out


def write_snapshot(prefix, state: SolutionState, law, index: int) -> Path:
    if state.dim == 1:
        return write_profile_csv(f"{prefix}_{index:04d}.csv", state, law)
    return write_vtk(f"{prefix}_{index:04d}.vtk", state, law)


def write_diagnostics(path, diag, law, m: int) -> Path:
    names = field_names(law, m)
    header = ["t", "dt", "a0", *[f"mass_{n}" for n in names], "min_rho", "min_p"]
    return write_csv(path, header, diag.as_rows())

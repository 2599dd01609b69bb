"""Run artifacts: energy time series, field snapshots, run manifest.

energy.csv is RFC 4180 (CRLF rows) and bit-deterministic for a fixed
configuration and kernel lane; wall-clock timing therefore stays out of
it, living only in StepReport.  Snapshots are legacy VTK structured
points (ASCII) or a raw little-endian dump with a self-describing header.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import os

import numpy as np

from . import config as cfgmod
from . import grid as G
from . import spd_algebra as sa
from .backend import BACKEND
from .energy import EnergyBudget

# budget fields first (schema promise: every EnergyBudget field, by name),
# then the deterministic StepReport fields
ENERGY_COLUMNS = (("step", "t")
                  + tuple(f.name for f in dataclasses.fields(EnergyBudget))
                  + ("cfl", "poisson_cycles", "lam_min", "det_min",
                     "frob_max"))

_B_NAMES = ("conf_xx", "conf_yy", "conf_zz", "conf_xy", "conf_xz", "conf_yz")


class EnergyWriter:
    """Accumulates rows and writes energy.csv; usable mid-run on failure."""

    def __init__(self):
        self.rows: list[tuple] = []

    def add(self, step: int, t: float, budget: EnergyBudget,
            cfl: float, poisson_cycles: int, lam_min: float,
            det_min: float, frob_max: float) -> None:
        row = (step, repr(float(t))) + tuple(
            repr(float(getattr(budget, f.name)))
            for f in dataclasses.fields(EnergyBudget))
        row += (repr(float(cfl)), poisson_cycles, repr(float(lam_min)),
                repr(float(det_min)), repr(float(frob_max)))
        self.rows.append(row)

    def dump(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(ENERGY_COLUMNS)
        w.writerows(self.rows)
        return buf.getvalue()

    def write(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.dump())


def _flatten_f(q: np.ndarray) -> np.ndarray:
    # legacy VTK wants x fastest
    return np.asarray(q).ravel(order="F")


def write_vtk(path: str, vel: G.VelocityField, b6: np.ndarray,
              g: G.Grid, title: str = "viscoflow fields") -> None:
    """Cell-centered fields as a structured-points dataset.

    Conformation goes out as six scalar arrays plus the derived least
    eigenvalue; velocity is averaged to centers and written as one vector
    array.  ASCII for maximum viewer compatibility.
    """
    lam = sa.lambda_min(b6)
    vc = G.center_velocity(vel, g)
    n = g.nx * g.ny * g.nz
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title + "\n")
        fh.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {g.nx} {g.ny} {g.nz}\n")
        fh.write(f"ORIGIN {g.hx / 2!r} {g.hy / 2!r} {g.hz / 2!r}\n")
        fh.write(f"SPACING {g.hx!r} {g.hy!r} {g.hz!r}\n")
        fh.write(f"POINT_DATA {n}\n")
        for i, name in enumerate(_B_NAMES):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(repr(float(v))
                               for v in _flatten_f(b6[..., i])))
            fh.write("\n")
        fh.write("SCALARS lambda_min double 1\nLOOKUP_TABLE default\n")
        fh.write("\n".join(repr(float(v)) for v in _flatten_f(lam)))
        fh.write("\nVECTORS velocity double\n")
        flat = np.stack([_flatten_f(vc[..., i]) for i in range(3)], axis=1)
        fh.write("\n".join(" ".join(repr(float(c)) for c in row)
                           for row in flat))
        fh.write("\n")


RAW_MAGIC = b"VFLOWRAW1\n"


def write_raw(path: str, vel: G.VelocityField, b6: np.ndarray,
              g: G.Grid) -> None:
    """Binary snapshot: ASCII header block, then little-endian float64.

    Payload order: conformation (nx,ny,nz,6), least eigenvalue (nx,ny,nz),
    centered velocity (nx,ny,nz,3), all C order.
    """
    lam = sa.lambda_min(b6)
    vc = G.center_velocity(vel, g)
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC)
        fh.write(f"dims {g.nx} {g.ny} {g.nz}\n".encode())
        fh.write(b"dtype <f8\n")
        fh.write(b"fields conf:6 lambda_min:1 velocity:3\n")
        fh.write(b"end\n")
        fh.write(np.ascontiguousarray(b6, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(lam, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(vc, dtype="<f8").tobytes())


def read_raw(path: str):
    """Inverse of write_raw; returns (b6, lambda_min, centered velocity)."""
    with open(path, "rb") as fh:
        if fh.readline() != RAW_MAGIC:
            raise ValueError("not a viscoflow raw snapshot")
        dims = fh.readline().split()
        if dims[0] != b"dims":
            raise ValueError("malformed raw header")
        nx, ny, nz = (int(v) for v in dims[1:])
        if fh.readline() != b"dtype <f8\n":
            raise ValueError("unsupported dtype")
        fh.readline()  # fields line
        if fh.readline() != b"end\n":
            raise ValueError("malformed raw header")
        data = fh.read()
    n = nx * ny * nz
    b = np.frombuffer(data[:n * 6 * 8], dtype="<f8").reshape(nx, ny, nz, 6)
    lam = np.frombuffer(data[n * 6 * 8:n * 7 * 8],
                        dtype="<f8").reshape(nx, ny, nz)
    vc = np.frombuffer(data[n * 7 * 8:], dtype="<f8").reshape(nx, ny, nz, 3)
    return b, lam, vc


def grid_hash(g: G.Grid) -> str:
    blob = repr((g.nx, g.ny, g.nz, g.hx, g.hy, g.hz, g.bc)).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(path: str, cfg: "cfgmod.SimConfig", g: G.Grid,
                   error: str | None = None,
                   extra: dict | None = None) -> None:
    """Everything that affects results, plus how the run ended."""
    from . import __version__
    lines = [
        f"viscoflow_version = {__version__}",
        f"kernel_lane = {BACKEND}",
        f"numpy_version = {np.__version__}",
        f"grid_hash = {grid_hash(g)}",
        f"status = {'error' if error else 'ok'}",
    ]
    if error:
        lines.append(f"error = {error}")
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    body = "\n".join(lines) + "\n\n# --- full configuration ---\n"
    body += cfgmod.emit_config(cfg)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body)


def ensure_out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path

"""Run artifacts: energy CSV, VTK snapshots, final-state dump, manifest.

Every writer is deterministic: given the same trajectory it produces the
same bytes, so output files can be hashed and compared across reruns.
Floats are written with 17 significant digits (text) or as little-endian
IEEE 754 doubles (binary); both round-trip exactly.

File inventory produced by write_outputs(trajectory, directory):

    energy.csv          per-snapshot energy ledger, 8 fixed columns
    snapshot_NNNNNN.vtk legacy-ASCII structured-points m (and s) fields
    final_state.bin     raw dump of the last snapshot, see sidecar
    final_state.json    layout metadata for final_state.bin
    config.toml         the exact configuration, re-parseable
    manifest.json       run summary: files + sha256, solver stats,
                        energy accounting, warnings, versions

The binary dump stores each field as float64 little-endian in C order
with index layout (k, j, i, component) where i runs along the first grid
axis; the sidecar records this plus the grid so readers need no other
context.
"""

from __future__ import annotations

import hashlib
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__ as _pkg_version
from .config import emit_config
from .drivers import Trajectory
from .grid import Grid, VectorField, vector_field
from .llg import EnergyLedger

__all__ = [
    "write_energy_csv",
    "write_vtk",
    "read_vtk",
    "write_final_state",
    "read_final_state",
    "write_outputs",
    "RunManifest",
]

_FLOAT_FMT = "%.17g"


def _fmt_float(x: float) -> str:
    return _FLOAT_FMT % float(x)


def write_energy_csv(ledger: EnergyLedger | None, path: str | Path) -> None:
    """Write the ledger as CSV with the fixed 8-column layout.

    Columns: t, exchange, anisotropy, magnetostatic, total, dissipation,
    spin_work, slack. An empty ledger yields a header-only file.
    """
    if ledger is None:
        lines = ["t,exchange,anisotropy,magnetostatic,total,dissipation,spin_work,slack"]
    else:
        columns = ledger.as_columns()
        lines = [",".join(columns)]
        for row in zip(*columns.values()):
            lines.append(",".join(_fmt_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _vtk_flat(data: np.ndarray) -> np.ndarray:
    # VTK structured points order the points x-fastest, z-slowest; our
    # arrays are (nx, ny, nz, 3), so transpose before flattening.
    return np.ascontiguousarray(data.transpose(2, 1, 0, 3)).reshape(-1, 3)


def write_vtk(
    path: str | Path,
    grid: Grid,
    fields: dict[str, VectorField],
    title: str = "spindrift snapshot",
) -> None:
    """Write vector fields on cell centers as legacy-ASCII VTK.

    Uses DATASET STRUCTURED_POINTS with ORIGIN at the first cell center
    and SPACING h, one VECTORS block per entry of `fields` in insertion
    order.
    """
    if not fields:
        raise ValueError("write_vtk needs at least one field")
    nx, ny, nz = grid.shape
    first_center = tuple(grid.origin[a] + 0.5 * grid.h for a in range(3))
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN " + " ".join(_fmt_float(c) for c in first_center),
        "SPACING " + " ".join(_fmt_float(grid.h) for _ in range(3)),
        f"POINT_DATA {nx * ny * nz}",
    ]
    for name, fld in fields.items():
        if fld.grid != grid:
            raise ValueError(f"field {name!r} lives on a different grid")
        lines.append(f"VECTORS {name} double")
        for row in _vtk_flat(fld.data):
            lines.append(" ".join(_fmt_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_vtk(path: str | Path) -> tuple[Grid, dict[str, VectorField]]:
    """Parse a file written by write_vtk back into fields (for round-trips)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 8 or "STRUCTURED_POINTS" not in lines[3]:
        raise ValueError(f"{path}: not a structured-points VTK file")
    dims = tuple(int(x) for x in lines[4].split()[1:4])
    first_center = tuple(float(x) for x in lines[5].split()[1:4])
    spacing = tuple(float(x) for x in lines[6].split()[1:4])
    if not (spacing[0] == spacing[1] == spacing[2]):
        raise ValueError(f"{path}: anisotropic spacing is not produced by this package")
    h = spacing[0]
    origin = tuple(c - 0.5 * h for c in first_center)
    grid = Grid(dims, h, origin)
    n_points = dims[0] * dims[1] * dims[2]
    fields: dict[str, VectorField] = {}
    i = 8
    while i < len(lines):
        head = lines[i].split()
        if not head:
            i += 1
            continue
        if head[0] != "VECTORS":
            raise ValueError(f"{path}: unexpected line {i + 1}: {lines[i]!r}")
        name = head[1]
        block = lines[i + 1 : i + 1 + n_points]
        flat = np.array([[float(v) for v in row.split()] for row in block])
        data = flat.reshape(dims[2], dims[1], dims[0], 3).transpose(2, 1, 0, 3)
        fields[name] = vector_field(grid, np.ascontiguousarray(data))
        i += 1 + n_points
    return grid, fields


def write_final_state(
    directory: str | Path,
    grid: Grid,
    t: float,
    fields: dict[str, VectorField],
) -> tuple[Path, Path]:
    """Dump fields as raw little-endian float64 plus a JSON sidecar.

    Returns (binary_path, sidecar_path). Field blocks are concatenated in
    insertion order; each block is the field transposed to (nz, ny, nx, 3)
    and written in C order, so the flat index is
    ((k * ny + j) * nx + i) * 3 + component.
    """
    directory = Path(directory)
    bin_path = directory / "final_state.bin"
    sidecar_path = directory / "final_state.json"
    nx, ny, nz = grid.shape
    blob = bytearray()
    offsets = {}
    for name, fld in fields.items():
        offsets[name] = len(blob)
        arr = np.ascontiguousarray(fld.data.transpose(2, 1, 0, 3), dtype="<f8")
        blob.extend(arr.tobytes())
    bin_path.write_bytes(bytes(blob))
    sidecar = {
        "format": "spindrift-state-v1",
        "dtype": "<f8",
        "index_order": "k,j,i,component (C order; i along axis 0 of the grid)",
        "stored_shape": [nz, ny, nx, 3],
        "grid": {"shape": [nx, ny, nz], "h": grid.h, "origin": list(grid.origin)},
        "t": t,
        "fields": list(fields),
        "byte_offsets": offsets,
        "bytes_per_field": 8 * nx * ny * nz * 3,
    }
    sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    return bin_path, sidecar_path


def read_final_state(directory: str | Path) -> tuple[Grid, float, dict[str, VectorField]]:
    """Read back a dump written by write_final_state."""
    directory = Path(directory)
    sidecar = json.loads((directory / "final_state.json").read_text(encoding="utf-8"))
    if sidecar.get("format") != "spindrift-state-v1":
        raise ValueError(f"unrecognized final-state format: {sidecar.get('format')!r}")
    g = sidecar["grid"]
    grid = Grid(tuple(g["shape"]), g["h"], tuple(g["origin"]))
    nx, ny, nz = grid.shape
    raw = (directory / "final_state.bin").read_bytes()
    per = sidecar["bytes_per_field"]
    fields = {}
    for name in sidecar["fields"]:
        off = sidecar["byte_offsets"][name]
        arr = np.frombuffer(raw[off : off + per], dtype="<f8").reshape(nz, ny, nx, 3)
        fields[name] = vector_field(grid, np.ascontiguousarray(arr.transpose(2, 1, 0, 3)))
    return grid, float(sidecar["t"]), fields


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Summary of one run's outputs, serialized as manifest.json."""

    version: str
    mode: str
    n_steps: int
    wall_time_s: float
    config_toml: str
    files: dict[str, str] = field(default_factory=dict)  # name -> sha256
    solver: dict = field(default_factory=dict)
    energy: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "mode": self.mode,
            "n_steps": self.n_steps,
            "wall_time_s": self.wall_time_s,
            "config_toml": self.config_toml,
            "files": self.files,
            "solver": self.solver,
            "energy": self.energy,
            "warnings": self.warnings,
            "environment": self.environment,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _solver_summary(traj: Trajectory) -> dict:
    iters = traj.solver_iterations
    resid = traj.solver_residuals
    if not iters:
        return {"solves": 0}
    return {
        "solves": len(iters),
        "iterations_total": int(np.sum(iters)),
        "iterations_max": int(np.max(iters)),
        "iterations_mean": float(np.mean(iters)),
        "residual_max": float(np.max(resid)) if resid else 0.0,
    }


def _energy_summary(ledger: EnergyLedger | None) -> dict:
    if ledger is None or not ledger.t:
        return {}
    return {
        "t_first": ledger.t[0],
        "t_last": ledger.t[-1],
        "total_first": ledger.total[0],
        "total_last": ledger.total[-1],
        "dissipation_last": ledger.dissipation[-1],
        "spin_work_last": ledger.spin_work[-1],
        "applied_work_last": ledger.applied_work[-1],
        "worst_slack": ledger.worst_slack,
        "worst_slack_alt": min(ledger.slack_alt) if ledger.slack_alt else 0.0,
    }


def write_outputs(
    traj: Trajectory,
    directory: str | Path,
    wall_time_s: float | None = None,
    vtk_snapshots: bool = True,
) -> RunManifest:
    """Write the canonical artifact set for a finished run.

    Creates `directory` if needed and returns the manifest (also written
    as manifest.json). Set vtk_snapshots=False to skip per-snapshot VTK
    files on large runs; the final state is always dumped.
    """
    t_start = time.perf_counter()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cfg = traj.config
    grid = cfg.grid

    written: dict[str, Path] = {}

    csv_path = directory / "energy.csv"
    write_energy_csv(traj.ledger, csv_path)
    written["energy.csv"] = csv_path

    config_path = directory / "config.toml"
    config_path.write_text(emit_config(cfg), encoding="utf-8")
    written["config.toml"] = config_path

    if vtk_snapshots:
        for idx, (t, m) in enumerate(zip(traj.times, traj.m)):
            fields = {"m": m, "s": traj.s[idx]}
            name = f"snapshot_{idx:06d}.vtk"
            write_vtk(directory / name, grid, fields, title=f"t = {_fmt_float(t)}")
            written[name] = directory / name

    if traj.times:
        bin_path, sidecar_path = write_final_state(
            directory, grid, traj.times[-1], {"m": traj.final_m, "s": traj.final_s}
        )
        written["final_state.bin"] = bin_path
        written["final_state.json"] = sidecar_path

    manifest = RunManifest(
        version=_pkg_version,
        mode=cfg.mode,
        n_steps=traj.n_steps,
        wall_time_s=wall_time_s if wall_time_s is not None else time.perf_counter() - t_start,
        config_toml=emit_config(cfg),
        files={name: _sha256(p) for name, p in sorted(written.items())},
        solver=_solver_summary(traj),
        energy=_energy_summary(traj.ledger),
        warnings=list(traj.warnings),
        environment={
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    )
    manifest.write(directory / "manifest.json")
    return manifest

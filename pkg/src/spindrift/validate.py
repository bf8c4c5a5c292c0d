"""Built-in invariant suite: fast self-checks on small grids.

Each check exercises one structural property the library is supposed to
guarantee (operator symmetry, coercivity, geometric invariants of the
integrator, dissipation bookkeeping, reproducibility of artifacts) on
grids small enough that the whole suite finishes in well under a minute.
`run_validation` prints one PASS/FAIL line per check and returns True iff
everything passed; the CLI maps that to its exit code.
"""

from __future__ import annotations

import hashlib
import tempfile
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import configs_equal, emit_config, parse_config_text
from .demag import apply_demag, build_kernel
from .drivers import SimulationConfig, run, trajectory_distance
from .grid import (
    Grid,
    _grad_sq_sum,
    constant_field,
    inner_l2,
    laplacian,
    norm_h1,
    norm_l2,
    vector_field,
)
from .llg import LlgParams, llg_rhs, step_llg
from .output import (
    read_final_state,
    read_vtk,
    write_energy_csv,
    write_final_state,
    write_outputs,
    write_vtk,
)
from .spin import (
    SpinParams,
    assemble_spin_system,
    solve_stationary_spin,
    step_spin_transient,
)

__all__ = ["run_validation", "CHECKS"]


def _random_unit_field(grid: Grid, rng) -> "vector_field":
    data = rng.standard_normal((*grid.shape, 3))
    data /= np.linalg.norm(data, axis=-1, keepdims=True)
    return vector_field(grid, data, unit=True)


def _random_field(grid: Grid, rng):
    return vector_field(grid, rng.standard_normal((*grid.shape, 3)))


def check_laplacian_symmetry() -> str:
    """Neumann Laplacian is self-adjoint and negative-semidefinite."""
    grid = Grid((5, 4, 3), 0.2)
    rng = np.random.default_rng(11)
    worst_sym, worst_sign = 0.0, 0.0
    for _ in range(10):
        u, v = _random_field(grid, rng), _random_field(grid, rng)
        lu, lv = laplacian(u), laplacian(v)
        a, b = inner_l2(lu, v), inner_l2(u, lv)
        scale = max(abs(a), abs(b), 1e-30)
        worst_sym = max(worst_sym, abs(a - b) / scale)
        worst_sign = max(worst_sign, inner_l2(lu, u) / max(norm_l2(u) ** 2, 1e-30))
    if worst_sym > 1e-12:
        raise AssertionError(f"asymmetry {worst_sym:.3e} > 1e-12")
    if worst_sign > 1e-12:
        raise AssertionError(f"<Lu,u> positive: {worst_sign:.3e}")
    return f"asymmetry {worst_sym:.1e}, max Rayleigh {worst_sign:.1e}"


def check_spin_dense_oracle() -> str:
    """Krylov stationary solve matches a dense direct solve on 4^3."""
    grid = Grid((4, 4, 4), 0.25)
    rng = np.random.default_rng(7)
    m = _random_unit_field(grid, rng)
    j_e = _random_field(grid, rng)
    p = SpinParams(j_e=j_e)
    s = solve_stationary_spin(m, p, tol=1e-12)
    system = assemble_spin_system(m, p)
    dense = system.to_dense()
    s_direct = np.linalg.solve(dense, system.b.data.reshape(-1)).reshape(*grid.shape, 3)
    err = np.linalg.norm(s.data - s_direct) / np.linalg.norm(s_direct)
    if err > 1e-8:
        raise AssertionError(f"relative error {err:.3e} > 1e-8")
    return f"relative error {err:.1e}"


def check_spin_coercivity() -> str:
    """<Ls,s> >= d_min(1-bb')|grad s|^2 + gamma1|s|^2 up to rounding."""
    grid = Grid((5, 5, 5), 0.2)
    rng = np.random.default_rng(23)
    p = SpinParams()
    worst = np.inf
    for _ in range(20):
        m = _random_unit_field(grid, rng)
        s = _random_field(grid, rng)
        system = assemble_spin_system(m, p)
        quad = inner_l2(vector_field(grid, system.apply(s)), s)
        lower = p.ellipticity_constant * _grad_sq_sum(s) + p.gamma1 * norm_l2(s) ** 2
        margin = (quad - lower) / max(norm_h1(s) ** 2, 1e-30)
        worst = min(worst, margin)
    if worst < -1e-12:
        raise AssertionError(f"margin {worst:.3e} < -1e-12")
    return f"worst margin {worst:+.1e}"


def check_spin_transient_limit() -> str:
    """Backward-Euler iterations with frozen m settle on the stationary solution."""
    grid = Grid((4, 4, 4), 0.25)
    rng = np.random.default_rng(3)
    m = _random_unit_field(grid, rng)
    j_e = constant_field(grid, (1.0, 0.0, 0.0))
    worst = 0.0
    for eps in (1e-1, 1e-3):
        p = SpinParams(epsilon=eps, j_e=j_e)
        s_star = solve_stationary_spin(m, replace(p, epsilon=0.0), tol=1e-12)
        s = constant_field(grid, (0.0, 0.0, 0.0))
        dt = 0.05
        for _ in range(400):
            s = step_spin_transient(s, m, p, dt, tol=1e-12)
            if norm_l2(s - s_star) <= 1e-9 * max(norm_l2(s_star), 1e-30):
                break
        rel = norm_l2(s - s_star) / max(norm_l2(s_star), 1e-30)
        worst = max(worst, rel)
    if worst > 1e-8:
        raise AssertionError(f"steady-state gap {worst:.3e} > 1e-8")
    return f"steady-state gap {worst:.1e}"


def check_demag() -> str:
    """Stray-field operator: symmetric, dissipative, exact on a single cube."""
    grid = Grid((4, 4, 4), 0.25)
    kernel = build_kernel(grid)
    rng = np.random.default_rng(5)
    worst_sym, worst_bound = 0.0, 0.0
    for _ in range(20):
        u, v = _random_field(grid, rng), _random_field(grid, rng)
        hu, hv = apply_demag(kernel, u), apply_demag(kernel, v)
        a, b = inner_l2(hu, v), inner_l2(u, hv)
        worst_sym = max(worst_sym, abs(a - b) / max(abs(a), abs(b), 1e-30))
        e = -inner_l2(hu, u)
        worst_bound = max(worst_bound, -e, e - norm_l2(u) ** 2)
    single = Grid((1, 1, 1), 1.0)
    m1 = constant_field(single, (0.3, -0.5, 0.8))
    h1 = apply_demag(build_kernel(single), m1)
    cube_err = float(np.max(np.abs(h1.data + m1.data / 3.0)))
    if worst_sym > 1e-11:
        raise AssertionError(f"asymmetry {worst_sym:.3e} > 1e-11")
    if worst_bound > 1e-8:
        raise AssertionError(f"energy bound violated by {worst_bound:.3e}")
    if cube_err > 1e-10:
        raise AssertionError(f"single-cube field off by {cube_err:.3e}")
    return f"asymmetry {worst_sym:.1e}, cube error {cube_err:.1e}"


def check_llg_geometry() -> str:
    """Unit length per step, torque orthogonality, second-order precession."""
    grid = Grid((3, 3, 3), 1.0 / 3.0)
    rng = np.random.default_rng(17)
    m = _random_unit_field(grid, rng)
    H = _random_field(grid, rng)
    v = llg_rhs(m, H, alpha=0.7)
    dot = float(np.max(np.abs(np.sum(v.data * m.data, axis=-1))))
    if dot > 1e-14:
        raise AssertionError(f"rhs not tangent: {dot:.3e}")

    provider = lambda mm: constant_field(grid, (0.0, 0.0, 1.0))
    errs = []
    for dt in (2e-3, 1e-3):
        mm = constant_field(grid, (1.0, 0.0, 0.0), unit=True)
        n = int(round(0.5 / dt))
        for _ in range(n):
            mm = step_llg(mm, provider, dt, alpha=0.0)
        unit_gap = float(np.max(np.abs(np.linalg.norm(mm.data, axis=-1) - 1.0)))
        if unit_gap > 1e-13:
            raise AssertionError(f"unit length drift {unit_gap:.3e}")
        t = n * dt
        exact = np.array([np.cos(t), np.sin(t), 0.0])
        errs.append(float(np.max(np.linalg.norm(mm.data - exact, axis=-1))))
    order = np.log2(errs[0] / errs[1])
    if order < 1.9:
        raise AssertionError(f"precession order {order:.3f} < 1.9")
    return f"tangency {dot:.1e}, precession order {order:.2f}"


def _tiny_config(mode: str = "sllg", **overrides) -> SimulationConfig:
    grid = Grid((4, 4, 4), 0.25)
    spin = SpinParams(
        epsilon=(1e-2 if mode == "sdllg" else 0.0),
        j_e=constant_field(grid, (1.0, 0.0, 0.0)),
    )
    llg = LlgParams(mu0=1.0)
    base = dict(
        grid=grid, spin=spin, llg=llg, mode=mode,
        dt=0.25 * grid.h**2, t_end=0.05, m_preset="smooth-twist",
        cadence=2, tol=1e-10,
    )
    base.update(overrides)
    return SimulationConfig(**base)


def check_energy_ledger() -> str:
    """Dissipation bookkeeping closes to within the time-stepping error."""
    cfg = _tiny_config("sllg")
    traj = run(cfg)
    slack = traj.ledger.worst_slack
    tol = 10.0 * cfg.dt
    if slack < -tol:
        raise AssertionError(f"worst slack {slack:.3e} < -{tol:.1e}")
    return f"worst slack {slack:+.1e} (tol {tol:.1e})"


def check_determinism() -> str:
    """Identical config and seed produce bit-identical artifacts."""
    cfg = _tiny_config("sdllg", s_init="random-unit", seed=42)
    digests = []
    with tempfile.TemporaryDirectory() as tmp:
        for name in ("a", "b"):
            out = Path(tmp) / name
            traj = run(cfg)
            write_outputs(traj, out)
            h = hashlib.sha256()
            for part in ("energy.csv", "final_state.bin"):
                h.update((out / part).read_bytes())
            digests.append(h.hexdigest())
    if digests[0] != digests[1]:
        raise AssertionError(f"artifact digests differ: {digests[0][:12]} vs {digests[1][:12]}")
    return f"digest {digests[0][:12]}"


def check_config_round_trip() -> str:
    """emit -> parse reproduces the configuration exactly."""
    cfg = _tiny_config("sdllg", seed=9, cadence=3)
    text = emit_config(cfg)
    again = parse_config_text(text, "<emitted>")
    if not configs_equal(cfg, again):
        raise AssertionError("parse(emit(config)) differs from config")
    if emit_config(again) != text:
        raise AssertionError("emit is not idempotent")
    return "exact"


def check_artifact_round_trip() -> str:
    """VTK and raw binary dumps reread to the bytes that were written."""
    grid = Grid((3, 4, 5), 0.2, origin=(0.5, -1.0, 0.0))
    rng = np.random.default_rng(31)
    m = _random_unit_field(grid, rng)
    s = _random_field(grid, rng)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        write_vtk(tmp / "snap.vtk", grid, {"m": m, "s": s})
        g2, fields = read_vtk(tmp / "snap.vtk")
        if g2 != grid:
            raise AssertionError("VTK grid round-trip mismatch")
        if not np.array_equal(fields["m"].data, m.data):
            raise AssertionError("VTK m round-trip not exact")
        if not np.array_equal(fields["s"].data, s.data):
            raise AssertionError("VTK s round-trip not exact")
        write_final_state(tmp, grid, 0.125, {"m": m, "s": s})
        g3, t3, fields3 = read_final_state(tmp)
        if g3 != grid or t3 != 0.125:
            raise AssertionError("binary sidecar round-trip mismatch")
        if not (
            np.array_equal(fields3["m"].data, m.data)
            and np.array_equal(fields3["s"].data, s.data)
        ):
            raise AssertionError("binary dump round-trip not bitwise")
    return "bitwise"


def check_model_reduction() -> str:
    """Small-epsilon transient trajectory shadows the reduced model."""
    cfg_red = _tiny_config("sllg", cadence=1)
    spin_eps = replace(cfg_red.spin, epsilon=1e-3)
    cfg_eps = replace(cfg_red, mode="sdllg", spin=spin_eps)
    d = trajectory_distance(run(cfg_red), run(cfg_eps), which="m")
    if d > 1e-3:
        raise AssertionError(f"trajectory gap {d:.3e} > 1e-3")
    return f"gap {d:.1e}"


CHECKS = [
    ("grid laplacian symmetry", check_laplacian_symmetry),
    ("spin dense oracle", check_spin_dense_oracle),
    ("spin coercivity", check_spin_coercivity),
    ("spin transient limit", check_spin_transient_limit),
    ("demag operator", check_demag),
    ("llg geometry", check_llg_geometry),
    ("energy ledger", check_energy_ledger),
    ("model reduction", check_model_reduction),
    ("config round-trip", check_config_round_trip),
    ("artifact round-trip", check_artifact_round_trip),
    ("determinism", check_determinism),
]


def run_validation(verbose_tracebacks: bool = False) -> bool:
    """Run every check, print one PASS/FAIL line each, return overall success."""
    all_ok = True
    width = max(len(name) for name, _ in CHECKS)
    for name, fn in CHECKS:
        try:
            detail = fn()
        except Exception as err:  # a failed invariant is a report, not a crash
            all_ok = False
            print(f"FAIL  {name:<{width}}  {err}")
            if verbose_tracebacks:
                traceback.print_exc()
        else:
            print(f"PASS  {name:<{width}}  {detail}")
    print("validation:", "all checks passed" if all_ok else "FAILURES detected")
    return all_ok

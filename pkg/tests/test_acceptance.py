"""End-to-end acceptance checks for the solver stack.

Ten independent checks, each printing exactly one verdict line of the form

    acceptance NN <title>: PASS (<measurements>)

and asserting the same condition, so the file doubles as a written
acceptance report. Run it alone to see the lines as they appear:

    python3 -m pytest tests/test_acceptance.py -s -q

The long members are the epsilon sweep (06, about a minute) and the
refinement funnel (07, a couple of minutes); everything else is seconds.
Each verdict line includes the wall time so the report documents the
runtime budget without making the suite hang on machine load.
"""

import dataclasses
import os
import subprocess
import sys
import time

import numpy as np

from spindrift import (
    Grid,
    LlgParams,
    SimulationConfig,
    SpinParams,
    apply_demag,
    build_kernel,
    build_rotated_perturbations,
    constant_field,
    effective_field,
    epsilon_sweep,
    initial_magnetization,
    inner_l2,
    lipschitz_probe,
    llg_rhs,
    norm_h1,
    norm_l2,
    run,
    solve_stationary_spin,
    step_llg,
    step_spin_transient,
    uniqueness_probe,
    vector_field,
    zero_field,
)
from spindrift.grid import _grad_sq_sum
from spindrift.spin import assemble_spin_system

H8 = 0.125
G8 = Grid((8, 8, 8), H8)
DT = 0.25 * H8 * H8  # explicit-step stability bound, c_ex = 1


def default_spin(grid, eps=0.0):
    return SpinParams(
        d0=1.0,
        beta=0.9,
        beta_prime=0.8,
        gamma1=1.0,
        gamma2=1.0,
        epsilon=eps,
        j_e=constant_field(grid, (1.0, 0.0, 0.0)),
    )


def default_config(mode="sllg", eps=0.0, mu0=1.0, grid=G8, t_end=0.5, **kw):
    lp = LlgParams(c_ex=1.0, alpha=1.0, j0=1.0, mu0=mu0, kappa=0.0)
    return SimulationConfig(
        grid=grid,
        spin=default_spin(grid, eps),
        llg=lp,
        mode=mode,
        dt=DT,
        t_end=t_end,
        m_preset="smooth-twist",
        **kw,
    )


def random_unit(grid, rng):
    raw = rng.standard_normal((*grid.shape, 3))
    return vector_field(grid, raw / np.linalg.norm(raw, axis=-1, keepdims=True))


def _verdict(num, title, ok, detail, t0):
    line = (
        f"acceptance {num:02d} {title}: "
        f"{'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - t0:.1f}s)"
    )
    print(line)
    assert ok, line


def test_01_stationary_matches_dense():
    """Krylov stationary solve against a dense LU factorization, 4^3 grid."""
    t0 = time.perf_counter()
    grid = Grid((4, 4, 4), 0.25)
    rng = np.random.default_rng(11)
    m = random_unit(grid, rng)
    p = dataclasses.replace(
        default_spin(grid), j_e=vector_field(grid, rng.standard_normal((*grid.shape, 3)))
    )
    system = assemble_spin_system(m, p)
    x_dense = np.linalg.solve(system.to_dense(), system.b.data.reshape(-1))
    x_iter = solve_stationary_spin(m, p, tol=1e-10).data.reshape(-1)
    rel = float(np.linalg.norm(x_iter - x_dense) / np.linalg.norm(x_dense))
    _verdict(1, "stationary solve matches dense reference", rel <= 1e-8,
             f"rel L2 err {rel:.2e} <= 1e-08", t0)


def test_02_quadratic_form_coercive():
    """<Ls,s> dominates the elliptic lower bound for 50 random (m, s) pairs."""
    t0 = time.perf_counter()
    grid = Grid((6, 6, 6), 1.0 / 6.0)
    p = default_spin(grid)
    rng = np.random.default_rng(12)
    worst = np.inf
    for _ in range(50):
        m = random_unit(grid, rng)
        s = vector_field(grid, rng.standard_normal((*grid.shape, 3)))
        system = assemble_spin_system(m, p)
        quad = inner_l2(vector_field(grid, system.apply(s)), s)
        bound = p.ellipticity_constant * _grad_sq_sum(s) + p.gamma1 * norm_l2(s) ** 2
        worst = min(worst, (quad - bound) / norm_h1(s) ** 2)
    _verdict(2, "quadratic form coercive on 50 random pairs", worst >= -1e-12,
             f"worst normalized margin {worst:.2e} >= -1e-12", t0)


def test_03_demag_self_adjoint_and_bounded():
    """Stray-field operator: symmetry, energy bounds, single-cube value."""
    t0 = time.perf_counter()
    kernel = build_kernel(G8)
    rng = np.random.default_rng(13)
    worst_sym = 0.0
    bounds_ok = True
    for _ in range(100):
        u = vector_field(G8, rng.standard_normal((*G8.shape, 3)))
        v = vector_field(G8, rng.standard_normal((*G8.shape, 3)))
        hd_u = apply_demag(kernel, u)
        hd_v = apply_demag(kernel, v)
        sym = abs(inner_l2(hd_u, v) - inner_l2(u, hd_v)) / (norm_l2(u) * norm_l2(v))
        worst_sym = max(worst_sym, sym)
        q = -inner_l2(hd_u, u)
        bounds_ok = bounds_ok and 0.0 <= q <= norm_l2(u) ** 2 + 1e-8
    cube = Grid((1, 1, 1), 1.0)
    m1 = constant_field(cube, np.array([0.3, -0.5, 0.8]) / np.linalg.norm([0.3, -0.5, 0.8]))
    cube_err = float(
        np.max(np.abs(apply_demag(build_kernel(cube), m1).data + m1.data / 3.0))
    )
    ok = worst_sym <= 1e-11 and bounds_ok and cube_err <= 1e-10
    _verdict(3, "demag self-adjoint, energy-bounded, cube field -m/3", ok,
             f"sym {worst_sym:.2e} <= 1e-11, 0 <= -<hd,u> <= |u|^2 on 100 fields, "
             f"cube err {cube_err:.2e} <= 1e-10", t0)


def test_04_llg_geometry_and_precession_order():
    """Unit length per step, rhs orthogonality, closed-form precession order."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(14)

    # 1e-15 unit preservation across 25 renormalized Heun steps
    lp = LlgParams(c_ex=1.0, alpha=1.0, j0=0.0, kappa=0.3)
    m = initial_magnetization("smooth-twist", G8, (0.0, 0.0, 1.0), 0.5, 0)
    provider = lambda mm: effective_field(mm, lp)
    worst_unit = 0.0
    for _ in range(25):
        m = step_llg(m, provider, DT, lp.alpha)
        worst_unit = max(
            worst_unit, float(np.abs(np.linalg.norm(m.data, axis=-1) - 1.0).max())
        )

    # pointwise orthogonality of the velocity
    mu = random_unit(G8, rng)
    H = vector_field(G8, rng.standard_normal((*G8.shape, 3)))
    v = llg_rhs(mu, H, 1.0)
    worst_dot = float(np.abs(np.sum(v.data * mu.data, axis=-1)).max())

    # undamped single spin about e3: uniform rotation at rate |h|
    cell = Grid((1, 1, 1), 1.0)
    h_mag, T = 1.0, 2.0
    m0 = np.array([np.sin(0.3), 0.0, np.cos(0.3)])
    hp = lambda mm: constant_field(cell, (0.0, 0.0, h_mag))

    def final_error(dt):
        mm = constant_field(cell, m0)
        for _ in range(int(round(T / dt))):
            mm = step_llg(mm, hp, dt, 0.0)
        c, s = np.cos(h_mag * T), np.sin(h_mag * T)
        exact = np.array([c * m0[0] - s * m0[1], s * m0[0] + c * m0[1], m0[2]])
        return float(np.linalg.norm(mm.data[0, 0, 0] - exact))

    e1, e2 = final_error(0.02), final_error(0.01)
    order = float(np.log2(e1 / e2))
    ok = worst_unit <= 1e-15 and worst_dot <= 1e-14 and order >= 1.9
    _verdict(4, "llg unit length, orthogonal rhs, precession order", ok,
             f"max||m|-1| {worst_unit:.1e} <= 1e-15, max|v.m| {worst_dot:.1e} <= 1e-14, "
             f"order {order:.2f} >= 1.9", t0)


def test_05_energy_inequality_slack():
    """Dissipation-ledger slack stays above -10*dt in both modes.

    If either run showed a negative excursion, the same runs at dt/2 must
    at least halve it; with no excursion that clause holds vacuously.
    """
    t0 = time.perf_counter()
    configs = {
        "transient": default_config(mode="sdllg", eps=1e-2),
        "reduced": default_config(mode="sllg"),
    }
    worst = {label: run(cfg).ledger.worst_slack for label, cfg in configs.items()}
    tol_energy = 10.0 * DT
    ok = all(w >= -tol_energy for w in worst.values())
    excursion = max(0.0, -min(worst.values()))
    note = "no negative excursion, dt-halving clause vacuous"
    if excursion > 0.0:
        halved = [
            run(dataclasses.replace(cfg, dt=cfg.dt / 2)).ledger.worst_slack
            for cfg in configs.values()
        ]
        excursion_half = max(0.0, -min(halved))
        ok = ok and excursion_half <= 0.5 * excursion + 1e-15
        note = f"excursion {excursion:.2e} -> {excursion_half:.2e} at dt/2"
    _verdict(5, "energy inequality slack in both modes", ok,
             f"worst slack transient {worst['transient']:.2e}, "
             f"reduced {worst['reduced']:.2e}, tol {tol_energy:.1e}; {note}", t0)


def test_06_epsilon_collapse_orders():
    """Transient model collapses onto the reduced one as epsilon -> 0."""
    t0 = time.perf_counter()
    eps_list = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
    report = epsilon_sweep(default_config(mode="sllg"), eps_list)
    monotone = all(
        b <= a * (1.0 + 1e-12) for a, b in zip(report.err_m, report.err_m[1:])
    )
    decreasing = all(b < a for a, b in zip(report.err_s, report.err_s[1:]))
    ok = monotone and decreasing and report.order_s >= 0.8
    _verdict(6, "epsilon sweep: m collapse monotone, s defect order", ok,
             f"err_m {report.err_m[0]:.2e}..{report.err_m[-1]:.2e} nonincreasing, "
             f"err_s order {report.order_s:.2f} >= 0.8", t0)


def test_07_refinement_funnel_contracts():
    """Successive trajectory distances shrink under refinement (3 levels)."""
    t0 = time.perf_counter()
    cfg = default_config(mode="sllg", mu0=0.0, t_end=0.25, precond="spectral")
    report = uniqueness_probe(cfg, levels=3)
    d = report.values
    ratio = d[-1] / d[0]
    ok = all(b < a for a, b in zip(d, d[1:])) and ratio <= 0.5
    _verdict(7, "refinement funnel distances contract", ok,
             f"d = {', '.join(f'{x:.4e}' for x in d)}, "
             f"d_last/d_first {ratio:.4f} <= 0.5", t0)


def test_08_lipschitz_ratios_bounded():
    """Difference quotients of the stationary map stay within a factor 3."""
    t0 = time.perf_counter()
    m1 = initial_magnetization("smooth-twist", G8, (0.0, 0.0, 1.0), 0.5, 0)
    perturbations = build_rotated_perturbations(m1, [1e-1, 1e-2, 1e-3])
    report = lipschitz_probe(m1, perturbations, default_spin(G8))
    ratios = report.values
    spread = max(ratios) / min(ratios)
    _verdict(8, "stationary-map difference quotients bounded", spread < 3.0,
             f"ratios {', '.join(f'{r:.4f}' for r in ratios)}, spread {spread:.3f} < 3", t0)


def test_09_transient_reaches_stationary():
    """Backward-Euler iteration with frozen m converges to the stationary solve."""
    t0 = time.perf_counter()
    grid = Grid((6, 6, 6), 1.0 / 6.0)
    rng = np.random.default_rng(19)
    m = random_unit(grid, rng)
    finals = {}
    for eps in (1e-1, 1e-3):
        p = default_spin(grid, eps=eps)
        s_star = solve_stationary_spin(m, p, tol=1e-12)
        ref = norm_l2(s_star)
        s = zero_field(grid)
        rel = np.inf
        for _ in range(80):
            s = step_spin_transient(s, m, p, dt=0.5, tol=1e-12)
            rel = norm_l2(vector_field(grid, s.data - s_star.data)) / ref
            if rel <= 1e-8:
                break
        finals[eps] = rel
    ok = all(r <= 1e-8 for r in finals.values())
    _verdict(9, "transient iteration reaches stationary solution", ok,
             f"rel err {finals[1e-1]:.1e} (eps 1e-1), {finals[1e-3]:.1e} (eps 1e-3), "
             "both <= 1e-8", t0)


def test_10_validate_and_bit_reproducibility(tmp_path):
    """The validate command exits 0; identical configs give identical bytes."""
    t0 = time.perf_counter()
    res = subprocess.run(
        [sys.executable, "-m", "spindrift.cli", "validate"],
        capture_output=True, text=True, cwd=tmp_path, env=os.environ.copy(),
    )
    cfg_path = tmp_path / "run.toml"
    cfg_path.write_text(
        "[grid]\nshape = [4, 4, 4]\nh = 0.25\n\n"
        "[spin]\nj_e = [1.0, 0.0, 0.0]\n\n"
        "[run]\nmode = \"sllg\"\ndt = 0.015625\nt_end = 0.0625\nseed = 3\n"
    )
    for out in ("a", "b"):
        r = subprocess.run(
            [sys.executable, "-m", "spindrift.cli", "run",
             "--config", str(cfg_path), "--out", str(tmp_path / out)],
            capture_output=True, text=True, env=os.environ.copy(),
        )
        assert r.returncode == 0, r.stderr
    same_csv = (tmp_path / "a" / "energy.csv").read_bytes() == (
        tmp_path / "b" / "energy.csv"
    ).read_bytes()
    same_bin = (tmp_path / "a" / "final_state.bin").read_bytes() == (
        tmp_path / "b" / "final_state.bin"
    ).read_bytes()
    ok = res.returncode == 0 and same_csv and same_bin
    _verdict(10, "validate exits 0, reruns bit-identical", ok,
             f"validate rc {res.returncode}, energy.csv identical {same_csv}, "
             f"final_state.bin identical {same_bin}", t0)

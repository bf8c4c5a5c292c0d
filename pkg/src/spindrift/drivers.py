"""Coupled time loops and the three measurement harnesses.

Two couplings of the spin and magnetization equations are provided. The
transient mode steps the relaxation-time spin equation (backward Euler)
and then the magnetization (Heun), using the fresh accumulation in the
torque; the reduced mode replaces the spin step with the stationary solve
s = H_s[m], slaving s to the instantaneous magnetization. Both are
first-order operator splittings: within one magnetization step s is held
frozen, and the torque field is reassembled at the Heun predictor.

The nonlocal, nondissipative part of the torque is assembled through one
small function, ``pi_field`` (demag plus spin torque), so that the
composition pi[m] = mu0 h_d[m] + j0 H_s[m] exists as an actual code path
rather than being smeared across the loop.

Harnesses:

* ``epsilon_sweep`` quantifies the collapse of the transient model onto
  the reduced one as the relaxation time vanishes: it measures the
  space-time L2 distances ||m_eps - m_0|| and ||s_eps - H_s[m_eps]||
  against a shared reduced-mode baseline, on identical grids and steps.
* ``lipschitz_probe`` measures the H1->H1 difference quotient of the
  stationary solution map at shrinking perturbation distances; the map is
  Lipschitz on smooth data, so the quotients must stay bounded as the
  perturbation vanishes.
* ``uniqueness_probe`` runs one configuration through successive grid
  refinements at fixed dt/h^2 and measures successive trajectory
  distances; their decrease is the observable footprint of all discrete
  paths funneling into a single strong solution.

Initial spin data defaults to the "stationary" choice s* = H_s[m*], which
removes the O(1) initial layer of the transient equation; with s* = 0 the
layer contributes O(sqrt(eps)) to space-time errors and would mask the
O(eps) interior convergence the sweep is after.

Determinism: runs are sequential and all randomness flows through the
config seed, so identical configs produce bit-identical trajectories.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.typing import NDArray

from .demag import apply_demag, build_kernel
from .grid import (
    Grid,
    VectorField,
    constant_field,
    norm_h1,
    vector_field,
    zero_field,
)
from .llg import (
    EnergyLedger,
    LlgParams,
    effective_field,
    energy,
    stability_max_dt,
    step_llg,
)
from .spin import (
    SolverConvergenceError,
    SpinParams,
    solve_stationary_spin,
    step_spin_transient,
)

__all__ = [
    "SimulationConfig",
    "Trajectory",
    "SweepReport",
    "ProbeReport",
    "SweepError",
    "initial_magnetization",
    "initial_spin",
    "pi_field",
    "run",
    "run_sdllg",
    "run_sllg",
    "epsilon_sweep",
    "lipschitz_probe",
    "build_rotated_perturbations",
    "uniqueness_probe",
    "prolong_nearest",
    "trajectory_distance",
]

PRESETS = ("uniform", "smooth-twist", "random-unit")
S_INIT_CHOICES = ("zero", "stationary", "random-unit")


def initial_magnetization(
    preset: str,
    grid: Grid,
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0),
    turns: float = 0.5,
    seed: int = 0,
) -> VectorField:
    """Built-in unit-length initial states.

    ``uniform``: the given direction everywhere. ``smooth-twist``: an
    in-plane helix m = (cos th, sin th, 0), th = 2 pi turns (x-x0)/Lx,
    smooth and nonconstant along x. ``random-unit``: iid normals
    normalized per cell, seeded.
    """
    if preset == "uniform":
        d = np.asarray(direction, dtype=np.float64)
        n = float(np.linalg.norm(d))
        if n == 0.0:
            raise ValueError("uniform preset needs a nonzero direction")
        return constant_field(grid, tuple(d / n))
    if preset == "smooth-twist":
        x = grid.cell_centers()[..., 0]
        theta = 2.0 * np.pi * turns * (x - grid.origin[0]) / grid.extent[0]
        return vector_field(
            grid, np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=-1)
        )
    if preset == "random-unit":
        rng = np.random.default_rng(seed)
        raw = rng.normal(size=(*grid.shape, 3))
        return VectorField(grid, raw / np.linalg.norm(raw, axis=-1, keepdims=True))
    raise ValueError(f"unknown magnetization preset {preset!r}; choose from {PRESETS}")


def initial_spin(
    kind: str,
    grid: Grid,
    m0: VectorField,
    sp: SpinParams,
    seed: int = 0,
    tol: float = 1e-10,
) -> VectorField:
    """Initial spin accumulation: zero, seeded unit noise, or slaved.

    ``stationary`` returns H_s[m*], the well-prepared state without an
    initial relaxation layer.
    """
    if kind == "zero":
        return zero_field(grid)
    if kind == "random-unit":
        rng = np.random.default_rng(seed + 1)
        raw = rng.normal(size=(*grid.shape, 3))
        return VectorField(grid, raw / np.linalg.norm(raw, axis=-1, keepdims=True))
    if kind == "stationary":
        return solve_stationary_spin(m0, sp, tol=tol)
    raise ValueError(f"unknown spin preset {kind!r}; choose from {S_INIT_CHOICES}")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything one run needs, declaratively.

    ``mode`` selects the transient ("sdllg") or reduced ("sllg") coupling;
    the transient mode requires epsilon > 0. ``cadence`` records every
    k-th step (the initial and final states are always recorded).
    ``c_stab`` scales the explicit-step stability bound dt <= c_stab
    h^2/c_ex; exceeding it is recorded as a warning, not an error.
    """

    grid: Grid
    spin: SpinParams
    llg: LlgParams
    mode: str = "sllg"
    dt: float = 1e-3
    t_end: float = 0.5
    m_preset: str = "smooth-twist"
    m_direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    m_turns: float = 0.5
    s_init: str = "stationary"
    seed: int = 0
    cadence: int = 1
    tol: float = 1e-10
    method: str = "gmres"
    precond: str = "block"
    c_stab: float = 0.25

    def __post_init__(self) -> None:
        if self.mode not in ("sdllg", "sllg"):
            raise ValueError(f"mode must be 'sdllg' or 'sllg', got {self.mode!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.mode == "sdllg" and not self.spin.epsilon > 0:
            raise ValueError("mode 'sdllg' requires epsilon > 0 (epsilon = 0 is the reduced model)")
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")
        if self.m_preset not in PRESETS:
            raise ValueError(f"unknown m_preset {self.m_preset!r}; choose from {PRESETS}")
        if self.s_init not in S_INIT_CHOICES:
            raise ValueError(f"unknown s_init {self.s_init!r}; choose from {S_INIT_CHOICES}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")

    @property
    def n_steps(self) -> int:
        n = int(round(self.t_end / self.dt))
        return max(n, 1)

    def build_m0(self) -> VectorField:
        return initial_magnetization(
            self.m_preset, self.grid, self.m_direction, self.m_turns, self.seed
        )

    def build_s0(self, m0: VectorField) -> VectorField:
        return initial_spin(self.s_init, self.grid, m0, self.spin, self.seed, self.tol)


@dataclass
class Trajectory:
    """Snapshots, energy ledger, and solver statistics of one run."""

    config: SimulationConfig
    times: list[float] = dc_field(default_factory=list)
    m: list[VectorField] = dc_field(default_factory=list)
    s: list[VectorField] = dc_field(default_factory=list)
    ledger: EnergyLedger | None = None
    solver_iterations: list[int] = dc_field(default_factory=list)
    solver_residuals: list[float] = dc_field(default_factory=list)
    n_steps: int = 0

    def record(self, t: float, m: VectorField, s: VectorField) -> None:
        if not np.all(np.isfinite(s.data)):
            raise RuntimeError(f"non-finite spin accumulation recorded at t = {t}")
        self.times.append(float(t))
        self.m.append(m)
        self.s.append(s)

    @property
    def warnings(self) -> list[str]:
        return list(self.ledger.warnings) if self.ledger is not None else []

    @property
    def final_m(self) -> VectorField:
        return self.m[-1]

    @property
    def final_s(self) -> VectorField:
        return self.s[-1]


def pi_field(
    lp: LlgParams,
    hd: VectorField | None,
    s: VectorField | None,
    out: NDArray[np.float64],
) -> None:
    """Accumulate the nonlocal torque composition mu0 h_d + j0 s into out.

    This is the single code path through which both nonlocal operators
    enter the dynamics; swapping the composition means swapping this
    function.
    """
    if lp.mu0 != 0.0 and hd is not None:
        out += lp.mu0 * hd.data
    if lp.j0 != 0.0 and s is not None:
        out += lp.j0 * s.data


def _wrap_solver_error(err: SolverConvergenceError, step: int, t: float) -> RuntimeError:
    return RuntimeError(f"spin solve failed at step {step} (t = {t:.6g}): {err}")


def _run_loop(config: SimulationConfig) -> Trajectory:
    g = config.grid
    sp = config.spin
    lp = config.llg
    dt = config.dt
    n_steps = config.n_steps
    transient = config.mode == "sdllg"

    kernel = build_kernel(g) if lp.mu0 > 0.0 else None
    lp_local = dataclasses.replace(lp, mu0=0.0, f=None)  # short-range part of h_eff

    m = config.build_m0()
    # s* is transient-only data; the reduced mode slaves s to m throughout,
    # starting with the solve inside the first loop iteration
    s = config.build_s0(m) if transient else None

    ledger = EnergyLedger(g, alpha=lp.alpha, j0=lp.j0)
    bound = stability_max_dt(g, lp.c_ex, config.c_stab)
    if dt > bound * (1.0 + 1e-12):
        ledger.warn(
            f"dt = {dt:.6g} exceeds the explicit stability bound "
            f"{bound:.6g} = c_stab*h^2/c_ex; expect unreliable dynamics"
        )

    traj = Trajectory(config=config, ledger=ledger, n_steps=n_steps)

    hd_m = apply_demag(kernel, m) if kernel is not None else None
    ledger.start(0.0, energy(m, lp, hd=hd_m))
    if transient:
        traj.record(0.0, m, s)

    e_axis = lp.axis
    for n in range(n_steps):
        t_old = n * dt
        t_new = (n + 1) * dt
        stats: dict = {}
        try:
            if transient:
                s_used = step_spin_transient(
                    s, m, sp, dt,
                    tol=config.tol, method=config.method,
                    precond=config.precond, stats=stats,
                )
            else:
                s_used = solve_stationary_spin(
                    m, sp,
                    tol=config.tol, warm_start=s, method=config.method,
                    precond=config.precond, stats=stats,
                )
        except SolverConvergenceError as err:
            raise _wrap_solver_error(err, n, t_old) from err
        traj.solver_iterations.append(stats.get("iterations", 0))
        traj.solver_residuals.append(stats.get("residual", 0.0))
        if not transient and n % config.cadence == 0:
            # the recorded s is the stationary solve at the recorded m
            traj.record(t_old, m, s_used)

        m_frozen = m
        hd_frozen = hd_m

        def torque(mm: VectorField) -> VectorField:
            if kernel is None:
                hd_mm = None
            elif mm is m_frozen:
                hd_mm = hd_frozen
            else:
                hd_mm = apply_demag(kernel, mm)
            data = effective_field(mm, lp_local).data
            pi_field(lp, hd_mm, s_used, data)
            if lp.f is not None:
                data += lp.f.data
            return VectorField(mm.grid, data)

        m_new = step_llg(m, torque, dt, lp.alpha)

        # ledger bookkeeping: pi work uses the pre-step nondissipative field
        pi_old = np.zeros((*g.shape, 3))
        pi_field(lp, hd_m, s_used, pi_old)
        if lp.kappa > 0.0:
            proj = m.data @ e_axis
            pi_old += (2.0 * lp.kappa) * proj[..., None] * e_axis
        if lp.f is not None:
            pi_old += lp.f.data
        hd_new = apply_demag(kernel, m_new) if kernel is not None else None
        ledger.advance(
            t_new,
            m,
            m_new,
            dt,
            energy(m_new, lp, hd=hd_new),
            s_used=s_used,
            pi_old=VectorField(g, pi_old),
            f=lp.f,
        )

        m = m_new
        hd_m = hd_new
        s = s_used
        if transient and ((n + 1) % config.cadence == 0 or n + 1 == n_steps):
            traj.record(t_new, m, s)
    if not transient:
        try:
            s_final = solve_stationary_spin(
                m, sp, tol=config.tol, warm_start=s,
                method=config.method, precond=config.precond,
            )
        except SolverConvergenceError as err:
            raise _wrap_solver_error(err, n_steps, n_steps * dt) from err
        traj.record(n_steps * dt, m, s_final)
    return traj


def run_sdllg(config: SimulationConfig) -> Trajectory:
    """Transient coupling: backward-Euler spin step, then Heun torque step."""
    if config.mode != "sdllg":
        raise ValueError(f"run_sdllg needs mode 'sdllg', got {config.mode!r}")
    return _run_loop(config)


def run_sllg(config: SimulationConfig) -> Trajectory:
    """Reduced coupling: s slaved to m through the stationary solve."""
    if config.mode != "sllg":
        raise ValueError(f"run_sllg needs mode 'sllg', got {config.mode!r}")
    return _run_loop(config)


def run(config: SimulationConfig) -> Trajectory:
    """Dispatch on config.mode."""
    return run_sdllg(config) if config.mode == "sdllg" else run_sllg(config)


def trajectory_distance(a: Trajectory, b: Trajectory, which: str = "m") -> float:
    """Space-time L2 distance over matching snapshot times.

    Right-endpoint rectangle rule: the t = 0 snapshots (identical initial
    data by construction) carry no weight.
    """
    if len(a.times) != len(b.times) or any(
        abs(ta - tb) > 1e-9 for ta, tb in zip(a.times, b.times)
    ):
        raise ValueError("trajectories were recorded at different times")
    fields_a = a.m if which == "m" else a.s
    fields_b = b.m if which == "m" else b.s
    total = 0.0
    for k in range(1, len(a.times)):
        dt_k = a.times[k] - a.times[k - 1]
        diff = fields_a[k].data - fields_b[k].data
        total += dt_k * float(np.sum(diff * diff)) * a.m[k].grid.cell_volume
    return float(np.sqrt(total))


@dataclass
class SweepReport:
    """epsilon against the two space-time errors, with fitted orders."""

    eps: list[float]
    err_m: list[float]
    err_s: list[float]

    @staticmethod
    def _fit_order(eps: list[float], err: list[float]) -> float:
        pairs = [(e, r) for e, r in zip(eps, err) if r > 0]
        if len(pairs) < 2:
            return float("nan")
        x = np.log([p[0] for p in pairs])
        y = np.log([p[1] for p in pairs])
        return float(np.polyfit(x, y, 1)[0])

    @property
    def order_m(self) -> float:
        return self._fit_order(self.eps, self.err_m)

    @property
    def order_s(self) -> float:
        return self._fit_order(self.eps, self.err_s)

    def rows(self) -> list[dict]:
        return [
            {"eps": e, "err_m": em, "err_s": es}
            for e, em, es in zip(self.eps, self.err_m, self.err_s)
        ]


class SweepError(RuntimeError):
    """A sweep member run failed; carries the partial report."""

    def __init__(self, message: str, partial: SweepReport):
        super().__init__(message)
        self.partial = partial


def epsilon_sweep(base_config: SimulationConfig, eps_list: list[float]) -> SweepReport:
    """Collapse measurement of the transient model onto the reduced one.

    For each epsilon the transient run is compared against one shared
    reduced-mode baseline on the same grid and steps: err_m is the
    space-time L2 distance of the magnetizations, err_s the space-time L2
    defect ||s_eps - H_s[m_eps]|| of the transient accumulation against
    the stationary map along the run's own trajectory.

    The defect pairs each interval's fields the way the splitting defines
    them: on (t_n, t_{n+1}] the discrete s is the backward-Euler value
    s^{n+1} and the magnetization the spin equation saw is the frozen
    m^n, so the defect integrand on that interval is
    ||s^{n+1} - H_s[m^n]||^2. Pairing both at t_{n+1} instead would add a
    splitting artifact of size O(dt), independent of epsilon, flooring the
    measurement. The sweep therefore records every step (cadence 1)
    regardless of the base config's cadence.
    """
    if len(eps_list) < 2:
        raise ValueError("eps_list needs at least two values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError(f"eps_list must be strictly decreasing, got {eps_list}")
    if any(e <= 0 for e in eps_list):
        raise ValueError("all epsilon values must be positive")

    baseline_cfg = dataclasses.replace(
        base_config,
        mode="sllg",
        cadence=1,
        spin=dataclasses.replace(base_config.spin, epsilon=0.0),
    )
    baseline = run_sllg(baseline_cfg)

    report = SweepReport(eps=[], err_m=[], err_s=[])
    for eps in eps_list:
        cfg = dataclasses.replace(
            base_config,
            mode="sdllg",
            cadence=1,
            spin=dataclasses.replace(base_config.spin, epsilon=eps),
        )
        try:
            traj = run_sdllg(cfg)
            err_m = trajectory_distance(traj, baseline, which="m")
            defect_sq = 0.0
            s_ref: VectorField | None = None
            for k in range(1, len(traj.times)):
                dt_k = traj.times[k] - traj.times[k - 1]
                s_ref = solve_stationary_spin(
                    traj.m[k - 1],
                    cfg.spin,
                    tol=cfg.tol,
                    warm_start=traj.s[k] if s_ref is None else s_ref,
                    method=cfg.method,
                    precond=cfg.precond,
                )
                diff = traj.s[k].data - s_ref.data
                defect_sq += dt_k * float(np.sum(diff * diff)) * cfg.grid.cell_volume
            err_s = float(np.sqrt(defect_sq))
        except (RuntimeError, ValueError) as err:
            raise SweepError(
                f"sweep aborted at epsilon = {eps}: {err}", partial=report
            ) from err
        report.eps.append(eps)
        report.err_m.append(err_m)
        report.err_s.append(err_s)
    return report


@dataclass
class ProbeReport:
    """Generic measurement table for the probe harnesses.

    ``kind`` is "lipschitz" or "uniqueness"; ``distances`` and ``values``
    are the per-row measurement pairs (perturbation distance vs difference
    quotient, or refinement level vs successive trajectory distance), and
    ``details`` carries derived summaries.
    """

    kind: str
    distances: list[float]
    values: list[float]
    details: dict = dc_field(default_factory=dict)


def build_rotated_perturbations(
    m1: VectorField, distances: list[float]
) -> list[VectorField]:
    """Unit perturbations of m1 at prescribed H1 distances.

    Each perturbation rotates m1 about e3 by the spatially smooth angle
    a(x) = delta cos(pi (x - x0)/Lx); rotation preserves unit length
    exactly and the H1 distance is linear in delta to leading order, so a
    two-pass secant calibration pins each requested distance to well under
    a percent.
    """
    g = m1.grid
    x = g.cell_centers()[..., 0]
    profile = np.cos(np.pi * (x - g.origin[0]) / g.extent[0])

    def rotated(delta: float) -> VectorField:
        a = delta * profile
        ca, sa = np.cos(a), np.sin(a)
        mx, my, mz = (m1.data[..., i] for i in range(3))
        return VectorField(
            g, np.stack([ca * mx - sa * my, sa * mx + ca * my, mz], axis=-1)
        )

    def distance(delta: float) -> float:
        return norm_h1(VectorField(g, rotated(delta).data - m1.data))

    probe = distance(1e-6)
    if probe == 0.0:
        raise ValueError(
            "m1 is invariant under rotation about e3; this perturbation family "
            "cannot reach the requested distances"
        )
    out = []
    for target in distances:
        if target <= 0:
            raise ValueError(f"perturbation distances must be positive, got {target}")
        delta = target / probe * 1e-6
        for _ in range(2):
            d = distance(delta)
            delta *= target / d
        out.append(rotated(delta))
    return out


def lipschitz_probe(
    m1: VectorField, perturbations: list[VectorField], p: SpinParams, tol: float = 1e-10
) -> ProbeReport:
    """H1 difference quotients of the stationary map at given perturbations.

    ratio = ||H_s[m1] - H_s[m2]||_H1 / ||m1 - m2||_H1 per perturbation;
    bounded ratios as the distance shrinks are the Lipschitz signature.
    """
    s1 = solve_stationary_spin(m1, p, tol=tol)
    distances: list[float] = []
    ratios: list[float] = []
    for m2 in perturbations:
        den = norm_h1(VectorField(m1.grid, m2.data - m1.data))
        if den == 0.0:
            distances.append(0.0)
            ratios.append(0.0)
            continue
        s2 = solve_stationary_spin(m2, p, tol=tol, warm_start=s1)
        num = norm_h1(VectorField(m1.grid, s2.data - s1.data))
        distances.append(den)
        ratios.append(num / den)
    details = {
        "max_ratio": max(ratios) if ratios else 0.0,
        "min_ratio": min((r for r in ratios if r > 0), default=0.0),
        "h1_norm_s1": norm_h1(s1),
    }
    return ProbeReport("lipschitz", distances, ratios, details)


def prolong_nearest(coarse: VectorField, fine: Grid) -> VectorField:
    """Inject a coarse field onto a finer grid by nearest-cell lookup.

    Fine cell centers are mapped to the coarse cell containing them; no
    interpolation, so the operator introduces no convergence order of its
    own into cross-grid comparisons.
    """
    cg = coarse.grid
    idx = []
    for a in range(3):
        centers = (np.arange(fine.shape[a]) + 0.5) * fine.h + fine.origin[a]
        j = np.floor((centers - cg.origin[a]) / cg.h).astype(np.intp)
        idx.append(np.clip(j, 0, cg.shape[a] - 1))
    ix, iy, iz = np.meshgrid(*idx, indexing="ij")
    return VectorField(fine, coarse.data[ix, iy, iz], unit=coarse.unit)


def uniqueness_probe(config: SimulationConfig, levels: int) -> ProbeReport:
    """Refinement funnel: successive trajectory distances across levels.

    Level k doubles the resolution of level k-1 and quarters dt (fixed
    dt/h^2); all runs are compared at the coarsest run's snapshot times,
    the coarse field prolonged to the finer grid by nearest cell. The
    distances d_k = ||m^(k) - m^(k+1)||_{L2 in space-time} decrease when
    every discrete path converges to one strong solution.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2 to measure a distance, got {levels}")
    base_steps = config.n_steps
    # Snap the horizon to a whole number of coarse steps so every level's
    # step count is exactly base_steps * 4^k and snapshots align even when
    # the requested t_end is not a multiple of dt.
    t_end = base_steps * config.dt
    trajectories: list[Trajectory] = []
    grids: list[Grid] = []
    for k in range(levels):
        factor = 2**k
        g_k = Grid(
            tuple(n * factor for n in config.grid.shape),
            config.grid.h / factor,
            config.grid.origin,
        )
        # grid-bound data (j_e, applied field) must live on the level grid
        spin_k = config.spin
        if spin_k.j_e is not None:
            spin_k = dataclasses.replace(spin_k, j_e=prolong_nearest(spin_k.j_e, g_k))
        llg_k = config.llg
        if llg_k.f is not None:
            llg_k = dataclasses.replace(llg_k, f=prolong_nearest(llg_k.f, g_k))
        cfg_k = dataclasses.replace(
            config,
            grid=g_k,
            spin=spin_k,
            llg=llg_k,
            dt=config.dt / factor**2,
            t_end=t_end,
            cadence=config.cadence * factor**2,
        )
        trajectories.append(run(cfg_k))
        grids.append(g_k)
        if len(trajectories[-1].times) != len(trajectories[0].times):
            raise RuntimeError(
                f"level {k} recorded {len(trajectories[-1].times)} snapshots, "
                f"expected {len(trajectories[0].times)}"
            )
    distances: list[float] = []
    for k in range(levels - 1):
        coarse, fine = trajectories[k], trajectories[k + 1]
        total = 0.0
        for j in range(1, len(coarse.times)):
            dt_j = coarse.times[j] - coarse.times[j - 1]
            lifted = prolong_nearest(coarse.m[j], grids[k + 1])
            diff = lifted.data - fine.m[j].data
            total += dt_j * float(np.sum(diff * diff)) * grids[k + 1].cell_volume
        distances.append(float(np.sqrt(total)))
    details: dict = {
        "shapes": [g.shape for g in grids],
        "dts": [config.dt / 4**k for k in range(levels)],
        "n_snapshots": len(trajectories[0].times),
        "base_steps": base_steps,
    }
    if len(distances) >= 2:
        details["ratios"] = [
            distances[i + 1] / distances[i] for i in range(len(distances) - 1)
        ]
        details["orders"] = [
            float(np.log2(distances[i] / distances[i + 1]))
            for i in range(len(distances) - 1)
        ]
    return ProbeReport("uniqueness", list(range(levels - 1)), distances, details)

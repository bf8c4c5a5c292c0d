"""Magnetization dynamics: effective field, sphere-constrained step, energy.

The magnetization is a unit-length field evolving under torque from the
effective field plus the spin-transfer term j0*s,

    dm/dt = -m x (h_eff + j0 s + f) + alpha m x dm/dt,

which rearranges to the explicit Landau-Lifshitz form used here,

    dm/dt = -[ m x H + alpha m x (m x H) ] / (1 + alpha^2),   H = h_eff + j0 s + f.

Both forms are algebraically identical for |m| = 1; the right-hand side is
pointwise orthogonal to m, so the exact flow stays on the sphere and the
time stepper only has to repair the O(dt^2) drift of its truncation error.
The integrator is a Heun (explicit trapezoidal) step with the predictor
and the final state both projected back to unit length.

The effective field collects exchange, uniaxial anisotropy, and the
demagnetizing field:

    h_eff = c_ex Lap m + 2 kappa (m . e_an) e_an + mu0 h_d[m],

with homogeneous Neumann walls for the exchange term (zero difference
across boundary faces). The anisotropy density is phi(m) = 1 - (m . e_an)^2
and its negative gradient is the 2 kappa (m . e_an) e_an term.

Energy bookkeeping follows two conventions, recorded side by side:
``slack`` tests the dissipation inequality of the full micromagnetic
energy (exchange + anisotropy + magnetostatic) against the cumulative
damping dissipation and the work done by the spin torque and applied
field; ``slack_alt`` books only the exchange energy and moves the demag
and anisotropy contributions into the work integral (the "pi field"
pi[m] = mu0 h_d[m] + j0 s + 2 kappa (m . e_an) e_an + f). Time integrals
use the left-endpoint rectangle rule with the backward difference
dm/dt ~ (m^{n+1} - m^n)/dt, so both slacks carry an O(dt) quadrature
error; the monitored inequality is slack >= -C*dt.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .grid import (
    Grid,
    UNIT_TOL,
    VectorField,
    _check_same_grid,
    _grad_sq_sum,
    inner_l2,
    laplacian,
)

__all__ = [
    "LlgParams",
    "EnergyBreakdown",
    "EnergyLedger",
    "effective_field",
    "llg_rhs",
    "step_llg",
    "energy",
    "energy_inequality_slack",
    "stability_max_dt",
]


@dataclass(frozen=True)
class LlgParams:
    """Magnetization-side material constants.

    ``j0`` couples the spin accumulation into the torque (0 decouples the
    two equations). ``mu0`` weights the demagnetizing field and ``kappa``
    the uniaxial anisotropy along the unit axis ``e_an``. ``f`` is an
    optional applied field, held fixed in time.
    """

    c_ex: float = 1.0
    alpha: float = 1.0
    j0: float = 1.0
    mu0: float = 0.0
    kappa: float = 0.0
    e_an: tuple[float, float, float] = (0.0, 0.0, 1.0)
    f: VectorField | None = None

    def __post_init__(self) -> None:
        if not self.c_ex > 0:
            raise ValueError(f"c_ex must be positive, got {self.c_ex}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.mu0 < 0:
            raise ValueError(f"mu0 must be nonnegative, got {self.mu0}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        axis = np.asarray(self.e_an, dtype=np.float64)
        if axis.shape != (3,):
            raise ValueError("e_an must be a 3-vector")
        if abs(float(np.linalg.norm(axis)) - 1.0) > UNIT_TOL:
            raise ValueError(f"e_an must be unit length, |e_an| = {np.linalg.norm(axis)}")

    @property
    def axis(self) -> NDArray[np.float64]:
        return np.asarray(self.e_an, dtype=np.float64)


def _require_unit(m: VectorField, who: str) -> None:
    err = float(np.max(np.abs(np.linalg.norm(m.data, axis=-1) - 1.0)))
    if err > UNIT_TOL:
        raise ValueError(f"{who} requires unit-length m; max | |m|-1 | = {err:.3e}")


def effective_field(
    m: VectorField,
    lp: LlgParams,
    kernel=None,
    hd: VectorField | None = None,
) -> VectorField:
    """h_eff = c_ex Lap_h m + 2 kappa (m.e_an) e_an + mu0 h_d[m].

    The exchange Laplacian uses the 7-point Neumann stencil (boundary-face
    differences zero). When mu0 > 0 the demagnetizing field is taken from
    ``hd`` if supplied (callers often have it precomputed) and otherwise
    computed through ``kernel``; omitting both is an error.
    """
    _require_unit(m, "effective_field")
    out = lp.c_ex * laplacian(m).data
    if lp.kappa > 0.0:
        e = lp.axis
        proj = m.data @ e
        out += (2.0 * lp.kappa) * proj[..., None] * e
    if lp.mu0 > 0.0:
        if hd is None:
            if kernel is None:
                raise ValueError("mu0 > 0 requires a demag kernel (or a precomputed hd)")
            from .demag import apply_demag

            hd = apply_demag(kernel, m)
        _check_same_grid(hd.grid, m.grid, "effective_field (hd)")
        out += lp.mu0 * hd.data
    return VectorField(m.grid, out)


def llg_rhs(m: VectorField, H: VectorField, alpha: float) -> VectorField:
    """Landau-Lifshitz velocity -[m x H + alpha m x (m x H)]/(1+alpha^2).

    Pointwise orthogonal to m, and satisfies the damped-torque identity
    v = -m x H + alpha m x v exactly in exact arithmetic.
    """
    _check_same_grid(m.grid, H.grid, "llg_rhs")
    mxH = np.cross(m.data, H.data)
    mxmxH = np.cross(m.data, mxH)
    return VectorField(m.grid, -(mxH + alpha * mxmxH) / (1.0 + alpha * alpha))


def _renormalize(raw: NDArray[np.float64], grid: Grid, stage: str) -> VectorField:
    norms = np.linalg.norm(raw, axis=-1, keepdims=True)
    nmin = float(norms.min())
    if nmin < 1e-14:
        bad = int(np.argmin(norms))
        raise ValueError(
            f"magnetization vanished at cell {np.unravel_index(bad, grid.shape)} "
            f"during the {stage} (|m| = {nmin:.3e}); reduce dt"
        )
    return VectorField(grid, raw / norms)


def step_llg(
    m: VectorField,
    h_provider: Callable[[VectorField], VectorField],
    dt: float,
    alpha: float,
) -> VectorField:
    """One Heun step with renormalized predictor and projected result.

    ``h_provider`` maps a candidate magnetization to the full torque field
    H = h_eff + j0 s + f; it is evaluated twice (at m and at the
    predictor), with any slaved quantities such as s held frozen by the
    caller for the duration of the step. The result is unit to 1e-15.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = llg_rhs(m, h_provider(m), alpha)
    pred = _renormalize(m.data + dt * k1.data, m.grid, "predictor")
    k2 = llg_rhs(pred, h_provider(pred), alpha)
    return _renormalize(m.data + 0.5 * dt * (k1.data + k2.data), m.grid, "corrector")


def stability_max_dt(grid: Grid, c_ex: float, c_stab: float = 0.25) -> float:
    """Largest dt the explicit exchange update tolerates, c_stab*h^2/c_ex."""
    if c_ex <= 0:
        raise ValueError(f"c_ex must be positive, got {c_ex}")
    return c_stab * grid.h * grid.h / c_ex


@dataclass(frozen=True)
class EnergyBreakdown:
    """One evaluation of the micromagnetic energy, term by term."""

    exchange: float
    anisotropy: float
    magnetostatic: float

    @property
    def total(self) -> float:
        return self.exchange + self.anisotropy + self.magnetostatic


def energy(
    m: VectorField,
    lp: LlgParams,
    kernel=None,
    hd: VectorField | None = None,
) -> EnergyBreakdown:
    """Exchange, anisotropy and magnetostatic energies of one state.

    exchange = (c_ex/2) h^3 sum_faces |dm/h|^2, anisotropy =
    kappa h^3 sum (1 - (m.e_an)^2), magnetostatic = -(mu0/2) <h_d[m], m>
    (nonnegative, at most (mu0/2)||m||^2). ``hd`` short-circuits the demag
    evaluation as in effective_field.
    """
    _require_unit(m, "energy")
    exch = 0.5 * lp.c_ex * _grad_sq_sum(m)
    anis = 0.0
    if lp.kappa > 0.0:
        proj = m.data @ lp.axis
        anis = lp.kappa * m.grid.cell_volume * float(np.sum(1.0 - proj * proj))
    mag = 0.0
    if lp.mu0 > 0.0:
        if hd is None:
            if kernel is None:
                raise ValueError("mu0 > 0 requires a demag kernel (or a precomputed hd)")
            from .demag import apply_demag

            hd = apply_demag(kernel, m)
        mag = -0.5 * lp.mu0 * inner_l2(hd, m)
    return EnergyBreakdown(exchange=exch, anisotropy=anis, magnetostatic=mag)


class EnergyLedger:
    """Step-by-step record of energies, dissipation, work, and slack.

    Per recorded time the ledger keeps the energy breakdown, the cumulative
    damping dissipation alpha*int||dm/dt||^2, the cumulative work of the
    spin torque int<dm/dt, j0 s> and of the applied field, and two slack
    functionals (see module docstring). The primary inequality is

        slack(T) = total(0) + work(T) - total(T) - dissipation(T) >= -C*dt.

    ``advance`` consumes the states bracketing one step; ``s_used`` must be
    the accumulation actually fed into the torque for that step, and
    ``hd_old``/``f`` enter the alternative (pi-work) bookkeeping only.
    """

    def __init__(self, grid: Grid, alpha: float, j0: float):
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        self.grid = grid
        self.alpha = alpha
        self.j0 = j0
        self.t: list[float] = []
        self.exchange: list[float] = []
        self.anisotropy: list[float] = []
        self.magnetostatic: list[float] = []
        self.total: list[float] = []
        self.dissipation: list[float] = []
        self.spin_work: list[float] = []
        self.applied_work: list[float] = []
        self.slack: list[float] = []
        self.slack_alt: list[float] = []
        self.warnings: list[str] = []
        self._pi_work = 0.0

    def __len__(self) -> int:
        return len(self.t)

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            self.warnings.append(message)

    def start(self, t0: float, breakdown: EnergyBreakdown) -> None:
        if self.t:
            raise ValueError("ledger already started")
        self.t.append(float(t0))
        self.exchange.append(breakdown.exchange)
        self.anisotropy.append(breakdown.anisotropy)
        self.magnetostatic.append(breakdown.magnetostatic)
        self.total.append(breakdown.total)
        self.dissipation.append(0.0)
        self.spin_work.append(0.0)
        self.applied_work.append(0.0)
        self.slack.append(0.0)
        self.slack_alt.append(0.0)

    def advance(
        self,
        t: float,
        m_old: VectorField,
        m_new: VectorField,
        dt: float,
        breakdown: EnergyBreakdown,
        s_used: VectorField | None = None,
        pi_old: VectorField | None = None,
        f: VectorField | None = None,
    ) -> None:
        """Append the row at time t = previous time + dt.

        ``pi_old`` is the full nondissipative field at the pre-step state
        (mu0 h_d[m_old] + j0 s_used + anisotropy field + f), used only for
        the alternative slack; omit it to skip that bookkeeping.
        """
        if not self.t:
            raise ValueError("call start() before advance()")
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        delta = VectorField(self.grid, m_new.data - m_old.data)
        diss = self.dissipation[-1] + (self.alpha / dt) * inner_l2(delta, delta)
        spin = self.spin_work[-1]
        if s_used is not None and self.j0 != 0.0:
            spin += self.j0 * inner_l2(delta, s_used)
        applied = self.applied_work[-1]
        if f is not None:
            applied += inner_l2(delta, f)
        self.t.append(float(t))
        self.exchange.append(breakdown.exchange)
        self.anisotropy.append(breakdown.anisotropy)
        self.magnetostatic.append(breakdown.magnetostatic)
        self.total.append(breakdown.total)
        self.dissipation.append(diss)
        self.spin_work.append(spin)
        self.applied_work.append(applied)
        self.slack.append(self.total[0] + spin + applied - breakdown.total - diss)
        if pi_old is not None:
            self._pi_work += inner_l2(delta, pi_old)
        self.slack_alt.append(
            self.exchange[0] + self._pi_work - breakdown.exchange - diss
        )

    @property
    def worst_slack(self) -> float:
        return min(self.slack) if self.slack else 0.0

    def as_columns(self) -> dict[str, NDArray[np.float64]]:
        """The eight canonical CSV columns, in order."""
        return {
            "t": np.asarray(self.t),
            "exchange": np.asarray(self.exchange),
            "anisotropy": np.asarray(self.anisotropy),
            "magnetostatic": np.asarray(self.magnetostatic),
            "total": np.asarray(self.total),
            "dissipation": np.asarray(self.dissipation),
            "spin_work": np.asarray(self.spin_work),
            "slack": np.asarray(self.slack),
        }


def energy_inequality_slack(ledger: EnergyLedger, T: float) -> float:
    """Slack of the dissipation inequality at the last recorded time <= T."""
    if not ledger.t:
        raise ValueError("ledger is empty")
    times = np.asarray(ledger.t)
    eligible = np.nonzero(times <= T + 1e-12)[0]
    if eligible.size == 0:
        raise ValueError(f"no ledger entry at or before T = {T} (first is {times[0]})")
    return ledger.slack[int(eligible[-1])]

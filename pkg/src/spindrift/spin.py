"""Spin-accumulation transport: flux, stationary solver, transient step.

The spin accumulation s obeys a vector diffusion-reaction equation driven
by the applied electric current j_e and coupled to the magnetization m
through the matrix-valued spin current

    J(grad s, m) = D0 [grad s - beta*beta' (grad s . m) x m] - (beta/2) j_e x m,

where grad s has the gradients of the components as columns and x denotes
the outer product. Eliminating the drive term, the operator applied to s
takes strongly elliptic form: per axis the flux of s is A_m d_a s with

    A_m = D0 (I - beta*beta' m x m),

whose eigenvalues are D0*{1 - beta*beta', 1, 1}, so the smallest one is
bounded below by min(D0)*(1 - beta*beta') > 0; the reaction part
gamma1 s + gamma2 s x m contributes gamma1 |s|^2 to the quadratic form (the
cross term is pointwise orthogonal to s). Together these give the discrete
coercivity

    <L s, s>  >=  min(D0)*(1 - beta*beta') ||grad_h s||^2 + gamma1 ||s||^2,

which holds exactly for the face-renormalized discretization below and
makes the stationary problem uniquely solvable for every unit m. The
stationary solution map m -> s is the central nonlocal operator of the
long-time model.

Boundary condition: zero total spin-current flux through the boundary,
J^T n = 0. The drive part of the flux, -(beta/2)(j_e . n) m, is balanced by
an equal and opposite diffusive flux, so boundary faces drop out of the
discrete balance entirely and the right-hand side collects only the
interior divergence of the drive tensor, b = -(beta/2) div_h(j_e x m).
(Testing the weak form against phi, the balanced diffusive boundary flux
reproduces the boundary drive integral -(beta/2) oint (m.phi)(j_e.n) that
the integration by parts of the drive divergence generates; with j_e.n = 0
on the boundary the two readings coincide term by term.)

The transient step is backward Euler: (eps/dt)(s_new - s_old) equals the
stationary operator applied to s_new, which only shifts the zeroth-order
coefficient by c = eps/dt and is therefore unconditionally stable; with
j_e = 0 it satisfies ||s_new|| <= ||s_old|| for any dt.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from .grid import (
    FaceTensor,
    Grid,
    UNIT_TOL,
    VectorField,
    _check_same_grid,
)

__all__ = [
    "SpinParams",
    "SpinSystem",
    "SolverConvergenceError",
    "spin_current",
    "assemble_spin_system",
    "solve_stationary_spin",
    "step_spin_transient",
    "ellipticity_report",
]

DEFAULT_TOL = 1e-10


class SolverConvergenceError(RuntimeError):
    """Krylov solve did not reach the requested residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SpinParams:
    """Transport coefficients.

    ``d0`` may be a positive constant or a per-cell positive array (its
    essential infimum is the coercivity constant gamma). ``beta`` and
    ``beta_prime`` are polarization parameters; the physical range is the
    open interval (0, 1), and the value 0 is additionally accepted here as
    the exactly-decoupled limit arm used by reference tests. ``epsilon`` is
    the relaxation-time scale of the transient equation; 0 selects the
    stationary model. ``j_e = None`` means zero applied current.
    """

    d0: float | NDArray[np.float64] = 1.0
    beta: float = 0.9
    beta_prime: float = 0.8
    gamma1: float = 1.0
    gamma2: float = 1.0
    epsilon: float = 0.0
    j_e: VectorField | None = None

    def __post_init__(self) -> None:
        d0_min = float(np.min(self.d0))
        if not d0_min > 0:
            raise ValueError(f"D0 must be positive everywhere, min is {d0_min}")
        for name, value in (("beta", self.beta), ("beta_prime", self.beta_prime)):
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {value}")
        if not self.gamma1 > 0:
            raise ValueError(f"gamma1 must be positive, got {self.gamma1}")
        if self.gamma2 < 0:
            raise ValueError(f"gamma2 must be nonnegative, got {self.gamma2}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")

    @property
    def coercivity_gamma(self) -> float:
        """Essential infimum of D0."""
        return float(np.min(self.d0))

    @property
    def ellipticity_constant(self) -> float:
        """min(D0) * (1 - beta*beta_prime), the sharp lower bound on A_m."""
        return self.coercivity_gamma * (1.0 - self.beta * self.beta_prime)


def _require_unit(m: VectorField, who: str) -> None:
    err = float(np.max(np.abs(np.linalg.norm(m.data, axis=-1) - 1.0)))
    if err > UNIT_TOL:
        raise ValueError(f"{who} requires unit-length m; max | |m|-1 | = {err:.3e}")


def _face_mean(data: NDArray, axis: int) -> NDArray:
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return 0.5 * (data[tuple(lo)] + data[tuple(hi)])


def _face_unit_m(m: VectorField, axis: int) -> NDArray[np.float64]:
    """Arithmetic face mean of m, renormalized to unit length.

    Cells with (numerically) antipodal neighbors have a vanishing mean; the
    fallback takes the low-side cell value so the face tensor keeps its
    unit rank-one structure.
    """
    mean = _face_mean(m.data, axis)
    norms = np.linalg.norm(mean, axis=-1, keepdims=True)
    lo = [slice(None)] * 3
    lo[axis] = slice(None, -1)
    fallback = m.data[tuple(lo)]
    safe = np.where(norms > 1e-12, norms, 1.0)
    return np.where(norms > 1e-12, mean / safe, fallback)


def _face_d0(d0, grid: Grid, axis: int):
    if np.isscalar(d0) or np.ndim(d0) == 0:
        return float(d0)
    arr = np.asarray(d0, dtype=np.float64)
    if arr.shape != grid.shape:
        raise ValueError(f"per-cell D0 has shape {arr.shape}, expected {grid.shape}")
    return _face_mean(arr, axis)[..., None]


def spin_current(grad_s: FaceTensor, m: VectorField, p: SpinParams) -> FaceTensor:
    """Per-face spin-current matrices J(grad s, m).

    m (and j_e, when present) are face-averaged internally: arithmetic mean
    of the two adjacent cells, with m renormalized to unit length. Boundary
    faces use the single adjacent cell. The full 3x3 matrix is formed on
    every face; consumers that only need the through-face flux read the row
    matching the face axis.
    """
    _check_same_grid(grad_s.grid, m.grid, "spin_current")
    if p.j_e is not None:
        _check_same_grid(p.j_e.grid, m.grid, "spin_current (j_e)")
    g = m.grid
    bbp = p.beta * p.beta_prime
    out = FaceTensor(g)
    for axis in range(3):
        G = grad_s.axis(axis)
        n_faces = G.shape[axis]
        # Face values of m: interior faces get the renormalized mean, the
        # two boundary slabs copy their adjacent cell.
        mf = np.empty(G.shape[:3] + (3,))
        idx_int = [slice(None)] * 3
        idx_int[axis] = slice(1, -1)
        mf[tuple(idx_int)] = _face_unit_m(m, axis)
        idx0 = [slice(None)] * 3
        idx0[axis] = 0
        idxN = [slice(None)] * 3
        idxN[axis] = n_faces - 1
        cell0 = [slice(None)] * 3
        cell0[axis] = 0
        cellN = [slice(None)] * 3
        cellN[axis] = -1
        mf[tuple(idx0)] = m.data[tuple(cell0)]
        mf[tuple(idxN)] = m.data[tuple(cellN)]

        gm = np.einsum("...ij,...j->...i", G, mf)
        diff = G - bbp * gm[..., :, None] * mf[..., None, :]
        if np.isscalar(p.d0) or np.ndim(p.d0) == 0:
            diff = float(p.d0) * diff
        else:
            d0f = np.empty(G.shape[:3] + (1, 1))
            d0f[tuple(idx_int)] = _face_d0(p.d0, g, axis)[..., None]
            arr = np.asarray(p.d0, dtype=np.float64)
            d0f[tuple(idx0)] = arr[tuple(cell0)][..., None, None]
            d0f[tuple(idxN)] = arr[tuple(cellN)][..., None, None]
            diff = d0f * diff
        if p.j_e is not None:
            jf = np.empty(G.shape[:3] + (3,))
            jf[tuple(idx_int)] = _face_mean(p.j_e.data, axis)
            jf[tuple(idx0)] = p.j_e.data[tuple(cell0)]
            jf[tuple(idxN)] = p.j_e.data[tuple(cellN)]
            diff = diff - 0.5 * p.beta * jf[..., :, None] * mf[..., None, :]
        out.axis(axis)[:] = diff
    return out


@dataclass
class SpinSystem:
    """Matrix-free linear system L s = b for one frozen magnetization.

    L s = c s - div_h[A_m flux of s] + gamma1 s + gamma2 s x m, with zero
    diffusive flux through boundary faces (the flux balance of the total
    zero-flux boundary condition; see module docstring). ``boundary_drive``
    stores, per axis and side, the drive flux -(beta/2)(j_e . n) m that the
    diffusive flux cancels there.
    """

    grid: Grid
    m: VectorField
    params: SpinParams
    c: float
    b: VectorField
    boundary_drive: dict = dc_field(default_factory=dict, repr=False)
    _m_face: list = dc_field(default_factory=list, repr=False)
    _d0_face: list = dc_field(default_factory=list, repr=False)

    @property
    def n_dof(self) -> int:
        return 3 * self.grid.n_cells

    def apply(self, s: NDArray | VectorField) -> NDArray[np.float64]:
        """L s, on an ``(nx, ny, nz, 3)`` array (or VectorField's data)."""
        data = s.data if isinstance(s, VectorField) else s
        p = self.params
        h = self.grid.h
        bbp = p.beta * p.beta_prime
        out = (self.c + p.gamma1) * data + p.gamma2 * np.cross(data, self.m.data)
        for axis in range(3):
            if self.grid.shape[axis] < 2:
                continue
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            delta = (data[tuple(hi)] - data[tuple(lo)]) / h
            mf = self._m_face[axis]
            proj = np.sum(delta * mf, axis=-1, keepdims=True)
            flux = self._d0_face[axis] * (delta - bbp * proj * mf)
            # minus the divergence of the flux: cell i gets
            # -(flux_high - flux_low)/h, and each interior face is the high
            # face of its low cell and vice versa
            out[tuple(lo)] -= flux / h
            out[tuple(hi)] += flux / h
        return out

    def residual(self, s: NDArray | VectorField) -> float:
        data = s.data if isinstance(s, VectorField) else s
        r = self.apply(data) - self.b.data
        bnorm = float(np.linalg.norm(self.b.data))
        return float(np.linalg.norm(r)) / max(bnorm, 1e-300)

    def as_operator(self) -> spla.LinearOperator:
        shape4 = (*self.grid.shape, 3)

        def matvec(v: NDArray) -> NDArray:
            return self.apply(v.reshape(shape4)).ravel()

        return spla.LinearOperator((self.n_dof, self.n_dof), matvec=matvec, dtype=np.float64)

    def diag_blocks(self) -> NDArray[np.float64]:
        """Per-cell 3x3 diagonal blocks of L (used for preconditioning)."""
        p = self.params
        g = self.grid
        h2 = g.h * g.h
        bbp = p.beta * p.beta_prime
        eye = np.eye(3)
        blocks = np.zeros((*g.shape, 3, 3))
        blocks += (self.c + p.gamma1) * eye
        mx, my, mz = (self.m.data[..., a] for a in range(3))
        cross = np.zeros_like(blocks)
        cross[..., 0, 1] = mz
        cross[..., 0, 2] = -my
        cross[..., 1, 0] = -mz
        cross[..., 1, 2] = mx
        cross[..., 2, 0] = my
        cross[..., 2, 1] = -mx
        blocks += p.gamma2 * cross
        for axis in range(3):
            if g.shape[axis] < 2:
                continue
            mf = self._m_face[axis]
            d0f = self._d0_face[axis]
            scale = d0f if np.isscalar(d0f) else d0f[..., None]
            a_face = scale * (eye - bbp * mf[..., :, None] * mf[..., None, :])
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            blocks[tuple(lo)] += a_face / h2
            blocks[tuple(hi)] += a_face / h2
        return blocks

    def preconditioner(self, kind: str = "block") -> spla.LinearOperator | None:
        """Left preconditioner for the Krylov solve.

        ``block`` (default) inverts the per-cell 3x3 diagonal blocks; local
        and faithful to the operator's reaction part, but its iteration
        count grows like 1/h on diffusion-dominated grids. ``spectral``
        inverts the isotropic constant-coefficient surrogate
        (c + gamma1 - d_pre Lap_h) exactly in the Neumann cosine basis
        (d_pre splits the A_m eigenvalue range), giving h-independent
        iteration counts; preferred on fine grids. ``none`` disables
        preconditioning.
        """
        shape4 = (*self.grid.shape, 3)
        if kind == "none":
            return None
        if kind == "block":
            inv = np.linalg.inv(self.diag_blocks())

            def matvec(v: NDArray) -> NDArray:
                return np.einsum("...ij,...j->...i", inv, v.reshape(shape4)).ravel()

        elif kind == "spectral":
            import scipy.fft as sfft

            p = self.params
            h = self.grid.h
            d_lo = float(np.min(p.d0)) * (1.0 - p.beta * p.beta_prime)
            d_hi = float(np.max(p.d0))
            d_pre = 0.5 * (d_lo + d_hi)
            lam = np.zeros(self.grid.shape)
            for a, n in enumerate(self.grid.shape):
                k = np.arange(n)
                mode = 4.0 * np.sin(0.5 * np.pi * k / n) ** 2 / (h * h)
                shape1 = [1, 1, 1]
                shape1[a] = n
                lam = lam + mode.reshape(shape1)
            denom = (self.c + p.gamma1) + d_pre * lam

            def matvec(v: NDArray) -> NDArray:
                x = v.reshape(shape4)
                out = np.empty_like(x)
                for comp in range(3):
                    t = sfft.dctn(x[..., comp], type=2)
                    out[..., comp] = sfft.idctn(t / denom, type=2)
                return out.ravel()

        else:
            raise ValueError(f"unknown preconditioner {kind!r}; use 'block', 'spectral', or 'none'")
        return spla.LinearOperator((self.n_dof, self.n_dof), matvec=matvec, dtype=np.float64)

    def to_dense(self) -> NDArray[np.float64]:
        """Materialize L by applying it to the coefficient basis (small grids)."""
        n = self.n_dof
        if n > 6000:
            raise ValueError(f"refusing to materialize a {n}x{n} dense operator")
        A = np.empty((n, n))
        shape4 = (*self.grid.shape, 3)
        e = np.zeros(n)
        for col in range(n):
            e[col] = 1.0
            A[:, col] = self.apply(e.reshape(shape4)).ravel()
            e[col] = 0.0
        return A


def assemble_spin_system(
    m: VectorField,
    p: SpinParams,
    dt: float | None = None,
    s_old: VectorField | None = None,
) -> SpinSystem:
    """Build the linear system for one spin update.

    ``dt=None`` selects the stationary operator (c = 0); a positive ``dt``
    selects the backward-Euler operator with c = epsilon/dt, and ``s_old``
    then contributes c*s_old to the right-hand side. epsilon = 0 routes to
    the stationary operator regardless of dt.
    """
    _require_unit(m, "assemble_spin_system")
    g = m.grid
    if p.j_e is not None:
        _check_same_grid(p.j_e.grid, g, "assemble_spin_system (j_e)")

    if dt is None or p.epsilon == 0.0:
        c = 0.0
    else:
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        c = p.epsilon / dt

    m_face = []
    d0_face = []
    for axis in range(3):
        if g.shape[axis] < 2:
            m_face.append(None)
            d0_face.append(None)
            continue
        m_face.append(_face_unit_m(m, axis))
        d0_face.append(_face_d0(p.d0, g, axis))

    b = np.zeros((*g.shape, 3))
    boundary_drive: dict = {}
    if p.j_e is not None:
        h = g.h
        for axis in range(3):
            # Boundary drive flux that the diffusive flux balances (data only;
            # it cancels out of the cell balance).
            for side, cell_idx in (("low", 0), ("high", -1)):
                sl = [slice(None)] * 3
                sl[axis] = cell_idx
                jn = p.j_e.data[tuple(sl)][..., axis]
                boundary_drive[(axis, side)] = (
                    0.5 * p.beta * jn[..., None] * m.data[tuple(sl)]
                )
            if g.shape[axis] < 2:
                continue
            jf = _face_mean(p.j_e.data, axis)[..., axis]
            drive = -0.5 * p.beta * jf[..., None] * m_face[axis]
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            # plus the divergence of the interior drive tensor
            b[tuple(lo)] += drive / h
            b[tuple(hi)] -= drive / h
    if c > 0.0 and s_old is not None:
        _check_same_grid(s_old.grid, g, "assemble_spin_system (s_old)")
        b += c * s_old.data

    return SpinSystem(
        grid=g,
        m=m,
        params=p,
        c=c,
        b=VectorField(g, b),
        boundary_drive=boundary_drive,
        _m_face=m_face,
        _d0_face=d0_face,
    )


_METHODS: dict[str, Callable] = {"gmres": spla.gmres, "bicgstab": spla.bicgstab}


def _solve(
    system: SpinSystem,
    tol: float,
    warm_start: VectorField | None,
    method: str,
    maxiter: int,
    stats: dict | None,
    precond: str = "block",
) -> VectorField:
    g = system.grid
    bvec = system.b.data.ravel()
    bnorm = float(np.linalg.norm(bvec))
    if bnorm == 0.0:
        if stats is not None:
            stats.update(iterations=0, residual=0.0, method=method)
        return VectorField(g, np.zeros((*g.shape, 3)))

    if method not in _METHODS:
        raise ValueError(f"unknown Krylov method {method!r}; use one of {sorted(_METHODS)}")
    x0 = None
    if warm_start is not None:
        _check_same_grid(warm_start.grid, g, "spin solve warm start")
        x0 = warm_start.data.ravel()

    count = {"n": 0}

    def tick(_arg) -> None:
        count["n"] += 1

    A = system.as_operator()
    M = system.preconditioner(precond)
    kwargs = dict(x0=x0, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=tick)
    if method == "gmres":
        kwargs.update(restart=50, callback_type="pr_norm")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns on exact breakdowns it recovers from
        x, info = _METHODS[method](A, bvec, **kwargs)

    shape4 = (*g.shape, 3)
    rel = float(np.linalg.norm(system.apply(x.reshape(shape4)).ravel() - bvec)) / bnorm
    if info != 0 or rel > tol:
        raise SolverConvergenceError(
            f"{method} did not converge: relative residual {rel:.3e} after "
            f"{count['n']} iterations (target {tol:.1e}, info={info})",
            residual=rel,
            iterations=count["n"],
        )
    if stats is not None:
        stats.update(iterations=count["n"], residual=rel, method=method)
    return VectorField(g, x.reshape(shape4))


def solve_stationary_spin(
    m: VectorField,
    p: SpinParams,
    tol: float = DEFAULT_TOL,
    warm_start: VectorField | None = None,
    method: str = "gmres",
    maxiter: int = 2000,
    stats: dict | None = None,
    precond: str = "block",
) -> VectorField:
    """The stationary solution map m -> s (unique by coercivity).

    Returns s with relative residual ||L s - b|| / ||b|| <= tol (exactly
    zero when j_e vanishes). Raises SolverConvergenceError, carrying the
    final residual, if the Krylov iteration stalls.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    system = assemble_spin_system(m, p, dt=None)
    return _solve(system, tol, warm_start, method, maxiter, stats, precond)


def step_spin_transient(
    s_old: VectorField,
    m: VectorField,
    p: SpinParams,
    dt: float,
    tol: float = DEFAULT_TOL,
    method: str = "gmres",
    maxiter: int = 2000,
    stats: dict | None = None,
    precond: str = "block",
) -> VectorField:
    """One backward-Euler step of the transient spin equation.

    Unconditionally stable; with j_e = 0 the step is a contraction,
    ||s_new|| <= ||s_old||. epsilon = 0 degenerates to the stationary
    solve (warm-started from s_old).
    """
    _check_same_grid(s_old.grid, m.grid, "step_spin_transient")
    if p.epsilon == 0.0:
        return solve_stationary_spin(
            m,
            p,
            tol=tol,
            warm_start=s_old,
            method=method,
            maxiter=maxiter,
            stats=stats,
            precond=precond,
        )
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    system = assemble_spin_system(m, p, dt=dt, s_old=s_old)
    return _solve(system, tol, s_old, method, maxiter, stats, precond)


def ellipticity_report(m: VectorField, p: SpinParams) -> float:
    """Smallest eigenvalue of A_m over all cells (computed, not assumed).

    Analytically this equals min(D0) * (1 - beta*beta_prime) for any unit
    m, since the spectrum of I - beta*beta' m x m is {1 - beta*beta', 1, 1}.
    """
    _require_unit(m, "ellipticity_report")
    bbp = p.beta * p.beta_prime
    mm = m.data[..., :, None] * m.data[..., None, :]
    A = np.eye(3) - bbp * mm
    if np.isscalar(p.d0) or np.ndim(p.d0) == 0:
        A = float(p.d0) * A
    else:
        arr = np.asarray(p.d0, dtype=np.float64)
        if arr.shape != m.grid.shape:
            raise ValueError(f"per-cell D0 has shape {arr.shape}, expected {m.grid.shape}")
        A = arr[..., None, None] * A
    eigs = np.linalg.eigvalsh(A.reshape(-1, 3, 3))
    return float(eigs.min())

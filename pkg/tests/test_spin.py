"""Stationary and transient spin solves against independent dense oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spindrift.grid import (
    Grid,
    _grad_sq_sum,
    constant_field,
    divergence,
    gradient,
    inner_l2,
    norm_h1,
    norm_l2,
    vector_field,
    zero_field,
)
from spindrift.spin import (
    SolverConvergenceError,
    SpinParams,
    assemble_spin_system,
    ellipticity_report,
    solve_stationary_spin,
    spin_current,
    step_spin_transient,
)


def random_unit(grid, rng):
    data = rng.standard_normal((*grid.shape, 3))
    data /= np.linalg.norm(data, axis=-1, keepdims=True)
    return vector_field(grid, data, unit=True)


def random_field(grid, rng):
    return vector_field(grid, rng.standard_normal((*grid.shape, 3)))


class TestParams:
    def test_defaults_and_derived_constants(self):
        p = SpinParams()
        assert p.d0 == 1.0 and p.beta == 0.9 and p.beta_prime == 0.8
        assert p.ellipticity_constant == pytest.approx(1.0 - 0.72)
        assert p.coercivity_gamma == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"d0": 0.0},
            {"d0": -1.0},
            {"beta": 1.0},
            {"beta": -0.1},
            {"beta_prime": 1.0},
            {"gamma1": 0.0},
            {"gamma2": -1.0},
            {"epsilon": -1e-3},
        ],
    )
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            SpinParams(**kwargs)

    def test_limit_values_accepted(self):
        SpinParams(beta=0.0, beta_prime=0.0, gamma2=0.0, epsilon=0.0)

    def test_per_cell_d0(self):
        grid = Grid((3, 3, 3), 1.0 / 3.0)
        d0 = np.linspace(0.5, 2.0, 27).reshape(3, 3, 3)
        p = SpinParams(d0=d0)
        assert p.coercivity_gamma == pytest.approx(0.5)


class TestDenseOracle:
    def test_stationary_matches_dense_lu(self):
        grid = Grid((4, 4, 4), 0.25)
        rng = np.random.default_rng(42)
        m = random_unit(grid, rng)
        p = SpinParams(j_e=random_field(grid, rng))
        s = solve_stationary_spin(m, p, tol=1e-12)
        system = assemble_spin_system(m, p)
        dense = system.to_dense()
        x = np.linalg.solve(dense, system.b.data.reshape(-1))
        rel = np.linalg.norm(s.data.reshape(-1) - x) / np.linalg.norm(x)
        assert rel <= 1e-8

    def test_dense_min_symmetric_eigenvalue(self):
        # The symmetric part is bounded below by gamma1 in coefficient
        # space (the h^3-weighted form scales both sides identically);
        # equality holds because constant fields annihilate the gradient.
        grid = Grid((3, 3, 3), 1.0 / 3.0)
        rng = np.random.default_rng(1)
        m = random_unit(grid, rng)
        p = SpinParams()
        dense = assemble_spin_system(m, p).to_dense()
        sym = 0.5 * (dense + dense.T)
        lo = float(np.linalg.eigvalsh(sym).min())
        assert lo >= p.gamma1 - 1e-10
        assert lo == pytest.approx(p.gamma1, rel=1e-8)

    def test_antisymmetric_part_is_reaction_cross_term(self):
        grid = Grid((2, 2, 2), 0.5)
        rng = np.random.default_rng(3)
        m = random_unit(grid, rng)
        p = SpinParams()
        dense = assemble_spin_system(m, p).to_dense()
        anti = 0.5 * (dense - dense.T)
        want = np.zeros_like(dense)
        flat_m = m.data.reshape(-1, 3)
        for i, (mx, my, mz) in enumerate(flat_m):
            want[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] = p.gamma2 * np.array(
                [[0.0, mz, -my], [-mz, 0.0, mx], [my, -mx, 0.0]]
            )
        assert np.allclose(anti, want, atol=1e-13)

    def test_to_dense_refuses_large_grids(self):
        grid = Grid((16, 16, 16), 1.0 / 16.0)
        m = constant_field(grid, (0.0, 0.0, 1.0), unit=True)
        with pytest.raises(ValueError):
            assemble_spin_system(grid and m, SpinParams()).to_dense()


def scalar_neumann_dense(grid: Grid, d0: float, gamma1: float) -> np.ndarray:
    """Independent dense assembly: gamma1*u - d0*Lap_h u, zero-flux."""
    nx, ny, nz = grid.shape
    n = nx * ny * nz
    idx = lambda i, j, k: (i * ny + j) * nz + k
    A = np.zeros((n, n))
    h2 = grid.h**2
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                row = idx(i, j, k)
                A[row, row] += gamma1
                for di, dj, dk in (
                    (1, 0, 0), (-1, 0, 0), (0, 1, 0),
                    (0, -1, 0), (0, 0, 1), (0, 0, -1),
                ):
                    ii, jj, kk = i + di, j + dj, k + dk
                    if 0 <= ii < nx and 0 <= jj < ny and 0 <= kk < nz:
                        A[row, row] += d0 / h2
                        A[row, idx(ii, jj, kk)] -= d0 / h2
    return A


def scalar_drive_rhs(grid: Grid, m, j_e, beta: float) -> np.ndarray:
    """Independent rhs: (interior) divergence of -(beta/2) j_e (x) m_hat.

    Face values use the arithmetic means, with m renormalized, matching
    the assembly contract but computed with plain loops.
    """
    nx, ny, nz = grid.shape
    h = grid.h
    b = np.zeros((nx, ny, nz, 3))
    for axis in range(3):
        n_ax = grid.shape[axis]
        for face in range(1, n_ax):
            lo_slice = [slice(None)] * 3
            hi_slice = [slice(None)] * 3
            lo_slice[axis] = face - 1
            hi_slice[axis] = face
            m_mean = 0.5 * (m.data[tuple(lo_slice)] + m.data[tuple(hi_slice)])
            norm = np.linalg.norm(m_mean, axis=-1, keepdims=True)
            m_hat = m_mean / norm
            je_mean = 0.5 * (
                j_e.data[tuple(lo_slice)][..., axis]
                + j_e.data[tuple(hi_slice)][..., axis]
            )
            F = -(beta / 2.0) * je_mean[..., None] * m_hat
            b[tuple(lo_slice)] += F / h
            b[tuple(hi_slice)] -= F / h
    return b


class TestScalarDecouplingOracle:
    def test_componentwise_reaction_diffusion(self):
        # With beta' = 0 and gamma2 = 0 the operator is gamma1 - d0*Lap on
        # each component; the drive still mixes m into the rhs. Everything
        # on the oracle side is assembled with independent loop code.
        grid = Grid((4, 3, 3), 0.25)
        rng = np.random.default_rng(5)
        m = random_unit(grid, rng)
        j_e = random_field(grid, rng)
        p = SpinParams(beta=0.9, beta_prime=0.0, gamma2=0.0, gamma1=1.3, d0=0.7, j_e=j_e)
        s = solve_stationary_spin(m, p, tol=1e-12)

        A = scalar_neumann_dense(grid, 0.7, 1.3)
        b = scalar_drive_rhs(grid, m, j_e, 0.9)
        for comp in range(3):
            u = np.linalg.solve(A, b[..., comp].reshape(-1))
            got = s.data[..., comp].reshape(-1)
            assert np.linalg.norm(got - u) <= 1e-9 * max(np.linalg.norm(u), 1e-30)


def cross_matrix(m):
    mx, my, mz = m
    return np.array([[0.0, mz, -my], [-mz, 0.0, mx], [my, -mx, 0.0]])


class TestTransientOracles:
    def test_single_cell_reaction_ode(self):
        # One cell has no faces: L = (eps/dt + gamma1) I + gamma2 [m]_x,
        # b = (eps/dt) s_old. Iterate and compare to 3x3 linear algebra.
        grid = Grid((1, 1, 1), 1.0)
        rng = np.random.default_rng(9)
        mvec = rng.standard_normal(3)
        mvec /= np.linalg.norm(mvec)
        m = constant_field(grid, mvec, unit=True)
        p = SpinParams(epsilon=0.05, gamma1=1.7, gamma2=0.6)
        dt = 0.01
        c = p.epsilon / dt
        L = (c + p.gamma1) * np.eye(3) + p.gamma2 * cross_matrix(mvec)

        s_ref = rng.standard_normal(3)
        s = vector_field(grid, s_ref.reshape(1, 1, 1, 3).copy())
        for _ in range(5):
            s = step_spin_transient(s, m, p, dt, tol=1e-13)
            s_ref = np.linalg.solve(L, c * s_ref)
            assert np.allclose(s.data.reshape(3), s_ref, rtol=1e-9, atol=1e-12)

    def test_two_cell_dense_oracle(self):
        # Two cells, one interior face: hand-assembled 6x6 with the
        # anisotropic face tensor and the face drive, backward Euler.
        grid = Grid((2, 1, 1), 0.5)
        rng = np.random.default_rng(13)
        mdata = rng.standard_normal((2, 1, 1, 3))
        mdata /= np.linalg.norm(mdata, axis=-1, keepdims=True)
        m = vector_field(grid, mdata, unit=True)
        je_data = rng.standard_normal((2, 1, 1, 3))
        j_e = vector_field(grid, je_data)
        p = SpinParams(epsilon=0.2, d0=1.4, beta=0.6, beta_prime=0.5, gamma1=0.9,
                       gamma2=1.1, j_e=j_e)
        dt = 0.05
        c = p.epsilon / dt
        h = grid.h

        m0, m1 = mdata[0, 0, 0], mdata[1, 0, 0]
        m_face = 0.5 * (m0 + m1)
        m_face = m_face / np.linalg.norm(m_face)
        A_face = p.d0 * (np.eye(3) - p.beta * p.beta_prime * np.outer(m_face, m_face))
        je_face = 0.5 * (je_data[0, 0, 0, 0] + je_data[1, 0, 0, 0])
        F_drive = -(p.beta / 2.0) * je_face * m_face

        L = np.zeros((6, 6))
        for cell, mv in ((0, m0), (1, m1)):
            sl = slice(3 * cell, 3 * cell + 3)
            L[sl, sl] = (c + p.gamma1) * np.eye(3) + p.gamma2 * cross_matrix(mv)
        L[0:3, 0:3] += A_face / h**2
        L[0:3, 3:6] -= A_face / h**2
        L[3:6, 3:6] += A_face / h**2
        L[3:6, 0:3] -= A_face / h**2

        b_drive = np.concatenate([F_drive / h, -F_drive / h])

        s_ref = rng.standard_normal(6)
        s = vector_field(grid, s_ref.reshape(2, 1, 1, 3).copy())
        for _ in range(4):
            s = step_spin_transient(s, m, p, dt, tol=1e-13)
            s_ref = np.linalg.solve(L, c * s_ref + b_drive)
            assert np.allclose(s.data.reshape(6), s_ref, rtol=1e-9, atol=1e-12)

    def test_epsilon_zero_routes_to_stationary(self):
        grid = Grid((3, 3, 3), 1.0 / 3.0)
        rng = np.random.default_rng(11)
        m = random_unit(grid, rng)
        p = SpinParams(epsilon=0.0, j_e=random_field(grid, rng))
        s_old = random_field(grid, rng)
        s_step = step_spin_transient(s_old, m, p, dt=0.01, tol=1e-12)
        s_stat = solve_stationary_spin(m, p, tol=1e-12)
        assert np.allclose(s_step.data, s_stat.data, atol=1e-10)

    def test_steady_state_limit(self):
        # Criterion-9 shape: frozen m, repeated BE steps approach H_s[m].
        grid = Grid((4, 4, 4), 0.25)
        rng = np.random.default_rng(15)
        m = random_unit(grid, rng)
        j_e = constant_field(grid, (1.0, 0.0, 0.0))
        for eps in (1e-1, 1e-3):
            p = SpinParams(epsilon=eps, j_e=j_e)
            p0 = SpinParams(epsilon=0.0, j_e=j_e)
            s_star = solve_stationary_spin(m, p0, tol=1e-12)
            s = zero_field(grid)
            dt = 5.0 * eps
            for _ in range(60):
                s = step_spin_transient(s, m, p, dt, tol=1e-12)
            gap = norm_l2(s - s_star) / norm_l2(s_star)
            assert gap <= 1e-8, f"eps={eps}: gap {gap:.3e}"


class TestOperatorStructure:
    def test_constant_field_sees_reaction_only(self):
        # Zero-total-flux boundary handling: a constant s has no diffusive
        # flux anywhere, so L s is exactly the reaction part.
        grid = Grid((4, 4, 4), 0.25)
        rng = np.random.default_rng(19)
        m = random_unit(grid, rng)
        system = assemble_spin_system(m, SpinParams())
        svec = np.array([0.7, -0.2, 0.4])
        s = constant_field(grid, svec)
        got = system.apply(s)
        want = SpinParams().gamma1 * s.data + SpinParams().gamma2 * np.cross(
            s.data, m.data
        )
        assert np.allclose(got, want, atol=1e-13)

    def test_apply_consistent_with_spin_current(self):
        # apply(s) - reaction == -div(diffusive part of the face current).
        grid = Grid((4, 3, 5), 0.2)
        rng = np.random.default_rng(23)
        m = random_unit(grid, rng)
        p = SpinParams(j_e=random_field(grid, rng))
        system = assemble_spin_system(m, p)
        s = random_field(grid, rng)
        J_full = spin_current(gradient(s), m, p)
        J_drive = spin_current(gradient(zero_field(grid)), m, p)
        for a in range(3):
            J_full.axis(a)[:] -= J_drive.axis(a)
        div_diff = divergence(J_full)
        reaction = p.gamma1 * s.data + p.gamma2 * np.cross(s.data, m.data)
        got = system.apply(s)
        assert np.allclose(got, reaction - div_diff.data, atol=1e-12)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_coercivity_quadratic_form(self, seed):
        grid = Grid((4, 4, 4), 0.25)
        rng = np.random.default_rng(seed)
        m = random_unit(grid, rng)
        s = random_field(grid, rng)
        p = SpinParams()
        system = assemble_spin_system(m, p)
        quad = inner_l2(vector_field(grid, system.apply(s)), s)
        lower = p.ellipticity_constant * _grad_sq_sum(s) + p.gamma1 * norm_l2(s) ** 2
        assert quad - lower >= -1e-12 * norm_h1(s) ** 2

    def test_ellipticity_report_sharp_bounds(self):
        grid = Grid((4, 4, 4), 0.25)
        rng = np.random.default_rng(29)
        m = random_unit(grid, rng)
        p = SpinParams()
        assert ellipticity_report(m, p) == pytest.approx(p.ellipticity_constant, rel=1e-12)
        d0 = np.linspace(0.5, 2.0, 64).reshape(4, 4, 4)
        assert ellipticity_report(m, SpinParams(d0=d0)) == pytest.approx(
            0.5 * p.ellipticity_constant, rel=1e-12
        )


class TestSolverContract:
    def test_zero_rhs_returns_exact_zeros(self):
        grid = Grid((4, 4, 4), 0.25)
        rng = np.random.default_rng(31)
        m = random_unit(grid, rng)
        stats = {}
        s = solve_stationary_spin(m, SpinParams(), stats=stats)
        assert np.all(s.data == 0.0)
        assert stats["iterations"] == 0

    def test_solver_paths_agree(self):
        grid = Grid((6, 6, 6), 1.0 / 6.0)
        rng = np.random.default_rng(37)
        m = random_unit(grid, rng)
        p = SpinParams(j_e=random_field(grid, rng))
        tol = 1e-11
        solutions = {}
        for method in ("gmres", "bicgstab"):
            for precond in ("block", "spectral", "none"):
                s = solve_stationary_spin(m, p, tol=tol, method=method, precond=precond)
                solutions[(method, precond)] = s.data
        # Each path meets the residual contract; solutions then agree to
        # kappa(L) * tol, with kappa ~ 1e2 at this grid size.
        ref = solutions[("gmres", "block")]
        scale = np.linalg.norm(ref)
        for key, data in solutions.items():
            assert np.linalg.norm(data - ref) <= 100 * tol * scale, key

    def test_residual_contract_and_stats(self):
        grid = Grid((5, 5, 5), 0.2)
        rng = np.random.default_rng(41)
        m = random_unit(grid, rng)
        p = SpinParams(j_e=random_field(grid, rng))
        stats = {}
        tol = 1e-10
        s = solve_stationary_spin(m, p, tol=tol, stats=stats)
        system = assemble_spin_system(m, p)
        resid = norm_l2(vector_field(grid, system.apply(s) - system.b.data))
        assert resid <= tol * max(norm_l2(system.b), 1e-30)
        assert stats["iterations"] > 0
        assert stats["residual"] <= tol

    def test_convergence_failure_raises(self):
        grid = Grid((6, 6, 6), 1.0 / 6.0)
        rng = np.random.default_rng(43)
        m = random_unit(grid, rng)
        p = SpinParams(j_e=random_field(grid, rng))
        with pytest.raises(SolverConvergenceError) as err:
            solve_stationary_spin(m, p, tol=1e-13, maxiter=2, precond="none")
        assert err.value.residual > 0.0
        assert err.value.iterations >= 1

    def test_warm_start_converges_fast(self):
        grid = Grid((5, 5, 5), 0.2)
        rng = np.random.default_rng(47)
        m = random_unit(grid, rng)
        p = SpinParams(j_e=random_field(grid, rng))
        s = solve_stationary_spin(m, p, tol=1e-11)
        stats = {}
        s2 = solve_stationary_spin(m, p, tol=1e-11, warm_start=s, stats=stats)
        assert stats["iterations"] <= 3
        assert np.allclose(s2.data, s.data, atol=1e-9)

    def test_requires_unit_m(self):
        grid = Grid((3, 3, 3), 1.0 / 3.0)
        bad = constant_field(grid, (0.5, 0.0, 0.0))
        with pytest.raises(ValueError):
            solve_stationary_spin(bad, SpinParams())

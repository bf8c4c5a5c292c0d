"""Grid calculus: exactness on polynomials, adjointness, norm bookkeeping."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spindrift.grid import (
    FaceTensor,
    Grid,
    VectorField,
    boundary_flux,
    constant_field,
    divergence,
    gradient,
    inner_l2,
    laplacian,
    norm_h1,
    norm_l2,
    norm_spacetime,
    vector_field,
    zero_field,
)


def random_field(grid, rng):
    return vector_field(grid, rng.standard_normal((*grid.shape, 3)))


def random_face_tensor(grid, rng):
    F = FaceTensor(grid)
    F.x[:] = rng.standard_normal(F.x.shape)
    F.y[:] = rng.standard_normal(F.y.shape)
    F.z[:] = rng.standard_normal(F.z.shape)
    return F


class TestGrid:
    def test_centers_and_volume(self):
        g = Grid((2, 3, 1), 0.5, origin=(1.0, 0.0, -1.0))
        assert g.cell_volume == pytest.approx(0.125)
        centers = g.cell_centers()
        assert centers.shape == (2, 3, 1, 3)
        assert np.allclose(centers[:, 0, 0, 0], [1.25, 1.75])
        assert np.allclose(centers[0, :, 0, 1], [0.25, 0.75, 1.25])
        assert np.allclose(centers[0, 0, :, 2], [-0.75])
        assert g.extent == pytest.approx((1.0, 1.5, 0.5))

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            Grid((0, 2, 2), 0.5)
        with pytest.raises(ValueError):
            Grid((2, 2, 2), -1.0)

    def test_equality_is_structural(self):
        assert Grid((2, 2, 2), 0.5) == Grid((2, 2, 2), 0.5)
        assert Grid((2, 2, 2), 0.5) != Grid((2, 2, 2), 0.25)


class TestVectorField:
    def test_shape_validation(self):
        g = Grid((2, 2, 2), 0.5)
        with pytest.raises(ValueError):
            vector_field(g, np.zeros((2, 2, 3, 3)))

    def test_unit_flag_enforced(self):
        g = Grid((2, 2, 2), 0.5)
        data = np.full((2, 2, 2, 3), 0.9)
        with pytest.raises(ValueError):
            vector_field(g, data, unit=True)
        ok = data / np.linalg.norm(data, axis=-1, keepdims=True)
        vector_field(g, ok, unit=True)  # does not raise

    def test_normalized(self):
        g = Grid((2, 1, 1), 1.0)
        v = constant_field(g, (3.0, 4.0, 0.0)).normalized()
        assert np.allclose(v.data[..., :2], [0.6, 0.8])
        assert v.unit

    def test_arithmetic(self):
        g = Grid((2, 1, 1), 1.0)
        a = constant_field(g, (1.0, 2.0, 3.0))
        b = constant_field(g, (0.5, 0.5, 0.5))
        assert np.allclose((a + b).data[0, 0, 0], [1.5, 2.5, 3.5])
        assert np.allclose((a - b).data[0, 0, 0], [0.5, 1.5, 2.5])
        assert np.allclose((2.0 * a).data[0, 0, 0], [2.0, 4.0, 6.0])

    def test_grid_mismatch_rejected(self):
        a = constant_field(Grid((2, 1, 1), 1.0), (1.0, 0.0, 0.0))
        b = constant_field(Grid((3, 1, 1), 1.0), (1.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            _ = a + b
        with pytest.raises(ValueError):
            inner_l2(a, b)


class TestCalculus:
    def test_gradient_exact_on_linear_fields(self):
        # v_c(x) = sum_a B[a, c] x_a has face differences exactly B[a, :].
        g = Grid((4, 3, 5), 0.3, origin=(0.2, -0.1, 0.0))
        B = np.array([[1.0, -2.0, 0.5], [0.0, 3.0, 1.0], [-1.0, 0.25, 2.0]])
        v = vector_field(g, g.cell_centers() @ B)
        G = gradient(v)
        for a in range(3):
            arr = G.axis(a)
            interior = [slice(None)] * 3
            interior[a] = slice(1, -1)
            got = arr[tuple(interior)]
            assert np.allclose(got[..., a, :], B[a], atol=1e-12)
            other = [r for r in range(3) if r != a]
            assert np.all(got[..., other, :] == 0.0)
            boundary = [slice(None)] * 3
            boundary[a] = [0, -1]
            assert np.all(arr[tuple(boundary)] == 0.0)

    def test_divergence_of_constant_tensor_vanishes(self):
        g = Grid((3, 4, 2), 0.5)
        F = FaceTensor(g)
        M = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])
        for arr in (F.x, F.y, F.z):
            arr[:] = M
        assert np.all(divergence(F).data == 0.0)

    def test_summation_by_parts(self):
        # <div F, phi> = boundary term - h^3 sum_faces grad(phi) : F
        g = Grid((4, 3, 5), 0.25)
        rng = np.random.default_rng(2)
        for _ in range(5):
            F = random_face_tensor(g, rng)
            phi = random_field(g, rng)
            G = gradient(phi)
            contraction = sum(
                float(np.sum(G.axis(a) * F.axis(a))) for a in range(3)
            )
            lhs = inner_l2(divergence(F), phi)
            rhs = boundary_flux(F, phi) - g.cell_volume * contraction
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_laplacian_of_constant_is_zero(self):
        g = Grid((4, 4, 4), 0.25)
        v = constant_field(g, (0.3, -0.7, 1.1))
        assert np.all(laplacian(v).data == 0.0)

    def test_laplacian_matches_gradient_divergence_chain(self):
        g = Grid((5, 4, 3), 0.2)
        rng = np.random.default_rng(3)
        v = random_field(g, rng)
        chain = divergence(gradient(v))
        direct = laplacian(v)
        assert np.allclose(direct.data, chain.data, atol=1e-13)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_laplacian_self_adjoint_negative(self, seed):
        g = Grid((4, 3, 3), 0.3)
        rng = np.random.default_rng(seed)
        u, v = random_field(g, rng), random_field(g, rng)
        lu, lv = laplacian(u), laplacian(v)
        a, b = inner_l2(lu, v), inner_l2(u, lv)
        assert a == pytest.approx(b, rel=1e-11, abs=1e-13)
        assert inner_l2(lu, u) <= 1e-12 * norm_l2(u) ** 2


class TestNorms:
    def test_l2_hand_value(self):
        g = Grid((2, 2, 2), 0.5)  # total volume 1
        v = constant_field(g, (1.0, 2.0, 2.0))  # |v| = 3 everywhere
        assert norm_l2(v) == pytest.approx(3.0, rel=1e-14)

    def test_h1_constant_equals_l2(self):
        g = Grid((3, 3, 3), 0.1)
        v = constant_field(g, (0.0, 1.0, 0.0))
        assert norm_h1(v) == pytest.approx(norm_l2(v), rel=1e-14)

    def test_h1_two_cell_hand_value(self):
        g = Grid((2, 1, 1), 1.0)
        v = vector_field(g, np.array([[[[1.0, 0, 0]]], [[[0.0, 0, 0]]]]))
        # ||v||^2 = 1, |grad|^2 = h^3 * |(0-1)/1|^2 = 1
        assert norm_h1(v) == pytest.approx(np.sqrt(2.0), rel=1e-14)

    def test_spacetime_rectangle_rule(self):
        g = Grid((1, 1, 1), 1.0)
        fields = [constant_field(g, (x, 0.0, 0.0)) for x in (1.0, 2.0, 2.0)]
        # dt * (1 + 4 + 4) = 0.9
        assert norm_spacetime(fields, 0.1) == pytest.approx(np.sqrt(0.9), rel=1e-14)
        with pytest.raises(ValueError):
            norm_spacetime(fields, 0.0)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_inner_product_bilinear_symmetric(self, seed):
        g = Grid((3, 2, 4), 0.4)
        rng = np.random.default_rng(seed)
        u, v, w = (random_field(g, rng) for _ in range(3))
        lam = float(rng.standard_normal())
        assert inner_l2(u, v) == pytest.approx(inner_l2(v, u), rel=1e-12, abs=1e-12)
        left = inner_l2(u + lam * w, v)
        right = inner_l2(u, v) + lam * inner_l2(w, v)
        assert left == pytest.approx(right, rel=1e-10, abs=1e-10)

    def test_zero_field(self):
        g = Grid((2, 2, 2), 1.0)
        assert norm_l2(zero_field(g)) == 0.0

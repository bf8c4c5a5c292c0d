"""Demagnetizing (stray) field as an exact lattice convolution.

The magnetostatic potential solves a Poisson problem driven by div(m) over
the magnetized box; its gradient is the stray field h_d. For piecewise
constant m on a uniform grid this solution operator is exactly a discrete
convolution with a geometry-only tensor kernel N:

    h_d(cell i) = - sum_j N(i - j) . m(cell j),

where N(r) is the pair of cell-averaged second derivatives of the Newtonian
potential between two cubic cells at lattice offset r. Each N(r) is
symmetric; the self-term has trace 1 (cube: exactly I/3) and off-center
terms are traceless. At large offsets N(r) tends to the point-dipole tensor
(I - 3 r_hat x r_hat) * vol / (4 pi |r|^3).

The kernel is evaluated with the classical analytic antiderivatives
(``newell_f`` for diagonal entries, ``newell_g`` for off-diagonal ones)
combined by triple second differences. The convolution runs on a grid
zero-padded to twice the size per axis, which makes the circular FFT
product equal to the linear (non-wrapping) sum; wrapping would break the
negative-semidefiniteness of the operator.

As an operator on fields, h_d is self-adjoint and satisfies
0 <= -<h_d[m], m> <= ||m||^2, both of which are asserted by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
from numpy.typing import NDArray

from ._threads import get_threads
from .grid import Grid, VectorField, _check_same_grid

__all__ = ["DemagKernel", "newell_f", "newell_g", "build_kernel", "apply_demag", "apply_demag_direct"]

# Guard added to denominators; all arguments are O(1) in cell units, so this
# only suppresses division by exact zero (the accompanying prefactor is then
# exactly zero as well).
_EPS = 1e-30

# Component order of the symmetric tensor storage.
_COMPONENTS = ("xx", "xy", "xz", "yy", "yz", "zz")


def newell_f(x: NDArray, y: NDArray, z: NDArray) -> NDArray[np.float64]:
    """Antiderivative for the diagonal kernel entries (x is the special axis)."""
    x = np.abs(x)
    y = np.abs(y)
    z = np.abs(z)
    r = np.sqrt(x * x + y * y + z * z)
    out = y / 2.0 * (z * z - x * x) * np.arcsinh(y / (np.sqrt(x * x + z * z) + _EPS))
    out += z / 2.0 * (y * y - x * x) * np.arcsinh(z / (np.sqrt(x * x + y * y) + _EPS))
    out -= x * y * z * np.arctan(y * z / (x * r + _EPS))
    out += (2.0 * x * x - y * y - z * z) * r / 6.0
    return out


def newell_g(x: NDArray, y: NDArray, z: NDArray) -> NDArray[np.float64]:
    """Antiderivative for the off-diagonal kernel entries (xy pair, z axis odd-free)."""
    z = np.abs(z)
    r = np.sqrt(x * x + y * y + z * z)
    out = x * y * z * np.arcsinh(z / (np.sqrt(x * x + y * y) + _EPS))
    out += y / 6.0 * (3.0 * z * z - y * y) * np.arcsinh(x / (np.sqrt(y * y + z * z) + _EPS))
    out += x / 6.0 * (3.0 * z * z - x * x) * np.arcsinh(y / (np.sqrt(x * x + z * z) + _EPS))
    out -= z ** 3 / 6.0 * np.arctan(x * y / (z * r + _EPS))
    out -= z * y * y / 2.0 * np.arctan(x * z / (y * r + _EPS))
    out -= z * x * x / 2.0 * np.arctan(y * z / (x * r + _EPS))
    out -= x * y * r / 3.0
    return out


# Second-difference weights per axis; the tensor entry at offset R is
# -(1/4pi) * D2x D2y D2z F evaluated at R (unit cells), with F = f or g in
# the axis permutation appropriate for the entry.
_W1 = np.array([1.0, -2.0, 1.0])


def _second_differences(func, X: NDArray, Y: NDArray, Z: NDArray) -> NDArray[np.float64]:
    total = np.zeros_like(X)
    for iu, wu in enumerate(_W1):
        for iv, wv in enumerate(_W1):
            for iw, ww in enumerate(_W1):
                w = wu * wv * ww
                total += w * func(X + (iu - 1), Y + (iv - 1), Z + (iw - 1))
    return -total / (4.0 * np.pi)


@dataclass(frozen=True)
class DemagKernel:
    """Immutable demag tensor on the padded offset lattice plus its FFT.

    ``tensor[..., c]`` holds component ``c`` (order xx, xy, xz, yy, yz, zz)
    at wrapped offsets: padded index t along an axis of n cells encodes the
    offset ``((t + n) mod 2n) - n``. ``tensor_fft`` caches the real FFT of
    each component over the padded axes.
    """

    grid: Grid
    tensor: NDArray[np.float64]
    tensor_fft: NDArray[np.complex128]
    pad_shape: tuple[int, int, int]

    def offset_matrix(self, dx: int, dy: int, dz: int) -> NDArray[np.float64]:
        """The symmetric 3x3 tensor at one lattice offset."""
        for d, n in zip((dx, dy, dz), self.grid.shape):
            if not -n < d < n:
                raise ValueError(f"offset {(dx, dy, dz)} outside kernel range for grid {self.grid.shape}")
        idx = tuple(d % (2 * n) for d, n in zip((dx, dy, dz), self.grid.shape))
        xx, xy, xz, yy, yz, zz = self.tensor[idx]
        return np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])


def build_kernel(grid: Grid) -> DemagKernel:
    """Evaluate the cell-averaged demag tensor for all offsets of ``grid``.

    The entries depend only on the offset in cell units (the tensor is
    dimensionless), so the evaluation uses unit cells regardless of h.
    """
    nx, ny, nz = grid.shape
    pad = (2 * nx, 2 * ny, 2 * nz)

    # Wrapped offsets: padded index t -> offset in [-n, n-1]; the unused
    # offset -n (never realized as i - j) is evaluated too and then zeroed.
    offs = [((np.arange(2 * n) + n) % (2 * n)) - n for n in (nx, ny, nz)]
    X, Y, Z = np.meshgrid(*(o.astype(np.float64) for o in offs), indexing="ij")

    tensor = np.zeros((*pad, 6))
    tensor[..., 0] = _second_differences(newell_f, X, Y, Z)
    tensor[..., 1] = _second_differences(newell_g, X, Y, Z)
    tensor[..., 2] = _second_differences(newell_g, X, Z, Y)
    tensor[..., 3] = _second_differences(newell_f, Y, X, Z)
    tensor[..., 4] = _second_differences(newell_g, Y, Z, X)
    tensor[..., 5] = _second_differences(newell_f, Z, Y, X)

    for a, n in enumerate((nx, ny, nz)):
        sl = [slice(None)] * 3
        sl[a] = n  # wrapped position of the unrealizable offset -n
        tensor[tuple(sl)] = 0.0

    tensor_fft = scipy.fft.rfftn(tensor, axes=(0, 1, 2), workers=get_threads())
    tensor.setflags(write=False)
    tensor_fft.setflags(write=False)
    return DemagKernel(grid=grid, tensor=tensor, tensor_fft=tensor_fft, pad_shape=pad)


# Index triples mapping the 6 stored components to full 3x3 rows.
_ROWS = ((0, 1, 2), (1, 3, 4), (2, 4, 5))


def apply_demag(kernel: DemagKernel, m: VectorField) -> VectorField:
    """Stray field h_d = -N * m via zero-padded FFT convolution.

    Scratch buffers are allocated per call; the kernel itself is never
    mutated, so concurrent calls are safe.
    """
    _check_same_grid(kernel.grid, m.grid, "apply_demag")
    nx, ny, nz = kernel.grid.shape
    pad = kernel.pad_shape
    workers = get_threads()

    m_pad = np.zeros((*pad, 3))
    m_pad[:nx, :ny, :nz, :] = m.data
    m_hat = scipy.fft.rfftn(m_pad, axes=(0, 1, 2), workers=workers)

    h_hat = np.empty_like(m_hat)
    for a in range(3):
        rows = _ROWS[a]
        h_hat[..., a] = -(
            kernel.tensor_fft[..., rows[0]] * m_hat[..., 0]
            + kernel.tensor_fft[..., rows[1]] * m_hat[..., 1]
            + kernel.tensor_fft[..., rows[2]] * m_hat[..., 2]
        )
    h_pad = scipy.fft.irfftn(h_hat, s=pad, axes=(0, 1, 2), workers=workers)
    return VectorField(m.grid, np.ascontiguousarray(h_pad[:nx, :ny, :nz, :]))


def apply_demag_direct(kernel: DemagKernel, m: VectorField) -> VectorField:
    """Reference O(N^2) summation of h_d = -N * m.

    Used by tests and ``validate`` to pin the FFT path; prohibitive beyond
    small grids.
    """
    _check_same_grid(kernel.grid, m.grid, "apply_demag_direct")
    nx, ny, nz = kernel.grid.shape
    out = np.zeros((*kernel.grid.shape, 3))
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                acc = np.zeros(3)
                for p in range(nx):
                    for q in range(ny):
                        for r in range(nz):
                            N = kernel.offset_matrix(i - p, j - q, k - r)
                            acc -= N @ m.data[p, q, r]
                out[i, j, k] = acc
    return VectorField(m.grid, out)

"""Cell-centered finite-volume grid, vector fields, and discrete calculus.

The domain is a box discretized into ``nx x ny x nz`` cubic cells of edge
length ``h``. Vector quantities (magnetization, spin accumulation) live at
cell centers; matrix-valued fluxes live on cell faces. The two discrete
operators provided here, ``gradient`` and ``divergence``, satisfy an exact
summation-by-parts identity,

    <divergence(F), phi> = boundary_flux(F, phi) - <F, gradient(phi)>,

which is the discrete counterpart of integrating div F against a test field
and is the backbone of every energy estimate in the physics modules.

Face-tensor convention: at a face whose normal is axis ``a``, entry
``[a, c]`` of the stored 3x3 matrix is the flux of vector component ``c``
through that face (for gradients, the one-sided difference of component
``c`` divided by h, placed in row ``a``). The divergence of component ``c``
over a cell sums the signed ``[a, c]`` entries of its six faces. Boundary
faces are created zero-filled; whichever physics module owns the boundary
condition writes them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "Grid",
    "VectorField",
    "FaceTensor",
    "vector_field",
    "constant_field",
    "zero_field",
    "gradient",
    "divergence",
    "laplacian",
    "boundary_flux",
    "inner_l2",
    "norm_l2",
    "norm_h1",
    "norm_spacetime",
]

#: Tolerance below which a field flagged ``unit`` is rejected.
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered box grid.

    Attributes:
        shape: number of cells per axis, ``(nx, ny, nz)``.
        h: isotropic cell edge length.
        origin: coordinates of the low corner of the box.
    """

    shape: tuple[int, int, int]
    h: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != 3 or any(n < 1 for n in shape):
            raise ValueError(f"grid shape must be three positive ints, got {self.shape}")
        if not self.h > 0:
            raise ValueError(f"cell size h must be positive, got {self.h}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @property
    def extent(self) -> tuple[float, float, float]:
        """Box side lengths."""
        return tuple(n * self.h for n in self.shape)  # type: ignore[return-value]

    def cell_centers(self) -> NDArray[np.float64]:
        """Cell-center coordinates, shape ``(nx, ny, nz, 3)``."""
        axes = [
            self.origin[a] + (np.arange(self.shape[a]) + 0.5) * self.h
            for a in range(3)
        ]
        x, y, z = np.meshgrid(*axes, indexing="ij")
        return np.stack([x, y, z], axis=-1)


def _check_same_grid(a: "Grid", b: "Grid", what: str) -> None:
    if a != b:
        raise ValueError(f"grid mismatch in {what}: {a.shape}/h={a.h} vs {b.shape}/h={b.h}")


@dataclass
class VectorField:
    """A 3-vector per cell, stored as an ``(nx, ny, nz, 3)`` float64 array.

    ``unit=True`` asserts that every cell vector has length 1 within
    ``UNIT_TOL``; constructors that renormalize set the flag themselves.
    """

    grid: Grid
    data: NDArray[np.float64]
    unit: bool = False

    def __post_init__(self) -> None:
        expected = (*self.grid.shape, 3)
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != expected:
            raise ValueError(f"field data shape {data.shape} does not match grid {expected}")
        self.data = data
        if self.unit:
            err = float(np.max(np.abs(np.linalg.norm(data, axis=-1) - 1.0)))
            if err > UNIT_TOL:
                raise ValueError(f"field flagged unit but max | |v|-1 | = {err:.3e} > {UNIT_TOL}")

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.data.copy(), unit=self.unit)

    def normalized(self) -> "VectorField":
        """Pointwise projection onto the unit sphere."""
        norms = np.linalg.norm(self.data, axis=-1, keepdims=True)
        if np.any(norms < 1e-300):
            raise ValueError("cannot normalize a field with a zero vector")
        return VectorField(self.grid, self.data / norms, unit=True)

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self.grid, other.grid, "field addition")
        return VectorField(self.grid, self.data + other.data)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self.grid, other.grid, "field subtraction")
        return VectorField(self.grid, self.data - other.data)

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField(self.grid, self.data * float(scalar))

    __rmul__ = __mul__


def vector_field(grid: Grid, data: NDArray, unit: bool = False) -> VectorField:
    """Wrap an array as a VectorField on ``grid``."""
    return VectorField(grid, np.array(data, dtype=np.float64), unit=unit)


def constant_field(grid: Grid, vec, unit: bool = False) -> VectorField:
    v = np.asarray(vec, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"constant vector must have shape (3,), got {v.shape}")
    data = np.broadcast_to(v, (*grid.shape, 3)).copy()
    return VectorField(grid, data, unit=unit)


def zero_field(grid: Grid) -> VectorField:
    return VectorField(grid, np.zeros((*grid.shape, 3)))


def _face_shapes(grid: Grid) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    nx, ny, nz = grid.shape
    return (
        (nx + 1, ny, nz, 3, 3),
        (nx, ny + 1, nz, 3, 3),
        (nx, ny, nz + 1, 3, 3),
    )


@dataclass
class FaceTensor:
    """A 3x3 matrix on every face (interior and boundary) of the grid.

    ``x[f, j, k]`` is the matrix at the x-face between cells ``f-1`` and
    ``f`` (faces 0 and nx lie on the boundary); likewise ``y`` and ``z``.
    See the module docstring for the row/column convention.
    """

    grid: Grid
    x: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]
    y: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]
    z: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        shapes = _face_shapes(self.grid)
        arrays = []
        for name, arr, shape in zip("xyz", (self.x, self.y, self.z), shapes):
            if arr is None:
                arr = np.zeros(shape)
            else:
                arr = np.asarray(arr, dtype=np.float64)
                if arr.shape != shape:
                    raise ValueError(f"face array {name} has shape {arr.shape}, expected {shape}")
            arrays.append(arr)
        self.x, self.y, self.z = arrays

    def axis(self, a: int) -> NDArray[np.float64]:
        return (self.x, self.y, self.z)[a]


def gradient(v: VectorField) -> FaceTensor:
    """One-sided face differences of ``v``; boundary faces stay zero.

    At an axis-``a`` interior face the matrix row ``a`` holds
    ``(v_high - v_low) / h`` and all other rows are zero, so the result
    represents the transposed-Jacobian convention (row = derivative axis,
    column = vector component).
    """
    g = v.grid
    h = g.h
    out = FaceTensor(g)
    for a, arr in enumerate((out.x, out.y, out.z)):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        diff = (v.data[tuple(hi)] - v.data[tuple(lo)]) / h
        interior = [slice(None)] * 3
        interior[a] = slice(1, -1)
        arr[(*interior, a, slice(None))] = diff
    return out


def divergence(F: FaceTensor) -> VectorField:
    """Per-cell signed face sum: component ``c`` gets (1/h) * sum of the
    ``[a, c]`` entries over the six faces (high faces +, low faces -).

    Boundary faces participate exactly as stored, so the caller's boundary
    condition enters the balance without modification.
    """
    g = F.grid
    h = g.h
    out = np.zeros((*g.shape, 3))
    for a in range(3):
        arr = F.axis(a)[..., a, :]
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        out += (arr[tuple(hi)] - arr[tuple(lo)]) / h
    return VectorField(g, out)


def laplacian(v: VectorField) -> VectorField:
    """Discrete Neumann (zero-flux) vector Laplacian.

    Equivalent to ``divergence(gradient(v))`` with the boundary faces left
    at zero, but computed with a direct 7-point stencil to avoid building
    face tensors in the hot path. The equivalence is pinned by a test.
    """
    g = v.grid
    h2 = g.h * g.h
    d = v.data
    out = np.zeros_like(d)
    for a in range(3):
        if g.shape[a] < 2:
            continue
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        diff = d[tuple(hi)] - d[tuple(lo)]
        out[tuple(lo)] += diff / h2
        out[tuple(hi)] -= diff / h2
    return VectorField(g, out)


def boundary_flux(F: FaceTensor, phi: VectorField) -> float:
    """Discrete boundary term of the summation-by-parts identity.

    Sums h^2 * phi(adjacent cell) . F_row(face) over all boundary faces,
    with outward orientation (+ on high faces, - on low faces).
    """
    _check_same_grid(F.grid, phi.grid, "boundary_flux")
    g = F.grid
    h2 = g.h * g.h
    total = 0.0
    for a in range(3):
        arr = F.axis(a)[..., a, :]
        lo_face = [slice(None)] * 3
        hi_face = [slice(None)] * 3
        lo_face[a] = 0
        hi_face[a] = -1
        lo_cell = [slice(None)] * 3
        hi_cell = [slice(None)] * 3
        lo_cell[a] = 0
        hi_cell[a] = -1
        total += h2 * float(np.sum(arr[tuple(hi_face)] * phi.data[tuple(hi_cell)]))
        total -= h2 * float(np.sum(arr[tuple(lo_face)] * phi.data[tuple(lo_cell)]))
    return total


def inner_l2(u: VectorField, v: VectorField) -> float:
    """L2 inner product: h^3 * sum over cells of u . v."""
    _check_same_grid(u.grid, v.grid, "inner_l2")
    return u.grid.cell_volume * float(np.sum(u.data * v.data))


def norm_l2(u: VectorField) -> float:
    return float(np.sqrt(u.grid.cell_volume * np.sum(u.data * u.data)))


def _grad_sq_sum(u: VectorField) -> float:
    """h^3 * sum over interior faces of |difference / h|^2."""
    g = u.grid
    total = 0.0
    for a in range(3):
        if g.shape[a] < 2:
            continue
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        diff = (u.data[tuple(hi)] - u.data[tuple(lo)]) / g.h
        total += float(np.sum(diff * diff))
    return g.cell_volume * total


def norm_h1(u: VectorField) -> float:
    """Discrete H1 norm: sqrt(||u||^2 + ||grad_h u||^2)."""
    return float(np.sqrt(norm_l2(u) ** 2 + _grad_sq_sum(u)))


def norm_spacetime(fields, dt: float) -> float:
    """Space-time L2 norm by the rectangle rule: sqrt(dt * sum ||u(t_n)||^2)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    total = sum(norm_l2(u) ** 2 for u in fields)
    return float(np.sqrt(dt * total))

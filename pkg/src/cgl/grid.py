"""Box discretization: Dirichlet Laplacian, gradients, inner products, I/O.

Interior nodes only; the boundary value is an implicit zero ghost layer.
The stencils form an exact discrete pair: with D the forward-difference
edge operator (boundary edges included), the 3/5-point Laplacian satisfies
-Delta_h = D^T D, so

    inner(-laplacian(u), v) == edge_inner(gradient(u), gradient(v))

holds to round-off for every complex field pair.  This identity, together
with the resulting real nonnegative inner(-Delta_h u, u), is what the
monotone structure of the evolution rests on; accuracy order is secondary.

All reductions go through np.sum on contiguous arrays (pairwise tree),
which is deterministic run-to-run, so ledgers reproduce byte-identically.

Snapshot file format (little-endian): magic "CGLF", version u32 (=1),
dim u32, n u32, h f64, then re/im f64 interleaved per node in
lexicographic order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

SNAPSHOT_MAGIC = b"CGLF"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIId")


@dataclass(frozen=True)
class Grid:
    """Uniform box grid: n interior nodes per axis, mesh width h = length/(n+1)."""

    dim: int
    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.n < 1:
            raise ValueError("need at least one interior node")
        if not self.length > 0.0:
            raise ValueError("box length must be positive")

    @property
    def h(self) -> float:
        return self.length / (self.n + 1)

    @property
    def size(self) -> int:
        return self.n ** self.dim

    def coords(self) -> np.ndarray:
        """Interior node coordinates along one axis."""
        return self.h * np.arange(1, self.n + 1)

    def eigenvalue(self, k) -> float:
        """Dirichlet eigenvalue of -laplacian for the sine mode k."""
        ks = (k,) if self.dim == 1 else tuple(k)
        h = self.h
        return sum(4.0 / h**2 * np.sin(ki * np.pi * h / (2.0 * self.length)) ** 2
                   for ki in ks)


@dataclass(frozen=True)
class Field:
    """Complex state on the interior nodes of a grid (flat, lexicographic)."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.shape != (self.grid.size,):
            raise ValueError(f"field size {v.shape} does not match grid size {self.grid.size}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @staticmethod
    def zero(grid: Grid) -> "Field":
        return Field(np.zeros(grid.size, dtype=complex), grid)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values, self.grid)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.values + other.values, self.grid)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.values - other.values, self.grid)

    def __rmul__(self, c) -> "Field":
        return Field(c * self.values, self.grid)


def _check_same_grid(u: Field, v: Field):
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")


def laplacian_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Array-level stencil application (used in solver hot loops)."""
    inv_h2 = 1.0 / grid.h**2
    if grid.dim == 1:
        out = -2.0 * values
        out[:-1] += values[1:]
        out[1:] += values[:-1]
        return out * inv_h2
    v = values.reshape(grid.n, grid.n)
    out = -4.0 * v
    out[:-1, :] += v[1:, :]
    out[1:, :] += v[:-1, :]
    out[:, :-1] += v[:, 1:]
    out[:, 1:] += v[:, :-1]
    return (out * inv_h2).ravel()


def laplacian(u: Field) -> Field:
    """Second-order Laplacian Delta_h u with zero Dirichlet ghosts (note sign)."""
    return Field(laplacian_values(u.values, u.grid), u.grid)


def gradient(u: Field) -> tuple:
    """Forward differences on edges, boundary edges included (zero ghosts).

    1D: one array of n+1 edge values.  2D: (x-edges (n+1, n), y-edges (n, n+1)).
    """
    g = u.grid
    inv_h = 1.0 / g.h
    if g.dim == 1:
        v = u.values
        gr = np.empty(g.n + 1, dtype=complex)
        gr[0] = v[0] * inv_h
        gr[1:-1] = (v[1:] - v[:-1]) * inv_h
        gr[-1] = -v[-1] * inv_h
        return (gr,)
    v = u.values.reshape(g.n, g.n)
    gx = np.empty((g.n + 1, g.n), dtype=complex)
    gx[0, :] = v[0, :] * inv_h
    gx[1:-1, :] = (v[1:, :] - v[:-1, :]) * inv_h
    gx[-1, :] = -v[-1, :] * inv_h
    gy = np.empty((g.n, g.n + 1), dtype=complex)
    gy[:, 0] = v[:, 0] * inv_h
    gy[:, 1:-1] = (v[:, 1:] - v[:, :-1]) * inv_h
    gy[:, -1] = -v[:, -1] * inv_h
    return (gx, gy)


def edge_inner(ga: tuple, gb: tuple, grid: Grid) -> complex:
    """Edge inner product sum(ga conj(gb)) h^dim over all edge arrays."""
    hd = grid.h ** grid.dim
    return hd * sum(complex(np.sum(a * np.conj(b))) for a, b in zip(ga, gb))


def grad_norm_sq(u: Field) -> float:
    """||grad_h u||^2, equal to Re inner(-laplacian(u), u) to round-off."""
    gr = gradient(u)
    hd = u.grid.h ** u.grid.dim
    return float(hd * sum(np.sum(np.abs(a) ** 2) for a in gr))


def inner(u: Field, v: Field) -> complex:
    """Full sesquilinear form sum(u conj(v)) h^dim; callers take Re as needed."""
    _check_same_grid(u, v)
    hd = u.grid.h ** u.grid.dim
    return complex(hd * np.sum(u.values * np.conj(v.values)))


def norm2(u: Field) -> float:
    hd = u.grid.h ** u.grid.dim
    return float(np.sqrt(hd * np.sum(np.abs(u.values) ** 2)))


def norm_q(u: Field, q: float) -> float:
    """Discrete L^q norm (sum |u|^q h^dim)^{1/q}, q >= 1."""
    if q < 1.0:
        raise ValueError("norm exponent must be >= 1")
    hd = u.grid.h ** u.grid.dim
    return float((hd * np.sum(np.abs(u.values) ** q)) ** (1.0 / q))


def sine_mode(grid: Grid, k, amplitude: complex = 1.0) -> Field:
    """Dirichlet eigenmode of the discrete Laplacian (product of sines)."""
    x = grid.coords()
    L = grid.length
    if grid.dim == 1:
        vals = np.sin(int(k) * np.pi * x / L).astype(complex)
    else:
        kx, ky = (int(k), int(k)) if np.isscalar(k) else (int(k[0]), int(k[1]))
        vals = np.outer(np.sin(kx * np.pi * x / L), np.sin(ky * np.pi * x / L)).ravel()
        vals = vals.astype(complex)
    return Field(amplitude * vals, grid)


def write_snapshot(u: Field, path) -> None:
    g = u.grid
    with open(path, "wb") as f:
        f.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, g.dim, g.n, g.h))
        data = np.empty(2 * g.size, dtype="<f8")
        data[0::2] = u.values.real
        data[1::2] = u.values.imag
        f.write(data.tobytes())


def read_snapshot(path) -> Field:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated snapshot header")
        magic, version, dim, n, h = _HEADER.unpack(header)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError("not a field snapshot file")
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        grid = Grid(dim=dim, n=n, length=h * (n + 1))
        raw = np.frombuffer(f.read(16 * grid.size), dtype="<f8")
        if raw.size != 2 * grid.size:
            raise ValueError("truncated snapshot payload")
        return Field(raw[0::2] + 1j * raw[1::2], grid)

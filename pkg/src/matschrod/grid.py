"""Truncated-box lattices, coefficient sampling, vector states, mixed norms.

The whole space is replaced by the box ``[-L, L]^d`` with zero values outside
(Dirichlet truncation).  A grid carries ``N`` interior nodes per axis with
spacing ``h = 2 L / (N + 1)``; interior node coordinates are
``x = -L + (i + 1) h`` for ``i = 0 .. N-1``, so the boundary planes ``x = -L``
and ``x = +L`` are lattice points holding the implicit zeros.

Grid functions are vector valued with ``m`` components per node.  Forward
differences are evaluated at *cell base corners*: the lattice points
``-L + p h`` with ``p = 0 .. N`` per axis, i.e. every lattice point except the
top face.  Diffusion coefficients are therefore sampled on the cell lattice
(``(N+1)^d`` points) while potentials are sampled at the interior nodes
(``N^d`` points).

The size-p norm of a vector grid function takes the Euclidean norm over
components first and the lattice p-norm (with cell weight ``h^d``) second:

    ||f||_p = ( sum_nodes h^d |f(x)|_2^p )^(1/p),      ||f||_oo = max |f(x)|_2.

Everything in this module is deterministic and immutable after construction;
instances can be shared freely between threads.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EllipticityWarning, GridMismatchError

__all__ = [
    "GridSpec",
    "DiffusionField",
    "PotentialField",
    "VectorState",
    "build_grid",
    "sample_fields",
    "mixed_norm",
    "smooth_bump",
    "smooth_bump_profile",
    "smooth_bump_slope",
    "axis_differences",
]

#: symmetry tolerance for sampled coefficient matrices (absolute, scaled by
#: the largest entry when that exceeds unit size)
SYMMETRY_ATOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a truncated box: dimension, half-width, resolution, components.

    Attributes:
        d: space dimension (1, 2 or 3).
        L: half-width of the box [-L, L]^d.
        N: number of interior nodes per axis (>= 2).
        m: number of state components per node (>= 1).
    """

    d: int
    L: float
    N: int
    m: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"box half-width must be positive and finite, got {self.L}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"need at least 2 interior nodes per axis, got {self.N}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"need at least one component, got {self.m}")

    @property
    def h(self) -> float:
        """Lattice spacing 2L/(N+1)."""
        return 2.0 * self.L / (self.N + 1)

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def n_nodes(self) -> int:
        return self.N**self.d

    @property
    def n_cells(self) -> int:
        return (self.N + 1) ** self.d

    @property
    def state_size(self) -> int:
        return self.m * self.n_nodes

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def axis_nodes(self) -> np.ndarray:
        """Interior node positions along one axis."""
        return -self.L + np.arange(1, self.N + 1) * self.h

    def node_coords(self) -> np.ndarray:
        """Coordinates of interior nodes, shape (n_nodes, d), C-ordered."""
        return self._lattice(self.axis_nodes())

    def cell_coords(self) -> np.ndarray:
        """Coordinates of cell base corners, shape (n_cells, d), C-ordered."""
        xs = -self.L + np.arange(self.N + 1) * self.h
        return self._lattice(xs)

    def _lattice(self, xs: np.ndarray) -> np.ndarray:
        grids = np.meshgrid(*([xs] * self.d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def nearest_node(self, point) -> int:
        """Flat index of the interior node closest to ``point``."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.d,):
            raise ValueError(f"expected a point in {self.d}-d, got shape {point.shape}")
        per_axis = np.clip(np.rint((point + self.L) / self.h) - 1, 0, self.N - 1).astype(int)
        return int(np.ravel_multi_index(tuple(per_axis), self.shape))


def build_grid(d: int, L: float, N: int, m: int) -> GridSpec:
    """Validate parameters and construct a GridSpec."""
    return GridSpec(d=d, L=float(L), N=int(N), m=int(m))


def _require_same_grid(*grids):
    first = grids[0]
    for other in grids[1:]:
        if other != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {other}")
    return first


def _coerce_matrix(value, size: int, what: str) -> np.ndarray:
    out = np.atleast_2d(np.asarray(value, dtype=float))
    if out.shape != (size, size):
        raise ValueError(f"{what} must evaluate to a {size}x{size} matrix, got shape {out.shape}")
    return out


def _check_symmetric(samples: np.ndarray, what: str) -> float:
    """Return the largest absolute asymmetry max |M - M^T| over all samples."""
    return float(np.abs(samples - samples.transpose(0, 2, 1)).max()) if samples.size else 0.0


class DiffusionField:
    """Symmetric diffusion samples on the cell lattice, with ellipticity bounds.

    Samples are symmetrized as (M + M^T)/2 before storage; inputs whose
    asymmetry exceeds the tolerance are rejected outright since nothing
    downstream can use a non-symmetric diffusion.  The measured extreme
    eigenvalues over all samples are exposed as ``ellipticity_lower`` and
    ``ellipticity_upper``; a non-positive lower bound only warns here and is
    turned into a hard error by form/operator assembly.
    """

    def __init__(self, grid: GridSpec, samples):
        samples = np.array(samples, dtype=float)
        if samples.shape != (grid.n_cells, grid.d, grid.d):
            raise ValueError(
                f"expected {(grid.n_cells, grid.d, grid.d)} diffusion samples, got {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("diffusion samples must be finite")
        asym = _check_symmetric(samples, "diffusion")
        scale = max(1.0, float(np.abs(samples).max()))
        if asym > SYMMETRY_ATOL * scale:
            raise ValueError(f"diffusion samples are not symmetric (max asymmetry {asym:.3e})")
        samples = 0.5 * (samples + samples.transpose(0, 2, 1))
        samples.setflags(write=False)
        self.grid = grid
        self.samples = samples
        eigs = np.linalg.eigvalsh(samples)
        self.ellipticity_lower = float(eigs[:, 0].min())
        self.ellipticity_upper = float(eigs[:, -1].max())
        off = samples.copy()
        idx = np.arange(grid.d)
        off[:, idx, idx] = 0.0
        self.diagonal = bool(np.abs(off).max() == 0.0) if grid.d > 1 else True
        if self.ellipticity_lower <= 0:
            warnings.warn(
                f"diffusion samples violate uniform ellipticity (lower bound "
                f"{self.ellipticity_lower:.3e})",
                EllipticityWarning,
                stacklevel=2,
            )


class PotentialField:
    """Potential samples V(x) at the interior nodes.

    Storage is always exactly symmetric ((M + M^T)/2); whether the *input*
    was symmetric to tolerance is recorded in ``symmetric_input`` and checked
    by operator assembly.  ``psd`` records whether the smallest eigenvalue
    over all nodes is >= -1e-10, and ``offdiag_max`` is the largest
    off-diagonal entry over all nodes and component pairs (0 when m == 1),
    the quantity whose sign decides positivity preservation of the semigroup.
    """

    def __init__(self, grid: GridSpec, samples):
        samples = np.array(samples, dtype=float)
        if samples.shape != (grid.n_nodes, grid.m, grid.m):
            raise ValueError(
                f"expected {(grid.n_nodes, grid.m, grid.m)} potential samples, got {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("potential samples must be finite (singular potentials are rejected)")
        asym = _check_symmetric(samples, "potential")
        scale = max(1.0, float(np.abs(samples).max()))
        self.symmetric_input = bool(asym <= SYMMETRY_ATOL * scale)
        samples = 0.5 * (samples + samples.transpose(0, 2, 1))
        samples.setflags(write=False)
        self.grid = grid
        self.samples = samples
        eigs = np.linalg.eigvalsh(samples)
        self.min_eigenvalue = float(eigs[:, 0].min())
        self.max_eigenvalue = float(eigs[:, -1].max())
        self.psd = bool(self.min_eigenvalue >= -1e-10)
        if grid.m > 1:
            off = samples.copy()
            idx = np.arange(grid.m)
            off[:, idx, idx] = -np.inf
            self.offdiag_max = float(off.max())
        else:
            self.offdiag_max = 0.0


def sample_fields(q_fn, v_fn, grid: GridSpec):
    """Sample diffusion and potential callables onto a grid.

    ``q_fn(x)`` must evaluate to a d x d matrix at cell base corners and
    ``v_fn(x)`` to an m x m matrix at interior nodes (scalars are accepted
    for the 1x1 case).  Sampling is deterministic: two calls with the same
    callables produce bit-identical fields.

    Returns:
        (DiffusionField, PotentialField)
    """
    qs = np.empty((grid.n_cells, grid.d, grid.d))
    for i, x in enumerate(grid.cell_coords()):
        qs[i] = _coerce_matrix(q_fn(x), grid.d, "diffusion callable")
    vs = np.empty((grid.n_nodes, grid.m, grid.m))
    for i, x in enumerate(grid.node_coords()):
        vs[i] = _coerce_matrix(v_fn(x), grid.m, "potential callable")
    return DiffusionField(grid, qs), PotentialField(grid, vs)


class VectorState:
    """An m-component grid function on the interior nodes, zero on the boundary.

    Values are stored as a read-only (m, n_nodes) float array; ``flat()``
    exposes the component-major vector of length m * N^d used by the
    assembled matrices.  Instances are immutable; arithmetic returns new
    states.
    """

    def __init__(self, grid: GridSpec, values):
        values = np.array(values, dtype=float)
        if values.size != grid.state_size:
            raise ValueError(f"expected {grid.state_size} values, got {values.size}")
        values = values.reshape(grid.m, grid.n_nodes)
        if not np.all(np.isfinite(values)):
            raise ValueError("state values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorState":
        return cls(grid, np.zeros((grid.m, grid.n_nodes)))

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "VectorState":
        """Sample ``fn(x) -> (m,) vector (or scalar when m == 1)`` at the nodes."""
        vals = np.empty((grid.n_nodes, grid.m))
        for i, x in enumerate(grid.node_coords()):
            v = np.atleast_1d(np.asarray(fn(x), dtype=float))
            if v.shape != (grid.m,):
                raise ValueError(f"state callable must return {grid.m} components, got {v.shape}")
            vals[i] = v
        return cls(grid, vals.T)

    @classmethod
    def impulse(cls, grid: GridSpec, node: int | None = None, vector=None) -> "VectorState":
        """Kronecker impulse: one node carries ``vector`` (default e_0), rest zero."""
        if node is None:
            node = grid.nearest_node(np.zeros(grid.d))
        if vector is None:
            vector = np.eye(grid.m)[0]
        vector = np.atleast_1d(np.asarray(vector, dtype=float))
        vals = np.zeros((grid.m, grid.n_nodes))
        vals[:, node] = vector
        return cls(grid, vals)

    @classmethod
    def random(cls, grid: GridSpec, rng: np.random.Generator, scale: float = 1.0) -> "VectorState":
        return cls(grid, scale * rng.standard_normal((grid.m, grid.n_nodes)))

    def flat(self) -> np.ndarray:
        """Component-major vector of length m * N^d (read-only view)."""
        return self.values.reshape(-1)

    def with_values(self, values) -> "VectorState":
        return VectorState(self.grid, values)

    def component_norms(self) -> np.ndarray:
        """Pointwise Euclidean norm over components, shape (n_nodes,)."""
        return np.sqrt((self.values**2).sum(axis=0))

    def __add__(self, other: "VectorState") -> "VectorState":
        _require_same_grid(self.grid, other.grid)
        return VectorState(self.grid, self.values + other.values)

    def __sub__(self, other: "VectorState") -> "VectorState":
        _require_same_grid(self.grid, other.grid)
        return VectorState(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "VectorState":
        return VectorState(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "VectorState":
        return VectorState(self.grid, -self.values)

    def __repr__(self):
        return f"VectorState(m={self.grid.m}, nodes={self.grid.n_nodes})"


def mixed_norm(state: VectorState, p) -> float:
    """Mixed norm: Euclidean over components, weighted lattice p-norm over nodes.

    ``p`` may be any real >= 1 or ``numpy.inf``.  With the node-counting
    probability measure these norms are non-decreasing in p; the raw norms
    satisfy ||f||_2 / vol^(1/2) <= ||f||_4 / vol^(1/4) <= ||f||_oo with
    vol = (N h)^d.
    """
    p = float(p)
    if p < 1:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    s = state.component_norms()
    top = float(s.max()) if s.size else 0.0
    if np.isinf(p):
        return top
    if top == 0.0:
        return 0.0
    # factor out the max to keep s**p away from overflow for large p
    return top * float((state.grid.cell_volume * ((s / top) ** p).sum()) ** (1.0 / p))


def smooth_bump_profile(r) -> np.ndarray:
    """Radial C^2 bump profile: 1 for r <= 1, 0 for r >= 2, quintic ramp between.

    On 1 < r < 2 the value is 1 - (6u^5 - 15u^4 + 10u^3) with u = r - 1,
    which matches value and first two derivatives at both seams.
    """
    r = np.abs(np.asarray(r, dtype=float))
    u = np.clip(r - 1.0, 0.0, 1.0)
    return 1.0 - (6.0 * u**5 - 15.0 * u**4 + 10.0 * u**3)


def smooth_bump_slope(r) -> np.ndarray:
    """Derivative of ``smooth_bump_profile(|r|)`` with respect to signed r."""
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    u = np.clip(a - 1.0, 0.0, 1.0)
    inside = (a > 1.0) & (a < 2.0)
    return np.where(inside, -30.0 * u**2 * (u - 1.0) ** 2 * np.sign(r), 0.0)


def smooth_bump(x) -> float:
    """Bump value at a point: ``smooth_bump_profile(|x|_2)`` for x in R^d."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(smooth_bump_profile(np.linalg.norm(x)))


def axis_differences(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """Forward differences f(corner + h e_i) - f(corner) over all cells.

    ``values`` has shape (k, n_nodes) for any leading count k (states use
    k = m, scalar-derived fields like the pointwise modulus use k = 1); the
    implicit boundary zeros are added by padding, so boundary-touching
    half-edges are included.  Returns an array of raw differences (no 1/h)
    with shape (d, k, n_cells), cells enumerated like ``GridSpec.cell_coords``.
    """
    N, d = grid.N, grid.d
    values = np.asarray(values, dtype=float).reshape((-1,) + grid.shape)
    m = values.shape[0]
    padded = np.zeros((m,) + (N + 2,) * d)
    padded[(slice(None),) + (slice(1, N + 1),) * d] = values
    lo = (slice(0, N + 1),) * d
    out = np.empty((d, m, grid.n_cells))
    for i in range(d):
        hi = tuple(slice(1, None) if ax == i else slice(0, N + 1) for ax in range(d))
        diff = padded[(slice(None),) + hi] - padded[(slice(None),) + lo]
        out[i] = diff.reshape(m, -1)
    return out

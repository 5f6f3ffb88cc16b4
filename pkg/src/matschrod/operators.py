"""Sparse assembly of the operator and its low spectrum.

Two scalings live side by side and must not be confused:

* the *form matrix* S satisfies <S f, g> = a(f, g) exactly (it carries the
  h^d quadrature weight), and
* the *generator* B = S / h^d is the matrix of the second-order operator in
  the h-weighted inner product; its eigenvalues are the physically scaled
  ones (e.g. (4/h^2) sin^2(k pi / (2(N+1))) for the 1-d free case, or the
  odd integers for the harmonic oscillator).

Reported spectra and semigroup propagation always use B; quadratic-form
identities always use S.  Since the mass weight is a scalar multiple of the
identity the two share eigenvectors.

Assembly accumulates only the lower triangle and mirrors it afterwards
(S = L + L^T - diag L), which keeps S exactly symmetric in its stored
entries — no floating-point symmetrization is ever applied.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .errors import ConvergenceError
from .form import FormAssembly, assemble_form
from .grid import DiffusionField, GridSpec, PotentialField, _require_same_grid

__all__ = [
    "SymmetricOperator",
    "SpectrumReport",
    "SandwichReport",
    "assemble_operator",
    "eigen_lowest",
    "pointwise_extremal_eigs",
    "sandwich_check",
]

#: largest matrix dimension handled by the dense eigensolver / propagator
DENSE_LIMIT = 3000


def _stiffness_lower_entries(grid: GridSpec, qcells: np.ndarray):
    """COO entries (lower triangle incl. diagonal) of the scalar stiffness.

    The quadratic form per cell is h^(d-2) sum_{i,j} Q_ij (f(b+e_i) - f(b))
    (f(b+e_j) - f(b)); expanding gives four index pairs per (i, j).  Entries
    whose row index is below the column index are dropped — their mirror
    twins carry bit-identical values because Q is stored symmetric — and
    endpoints on the boundary are dropped against the implicit zeros.
    """
    N, d, h = grid.N, grid.d, grid.h
    base = np.indices((N + 1,) * d).reshape(d, -1)  # padded coords of cell corners

    def node_index(coords):
        valid = np.all((coords >= 1) & (coords <= N), axis=0)
        clipped = np.clip(coords, 1, N) - 1
        return np.ravel_multi_index(tuple(clipped), grid.shape), valid

    rows, cols, vals = [], [], []
    shifts = np.eye(d, dtype=int)[:, :, None]
    for i in range(d):
        for j in range(d):
            w = h ** (d - 2) * qcells[:, i, j]
            ends_i = ((base + shifts[i], 1.0), (base, -1.0))
            ends_j = ((base + shifts[j], 1.0), (base, -1.0))
            for pa, sa in ends_i:
                for pb, sb in ends_j:
                    r, ok_r = node_index(pa)
                    c, ok_c = node_index(pb)
                    keep = ok_r & ok_c & (r >= c)
                    rows.append(r[keep])
                    cols.append(c[keep])
                    vals.append((sa * sb) * w[keep])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


class SymmetricOperator:
    """Assembled sparse form matrix plus coefficient metadata.

    ``matrix`` is the form matrix S (CSR, exactly symmetric); ``generator()``
    returns B = S / h^d.  The dense eigendecomposition of B is cached lazily
    for repeated propagation at dimensions <= DENSE_LIMIT.
    """

    def __init__(
        self,
        matrix: sparse.csr_matrix,
        grid: GridSpec,
        *,
        ellipticity_lower: float,
        ellipticity_upper: float,
        q_diagonal: bool,
        potential_psd: bool,
        potential_offdiag_max: float,
    ):
        self.matrix = matrix
        self.grid = grid
        self.ellipticity_lower = ellipticity_lower
        self.ellipticity_upper = ellipticity_upper
        self.q_diagonal = q_diagonal
        self.potential_psd = potential_psd
        self.potential_offdiag_max = potential_offdiag_max
        self._generator = None
        self._dense_eig = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def generator(self) -> sparse.csr_matrix:
        if self._generator is None:
            self._generator = (self.matrix / self.grid.cell_volume).tocsr()
        return self._generator

    def generator_norm_bound(self) -> float:
        """Infinity norm of the generator, an upper bound for its 2-norm."""
        b = self.generator()
        return float(np.max(np.abs(b).sum(axis=1)))

    def dense_eig(self):
        """Cached full eigendecomposition (w, U) of the generator."""
        if self.dim > DENSE_LIMIT:
            raise ValueError(f"dense path limited to dimension {DENSE_LIMIT}, got {self.dim}")
        if self._dense_eig is None:
            self._dense_eig = scipy.linalg.eigh(self.generator().toarray())
        return self._dense_eig


def assemble_operator(assembly: FormAssembly) -> SymmetricOperator:
    """Assemble the sparse form matrix S with <S f, g> = a(f, g).

    The diffusion block is the same scalar stiffness for every component;
    the potential contributes h^d V(x_a) coupling the components at each
    node.  Refuses potentials whose raw samples were not symmetric.
    """
    if not assembly.potential.symmetric_input:
        raise ValueError(
            "operator assembly needs a symmetric potential (the sampled input was not)"
        )
    grid = assembly.grid
    n, m = grid.n_nodes, grid.m
    kr, kc, kv = _stiffness_lower_entries(grid, assembly.diffusion.samples)
    rows = [kr + w * n for w in range(m)]
    cols = [kc + w * n for w in range(m)]
    vals = [kv] * m
    nodes = np.arange(n)
    vol = grid.cell_volume
    for i in range(m):
        for j in range(i + 1):
            rows.append(i * n + nodes)
            cols.append(j * n + nodes)
            vals.append(vol * assembly.potential.samples[:, i, j])
    lower = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m * n, m * n),
    ).tocsr()
    matrix = (lower + lower.T) - sparse.diags(lower.diagonal())
    return SymmetricOperator(
        matrix.tocsr(),
        grid,
        ellipticity_lower=assembly.ellipticity_lower,
        ellipticity_upper=assembly.ellipticity_upper,
        q_diagonal=assembly.q_diagonal,
        potential_psd=assembly.potential_psd,
        potential_offdiag_max=assembly.potential.offdiag_max,
    )


@dataclass
class SpectrumReport:
    """Lowest eigenvalues of the generator with a-posteriori residuals."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    method: str
    iterations: int
    tol: float
    matrix_norm: float
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "eigenvalue", "residual"])
            for k, (lam, res) in enumerate(zip(self.eigenvalues, self.residuals)):
                writer.writerow([k, repr(float(lam)), repr(float(res))])


def eigen_lowest(
    op: SymmetricOperator,
    k: int,
    tol: float = 1e-10,
    method: str = "auto",
    seed: int = 42,
) -> SpectrumReport:
    """The k smallest generator eigenvalues, sorted ascending with multiplicity.

    ``method`` is "dense" (direct solve, dimension <= DENSE_LIMIT), "lanczos"
    (shift-invert Lanczos at shift -1 with full reorthogonalization, start
    vector drawn from ``seed``), or "auto" which picks dense when the
    dimension permits.  Residuals ||B v - lambda v|| are measured against
    ``matrix_norm`` (the infinity norm of B); non-convergence raises
    ConvergenceError with the partial report attached.
    """
    if k < 1 or k > op.dim:
        raise ValueError(f"need 1 <= k <= {op.dim}, got {k}")
    if method == "auto":
        method = "dense" if op.dim <= DENSE_LIMIT else "lanczos"
    if method == "dense":
        return _eigen_dense(op, k, tol)
    if method == "lanczos":
        return _eigen_lanczos(op, k, tol, seed)
    raise ValueError(f"unknown eigensolver method {method!r}")


def _eigen_dense(op: SymmetricOperator, k: int, tol: float) -> SpectrumReport:
    if op.dim > DENSE_LIMIT:
        raise ValueError(f"dense path limited to dimension {DENSE_LIMIT}, got {op.dim}")
    b = op.generator()
    w, v = scipy.linalg.eigh(b.toarray(), subset_by_index=(0, k - 1))
    res = np.linalg.norm(b @ v - v * w, axis=0)
    return SpectrumReport(
        eigenvalues=w,
        residuals=res,
        method="dense",
        iterations=0,
        tol=tol,
        matrix_norm=op.generator_norm_bound(),
        eigenvectors=v,
    )


def _eigen_lanczos(op: SymmetricOperator, k: int, tol: float, seed: int) -> SpectrumReport:
    """Shift-invert Lanczos: largest eigenvalues of (B + I)^-1 <-> smallest of B.

    Full reorthogonalization against the whole basis every step (robustness
    over speed at these problem sizes); on breakdown the basis is continued
    with a fresh orthogonalized random direction.
    """
    b = op.generator()
    n = op.dim
    bnorm = op.generator_norm_bound()
    solve = spla.splu((b + sparse.identity(n, format="csr")).tocsc()).solve
    rng = np.random.default_rng(seed)
    max_dim = min(n, max(8 * k, 160))
    basis = np.empty((n, max_dim))
    alphas = np.empty(max_dim)
    betas = np.zeros(max_dim)

    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    report = None
    for j in range(max_dim):
        basis[:, j] = q
        w = solve(q)
        alphas[j] = q @ w
        # full reorthogonalization (two passes), subsumes the three-term recurrence
        for _ in range(2):
            w -= basis[:, : j + 1] @ (basis[:, : j + 1].T @ w)
        beta = np.linalg.norm(w)
        if beta <= 1e-14 * max(1.0, abs(alphas[0])):
            # invariant subspace found: continue with a fresh direction
            betas[j] = 0.0
            q = rng.standard_normal(n)
            for _ in range(2):
                q -= basis[:, : j + 1] @ (basis[:, : j + 1].T @ q)
            norm = np.linalg.norm(q)
            if norm == 0.0:
                break
            q = q / norm
        else:
            betas[j] = beta
            q = w / beta
        if j + 1 >= k and (j % 3 == 0 or j == max_dim - 1):
            report = _ritz_report(b, basis[:, : j + 1], alphas[: j + 1], betas[:j], k, tol, bnorm, j + 1)
            if np.all(report.residuals <= tol * bnorm):
                return report
    raise ConvergenceError(
        f"Lanczos did not converge to {k} eigenpairs within {max_dim} iterations",
        partial=report,
    )


def _ritz_report(b, basis, alphas, betas, k, tol, bnorm, iterations) -> SpectrumReport:
    tri = np.diag(alphas)
    if len(betas):
        tri += np.diag(betas, 1) + np.diag(betas, -1)
    theta, y = scipy.linalg.eigh(tri)
    # largest theta of (B + I)^-1 correspond to the smallest eigenvalues of B
    order = np.argsort(theta)[::-1][:k]
    theta = np.maximum(theta[order], 1e-300)
    lams = 1.0 / theta - 1.0
    vecs = basis @ y[:, order]
    vecs /= np.linalg.norm(vecs, axis=0)
    res = np.linalg.norm(b @ vecs - vecs * lams, axis=0)
    asc = np.argsort(lams)
    return SpectrumReport(
        eigenvalues=lams[asc],
        residuals=res[asc],
        method="lanczos",
        iterations=iterations,
        tol=tol,
        matrix_norm=bnorm,
        eigenvectors=vecs[:, asc],
    )


def pointwise_extremal_eigs(potential: PotentialField):
    """Smallest and largest eigenvalue of V(x) at every node.

    Returns (mu, nu), each shape (n_nodes,), computed by exact symmetric
    eigendecomposition of the stored samples.
    """
    eigs = np.linalg.eigvalsh(potential.samples)
    return eigs[:, 0].copy(), eigs[:, -1].copy()


@dataclass
class SandwichReport:
    """Scalar comparison spectra bracketing the vector spectrum index-wise."""

    eigenvalues: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    tol_rel: float
    passed: bool
    max_lower_violation: float
    max_upper_violation: float

    def margins(self):
        return self.eigenvalues - self.lower, self.upper - self.eigenvalues


def sandwich_check(
    diffusion: DiffusionField,
    potential: PotentialField,
    grid: GridSpec,
    k: int,
    tol_rel: float = 1e-8,
    method: str = "auto",
    seed: int = 42,
) -> SandwichReport:
    """Bracket the low spectrum by the extremal-eigenvalue scalar potentials.

    Builds the vector operator for V plus the two vector-diagonal operators
    with potentials mu(x) I and nu(x) I (mu/nu the pointwise smallest/largest
    eigenvalue of V) and checks, index by index with multiplicity,

        lambda_n(mu) - tol <= lambda_n(V) <= lambda_n(nu) + tol,

    with tol = tol_rel * (1 + |lambda_n(V)|).  The quadratic forms are
    ordered (mu <= V <= nu pointwise), so the bracketing is a min-max
    consequence on the shared space.  Requires a PSD potential.
    """
    _require_same_grid(grid, diffusion.grid, potential.grid)
    if not potential.psd:
        raise ValueError("sandwich comparison needs a PSD potential")
    mu, nu = pointwise_extremal_eigs(potential)
    eye = np.eye(grid.m)
    spectra = []
    for diag in (None, mu, nu):
        if diag is None:
            vfield = potential
        else:
            vfield = PotentialField(grid, diag[:, None, None] * eye[None, :, :])
        opr = assemble_operator(assemble_form(diffusion, vfield, grid))
        spectra.append(eigen_lowest(opr, k, method=method, seed=seed).eigenvalues)
    lam, lam_lo, lam_hi = spectra
    tol = tol_rel * (1.0 + np.abs(lam))
    lo_viol = float(np.max(lam_lo - lam))
    hi_viol = float(np.max(lam - lam_hi))
    passed = bool(np.all(lam_lo - tol <= lam) and np.all(lam <= lam_hi + tol))
    return SandwichReport(
        eigenvalues=lam,
        lower=lam_lo,
        upper=lam_hi,
        tol_rel=tol_rel,
        passed=passed,
        max_lower_violation=lo_viol,
        max_upper_violation=hi_viol,
    )

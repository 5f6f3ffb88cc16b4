"""The discrete energy form and its projection/inequality toolbox.

For diffusion Q and potential V the form reads

    a(f, g) = sum_cells h^d < Q(x_c) D_h f(x_c), D_h g(x_c) >   (per component)
            + sum_nodes h^d < V(x_a) f(x_a), g(x_a) >,

where ``D_h`` is the forward-difference gradient at the cell base corner and
Q is evaluated there.  The associated graph norm uses the *unweighted*
gradient,

    ||f||_form = ( ||f||_2^2 + sum_j ||D_h f_j||_2^2 + <V f, f> )^(1/2),

so that |a(f, g)| <= (1 + eta_2) ||f||_form ||g||_form whenever V is positive
semidefinite, with eta_2 the measured upper ellipticity bound.

Two structural inequalities drive everything else and hold *per edge* when Q
is diagonal (each cell/axis pair contributes a nonnegative weight times the
squared Euclidean jump of the full component vector):

* projection onto the pointwise unit ball is a form contraction, and
* the positive/negative parts of a state have non-positive cross energy
  whenever the potential's off-diagonal entries are <= 0.

For non-diagonal Q the cross terms break the edge decomposition, so the
corresponding helpers refuse to certify anything unless explicitly asked for
an informational value.
"""
from __future__ import annotations

import numpy as np

from .errors import EllipticityError, GuaranteeUnavailableError
from .grid import (
    DiffusionField,
    GridSpec,
    PotentialField,
    VectorState,
    _require_same_grid,
    axis_differences,
    mixed_norm,
)

__all__ = [
    "FormAssembly",
    "assemble_form",
    "eval_form",
    "form_norm",
    "project_unit_ball",
    "split_pos_neg",
    "abs_field",
    "beurling_denny_gap",
    "pos_form_cross",
    "continuity_ratio",
    "edge_jump_norms",
]


class FormAssembly:
    """Grid, sampled coefficients and the quadrature weights of the form.

    Exposes the two quadratic pieces separately so that the graph norm (which
    needs the unweighted gradient term) and the full form share one code
    path.  Immutable; evaluation is thread-safe.
    """

    def __init__(self, diffusion: DiffusionField, potential: PotentialField, grid: GridSpec):
        _require_same_grid(grid, diffusion.grid, potential.grid)
        if diffusion.ellipticity_lower <= 0:
            raise EllipticityError(
                f"diffusion is not uniformly elliptic (lower bound "
                f"{diffusion.ellipticity_lower:.3e})"
            )
        self.grid = grid
        self.diffusion = diffusion
        self.potential = potential
        self.ellipticity_lower = diffusion.ellipticity_lower
        self.ellipticity_upper = diffusion.ellipticity_upper
        self.q_diagonal = diffusion.diagonal
        self.potential_psd = potential.psd

    # -- quadratic pieces ------------------------------------------------

    def gradients(self, state: VectorState) -> np.ndarray:
        """Forward-difference gradients, shape (d, m, n_cells)."""
        return axis_differences(self.grid, state.values) / self.grid.h

    def diffusion_energy(self, gf: np.ndarray, gg: np.ndarray, weighted: bool = True) -> float:
        """h^d sum_cells <Q Df, Dg> (weighted) or h^d sum_cells <Df, Dg>."""
        if weighted:
            val = np.einsum("acn,nab,bcn->", gf, self.diffusion.samples, gg)
        else:
            val = np.einsum("acn,acn->", gf, gg)
        return self.grid.cell_volume * float(val)

    def potential_energy(self, f: VectorState, g: VectorState) -> float:
        """h^d sum_nodes <V f, g>."""
        val = np.einsum("nij,in,jn->", self.potential.samples, f.values, g.values)
        return self.grid.cell_volume * float(val)


def assemble_form(diffusion: DiffusionField, potential: PotentialField, grid: GridSpec) -> FormAssembly:
    """Bind sampled coefficients to their grid as an evaluable energy form."""
    return FormAssembly(diffusion, potential, grid)


def eval_form(assembly: FormAssembly, f: VectorState, g: VectorState) -> float:
    """Evaluate a(f, g).  Symmetric in (f, g) because stored coefficients are."""
    _require_same_grid(assembly.grid, f.grid, g.grid)
    return assembly.diffusion_energy(assembly.gradients(f), assembly.gradients(g)) + \
        assembly.potential_energy(f, g)


def form_norm(assembly: FormAssembly, f: VectorState) -> float:
    """Graph norm (||f||_2^2 + sum_j ||D_h f_j||^2 + <V f, f>)^(1/2).

    The gradient term is unweighted (no Q); requires a positive semidefinite
    potential, otherwise the square root may not exist.
    """
    _require_same_grid(assembly.grid, f.grid)
    if not assembly.potential_psd:
        raise ValueError(
            f"graph norm needs a PSD potential (smallest eigenvalue "
            f"{assembly.potential.min_eigenvalue:.3e})"
        )
    gf = assembly.gradients(f)
    sq = (
        mixed_norm(f, 2) ** 2
        + assembly.diffusion_energy(gf, gf, weighted=False)
        + assembly.potential_energy(f, f)
    )
    return float(np.sqrt(max(sq, 0.0)))


def project_unit_ball(f: VectorState) -> VectorState:
    """Pointwise projection onto the closed unit ball of R^m.

    P f(x) = min(1, |f(x)|) * f(x)/|f(x)|, with 0 where f(x) = 0.  Idempotent,
    and 1-Lipschitz in the pointwise Euclidean norm, hence edge-jump
    contractive.
    """
    s = f.component_norms()
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(s > 0.0, np.minimum(1.0, s) / np.where(s > 0.0, s, 1.0), 0.0)
    return f.with_values(f.values * scale)


def split_pos_neg(f: VectorState):
    """Componentwise positive and negative parts, f = f_plus - f_minus."""
    return (
        f.with_values(np.maximum(f.values, 0.0)),
        f.with_values(np.maximum(-f.values, 0.0)),
    )


def abs_field(f: VectorState) -> np.ndarray:
    """Pointwise Euclidean modulus |f(x)|, shape (n_nodes,).

    Satisfies the reverse triangle inequality across every edge:
    | |f(b)| - |f(a)| | <= |f(b) - f(a)|, boundary half-edges included.
    """
    return f.component_norms()


def edge_jump_norms(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """Euclidean norm over components of the jump across each edge.

    ``values`` is (m, n_nodes) or (n_nodes,); returns shape (d, n_cells).
    Boundary half-edges (against the implicit zeros) are included.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    diffs = axis_differences(grid, values)
    return np.sqrt((diffs**2).sum(axis=1))


def _require_diagonal(assembly: FormAssembly, allow_nondiagonal: bool, what: str):
    if not assembly.q_diagonal and not allow_nondiagonal:
        raise GuaranteeUnavailableError(
            f"{what} is only guaranteed for diagonal diffusion; pass "
            f"allow_nondiagonal=True for an informational value"
        )


def beurling_denny_gap(assembly: FormAssembly, f: VectorState, allow_nondiagonal: bool = False) -> float:
    """a(f, f) - a(Pf, Pf) for the unit-ball projection P.

    Nonnegative (up to roundoff, -1e-12 * (1 + |a(f,f)|)) whenever Q is
    diagonal and V is PSD: the diffusion part contracts edge by edge and the
    potential part contracts node by node.  Refuses non-diagonal Q unless
    ``allow_nondiagonal`` — the value is then informational only.
    """
    _require_same_grid(assembly.grid, f.grid)
    _require_diagonal(assembly, allow_nondiagonal, "the projection contraction")
    if not assembly.potential_psd:
        raise ValueError("projection contraction needs a PSD potential")
    pf = project_unit_ball(f)
    return eval_form(assembly, f, f) - eval_form(assembly, pf, pf)


def pos_form_cross(assembly: FormAssembly, f: VectorState, allow_nondiagonal: bool = False) -> float:
    """Cross energy a(f_plus, f_minus) of the positive/negative parts.

    <= 0 (up to roundoff) when Q is diagonal and all off-diagonal potential
    entries are <= 0; its sign is what decides positivity preservation of
    the semigroup.
    """
    _require_same_grid(assembly.grid, f.grid)
    _require_diagonal(assembly, allow_nondiagonal, "the positive-part cross bound")
    if not assembly.potential.symmetric_input:
        raise ValueError("positive-part cross energy needs a symmetric potential")
    fp, fm = split_pos_neg(f)
    return eval_form(assembly, fp, fm)


def continuity_ratio(assembly: FormAssembly, f: VectorState, g: VectorState) -> float:
    """|a(f, g)| / (||f||_form ||g||_form), bounded by 1 + eta_2 for PSD V."""
    nf = form_norm(assembly, f)
    ng = form_norm(assembly, g)
    num = abs(eval_form(assembly, f, g))
    if nf == 0.0 or ng == 0.0:
        if num == 0.0:
            return 0.0
        raise ValueError("continuity ratio undefined: zero graph norm with nonzero pairing")
    return num / (nf * ng)

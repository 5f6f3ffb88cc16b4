"""Semigroup propagation e^{-tB} and measurement probes.

B is the (positive semidefinite, symmetric) generator of a
``SymmetricOperator``.  Three propagators are available:

* ``exact-dense`` — full eigendecomposition, cached on the operator, for
  dimensions <= 3000.  All property verdicts should use this when the size
  permits.
* ``lanczos-expmv`` — Krylov projection with full reorthogonalization and an
  a-posteriori residual bound: with basis V_k and tridiagonal T_k the defect
  of the Krylov approximation is beta_k |u_k(s)|, and for dissipative B the
  accumulated error is bounded by its time integral.  Substeps are halved
  until the per-step bound fits a proportional share of the budget
  tol * ||f0||; if a subspace size cannot make progress it is doubled, and
  after three sizes the propagator raises.
* ``crank-nicolson`` — fixed-step trapezoidal fallback, second order.  A
  cross-check only; positivity and contraction verdicts never rely on it
  (the rational step can undershoot/overshoot sign structure).

Probes record raw measurements (norm ratios, minimum components) together
with the verdict thresholds, so every verdict can be recomputed from the
stored numbers.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as spla
from scipy.integrate import simpson

from .errors import ConvergenceError
from .grid import VectorState, _require_same_grid, mixed_norm, smooth_bump_profile
from .operators import DENSE_LIMIT, SymmetricOperator

__all__ = [
    "PropagatorConfig",
    "ProbeReport",
    "propagate",
    "contraction_probe",
    "strong_continuity_probe",
    "positivity_probe",
    "violation_witness",
]

_METHODS = ("exact-dense", "lanczos-expmv", "crank-nicolson")
_P_ALLOWED = (1.0, 2.0, 4.0, np.inf)


@dataclass(frozen=True)
class PropagatorConfig:
    """How to propagate and what to measure."""

    method: str = "exact-dense"
    times: tuple = (0.01, 0.1, 1.0)
    krylov_dim: int = 30
    cn_steps: int = 256
    tol: float = 1e-10
    p_list: tuple = (1.0, 2.0, 4.0, np.inf)

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if any(t < 0 for t in self.times) or any(
            a >= b for a, b in zip(self.times, self.times[1:])
        ):
            raise ValueError(f"times must be nonnegative and strictly increasing, got {self.times}")
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")
        if self.cn_steps < 1:
            raise ValueError("cn_steps must be >= 1")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not self.p_list or any(p not in _P_ALLOWED for p in self.p_list):
            raise ValueError(f"p_list must be a nonempty subset of {{1, 2, 4, inf}}, got {self.p_list}")

    def conjugate_exponents(self) -> tuple:
        """Hoelder conjugates p' = p/(p-1), with 1 <-> inf."""
        out = []
        for p in self.p_list:
            if p == 1.0:
                out.append(np.inf)
            elif np.isinf(p):
                out.append(1.0)
            else:
                out.append(p / (p - 1.0))
        return tuple(out)


def default_config(op: SymmetricOperator, **kwargs) -> PropagatorConfig:
    """Exact-dense when the dimension permits, Krylov otherwise."""
    method = "exact-dense" if op.dim <= DENSE_LIMIT else "lanczos-expmv"
    return PropagatorConfig(method=method, **kwargs)


# -- propagators ---------------------------------------------------------


def propagate(op: SymmetricOperator, f0: VectorState, t: float, config: PropagatorConfig | None = None) -> VectorState:
    """Apply e^{-tB} to a state."""
    _require_same_grid(op.grid, f0.grid)
    t = float(t)
    if t < 0:
        raise ValueError(f"propagation time must be nonnegative, got {t}")
    if t == 0.0:
        return f0.with_values(f0.values)
    if config is None:
        config = default_config(op)
    x = f0.flat().copy()
    if config.method == "exact-dense":
        w, u = op.dense_eig()
        y = u @ (np.exp(-t * w) * (u.T @ x))
    elif config.method == "lanczos-expmv":
        y = _krylov_expm(op.generator(), x, t, config.krylov_dim, config.tol)
    else:
        y = _crank_nicolson(op.generator(), x, t, config.cn_steps)
    return f0.with_values(y)


def _lanczos_basis(b, v, kmax):
    """Orthonormal Krylov basis of (b, v) with full reorthogonalization.

    Returns (basis, alphas, betas, exact); ``exact`` means the subspace is
    invariant (happy breakdown), in which case the projected exponential is
    the exact one.  betas[-1] is the residual coupling to the next vector.
    """
    n = v.size
    basis = np.empty((n, kmax))
    alphas = np.empty(kmax)
    betas = np.empty(kmax)
    q = v / np.linalg.norm(v)
    used = 0
    exact = False
    for j in range(kmax):
        basis[:, j] = q
        w = b @ q
        alphas[j] = q @ w
        for _ in range(2):
            w -= basis[:, : j + 1] @ (basis[:, : j + 1].T @ w)
        beta = np.linalg.norm(w)
        betas[j] = beta
        used = j + 1
        if beta <= 1e-14 * max(1.0, abs(alphas[0])):
            exact = True
            break
        q = w / beta
    return basis[:, :used], alphas[:used], betas[:used], exact


def _krylov_step_error(lam, weights, last_row, beta_next, tau) -> float:
    """Integral bound beta_k int_0^tau |u_k(s)| ds for one Krylov substep."""
    s = np.linspace(0.0, tau, 33)
    u_last = (last_row * weights) @ np.exp(-np.outer(lam, s))
    # slight indefiniteness of T would let the defect amplify; cover it
    amp = float(np.exp(max(0.0, -lam.min()) * tau))
    return beta_next * float(simpson(np.abs(u_last), x=s)) * amp


def _krylov_expm(b, v, t, kdim, tol):
    """e^{-tB} v by adaptive-substep Lanczos; enlarges the subspace on failure."""
    norm0 = np.linalg.norm(v)
    if norm0 == 0.0:
        return v.copy()
    budget = tol * norm0
    for attempt, k in enumerate((kdim, 2 * kdim, 4 * kdim)):
        result = _krylov_expm_fixed(b, v, t, min(k, v.size), budget)
        if result is not None:
            return result
    raise ConvergenceError(
        f"Krylov propagator failed to meet tol={tol:g} after 3 subspace enlargements"
    )


def _krylov_expm_fixed(b, v, t, kdim, budget):
    w = v.copy()
    t_done = 0.0
    steps = 0
    while t_done < t:
        nv = np.linalg.norm(w)
        if nv == 0.0:
            return w
        basis, alphas, betas, exact = _lanczos_basis(b, w, kdim)
        k = len(alphas)
        tri = np.diag(alphas)
        if k > 1:
            tri += np.diag(betas[: k - 1], 1) + np.diag(betas[: k - 1], -1)
        lam, vecs = scipy.linalg.eigh(tri)
        weights = vecs[0] * nv
        beta_next = 0.0 if exact else betas[-1]
        tau = t - t_done
        while True:
            err = 0.0 if exact else _krylov_step_error(lam, weights, vecs[-1], beta_next, tau)
            if err <= budget * (tau / t):
                break
            if tau <= t * 1e-10:
                return None
            tau *= 0.5
        w = basis @ (vecs @ (np.exp(-tau * lam) * weights))
        t_done += tau
        steps += 1
        if steps > 512:
            return None
    return w


def _crank_nicolson(b, v, t, steps):
    delta = t / steps
    ident = sparse.identity(b.shape[0], format="csr")
    lhs = spla.splu((ident + (delta / 2.0) * b).tocsc())
    rhs = (ident - (delta / 2.0) * b).tocsr()
    w = v.copy()
    for _ in range(steps):
        w = lhs.solve(rhs @ w)
    return w


# -- probe reports -------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if np.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class ProbeReport:
    """Raw probe measurements plus the verdict derived from them.

    ``records`` is one dict per measurement; ``threshold`` is the slack used
    by the verdict so that ``recompute_verdict()`` can reproduce it from the
    stored numbers alone.
    """

    kind: str
    records: list
    verdict: str
    guaranteed: bool
    threshold: float
    witness: dict | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self, path):
        payload = _jsonable(
            {
                "kind": self.kind,
                "verdict": self.verdict,
                "guaranteed": self.guaranteed,
                "threshold": self.threshold,
                "witness": self.witness,
                "meta": self.meta,
                "records": self.records,
            }
        )
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path):
        if not self.records:
            with open(path, "w", newline="") as fh:
                fh.write("# empty probe report\n")
            return
        columns = list(self.records[0].keys())
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for rec in self.records:
                writer.writerow([_jsonable(rec.get(c)) for c in columns])

    def recompute_verdict(self) -> str:
        if self.kind == "contraction":
            ok = all(
                rec["ratio"] <= 1.0 + self.threshold
                for rec in self.records
                if rec["guaranteed"] and rec["ratio"] is not None
            )
            return "pass" if ok else "fail"
        if self.kind == "strong-continuity":
            return "pass" if all(r["interpolation_ok"] and r["trend_ok"] for r in self.records) else "fail"
        if self.kind == "positivity":
            floor = -self.threshold
            ok = all(rec["min_component"] >= floor for rec in self.records)
            return "positive" if ok else "violations"
        if self.kind == "violation-witness":
            return "violation-found" if self.witness is not None else "not-found"
        raise ValueError(f"unknown probe kind {self.kind!r}")


# -- probes --------------------------------------------------------------


def contraction_probe(op: SymmetricOperator, f_list, config: PropagatorConfig) -> ProbeReport:
    """Measure ||T(t) f||_p / ||f||_p over the configured times and exponents.

    Ratios are guaranteed <= 1 (up to 1e-8 slack) for p = 2 with a PSD
    potential, and additionally for p in {1, 4, inf} when the diffusion is
    diagonal (p = 4 by interpolation between 2 and inf).  Zero states are
    recorded but skipped.  The verdict covers the guaranteed records only;
    everything else is informational.
    """
    slack = 1e-8
    records = []
    for idx, f in enumerate(f_list):
        norms_in = {p: mixed_norm(f, p) for p in config.p_list}
        if norms_in[config.p_list[0]] == 0.0:
            for t in config.times:
                for p in config.p_list:
                    records.append(
                        {
                            "f_index": idx, "t": t, "p": p, "norm_in": 0.0,
                            "norm_out": 0.0, "ratio": None, "guaranteed": False,
                            "note": "zero input skipped",
                        }
                    )
            continue
        for t in config.times:
            gt = propagate(op, f, t, config)
            for p in config.p_list:
                guaranteed = op.potential_psd and (p == 2.0 or op.q_diagonal)
                records.append(
                    {
                        "f_index": idx, "t": t, "p": p, "norm_in": norms_in[p],
                        "norm_out": mixed_norm(gt, p),
                        "ratio": mixed_norm(gt, p) / norms_in[p],
                        "guaranteed": guaranteed, "note": "",
                    }
                )
    report = ProbeReport(
        kind="contraction",
        records=records,
        verdict="",
        guaranteed=op.potential_psd and op.q_diagonal,
        threshold=slack,
        meta={"times": list(config.times), "p_list": list(config.p_list),
              "conjugate_exponents": list(config.conjugate_exponents())},
    )
    report.verdict = report.recompute_verdict()
    return report


def strong_continuity_probe(
    op: SymmetricOperator,
    f: VectorState,
    t_list,
    p: float,
    config: PropagatorConfig | None = None,
) -> ProbeReport:
    """Check ||T(t)f - f||_p -> 0 with the two-norm interpolation bound.

    For p > 2 and theta = 2/p each time must satisfy

        ||T(t)f - f||_p <= 2^(1-theta) ||f||_oo^(1-theta) ||T(t)f - f||_2^theta,

    and the deviations must decrease (within slack) along the given times
    taken in decreasing order — pass a dyadic sequence to probe the t -> 0
    trend.
    """
    p = float(p)
    if p <= 2.0:
        raise ValueError(f"interpolation probe needs p > 2, got {p}")
    theta = 2.0 / p
    sup_f = mixed_norm(f, np.inf)
    slack = 1e-10 * (1.0 + sup_f)
    ts = sorted(float(t) for t in t_list)
    if any(t < 0 for t in ts):
        raise ValueError("times must be nonnegative")
    devs = []
    for t in ts:
        diff = propagate(op, f, t, config) - f
        devs.append((t, mixed_norm(diff, p), mixed_norm(diff, 2)))
    records = []
    prev_dev = None
    for t, dev_p, dev_2 in devs:
        bound = 2.0 ** (1.0 - theta) * sup_f ** (1.0 - theta) * dev_2**theta
        trend_ok = True if prev_dev is None else dev_p >= prev_dev - slack
        records.append(
            {
                "t": t, "p": p, "deviation_p": dev_p, "deviation_2": dev_2,
                "interpolation_bound": bound,
                "interpolation_ok": dev_p <= bound + 1e-12 * (1.0 + bound),
                "trend_ok": trend_ok,
            }
        )
        prev_dev = dev_p
    report = ProbeReport(
        kind="strong-continuity",
        records=records,
        verdict="",
        guaranteed=op.potential_psd and op.q_diagonal,
        threshold=slack,
        meta={"theta": theta, "sup_norm": sup_f},
    )
    report.verdict = report.recompute_verdict()
    return report


def positivity_probe(op: SymmetricOperator, vfield, f_list, t_list, config: PropagatorConfig | None = None) -> ProbeReport:
    """Propagate nonnegative states and track the minimum component.

    When every off-diagonal potential entry is <= 0 and the diffusion is
    diagonal, the generator has no positive off-diagonal entries and the
    propagated states stay nonnegative up to roundoff; the verdict then
    certifies the guarantee.  Otherwise the verdict reports the measurements
    only.  Negative inputs are rejected.
    """
    f_list = list(f_list)
    for idx, f in enumerate(f_list):
        if f.values.min() < 0:
            raise ValueError(f"positivity probe needs nonnegative states, f_list[{idx}] is not")
    scale = max((mixed_norm(f, np.inf) for f in f_list), default=0.0)
    threshold = 1e-10 * scale
    records = []
    for idx, f in enumerate(f_list):
        for t in t_list:
            gt = propagate(op, f, float(t), config)
            records.append(
                {"f_index": idx, "t": float(t), "min_component": float(gt.values.min())}
            )
    guaranteed = op.q_diagonal and vfield.offdiag_max <= 0.0
    report = ProbeReport(
        kind="positivity",
        records=records,
        verdict="",
        guaranteed=guaranteed,
        threshold=threshold,
        meta={"offdiag_max": vfield.offdiag_max, "q_diagonal": op.q_diagonal, "scale": scale},
    )
    report.verdict = report.recompute_verdict()
    return report


def violation_witness(
    op: SymmetricOperator,
    vfield,
    i: int,
    j: int,
    t_grid=None,
    delta_rel: float = 1e-8,
    config: PropagatorConfig | None = None,
) -> ProbeReport:
    """Hunt for loss of positivity caused by a positive coupling v_ij > 0.

    Starts from the nonnegative state f = bump * e_i centered where v_ij is
    most positive; to leading order the propagated j-th component there is
    -t v_ij(x) bump(x) < 0.  Sweeps a geometric time grid and returns the
    first (t, node) whose j-th component drops below -delta_rel * ||f||_oo.
    An unsuccessful sweep is reported explicitly, never silently.
    """
    m = op.grid.m
    if not (0 <= i < m and 0 <= j < m) or i == j:
        raise ValueError(f"need distinct component indices below {m}, got ({i}, {j})")
    coupling = vfield.samples[:, i, j]
    if coupling.max() <= 0.0:
        raise ValueError(f"no node carries a positive ({i},{j}) coupling; nothing to witness")
    center = op.grid.node_coords()[int(np.argmax(coupling))]
    radii = np.linalg.norm(op.grid.node_coords() - center, axis=1)
    values = np.zeros((m, op.grid.n_nodes))
    values[i] = smooth_bump_profile(radii)
    f = VectorState(op.grid, values)
    delta = delta_rel * mixed_norm(f, np.inf)
    if t_grid is None:
        t_grid = np.geomspace(1e-3, 1.0, 13)
    records = []
    witness = None
    for t in t_grid:
        gt = propagate(op, f, float(t), config)
        comp = gt.values[j]
        node = int(np.argmin(comp))
        records.append({"t": float(t), "min_component_j": float(comp[node]), "node": node})
        if witness is None and comp[node] <= -delta:
            witness = {
                "t": float(t),
                "node": node,
                "component": j,
                "value": float(comp[node]),
                "coords": op.grid.node_coords()[node].tolist(),
            }
            break
    report = ProbeReport(
        kind="violation-witness",
        records=records,
        verdict="",
        guaranteed=False,
        threshold=delta,
        witness=witness,
        meta={"i": i, "j": j, "center": center.tolist(), "delta_rel": delta_rel},
    )
    report.verdict = report.recompute_verdict()
    return report

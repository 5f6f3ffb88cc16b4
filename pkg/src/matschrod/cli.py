"""Experiment runner: config parsing, subcommand dispatch, report emission.

Usage:

    matschrod <assemble|spectrum|evolve|verify|gallery>
              [--config FILE] [--seed N] [--out DIR] [--key.path=value ...]

Configs are UTF-8 JSON over a fixed schema; unknown keys are rejected and
every run echoes the fully resolved configuration to
``resolved-config.json``, which can be re-ingested to reproduce the run
bit for bit (verdict files carry no timings).  Dotted flags override single
values, e.g. ``--grid.N=500`` or ``--coefficients.v.kind=harmonic``.

Exit codes: 0 all verdicts passed; 1 a verdict failed; 2 configuration
error; 3 solver failure (non-convergence, under-resolved quadrature).
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .checks import CHECKS, run_checks
from .errors import ConfigError, ConvergenceError, QuadratureError
from .form import assemble_form
from .gallery import (
    GALLERY,
    antisymmetric_continuity_demo,
    build_problem,
    list_gallery,
    spectrum_merge_check,
    validate_expected,
)
from .grid import VectorState, build_grid, mixed_norm, sample_fields, smooth_bump_profile
from .operators import assemble_operator, eigen_lowest, sandwich_check
from .semigroup import PropagatorConfig, _jsonable, default_config, propagate

__all__ = ["main", "run", "emit_plot_data", "DEFAULT_CONFIG"]

DEFAULT_CONFIG = {
    "seed": 42,
    "grid": {"d": 1, "L": 1.0, "N": 64, "m": 1},
    "coefficients": {
        "q": {"kind": "identity"},
        "v": {"kind": "zero"},
    },
    "solver": {"k": 10, "tol": 1e-10, "method": "auto", "sandwich": False},
    "propagator": {
        "method": "auto",
        "times": [0.01, 0.1, 1.0],
        "krylov_dim": 30,
        "cn_steps": 256,
        "tol": 1e-10,
        "p_list": [1, 2, 4, "inf"],
    },
    "probes": {"checks": None, "params": {}},
    "evolve": {"initial_state": {"kind": "bump", "width": 0.5, "component": None}},
    "gallery": {"name": None, "params": {}, "check": "validate", "k": 20, "tol_rel": 1e-8},
    "output": {"directory": "matschrod-out", "formats": ["json", "csv", "dat"]},
}

#: config subtrees whose keys depend on a "kind"/name and are validated
#: separately rather than against the defaults
_OPEN_PATHS = {
    "coefficients.q",
    "coefficients.v",
    "evolve.initial_state",
    "probes.params",
    "gallery.params",
}


# -- config plumbing ----------------------------------------------------------


def _is_open(path: str) -> bool:
    return any(path == p or path.startswith(p + ".") for p in _OPEN_PATHS)


def _merge(base: dict, override: dict, path: str = "") -> dict:
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            if _is_open(path or here):
                base[key] = copy.deepcopy(value)
                continue
            raise ConfigError(f"unknown config key {here!r}")
        if isinstance(base[key], dict) and isinstance(value, dict) and not _is_open(here):
            _merge(base[key], value, here)
        else:
            base[key] = copy.deepcopy(value)
    return base


def _set_by_path(config: dict, dotted: str, value):
    parts = dotted.split(".")
    node = config
    for depth, part in enumerate(parts[:-1]):
        here = ".".join(parts[: depth + 1])
        if part not in node:
            if _is_open(here):
                node[part] = {}
            else:
                raise ConfigError(f"unknown config key {here!r}")
        node = node[part]
        if not isinstance(node, dict):
            raise ConfigError(f"config key {here!r} is not a section")
    last = parts[-1]
    if last not in node and not _is_open(dotted) and not _is_open(".".join(parts[:-1])):
        raise ConfigError(f"unknown config key {dotted!r}")
    node[last] = value


def _parse_override_tokens(tokens: list) -> list:
    pairs = []
    for token in tokens:
        if not token.startswith("--") or "=" not in token:
            raise ConfigError(
                f"unrecognized argument {token!r} (overrides look like --grid.N=500)"
            )
        dotted, raw = token[2:].split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        pairs.append((dotted, value))
    return pairs


def _expect_keys(section: dict, allowed: set, path: str):
    if not isinstance(section, dict):
        raise ConfigError(f"config section {path!r} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)} in section {path!r}")


def _expect(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


_Q_KIND_KEYS = {
    "identity": set(),
    "scaled_identity": {"value"},
    "diagonal": {"entries"},
    "constant": {"matrix"},
}
_V_KIND_KEYS = {
    "zero": set(),
    "scaled_identity": {"value"},
    "constant": {"matrix"},
    "harmonic": {"scale"},
}
_STATE_KIND_KEYS = {
    "bump": {"width", "component"},
    "impulse": {"node", "component"},
    "random": {"scale"},
    "constant": {"vector"},
}


def _validate_kind_block(block: dict, kinds: dict, path: str) -> str:
    _expect_keys(block, set(block), path)  # shape check only; keys follow kind
    _expect("kind" in block, f"section {path!r} needs a 'kind'")
    kind = block["kind"]
    _expect(kind in kinds, f"{path}.kind must be one of {sorted(kinds)}, got {kind!r}")
    extra = set(block) - {"kind"} - kinds[kind]
    _expect(not extra, f"unknown keys {sorted(extra)} for {path}.kind={kind!r}")
    return kind


def _validate_config(config: dict):
    _expect_keys(config, set(DEFAULT_CONFIG), "")
    _expect(isinstance(config["seed"], int), "seed must be an integer")

    grid = config["grid"]
    _expect_keys(grid, {"d", "L", "N", "m"}, "grid")
    for key in ("d", "N", "m"):
        _expect(isinstance(grid[key], int), f"grid.{key} must be an integer")
    _expect(isinstance(grid["L"], (int, float)), "grid.L must be a number")

    coeff = config["coefficients"]
    _expect_keys(coeff, {"q", "v"}, "coefficients")
    _validate_kind_block(coeff["q"], _Q_KIND_KEYS, "coefficients.q")
    _validate_kind_block(coeff["v"], _V_KIND_KEYS, "coefficients.v")

    solver = config["solver"]
    _expect_keys(solver, {"k", "tol", "method", "sandwich"}, "solver")
    _expect(isinstance(solver["k"], int) and solver["k"] >= 1, "solver.k must be a positive integer")
    _expect(
        isinstance(solver["tol"], (int, float)) and solver["tol"] > 0,
        "solver.tol must be positive",
    )
    _expect(
        solver["method"] in ("auto", "dense", "lanczos"),
        "solver.method must be auto, dense or lanczos",
    )
    _expect(isinstance(solver["sandwich"], bool), "solver.sandwich must be a boolean")

    prop = config["propagator"]
    _expect_keys(
        prop, {"method", "times", "krylov_dim", "cn_steps", "tol", "p_list"}, "propagator"
    )
    _expect(
        prop["method"] in ("auto", "exact-dense", "lanczos-expmv", "crank-nicolson"),
        "propagator.method must be auto, exact-dense, lanczos-expmv or crank-nicolson",
    )
    _expect(
        isinstance(prop["times"], list)
        and prop["times"]
        and all(isinstance(t, (int, float)) for t in prop["times"]),
        "propagator.times must be a nonempty list of numbers",
    )
    _expect(
        isinstance(prop["p_list"], list)
        and all(p in (1, 2, 4, "inf") for p in prop["p_list"]),
        "propagator.p_list entries must be 1, 2, 4 or \"inf\"",
    )

    probes = config["probes"]
    _expect_keys(probes, {"checks", "params"}, "probes")
    if probes["checks"] is not None:
        _expect(isinstance(probes["checks"], list), "probes.checks must be a list or null")
        unknown = [c for c in probes["checks"] if c not in CHECKS]
        _expect(not unknown, f"unknown checks {unknown}; known: {sorted(CHECKS)}")
    _expect(isinstance(probes["params"], dict), "probes.params must be an object")

    evolve = config["evolve"]
    _expect_keys(evolve, {"initial_state"}, "evolve")
    _validate_kind_block(evolve["initial_state"], _STATE_KIND_KEYS, "evolve.initial_state")

    gallery = config["gallery"]
    _expect_keys(gallery, {"name", "params", "check", "k", "tol_rel"}, "gallery")
    _expect(
        gallery["check"] in ("validate", "merge"),
        "gallery.check must be validate or merge",
    )
    _expect(isinstance(gallery["params"], dict), "gallery.params must be an object")
    _expect(isinstance(gallery["k"], int) and gallery["k"] >= 1, "gallery.k must be a positive integer")

    output = config["output"]
    _expect_keys(output, {"directory", "formats"}, "output")
    _expect(
        isinstance(output["formats"], list)
        and all(f in ("json", "csv", "dat") for f in output["formats"]),
        "output.formats entries must be json, csv or dat",
    )


def resolve_config(config_path, overrides, seed=None, out=None) -> dict:
    """Defaults, then file config, then dotted overrides, then --seed/--out."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must contain a JSON object")
        _merge(config, loaded)
    for dotted, value in overrides:
        _set_by_path(config, dotted, value)
    if seed is not None:
        config["seed"] = seed
    if out is not None:
        config["output"]["directory"] = str(out)
    _validate_config(config)
    return config


# -- coefficient and state builders -------------------------------------------


def _q_callable(block: dict, d: int):
    kind = block["kind"]
    if kind == "identity":
        mat = np.eye(d)
    elif kind == "scaled_identity":
        value = float(block["value"])
        _expect(value > 0, "coefficients.q.value must be positive")
        mat = value * np.eye(d)
    elif kind == "diagonal":
        entries = np.asarray(block["entries"], dtype=float)
        _expect(entries.shape == (d,), f"coefficients.q.entries must have {d} entries")
        mat = np.diag(entries)
    else:  # constant
        mat = np.asarray(block["matrix"], dtype=float)
        _expect(mat.shape == (d, d), f"coefficients.q.matrix must be {d}x{d}")
    return lambda x: mat


def _v_callable(block: dict, m: int):
    kind = block["kind"]
    if kind == "zero":
        mat = np.zeros((m, m))
        return lambda x: mat
    if kind == "scaled_identity":
        mat = float(block["value"]) * np.eye(m)
        return lambda x: mat
    if kind == "constant":
        mat = np.asarray(block["matrix"], dtype=float)
        _expect(mat.shape == (m, m), f"coefficients.v.matrix must be {m}x{m}")
        return lambda x: mat
    scale = float(block["scale"])  # harmonic
    eye = np.eye(m)
    return lambda x: scale * float(x @ x) * eye


def _initial_state(block: dict, grid, seed: int) -> VectorState:
    kind = block["kind"]
    if kind == "bump":
        width = float(block.get("width", 0.5))
        _expect(width > 0, "evolve.initial_state.width must be positive")
        component = block.get("component")
        radii = np.linalg.norm(grid.node_coords(), axis=1) / (width * grid.L)
        profile = smooth_bump_profile(radii)
        values = np.zeros((grid.m, grid.n_nodes))
        if component is None:
            values[:] = profile
        else:
            _expect(
                isinstance(component, int) and 0 <= component < grid.m,
                f"evolve.initial_state.component must be an integer below {grid.m}",
            )
            values[component] = profile
        return VectorState(grid, values)
    if kind == "impulse":
        component = block.get("component", 0)
        _expect(
            isinstance(component, int) and 0 <= component < grid.m,
            f"evolve.initial_state.component must be an integer below {grid.m}",
        )
        node = block.get("node")
        if node is not None:
            _expect(
                isinstance(node, int) and 0 <= node < grid.n_nodes,
                f"evolve.initial_state.node must be an integer below {grid.n_nodes}",
            )
        return VectorState.impulse(grid, node, np.eye(grid.m)[component])
    if kind == "random":
        scale = float(block.get("scale", 1.0))
        return VectorState.random(grid, np.random.default_rng(seed), scale)
    vector = np.asarray(block["vector"], dtype=float)  # constant
    _expect(vector.shape == (grid.m,), f"evolve.initial_state.vector must have {grid.m} entries")
    return VectorState(grid, np.tile(vector[:, None], (1, grid.n_nodes)))


def _build_operator(config: dict):
    g = config["grid"]
    try:
        grid = build_grid(g["d"], g["L"], g["N"], g["m"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    q_fn = _q_callable(config["coefficients"]["q"], grid.d)
    v_fn = _v_callable(config["coefficients"]["v"], grid.m)
    diffusion, potential = sample_fields(q_fn, v_fn, grid)
    op = assemble_operator(assemble_form(diffusion, potential, grid))
    return grid, diffusion, potential, op


def _propagator_config(block: dict, op) -> PropagatorConfig:
    method = block["method"]
    if method == "auto":
        method = default_config(op).method
    p_list = tuple(np.inf if p == "inf" else float(p) for p in block["p_list"])
    return PropagatorConfig(
        method=method,
        times=tuple(block["times"]),
        krylov_dim=int(block["krylov_dim"]),
        cn_steps=int(block["cn_steps"]),
        tol=float(block["tol"]),
        p_list=p_list,
    )


# -- artifact emission ---------------------------------------------------------


def _write_json(payload, path: Path):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_verdicts(records: list, config: dict, subcommand: str, outdir: Path) -> bool:
    all_passed = all(rec["passed"] for rec in records)
    _write_json(
        {
            "subcommand": subcommand,
            "seed": config["seed"],
            "all_passed": all_passed,
            "records": records,
        },
        outdir / "verdicts.json",
    )
    return all_passed


def emit_plot_data(report, kind: str, path):
    """Write a columnar .dat file (# header naming the columns).

    Kinds: "sandwich" (index with the three eigenvalue series),
    "norm-traces" (t with one max-ratio column per exponent) and
    "continuity-ratios" (scale n with the ratio r_n).  Empty reports
    produce a header-only file.
    """
    path = Path(path)
    if kind == "sandwich":
        lines = ["# index lower_eigenvalue vector_eigenvalue upper_eigenvalue"]
        for n, (lo, lam, hi) in enumerate(zip(report.lower, report.eigenvalues, report.upper)):
            lines.append(f"{n} {float(lo)!r} {float(lam)!r} {float(hi)!r}")
    elif kind == "norm-traces":
        records = [rec for rec in report if rec.get("ratio") is not None]
        ps = sorted({rec["p"] for rec in records})
        ts = sorted({rec["t"] for rec in records})
        header = "# t " + " ".join(
            "max_ratio_p=" + ("inf" if np.isinf(p) else f"{p:g}") for p in ps
        )
        lines = [header.rstrip()]
        for t in ts:
            cells = [repr(float(t))]
            for p in ps:
                ratios = [rec["ratio"] for rec in records if rec["t"] == t and rec["p"] == p]
                cells.append(repr(max(ratios)))
            lines.append(" ".join(cells))
    elif kind == "continuity-ratios":
        lines = ["# n ratio"]
        for rec in report:
            lines.append(f"{rec['n']} {rec['ratio']!r}")
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    path.write_text("\n".join(lines) + "\n")


# -- subcommands ----------------------------------------------------------------


def _cmd_assemble(config: dict, outdir: Path) -> bool:
    grid, diffusion, potential, op = _build_operator(config)
    gap = op.matrix - op.matrix.T
    stats = {
        "dimension": op.dim,
        "nonzeros": int(op.matrix.nnz),
        "h": grid.h,
        "stored_symmetry_gap": float(np.abs(gap.data).max()) if gap.nnz else 0.0,
        "ellipticity_lower": op.ellipticity_lower,
        "ellipticity_upper": op.ellipticity_upper,
        "q_diagonal": op.q_diagonal,
        "potential_psd": op.potential_psd,
        "potential_offdiag_max": op.potential_offdiag_max,
        "generator_norm_bound": op.generator_norm_bound(),
    }
    return _write_verdicts(
        [{"name": "assemble", "passed": stats["stored_symmetry_gap"] == 0.0, "detail": stats}],
        config,
        "assemble",
        outdir,
    )


def _cmd_spectrum(config: dict, outdir: Path) -> bool:
    grid, diffusion, potential, op = _build_operator(config)
    solver = config["solver"]
    if solver["k"] > op.dim:
        raise ConfigError(f"solver.k={solver['k']} exceeds the matrix dimension {op.dim}")
    report = eigen_lowest(op, solver["k"], tol=solver["tol"], method=solver["method"], seed=config["seed"])
    formats = config["output"]["formats"]
    if "csv" in formats:
        report.to_csv(outdir / "spectrum.csv")
    records = [
        {
            "name": "spectrum",
            "passed": bool(np.all(report.residuals <= solver["tol"] * report.matrix_norm)),
            "detail": {
                "eigenvalues": report.eigenvalues.tolist(),
                "max_residual": float(report.residuals.max()),
                "matrix_norm": report.matrix_norm,
                "method": report.method,
            },
        }
    ]
    if solver["sandwich"]:
        if not potential.psd:
            raise ConfigError("solver.sandwich needs a PSD potential")
        srep = sandwich_check(
            diffusion, potential, grid, k=solver["k"], method=solver["method"], seed=config["seed"]
        )
        if "dat" in formats:
            emit_plot_data(srep, "sandwich", outdir / "sandwich.dat")
        records.append(
            {
                "name": "sandwich",
                "passed": srep.passed,
                "detail": {
                    "max_lower_violation": srep.max_lower_violation,
                    "max_upper_violation": srep.max_upper_violation,
                },
            }
        )
    return _write_verdicts(records, config, "spectrum", outdir)


def _cmd_evolve(config: dict, outdir: Path) -> bool:
    grid, diffusion, potential, op = _build_operator(config)
    prop = _propagator_config(config["propagator"], op)
    f0 = _initial_state(config["evolve"]["initial_state"], grid, config["seed"])
    norms_in = {p: mixed_norm(f0, p) for p in prop.p_list}
    formats = config["output"]["formats"]
    coords = grid.node_coords()
    trace = []
    snapshots = [(0.0, f0)]
    for t in prop.times:
        ft = propagate(op, f0, t, prop)
        snapshots.append((t, ft))
        for p in prop.p_list:
            ratio = mixed_norm(ft, p) / norms_in[p] if norms_in[p] > 0 else None
            trace.append(
                {
                    "t": t,
                    "p": p,
                    "norm_in": norms_in[p],
                    "norm_out": mixed_norm(ft, p),
                    "ratio": ratio,
                    "guaranteed": op.potential_psd and (p == 2.0 or op.q_diagonal),
                }
            )
    if "csv" in formats:
        with open(outdir / "probes.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "p", "norm_in", "norm_out", "ratio", "guaranteed"])
            for rec in trace:
                writer.writerow([_jsonable(rec[c]) for c in ("t", "p", "norm_in", "norm_out", "ratio", "guaranteed")])
        with open(outdir / "snapshots.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "node"] + [f"x{i}" for i in range(grid.d)] + ["component", "value"])
            for t, state in snapshots:
                for comp in range(grid.m):
                    for node in range(grid.n_nodes):
                        writer.writerow(
                            [_jsonable(t), node]
                            + [repr(float(c)) for c in coords[node]]
                            + [comp, repr(float(state.values[comp, node]))]
                        )
    if "dat" in formats:
        emit_plot_data(trace, "norm-traces", outdir / "norms.dat")
    guaranteed_bad = [
        rec for rec in trace if rec["guaranteed"] and rec["ratio"] is not None and rec["ratio"] > 1.0 + 1e-8
    ]
    records = [
        {
            "name": "evolve-contraction",
            "passed": not guaranteed_bad,
            "detail": {
                "method": prop.method,
                "violations": len(guaranteed_bad),
                "max_ratio": max((r["ratio"] for r in trace if r["ratio"] is not None), default=None),
            },
        }
    ]
    return _write_verdicts(records, config, "evolve", outdir)


def _cmd_verify(config: dict, outdir: Path) -> bool:
    results = run_checks(config["probes"]["checks"], config["probes"]["params"], config["seed"])
    if "csv" in config["output"]["formats"]:
        with open(outdir / "probes.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["check", "passed"])
            for res in results:
                writer.writerow([res.name, res.passed])
    return _write_verdicts(
        [res.verdict_record() for res in results], config, "verify", outdir
    )


def _cmd_gallery(config: dict, outdir: Path) -> bool:
    block = config["gallery"]
    formats = config["output"]["formats"]
    if block["name"] is None:
        _write_json(list_gallery(), outdir / "gallery.json")
        return _write_verdicts(
            [{"name": "gallery-list", "passed": True, "detail": {"problems": sorted(GALLERY)}}],
            config,
            "gallery",
            outdir,
        )
    try:
        problem = build_problem(block["name"], **block["params"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if block["check"] == "merge":
        report = spectrum_merge_check(
            problem, k=block["k"], tol_rel=block["tol_rel"], seed=config["seed"]
        )
        if "csv" in formats:
            report.to_csv(outdir / "merge.csv")
        records = [
            {
                "name": f"gallery-merge-{problem.name}",
                "passed": report.passed,
                "detail": {"k": report.k, "max_deviation": float(report.deviations.max())},
            }
        ]
        return _write_verdicts(records, config, "gallery", outdir)
    result = validate_expected(problem, seed=config["seed"])
    if "dat" in formats and "continuity_ratios" in result["claims"]:
        records = antisymmetric_continuity_demo(problem.expected["continuity_ratios"]["n_list"])
        emit_plot_data(records, "continuity-ratios", outdir / "continuity_ratios.dat")
    return _write_verdicts(
        [
            {
                "name": f"gallery-{problem.name}",
                "passed": result["passed"],
                "detail": result["claims"],
            }
        ],
        config,
        "gallery",
        outdir,
    )


_SUBCOMMANDS = {
    "assemble": _cmd_assemble,
    "spectrum": _cmd_spectrum,
    "evolve": _cmd_evolve,
    "verify": _cmd_verify,
    "gallery": _cmd_gallery,
}


def run(subcommand: str, config: dict) -> int:
    """Resolved-config entry point; returns the exit code."""
    outdir = Path(config["output"]["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(config, outdir / "resolved-config.json")
    all_passed = _SUBCOMMANDS[subcommand](config, outdir)
    return 0 if all_passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matschrod",
        description="discretized matrix Schroedinger operators: assembly, spectra, semigroups",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in (
        ("assemble", "assemble the operator and report matrix statistics"),
        ("spectrum", "compute the lowest eigenvalues (optionally with the sandwich brackets)"),
        ("evolve", "propagate an initial state and trace its mixed norms"),
        ("verify", "run the named theorem checks and write a verdict file"),
        ("gallery", "list built-in problems or validate one of them"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="seed overriding the config")
        p.add_argument("--out", default=None, help="output directory overriding the config")
        if name == "gallery":
            p.add_argument("--name", default=None, help="gallery problem name")
            p.add_argument("--check", default=None, choices=("validate", "merge"))
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args, leftover = parser.parse_known_args(argv)
    try:
        overrides = _parse_override_tokens(leftover)
        config = resolve_config(args.config, overrides, seed=args.seed, out=args.out)
        if args.subcommand == "gallery":
            if getattr(args, "name", None) is not None:
                config["gallery"]["name"] = args.name
            if getattr(args, "check", None) is not None:
                config["gallery"]["check"] = args.check
        return run(args.subcommand, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, QuadratureError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: simulate counts, reconstruct states, compare solvers,
and verify minimizer equivalence.

Every output document embeds the run manifest (command, inputs, seed, solver
settings, tool version), so a run can be reproduced byte-for-byte from its
output.  Exit codes are part of the contract:

    0   success (for `reconstruct --method mle`: first-order stationarity)
    1   verify-minima equivalence check failed
    2   unknown preset / malformed input document
    3   output path not writable
    4   measurement set not informationally complete (linear inversion)
    10  MLE run ended on a stagnation criterion, not stationarity
    11  every multistart run was discarded by the stationarity screen
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import (
    AllRunsFailedError,
    IncompleteMeasurementsError,
    SchemaError,
    TomographyError,
)
from .hermitian import eig_hermitian, pauli_basis, purity
from .inversion import linear_invert
from .likelihood import ObjectiveModel
from .measurement import (
    normalize,
    povm_preset,
    read_record,
    simulate_counts,
    write_json_atomic,
    write_record,
)
from .optimizers import (
    SOLVERS,
    StopConfig,
    StopReason,
    default_start,
    run_solver,
)
from .parameterize import all_sign_patterns
from .verify import equivalence_check, multistart

EXIT_OK = 0
EXIT_NOT_EQUIVALENT = 1
EXIT_SCHEMA = 2
EXIT_UNWRITABLE = 3
EXIT_INCOMPLETE = 4
EXIT_STAGNATION = 10
EXIT_ALL_RUNS_FAILED = 11


def _state_preset(name, dim):
    kets = {
        "H": np.array([1, 0], dtype=complex),
        "V": np.array([0, 1], dtype=complex),
        "D": np.array([1, 1], dtype=complex) / np.sqrt(2),
        "R": np.array([1, -1j], dtype=complex) / np.sqrt(2),
    }
    if name in kets:
        v = kets[name]
        rho = np.outer(v, v.conj())
    elif name == "mixed":
        rho = np.eye(dim, dtype=complex) / dim
    elif name == "bell":
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / np.sqrt(2)
        rho = np.outer(v, v.conj())
    else:
        return None
    if rho.shape[0] != dim:
        raise SchemaError(
            f"state preset {name!r} has dimension {rho.shape[0]}, POVM needs {dim}"
        )
    return rho


def _load_state(spec, dim):
    rho = _state_preset(spec, dim)
    if rho is not None:
        return rho
    try:
        with open(spec) as fh:
            doc = json.load(fh)
        rho = np.array([[complex(re, im) for re, im in row] for row in doc["matrix"]])
    except FileNotFoundError:
        raise SchemaError(f"unknown state preset or missing file: {spec!r}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed state file {spec!r}: {exc}") from exc
    if rho.shape != (dim, dim):
        raise SchemaError(f"state matrix is {rho.shape}, POVM needs dimension {dim}")
    return rho


def _manifest(args, command):
    cfg = _stop_config(args)
    return {
        "command": command,
        "input_path": getattr(args, "record", None),
        "seed": getattr(args, "seed", None),
        "solver": getattr(args, "solver", None),
        "stop_config": {
            "grad_tol": cfg.grad_tol,
            "step_tol": cfg.step_tol,
            "fun_tol": cfg.fun_tol,
            "max_iters": cfg.max_iters,
            "max_fevals": cfg.max_fevals,
            "param_bound": cfg.param_bound,
        },
        "output_path": getattr(args, "out", None),
        "tool_version": __version__,
    }


def _stop_config(args):
    return StopConfig(
        grad_tol=getattr(args, "grad_tol", 1e-6),
        step_tol=getattr(args, "step_tol", None),
        fun_tol=getattr(args, "fun_tol", None),
        max_iters=getattr(args, "max_iters", None),
        max_fevals=getattr(args, "max_fevals", None),
        param_bound=getattr(args, "param_bound", 1e3),
    )


def _matrix_fields(m):
    m = np.asarray(m, dtype=complex)
    return {
        "re": [[x.real for x in row] for row in m],
        "im": [[x.imag for x in row] for row in m],
        "rounded_re": [[round(x.real, 4) for x in row] for row in m],
        "rounded_im": [[round(x.imag, 4) for x in row] for row in m],
    }


def _write_out(path, doc):
    try:
        write_json_atomic(path, doc)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        sys.exit(EXIT_UNWRITABLE)


def _emit_trace(result):
    for i, (f, gnorm, step) in enumerate(result.trace_log):
        print(f"iter={i} f={f:.6e} grad_norm={gnorm:.3e} step={step:.3e}", file=sys.stderr)


def cmd_simulate(args):
    povm = povm_preset(args.povm)
    dim = povm[0].matrix.shape[0]
    rho = _load_state(args.state, dim)
    record = simulate_counts(rho, povm, args.shots, args.noise, args.seed)
    try:
        write_record(args.out, record, preset=args.povm)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        sys.exit(EXIT_UNWRITABLE)
    return EXIT_OK


def _build_model(record):
    return ObjectiveModel("gaussian", record.operators, normalize(record))


def cmd_reconstruct(args):
    record = read_record(args.record)
    manifest = _manifest(args, "reconstruct")
    d = record.dim
    if args.method == "linear":
        basis = pauli_basis(int(round(np.log2(d))))
        try:
            report = linear_invert(normalize(record), record.operators, basis)
        except IncompleteMeasurementsError as exc:
            print(f"error: {exc}", file=sys.stderr)
            sys.exit(EXIT_INCOMPLETE)
        doc = {
            "manifest": manifest,
            "method": "linear",
            "matrix": _matrix_fields(report.matrix),
            "stokes": list(report.stokes),
            "is_physical": report.is_physical,
            "min_eigenvalue": report.min_eigenvalue,
            "trace": report.trace,
            "condition_estimate": report.condition_estimate,
            "purity": float(np.real(np.trace(report.matrix @ report.matrix))),
        }
        _write_out(args.out, doc)
        return EXIT_OK

    model = _build_model(record)
    result = run_solver(args.solver, model, default_start(d), _stop_config(args))
    if args.verbose:
        _emit_trace(result)
    doc = {
        "manifest": manifest,
        "method": "mle",
        "solver": args.solver,
        "matrix": _matrix_fields(result.rho_final),
        "purity": purity(result.rho_final),
        "min_eigenvalue": float(eig_hermitian(result.rho_final)[0]),
        "f_final": result.f_final,
        "grad_norm": result.grad_norm,
        "stop_reason": result.reason.value,
        "iters": result.iters,
        "fevals": result.fevals,
        "t_final": list(result.t_final),
    }
    _write_out(args.out, doc)
    return EXIT_OK if result.reason is StopReason.GradientTolerance else EXIT_STAGNATION


def _solution_fields(res):
    return {
        "t": list(res.t_final),
        "f_final": res.f_final,
        "grad_norm": res.grad_norm,
        "reason": res.reason.value,
        "iters": res.iters,
        "fevals": res.fevals,
    }


def cmd_verify_minima(args):
    record = read_record(args.record)
    manifest = _manifest(args, "verify-minima")
    model = _build_model(record)
    d = record.dim
    screen = args.grad_tol
    reports = []
    pooled = []
    try:
        if args.constrain_signs:
            # sphere-constrained protocol: tight stagnation tolerances inside
            # the solver, stationarity screen applied afterwards
            cfg = StopConfig(grad_tol=screen * 1e-3, step_tol=1e-12, fun_tol=1e-12)
            for pattern in all_sign_patterns(d):
                rep = multistart(
                    model, args.starts, args.seed, cfg=cfg, screen_tol=screen,
                    pattern=pattern,
                )
                reports.append((pattern, rep))
                pooled.extend(rep.screened_results)
        else:
            cfg = _stop_config(args)
            rep = multistart(model, args.starts, args.seed, solver=args.solver, cfg=cfg)
            reports.append((None, rep))
            pooled.extend(rep.screened_results)
    except AllRunsFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for diag in exc.diagnostics:
            print(f"  discarded: {diag}", file=sys.stderr)
        sys.exit(EXIT_ALL_RUNS_FAILED)

    passed, eq = equivalence_check(pooled, args.rho_tol, args.f_tol)
    doc = {
        "manifest": manifest,
        "constrain_signs": bool(args.constrain_signs),
        "reports": [
            {
                "sign_pattern": None if pattern is None else [int(s) for s in pattern],
                "n_starts": args.starts,
                "distinct_t_count": rep.distinct_t_count,
                "max_pairwise_rho_distance": rep.max_pairwise_rho_distance,
                "max_f_spread": rep.max_f_spread,
                "discarded_count": rep.discarded_count,
                "solutions": [_solution_fields(s) for s in rep.solutions],
            }
            for pattern, rep in reports
        ],
        "equivalence": eq,
    }
    doc["equivalence"]["worst_rho_pair"] = (
        list(eq["worst_rho_pair"]) if eq["worst_rho_pair"] else None
    )
    doc["equivalence"]["worst_f_pair"] = (
        list(eq["worst_f_pair"]) if eq["worst_f_pair"] else None
    )
    _write_out(args.out, doc)
    return EXIT_OK if passed else EXIT_NOT_EQUIVALENT


def cmd_compare(args):
    record = read_record(args.record)
    manifest = _manifest(args, "compare")
    model = _build_model(record)
    cfg = _stop_config(args)
    rows = []
    for name in args.solver.split(","):
        name = name.strip()
        if name not in SOLVERS:
            print(f"error: unknown solver {name!r}", file=sys.stderr)
            sys.exit(EXIT_SCHEMA)
        res = run_solver(name, model, default_start(record.dim), cfg)
        rows.append(
            {
                "solver": name,
                "f_final": res.f_final,
                "grad_norm": res.grad_norm,
                "purity": purity(res.rho_final),
                "iters": res.iters,
                "fevals": res.fevals,
                "reason": res.reason.value,
            }
        )
    _write_out(args.out, {"manifest": manifest, "rows": rows})
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tomomle",
        description="Quantum state tomography: simulation, reconstruction, "
        "solver comparison, and minimizer-equivalence verification.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_stop_flags(p):
        p.add_argument("--grad-tol", type=float, default=1e-6)
        p.add_argument("--step-tol", type=float, default=None)
        p.add_argument("--fun-tol", type=float, default=None)
        p.add_argument("--max-iters", type=int, default=None)
        p.add_argument("--max-fevals", type=int, default=None)

    p = sub.add_parser("simulate", help="simulate measurement counts")
    p.add_argument("--state", required=True, help="preset (H,V,D,R,mixed,bell) or matrix file")
    p.add_argument("--povm", default="pol4", help="POVM preset (pol4, pol4x4)")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--noise", choices=["none", "gaussian", "poisson"], default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct a state from a record")
    p.add_argument("record")
    p.add_argument("--method", choices=["linear", "mle"], default="mle")
    p.add_argument("--solver", choices=sorted(SOLVERS), default="lm")
    add_stop_flags(p)
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify-minima", help="multistart equivalence verification")
    p.add_argument("record")
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="lm")
    p.add_argument("--constrain-signs", action="store_true")
    p.add_argument("--rho-tol", type=float, default=1e-3)
    p.add_argument("--f-tol", type=float, default=1e-6)
    add_stop_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_verify_minima)

    p = sub.add_parser("compare", help="run several solvers on one record")
    p.add_argument("record")
    p.add_argument("--solver", default="lm,nelder-mead", help="comma-separated solver list")
    p.add_argument("--seed", type=int, default=0)
    add_stop_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except TomographyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

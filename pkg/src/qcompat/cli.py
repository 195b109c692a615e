"""Command-line front end: state-file ingestion, measure evaluation,
scenario sweeps, and CSV/JSON emission.

State files are JSON with complex matrices split into real and imaginary
parts:

    {"dim": 2,
     "states": [{"label": "a",
                 "matrix_re": [[1.0, 0.0], [0.0, 0.0]],
                 "matrix_im": [[0.0, 0.0], [0.0, 0.0]]}, ...]}

Constraint files hold observables the same way:

    {"observables": [{"matrix_re": ..., "matrix_im": ...}, ...],
     "values": [0.5, ...]}

Exit codes: 0 success, 1 input/validation error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import compat, maxent, pooling, qmat, scenarios
from .compat import SolverFailureError, StateSet
from .maxent import BoundaryStateError, ExpectationConstraint, InfeasibleError
from .pooling import IncompatibleStatesError
from .qmat import DensityMatrix

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2


class ParseError(ValueError):
    """File unreadable or not matching the expected JSON schema."""


class ValidationError(ValueError):
    """Well-formed input whose contents violate an invariant."""


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _matrix_from_parts(entry, what):
    try:
        re_part = np.array(entry["matrix_re"], dtype=float)
        im_part = np.array(entry["matrix_im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{what}: expected matrix_re/matrix_im arrays ({exc})")
    if re_part.shape != im_part.shape or re_part.ndim != 2 or re_part.shape[0] != re_part.shape[1]:
        raise ParseError(f"{what}: matrix_re/matrix_im must be equal square arrays")
    return re_part + 1j * im_part


def parse_state_file(path) -> StateSet:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}")
    if not isinstance(data, dict) or "states" not in data:
        raise ParseError(f"{path}: expected an object with a 'states' list")
    entries = data["states"]
    if not isinstance(entries, list) or len(entries) < 2:
        raise ValidationError(f"{path}: need at least two states")
    dim = data.get("dim")
    states, labels = [], []
    for idx, entry in enumerate(entries):
        label = str(entry.get("label", f"state-{idx}"))
        mat = _matrix_from_parts(entry, f"state '{label}'")
        if dim is None:
            dim = mat.shape[0]
        if mat.shape != (dim, dim):
            raise ValidationError(
                f"state '{label}': dimension {mat.shape[0]} does not match {dim}"
            )
        try:
            states.append(DensityMatrix(mat))
        except (ValueError, qmat.NonHermitianError) as exc:
            raise ValidationError(f"state '{label}': {exc}")
        labels.append(label)
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{path}: state labels must be unique")
    return StateSet(tuple(states), tuple(labels))


def write_state_file(state_set: StateSet, path) -> None:
    """Emit a StateSet as JSON; floats round-trip bitwise through repr."""
    payload = {
        "dim": state_set.dim,
        "states": [
            {
                "label": label,
                "matrix_re": s.matrix.real.tolist(),
                "matrix_im": s.matrix.imag.tolist(),
            }
            for label, s in zip(state_set.labels, state_set.states)
        ],
    }
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")


def parse_constraints_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}")
    if not isinstance(data, dict) or "observables" not in data or "values" not in data:
        raise ParseError(f"{path}: expected an object with 'observables' and 'values'")
    observables = data["observables"]
    values = data["values"]
    if len(observables) != len(values):
        raise ValidationError(
            f"{path}: {len(observables)} observables but {len(values)} values"
        )
    constraints, dim = [], None
    for idx, (entry, value) in enumerate(zip(observables, values)):
        mat = _matrix_from_parts(entry, f"observable {idx}")
        if dim is None:
            dim = mat.shape[0]
        if mat.shape != (dim, dim):
            raise ValidationError(f"observable {idx}: dimension mismatch")
        try:
            constraints.append(ExpectationConstraint(mat, float(value)))
        except qmat.NonHermitianError as exc:
            raise ValidationError(f"observable {idx}: {exc}")
    if dim is None:
        raise ValidationError(f"{path}: no observables given")
    return constraints, dim


def _atomic_write(path, text: str) -> None:
    """Write the full payload or nothing (no partial output on failure)."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qcompat-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _emit(payload: dict, lines: list, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
    else:
        for line in lines:
            print(line)


def _matrix_payload(mat) -> dict:
    m = np.asarray(mat)
    return {"matrix_re": m.real.tolist(), "matrix_im": m.imag.tolist()}


def _report_output(report, labels, tol):
    cert = report.dual_certificate
    cert_min = min(float(np.linalg.eigvalsh(m)[0]) for m in cert)
    summed = sum(cert)
    lines = [
        f"criterion: {report.criterion}",
        f"states: {', '.join(labels)}",
        f"value: {_fmt(report.value)}",
        f"gap: {_fmt(report.gap)}",
        f"tolerance: {_fmt(tol)}",
    ]
    payload = {
        "criterion": report.criterion,
        "states": list(labels),
        "value": report.value,
        "raw_value": report.raw_value,
        "gap": report.gap,
        "tolerance": tol,
        "certificate": {
            "blocks": len(cert),
            "min_eigenvalue": cert_min,
        },
    }
    if report.upper_bound_trace_distance is not None:
        attained = "attained" if report.bound_attained else "not attained"
        lines.append(
            f"trace-distance bound: {_fmt(report.upper_bound_trace_distance)} ({attained})"
        )
        payload["upper_bound_trace_distance"] = report.upper_bound_trace_distance
        payload["bound_attained"] = report.bound_attained
    if report.criterion == "PP":
        dev = float(np.linalg.norm(summed - np.eye(summed.shape[0])))
        lines.append(f"certificate: {len(cert)} blocks, min eig {cert_min:.3e}, "
                     f"||sum(M) - I|| = {dev:.3e}")
        payload["certificate"]["sum_minus_identity"] = dev
    else:
        sum_min = float(np.linalg.eigvalsh(summed)[0])
        lines.append(f"certificate: {len(cert)} blocks, min eig {cert_min:.3e}, "
                     f"min eig of sum {sum_min:.6g}")
        payload["certificate"]["sum_min_eigenvalue"] = sum_min
    if report.dual_alphas is not None:
        lines.append("alpha: " + ", ".join(_fmt(x) for x in report.dual_alphas))
        payload["certificate"]["alphas"] = [float(x) for x in report.dual_alphas]
    return payload, lines


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_measure(args) -> int:
    state_set = parse_state_file(args.input)
    fn = {"bfm": compat.k_bfm, "pp": compat.k_pp, "es": compat.k_es}[args.command]
    report = fn(state_set, tol=args.tol)
    payload, lines = _report_output(report, state_set.labels, args.tol)
    _emit(payload, lines, args.format)
    return EXIT_OK


def _cmd_check(args) -> int:
    state_set = parse_state_file(args.input)
    dim = qmat.supports_intersection_dim(state_set.matrices(), args.rank_tol)
    verdict = "compatible" if dim > 0 else "incompatible"
    _emit(
        {"compatible": dim > 0, "intersection_dim": dim, "rank_tol": args.rank_tol},
        [f"{verdict}, intersection dim {dim}"],
        args.format,
    )
    return EXIT_OK


def _cmd_maxent(args) -> int:
    constraints, dim = parse_constraints_file(args.input)
    result = maxent.maxent_estimate(constraints, dim)
    payload = {
        "dim": dim,
        "entropy": result.entropy,
        "multipliers": [float(x) for x in result.multipliers],
        "max_residual": float(np.max(np.abs(result.residuals))) if len(result.residuals) else 0.0,
        "state": _matrix_payload(result.state.matrix),
    }
    lines = [
        f"dim: {dim}",
        f"entropy: {_fmt(result.entropy)}",
        "multipliers: " + (", ".join(_fmt(x) for x in result.multipliers) or "(none)"),
        f"max residual: {payload['max_residual']:.3e}",
        "state (re):",
    ]
    for row in result.state.matrix.real:
        lines.append("  " + "  ".join(_fmt(x) for x in row))
    lines.append("state (im):")
    for row in result.state.matrix.imag:
        lines.append("  " + "  ".join(_fmt(x) for x in row))
    _emit(payload, lines, args.format)
    return EXIT_OK


def _cmd_pool(args) -> int:
    state_set = parse_state_file(args.input)
    if state_set.k != 2:
        raise ValidationError(f"pool needs exactly 2 states, got {state_set.k}")
    result = pooling.pool_measurement(state_set.states[0], state_set.states[1],
                                      tol=args.tol, rank_tol=args.rank_tol)
    payload = {
        "k_value": result.k_value,
        "c": result.c,
        "c_trace_bound": result.c_trace_bound,
        "p00": result.p00,
        "support_overlap": result.support_overlap,
        "joint_state": _matrix_payload(result.joint_state.matrix),
        "blocks": {name: _matrix_payload(blk) for name, blk in
                   zip(("e00", "e01", "e10", "e11"), result.blocks)},
    }
    lines = [
        f"k_value: {_fmt(result.k_value)}",
        f"c: {_fmt(result.c)}",
        f"c (trace-distance closed form): {_fmt(result.c_trace_bound)}",
        f"p00: {_fmt(result.p00)}",
        f"block traces: " + ", ".join(
            f"{name}={_fmt(np.trace(blk).real)}"
            for name, blk in zip(("e00", "e01", "e10", "e11"), result.blocks)),
        f"support overlap of leftover blocks: {result.support_overlap:.3e}",
        "joint state (re):",
    ]
    for row in result.joint_state.matrix.real:
        lines.append("  " + "  ".join(_fmt(x) for x in row))
    _emit(payload, lines, args.format)
    return EXIT_OK


def _rows_to_csv(header, rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(_fmt(x) for x in row))
    return "\n".join(out) + "\n"


def _cmd_scenario(args) -> int:
    if args.theta_steps < 2:
        raise ValidationError("theta-steps must be at least 2")
    if args.which == "fig1":
        points = scenarios.fig1_curve(args.theta_steps, args.samples, args.seed)
        header = ["theta", "k_avg", "stderr", "reference_formula"]
        rows = [(p.theta, p.mc_mean, p.mc_stderr, p.reference_formula) for p in points]
    else:
        points = scenarios.fig2_curve(args.theta_steps)
        header = ["theta", "k_avg"]
        rows = [(p.theta, p.k_avg) for p in points]
    if args.format == "json":
        text = json.dumps({"columns": header,
                           "rows": [[float(x) for x in row] for row in rows]},
                          indent=2) + "\n"
    else:
        text = _rows_to_csv(header, rows)
    if args.output:
        _atomic_write(args.output, text)
        print(f"wrote {len(rows)} rows to {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _positive(value):
    x = float(value)
    if x <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcompat",
                     description="Compatibility measures for quantum state assignments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="text"):
        p.add_argument("--tol", type=_positive, default=1e-8)
        p.add_argument("--rank-tol", dest="rank_tol", type=_positive, default=1e-9)
        p.add_argument("--format", choices=("text", "json", "csv"), default=fmt_default)

    for name in ("bfm", "pp", "es"):
        p = sub.add_parser(name, help=f"{name.upper()} compatibility measure")
        p.add_argument("-i", "--input", required=True)
        common(p)
        p.set_defaults(run=_cmd_measure)

    p = sub.add_parser("check", help="qualitative compatibility of a state set")
    p.add_argument("-i", "--input", required=True)
    common(p)
    p.set_defaults(run=_cmd_check)

    p = sub.add_parser("maxent", help="maximum-entropy estimate from constraints")
    p.add_argument("-i", "--input", required=True)
    common(p)
    p.set_defaults(run=_cmd_maxent)

    p = sub.add_parser("pool", help="measurement pooling of two states")
    p.add_argument("-i", "--input", required=True)
    common(p)
    p.set_defaults(run=_cmd_pool)

    p = sub.add_parser("scenario", help="theta-swept experiment curves")
    which = p.add_subparsers(dest="which", required=True)
    for name in ("fig1", "fig2"):
        q = which.add_parser(name)
        q.add_argument("--theta-steps", dest="theta_steps", type=int, default=64)
        q.add_argument("--samples", type=int, default=10000)
        q.add_argument("--seed", type=int, default=42)
        q.add_argument("-o", "--output", default=None)
        q.add_argument("--tol", type=_positive, default=1e-8)
        q.add_argument("--format", choices=("csv", "json"), default="csv")
        q.set_defaults(run=_cmd_scenario)
    return parser


def _emit_error(exc, fmt: str, code: int) -> int:
    if fmt == "json":
        sys.stderr.write(json.dumps({
            "error": type(exc).__name__,
            "message": str(exc),
            "exit_code": code,
        }) + "\n")
    else:
        sys.stderr.write(f"qcompat: error: {exc}\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    fmt = "text"
    try:
        args = parser.parse_args(argv)
        fmt = getattr(args, "format", "text")
        return args.run(args)
    except (ParseError, ValidationError, InfeasibleError,
            IncompatibleStatesError, qmat.DimensionMismatchError,
            qmat.NonHermitianError) as exc:
        return _emit_error(exc, fmt, EXIT_VALIDATION)
    except (SolverFailureError, BoundaryStateError) as exc:
        return _emit_error(exc, fmt, EXIT_SOLVER)


if __name__ == "__main__":
    sys.exit(main())

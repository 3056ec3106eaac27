"""Command-line front end: distances, duals, divergences, the gap demo, verify.

Instance files are JSON documents; complex entries are ``[re, im]`` pairs.
Reports are printed human-readable and, with ``--out``, appended as one JSON
record per line.  Every float in a record is rounded to 12 significant
digits at construction, so serializing, re-parsing and re-serializing a
record is the identity and golden files diff deterministically.

Exit codes: 0 on success, 2 on parse or usage errors, 3 on solver or
verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import closedform as cf
from . import cost as cost_mod
from . import linalg, suites, transport

__all__ = ["main", "ReportRecord", "parse_instance", "parse_report"]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3

COLLINEAR_TOL = 1e-10


class InstanceError(ValueError):
    """Invalid instance file contents."""


def _round12(value: Any) -> Any:
    """Round floats to 12 significant digits, recursively through containers."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (int, str)):
        return value
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value) or value == 0.0:
            return value
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    raise TypeError(f"cannot serialize value of type {type(value)!r}")


@dataclass(frozen=True)
class ReportRecord:
    """One machine-readable result row; floats carry 12 significant digits."""

    command: str
    instance: dict
    status: str
    seconds: float
    primal: float | None = None
    dual: float | None = None
    gap: float | None = None
    distance: float | None = None
    dp: float | None = None
    divergence: float | None = None
    divergence_squared: float | None = None
    certificate: dict | None = None
    closed_form: dict | None = None
    extra: dict | None = None

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            object.__setattr__(self, f.name, _round12(getattr(self, f.name)))

    def to_json_line(self) -> str:
        payload = {k: v for k, v in dataclasses.asdict(self).items() if v is not None}
        return json.dumps(payload, sort_keys=True)


def parse_report(line: str) -> ReportRecord:
    data = json.loads(line)
    known = {f.name for f in dataclasses.fields(ReportRecord)}
    unknown = set(data) - known
    if unknown:
        raise InstanceError(f"unknown report fields: {sorted(unknown)}")
    return ReportRecord(**data)


# ---------------------------------------------------------------------------
# Instance parsing.
# ---------------------------------------------------------------------------


def _complex_matrix(entries: Any, what: str) -> np.ndarray:
    try:
        rows = []
        for row in entries:
            parsed = []
            for cell in row:
                if isinstance(cell, (int, float)):
                    parsed.append(complex(cell))
                else:
                    re, im = cell
                    parsed.append(complex(float(re), float(im)))
            rows.append(parsed)
        return np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"malformed {what}: {exc}") from exc


def _parse_state(obj: Any, name: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise InstanceError(f"state {name!r} must be an object with 'bloch' or 'matrix'")
    if "bloch" in obj:
        try:
            return cf.state_from_bloch([float(v) for v in obj["bloch"]])
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"state {name!r}: {exc}") from exc
    if "matrix" in obj:
        matrix = _complex_matrix(obj["matrix"], f"state {name!r}")
        try:
            return linalg.density(matrix)
        except ValueError as exc:
            raise InstanceError(f"state {name!r}: {exc}") from exc
    raise InstanceError(f"state {name!r} must provide 'bloch' or 'matrix'")


def _parse_observables(obj: Any) -> cost_mod.ObservableSet:
    if obj == "pauli-triple" or obj is None:
        return cost_mod.pauli_triple()
    if obj == "sigma-z":
        return cost_mod.sigma_z_observable()
    if isinstance(obj, dict) and "matrices" in obj:
        mats = [_complex_matrix(m, "observable") for m in obj["matrices"]]
        try:
            return cost_mod.observable_set(mats)
        except ValueError as exc:
            raise InstanceError(str(exc)) from exc
    raise InstanceError(f"unknown observable selector {obj!r}")


def parse_instance(data: dict, args: argparse.Namespace | None = None) -> transport.TransportInstance:
    """Build a transport instance from a parsed JSON document.

    Command-line flags override the file's cost selector (unless ``custom``),
    exponent and mode.
    """
    if not isinstance(data, dict):
        raise InstanceError("instance file must hold a JSON object")
    rho = _parse_state(data.get("rho"), "rho")
    omega = _parse_state(data.get("omega"), "omega")

    cost_kind = data.get("cost", "symm")
    if args is not None and getattr(args, "cost", None) not in (None, "custom"):
        cost_kind = args.cost
    p = float(data.get("p", 2.0))
    if args is not None and getattr(args, "p", None) is not None:
        p = float(args.p)
    mode = data.get("mode")
    if args is not None and getattr(args, "mode", None) is not None:
        mode = args.mode

    try:
        if cost_kind == "symm":
            if mode == transport.MODE_LINEARIZED:
                return transport.factorized_instance(
                    rho, omega, cost_mod.pauli_triple(), p, transport.MODE_LINEARIZED
                )
            return transport.symm_instance(rho, omega, p)
        if cost_kind == "z":
            return transport.z_instance(rho, omega, p)
        if cost_kind == "factorized":
            observables = _parse_observables(data.get("observables"))
            return transport.factorized_instance(
                rho, omega, observables, p, mode or transport.MODE_NONLINEAR
            )
        if cost_kind == "general":
            observables = _parse_observables(data.get("observables"))
            classical = cost_mod.lp_power_cost(observables.size, p)
            return transport.general_instance(
                rho, omega, observables, classical, p, mode or transport.MODE_LINEARIZED
            )
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc
    raise InstanceError(f"unknown cost selector {cost_kind!r}")


def _load_instance_file(path: str, args: argparse.Namespace) -> tuple[dict, transport.TransportInstance]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return data, parse_instance(data, args)


# ---------------------------------------------------------------------------
# Closed-form comparison for recognized instance families.
# ---------------------------------------------------------------------------


def _bloch_of(state: np.ndarray) -> np.ndarray:
    return np.array([float(np.trace(state @ s).real) for s in linalg.PAULI])


def closed_form_comparison(
    instance: transport.TransportInstance, cost_kind: str
) -> dict | None:
    """Known-formula value for the instance family, when one applies."""
    if instance.dim != 2:
        return None
    r1, r2 = _bloch_of(instance.rho), _bloch_of(instance.omega)
    if cost_kind == "symm":
        if np.linalg.norm(np.cross(r1, r2)) <= COLLINEAR_TOL:
            return {
                "family": "symm-commuting",
                "dp": cf.d_symm_general(r1, r2, instance.p),
            }
        return None
    if cost_kind == "z":
        if max(abs(r1[2]), abs(r2[2])) <= COLLINEAR_TOL:
            radii = (float(np.hypot(r1[0], r1[1])), float(np.hypot(r2[0], r2[1])))
            return {"family": "z-xy", "dp": cf.d_z_xy(radii[0], radii[1], instance.p)}
        if max(abs(r1[0]), abs(r1[1]), abs(r2[0]), abs(r2[1])) <= COLLINEAR_TOL:
            return {"family": "z-commuting", "dp": cf.d_z_commuting(r1[2], r2[2], instance.p)}
    return None


def _matrix_payload(m: np.ndarray) -> list:
    return [[[float(c.real), float(c.imag)] for c in row] for row in np.asarray(m)]


# ---------------------------------------------------------------------------
# Output helpers.
# ---------------------------------------------------------------------------


def _emit(record: ReportRecord, args: argparse.Namespace) -> None:
    if getattr(args, "out", None):
        with open(args.out, "a", encoding="utf-8") as fh:
            fh.write(record.to_json_line() + "\n")


def _print_fields(pairs: list[tuple[str, Any]]) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        if isinstance(value, float):
            print(f"{key:<{width}}  {value:.12g}")
        else:
            print(f"{key:<{width}}  {value}")


def _certificate_dict(res: transport.TransportResult) -> dict:
    c = res.certificate
    return {
        "passed": c.passed,
        "max_equality_residual": c.max_equality_residual,
        "dual_residual": c.dual_residual,
        "min_eig_x": c.min_eig_x,
        "min_eig_s": c.min_eig_s,
        "dual_attained": res.dual_attained,
        "degenerate_face": res.degenerate_face,
        "iterations": res.solution.iterations,
    }


def _solve_for_args(args: argparse.Namespace) -> tuple[dict, transport.TransportInstance, transport.TransportResult, float]:
    data, instance = _load_instance_file(args.instance, args)
    kwargs = {}
    if args.tol is not None:
        kwargs = {"tol_gap": args.tol, "tol_feas": args.tol}
    t0 = time.perf_counter()
    result = transport.wasserstein_distance(instance, verbose=args.verbose, **kwargs)
    return data, instance, result, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_distance(args: argparse.Namespace) -> int:
    data, instance, result, seconds = _solve_for_args(args)
    cost_kind = args.cost if args.cost not in (None, "custom") else data.get("cost", "symm")
    comparison = closed_form_comparison(instance, cost_kind)
    record = ReportRecord(
        command="distance",
        instance=data,
        status=result.status,
        seconds=seconds,
        primal=result.primal_objective,
        dual=result.dual_objective,
        gap=result.gap,
        distance=result.distance,
        dp=result.dp,
        certificate=_certificate_dict(result),
        closed_form=comparison,
    )
    _emit(record, args)
    fields = [
        ("status", result.status),
        ("primal", result.primal_objective),
        ("dual", result.dual_objective),
        ("gap", result.gap),
        ("D^p", result.dp),
        ("distance", result.distance),
        ("seconds", seconds),
    ]
    if comparison:
        fields.append((f"closed form ({comparison['family']})", comparison["dp"]))
        fields.append(("closed form deviation", abs(comparison["dp"] - result.dp)))
    _print_fields(fields)
    return EXIT_OK if result.status == "optimal" else EXIT_SOLVER


def cmd_dual(args: argparse.Namespace) -> int:
    data, instance, result, seconds = _solve_for_args(args)
    slack = transport.potential_slack(
        transport.build_primal(instance).objective, result.potentials, instance.dim
    )
    record = ReportRecord(
        command="dual",
        instance=data,
        status=result.status,
        seconds=seconds,
        primal=result.primal_objective,
        dual=result.dual_objective,
        gap=result.gap,
        certificate=_certificate_dict(result),
        extra={
            "potential_objective": transport.potential_objective(
                instance.rho, instance.omega, result.potentials
            ),
            "slack_min_eig": linalg.min_eigenvalue(slack),
            "x": [_matrix_payload(m) for m in result.potentials.xs],
            "y": [_matrix_payload(m) for m in result.potentials.ys],
        },
    )
    _emit(record, args)
    _print_fields(
        [
            ("status", result.status),
            ("dual objective", result.dual_objective),
            ("potential objective", record.extra["potential_objective"]),
            ("slack min eigenvalue", record.extra["slack_min_eig"]),
            ("dual attained", result.dual_attained),
            ("gap", result.gap),
            ("seconds", seconds),
        ]
    )
    return EXIT_OK if result.status == "optimal" else EXIT_SOLVER


def cmd_divergence(args: argparse.Namespace) -> int:
    try:
        with open(args.instance, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InstanceError(f"cannot read {args.instance}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(
            f"{args.instance}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    cost_kind = data.get("cost", "symm")
    if args.cost not in (None, "custom"):
        cost_kind = args.cost
    if cost_kind == "symm":
        observables = cost_mod.pauli_triple()
    elif cost_kind == "z":
        observables = cost_mod.sigma_z_observable()
    elif cost_kind == "factorized":
        observables = _parse_observables(data.get("observables"))
    else:
        raise InstanceError("divergence needs a quadratic cost selector (symm, z, factorized)")
    rho = _parse_state(data.get("rho"), "rho")
    omega = _parse_state(data.get("omega"), "omega")

    t0 = time.perf_counter()
    parts = transport.divergence_parts(rho, omega, observables)
    seconds = time.perf_counter() - t0

    comparison = None
    r1, r2 = _bloch_of(rho), _bloch_of(omega)
    if cost_kind == "symm" and np.linalg.norm(np.cross(r1, r2)) <= COLLINEAR_TOL:
        comparison = {
            "family": "symm-commuting",
            "d_squared": cf.divergence_symm_commuting(r1, r2),
        }
    elif cost_kind == "z" and max(abs(r1[2]), abs(r2[2])) <= COLLINEAR_TOL:
        comparison = {
            "family": "z-xy",
            "d_squared": cf.divergence_z_xy(
                float(np.hypot(r1[0], r1[1])), float(np.hypot(r2[0], r2[1]))
            ),
        }
    record = ReportRecord(
        command="divergence",
        instance=data,
        status=parts.status,
        seconds=seconds,
        gap=parts.gap,
        divergence=parts.d,
        divergence_squared=parts.d_squared,
        closed_form=comparison,
        certificate={"max_equality_residual": parts.max_equality_residual},
        extra={
            "cross": parts.cross,
            "self_rho": parts.self_rho,
            "self_omega": parts.self_omega,
        },
    )
    _emit(record, args)
    fields = [
        ("status", parts.status),
        ("D^2(rho, omega)", parts.cross),
        ("D^2(rho, rho)", parts.self_rho),
        ("D^2(omega, omega)", parts.self_omega),
        ("d^2", parts.d_squared),
        ("d", parts.d),
        ("gap", parts.gap),
        ("seconds", seconds),
    ]
    if comparison:
        fields.append((f"closed form ({comparison['family']})", comparison["d_squared"]))
    _print_fields(fields)
    return EXIT_OK if parts.status == "optimal" else EXIT_SOLVER


def cmd_gap_demo(args: argparse.Namespace) -> int:
    exponents = args.p if args.p else [1.0, 2.0, 3.0]
    print(f"{'p':>4}  {'nonlinear':>16}  {'linearized':>16}  {'difference':>16}")
    for p in exponents:
        t0 = time.perf_counter()
        result = transport.gap_demo(float(p))
        seconds = time.perf_counter() - t0
        record = ReportRecord(
            command="gap-demo",
            instance={"p": float(p)},
            status=result.status,
            seconds=seconds,
            gap=result.gap,
            extra={
                "nonlinear": result.nonlinear,
                "linearized": result.linearized,
                "difference": result.difference,
                "factor_values": list(result.factor_values),
            },
        )
        _emit(record, args)
        print(
            f"{p:>4g}  {result.nonlinear:>16.12g}  {result.linearized:>16.12g}"
            f"  {result.difference:>16.12g}"
        )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        outcome = suites.run_suite(
            args.suite, density=args.density, samples=args.samples, seed=args.seed
        )
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_PARSE
    if args.out:
        with open(args.out, "a", encoding="utf-8") as fh:
            for case in outcome.cases:
                fh.write(json.dumps(_round12(case), sort_keys=True) + "\n")
            fh.write(json.dumps(_round12(outcome.summary()), sort_keys=True) + "\n")
    failing = [c for c in outcome.cases if not c["ok"]]
    for case in failing[:20]:
        print(json.dumps(_round12(case), sort_keys=True))
    summary = outcome.summary()
    _print_fields(sorted(summary.items()))
    return EXIT_OK if outcome.passed else EXIT_SOLVER


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser, with_instance: bool = True) -> None:
    if with_instance:
        sub.add_argument("instance", help="path to a JSON instance file")
        sub.add_argument("--cost", choices=["symm", "z", "custom"], default=None,
                         help="override the file's cost selector (custom keeps it)")
        sub.add_argument("--p", type=float, default=None, help="override the exponent")
        sub.add_argument("--mode", choices=["joint", "linearized", "nonlinear"], default=None)
        sub.add_argument("--tol", type=float, default=None, help="solver tolerance override")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None, help="append JSON records to this path")
    sub.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qot",
        description="Quantum optimal transport distances via semidefinite programming.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("distance", help="solve one transport instance")
    _add_common(sub)
    sub.set_defaults(func=cmd_distance)

    sub = subs.add_parser("dual", help="report the dual side: potentials and slack")
    _add_common(sub)
    sub.set_defaults(func=cmd_dual)

    sub = subs.add_parser("divergence", help="quadratic divergence of an instance")
    _add_common(sub)
    sub.set_defaults(func=cmd_divergence)

    sub = subs.add_parser("gap-demo", help="strict linearization-gap demonstration")
    sub.add_argument("--p", type=float, action="append", default=None,
                     help="exponent; may repeat (default: 1 2 3)")
    _add_common(sub, with_instance=False)
    sub.set_defaults(func=cmd_gap_demo)

    sub = subs.add_parser("verify", help="run a named verification suite")
    sub.add_argument("suite", help="one of: " + ", ".join(suites.suite_names()))
    sub.add_argument("--density", type=int, default=None, help="grid density override")
    sub.add_argument("--samples", type=int, default=None, help="sample count override")
    _add_common(sub, with_instance=False)
    sub.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except transport.SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

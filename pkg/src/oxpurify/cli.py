"""``oxpurify`` command-line interface.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 non-convergence (``run``/``compare`` with ``--strict`` only).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import printed, report
from .bellspace import BellWeights, CorrelationVector, InvalidStateError, to_bell_weights, werner
from .campaign import (
    DEFAULT_MAX_ROUNDS,
    SWEEP_FIELDS,
    TRAJECTORY_FIELDS,
    AccountingModel,
    Status,
    compare,
    run_to_target,
    sweep,
    to_csv,
    trajectory_rows,
)
from .protocols import ProtocolId

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

DEFAULT_WERNER = printed.COMPARISON_INITIAL_FIDELITY
DEFAULT_TARGET = printed.COMPARISON_TARGET

PAIR_COLUMNS = {m: f"pairs_{m.value}" for m in AccountingModel}


class UsageError(Exception):
    """Bad input detected after argument parsing."""


def _floats(text: str, n: int, flag: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"{flag} expects {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"{flag}: not a number in {text!r}") from None


def initial_state(args: argparse.Namespace) -> BellWeights:
    """Resolve the single initial-state flag; Werner(0.52) when none is given."""
    try:
        if args.weights is not None:
            return BellWeights.from_array(_floats(args.weights, 4, "--weights"))
        if args.correlations is not None:
            return to_bell_weights(CorrelationVector.from_array(_floats(args.correlations, 3, "--correlations")))
        return werner(DEFAULT_WERNER if args.werner is None else args.werner)
    except InvalidStateError as exc:
        raise UsageError(str(exc)) from None


def _target(args: argparse.Namespace) -> float:
    if not 0.0 < args.target <= 1.0:
        raise UsageError(f"--target must lie in (0, 1], got {args.target}")
    return args.target


def _max_rounds(args: argparse.Namespace) -> int:
    if args.max_rounds < 1:
        raise UsageError("--max-rounds must be at least 1")
    return args.max_rounds


def _pair_fields(fields: list[str], model: AccountingModel | None) -> list[str]:
    if model is None:
        return list(fields)
    drop = {c for m, c in PAIR_COLUMNS.items() if m is not model}
    return [f for f in fields if f not in drop]


def _select(rows: list[dict], fields: list[str]) -> list[dict]:
    return [{k: r[k] for k in fields} for r in rows]


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, allow_nan=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_verify(args: argparse.Namespace) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    result = report.verify(seed=args.seed, samples=args.samples)
    summary = {
        "seed": result.seed,
        "samples": result.samples,
        "hetero_samples": result.hetero_samples,
        "tolerance": report.TOLERANCE,
        "max_deviation": result.max_deviation,
        "passed": result.passed,
    }
    if args.format == "json":
        sys.stdout.write(_dump_json(summary))
    else:
        for name, dev in result.max_deviation.items():
            sys.stdout.write(f"{name}: max deviation {dev:.3e}\n")
        sys.stdout.write(f"{'PASS' if result.passed else 'FAIL'} (tolerance {report.TOLERANCE:.0e})\n")
    text = report.discrepancy_report(result)
    if args.out is not None:
        Path(args.out).write_text(text)
    elif args.format != "json":
        sys.stdout.write("\n" + text)
    return EXIT_OK if result.passed else EXIT_VERIFY_FAILED


def cmd_run(args: argparse.Namespace) -> int:
    traj = run_to_target(ProtocolId(args.protocol), initial_state(args), _target(args), _max_rounds(args))
    model = AccountingModel(args.accounting) if args.accounting else None
    fields = _pair_fields(TRAJECTORY_FIELDS, model)
    rows = _select(trajectory_rows(traj), fields)
    if args.format == "json":
        text = _dump_json(
            {
                "protocol": traj.protocol.value,
                "initial": traj.initial.to_dict(),
                "target_fidelity": traj.target,
                "status": traj.status.value,
                "rounds": rows,
            }
        )
    else:
        text = to_csv(rows, fields)
    _emit(text, args.out)
    if args.strict and traj.status is not Status.CONVERGED:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


COMPARE_FIELDS = ["protocol", "status", "rounds", "final_fidelity", *PAIR_COLUMNS.values(), "success_probabilities"]


def _compare_rows(rep, model: AccountingModel | None) -> tuple[list[dict], list[str]]:
    rows = []
    for e in rep.entries:
        row = {
            "protocol": e.protocol.value,
            "status": e.status.value,
            "rounds": e.rounds,
            "final_fidelity": e.final_fidelity,
            **{PAIR_COLUMNS[m]: v for m, v in e.consumed.items()},
            "success_probabilities": " ".join(repr(p) for p in e.probabilities),
        }
        rows.append(row)
    fields = _pair_fields(COMPARE_FIELDS, model)
    return _select(rows, fields), fields


def cmd_compare(args: argparse.Namespace) -> int:
    rep = compare(initial_state(args), _target(args), _max_rounds(args))
    model = AccountingModel(args.accounting) if args.accounting else None
    if args.format == "csv":
        rows, fields = _compare_rows(rep, model)
        text = to_csv(rows, fields)
    else:
        data = rep.to_dict()
        if model is not None:
            for p in data["protocols"]:
                p["consumed_pairs"] = {model.value: p["consumed_pairs"][model.value]}
        text = _dump_json(data)
    _emit(text, args.out)
    if args.strict and any(e.status is not Status.CONVERGED for e in rep.entries):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def parse_grid(spec: str) -> list[float]:
    """Werner grid: ``a,b,c`` or ``start:stop:step`` (stop included)."""
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            if step <= 0:
                raise UsageError("grid step must be positive")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(max(n, 0))]
        return [float(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse grid {spec!r}") from None


def parse_correlation_grid(spec: str) -> list[tuple[float, float, float]]:
    """Correlation grid: ``cx,cy,cz;cx,cy,cz;...``."""
    return [tuple(_floats(p, 3, "--grid-correlations")) for p in spec.split(";") if p.strip()]


def cmd_sweep(args: argparse.Namespace) -> int:
    grid: list = []
    if args.grid is not None:
        grid += parse_grid(args.grid)
    if args.grid_correlations is not None:
        grid += parse_correlation_grid(args.grid_correlations)
    if not grid:
        grid = parse_grid("0.55:0.95:0.1")
    rows = sweep(grid, _target(args), _max_rounds(args))
    model = AccountingModel(args.accounting) if args.accounting else None
    fields = _pair_fields(SWEEP_FIELDS, model)
    rows = _select(rows, fields)
    text = _dump_json(rows) if args.format == "json" else to_csv(rows, fields)
    _emit(text, args.out)
    return EXIT_OK


def cmd_table2(args: argparse.Namespace) -> int:
    rep = compare(initial_state(args), _target(args), _max_rounds(args))
    model = AccountingModel(args.accounting or AccountingModel.GEOMETRIC.value)
    rows = []
    for e in rep.entries:
        ref = printed.COMPARISON_TABLE[e.protocol]
        pairs = e.consumed[model]
        rows.append(
            {
                "protocol": e.protocol.value,
                "status": e.status.value,
                "fidelity": e.final_fidelity,
                "printed_fidelity": ref.fidelity,
                "fidelity_match": round(e.final_fidelity, 3) == ref.fidelity,
                "iterations": e.rounds,
                "printed_iterations": ref.iterations,
                "iterations_match": e.rounds == ref.iterations,
                "consumed_pairs": pairs,
                "printed_consumed_pairs": ref.consumed_pairs,
                "pairs_match": pairs == ref.consumed_pairs,
            }
        )
    if args.format == "json":
        text = _dump_json({"initial": rep.initial.to_dict(), "target_fidelity": rep.target,
                           "accounting": model.value, "rows": rows})
    elif args.format == "csv":
        text = to_csv(rows, list(rows[0]))
    else:
        mark = {True: "=", False: "x"}
        lines = [
            f"initial A,B,C,D = {', '.join(f'{v:.6g}' for v in rep.initial.as_array())}; "
            f"target {rep.target}; pairs counted as {model.value}",
            "",
            f"{'protocol':<9}{'status':<13}{'fidelity':>10}{'printed':>9}  "
            f"{'rounds':>6}{'printed':>9}  {'pairs':>12}{'printed':>9}",
        ]
        for r in rows:
            lines.append(
                f"{r['protocol']:<9}{r['status']:<13}{r['fidelity']:>10.4f}{r['printed_fidelity']:>8.3f}"
                f"{mark[r['fidelity_match']]}  {r['iterations']:>6d}{r['printed_iterations']:>8d}"
                f"{mark[r['iterations_match']]}  {r['consumed_pairs']:>12.6g}{r['printed_consumed_pairs']:>8d}"
                f"{mark[r['pairs_match']]}"
            )
        lines += ["", "= matches the printed value, x differs"]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_fig1(args: argparse.Namespace) -> int:
    rep = compare(initial_state(args), _target(args), _max_rounds(args))
    if args.format == "json":
        text = _dump_json({p.value: t.fidelities() for p, t in rep.trajectories.items()})
    else:
        rows = [
            {"protocol": p.value, "round": i, "fidelity": f}
            for p, t in rep.trajectories.items()
            for i, f in enumerate(t.fidelities())
        ]
        text = to_csv(rows, ["protocol", "round", "fidelity"])
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    state = common.add_mutually_exclusive_group()
    state.add_argument("--werner", type=float, metavar="F", help=f"Werner state of fidelity F (default {DEFAULT_WERNER})")
    state.add_argument("--weights", metavar="A,B,C,D", help="Bell weights of phi+, psi-, psi+, phi-")
    state.add_argument("--correlations", metavar="cx,cy,cz", help="Pauli correlation coefficients")
    common.add_argument("--target", type=float, default=DEFAULT_TARGET, metavar="F")
    common.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS, metavar="N")
    common.add_argument("--accounting", choices=[m.value for m in AccountingModel])
    common.add_argument("--out", metavar="PATH")

    parser = argparse.ArgumentParser(prog="oxpurify", description="Bell-diagonal entanglement purification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check closed forms against the density-matrix circuits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=report.DEFAULT_SAMPLES)
    p.add_argument("--format", choices=["text", "json"], default="text",
                   help="summary format; the report itself is Markdown")
    p.add_argument("--out", metavar="PATH", help="write the discrepancy report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", parents=[common], help="iterate one protocol to the target")
    p.add_argument("--protocol", choices=[x.value for x in ProtocolId], required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--strict", action="store_true", help="exit 3 if the target is not reached")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", parents=[common], help="run all protocols from one state")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--strict", action="store_true", help="exit 3 if any protocol misses the target")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", parents=[common], help="compare over a grid of initial states")
    p.add_argument("--grid", metavar="SPEC", help="Werner fidelities: a,b,c or start:stop:step")
    p.add_argument("--grid-correlations", metavar="SPEC", help="cx,cy,cz;cx,cy,cz;...")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table2", parents=[common], help="comparison next to the printed table")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("fig1", parents=[common], help="fidelity per round for each protocol")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_fig1)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidStateError, ValueError) as exc:
        print(f"oxpurify: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"oxpurify: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

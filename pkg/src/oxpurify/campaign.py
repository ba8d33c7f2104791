"""Multi-round purification runs, resource accounting and comparison tables."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .bellspace import BellWeights, CorrelationVector, InvalidStateError, to_bell_weights, werner
from .protocols import ProtocolId, StepOutcome, step

FIXED_POINT_EPS = 1e-15
DEFAULT_MAX_ROUNDS = 100


class AccountingModel(enum.Enum):
    """How many input pairs one surviving pair costs after ``n`` rounds.

    ``GEOMETRIC`` (flag value ``paper``): ``k**(n-1)``; ``TREE``: ``k**n``; ``EXPECTED``: ``prod(k / p_i)``,
    with ``k`` pairs consumed per round and ``p_i`` the success probability of
    round ``i``.
    """

    GEOMETRIC = "paper"
    TREE = "tree"
    EXPECTED = "expected"


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ROUNDS = "max_rounds"
    FIXED_POINT = "fixed_point"


@dataclass(frozen=True)
class RoundRecord:
    index: int
    fidelity: float
    success_probability: float
    state: BellWeights
    rotations: tuple[str, ...]
    cumulative_pairs: dict[AccountingModel, float]


@dataclass
class Trajectory:
    protocol: ProtocolId
    initial: BellWeights
    target: float
    rounds: list[RoundRecord] = field(default_factory=list)
    status: Status = Status.MAX_ROUNDS

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def final_fidelity(self) -> float:
        return self.rounds[-1].fidelity if self.rounds else self.initial.A

    def fidelities(self) -> list[float]:
        """Fidelity series including round 0 (the initial state)."""
        return [self.initial.A] + [r.fidelity for r in self.rounds]

    def probabilities(self) -> list[float]:
        return [r.success_probability for r in self.rounds]


def _reached(w: BellWeights, target: float) -> bool:
    # Compare the error weight, which never rounds to zero before the fidelity does.
    return w.B + w.C + w.D <= 1.0 - target


def _cumulative(k: int, n: int, probs: list[float]) -> dict[AccountingModel, float]:
    expected = 1.0
    for p in probs:
        expected *= k / p if p > 0 else math.inf
    return {
        AccountingModel.GEOMETRIC: float(k ** (n - 1)),
        AccountingModel.TREE: float(k**n),
        AccountingModel.EXPECTED: expected,
    }


def run_to_target(
    protocol: ProtocolId,
    initial: BellWeights,
    target_fidelity: float,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    step_fn: Callable[[BellWeights], StepOutcome] | None = None,
) -> Trajectory:
    """Iterate a protocol on copies of its own output until the target is met.

    At least one round is always run. The run stops with ``CONVERGED`` once
    the fidelity reaches ``target_fidelity``, with ``FIXED_POINT`` when a round
    changes the fidelity by less than 1e-15 short of the target, and with
    ``MAX_ROUNDS`` otherwise. Non-convergence is reported through
    ``Trajectory.status``, never raised.
    """
    protocol = ProtocolId(protocol)
    if not 0.0 < target_fidelity <= 1.0:
        raise ValueError(f"target fidelity {target_fidelity!r} outside (0, 1]")
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    if step_fn is None:

        def step_fn(w):
            return step(protocol, w)

    k = protocol.pairs_per_round
    traj = Trajectory(protocol, initial, target_fidelity)
    state = initial
    probs: list[float] = []
    for n in range(1, max_rounds + 1):
        out = step_fn(state)
        probs.append(out.probability)
        traj.rounds.append(
            RoundRecord(
                index=n,
                fidelity=out.state.A,
                success_probability=out.probability,
                state=out.state,
                rotations=tuple(a.value for a in out.rotations_applied),
                cumulative_pairs=_cumulative(k, n, probs),
            )
        )
        if _reached(out.state, target_fidelity):
            traj.status = Status.CONVERGED
            return traj
        if abs(out.state.A - state.A) < FIXED_POINT_EPS:
            traj.status = Status.FIXED_POINT
            return traj
        state = out.state
    traj.status = Status.MAX_ROUNDS
    return traj


def consumed_pairs(trajectory: Trajectory, model: AccountingModel) -> float:
    """Input pairs spent per output pair over the whole trajectory."""
    if not trajectory.rounds:
        raise ValueError("trajectory has no rounds")
    return trajectory.rounds[-1].cumulative_pairs[AccountingModel(model)]


def geometric_pairs(k: int, n: int) -> int:
    return k ** (n - 1)


@dataclass
class ComparisonEntry:
    protocol: ProtocolId
    status: Status
    rounds: int
    final_fidelity: float
    consumed: dict[AccountingModel, float]
    probabilities: list[float]

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol.value,
            "status": self.status.value,
            "rounds": self.rounds,
            "final_fidelity": self.final_fidelity,
            "consumed_pairs": {m.value: v for m, v in self.consumed.items()},
            "success_probabilities": list(self.probabilities),
        }


@dataclass
class ComparisonReport:
    initial: BellWeights
    target: float
    entries: list[ComparisonEntry]
    trajectories: dict[ProtocolId, Trajectory]

    def entry(self, protocol: ProtocolId) -> ComparisonEntry:
        return next(e for e in self.entries if e.protocol is ProtocolId(protocol))

    def to_dict(self) -> dict:
        return {
            "initial": self.initial.to_dict(),
            "target_fidelity": self.target,
            "protocols": [e.to_dict() for e in self.entries],
        }


def compare(
    initial: BellWeights, target_fidelity: float, max_rounds: int = DEFAULT_MAX_ROUNDS
) -> ComparisonReport:
    """Run all three protocols from the same state and summarize them."""
    entries = []
    trajectories = {}
    for protocol in ProtocolId:
        traj = run_to_target(protocol, initial, target_fidelity, max_rounds)
        trajectories[protocol] = traj
        entries.append(
            ComparisonEntry(
                protocol=protocol,
                status=traj.status,
                rounds=len(traj.rounds),
                final_fidelity=traj.final_fidelity,
                consumed={m: consumed_pairs(traj, m) for m in AccountingModel},
                probabilities=traj.probabilities(),
            )
        )
    return ComparisonReport(initial, target_fidelity, entries, trajectories)


SWEEP_FIELDS = [
    "point",
    "F0",
    "cx",
    "cy",
    "cz",
    "protocol",
    "skipped",
    "converged",
    "status",
    "rounds",
    "final_fidelity",
    "pairs_paper",
    "pairs_tree",
    "pairs_expected",
]


def _resolve_point(point) -> BellWeights:
    if isinstance(point, BellWeights):
        return point
    if isinstance(point, CorrelationVector):
        return to_bell_weights(point)
    if np.ndim(point) == 0:
        return werner(float(point))
    return to_bell_weights(CorrelationVector.from_array(point))


def sweep(
    grid: Iterable, target_fidelity: float, max_rounds: int = DEFAULT_MAX_ROUNDS
) -> list[dict]:
    """One row per grid point and protocol.

    Grid points are Werner fidelities (scalars), ``(cx, cy, cz)`` triples, or
    state objects. Non-physical points produce a single row with
    ``skipped=True``.
    """
    rows = []
    for i, point in enumerate(grid):
        base = {"point": i, "F0": "", "cx": "", "cy": "", "cz": ""}
        if np.ndim(point) == 1 and not isinstance(point, (BellWeights, CorrelationVector)):
            base.update(zip(("cx", "cy", "cz"), (float(v) for v in point)))
        try:
            w = _resolve_point(point)
        except InvalidStateError:
            rows.append({**base, "protocol": "", "skipped": True, "converged": "", "status": "",
                         "rounds": "", "final_fidelity": "", "pairs_paper": "",
                         "pairs_tree": "", "pairs_expected": ""})
            continue
        base["F0"] = w.A
        report = compare(w, target_fidelity, max_rounds)
        for e in report.entries:
            rows.append(
                {
                    **base,
                    "protocol": e.protocol.value,
                    "skipped": False,
                    "converged": e.status is Status.CONVERGED,
                    "status": e.status.value,
                    "rounds": e.rounds,
                    "final_fidelity": e.final_fidelity,
                    "pairs_paper": e.consumed[AccountingModel.GEOMETRIC],
                    "pairs_tree": e.consumed[AccountingModel.TREE],
                    "pairs_expected": e.consumed[AccountingModel.EXPECTED],
                }
            )
    return rows


TRAJECTORY_FIELDS = [
    "protocol",
    "round",
    "fidelity",
    "success_probability",
    "A",
    "B",
    "C",
    "D",
    "rotations",
    "pairs_paper",
    "pairs_tree",
    "pairs_expected",
]


def trajectory_rows(traj: Trajectory) -> list[dict]:
    """Per-round rows; round 0 is the initial state with no cost."""
    rows = [
        {
            "protocol": traj.protocol.value,
            "round": 0,
            "fidelity": traj.initial.A,
            "success_probability": "",
            **traj.initial.to_dict(),
            "rotations": "",
            "pairs_paper": "",
            "pairs_tree": "",
            "pairs_expected": "",
        }
    ]
    for r in traj.rounds:
        rows.append(
            {
                "protocol": traj.protocol.value,
                "round": r.index,
                "fidelity": r.fidelity,
                "success_probability": r.success_probability,
                **r.state.to_dict(),
                "rotations": "".join(r.rotations),
                "pairs_paper": r.cumulative_pairs[AccountingModel.GEOMETRIC],
                "pairs_tree": r.cumulative_pairs[AccountingModel.TREE],
                "pairs_expected": r.cumulative_pairs[AccountingModel.EXPECTED],
            }
        )
    return rows


def to_csv(rows: list[dict], fieldnames: list[str]) -> str:
    """CSV text with a header row; floats are written with ``repr`` precision."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()

"""Oracle verification and the discrepancy report.

:func:`verify` draws seeded random Bell-diagonal states, runs every
closed-form step against the density-matrix circuits and measures the
largest deviation. :func:`discrepancy_report` renders those results together
with a formula-by-formula check of the printed reference formulas and the
reproduction of the printed comparison table. Output is plain Markdown with
fixed number formats, so equal inputs give byte-identical reports.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import oracle, printed, protocols
from .bellspace import BellWeights, RotationAxis, from_bell_weights, werner
from .campaign import AccountingModel, compare
from .protocols import ProtocolId

TOLERANCE = 1e-9
DEFAULT_SAMPLES = 200

ORACLES = {
    ProtocolId.OX1: oracle.oracle_ox1_step,
    ProtocolId.OX2: oracle.oracle_ox2_step,
    ProtocolId.OX3: oracle.oracle_ox3_step,
}


@dataclass
class VerifyResult:
    seed: int
    samples: int
    hetero_samples: int
    max_deviation: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= TOLERANCE for v in self.max_deviation.values())


def _deviation(closed: protocols.StepOutcome, exact: tuple[BellWeights, float]) -> float:
    w, p = exact
    return max(
        float(np.max(np.abs(closed.state.as_array() - w.as_array()))),
        abs(closed.probability - p),
    )


def verify(seed: int = 0, samples: int = DEFAULT_SAMPLES) -> VerifyResult:
    """Compare closed-form steps with the exact circuits on random states.

    Identical-pair steps use ``samples`` states; the heterogeneous three-pair
    step uses ``samples // 4`` (at least one) random triples. Step functions
    are looked up at call time from :data:`oxpurify.protocols.STEPS`.
    """
    rng = np.random.default_rng(seed)
    hetero = max(1, samples // 4)
    result = VerifyResult(seed, samples, hetero)
    states = [protocols.random_physical_state(rng) for _ in range(samples)]
    for pid in ProtocolId:
        closed = protocols.STEPS[pid]
        result.max_deviation[pid.value] = max(
            (_deviation(closed(w), ORACLES[pid](w)) for w in states), default=0.0
        )
    dev = 0.0
    for _ in range(hetero):
        ws = [protocols.random_physical_state(rng) for _ in range(3)]
        dev = max(dev, _deviation(protocols.ox3_step_hetero(*ws), oracle.oracle_ox3_step(*ws)))
    result.max_deviation["ox3_hetero"] = dev
    return result


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def _verdict(dev: float) -> str:
    return "matches" if dev <= TOLERANCE else "DIFFERS"


def _formula_checks(rng: np.random.Generator, samples: int) -> list[tuple[str, str, float, str]]:
    """(quantity, printed formula, max deviation, corrected form) rows."""
    states = [protocols.random_physical_state(rng) for _ in range(samples)]
    rows = []

    dev_cx = dev_cy = dev_cz = dev_f = dev_f_printed = 0.0
    for w in states:
        exact = oracle.correlations_of(oracle.bell_diagonal_density(w)).as_array()
        pc = printed.coords(w)
        dev_cx = max(dev_cx, abs(pc[0] - exact[0]))
        dev_cy = max(dev_cy, abs(pc[1] - exact[1]))
        dev_cz = max(dev_cz, abs(pc[2] - exact[2]))
        dev_f = max(dev_f, abs(printed.fidelity(exact) - w.A))
        dev_f_printed = max(dev_f_printed, abs(printed.fidelity(pc) - w.A))
    rows += [
        ("cx from weights", printed.LABELS["coords"], dev_cx, "cx = A - B + C - D"),
        ("cy from weights", printed.LABELS["coords"], dev_cy, "cy = A + B - C - D"),
        ("cz from weights", printed.LABELS["coords"], dev_cz, "cz = A - B - C + D"),
        ("fidelity, measured correlations", printed.LABELS["fidelity"], dev_f, "unchanged"),
        ("fidelity, printed coordinates", printed.LABELS["fidelity"], dev_f_printed,
         "use the corrected cy, cz"),
    ]

    dev_upd = dev_p1 = dev_f2 = dev_f2x = dev_p2 = dev_f1 = dev_f1x = 0.0
    for w in states:
        c = from_bell_weights(w).as_array()
        w_exact, p_exact = oracle.two_pair_round(w, w, [])
        c_exact = from_bell_weights(w_exact).as_array()
        dev_upd = max(dev_upd, float(np.max(np.abs(printed.two_pair_update(c, c) - c_exact))))
        dev_p1 = max(dev_p1, abs(printed.p1(c) - p_exact))
        dev_f2 = max(dev_f2, abs(printed.ox2_fidelity(c) - w_exact.A))
        dev_f2x = max(dev_f2x, abs(printed.ox2_fidelity(c) / 2 - w_exact.A))
        w1, p1x = oracle.oracle_ox1_step(w)
        dev_p2 = max(dev_p2, abs(printed.p2(c) - p1x))
        dev_f1 = max(dev_f1, abs(printed.ox1_fidelity(c) - w1.A))
        dev_f1x = max(dev_f1x, abs(printed.ox1_fidelity(c) / 2 - w1.A))
    rows += [
        ("two-pair correlation update", printed.LABELS["two_pair_update"], dev_upd,
         "unchanged; the unsigned z term carries +"),
        ("two-pair probability, no rotation", "P1 = (1 + cz^2)/2", dev_p1, "unchanged"),
        ("two-pair fidelity, no rotation", printed.LABELS["ox2_fidelity"], dev_f2,
         "denominator 8 P1 (deviation with it: " + _fmt(dev_f2x) + ")"),
        ("two-pair probability, x rotation", "P2 = (1 + cy^2)/2", dev_p2, "unchanged"),
        ("two-pair fidelity, x rotation", printed.LABELS["ox1_fidelity"], dev_f1,
         "denominator 8 P2 (deviation with it: " + _fmt(dev_f1x) + ")"),
    ]

    # Three-pair formulas are stated for the weights entering the CCN gates.
    dev = dict.fromkeys(["F", "Fnum", "B", "C", "D", "P"], 0.0)
    for w in states:
        out = oracle.oracle_ox3_round(w, axis=None)
        we = oracle.bell_decompose(out.post_state).as_array()
        pe = out.probability
        pw = printed.ox3_weights(w.as_array(), n3=pe)
        A, B, C, D = w.as_array()
        dev["F"] = max(dev["F"], abs(printed.ox3_weights(w.as_array())[0] - we[0]))
        dev["Fnum"] = max(dev["Fnum"], abs(((A**2 + D**2) * A + (B**2 + C**2) * C) / (2 * pe) - we[0]))
        dev["B"] = max(dev["B"], abs(pw[1] - we[1]))
        dev["C"] = max(dev["C"], abs(pw[2] * printed.ox3_probability(w.as_array()) / pe - we[2]))
        dev["D"] = max(dev["D"], abs(pw[3] * printed.ox3_probability(w.as_array()) / pe - we[3]))
        dev["P"] = max(dev["P"], abs(printed.ox3_probability(w.as_array()) - pe))
    rows += [
        ("three-pair fidelity", printed.LABELS["ox3_fidelity"], dev["F"],
         "numerator correct; with the exact probability: " + _fmt(dev["Fnum"])),
        ("three-pair B weight (N3 = success probability)", printed.LABELS["ox3_b"], dev["B"], "unchanged"),
        ("three-pair C weight (exact probability)", printed.LABELS["ox3_c"], dev["C"],
         "C' = [A^2 C + (B^2 + C^2) A + D^2 C] / (2 P)"),
        ("three-pair D weight (exact probability)", printed.LABELS["ox3_d"], dev["D"], "unchanged"),
        ("three-pair success probability", printed.LABELS["ox3_p"], dev["P"],
         "P = [(A^2 + B^2 + C^2 + D^2)(A + C) + 2 (A D + B C)(B + D)] / 2"),
    ]

    dev_hf = dev_hp = dev_hnum = 0.0
    for _ in range(max(1, samples // 4)):
        ws = [protocols.random_physical_state(rng) for _ in range(3)]
        arrs = [w.as_array() for w in ws]
        out = oracle.oracle_ox3_round(*ws, axis=None)
        we = oracle.bell_decompose(out.post_state)
        dev_hf = max(dev_hf, abs(printed.hetero_fidelity(*arrs) - we.A))
        dev_hp = max(dev_hp, abs(printed.hetero_probability(*arrs) - out.probability))
        num = printed.hetero_fidelity(*arrs) * printed.hetero_probability(*arrs)
        dev_hnum = max(dev_hnum, abs(num / out.probability - we.A))
    rows += [
        ("three-pair fidelity, distinct pairs", printed.LABELS["hetero_fidelity"], dev_hf,
         "numerator correct; with the exact probability: " + _fmt(dev_hnum)),
        ("three-pair probability, distinct pairs", printed.LABELS["hetero_p"], dev_hp,
         "Pd = [(s + t)(A3 + C3) + (u + v)(B3 + D3)] / 2 with s = A1A2 + D1D2, "
         "t = B1B2 + C1C2, u = A1D2 + D1A2, v = B1C2 + C1B2"),
    ]
    return rows


def _cnot_table_checks() -> tuple[int, int]:
    """Cells reproduced under the transposed and the literal reading, per party."""
    unitary = oracle.embed_operator(oracle.CNOT, [0, 2], 4) @ oracle.embed_operator(oracle.CNOT, [1, 3], 4)
    transposed = literal = 0
    for party in (0, 1):
        q1, q2 = party, 2 + party
        for (row, col), entry in printed.CNOT_TABLE.items():
            want = _parse_pauli(entry, q1, q2)
            got_t = oracle.heisenberg(unitary, oracle.pauli_string([(q1, col), (q2, row)], 4))
            got_l = oracle.heisenberg(unitary, oracle.pauli_string([(q1, row), (q2, col)], 4))
            transposed += int(np.allclose(got_t, want, atol=0))
            literal += int(np.allclose(got_l, want, atol=0))
    return transposed, literal


def _parse_pauli(entry: str, q1: int, q2: int) -> np.ndarray:
    sign = -1 if entry.startswith("-") else 1
    body = entry.lstrip("-")
    ops = []
    for i in range(0, len(body), 2):
        axis, which = body[i], body[i + 1] if i + 1 < len(body) else ""
        if axis == "i":
            continue
        ops.append((q1 if which == "1" else q2, axis))
    return sign * oracle.pauli_string(ops, 4)


def _ccn_checks() -> list[str]:
    truth = np.zeros((8, 8))
    for a, b, c in itertools.product((0, 1), repeat=3):
        truth[(a << 2) | (b << 1) | (c ^ (a & b)), (a << 2) | (b << 1) | c] = 1
    std = printed.ccn_literal(z_sign=1)
    flipped = printed.ccn_literal(z_sign=-1)
    return [
        f"- Printed expansion `{printed.LABELS['ccn']}` with Z|0> = +|0>: "
        f"{'equals' if np.array_equal(std, truth) else 'does not equal'} the truth table "
        "c -> c XOR a.b (it flips the target when both controls are 0).",
        f"- Same expansion with Z|1> = +|1>: "
        f"{'equals' if np.array_equal(flipped, truth) else 'does not equal'} the truth table. "
        "The library uses this reading.",
    ]


def _layout_and_axis_section() -> list[str]:
    lines = ["## Three-pair round: surviving pair and rotation axis", ""]
    w = werner(printed.COMPARISON_INITIAL_FIDELITY)
    rng = np.random.default_rng(7)
    probe = protocols.random_physical_state(rng)
    lines.append("| layout | Bell-diagonal residual (random probe) | kept-branch fidelity numerator matches printed |")
    lines.append("|---|---|---|")
    for layout in oracle.Ox3Layout:
        out = oracle.oracle_ox3_round(probe, axis=None, layout=layout)
        diag, resid = oracle.bell_residual(out.post_state)
        A, B, C, D = probe.as_array()
        num = ((A**2 + D**2) * A + (B**2 + C**2) * C) / 2
        match = abs(num / out.probability - diag[0]) <= TOLERANCE
        lines.append(f"| {layout.value} | {_fmt(resid)} | {'yes' if match else 'no'} |")
    lines += ["", "Fidelity after each round from Werner(0.52), measure-12 layout:", ""]
    lines.append("| axis | " + " | ".join(f"r{i}" for i in range(1, 9)) + " |")
    lines.append("|---|" + "---|" * 8)
    for axis in (None, RotationAxis.X, RotationAxis.Y, RotationAxis.Z):
        state, fs = w, []
        for _ in range(8):
            state = protocols.ox3_step(state, axis=axis).state
            fs.append(f"{state.A:.4f}")
        name = "none" if axis is None else axis.value
        lines.append(f"| {name} | " + " | ".join(fs) + " |")
    lines += [
        "",
        "Only the z rotation gives a monotonically purifying three-pair round; it is the default.",
        "",
    ]
    return lines


def _printed_trajectory(pid: ProtocolId, w0: BellWeights, rounds: int):
    """Iterate the printed formulas literally; returns ``[(F, P)]`` per round."""
    out = []
    if pid is ProtocolId.OX3:
        w = w0.as_array()
        for _ in range(rounds):
            wr = w[[0, 2, 1, 3]]  # z rotation
            p = printed.ox3_probability(wr)
            w = printed.ox3_weights(wr)
            out.append((float(w[0]), float(p)))
        return out
    c = from_bell_weights(w0).as_array()
    for _ in range(rounds):
        if pid is ProtocolId.OX1:
            f, p = printed.ox1_fidelity(c), printed.p2(c)
            cr = c[[0, 2, 1]]
        else:
            cr = _reorder(c)
            f, p = printed.ox2_fidelity(cr), printed.p1(cr)
        c = printed.two_pair_update(cr, cr)
        out.append((float(f), float(p)))
    return out


def _reorder(c: np.ndarray) -> np.ndarray:
    ax, ay, az = np.abs(c)
    if az <= min(ax, ay):
        return c
    return c[[0, 2, 1]] if ay <= ax else c[[2, 1, 0]]


DIVERGENCE_SOURCE = {
    ProtocolId.OX1: f"fidelity formula `{printed.LABELS['ox1_fidelity']}` (normalization off by 2); "
    "state update and P2 agree",
    ProtocolId.OX2: f"fidelity formula `{printed.LABELS['ox2_fidelity']}` (normalization off by 2); "
    "state update and P1 agree",
    ProtocolId.OX3: f"`{printed.LABELS['ox3_p']}` and `{printed.LABELS['ox3_c']}` "
    "(wrong probability polynomial, A^2 D for A^2 C)",
}


def _comparison_section(target: float) -> list[str]:
    w0 = werner(printed.COMPARISON_INITIAL_FIDELITY)
    report = compare(w0, target)
    lines = [
        "## Comparison table reproduction",
        "",
        f"Initial state Werner({printed.COMPARISON_INITIAL_FIDELITY}), target fidelity {target}.",
        "",
        "| protocol | printed F | computed F | printed rounds | computed rounds | printed pairs | "
        "computed pairs (k^(n-1) model) | rounds match |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for e in report.entries:
        ref = printed.COMPARISON_TABLE[e.protocol]
        lines.append(
            f"| {e.protocol.value} | {ref.fidelity:.3f} | {e.final_fidelity:.4f} | {ref.iterations} | "
            f"{e.rounds} | {ref.consumed_pairs} | {e.consumed[AccountingModel.GEOMETRIC]:.0f} | "
            f"{'yes' if ref.iterations == e.rounds else 'NO'} |"
        )
    lines += [
        "",
        "The printed pair counts equal k^(n-1) for the printed round counts "
        "(2^8 = 256, 2^7 = 128, 3^2 = 9).",
        "",
    ]
    for e in report.entries:
        traj = report.trajectories[e.protocol]
        pt = _printed_trajectory(e.protocol, w0, len(traj.rounds))
        hit = next((i + 1 for i, (f, _) in enumerate(pt) if f >= target), None)
        lines += [
            f"### {e.protocol.value}",
            "",
            f"Divergence traces to: {DIVERGENCE_SOURCE[e.protocol]}.",
            "",
            f"Rounds to target: exact {len(traj.rounds)} ({traj.status.value}), "
            f"printed formulas {hit if hit is not None else 'not within ' + str(len(pt))}, "
            f"printed table {printed.COMPARISON_TABLE[e.protocol].iterations}.",
            "",
            "| round | exact F | exact P | printed-formula F | printed-formula P |",
            "|---|---|---|---|---|",
            f"| 0 | {w0.A:.6f} | | {w0.A:.6f} | |",
        ]
        for i, r in enumerate(traj.rounds):
            pf, pp = f"{pt[i][0]:.6f}", f"{pt[i][1]:.6f}"
            lines.append(f"| {r.index} | {r.fidelity:.6f} | {r.success_probability:.6f} | {pf} | {pp} |")
        lines.append("")
    return lines


def discrepancy_report(result: VerifyResult) -> str:
    """Markdown discrepancy report for a completed :func:`verify` run."""
    lines = [
        "# Discrepancy report",
        "",
        f"Seed {result.seed}, {result.samples} random states, "
        f"{result.hetero_samples} random triples. Tolerance {TOLERANCE:.0e}.",
        "",
        "## Closed form vs exact circuit",
        "",
        "| step | max deviation | verdict |",
        "|---|---|---|",
    ]
    for name, dev in result.max_deviation.items():
        lines.append(f"| {name} | {_fmt(dev)} | {_verdict(dev)} |")
    lines += ["", "## Printed formulas vs exact circuit", ""]
    lines += ["| quantity | printed formula | max deviation | verdict | corrected |", "|---|---|---|---|---|"]
    rng = np.random.default_rng(result.seed + 1)
    for quantity, label, dev, fix in _formula_checks(rng, result.samples):
        lines.append(f"| {quantity} | `{label}` | {_fmt(dev)} | {_verdict(dev)} | {fix} |")
    transposed, literal = _cnot_table_checks()
    lines += [
        "",
        "## Gates",
        "",
        f"- Bilateral CNOT table: {transposed}/32 cells (16 for Alice, 16 for Bob) reproduced when "
        "the entry in row r, column c is read as the image of sigma_c(source) sigma_r(target); "
        f"{literal}/32 under the literal row = source reading.",
    ]
    lines += _ccn_checks()
    lines.append("")
    lines += _layout_and_axis_section()
    lines += _comparison_section(printed.COMPARISON_TARGET)
    return "\n".join(lines).rstrip() + "\n"

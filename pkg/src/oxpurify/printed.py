"""Reference formulas and values exactly as originally printed.

These are kept verbatim, including their errors, so that the discrepancy
report can evaluate them side by side with the exact circuits. Nothing in the
simulation path imports this module.

Each formula carries a ``LABEL`` string: the printed expression itself, which
is how the report identifies it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bellspace import BellWeights
from .protocols import ProtocolId

LABELS = {
    "coords": "cx = A - B + C - D, cy = A - B - C - D, cz = A + B - C - D",
    "fidelity": "F = (1 + cx + cy + cz) / 4",
    "two_pair_update": "cx' = (cx cx' + cy cy')/(1 + cz cz'), cy' = (cx cy' + cy cx')/(1 + cz cz'), "
    "cz' = (cz + cz')/(1 + cz cz')",
    "ox2_fidelity": "F = [(1 + cz)^2 + (cx + cy)^2] / (4 P1),  P1 = (1 + cz^2)/2",
    "ox1_fidelity": "F = [(1 + cy)^2 + (cx + cz)^2] / (4 P2),  P2 = (1 + cy^2)/2",
    "ox3_fidelity": "F = [(A^2 + D^2) A + (B^2 + C^2) C] / (2 P3)",
    "ox3_b": "B' = (A + C) D B / N3",
    "ox3_c": "C' = [A^2 D + (B^2 + C^2) A + D^2 C] / (2 P3)",
    "ox3_d": "D' = (A D^2 + C B^2) / P3",
    "ox3_p": "P3 = [A^3 + (3B^2 + D^2) C + (3A + D) A D + 2 (A + C) B D + C^3] / 2",
    "hetero_fidelity": "F = [(A1 A2 + D1 D2) A3 + (B1 B2 + C1 C2) C3] / (2 Pd)",
    "hetero_p": "Pd = [A1 A2 (A3 + D3) + (B1 B2 + C1 C2 + D1 D2)(A3 + C3) "
    "+ 2 (A1 D2 + D1 A2 + B1 C2 + C1 B2)(B3 + D3)] / 2",
    "ccn": "CCN = [(1 + Z1)(1 + Z2) X3 + (1 + Z1)(1 - Z2) + (1 - Z1)(1 + Z2) + (1 - Z1)(1 - Z2)] / 4",
}


@dataclass(frozen=True)
class ComparisonRow:
    fidelity: float
    iterations: int
    consumed_pairs: int


# Printed comparison table: fidelity reached, rounds needed, pairs consumed,
# starting from fidelity 0.52 with a target of about 0.8.
COMPARISON_TABLE = {
    ProtocolId.OX1: ComparisonRow(0.853, 9, 256),
    ProtocolId.OX2: ComparisonRow(0.805, 8, 128),
    ProtocolId.OX3: ComparisonRow(0.843, 3, 9),
}
COMPARISON_INITIAL_FIDELITY = 0.52
COMPARISON_TARGET = 0.8

# Printed bilateral-CNOT table: (row label, column label) -> printed entry.
# Operators are strings over qubits 1 (source) and 2 (target), e.g. "-y1y2".
CNOT_TABLE = {
    ("i", "i"): "i",
    ("i", "x"): "x1x2",
    ("i", "y"): "y1x2",
    ("i", "z"): "z1",
    ("x", "i"): "x2",
    ("x", "x"): "x1",
    ("x", "y"): "y1",
    ("x", "z"): "z1x2",
    ("y", "i"): "z1y2",
    ("y", "x"): "y1z2",
    ("y", "y"): "-x1z2",
    ("y", "z"): "y2",
    ("z", "i"): "z1z2",
    ("z", "x"): "-y1y2",
    ("z", "y"): "x1y2",
    ("z", "z"): "z2",
}


def coords(w: BellWeights) -> np.ndarray:
    A, B, C, D = w.as_array()
    return np.array([A - B + C - D, A - B - C - D, A + B - C - D])


def fidelity(c) -> float:
    cx, cy, cz = np.asarray(c, dtype=float)
    return (1 + cx + cy + cz) / 4


def two_pair_update(c1, c2) -> np.ndarray:
    """The printed correlation update, with ``+`` for the unsigned z term."""
    x1, y1, z1 = np.asarray(c1, dtype=float)
    x2, y2, z2 = np.asarray(c2, dtype=float)
    n = 1 + z1 * z2
    return np.array([(x1 * x2 + y1 * y2) / n, (x1 * y2 + y1 * x2) / n, (z1 + z2) / n])


def p1(c) -> float:
    return 0.5 * (1 + float(c[2]) ** 2)


def p2(c) -> float:
    return 0.5 * (1 + float(c[1]) ** 2)


def ox2_fidelity(c) -> float:
    cx, cy, cz = np.asarray(c, dtype=float)
    return ((1 + cz) ** 2 + (cx + cy) ** 2) / (4 * p1(c))


def ox1_fidelity(c) -> float:
    """Stated for the correlations before the x rotation."""
    cx, cy, cz = np.asarray(c, dtype=float)
    return ((1 + cy) ** 2 + (cx + cz) ** 2) / (4 * p2(c))


def ox3_probability(w) -> float:
    A, B, C, D = np.asarray(w, dtype=float)
    return 0.5 * (A**3 + (3 * B**2 + D**2) * C + (3 * A + D) * A * D + 2 * (A + C) * B * D + C**3)


def ox3_weights(w, n3: float | None = None) -> np.ndarray:
    """Printed new weights; ``N3`` is never defined, ``P3`` is used by default."""
    A, B, C, D = np.asarray(w, dtype=float)
    p3 = ox3_probability(w)
    n3 = p3 if n3 is None else n3
    return np.array(
        [
            ((A**2 + D**2) * A + (B**2 + C**2) * C) / (2 * p3),
            (A + C) * D * B / n3,
            (A**2 * D + (B**2 + C**2) * A + D**2 * C) / (2 * p3),
            (A * D**2 + C * B**2) / p3,
        ]
    )


def hetero_probability(w1, w2, w3) -> float:
    A1, B1, C1, D1 = np.asarray(w1, dtype=float)
    A2, B2, C2, D2 = np.asarray(w2, dtype=float)
    A3, B3, C3, D3 = np.asarray(w3, dtype=float)
    return 0.5 * (
        A1 * A2 * (A3 + D3)
        + (B1 * B2 + C1 * C2 + D1 * D2) * (A3 + C3)
        + 2 * (A1 * D2 + D1 * A2 + B1 * C2 + C1 * B2) * (B3 + D3)
    )


def hetero_fidelity(w1, w2, w3) -> float:
    A1, B1, C1, D1 = np.asarray(w1, dtype=float)
    A2, B2, C2, D2 = np.asarray(w2, dtype=float)
    A3, B3, C3, D3 = np.asarray(w3, dtype=float)
    num = (A1 * A2 + D1 * D2) * A3 + (B1 * B2 + C1 * C2) * C3
    return num / (2 * hetero_probability(w1, w2, w3))


def ccn_literal(z_sign: int = 1) -> np.ndarray:
    """The printed Toffoli expansion evaluated with ``Z = z_sign * diag(1, -1)``."""
    i2 = np.eye(2)
    z = z_sign * np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    one = np.eye(8)
    z1 = np.kron(np.kron(z, i2), i2)
    z2 = np.kron(np.kron(i2, z), i2)
    x3 = np.kron(np.kron(i2, i2), x)
    return (
        (one + z1) @ (one + z2) @ x3 + (one + z1) @ (one - z2) + (one - z1) @ (one + z2) + (one - z1) @ (one - z2)
    ) / 4

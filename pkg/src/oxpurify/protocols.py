"""Closed-form single-round maps for the three purification protocols.

``ox1``
    Both parties rotate every pair about x, apply a bilateral CNOT (pair 1
    source, pair 2 target) and keep pair 1 when the z outcomes on pair 2
    coincide.
``ox2``
    Same round, but a rotation is only applied when it is needed to bring the
    smallest correlation magnitude into the z slot.
``ox3``
    Three pairs. Every pair is rotated about z, each party applies a CCN gate
    (pairs 1 and 2 control, pair 3 target), and pair 3 is kept when Alice's
    and Bob's Bell measurements on their pair-1/pair-2 qubits both give
    |phi+> or both give |phi->.

All maps are exact; :mod:`oxpurify.oracle` rebuilds the same rounds on the
full density matrix and the test suite checks agreement to 1e-9.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bellspace import (
    BELL_CORRELATIONS,
    BellWeights,
    CorrelationVector,
    RotationAxis,
    canonical_order,
    from_bell_weights,
    rotate_weights,
)

OX3_ROTATION = RotationAxis.Z


class ProtocolId(enum.Enum):
    OX1 = "ox1"
    OX2 = "ox2"
    OX3 = "ox3"

    @property
    def pairs_per_round(self) -> int:
        return 3 if self is ProtocolId.OX3 else 2


@dataclass(frozen=True)
class StepOutcome:
    state: BellWeights
    probability: float
    rotations_applied: list[RotationAxis] = field(default_factory=list)

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"success probability {self.probability!r} outside [0, 1]")


def bilateral_cnot_map(c1: CorrelationVector, c2: CorrelationVector) -> tuple[CorrelationVector, float]:
    """Source-pair correlations after a bilateral CNOT and z-coincidence post-selection.

    ``cx' = (cx cx2 + cy cy2) / (1 + cz cz2)``
    ``cy' = (cx cy2 + cy cx2) / (1 + cz cz2)``
    ``cz' = (cz + cz2) / (1 + cz cz2)``

    with success probability ``(1 + cz cz2) / 2``.
    """
    x1, y1, z1 = c1.as_array()
    x2, y2, z2 = c2.as_array()
    norm = 1.0 + z1 * z2
    out = CorrelationVector.from_array(
        np.clip([(x1 * x2 + y1 * y2) / norm, (x1 * y2 + y1 * x2) / norm, (z1 + z2) / norm], -1, 1)
    )
    return out, float(norm / 2.0)


def bilateral_cnot_weights(w1: BellWeights, w2: BellWeights) -> tuple[BellWeights, float]:
    """:func:`bilateral_cnot_map` in Bell weights.

    The kept source pair is |phi+> when both pairs carry the same phase flip
    (``A1 A2 + D1 D2``), |phi-> when they differ (``A1 D2 + D1 A2``), and
    likewise for the psi states. Working in weights keeps small error
    weights exact near fidelity 1, where correlations round to 1.
    """
    a1, b1, c1, d1 = w1.as_array()
    a2, b2, c2, d2 = w2.as_array()
    raw = np.array([a1 * a2 + d1 * d2, b1 * c2 + c1 * b2, b1 * b2 + c1 * c2, a1 * d2 + d1 * a2])
    p = min(float(raw.sum()), 1.0)
    return BellWeights.normalized(raw), p


def _two_pair_round(state: BellWeights, rotations: list[RotationAxis]) -> StepOutcome:
    for axis in rotations:
        state = rotate_weights(state, axis)
    new, p = bilateral_cnot_weights(state, state)
    return StepOutcome(new, p, list(rotations))


def ox1_step(state: BellWeights) -> StepOutcome:
    """Unconditional x rotation, then the bilateral CNOT round.

    The fidelity of the result is ``[(1 + cy)^2 + (cx + cz)^2] / (8 P)`` with
    ``P = (1 + cy^2) / 2``.
    """
    return _two_pair_round(state, [RotationAxis.X])


def ox2_step(state: BellWeights) -> StepOutcome:
    """Bilateral CNOT round, rotating only when ``|cz|`` is not the smallest.

    Without rotation the new fidelity is ``[(1 + cz)^2 + (cx + cy)^2] / (8 P)``
    with ``P = (1 + cz^2) / 2``.
    """
    _, rotations = canonical_order(from_bell_weights(state))
    return _two_pair_round(state, rotations)


def ccn_round_unnormalized(w1: np.ndarray, w2: np.ndarray, w3: np.ndarray) -> np.ndarray:
    """Unnormalized Bell weights of the surviving pair after the CCN round.

    Inputs are Bell-weight arrays of the (already rotated) control pairs 1, 2
    and target pair 3. With

        s = A1 A2 + D1 D2      t = B1 B2 + C1 C2
        u = A1 D2 + D1 A2      v = B1 C2 + C1 B2

    the kept branch is

        A = (s A3 + t C3) / 2      B = (u B3 + v D3) / 2
        C = (t A3 + s C3) / 2      D = (v B3 + u D3) / 2

    and its total is the success probability.
    """
    a1, b1, c1, d1 = w1
    a2, b2, c2, d2 = w2
    a3, b3, c3, d3 = w3
    s = a1 * a2 + d1 * d2
    t = b1 * b2 + c1 * c2
    u = a1 * d2 + d1 * a2
    v = b1 * c2 + c1 * b2
    return 0.5 * np.array(
        [s * a3 + t * c3, u * b3 + v * d3, t * a3 + s * c3, v * b3 + u * d3]
    )


def ox3_step_hetero(
    s1: BellWeights, s2: BellWeights, s3: BellWeights, axis: RotationAxis | None = OX3_ROTATION
) -> StepOutcome:
    """Three-pair CCN round on possibly different input pairs.

    Success probability is ``[(s + t)(A3 + C3) + (u + v)(B3 + D3)] / 2`` in the
    notation of :func:`ccn_round_unnormalized`.
    """
    rotations = [] if axis is None else [RotationAxis(axis)]
    ws = [s1, s2, s3]
    for ax in rotations:
        ws = [rotate_weights(w, ax) for w in ws]
    raw = ccn_round_unnormalized(*(w.as_array() for w in ws))
    p = min(float(raw.sum()), 1.0)
    if p <= 0:
        raise ValueError("CCN round has zero success probability")
    return StepOutcome(BellWeights.normalized(raw), p, rotations)


def ox3_step(state: BellWeights, axis: RotationAxis | None = OX3_ROTATION) -> StepOutcome:
    """Three identical pairs; same code path as :func:`ox3_step_hetero`."""
    return ox3_step_hetero(state, state, state, axis)


STEPS = {
    ProtocolId.OX1: ox1_step,
    ProtocolId.OX2: ox2_step,
    ProtocolId.OX3: ox3_step,
}


def step(protocol: ProtocolId, state: BellWeights) -> StepOutcome:
    return STEPS[ProtocolId(protocol)](state)


def random_physical_state(rng: np.random.Generator) -> BellWeights:
    """Draw ``(cx, cy, cz)`` uniformly from the cube and keep the first physical one."""
    while True:
        c = rng.uniform(-1.0, 1.0, size=3)
        w = (1.0 + BELL_CORRELATIONS @ c) / 4.0
        if np.all(w >= 0):
            return BellWeights.normalized(w)

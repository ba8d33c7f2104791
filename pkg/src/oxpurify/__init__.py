"""Entanglement purification of Bell-diagonal pairs: closed-form recurrence
maps for three bilateral-gate protocols, an exact density-matrix oracle that
checks them, and a multi-round campaign driver."""

from .bellspace import (
    BellWeights,
    CorrelationVector,
    InvalidStateError,
    NonPhysicalStateError,
    RotationAxis,
    apply_rotation,
    canonical_order,
    fidelity,
    from_bell_weights,
    to_bell_weights,
    werner,
)
from .campaign import (
    AccountingModel,
    ComparisonReport,
    RoundRecord,
    Status,
    Trajectory,
    compare,
    consumed_pairs,
    run_to_target,
    sweep,
)
from .protocols import (
    ProtocolId,
    StepOutcome,
    bilateral_cnot_map,
    ox1_step,
    ox2_step,
    ox3_step,
    ox3_step_hetero,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "AccountingModel",
    "BellWeights",
    "ComparisonReport",
    "CorrelationVector",
    "InvalidStateError",
    "NonPhysicalStateError",
    "ProtocolId",
    "RotationAxis",
    "RoundRecord",
    "Status",
    "StepOutcome",
    "Trajectory",
    "apply_rotation",
    "bilateral_cnot_map",
    "canonical_order",
    "compare",
    "consumed_pairs",
    "fidelity",
    "from_bell_weights",
    "ox1_step",
    "ox2_step",
    "ox3_step",
    "ox3_step_hetero",
    "run_to_target",
    "step",
    "sweep",
    "to_bell_weights",
    "werner",
]

"""Bell-diagonal two-qubit states in weight and correlation coordinates.

A Bell-diagonal state is written either as probabilities over the Bell basis,

    rho = A |phi+><phi+| + B |psi-><psi-| + C |psi+><psi+| + D |phi-><phi-|,

or as Pauli correlations,

    rho = (1 + cx sx tx - cy sy ty + cz sz tz) / 4,

where ``s`` acts on Alice's qubit and ``t`` on Bob's. The minus sign in front
of the ``y`` term makes every Bell state a vector of +-1 entries and puts
|phi+> at (1, 1, 1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

ATOL = 1e-12


class InvalidStateError(ValueError):
    """Raised when a state fails its validity checks."""


class NonPhysicalStateError(InvalidStateError):
    """Raised when correlations map to negative Bell weights."""


class RotationAxis(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


# rows: phi+, psi-, psi+, phi-; columns: (cx, cy, cz)
BELL_CORRELATIONS = np.array(
    [
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
)


@dataclass(frozen=True)
class BellWeights:
    """Probabilities of |phi+>, |psi->, |psi+>, |phi-> in that order."""

    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        w = self.as_array()
        if not np.all(np.isfinite(w)):
            raise InvalidStateError(f"non-finite Bell weights {tuple(w)}")
        if np.any(w < -ATOL) or np.any(w > 1 + ATOL):
            raise InvalidStateError(f"Bell weights outside [0, 1]: {tuple(w)}")
        if abs(w.sum() - 1.0) > ATOL:
            raise InvalidStateError(f"Bell weights sum to {w.sum()!r}, not 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C, self.D], dtype=float)

    @classmethod
    def from_array(cls, values) -> BellWeights:
        a, b, c, d = (float(v) for v in values)
        return cls(a, b, c, d)

    @classmethod
    def normalized(cls, values) -> BellWeights:
        """Build from unnormalized nonnegative weights, clipping roundoff negatives."""
        w = np.asarray(values, dtype=float)
        if np.any(w < -ATOL):
            raise NonPhysicalStateError(f"negative Bell weight in {tuple(w)}")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if total <= 0:
            raise InvalidStateError("all Bell weights are zero")
        return cls.from_array(w / total)

    def to_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}

    @classmethod
    def from_dict(cls, data: dict) -> BellWeights:
        return cls(float(data["A"]), float(data["B"]), float(data["C"]), float(data["D"]))


@dataclass(frozen=True)
class CorrelationVector:
    """Pauli correlation coefficients ``(cx, cy, cz)`` of a Bell-diagonal state."""

    cx: float
    cy: float
    cz: float

    def __post_init__(self):
        c = self.as_array()
        if not np.all(np.isfinite(c)):
            raise InvalidStateError(f"non-finite correlations {tuple(c)}")
        if np.any(np.abs(c) > 1 + ATOL):
            raise InvalidStateError(f"correlation magnitude exceeds 1: {tuple(c)}")
        w = _weights_from_correlations(c)
        if np.any(w < -ATOL):
            raise NonPhysicalStateError(
                f"correlations {tuple(c)} give negative Bell weights {tuple(w)}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.cz], dtype=float)

    @classmethod
    def from_array(cls, values) -> CorrelationVector:
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)

    def to_dict(self) -> dict:
        return {"cx": self.cx, "cy": self.cy, "cz": self.cz}

    @classmethod
    def from_dict(cls, data: dict) -> CorrelationVector:
        return cls(float(data["cx"]), float(data["cy"]), float(data["cz"]))


def _weights_from_correlations(c: np.ndarray) -> np.ndarray:
    return (1.0 + BELL_CORRELATIONS @ c) / 4.0


def from_bell_weights(w: BellWeights) -> CorrelationVector:
    """Correlation coordinates of a Bell-diagonal state.

    ``cx = A - B + C - D``, ``cy = A + B - C - D``, ``cz = A - B - C + D``.
    """
    return CorrelationVector.from_array(BELL_CORRELATIONS.T @ w.as_array())


def to_bell_weights(c: CorrelationVector) -> BellWeights:
    """Inverse of :func:`from_bell_weights`.

    Raises
    ------
    NonPhysicalStateError
        If any resulting weight is below ``-1e-12``.
    """
    w = _weights_from_correlations(c.as_array())
    if np.any(w < -ATOL):
        raise NonPhysicalStateError(f"correlations {c} give negative Bell weights {tuple(w)}")
    return BellWeights.from_array(w)


def fidelity(w: BellWeights) -> float:
    """Overlap with |phi+>, which is simply the ``A`` weight."""
    return w.A


def werner(F: float) -> BellWeights:
    """Werner state: weight ``F`` on |phi+>, ``(1 - F) / 3`` on each other Bell state."""
    if not 0.0 <= F <= 1.0:
        raise InvalidStateError(f"Werner fidelity {F!r} outside [0, 1]")
    r = (1.0 - F) / 3.0
    return BellWeights(F, r, r, r)


# Each bilateral pi/2 rotation exchanges two correlation coefficients, no signs.
_ROTATION_SWAP = {
    RotationAxis.X: (0, 2, 1),
    RotationAxis.Y: (2, 1, 0),
    RotationAxis.Z: (1, 0, 2),
}


def apply_rotation(c: CorrelationVector, axis: RotationAxis) -> CorrelationVector:
    """Correlations after both parties rotate by pi/2 about ``axis``.

    Alice applies ``R(pi/2)`` and Bob its complex conjugate, which leaves
    |phi+> invariant. The x rotation exchanges ``cy`` and ``cz``, the y
    rotation ``cx`` and ``cz``, and the z rotation ``cx`` and ``cy``.
    """
    axis = RotationAxis(axis)
    return CorrelationVector.from_array(c.as_array()[list(_ROTATION_SWAP[axis])])


def rotate_weights(w: BellWeights, axis: RotationAxis) -> BellWeights:
    """:func:`apply_rotation` expressed on Bell weights (a pure permutation)."""
    a, b, c, d = w.A, w.B, w.C, w.D
    axis = RotationAxis(axis)
    if axis is RotationAxis.X:
        return BellWeights(a, d, c, b)
    if axis is RotationAxis.Y:
        return BellWeights(a, b, d, c)
    return BellWeights(a, c, b, d)


def canonical_order(c: CorrelationVector) -> tuple[CorrelationVector, list[RotationAxis]]:
    """Rotate so that ``|cz| <= min(|cx|, |cy|)``.

    At most one rotation is needed: the smaller of ``|cx|``, ``|cy|`` is
    swapped into the z slot. Ties leave the state untouched.
    """
    ax, ay, az = np.abs(c.as_array())
    if az <= min(ax, ay):
        return c, []
    axis = RotationAxis.X if ay <= ax else RotationAxis.Y
    return apply_rotation(c, axis), [axis]

"""Dense density-matrix simulation of the purification circuits.

Everything here works on plain ``numpy`` arrays of shape ``(2**n, 2**n)`` with
``n <= 6``. Qubits are laid out as ``(A1, B1, A2, B2, A3, B3)``: pair ``k``
occupies positions ``2(k-1)`` (Alice) and ``2(k-1)+1`` (Bob), and position 0
is the most significant bit of a basis label.

The step functions at the bottom assemble full protocol rounds gate by gate
and are the reference against which the closed-form maps in
:mod:`oxpurify.protocols` are checked.
"""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .bellspace import (
    BellWeights,
    CorrelationVector,
    InvalidStateError,
    RotationAxis,
    canonical_order,
    from_bell_weights,
)

MAX_QUBITS = 6
HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
UNITARY_ATOL = 1e-12
BELL_RESIDUAL_ATOL = 1e-9
MIN_PROBABILITY = 1e-15

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"i": I2, "x": SX, "y": SY, "z": SZ}

_S2 = np.sqrt(0.5)
PHI_PLUS = np.array([_S2, 0, 0, _S2], dtype=complex)
PSI_MINUS = np.array([0, _S2, -_S2, 0], dtype=complex)
PSI_PLUS = np.array([0, _S2, _S2, 0], dtype=complex)
PHI_MINUS = np.array([_S2, 0, 0, -_S2], dtype=complex)
# Same order as BellWeights: A, B, C, D.
BELL_BASIS = np.column_stack([PHI_PLUS, PSI_MINUS, PSI_PLUS, PHI_MINUS])

CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]


class DegenerateOutcomeError(ValueError):
    """The post-selected branch has (numerically) zero probability."""


class Party(enum.Enum):
    ALICE = 0
    BOB = 1


class QubitIndex(NamedTuple):
    party: Party
    pair: int

    @property
    def position(self) -> int:
        return 2 * (self.pair - 1) + Party(self.party).value


@dataclass
class MeasurementOutcome:
    post_state: np.ndarray
    probability: float


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def num_qubits(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.ndim != 2 or rho.shape[1] != dim or 2**n != dim:
        raise InvalidStateError(f"expected a square 2^n matrix, got shape {rho.shape}")
    if n > MAX_QUBITS:
        raise InvalidStateError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
    return n


def _position(q, n: int) -> int:
    p = q.position if isinstance(q, QubitIndex) else int(q)
    if not 0 <= p < n:
        raise IndexError(f"qubit {q!r} out of range for {n} qubits")
    return p


def _positions(targets, n: int) -> list[int]:
    pos = [_position(q, n) for q in targets]
    if len(set(pos)) != len(pos):
        raise ValueError(f"duplicate qubits in {targets!r}")
    return pos


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho``."""
    num_qubits(rho)
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > HERMITIAN_ATOL:
        raise InvalidStateError(f"not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_ATOL:
        raise InvalidStateError(f"trace {tr} != 1")
    min_eig = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if min_eig < -PSD_ATOL:
        raise InvalidStateError(f"not positive semidefinite (min eigenvalue {min_eig:.3e})")
    return rho


def _apply_operator(rho: np.ndarray, op: np.ndarray, pos: Sequence[int], n: int) -> np.ndarray:
    """``op rho op^dagger`` with ``op`` acting on qubits ``pos``."""
    m = len(pos)
    letters = string.ascii_letters
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    new = list(letters[2 * n : 2 * n + m])
    new_c = list(letters[2 * n + m : 2 * n + 2 * m])
    g = op.reshape([2] * (2 * m))
    t = rho.reshape([2] * (2 * n))

    out_rows = rows.copy()
    for k, p in enumerate(pos):
        out_rows[p] = new[k]
    left = "".join(new + [rows[p] for p in pos]) + "," + "".join(rows + cols)
    t = np.einsum(left + "->" + "".join(out_rows + cols), g, t)

    out_cols = cols.copy()
    for k, p in enumerate(pos):
        out_cols[p] = new_c[k]
    right = "".join(new_c + [cols[p] for p in pos]) + "," + "".join(out_rows + cols)
    t = np.einsum(right + "->" + "".join(out_rows + out_cols), g.conj(), t)
    return t.reshape(2**n, 2**n)


def embed_operator(op: np.ndarray, targets, n: int) -> np.ndarray:
    """Full ``2**n`` operator acting as ``op`` on ``targets`` and identity elsewhere."""
    pos = _positions(targets, n)
    m = len(pos)
    rest = [q for q in range(n) if q not in pos]
    full = np.kron(op, np.eye(2 ** (n - m), dtype=complex)).reshape([2] * (2 * n))
    # axes of ``full`` are ordered (pos + rest) for rows, then the same for columns
    order = pos + rest
    perm = [order.index(q) for q in range(n)]
    full = full.transpose(perm + [n + p for p in perm])
    return full.reshape(2**n, 2**n)


def apply_gate(rho: np.ndarray, gate: np.ndarray, targets) -> np.ndarray:
    """Conjugate ``rho`` by ``gate`` acting on the listed qubits.

    The first target is the most significant qubit of ``gate``'s basis.
    """
    n = num_qubits(rho)
    pos = _positions(targets, n)
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2 ** len(pos),) * 2:
        raise ValueError(f"gate shape {gate.shape} does not match {len(pos)} targets")
    if np.max(np.abs(gate @ gate.conj().T - np.eye(gate.shape[0]))) > UNITARY_ATOL:
        raise ValueError("gate is not unitary")
    return _apply_operator(rho, gate, pos, n)


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Reduced state on ``keep``; kept qubits stay in ascending position order."""
    n = num_qubits(rho)
    if len(keep) == 0:
        raise ValueError("keep must name at least one qubit")
    pos = sorted(_positions(keep, n))
    letters = string.ascii_letters
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for q in range(n):
        if q not in pos:
            cols[q] = rows[q]
    spec = "".join(rows + cols) + "->" + "".join([rows[p] for p in pos] + [cols[p] for p in pos])
    d = 2 ** len(pos)
    return np.einsum(spec, rho.reshape([2] * (2 * n))).reshape(d, d)


def pauli_string(ops, n: int) -> np.ndarray:
    """Tensor product of single-qubit Paulis; ``ops`` is a list of ``(qubit, axis)``."""
    factors = [I2] * n
    for q, axis in ops:
        p = _position(q, n)
        factors[p] = factors[p] @ PAULI[str(axis).lower()]
    return kron(*factors)


def pauli_expectation(rho: np.ndarray, ops) -> float:
    """``tr(rho P)`` for the Pauli string named by ``ops`` (imaginary part dropped)."""
    n = num_qubits(rho)
    val = np.trace(rho @ pauli_string(ops, n))
    if abs(val.imag) > 1e-12:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def correlations_of(rho: np.ndarray) -> CorrelationVector:
    """Measured ``(<sx tx>, -<sy ty>, <sz tz>)`` of a two-qubit state."""
    a, b = 0, 1
    return CorrelationVector(
        pauli_expectation(rho, [(a, "x"), (b, "x")]),
        -pauli_expectation(rho, [(a, "y"), (b, "y")]),
        pauli_expectation(rho, [(a, "z"), (b, "z")]),
    )


def heisenberg(unitary: np.ndarray, op: np.ndarray) -> np.ndarray:
    """Heisenberg-picture image ``U^dagger op U``."""
    return unitary.conj().T @ op @ unitary


def bell_diagonal_density(w: BellWeights) -> np.ndarray:
    """4x4 matrix ``sum_k w_k |Bell_k><Bell_k|`` in the computational basis."""
    return (BELL_BASIS * w.as_array()) @ BELL_BASIS.conj().T


def bell_residual(rho: np.ndarray) -> tuple[np.ndarray, float]:
    """Bell-basis diagonal of a two-qubit state and its largest off-diagonal magnitude."""
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got {rho.shape}")
    m = BELL_BASIS.conj().T @ rho @ BELL_BASIS
    off = m - np.diag(np.diag(m))
    return np.real(np.diag(m)), float(np.max(np.abs(off)))


def bell_decompose(rho: np.ndarray) -> BellWeights:
    """Bell weights of a two-qubit state that must be Bell-diagonal."""
    diag, residual = bell_residual(rho)
    if residual > BELL_RESIDUAL_ATOL:
        raise InvalidStateError(f"state is not Bell-diagonal (residual {residual:.3e})")
    return BellWeights.normalized(diag)


def bilateral_rotation(axis: RotationAxis) -> np.ndarray:
    """``R(pi/2) (x) conj(R(pi/2))`` with ``R(t) = exp(-i t sigma / 2)``.

    For x and z this is ``exp(-i pi (sigma - tau) / 4)``; for y the conjugate
    flips the sign of Bob's generator. Either way |phi+> is left invariant.
    """
    s = PAULI[RotationAxis(axis).value]
    r = (I2 - 1j * s) / np.sqrt(2)
    return np.kron(r, r.conj())


def ccn_unitary() -> np.ndarray:
    """Toffoli gate built from its projector expansion.

    ``[(1+Z1)(1+Z2) X3 + (1+Z1)(1-Z2) + (1-Z1)(1+Z2) + (1-Z1)(1-Z2)] / 4``
    with ``Z = |1><1| - |0><0|``, so ``(1 + Z) / 2`` projects onto |1> and the
    target flips only when both controls are 1.
    """
    z1 = -kron(SZ, I2, I2)
    z2 = -kron(I2, SZ, I2)
    x3 = kron(I2, I2, SX)
    one = np.eye(8, dtype=complex)
    u = (
        (one + z1) @ (one + z2) @ x3
        + (one + z1) @ (one - z2)
        + (one - z1) @ (one + z2)
        + (one - z1) @ (one - z2)
    ) / 4
    return np.real_if_close(u).astype(complex)


def bilateral_cnot(rho: np.ndarray) -> np.ndarray:
    """CNOT(A1 -> A2) and CNOT(B1 -> B2) on a four-qubit state."""
    if num_qubits(rho) != 4:
        raise InvalidStateError("bilateral CNOT needs a 4-qubit state")
    rho = apply_gate(rho, CNOT, [0, 2])
    return apply_gate(rho, CNOT, [1, 3])


def bilateral_ccn(rho: np.ndarray) -> np.ndarray:
    """Each party applies CCN with its pair-1 and pair-2 qubits as controls."""
    if num_qubits(rho) != 6:
        raise InvalidStateError("bilateral CCN needs a 6-qubit state")
    u = ccn_unitary()
    rho = apply_gate(rho, u, [0, 2, 4])
    return apply_gate(rho, u, [1, 3, 5])


def _post_select(rho: np.ndarray, projector: np.ndarray, pos: list[int], keep: list[int]):
    n = num_qubits(rho)
    projected = _apply_operator(rho, projector, pos, n)
    p = float(np.real(np.trace(projected)))
    if p < MIN_PROBABILITY:
        raise DegenerateOutcomeError(f"keep branch has probability {p:.3e}")
    reduced = partial_trace(projected, keep) / p
    reduced = (reduced + reduced.conj().T) / 2
    return MeasurementOutcome(check_density_matrix(reduced), min(p, 1.0))


def _pair_positions(pair: int) -> list[int]:
    return [2 * (pair - 1), 2 * (pair - 1) + 1]


COINCIDENCE_ZZ = np.diag([1, 0, 0, 1]).astype(complex)


def measure_zz_coincidence(rho: np.ndarray, target_pair: int = 2) -> MeasurementOutcome:
    """Measure both qubits of ``target_pair`` in z and keep coinciding results.

    Returns the renormalized state of the other pair and the probability of
    coincidence.
    """
    if num_qubits(rho) != 4:
        raise InvalidStateError("coincidence measurement needs a 4-qubit state")
    if target_pair not in (1, 2):
        raise IndexError(f"pair {target_pair} not in a 4-qubit state")
    keep_pair = 3 - target_pair
    return _post_select(rho, COINCIDENCE_ZZ, _pair_positions(target_pair), _pair_positions(keep_pair))


def coincidence_projector_bell() -> np.ndarray:
    """``|phi+><phi+| (x) |phi+><phi+| + |phi-><phi-| (x) |phi-><phi-|`` on (A_i A_j, B_i B_j)."""
    pp = np.outer(PHI_PLUS, PHI_PLUS.conj())
    pm = np.outer(PHI_MINUS, PHI_MINUS.conj())
    return np.kron(pp, pp) + np.kron(pm, pm)


def bell_projection_measure(rho: np.ndarray, pairs: tuple[int, int] = (1, 2)) -> MeasurementOutcome:
    """Alice and Bob Bell-measure their halves of ``pairs`` and keep matching phi outcomes.

    The kept branch is Alice's ``(A_i, A_j)`` and Bob's ``(B_i, B_j)`` both in
    |phi+>, or both in |phi->. The remaining pair survives.
    """
    if num_qubits(rho) != 6:
        raise InvalidStateError("Bell projection needs a 6-qubit state")
    i, j = pairs
    if i == j or not {i, j} <= {1, 2, 3}:
        raise IndexError(f"invalid measured pairs {pairs}")
    alice = [2 * (i - 1), 2 * (j - 1)]
    bob = [2 * (i - 1) + 1, 2 * (j - 1) + 1]
    (keep_pair,) = {1, 2, 3} - {i, j}
    return _post_select(rho, coincidence_projector_bell(), alice + bob, _pair_positions(keep_pair))


def _rotate_all(rho: np.ndarray, axis: RotationAxis, n_pairs: int) -> np.ndarray:
    u = bilateral_rotation(axis)
    for k in range(1, n_pairs + 1):
        rho = check_density_matrix(apply_gate(rho, u, _pair_positions(k)))
    return rho


def two_pair_round(w1: BellWeights, w2: BellWeights, rotations) -> tuple[BellWeights, float]:
    """Rotate both pairs, bilateral CNOT, keep pair 1 on z coincidence of pair 2."""
    rho = check_density_matrix(np.kron(bell_diagonal_density(w1), bell_diagonal_density(w2)))
    for axis in rotations:
        rho = _rotate_all(rho, axis, 2)
    rho = check_density_matrix(bilateral_cnot(rho))
    out = measure_zz_coincidence(rho, target_pair=2)
    return bell_decompose(out.post_state), out.probability


def oracle_ox1_step(w1: BellWeights, w2: BellWeights | None = None) -> tuple[BellWeights, float]:
    """x rotation on both pairs, bilateral CNOT, z coincidence on pair 2."""
    return two_pair_round(w1, w1 if w2 is None else w2, [RotationAxis.X])


def oracle_ox2_step(w1: BellWeights, w2: BellWeights | None = None) -> tuple[BellWeights, float]:
    """As :func:`oracle_ox1_step`, rotating only when :func:`canonical_order` asks.

    The rotation is chosen from the first pair's state (the ensemble).
    """
    _, rotations = canonical_order(from_bell_weights(w1))
    return two_pair_round(w1, w1 if w2 is None else w2, rotations)


class Ox3Layout(enum.Enum):
    """Which pairs the final Bell measurement consumes."""

    MEASURE_12 = "measure-12"
    MEASURE_23 = "measure-23"


def oracle_ox3_round(
    w1: BellWeights,
    w2: BellWeights | None = None,
    w3: BellWeights | None = None,
    axis: RotationAxis | None = RotationAxis.Z,
    layout: Ox3Layout = Ox3Layout.MEASURE_12,
) -> MeasurementOutcome:
    """One three-pair CCN round on the full 64-dimensional state.

    Both parties rotate every pair about ``axis`` (skipped when ``None``),
    apply CCN with pairs 1 and 2 as controls and pair 3 as target, then
    post-select on the coincidence Bell projector. With the default layout
    pairs 1 and 2 are measured and pair 3 survives. The surviving state is
    returned as is; under ``MEASURE_23`` it is generally not Bell-diagonal.
    """
    w2 = w1 if w2 is None else w2
    w3 = w1 if w3 is None else w3
    rho = check_density_matrix(
        kron(bell_diagonal_density(w1), bell_diagonal_density(w2), bell_diagonal_density(w3))
    )
    if axis is not None:
        rho = _rotate_all(rho, axis, 3)
    rho = check_density_matrix(bilateral_ccn(rho))
    layout = Ox3Layout(layout)
    pairs = (1, 2) if layout is Ox3Layout.MEASURE_12 else (2, 3)
    return bell_projection_measure(rho, pairs)


def oracle_ox3_step(
    w1: BellWeights,
    w2: BellWeights | None = None,
    w3: BellWeights | None = None,
    axis: RotationAxis | None = RotationAxis.Z,
    layout: Ox3Layout = Ox3Layout.MEASURE_12,
) -> tuple[BellWeights, float]:
    """:func:`oracle_ox3_round` followed by a strict Bell decomposition."""
    out = oracle_ox3_round(w1, w2, w3, axis, layout)
    return bell_decompose(out.post_state), out.probability


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested list of ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]

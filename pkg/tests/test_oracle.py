import itertools
import json
from functools import reduce

import numpy as np
import pytest

from oxpurify import oracle, printed
from oxpurify.bellspace import BellWeights, InvalidStateError, RotationAxis, from_bell_weights, werner
from oxpurify.oracle import (
    CNOT,
    PHI_MINUS,
    PHI_PLUS,
    Party,
    QubitIndex,
    apply_gate,
    bell_diagonal_density,
    bell_projection_measure,
    ccn_unitary,
    check_density_matrix,
    embed_operator,
    heisenberg,
    measure_zz_coincidence,
    partial_trace,
    pauli_expectation,
    pauli_string,
)


def bilateral_cnot_unitary():
    return embed_operator(CNOT, [0, 2], 4) @ embed_operator(CNOT, [1, 3], 4)


def parse_cell(entry, q1, q2):
    sign = -1 if entry.startswith("-") else 1
    body = entry.lstrip("-")
    ops = [(q1 if body[i + 1] == "1" else q2, body[i]) for i in range(0, len(body) - 1, 2)]
    return sign * pauli_string(ops, 4)


# Alice's copy uses qubits (A1, A2) = (0, 2); Bob's uses (B1, B2) = (1, 3).
@pytest.mark.parametrize("party", [0, 1], ids=["sigma", "tau"])
@pytest.mark.parametrize("cell", sorted(printed.CNOT_TABLE), ids=lambda c: "".join(c))
def test_cnot_table_cell(cell, party):
    row, col = cell
    q1, q2 = party, party + 2
    # The column label names the source operator and the row label the target.
    image = heisenberg(bilateral_cnot_unitary(), pauli_string([(q1, col), (q2, row)], 4))
    np.testing.assert_array_equal(image, parse_cell(printed.CNOT_TABLE[cell], q1, q2))


def test_cnot_table_literal_reading_fails_mostly():
    u = bilateral_cnot_unitary()
    hits = sum(
        np.array_equal(heisenberg(u, pauli_string([(0, r), (2, c)], 4)), parse_cell(e, 0, 2))
        for (r, c), e in printed.CNOT_TABLE.items()
    )
    assert hits == 4


@pytest.mark.parametrize(
    "source, target, expected",
    [("x", "i", "x1x2"), ("x", "z", "-y1y2"), ("z", "x", "z1x2"), ("i", "z", "z1z2")],
)
def test_cnot_heisenberg_examples(source, target, expected):
    image = heisenberg(bilateral_cnot_unitary(), pauli_string([(0, source), (2, target)], 4))
    np.testing.assert_array_equal(image, parse_cell(expected, 0, 2))


def truth_table():
    t = np.zeros((8, 8))
    for a, b, c in itertools.product((0, 1), repeat=3):
        t[(a << 2) | (b << 1) | (c ^ (a & b)), (a << 2) | (b << 1) | c] = 1
    return t


def test_ccn_truth_table():
    np.testing.assert_array_equal(ccn_unitary(), truth_table())


def test_ccn_examples():
    u = ccn_unitary()
    basis = np.eye(8)
    np.testing.assert_array_equal(u @ basis[0b110], basis[0b111])
    np.testing.assert_array_equal(u @ basis[0b010], basis[0b010])


def test_ccn_unitary_and_involution():
    u = ccn_unitary()
    assert np.max(np.abs(u @ u.conj().T - np.eye(8))) <= 1e-15
    assert np.max(np.abs(u @ u - np.eye(8))) <= 1e-15


def test_printed_expansion_needs_flipped_z():
    assert not np.array_equal(printed.ccn_literal(z_sign=1), truth_table())
    np.testing.assert_array_equal(printed.ccn_literal(z_sign=-1), truth_table())


def test_bilateral_ccn_bell_example():
    vec = lambda *v: reduce(np.kron, v)  # noqa: E731
    u = embed_operator(ccn_unitary(), [0, 2, 4], 6) @ embed_operator(ccn_unitary(), [1, 3, 5], 6)
    out = u @ vec(PHI_PLUS, PHI_PLUS, PHI_MINUS)
    expected = 0.5 * (
        vec(PHI_PLUS, PHI_PLUS, PHI_MINUS)
        + vec(PHI_MINUS, PHI_PLUS, PHI_MINUS)
        + vec(PHI_PLUS, PHI_MINUS, PHI_MINUS)
        - vec(PHI_MINUS, PHI_MINUS, PHI_MINUS)
    )
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_apply_gate_matches_embedding(rng):
    w = [BellWeights.normalized(rng.uniform(size=4)) for _ in range(3)]
    rho = oracle.kron(*(bell_diagonal_density(x) for x in w))
    u = embed_operator(ccn_unitary(), [0, 2, 4], 6)
    np.testing.assert_allclose(apply_gate(rho, ccn_unitary(), [0, 2, 4]), u @ rho @ u.conj().T, atol=1e-15)


def test_apply_gate_accepts_qubit_indices():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1
    x = oracle.PAULI["x"]
    out = apply_gate(rho, x, [QubitIndex(Party.BOB, 1)])
    assert out[1, 1] == 1
    np.testing.assert_array_equal(apply_gate(rho, np.eye(2), [0]), rho)


def test_apply_gate_rejects_bad_input():
    rho = np.eye(4, dtype=complex) / 4
    with pytest.raises(ValueError):
        apply_gate(rho, np.diag([1.0, 2.0]), [0])
    with pytest.raises(ValueError):
        apply_gate(rho, CNOT, [1, 1])
    with pytest.raises(IndexError):
        apply_gate(rho, np.eye(2), [2])


def test_partial_trace_of_product():
    a = bell_diagonal_density(BellWeights(0.4, 0.3, 0.2, 0.1))
    b = bell_diagonal_density(werner(0.7))
    rho = np.kron(a, b)
    np.testing.assert_allclose(partial_trace(rho, [0, 1]), a, atol=1e-15)
    np.testing.assert_allclose(partial_trace(rho, [2, 3]), b, atol=1e-15)
    np.testing.assert_allclose(partial_trace(a, [0]), np.eye(2) / 2, atol=1e-15)
    with pytest.raises(ValueError):
        partial_trace(rho, [])


def test_check_density_matrix_rejects():
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.eye(4, dtype=complex))
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.diag([1.5, -0.5, 0, 0]).astype(complex))
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.eye(3) / 3)
    with pytest.raises(InvalidStateError):
        check_density_matrix(np.eye(2**7) / 2**7)


def test_pauli_expectations_of_phi_plus():
    rho = bell_diagonal_density(BellWeights(1, 0, 0, 0))
    assert pauli_expectation(rho, [(0, "x"), (1, "x")]) == pytest.approx(1, abs=1e-15)
    assert pauli_expectation(rho, [(0, "y"), (1, "y")]) == pytest.approx(-1, abs=1e-15)
    w = werner(0.52)
    zz = pauli_expectation(bell_diagonal_density(w), [(0, "z"), (1, "z")])
    assert zz == pytest.approx(from_bell_weights(w).cz, abs=1e-15)


def test_bilateral_cnot_fixes_phi_plus_pair():
    phi = bell_diagonal_density(BellWeights(1, 0, 0, 0))
    rho = np.kron(phi, phi)
    np.testing.assert_allclose(oracle.bilateral_cnot(rho), rho, atol=1e-15)


def test_coincidence_on_phi_plus():
    phi = bell_diagonal_density(BellWeights(1, 0, 0, 0))
    out = measure_zz_coincidence(np.kron(phi, phi))
    assert out.probability == pytest.approx(1, abs=1e-15)
    np.testing.assert_allclose(out.post_state, phi, atol=1e-15)


def test_coincidence_on_maximally_mixed():
    mixed = np.eye(4, dtype=complex) / 4
    out = measure_zz_coincidence(np.kron(mixed, mixed))
    assert out.probability == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(out.post_state, mixed, atol=1e-15)


def test_coincidence_probability_without_gate_werner():
    w = werner(0.52)
    rho = np.kron(bell_diagonal_density(w), bell_diagonal_density(w))
    out = measure_zz_coincidence(rho)
    # Without a gate, pair 2 coincides with probability (1 + cz) / 2.
    assert out.probability == pytest.approx((1 + from_bell_weights(w).cz) / 2, abs=1e-15)


def test_coincidence_degenerate():
    psi = bell_diagonal_density(BellWeights(0, 0, 1, 0))
    with pytest.raises(oracle.DegenerateOutcomeError):
        measure_zz_coincidence(np.kron(psi, psi))


def test_bell_projection_on_three_phi_plus():
    phi = bell_diagonal_density(BellWeights(1, 0, 0, 0))
    out = bell_projection_measure(oracle.kron(phi, phi, phi))
    assert out.probability == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(out.post_state, phi, atol=1e-15)


def test_bell_projection_degenerate():
    psi = bell_diagonal_density(BellWeights(0, 1, 0, 0))
    phi = bell_diagonal_density(BellWeights(1, 0, 0, 0))
    with pytest.raises(oracle.DegenerateOutcomeError):
        bell_projection_measure(oracle.kron(phi, psi, phi))


def test_measure_23_layout_not_bell_diagonal():
    out = oracle.oracle_ox3_round(werner(0.52), layout=oracle.Ox3Layout.MEASURE_23)
    _, residual = oracle.bell_residual(out.post_state)
    assert residual > 1e-3
    with pytest.raises(InvalidStateError):
        oracle.bell_decompose(out.post_state)


def test_only_z_rotation_purifies_three_pair_round():
    def trajectory(axis):
        state, fs = werner(0.52), []
        for _ in range(5):
            state = oracle.oracle_ox3_step(state, axis=axis)[0]
            fs.append(state.A)
        return fs

    z = trajectory(RotationAxis.Z)
    assert all(b > a for a, b in zip(z, z[1:]))
    for axis in (None, RotationAxis.X):
        fs = trajectory(axis)
        assert fs[-1] < fs[1]
    assert trajectory(RotationAxis.Y)[-1] < z[-1]


def test_matrix_json_round_trip():
    rho = bell_diagonal_density(BellWeights(0.4, 0.3, 0.2, 0.1)) @ oracle.bilateral_rotation(RotationAxis.Y)
    back = oracle.matrix_from_json(json.loads(json.dumps(oracle.matrix_to_json(rho))))
    np.testing.assert_array_equal(back, rho)


def test_branch_probabilities_sum_to_one(rng):
    w1, w2, w3 = (BellWeights.normalized(rng.uniform(size=4)) for _ in range(3))
    rho4 = oracle.bilateral_cnot(np.kron(bell_diagonal_density(w1), bell_diagonal_density(w2)))
    keep = measure_zz_coincidence(rho4).probability
    other = np.trace(embed_operator(np.eye(4) - oracle.COINCIDENCE_ZZ, [2, 3], 4) @ rho4).real
    assert keep + other == pytest.approx(1, abs=1e-12)

    rho6 = oracle.bilateral_ccn(oracle.kron(*(bell_diagonal_density(w) for w in (w1, w2, w3))))
    keep = bell_projection_measure(rho6).probability
    proj = oracle.coincidence_projector_bell()
    other = np.trace(embed_operator(np.eye(16) - proj, [0, 2, 1, 3], 6) @ rho6).real
    assert keep + other == pytest.approx(1, abs=1e-12)

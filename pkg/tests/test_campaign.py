import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oxpurify.bellspace import BellWeights, werner
from oxpurify.campaign import (
    SWEEP_FIELDS,
    TRAJECTORY_FIELDS,
    AccountingModel,
    Status,
    Trajectory,
    compare,
    consumed_pairs,
    geometric_pairs,
    run_to_target,
    sweep,
    to_csv,
    trajectory_rows,
)
from oxpurify.protocols import ProtocolId, step

from .conftest import bell_weights

PHI_PLUS = BellWeights(1, 0, 0, 0)
MIXED = BellWeights(0.25, 0.25, 0.25, 0.25)


@pytest.mark.parametrize("k, n, pairs", [(2, 9, 256), (2, 8, 128), (3, 3, 9)])
def test_geometric_pairs_reproduces_printed_counts(k, n, pairs):
    assert geometric_pairs(k, n) == pairs


# Frozen Werner(0.52) -> 0.8 results.
WERNER_RUNS = {
    ProtocolId.OX1: (8, 0.8096619750158031),
    ProtocolId.OX2: (8, 0.8096619750158031),
    ProtocolId.OX3: (6, 0.8542404970379591),
}


@pytest.mark.parametrize("pid", list(ProtocolId), ids=lambda p: p.value)
def test_werner_run_frozen(pid):
    traj = run_to_target(pid, werner(0.52), 0.8)
    rounds, final = WERNER_RUNS[pid]
    assert traj.status is Status.CONVERGED
    assert len(traj.rounds) == rounds
    assert traj.final_fidelity == pytest.approx(final, abs=1e-14)
    assert [r.index for r in traj.rounds] == list(range(1, rounds + 1))


def test_consumed_pairs_models():
    traj = run_to_target(ProtocolId.OX3, werner(0.52), 0.8)
    n = len(traj.rounds)
    assert consumed_pairs(traj, AccountingModel.GEOMETRIC) == 3 ** (n - 1)
    assert consumed_pairs(traj, AccountingModel.TREE) == 3**n
    expected = math.prod(3 / p for p in traj.probabilities())
    assert consumed_pairs(traj, AccountingModel.EXPECTED) == pytest.approx(expected, rel=1e-12)


def test_tree_single_round_is_k():
    for pid in ProtocolId:
        traj = run_to_target(pid, PHI_PLUS, 0.9)
        assert consumed_pairs(traj, AccountingModel.TREE) == pid.pairs_per_round


def test_consumed_pairs_empty_trajectory():
    with pytest.raises(ValueError):
        consumed_pairs(Trajectory(ProtocolId.OX1, PHI_PLUS, 0.9), AccountingModel.GEOMETRIC)


@pytest.mark.parametrize("pid", list(ProtocolId), ids=lambda p: p.value)
def test_phi_plus_converges_in_one_round(pid):
    traj = run_to_target(pid, PHI_PLUS, 0.99)
    assert traj.status is Status.CONVERGED and len(traj.rounds) == 1
    assert traj.final_fidelity == 1.0


@pytest.mark.parametrize("pid", list(ProtocolId), ids=lambda p: p.value)
def test_maximally_mixed_is_fixed_point(pid):
    traj = run_to_target(pid, MIXED, 0.9)
    assert traj.status is Status.FIXED_POINT
    assert not traj.converged
    assert len(traj.rounds) == 1


@pytest.mark.parametrize("pid", list(ProtocolId), ids=lambda p: p.value)
def test_target_one_not_converged(pid):
    traj = run_to_target(pid, werner(0.52), 1.0)
    assert traj.status is not Status.CONVERGED
    assert traj.rounds


def test_werner_below_half_drifts_to_mixed():
    report = compare(werner(0.3), 0.8)
    for e in report.entries:
        assert e.status is Status.FIXED_POINT
        assert e.final_fidelity == pytest.approx(0.25, abs=1e-12)


def test_max_rounds_status():
    traj = run_to_target(ProtocolId.OX1, werner(0.52), 0.8, max_rounds=3)
    assert traj.status is Status.MAX_ROUNDS and len(traj.rounds) == 3


def test_invalid_arguments():
    with pytest.raises(ValueError):
        run_to_target(ProtocolId.OX1, PHI_PLUS, 0.0)
    with pytest.raises(ValueError):
        run_to_target(ProtocolId.OX1, PHI_PLUS, 0.9, max_rounds=0)


def test_replay_determinism():
    for pid in ProtocolId:
        traj = run_to_target(pid, werner(0.52), 0.8)
        state = traj.initial
        for r in traj.rounds:
            out = step(pid, state)
            assert out.state == r.state and out.probability == r.success_probability
            state = out.state


def test_ox3_first_round_beats_ox2():
    report = compare(werner(0.52), 0.8)
    f2 = report.trajectories[ProtocolId.OX2].fidelities()
    f3 = report.trajectories[ProtocolId.OX3].fidelities()
    assert f3[1] > f2[1]


def test_compare_phi_plus():
    report = compare(PHI_PLUS, 0.8)
    for e in report.entries:
        assert e.rounds == 1 and e.consumed[AccountingModel.GEOMETRIC] == 1
    json.dumps(report.to_dict())


def test_sweep_single_point_matches_compare():
    rows = sweep([0.52], 0.8)
    report = compare(werner(0.52), 0.8)
    assert [r["rounds"] for r in rows] == [e.rounds for e in report.entries]
    assert [r["final_fidelity"] for r in rows] == [e.final_fidelity for e in report.entries]


def test_sweep_skips_non_physical_points():
    rows = sweep([(1.0, 1.0, -1.0), 0.7, 1.3], 0.8)
    skipped = [r for r in rows if r["skipped"]]
    assert [r["point"] for r in skipped] == [0, 2]
    assert len(rows) == 2 + 3


def test_sweep_round_counts_monotone():
    grid = [0.55, 0.65, 0.75, 0.85, 0.95]
    rows = sweep(grid, 0.8)
    counts = {pid.value: [r["rounds"] for r in rows if r["protocol"] == pid.value] for pid in ProtocolId}
    assert counts == {"ox1": [6, 3, 2, 1, 1], "ox2": [6, 3, 2, 1, 1], "ox3": [4, 2, 1, 1, 1]}
    for series in counts.values():
        assert all(b <= a for a, b in zip(series, series[1:]))


def test_csv_round_trip():
    traj = run_to_target(ProtocolId.OX3, werner(0.52), 0.8)
    text = to_csv(trajectory_rows(traj), TRAJECTORY_FIELDS)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["round"] == "0" and float(rows[0]["fidelity"]) == 0.52
    assert [float(r["fidelity"]) for r in rows] == traj.fidelities()
    text = to_csv(sweep([0.6], 0.8), SWEEP_FIELDS)
    assert list(csv.DictReader(io.StringIO(text)))[0].keys() == set(SWEEP_FIELDS)


@settings(max_examples=40, deadline=None)
@given(bell_weights(min_weight=0.01), st.sampled_from(list(ProtocolId)))
def test_accounting_order(w, pid):
    traj = run_to_target(pid, w, 0.9, max_rounds=20)
    c = traj.rounds[-1].cumulative_pairs
    assert c[AccountingModel.EXPECTED] >= c[AccountingModel.TREE] >= c[AccountingModel.GEOMETRIC]
    fs = np.array(traj.fidelities())
    assert np.all((fs >= 0) & (fs <= 1))


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.55, max_value=0.99))
def test_modified_protocols_non_decreasing_on_werner(F):
    for pid in (ProtocolId.OX2, ProtocolId.OX3):
        fs = run_to_target(pid, werner(F), 0.999, max_rounds=30).fidelities()[1:]
        assert all(b >= a - 1e-15 for a, b in zip(fs, fs[1:]))

"""Acceptance gate: the ten cross-validation criteria, one test each.

The randomized battery runs once per session (twice internally for the
determinism comparison); each test here asserts one criterion from the
frozen report so the pass/fail line in the pytest output names the
criterion it covers.
"""

import pytest

from riccstab import acceptance


@pytest.fixture(scope="session")
def battery():
    return acceptance.selftest(seed=0)


def criterion(battery, name):
    entry = battery.report["criteria"][name]
    assert entry["passed"], f"{name} failed: {entry}"
    return entry


def test_criterion_01_positive_oracle(battery):
    entry = criterion(battery, "positive_oracle")
    assert entry["cases"] == 200
    assert entry["mismatches"] == 0
    assert entry["feasible"] > 0 and entry["refuted"] > 0
    assert battery.timings["first_run"]["positive_oracle"] < 120.0


def test_criterion_02_three_by_three_oracle(battery):
    entry = criterion(battery, "three_by_three_oracle")
    assert entry["chain"]["cases"] == 200
    assert entry["fan_in"]["cases"] == 200
    assert entry["chain"]["mismatches"] == 0
    assert entry["fan_in"]["mismatches"] == 0


def test_criterion_03_signature_classes(battery):
    entry = criterion(battery, "signature_classes")
    for name in ("rank_one_row", "tridiagonal", "last_row", "superdiagonal"):
        assert entry[name]["cases"] == 100
        assert entry[name]["mismatches"] == 0


def test_criterion_04_certificate_map(battery):
    entry = criterion(battery, "certificate_map")
    assert entry["cases"] == 100
    assert entry["failures"] == 0


def test_criterion_05_hadamard_damping(battery):
    entry = criterion(battery, "hadamard_damping")
    assert entry["cases"] == 100
    assert entry["refuted"] == 0
    assert entry["unknown"] <= 5


def test_criterion_06_witness_soundness(battery):
    entry = criterion(battery, "witness_soundness")
    assert entry["witnesses_checked"] > 0
    assert entry["invalid_witnesses"] == 0
    assert entry["status_conflicts"] == 0


def test_criterion_07_correlation_bound(battery):
    entry = criterion(battery, "correlation_bound")
    assert entry["cases"] == 50
    assert entry["failures"] == 0


def test_criterion_08_lyapunov_pmatrix(battery):
    entry = criterion(battery, "lyapunov_pmatrix")
    assert entry["necessity_cases"] == 100
    assert entry["invariance_cases"] == 200
    assert entry["necessity_failures"] == 0
    assert entry["invariance_failures"] == 0


def test_criterion_09_delay_decay(battery):
    entry = criterion(battery, "delay_decay")
    assert entry["cases"] == 20
    assert entry["failures"] == 0
    assert entry["worst_zero_delay_diff"] <= 1e-8


def test_criterion_10_determinism(battery):
    entry = criterion(battery, "determinism")
    assert entry["identical_reports"]
    assert battery.first_json == battery.second_json
    assert battery.report["all_passed"]

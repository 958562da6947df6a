"""Certifying solver: block form, certificate verification, refutation."""

import numpy as np
import pytest

from riccstab.errors import ContractError
from riccstab.matcore import sym_spectrum
from riccstab.riccati import (
    MatrixPair,
    SolveOptions,
    Verdict,
    block_lmi,
    refute_by_sampling,
    riccati_form,
    solve_diagonal,
    verify_certificate,
)


def test_block_lmi_scalar_example():
    block = block_lmi(MatrixPair([[-2.0]], [[1.0]]), [1.0], [1.0])
    assert np.array_equal(block.full, [[-3.0, 1.0], [1.0, -1.0]])


def test_block_lmi_zero_b_is_block_diagonal():
    pair = MatrixPair([[-1.0, 0.3], [0.2, -2.0]], np.zeros((2, 2)))
    block = block_lmi(pair, [1.0, 2.0], [0.5, 0.5]).full
    assert not block[:2, 2:].any()
    assert not block[2:, :2].any()
    assert np.array_equal(block[2:, 2:], -np.diag([0.5, 0.5]))


def test_block_lmi_skew_symmetric_a():
    a = np.array([[0.0, 1.0], [-1.0, 0.0]])
    b = np.array([[0.5, -0.2], [0.1, 0.3]])
    block = block_lmi(MatrixPair(a, b), [1.0, 1.0], [1.0, 1.0]).full
    assert np.allclose(block[:2, :2], np.eye(2), atol=1e-15)
    assert np.array_equal(block[:2, 2:], b)
    assert np.allclose(block[2:, 2:], -np.eye(2), atol=1e-15)


def test_verify_certificate_scalar_accept():
    ok, margin = verify_certificate(MatrixPair([[-2.0]], [[1.0]]), [1.0], [1.0])
    assert ok
    assert margin > 0.5
    value = riccati_form(MatrixPair([[-2.0]], [[1.0]]), [1.0], [1.0])
    assert value[0, 0] == pytest.approx(-2.0)


def test_verify_certificate_scalar_reject():
    pair = MatrixPair([[-1.0]], [[2.0]])
    for p in (0.1, 1.0, 10.0):
        ok, _ = verify_certificate(pair, [p], [p])
        assert not ok


def test_verify_certificate_decoupled():
    pair = MatrixPair(-np.eye(2), np.zeros((2, 2)))
    ok, margin = verify_certificate(pair, [1.0, 1.0], [0.5, 0.5])
    assert ok
    value = riccati_form(pair, [1.0, 1.0], [0.5, 0.5])
    assert np.allclose(np.diag(value), -1.5, atol=1e-12)
    assert margin == pytest.approx(0.5, abs=1e-9)


def test_verify_certificate_rejects_bad_q():
    with pytest.raises(ContractError):
        verify_certificate(MatrixPair([[-2.0]], [[1.0]]), [1.0], [0.0])


def test_solve_scalar_feasible():
    verdict = solve_diagonal(MatrixPair([[-2.0]], [[1.0]]))
    assert verdict.status == Verdict.FEASIBLE
    ok, margin = verify_certificate(
        MatrixPair([[-2.0]], [[1.0]]), verdict.certificate.p, verdict.certificate.q
    )
    assert ok
    assert margin == pytest.approx(verdict.certificate.margin)


def test_solve_scalar_refuted_all_ones_witness():
    verdict = solve_diagonal(MatrixPair([[-1.0]], [[2.0]]))
    assert verdict.status == Verdict.REFUTED
    assert np.array_equal(verdict.witness.s.full, np.ones((2, 2)))
    assert not verdict.witness.p_report.is_p


def test_solve_metzler_pair_feasible():
    pair = MatrixPair([[-3.0, 1.0], [1.0, -3.0]], np.eye(2))
    verdict = solve_diagonal(pair)
    assert verdict.status == Verdict.FEASIBLE


def test_refute_scalar_first_extreme():
    witness, tried = refute_by_sampling(MatrixPair([[-1.0]], [[2.0]]), n_samples=8, seed=0)
    assert witness is not None
    assert tried == 1


def test_refute_finds_nothing_on_feasible_pair():
    witness, _ = refute_by_sampling(MatrixPair([[-1.0]], [[0.5]]), n_samples=64, seed=0)
    assert witness is None


def test_refute_diagonal_negative_a():
    pair = MatrixPair(np.diag([-1.0, -2.0]), np.zeros((2, 2)))
    witness, _ = refute_by_sampling(pair, n_samples=1, seed=0)
    assert witness is None


def test_schur_sign_equivalence_random():
    rng = np.random.default_rng(37)
    checked = 0
    while checked < 500:
        n = int(rng.integers(1, 6))
        pair = MatrixPair(rng.uniform(-2.0, 2.0, (n, n)), rng.uniform(-2.0, 2.0, (n, n)))
        p = rng.uniform(0.1, 3.0, n)
        q = rng.uniform(0.1, 3.0, n)
        ricc = float(sym_spectrum(riccati_form(pair, p, q)).abscissa)
        block = float(sym_spectrum(block_lmi(pair, p, q).full).abscissa)
        if abs(ricc) < 1e-9 or abs(block) < 1e-9:
            continue
        checked += 1
        assert (ricc < 0.0) == (block < 0.0)


def test_block_joint_scaling_homogeneity():
    rng = np.random.default_rng(41)
    pair = MatrixPair(rng.standard_normal((3, 3)), rng.standard_normal((3, 3)))
    p = rng.uniform(0.5, 2.0, 3)
    q = rng.uniform(0.5, 2.0, 3)
    base = block_lmi(pair, p, q).full
    for t in (0.5, 2.0, 8.0):
        assert np.array_equal(block_lmi(pair, t * p, t * q).full, t * base)


def test_solver_deterministic_for_fixed_seed():
    pair = MatrixPair([[-3.0, 1.0], [1.0, -3.0]], np.eye(2))
    opts = SolveOptions(seed=5)
    first = solve_diagonal(pair, opts)
    second = solve_diagonal(pair, opts)
    assert first.to_json() == second.to_json()

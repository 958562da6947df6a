"""P-matrix test, sign witnesses, and diagonal conjugation invariance."""

import numpy as np
import pytest

from riccstab.errors import ContractError
from riccstab.pmatrix import dpd_conjugate, is_p_matrix, p_sign_witness


def test_identity_is_p():
    assert is_p_matrix(np.eye(3)).is_p


def test_two_by_two_failure():
    report = is_p_matrix([[1.0, 2.0], [2.0, 1.0]])
    assert not report.is_p
    assert report.failing_subset == (0, 1)
    assert report.failing_minor == pytest.approx(-3.0)


def test_two_by_two_success_minors():
    report = is_p_matrix([[2.0, -1.0], [-1.0, 2.0]])
    assert report.is_p


def test_sign_witness_examples():
    assert p_sign_witness(np.eye(2), [1.0, 0.0]) == 0
    assert p_sign_witness(-np.eye(2), [0.3, -0.7]) is None
    assert p_sign_witness([[1.0, 2.0], [2.0, 1.0]], [1.0, -1.0]) is None


def test_sign_witness_rejects_zero_vector():
    with pytest.raises(ContractError):
        p_sign_witness(np.eye(2), [0.0, 0.0])


def test_dpd_examples():
    m = np.array([[2.0, -1.0], [-1.0, 2.0]])
    assert np.array_equal(dpd_conjugate(m, [1.0, 1.0]), m)
    assert is_p_matrix(dpd_conjugate(m, [2.0, 3.0])).is_p
    assert not is_p_matrix(dpd_conjugate([[1.0, 2.0], [2.0, 1.0]], [1.0, 2.0])).is_p
    with pytest.raises(ContractError):
        dpd_conjugate(m, [1.0, 0.0])


def test_p_matrices_always_have_sign_witnesses():
    rng = np.random.default_rng(23)
    found = 0
    while found < 5:
        n = int(rng.integers(2, 5))
        m = rng.standard_normal((n, n)) + n * np.eye(n)
        if not is_p_matrix(m).is_p:
            continue
        found += 1
        for _ in range(200):
            x = rng.standard_normal(n)
            assert p_sign_witness(m, x) is not None


def test_non_p_matrices_have_sign_reversing_vector():
    """A failing principal submatrix with nonpositive determinant has a real
    eigenvalue <= 0; its eigenvector, zero-padded, defeats every witness."""
    rng = np.random.default_rng(29)
    found = 0
    while found < 25:
        n = int(rng.integers(2, 6))
        m = rng.standard_normal((n, n))
        report = is_p_matrix(m, band=0.0)
        if report.is_p:
            continue
        sub = m[np.ix_(report.failing_subset, report.failing_subset)]
        eigvals, eigvecs = np.linalg.eig(sub)
        real_mask = (np.abs(eigvals.imag) < 1e-9) & (eigvals.real <= 1e-12)
        if not real_mask.any():
            continue
        found += 1
        vec = eigvecs[:, int(np.argmax(real_mask))].real
        x = np.zeros(n)
        x[list(report.failing_subset)] = vec
        assert p_sign_witness(m, x) is None


def test_dpd_invariance_random():
    rng = np.random.default_rng(31)
    for _ in range(200):
        n = int(rng.integers(2, 6))
        m = rng.standard_normal((n, n)) * 1.5
        d = rng.uniform(0.2, 3.0, n)
        assert is_p_matrix(m).is_p == is_p_matrix(dpd_conjugate(m, d)).is_p

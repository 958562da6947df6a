"""P-matrix tests by principal-minor enumeration.

A real square matrix is a P-matrix when every principal minor is strictly
positive. Minors are enumerated by subset size, then lexicographically, and
evaluated by LU factorization with partial pivoting. The enumeration is
exponential, so inputs are capped at n = 14.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ContractError, SizeGuardError
from .matcore import as_positive_vector, as_square

MAX_P_SIZE = 14
MINOR_BAND = 1e-12


@dataclass(frozen=True)
class PMatrixReport:
    """Outcome of a P-matrix test.

    failing_subset holds 0-based row/column indices of the first principal
    minor that is not clearly positive (empty tuple when the matrix is P).
    marginal is set when that minor is positive but below the scaled
    positivity band, so the verdict is a boundary call rather than a clean
    sign violation.
    """

    is_p: bool
    failing_subset: tuple[int, ...] = ()
    failing_minor: float | None = None
    marginal: bool = False


def _minor(sub: np.ndarray) -> float:
    k = sub.shape[0]
    if k == 1:
        return float(sub[0, 0])
    if k == 2:
        return float(sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0])
    return float(np.linalg.det(sub))


def _scale(sub: np.ndarray) -> float:
    row_max = np.abs(sub).max(axis=1)
    return float(max(1.0, np.prod(row_max)))


def is_p_matrix(m, band: float = MINOR_BAND) -> PMatrixReport:
    """Test all principal minors of a square matrix for positivity.

    A minor counts as positive only when it exceeds band * scale, where scale
    is the product of row maxima of the submatrix (a crude determinant
    magnitude estimate). Minors in (0, band * scale] fail with the marginal
    flag; pass band=0.0 to accept any positive minor. Subsets are visited by
    size, then lexicographically, and the first failure is reported.
    """
    a = as_square(m)
    n = a.shape[0]
    if n > MAX_P_SIZE:
        raise SizeGuardError(f"P-matrix enumeration capped at n={MAX_P_SIZE}, got {n}")
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            sub = a[np.ix_(subset, subset)]
            minor = _minor(sub)
            if minor <= band * _scale(sub):
                return PMatrixReport(
                    is_p=False,
                    failing_subset=subset,
                    failing_minor=minor,
                    marginal=minor > 0.0,
                )
    return PMatrixReport(is_p=True)


def p_sign_witness(m, x) -> int | None:
    """Index i with x_i * (Mx)_i > 0, or None when M reverses the sign of x.

    P-matrices admit such an index for every nonzero x; the returned index is
    the one with the largest product (0-based).
    """
    a = as_square(m)
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size != a.shape[0]:
        raise ContractError(f"vector length {v.size} does not match matrix size {a.shape[0]}")
    if not np.any(v != 0.0):
        raise ContractError("witness vector must be nonzero")
    products = v * (a @ v)
    idx = int(np.argmax(products))
    return idx if products[idx] > 0.0 else None


def dpd_conjugate(m, d) -> np.ndarray:
    """Two-sided scaling D M D with D = diag(d), d strictly positive.

    Preserves the P-property: principal minors scale by squared products of
    the d entries.
    """
    a = as_square(m)
    dv = as_positive_vector(d, a.shape[0])
    return a * np.outer(dv, dv)

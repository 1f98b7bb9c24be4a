"""Dense complex linear algebra used by the estimators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Solves go through
an SVD so that rank deficiency is detected rather than silently absorbed.
"""

import numpy as np

RANK_TOL = 1e-10


class RankDeficiencyError(np.linalg.LinAlgError):
    """Raised when a least-squares system does not determine its unknowns."""

    def __init__(self, message, rank=None, needed=None):
        super().__init__(message)
        self.rank = rank
        self.needed = needed


def as_matrix(a):
    """Return ``a`` as a 2-D complex128 array (vectors become columns)."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array with shape {a.shape}")
    return a


def dft_matrix(n_rows, n_cols):
    """First ``n_rows`` rows of the ``n_cols``-point DFT matrix.

    Entry ``(a, b)`` is ``exp(-2j*pi*a*b/n_cols)`` with zero-based indices.
    Exponents are reduced modulo ``n_cols`` first so large products do not
    lose phase accuracy.
    """
    if n_rows < 1 or n_cols < 1:
        raise ValueError("DFT dimensions must be positive")
    if n_rows > n_cols:
        raise ValueError(
            f"cannot take {n_rows} orthogonal rows from a {n_cols}-point DFT"
        )
    a = np.arange(n_rows)[:, None]
    b = np.arange(n_cols)[None, :]
    return np.exp(-2j * np.pi * ((a * b) % n_cols) / n_cols)


def singular_values(a):
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def numerical_rank(a, tol=RANK_TOL):
    """Count singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def condition_number(a):
    s = singular_values(a)
    if s.size == 0 or s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def pinv_solve(a, y, tol=RANK_TOL, return_info=False):
    """Least-squares solution of ``a @ x = y`` for full-column-rank ``a``.

    Uses the thin SVD of ``a``. ``y`` may hold several right-hand sides as
    columns. Raises :class:`RankDeficiencyError` when the numerical rank is
    below the column count; a square full-rank ``a`` gives ``inv(a) @ y``.

    With ``return_info=True`` the return value is ``(x, info)`` where ``info``
    holds ``rank``, ``cond`` and the relative ``residual``.
    """
    a = as_matrix(a)
    y = np.asarray(y, dtype=np.complex128)
    vector = y.ndim == 1
    y = as_matrix(y)
    m, r = a.shape
    if y.shape[0] != m:
        raise ValueError(f"row mismatch: A is {a.shape}, y is {y.shape}")
    if m < r:
        raise RankDeficiencyError(
            f"underdetermined system: {m} equations for {r} unknowns",
            rank=m,
            needed=r,
        )
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    rank = int(np.count_nonzero(s > tol * s[0])) if s[0] > 0 else 0
    if rank < r:
        raise RankDeficiencyError(
            f"numerical rank {rank} < {r} unknowns", rank=rank, needed=r
        )
    x = vh.conj().T @ ((u.conj().T @ y) / s[:, None])
    if vector:
        x = x[:, 0]
    if not return_info:
        return x
    resid = a @ as_matrix(x) - y
    ynorm = np.linalg.norm(y)
    info = {
        "rank": rank,
        "cond": float(s[0] / s[-1]),
        "residual": float(np.linalg.norm(resid) / ynorm) if ynorm > 0 else 0.0,
    }
    return x, info


def relative_error(estimate, truth):
    """Frobenius ``||estimate - truth|| / ||truth||`` (absolute if truth is 0)."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    diff = np.linalg.norm(estimate - truth)
    ref = np.linalg.norm(truth)
    return float(diff / ref) if ref > 0 else float(diff)

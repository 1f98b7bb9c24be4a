"""Inner loops with a numba path and a vectorized numpy path.

``USE_NUMBA`` (from ``IRSPILOT_NUMBA``) picks the path; both are importable
so tests and ``benchmarks/bench_kernels.py`` can compare them directly.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


@njit
def _rx_loop(h, g, A, Phi, amp):
    M, K = h.shape
    N = g.shape[2]
    tau = A.shape[1]
    Y = np.zeros((M, tau), dtype=np.complex128)
    for i in range(tau):
        for k in range(K):
            a = A[k, i]
            if a == 0:
                continue
            for m in range(M):
                acc = h[m, k]
                for n in range(N):
                    phi = Phi[n, i]
                    if phi != 0:
                        acc += phi * g[k, m, n]
                Y[m, i] += amp * a * acc
    return Y


def rx_numpy(h, g, A, Phi, amp):
    reflected = np.einsum("kmn,ni,ki->mi", g, Phi, A, optimize=True)
    return amp * (h @ A + reflected)


@njit
def _stacked_loop(g1, A3, Phi3):
    M, N = g1.shape
    K = A3.shape[0]
    tau3 = A3.shape[1]
    V = np.zeros((M * tau3, (K - 1) * N), dtype=np.complex128)
    for i in range(tau3):
        for k in range(1, K):
            a = A3[k, i]
            if a == 0:
                continue
            for n in range(N):
                c = Phi3[n, i] * a
                if c == 0:
                    continue
                col = (k - 1) * N + n
                for m in range(M):
                    V[i * M + m, col] = c * g1[m, n]
    return V


def stacked_numpy(g1, A3, Phi3):
    M, N = g1.shape
    K, tau3 = A3.shape
    V = np.einsum("ni,ki,mn->imkn", Phi3, A3[1:], g1)
    return V.reshape(M * tau3, (K - 1) * N)


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def rx_numba(h, g, A, Phi, amp):
    return _rx_loop(_c(h), _c(g), _c(A), _c(Phi), complex(amp))


def stacked_numba(g1, A3, Phi3):
    return _stacked_loop(_c(g1), _c(A3), _c(Phi3))


if USE_NUMBA:
    received_block = rx_numba
    stacked_matrix = stacked_numba
else:
    received_block = rx_numpy
    stacked_matrix = stacked_numpy

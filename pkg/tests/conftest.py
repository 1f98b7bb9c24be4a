import numpy as np
import pytest

from irspilot.channel_model import ChannelRealization


def rx_triple_loop(h, g, A, Phi, amp):
    """Reference received block, one scalar term at a time."""
    M, K = h.shape
    N = g.shape[2]
    tau = A.shape[1]
    Y = np.zeros((M, tau), dtype=complex)
    for i in range(tau):
        for k in range(K):
            for m in range(M):
                s = h[m, k]
                for n in range(N):
                    s += Phi[n, i] * g[k, m, n]
                Y[m, i] += s * amp * A[k, i]
    return Y


def random_channels(rng, K, M, N):
    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    return ChannelRealization(h=cn(M, K), t=cn(N, K), r=cn(M, N))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)

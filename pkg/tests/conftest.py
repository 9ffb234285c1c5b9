import numpy as np
import pytest

from loia.network import ChannelSet, Structure


def identity_set(M, K=3, diagonal=False):
    H = np.broadcast_to(np.eye(M, dtype=complex), (K, K, M, M)).copy()
    return ChannelSet(H, Structure.DIAGONAL if diagonal else Structure.DENSE)


def diagonal_set(diags):
    """Channel set from an array of diagonals with shape (K, K, M)."""
    g = np.asarray(diags, dtype=complex)
    K, _, M = g.shape
    H = np.zeros((K, K, M, M), dtype=complex)
    H[:, :, np.arange(M), np.arange(M)] = g
    return ChannelSet(H, Structure.DIAGONAL)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

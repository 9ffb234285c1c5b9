import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loia.errors import ParameterError
from loia.network import (
    ChannelMatrix,
    ChannelSet,
    Structure,
    TransmitConfig,
    crandn,
    derive_seed,
    reciprocal,
    sample_mimo,
    sample_siso_extended,
)

from conftest import diagonal_set

seeds = st.integers(min_value=0, max_value=2**64 - 1)


def test_siso_shapes_n1():
    ch = sample_siso_extended(3, 1, 5)
    assert ch.H.shape == (3, 3, 3, 3)
    assert ch.is_diagonal
    off = ~np.eye(3, dtype=bool)
    assert np.all(ch.H[..., off] == 0)


def test_siso_extension_n2_gives_m5():
    assert sample_siso_extended(3, 2, 0).M == 5


@pytest.mark.parametrize("n", [0, -1])
def test_siso_rejects_small_n(n):
    with pytest.raises(ParameterError):
        sample_siso_extended(3, n, 0)


def test_only_three_users():
    with pytest.raises(ParameterError):
        sample_mimo(4, 2, 0)


@pytest.mark.parametrize("M", [2, 4])
def test_mimo_shapes(M):
    ch = sample_mimo(3, M, 11)
    assert ch.H.shape == (3, 3, M, M)
    assert ch.structure is Structure.DENSE
    assert np.all(np.linalg.cond(ch.H) < 1e8)


def test_mimo_rejects_odd_antennas():
    with pytest.raises(ParameterError):
        sample_mimo(3, 3, 0)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_sampling_is_deterministic(seed):
    assert np.array_equal(sample_mimo(3, 2, seed).H, sample_mimo(3, 2, seed).H)
    assert np.array_equal(sample_siso_extended(3, 2, seed).H, sample_siso_extended(3, 2, seed).H)


def test_different_seeds_differ():
    assert not np.array_equal(sample_mimo(3, 2, 1).H, sample_mimo(3, 2, 2).H)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_siso_diagonals_distinct_and_bounded(seed):
    g = sample_siso_extended(3, 2, seed).diagonals()
    assert np.all(np.abs(g) >= 1e-6)
    for k in range(3):
        for j in range(3):
            d = g[k, j]
            gaps = np.abs(d[:, None] - d[None, :])[~np.eye(d.size, dtype=bool)]
            assert gaps.min() > 1e-12


def test_unit_variance_statistics():
    rng = np.random.default_rng(0)
    x = crandn(rng, 200000)
    assert abs(np.mean(np.abs(x) ** 2) - 1) < 0.02
    assert abs(np.mean(x)) < 0.01
    assert abs(np.mean(x**2)) < 0.01  # circular symmetry


def test_reciprocal_scalar_link():
    ch = ChannelSet(np.array([[[[2 + 3j]]]]))
    assert reciprocal(ch).H[0, 0, 0, 0] == 2 - 3j


def test_reciprocal_swaps_and_conjugates():
    ch = sample_mimo(3, 2, 3)
    rev = reciprocal(ch)
    for k in (1, 2, 3):
        for j in (1, 2, 3):
            assert np.array_equal(rev.h(j, k), ch.h(k, j).conj().T)


@given(seeds, st.sampled_from(["siso", "mimo"]))
@settings(max_examples=30, deadline=None)
def test_reciprocal_is_involution(seed, kind):
    ch = sample_siso_extended(3, 1, seed) if kind == "siso" else sample_mimo(3, 4, seed)
    back = reciprocal(reciprocal(ch))
    assert np.array_equal(back.H, ch.H)
    assert back.structure is ch.structure


def test_reciprocal_preserves_diagonal_structure():
    ch = diagonal_set(np.arange(27).reshape(3, 3, 3) * (1 + 1j) + 1)
    rev = reciprocal(ch)
    assert rev.is_diagonal
    assert np.array_equal(rev.diagonals()[0, 1], np.conj(ch.diagonals()[1, 0]))


def test_channel_set_is_read_only():
    ch = sample_mimo(3, 2, 0)
    with pytest.raises(ValueError):
        ch.H[0, 0, 0, 0] = 1


def test_diagonal_tag_enforced():
    with pytest.raises(ParameterError):
        ChannelSet(np.ones((3, 3, 2, 2)), Structure.DIAGONAL)
    with pytest.raises(ParameterError):
        ChannelMatrix(np.ones((2, 2)), Structure.DIAGONAL, 1, 1)


def test_link_accessor_is_one_based():
    ch = sample_mimo(3, 2, 0)
    link = ch.link(1, 2)
    assert link.rx_id == 1 and link.tx_id == 2
    assert np.array_equal(link.entries, ch.H[0, 1])
    with pytest.raises(IndexError):
        ch.h(0, 1)


def test_transmit_config_validation():
    with pytest.raises(ParameterError):
        TransmitConfig(P=0)
    with pytest.raises(ParameterError):
        TransmitConfig(P=1, N0=0)
    with pytest.raises(ParameterError):
        TransmitConfig(P=1, d=(1, 0, 1))
    tc = TransmitConfig.from_snr_db(40, (2, 1, 1))
    assert tc.P == pytest.approx(1e4)
    assert tc.stream_power(1) == pytest.approx(5e3)
    with pytest.raises(ParameterError):
        tc.check(M=1, K=3)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)
    assert 0 <= derive_seed(0, 0) < 2**64

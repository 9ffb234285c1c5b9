"""
Channel model for the K-user interference channel.

A :class:`ChannelSet` holds every link matrix ``H[k, j]`` from transmitter
``j`` to receiver ``k`` for one network realization. Two flavours exist:
diagonal matrices for a SISO channel viewed over ``M`` symbol extensions,
and dense matrices for MIMO nodes with ``M`` antennas.

User indices are 1-based in the public accessors (``h(1, 2)`` is the link
from transmitter 2 to receiver 1); the stacked ``H`` array is 0-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = [
    "Structure",
    "ChannelMatrix",
    "ChannelSet",
    "TransmitConfig",
    "derive_seed",
    "crandn",
    "sample_siso_extended",
    "sample_mimo",
    "reciprocal",
    "MIN_DIAGONAL_MAGNITUDE",
    "MAX_CONDITION_NUMBER",
]

# Rejection thresholds for degenerate draws.
MIN_DIAGONAL_MAGNITUDE = 1e-6
MAX_CONDITION_NUMBER = 1e8


class Structure(str, enum.Enum):
    DIAGONAL = "diagonal"
    DENSE = "dense"


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChannelMatrix:
    """One link matrix with its endpoints (1-based user indices)."""

    entries: np.ndarray
    structure: Structure
    tx_id: int
    rx_id: int

    def __post_init__(self):
        e = _frozen(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 1:
            raise ParameterError(f"channel matrix must be square with M >= 1, got shape {e.shape}")
        if self.structure is Structure.DIAGONAL and np.any(e[~np.eye(e.shape[0], dtype=bool)] != 0):
            raise ParameterError("diagonal channel matrix has nonzero off-diagonal entries")
        object.__setattr__(self, "entries", e)

    @property
    def M(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ChannelSet:
    """
    All ``K**2`` link matrices of one realization.

    Parameters
    ----------
    H : array, shape (K, K, M, M)
        ``H[k, j]`` is the channel from transmitter ``j`` to receiver ``k``
        (0-based).
    structure : Structure
        Shared structure tag of every link.
    seed : int or None
        Seed the realization was drawn with, if any.
    """

    H: np.ndarray
    structure: Structure = Structure.DENSE
    seed: int | None = None

    def __post_init__(self):
        H = _frozen(self.H)
        if H.ndim != 4 or H.shape[0] != H.shape[1] or H.shape[2] != H.shape[3] or H.shape[2] < 1:
            raise ParameterError(f"H must have shape (K, K, M, M), got {H.shape}")
        structure = Structure(self.structure)
        if structure is Structure.DIAGONAL:
            off = ~np.eye(H.shape[2], dtype=bool)
            if np.any(H[..., off] != 0):
                raise ParameterError("diagonal channel set has nonzero off-diagonal entries")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "structure", structure)

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def M(self) -> int:
        return self.H.shape[2]

    @property
    def is_diagonal(self) -> bool:
        return self.structure is Structure.DIAGONAL

    def h(self, k: int, j: int) -> np.ndarray:
        """Link matrix from transmitter ``j`` to receiver ``k`` (1-based)."""
        self._check_index(k)
        self._check_index(j)
        return self.H[k - 1, j - 1]

    def link(self, k: int, j: int) -> ChannelMatrix:
        return ChannelMatrix(self.h(k, j), self.structure, tx_id=j, rx_id=k)

    def diagonals(self) -> np.ndarray:
        """Diagonal entries of every link, shape (K, K, M)."""
        return np.diagonal(self.H, axis1=2, axis2=3)

    def _check_index(self, i):
        if not 1 <= i <= self.K:
            raise IndexError(f"user index {i} outside 1..{self.K}")

    def __eq__(self, other):
        if not isinstance(other, ChannelSet):
            return NotImplemented
        return (
            self.structure is other.structure
            and self.H.shape == other.H.shape
            and bool(np.array_equal(self.H, other.H))
        )

    __hash__ = None


@dataclass(frozen=True)
class TransmitConfig:
    """
    Power and stream configuration.

    ``P`` is the total transmit power of every node, shared equally by its
    ``d[k]`` streams; ``N0`` is the noise power. Both are linear.
    """

    P: float
    N0: float = 1.0
    d: tuple[int, ...] = field(default=(1, 1, 1))

    def __post_init__(self):
        if not self.P > 0:
            raise ParameterError(f"P must be positive, got {self.P}")
        if not self.N0 > 0:
            raise ParameterError(f"N0 must be positive, got {self.N0}")
        d = tuple(int(x) for x in self.d)
        if any(x < 1 for x in d):
            raise ParameterError(f"stream counts must be >= 1, got {d}")
        object.__setattr__(self, "d", d)

    @classmethod
    def from_snr_db(cls, snr_db, d, N0=1.0):
        return cls(P=N0 * 10.0 ** (snr_db / 10.0), N0=N0, d=tuple(d))

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.P / self.N0)

    def stream_power(self, k: int) -> float:
        """Power per stream of user ``k`` (1-based)."""
        return self.P / self.d[k - 1]

    def check(self, M: int, K: int):
        if len(self.d) != K:
            raise ParameterError(f"need {K} stream counts, got {len(self.d)}")
        if max(self.d) > M:
            raise ParameterError(f"stream counts {self.d} exceed dimension M={M}")


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed of ``seed`` for the given keys."""
    ss = np.random.SeedSequence([int(seed), *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _check_users(K):
    if K != 3:
        raise ParameterError(f"only the 3-user channel is supported, got K={K}")


def sample_siso_extended(K: int, n: int, seed: int) -> ChannelSet:
    """
    Draw a SISO channel set over a ``2n+1`` symbol extension.

    Diagonal entries are i.i.d. CN(0, 1); draws with any entry smaller than
    ``MIN_DIAGONAL_MAGNITUDE`` in magnitude are rejected and redrawn.
    """
    _check_users(K)
    if int(n) != n or n < 1:
        raise ParameterError(f"extension parameter n must be an integer >= 1, got {n}")
    M = 2 * int(n) + 1
    rng = np.random.default_rng(seed)
    while True:
        g = crandn(rng, K, K, M)
        if np.all(np.abs(g) >= MIN_DIAGONAL_MAGNITUDE):
            break
    H = np.zeros((K, K, M, M), dtype=complex)
    idx = np.arange(M)
    H[:, :, idx, idx] = g
    return ChannelSet(H, Structure.DIAGONAL, seed=seed)


def sample_mimo(K: int, M: int, seed: int) -> ChannelSet:
    """
    Draw a dense MIMO channel set with ``M`` antennas per node.

    Entries are i.i.d. CN(0, 1). Draws where any link has condition number
    above ``MAX_CONDITION_NUMBER`` are rejected and redrawn.
    """
    _check_users(K)
    if int(M) != M or M < 2 or M % 2:
        raise ParameterError(f"antenna count must be even and >= 2, got {M}")
    M = int(M)
    rng = np.random.default_rng(seed)
    while True:
        H = crandn(rng, K, K, M, M)
        if np.all(np.linalg.cond(H) <= MAX_CONDITION_NUMBER):
            break
    return ChannelSet(H, Structure.DENSE, seed=seed)


def reciprocal(channels: ChannelSet) -> ChannelSet:
    """
    Reverse network: the link from node ``k`` back to node ``j`` is the
    conjugate transpose of ``H[k, j]``.

    In the returned set, receivers are the original transmitters, so
    ``reciprocal(X).h(j, k) == X.h(k, j).conj().T``.
    """
    R = np.conj(np.transpose(channels.H, (1, 0, 3, 2)))
    return ChannelSet(R, channels.structure, seed=channels.seed)

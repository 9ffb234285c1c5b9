"""Receive filters and role reversal shared by the SISO and MIMO constructions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .linalg import hermitian, orthonormal_complement
from .network import ChannelSet

# Interference seen by each receiver in the 3-user construction: receiver k
# nulls the span of H[k, j] V[j] for the listed transmitter j. The other
# interferer is aligned into the same span by construction.
NULLED_INTERFERER = {1: 2, 2: 1, 3: 1}


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FilterSet:
    """Receive filters ``U[k]``, each with orthonormal columns."""

    U: tuple

    def __post_init__(self):
        object.__setattr__(self, "U", tuple(_frozen(u) for u in self.U))

    def __getitem__(self, k):
        """Filter of user ``k`` (1-based)."""
        return self.U[k - 1]

    @property
    def U1(self):
        return self.U[0]

    @property
    def U2(self):
        return self.U[1]

    @property
    def U3(self):
        return self.U[2]

    @property
    def d(self):
        return tuple(u.shape[1] for u in self.U)

    def orthonormality_error(self):
        """Largest ``||U^H U - I||_max`` over users."""
        errs = [np.max(np.abs(hermitian(u) @ u - np.eye(u.shape[1]))) if u.size else 0.0 for u in self.U]
        return float(max(errs))


def effective(h, V, diagonal):
    """Effective channel ``H V``; diagonal links are applied element-wise."""
    if diagonal:
        return np.diagonal(h)[:, None] * V
    return h @ V


def interference_matrix(channels: ChannelSet, V, k: int):
    """The interference matrix receiver ``k`` nulls, ``H[k, j] V[j]``."""
    j = NULLED_INTERFERER[k]
    return effective(channels.h(k, j), V[j - 1], channels.is_diagonal)


def receive_filter(interference, d):
    """
    Orthonormal ``M x d`` filter orthogonal to the columns of ``interference``.

    The interference is expected to span ``M - d`` dimensions.
    """
    M = interference.shape[0]
    if not 0 <= d <= M:
        raise ParameterError(f"cannot build a {d}-column filter in dimension {M}")
    return orthonormal_complement(interference, rank=M - d)


def receive_filters(channels: ChannelSet, V, d) -> FilterSet:
    """Filters for all three receivers from aligned precoders ``V``."""
    return FilterSet(tuple(receive_filter(interference_matrix(channels, V, k), d[k - 1]) for k in (1, 2, 3)))


def reverse_roles(precoders, filters):
    """
    Swap transmit and receive roles for the reverse (TDD) link.

    Accepts precoder/filter objects or plain sequences of matrices and
    returns ``(reverse_precoders, reverse_filters)`` as tuples: the forward
    filters become transmit precoders at the receivers, and the forward
    precoders become receive filters at the transmitters. Applying it twice
    returns the original matrices.
    """
    V = tuple(getattr(precoders, "V", precoders))
    U = tuple(getattr(filters, "U", filters))
    return U, V

"""JSON fixtures for channel sets, precoders and filters."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .network import ChannelSet, Structure


def _encode(A):
    A = np.asarray(A)
    return {"re": A.real.tolist(), "im": A.imag.tolist()}


def _decode(entry):
    return np.array(entry["re"], dtype=float) + 1j * np.array(entry["im"], dtype=float)


def channels_to_dict(channels: ChannelSet) -> dict:
    return {
        "K": channels.K,
        "M": channels.M,
        "structure": channels.structure.value,
        "seed": channels.seed,
        "matrices": [
            {"rx": k, "tx": j, **_encode(channels.h(k, j))}
            for k in range(1, channels.K + 1)
            for j in range(1, channels.K + 1)
        ],
    }


def channels_from_dict(doc: dict) -> ChannelSet:
    K, M = int(doc["K"]), int(doc["M"])
    entries = doc["matrices"]
    if len(entries) != K * K:
        raise ParameterError(f"expected {K * K} matrices, got {len(entries)}")
    H = np.zeros((K, K, M, M), dtype=complex)
    seen = set()
    for e in entries:
        k, j = int(e["rx"]), int(e["tx"])
        if not (1 <= k <= K and 1 <= j <= K) or (k, j) in seen:
            raise ParameterError(f"bad or duplicate link ({k}, {j})")
        seen.add((k, j))
        A = _decode(e)
        if A.shape != (M, M):
            raise ParameterError(f"link ({k}, {j}) has shape {A.shape}, expected {(M, M)}")
        H[k - 1, j - 1] = A
    return ChannelSet(H, Structure(doc["structure"]), seed=doc.get("seed"))


def matrices_to_dict(matrices, kind, **extra) -> dict:
    """Per-user matrices (precoders or filters) in the fixture schema."""
    return {
        "kind": kind,
        **extra,
        "matrices": [{"user": k, **_encode(A)} for k, A in enumerate(matrices, start=1)],
    }


def matrices_from_dict(doc: dict):
    entries = sorted(doc["matrices"], key=lambda e: int(e["user"]))
    return tuple(_decode(e) for e in entries)


def dump(doc: dict, path):
    Path(path).write_text(json.dumps(doc, indent=1))


def load(path) -> dict:
    return json.loads(Path(path).read_text())


def save_channels(channels: ChannelSet, path):
    dump(channels_to_dict(channels), path)


def load_channels(path) -> ChannelSet:
    return channels_from_dict(load(path))

import copy

import numpy as np
import pytest

from loia.errors import ParameterError, ProtocolError
from loia.mimo import build_precoders_mimo, p_matrices_mimo, receive_filters_mimo
from loia.network import sample_mimo, sample_siso_extended
from loia.protocol import (
    NodeKnowledge,
    OverheadLedger,
    PhaseCount,
    Provenance,
    audit_trace,
    iia_overhead,
    run_loia_protocol,
    trace_to_json,
)
from loia.siso import build_precoders_siso, p_matrices_siso, receive_filters_siso


def centralized(ch, mode, n=None):
    if mode == "siso":
        pre = build_precoders_siso(*p_matrices_siso(ch), n)
        return pre, receive_filters_siso(ch, pre)
    pre = build_precoders_mimo(*p_matrices_mimo(ch))
    return pre, receive_filters_mimo(ch, pre)


def assert_bit_identical(a_pre, a_filt, b_pre, b_filt):
    for x, y in zip(a_pre.V + a_filt.U, b_pre.V + b_filt.U):
        assert np.array_equal(x, y)


@pytest.mark.parametrize("M", [2, 4])
def test_mimo_matches_centralized(M):
    ch = sample_mimo(3, M, 11)
    res = run_loia_protocol(ch, "mimo")
    pre, filt = centralized(ch, "mimo")
    assert_bit_identical(res.precoders, res.filters, pre, filt)
    assert np.array_equal(res.precoders.T, pre.T)
    assert res.precoders.selected == pre.selected
    assert res.ledger.training_rounds == 3
    assert res.ledger.rounds_excluding("phase1") == 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_siso_matches_centralized(n):
    ch = sample_siso_extended(3, n, 5)
    res = run_loia_protocol(ch, "siso", n=n)
    pre, filt = centralized(ch, "siso", n)
    assert_bit_identical(res.precoders, res.filters, pre, filt)
    for name in ("t", "B", "C", "w"):
        assert np.array_equal(getattr(res.precoders, name), getattr(pre, name))


def test_siso_pilot_counts():
    n = 1
    M = 2 * n + 1
    ledger = run_loia_protocol(sample_siso_extended(3, n, 0), "siso").ledger
    phases = {p.name: p for p in ledger.phases}
    assert phases["step2"].pilot_vectors == 3 * M
    # one pilot per precoder column: (n+1) + n + n
    assert phases["step4"].pilot_vectors == (n + 1) + n + n
    assert [p.rounds for p in ledger.phases] == [1, 1, 1]


def test_mimo_pilot_counts():
    ledger = run_loia_protocol(sample_mimo(3, 4, 0), "mimo").ledger
    phases = {p.name: p for p in ledger.phases}
    assert phases["step2"].pilot_vectors == 12
    assert phases["step4"].pilot_vectors == 6


def test_initial_knowledge():
    res = run_loia_protocol(sample_siso_extended(3, 1, 0), "siso")
    phase1 = [e for e in res.trace if e["step"] == "phase1"]
    for k in (1, 2, 3):
        (ev,) = [e for e in phase1 if e["node"] == f"RX{k}"]
        assert set(ev["matrices_written"]) == {f"H{k}{j}" for j in (1, 2, 3)}
        (tx,) = [e for e in phase1 if e["node"] == f"TX{k}"]
        assert tx["matrices_written"] == ["w"]
    assert res.nodes["TX1"].provenance("w") is Provenance.PREDEFINED
    assert res.nodes["TX2"].provenance("P1") is Provenance.TRAINING_OBSERVATION
    assert res.nodes["RX3"].provenance("H31") is Provenance.LOCAL_ESTIMATION


def test_transmitters_never_learn_channels():
    res = run_loia_protocol(sample_mimo(3, 2, 0), "mimo")
    for j in (1, 2, 3):
        labels = res.nodes[f"TX{j}"].labels()
        assert not any(lab.startswith("H") for lab in labels)
    for k in (1, 2, 3):
        direct = {lab for lab in res.nodes[f"RX{k}"].labels() if lab[0] == "H" and len(lab) == 3}
        assert direct == {f"H{k}{j}" for j in (1, 2, 3)}


@pytest.mark.parametrize("mode", ["siso", "mimo"])
def test_trace_passes_audit(mode):
    for seed in range(20):
        ch = sample_siso_extended(3, 2, seed) if mode == "siso" else sample_mimo(3, 2, seed)
        assert audit_trace(run_loia_protocol(ch, mode).trace)


def test_tampered_trace_rejected():
    trace = run_loia_protocol(sample_mimo(3, 2, 0), "mimo").trace
    bad = copy.deepcopy(trace)
    idx = next(i for i, e in enumerate(bad) if e["step"] == "step3" and e["node"] == "TX1")
    bad[idx]["matrices_read"].append("H23")
    with pytest.raises(ProtocolError) as info:
        audit_trace(bad)
    assert info.value.node == "TX1" and info.value.label == "H23" and info.value.step == "step3"


def test_foreign_estimate_rejected():
    trace = run_loia_protocol(sample_mimo(3, 2, 0), "mimo").trace
    bad = copy.deepcopy(trace)
    bad[0]["matrices_written"].append("H23")  # RX1 claiming RX2's link
    with pytest.raises(ProtocolError):
        audit_trace(bad)


def test_unsent_observation_rejected():
    trace = run_loia_protocol(sample_mimo(3, 2, 0), "mimo").trace
    bad = copy.deepcopy(trace)
    idx = next(i for i, e in enumerate(bad) if e["action"] == "observe" and e["node"] == "TX1")
    bad[idx]["matrices_written"].append("V2")
    with pytest.raises(ProtocolError):
        audit_trace(bad)


def test_live_read_enforced():
    node = NodeKnowledge("TX", 1)
    node.learn("w", np.ones(3), Provenance.PREDEFINED)
    assert node.read("w", "step3").shape == (3,)
    with pytest.raises(ProtocolError, match="TX1"):
        node.read("H23", "step3")


def test_pilot_noise_perturbs_but_keeps_structure():
    ch = sample_mimo(3, 2, 0)
    exact = run_loia_protocol(ch, "mimo")
    noisy = run_loia_protocol(ch, "mimo", pilot_snr_db=30, seed=1)
    assert not np.array_equal(exact.precoders.V1, noisy.precoders.V1)
    assert noisy.filters.orthonormality_error() < 1e-12
    again = run_loia_protocol(ch, "mimo", pilot_snr_db=30, seed=1)
    assert np.array_equal(noisy.precoders.V1, again.precoders.V1)


def test_mode_mismatch():
    with pytest.raises(ParameterError):
        run_loia_protocol(sample_mimo(3, 2, 0), "siso")
    with pytest.raises(ParameterError):
        run_loia_protocol(sample_siso_extended(3, 1, 0), "mimo")
    with pytest.raises(ParameterError):
        run_loia_protocol(sample_siso_extended(3, 1, 0), "siso", n=2)


def test_trace_json_roundtrip():
    import json

    trace = run_loia_protocol(sample_mimo(3, 2, 0), "mimo").trace
    loaded = json.loads(trace_to_json(trace))
    assert loaded == trace
    assert set(loaded[0]) == {"step", "node", "action", "matrices_read", "matrices_written"}


class TestIiaOverhead:
    def test_two_iterations(self):
        ledger = iia_overhead(2, K=3, M=2, d=1)
        assert ledger.training_rounds == 4
        assert ledger.pilot_vectors_sent == 12

    def test_zero(self):
        ledger = iia_overhead(0)
        assert ledger.phases == () and ledger.training_rounds == 0

    def test_long_run(self):
        assert iia_overhead(1000).training_rounds == 2000

    def test_monotone(self):
        counts = [iia_overhead(i).pilot_vectors_sent for i in range(20)]
        assert counts == sorted(counts)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            iia_overhead(-1)
        with pytest.raises(ParameterError):
            iia_overhead(1, K=3, M=2, d=3)


def test_ledger_is_additive():
    a = OverheadLedger((PhaseCount("x", 1, 4),))
    b = OverheadLedger((PhaseCount("y", 2, 6),))
    assert (a + b).training_rounds == 3 and (a + b).pilot_vectors_sent == 10
    with pytest.raises(ParameterError):
        OverheadLedger((PhaseCount("z", -1, 0),))

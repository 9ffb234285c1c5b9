"""
Distributed three-phase protocol with per-node knowledge tracking.

Phase I lets every receiver estimate its own incoming channels. Phase II
has four steps: receivers form their ratio matrices P_i (1), broadcast them
over a training exchange (2), transmitters build their precoders (3), and a
second training exchange lets receivers observe the effective interference
and build their filters (4). Phase III is data transmission and is not
simulated.

Every matrix a node uses is read through its :class:`NodeKnowledge`, which
raises :class:`ProtocolError` on anything the node has not legitimately
acquired. The resulting event log can be re-checked with
:func:`audit_trace`.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import mimo, siso
from .alignment import NULLED_INTERFERER, FilterSet, effective, receive_filter
from .errors import ParameterError, ProtocolError
from .network import ChannelSet, crandn

__all__ = [
    "Provenance",
    "NodeKnowledge",
    "PhaseCount",
    "OverheadLedger",
    "ProtocolResult",
    "run_loia_protocol",
    "iia_overhead",
    "audit_trace",
    "trace_to_json",
]

USERS = (1, 2, 3)


class Provenance(str, enum.Enum):
    LOCAL_ESTIMATION = "local-estimation"
    TRAINING_OBSERVATION = "training-observation"
    PREDEFINED = "predefined"
    COMPUTED = "computed"


class NodeKnowledge:
    """Labelled matrices one node knows, with how each was obtained."""

    def __init__(self, role, index):
        self.role = role
        self.index = index
        self._known = {}

    @property
    def node_id(self):
        return f"{self.role}{self.index}"

    def learn(self, label, value, provenance):
        self._known[label] = (value, Provenance(provenance))

    def knows(self, label):
        return label in self._known

    def provenance(self, label):
        return self._known[label][1]

    def read(self, label, step):
        if label not in self._known:
            raise ProtocolError(self.node_id, step, label)
        return self._known[label][0]

    def labels(self):
        return set(self._known)

    def __repr__(self):
        return f"NodeKnowledge({self.node_id}, {sorted(self._known)})"


@dataclass(frozen=True)
class PhaseCount:
    name: str
    rounds: int
    pilot_vectors: int


@dataclass(frozen=True)
class OverheadLedger:
    """Training rounds and pilot vector slots, broken down by phase."""

    phases: tuple = ()

    def __post_init__(self):
        for p in self.phases:
            if p.rounds < 0 or p.pilot_vectors < 0:
                raise ParameterError("overhead counts must be non-negative")

    @property
    def training_rounds(self):
        return sum(p.rounds for p in self.phases)

    @property
    def pilot_vectors_sent(self):
        return sum(p.pilot_vectors for p in self.phases)

    def rounds_excluding(self, name):
        return sum(p.rounds for p in self.phases if p.name != name)

    def __add__(self, other):
        return OverheadLedger(self.phases + other.phases)

    def summary(self):
        return {
            "training_rounds": self.training_rounds,
            "pilot_vectors_sent": self.pilot_vectors_sent,
            "phases": [{"name": p.name, "rounds": p.rounds, "pilot_vectors": p.pilot_vectors} for p in self.phases],
        }


@dataclass
class ProtocolResult:
    precoders: object
    filters: FilterSet
    ledger: OverheadLedger
    trace: list
    nodes: dict = field(repr=False)


class _Run:
    def __init__(self, channels, pilot_snr_db, seed):
        self.channels = channels
        self.nodes = {}
        for k in USERS:
            self.nodes[f"TX{k}"] = NodeKnowledge("TX", k)
            self.nodes[f"RX{k}"] = NodeKnowledge("RX", k)
        self.trace = []
        self.phases = []
        self.pilot_snr_db = pilot_snr_db
        self.rng = np.random.default_rng(seed) if pilot_snr_db is not None else None

    def event(self, step, node, action, read=(), written=()):
        self.trace.append(
            {"step": step, "node": node, "action": action, "matrices_read": list(read), "matrices_written": list(written)}
        )

    def read(self, node, step, *labels):
        values = [self.nodes[node].read(lab, step) for lab in labels]
        return values[0] if len(values) == 1 else values

    def observe(self, value):
        """Training observation; exact unless a pilot SNR is configured."""
        if self.rng is None:
            return value
        value = np.asarray(value)
        power = np.mean(np.abs(value) ** 2)
        sigma = np.sqrt(power * 10.0 ** (-self.pilot_snr_db / 10.0))
        return value + sigma * crandn(self.rng, *value.shape)

    def phase_one(self, w=None):
        ch = self.channels
        for k in USERS:
            labels = [f"H{k}{j}" for j in USERS]
            for j in USERS:
                self.nodes[f"RX{k}"].learn(f"H{k}{j}", ch.h(k, j), Provenance.LOCAL_ESTIMATION)
            self.event("phase1", f"RX{k}", "estimate", written=labels)
        if w is not None:
            for j in USERS:
                self.nodes[f"TX{j}"].learn("w", w, Provenance.PREDEFINED)
                self.event("phase1", f"TX{j}", "predefined", written=["w"])
        self.phases.append(PhaseCount("phase1", 1, ch.K * ch.M))

    def step_one(self, p_of):
        for k, a, b in siso.P_LINKS:
            node = f"RX{k}"
            labels = (f"H{k}{a}", f"H{k}{b}")
            h_a, h_b = self.read(node, "step1", *labels)
            self.nodes[node].learn(f"P{k}", p_of(h_a, h_b, labels), Provenance.COMPUTED)
            self.event("step1", node, "compute", read=labels, written=[f"P{k}"])

    def step_two(self):
        for k in USERS:
            self.read(f"RX{k}", "step2", f"P{k}")
            self.event("step2", f"RX{k}", "send-pilots", read=[f"P{k}"])
        for j in USERS:
            for k in USERS:
                self.nodes[f"TX{j}"].learn(
                    f"P{k}", self.observe(self.nodes[f"RX{k}"].read(f"P{k}", "step2")), Provenance.TRAINING_OBSERVATION
                )
            self.event("step2", f"TX{j}", "observe", written=[f"P{k}" for k in USERS])
        self.phases.append(PhaseCount("step2", 1, len(USERS) * self.channels.M))

    def step_four(self, V, d):
        diagonal = self.channels.is_diagonal
        for j in USERS:
            self.read(f"TX{j}", "step4", f"V{j}")
            self.event("step4", f"TX{j}", "send-pilots", read=[f"V{j}"])
        U = []
        for k in USERS:
            node = f"RX{k}"
            observed = []
            for j in USERS:
                h = self.read(node, "step4", f"H{k}{j}")
                label = f"H{k}{j}V{j}"
                self.nodes[node].learn(label, self.observe(effective(h, V[j - 1], diagonal)), Provenance.TRAINING_OBSERVATION)
                observed.append(label)
            self.event("step4", node, "observe", read=[f"H{k}{j}" for j in USERS], written=observed)
            label = f"H{k}{NULLED_INTERFERER[k]}V{NULLED_INTERFERER[k]}"
            Uk = receive_filter(self.read(node, "step4", label), d[k - 1])
            self.nodes[node].learn(f"U{k}", Uk, Provenance.COMPUTED)
            self.event("step4", node, "compute", read=[label], written=[f"U{k}"])
            U.append(Uk)
        self.phases.append(PhaseCount("step4", 1, int(sum(d))))
        return FilterSet(tuple(U))


def _siso_protocol(run, n):
    M = 2 * n + 1
    run.phase_one(w=siso.reference_vector(M))
    run.step_one(lambda h_a, h_b, labels: siso.p_matrix_siso(h_a, h_b, link=labels[1]))
    run.step_two()

    step = "step3"
    got = {}
    for j in USERS:
        node = f"TX{j}"
        p1, p2, p3, w = run.read(node, step, "P1", "P2", "P3", "w")
        t = siso.transfer_siso(p1, p2, p3)
        if j == 1:
            V = siso.precoder_tx1(t, n, w)
        elif j == 2:
            V, got["C"] = siso.precoder_tx2(t, p3, n, w)
        else:
            V, got["B"] = siso.precoder_tx3(t, p2, n, w)
        got[j] = (t, V)
        run.nodes[node].learn("T", t, Provenance.COMPUTED)
        run.nodes[node].learn(f"V{j}", V, Provenance.COMPUTED)
        run.event(step, node, "compute", read=["P1", "P2", "P3", "w"], written=["T", f"V{j}"])
    t, V1 = got[1]
    V2, V3 = got[2][1], got[3][1]
    siso.check_construction(t, V1, V2, V3, got["B"], got["C"])
    precoders = siso.SisoPrecoders(V1=V1, V2=V2, V3=V3, t=t, B=got["B"], C=got["C"], w=V1[:, 0], n=n)

    filters = run.step_four(precoders.V, precoders.d)
    return precoders, filters


def _mimo_protocol(run):
    run.phase_one()
    run.step_one(lambda h_a, h_b, labels: mimo.p_matrix_mimo(h_a, h_b, link=labels[0]))
    run.step_two()

    step = "step3"
    got = {}
    for j in USERS:
        node = f"TX{j}"
        p1, p2, p3 = run.read(node, step, "P1", "P2", "P3")
        T = mimo.transfer_mimo(p1, p2, p3)
        lam, E, selected, V1 = mimo.eigen_basis(T)
        if j == 1:
            V = V1
        elif j == 2:
            V = mimo.precoder_tx2(V1, p3)
        else:
            V = mimo.precoder_tx3(V1, p2)
        got[j] = (T, lam, E, selected, V)
        run.nodes[node].learn("T", T, Provenance.COMPUTED)
        run.nodes[node].learn(f"V{j}", V, Provenance.COMPUTED)
        run.event(step, node, "compute", read=["P1", "P2", "P3"], written=["T", f"V{j}"])
    T, lam, E, selected, V1 = got[1]
    V2, V3 = got[2][4], got[3][4]
    mimo.check_construction(T, V1, V2, V3)
    precoders = mimo.MimoPrecoders(V1=V1, V2=V2, V3=V3, T=T, eigenvalues=lam, eigenvectors=E, selected=selected)

    filters = run.step_four(precoders.V, precoders.d)
    return precoders, filters


def run_loia_protocol(channels: ChannelSet, mode="mimo", n=None, pilot_snr_db=None, seed=None) -> ProtocolResult:
    """
    Execute the distributed construction on ``channels``.

    Parameters
    ----------
    mode : {"siso", "mimo"}
        ``"siso"`` requires a diagonal channel set and the extension
        parameter ``n`` (inferred from ``M`` if omitted).
    pilot_snr_db : float, optional
        If given, every training observation is perturbed by complex
        Gaussian noise at this SNR relative to the observed matrix. By
        default transfers are exact and the output matches the centralized
        construction bit for bit.
    seed : int, optional
        Seed for the pilot noise.
    """
    if channels.K != 3:
        raise ParameterError(f"protocol needs K=3, got K={channels.K}")
    run = _Run(channels, pilot_snr_db, seed)
    if mode == "siso":
        if not channels.is_diagonal:
            raise ParameterError("siso mode needs a diagonal channel set")
        if n is None:
            n = (channels.M - 1) // 2
        if channels.M != 2 * n + 1:
            raise ParameterError(f"M={channels.M} does not match n={n}")
        precoders, filters = _siso_protocol(run, n)
    elif mode == "mimo":
        if channels.is_diagonal or channels.M % 2:
            raise ParameterError("mimo mode needs a dense channel set with even M")
        precoders, filters = _mimo_protocol(run)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    return ProtocolResult(precoders, filters, OverheadLedger(tuple(run.phases)), run.trace, run.nodes)


def iia_overhead(iterations, K=3, M=2, d=1) -> OverheadLedger:
    """
    Training cost of ``iterations`` forward+reverse iterations: two training
    rounds per iteration, each node sending one pilot per stream.
    """
    if iterations < 0:
        raise ParameterError(f"iterations must be >= 0, got {iterations}")
    d = (int(d),) * K if np.isscalar(d) else tuple(int(x) for x in d)
    if len(d) != K or any(x < 1 or x > M for x in d):
        raise ParameterError(f"invalid stream counts {d} for K={K}, M={M}")
    if iterations == 0:
        return OverheadLedger()
    per_round = sum(d)
    return OverheadLedger(
        (
            PhaseCount("forward", iterations, iterations * per_round),
            PhaseCount("reverse", iterations, iterations * per_round),
        )
    )


def audit_trace(trace):
    """
    Replay an event log and check that every read was locally available.

    Rules: a receiver may only estimate its own incoming links in Phase I;
    a transmitter may only be given the predefined ``w``; observed labels
    must match something sent in the same step (effective matrices
    ``H{k}{j}V{j}`` only at receiver ``k``); and every ``matrices_read``
    entry must already be known to the reading node.

    Raises
    ------
    ProtocolError
        On the first violation.
    """
    known = {}
    sent = {}
    for ev in trace:
        node, step, action = ev["node"], ev["step"], ev["action"]
        have = known.setdefault(node, set())
        for label in ev["matrices_read"]:
            if label not in have:
                raise ProtocolError(node, step, label)
        if action == "send-pilots":
            sent.setdefault(step, set()).update(ev["matrices_read"])
        for label in ev["matrices_written"]:
            if action == "estimate" and not (node.startswith("RX") and label.startswith(f"H{node[2:]}")):
                raise ProtocolError(node, step, label)
            if action == "predefined" and label != "w":
                raise ProtocolError(node, step, label)
            if action == "observe":
                pool = sent.get(step, set())
                ok = label in pool
                if not ok and node.startswith("RX") and label.startswith(f"H{node[2:]}"):
                    ok = label[3:] in pool
                if not ok:
                    raise ProtocolError(node, step, label)
            have.add(label)
    return True


def trace_to_json(trace, indent=2):
    return json.dumps(trace, indent=indent)

"""
Monte Carlo harness: sum rate versus SNR for the closed-form scheme, the
iterative baseline and orthogonal time sharing, plus the leakage-versus-
iteration history of the iterative baseline.

Realization ``r`` always uses the channel drawn from
``derive_seed(seed, r, 0)``, shared by every scheme and SNR point, so
scheme comparisons are paired and reruns are bit-for-bit identical.
"""

from __future__ import annotations

import csv
import dataclasses
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .iia import iia_run
from .metrics import MetricRecord, leakage_per_user, orthogonal_baseline, rate_per_user
from .network import TransmitConfig, derive_seed, sample_mimo, sample_siso_extended
from .protocol import iia_overhead, run_loia_protocol
from .siso import siso_streams

__all__ = [
    "ExperimentConfig",
    "SCHEMES",
    "parse_snr_grid",
    "sample_channels",
    "evaluate_realization",
    "aggregate",
    "run_experiment",
    "leakage_history",
    "rows_to_csv",
    "CSV_COLUMNS",
]

SCHEMES = ("LOIA", "IIA", "ORTHOGONAL")
CSV_COLUMNS = ("scheme", "snr_db", "mean_sum_rate", "stderr", "mean_leakage", "training_rounds")
ORTHOGONAL_TRAINING_ROUNDS = 1


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "mimo"
    n: int = 1
    antennas: int = 2
    schemes: tuple = SCHEMES
    snr_grid_db: tuple = tuple(float(s) for s in range(0, 65, 5))
    realizations: int = 200
    iia_iterations: int = 2
    seed: int = 0
    output_path: str | None = None
    workers: int = 1
    half_steps: bool = False
    pilot_symbols_per_vector: int = 1
    N0: float = 1.0

    def __post_init__(self):
        if self.mode not in ("siso", "mimo"):
            raise ParameterError(f"mode must be 'siso' or 'mimo', got {self.mode!r}")
        schemes = tuple(s.upper() for s in self.schemes)
        unknown = set(schemes) - set(SCHEMES)
        if unknown or not schemes:
            raise ParameterError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if not self.snr_grid_db:
            raise ParameterError("SNR grid is empty")
        if self.realizations < 1:
            raise ParameterError(f"realizations must be >= 1, got {self.realizations}")
        if self.iia_iterations < 0:
            raise ParameterError(f"iterations must be >= 0, got {self.iia_iterations}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if self.mode == "siso" and self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if self.mode == "mimo" and (self.antennas < 2 or self.antennas % 2):
            raise ParameterError(f"antennas must be even and >= 2, got {self.antennas}")

    @property
    def M(self):
        return 2 * self.n + 1 if self.mode == "siso" else self.antennas

    @property
    def streams(self):
        return siso_streams(self.n) if self.mode == "siso" else (self.antennas // 2,) * 3

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def parse_snr_grid(text):
    """``"0:60:5"`` (inclusive stop) or a comma-separated list of dB values."""
    text = str(text).strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ParameterError(f"SNR range must be start:stop:step with step > 0, got {text!r}")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + i * step) for i in range(max(count, 0)))
    return tuple(float(p) for p in text.split(",") if p.strip())


def sample_channels(config: ExperimentConfig, r: int):
    seed = derive_seed(config.seed, r, 0)
    if config.mode == "siso":
        return sample_siso_extended(3, config.n, seed)
    return sample_mimo(3, config.antennas, seed)


def scheme_label(scheme, config):
    if scheme == "IIA":
        return f"IIA({config.iia_iterations})"
    return {"LOIA": "LOIA", "ORTHOGONAL": "Orthogonal"}[scheme]


def evaluate_realization(config: ExperimentConfig, r: int):
    """All :class:`MetricRecord` objects of realization ``r``, ordered by scheme then SNR."""
    channels = sample_channels(config, r)
    d = config.streams
    records = []
    loia = None
    if "LOIA" in config.schemes:
        loia = run_loia_protocol(channels, config.mode, n=config.n if config.mode == "siso" else None)
    iia_seed = derive_seed(config.seed, r, 1)
    iia_rounds = iia_overhead(config.iia_iterations, 3, config.M, d).training_rounds

    for scheme in config.schemes:
        label = scheme_label(scheme, config)
        for snr in config.snr_grid_db:
            tc = TransmitConfig.from_snr_db(snr, d, N0=config.N0)
            if scheme == "LOIA":
                V, U, rounds = loia.precoders.V, loia.filters.U, loia.ledger.training_rounds
            elif scheme == "IIA":
                state = iia_run(channels, tc, config.iia_iterations, iia_seed)
                V, U, rounds = state.V, state.U, iia_rounds
            else:
                rates, _ = orthogonal_baseline(channels, tc)
                records.append(
                    MetricRecord(label, snr, tuple(rates), (0.0,) * 3, ORTHOGONAL_TRAINING_ROUNDS, channels.seed)
                )
                continue
            rates = rate_per_user(channels, V, U, tc)
            leak = leakage_per_user(channels, V, U, tc)
            records.append(MetricRecord(label, snr, tuple(rates), tuple(leak), rounds, channels.seed))
    return records


def _evaluate(args):
    return evaluate_realization(*args)


def _map_realizations(fn, config):
    jobs = [(config, r) for r in range(config.realizations)]
    if config.workers == 1:
        return [fn(j) for j in jobs]
    # map() keeps realization order, so output does not depend on scheduling.
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(fn, jobs))


def aggregate(per_realization, config):
    """Mean and standard error of the sum rate per (scheme, SNR)."""
    groups = {}
    for records in per_realization:
        for rec in records:
            groups.setdefault((rec.scheme, rec.snr_db), []).append(rec)
    rows = []
    for (scheme, snr), recs in groups.items():
        rates = np.array([r.sum_rate for r in recs])
        stderr = float(np.std(rates, ddof=1) / np.sqrt(rates.size)) if rates.size > 1 else 0.0
        rows.append(
            {
                "scheme": scheme,
                "snr_db": snr,
                "mean_sum_rate": float(np.mean(rates)),
                "stderr": stderr,
                "mean_leakage": float(np.mean([r.mean_leakage for r in recs])),
                "training_rounds": recs[0].training_rounds,
            }
        )
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _write(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def run_experiment(config: ExperimentConfig):
    """
    Sum-rate sweep. Returns ``(rows, csv_text)`` and writes the CSV to
    ``config.output_path`` when set.
    """
    per_realization = _map_realizations(_evaluate, config)
    rows = aggregate(per_realization, config)
    text = rows_to_csv(rows, CSV_COLUMNS)
    _write(text, config.output_path)
    return rows, text


def _history(args):
    config, r = args
    channels = sample_channels(config, r)
    snr = config.snr_grid_db[0]
    tc = TransmitConfig.from_snr_db(snr, config.streams, N0=config.N0)
    state = iia_run(channels, tc, config.iia_iterations, derive_seed(config.seed, r, 1))
    hist = state.half_step_history if config.half_steps else state.leakage_history
    return [(rec.iteration, rec.per_user) for rec in hist]


def leakage_history(config: ExperimentConfig):
    """
    Per-user leakage of the iterative baseline versus iteration, averaged
    over realizations, at the first SNR of the grid.

    Returns ``(rows, csv_text)``; one row per iteration (or per half-step
    when ``config.half_steps`` is set).
    """
    runs = _map_realizations(_history, config)
    K = 3
    per_user = np.array([[pu for _, pu in run] for run in runs])  # (R, steps, K)
    mean = per_user.mean(axis=0)
    iterations = [it for it, _ in runs[0]]
    columns = ["iteration"]
    for k in range(1, K + 1):
        columns += [f"leakage_user{k}", f"leakage_user{k}_db"]
    columns += ["mean_leakage", "mean_leakage_db"]
    rows = []
    with np.errstate(divide="ignore"):
        for i, it in enumerate(iterations):
            row = {"iteration": float(it) if config.half_steps else int(it)}
            for k in range(K):
                row[f"leakage_user{k + 1}"] = float(mean[i, k])
                row[f"leakage_user{k + 1}_db"] = float(10 * np.log10(mean[i, k]))
            m = float(mean[i].mean())
            row["mean_leakage"] = m
            row["mean_leakage_db"] = float(10 * np.log10(m))
            rows.append(row)
    text = rows_to_csv(rows, columns)
    _write(text, config.output_path)
    return rows, text

"""
Command-line interface.

    loia fig3 --mode mimo --antennas 2 --snr 0:60:5 --realizations 200 --out fig3.csv
    loia fig1 --iters 5000 --snr 40 --out fig1.csv
    loia verify --mode siso --n 2 --realizations 1000
    loia protocol-trace --mode mimo --seed 7 --out trace.json

Defaults can be overridden by a ``--config`` file of ``key = value`` lines
(``#`` starts a comment); command-line flags override the file.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import LoiaError
from .experiment import ExperimentConfig, leakage_history, parse_snr_grid, run_experiment, sample_channels
from .io import load_channels, matrices_to_dict
from .protocol import audit_trace, run_loia_protocol
from .verification import alignment_suite, check_realization, failures_of

FIG1_DEFAULTS = {"snr_grid_db": (40.0,), "iia_iterations": 5000, "realizations": 1, "schemes": ("IIA",)}

# config-file key -> (ExperimentConfig field, parser)
_KEYS = {
    "mode": ("mode", str),
    "n": ("n", int),
    "antennas": ("antennas", int),
    "snr": ("snr_grid_db", parse_snr_grid),
    "snr_grid_db": ("snr_grid_db", parse_snr_grid),
    "realizations": ("realizations", int),
    "iters": ("iia_iterations", int),
    "iia_iterations": ("iia_iterations", int),
    "seed": ("seed", int),
    "out": ("output_path", str),
    "output_path": ("output_path", str),
    "workers": ("workers", int),
    "schemes": ("schemes", lambda s: tuple(x.strip() for x in s.split(",") if x.strip())),
    "half_steps": ("half_steps", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
    "pilot_symbols_per_vector": ("pilot_symbols_per_vector", int),
    "n0": ("N0", float),
}


def read_config_file(path):
    """Parse ``key = value`` lines into ExperimentConfig keyword arguments."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise LoiaError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lower().replace("-", "_")
            if key not in _KEYS:
                raise LoiaError(f"{path}:{lineno}: unknown key {key!r}")
            field, parse = _KEYS[key]
            values[field] = parse(value)
    return values


def _build_config(args, defaults=None):
    values = dict(defaults or {})
    if args.config:
        values.update(read_config_file(args.config))
    flags = {
        "mode": args.mode,
        "n": args.n,
        "antennas": args.antennas,
        "snr_grid_db": parse_snr_grid(args.snr) if args.snr is not None else None,
        "realizations": args.realizations,
        "iia_iterations": args.iters,
        "seed": args.seed,
        "output_path": args.out,
        "workers": getattr(args, "workers", None),
        "half_steps": getattr(args, "half_steps", None) or None,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig(**values)


def _emit(text, path):
    if not path:
        sys.stdout.write(text)


def cmd_fig3(args):
    cfg = _build_config(args)
    _, text = run_experiment(cfg)
    _emit(text, cfg.output_path)
    return 0


def cmd_fig1(args):
    cfg = _build_config(args, FIG1_DEFAULTS)
    _, text = leakage_history(cfg)
    _emit(text, cfg.output_path)
    return 0


def cmd_verify(args):
    if args.fixture:
        channels = load_channels(args.fixture)
        worst = check_realization(channels)
        failures = failures_of(worst, "siso" if channels.is_diagonal else "mimo")
        label = args.fixture
    else:
        cfg = _build_config(args)
        worst, failures = alignment_suite(cfg.mode, cfg.n, cfg.antennas, cfg.realizations, cfg.seed)
        label = f"{cfg.mode} M={cfg.M} x{cfg.realizations}"
    for key in sorted(worst):
        status = "FAIL" if key in failures else "ok"
        print(f"{key:16s} {worst[key]:.3e} {status}")
    if failures:
        print(f"verify {label}: FAILED ({', '.join(failures)})", file=sys.stderr)
        return 1
    print(f"verify {label}: all residuals within tolerance")
    return 0


def cmd_protocol_trace(args):
    cfg = _build_config(args, {"realizations": 1})
    channels = sample_channels(cfg, 0)
    result = run_loia_protocol(
        channels, cfg.mode, n=cfg.n if cfg.mode == "siso" else None, pilot_snr_db=args.pilot_snr, seed=cfg.seed
    )
    audit_trace(result.trace)
    ledger = result.ledger.summary()
    ledger["pilot_symbols"] = ledger["pilot_vectors_sent"] * cfg.pilot_symbols_per_vector
    doc = {
        "mode": cfg.mode,
        "M": channels.M,
        "seed": channels.seed,
        "ledger": ledger,
        "trace": result.trace,
        "precoders": matrices_to_dict(result.precoders.V, "precoders"),
        "filters": matrices_to_dict(result.filters.U, "filters"),
    }
    text = json.dumps(doc, indent=1) + "\n"
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _common(p):
    p.add_argument("--config", help="key = value file overriding the defaults")
    p.add_argument("--mode", choices=("siso", "mimo"))
    p.add_argument("--n", type=int, help="symbol extension parameter (siso, M = 2n+1)")
    p.add_argument("--antennas", type=int, help="antennas per node (mimo, even)")
    p.add_argument("--snr", help="SNR grid in dB: start:stop:step or a comma list")
    p.add_argument("--realizations", type=int)
    p.add_argument("--iters", type=int, help="iterations of the iterative baseline")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="loia", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig3", help="sum rate vs SNR CSV")
    _common(p)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("fig1", help="iterative-baseline leakage vs iteration CSV")
    _common(p)
    p.add_argument("--workers", type=int)
    p.add_argument("--half-steps", action="store_true", help="one row per half-iteration")
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("verify", help="alignment residual suite")
    _common(p)
    p.add_argument("--fixture", help="JSON channel set to check instead of random draws")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("protocol-trace", help="JSON event log of one protocol run")
    _common(p)
    p.add_argument("--pilot-snr", type=float, help="perturb training observations at this SNR (dB)")
    p.set_defaults(func=cmd_protocol_trace)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LoiaError, ValueError, OSError) as exc:
        print(f"loia: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end: ``ietcert <subcommand> [--config file.json] [flags]``.

Every subcommand reads an :class:`ExperimentConfig` (from ``--config`` and/or
flags, flags win) and prints JSON.  ``certify`` and ``report`` also write the
configured JSON-lines / JSON / CSV outputs.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from .cocycle import (
    Cocycle,
    check_cancellation,
    check_half_point_identity,
    first_half_point_failure,
    skew_orbit,
)
from .errors import IetError, TieNotDefined
from .iet import SkewPoint, format_rational, to_rational
from .pipeline import ExperimentConfig, draw, involution_sweep, run_pipeline
from .rauzy import conservation_holds, rauzy_iterate
from .rigidity import build_certificate, essential_value_evidence, essential_value_on_floor, find_renormalization_hits

# flags that map one-to-one onto config fields
_FLAGS = {
    "seed": int,
    "d": int,
    "samples": int,
    "sampler": str,
    "denominator_bits": int,
    "max_depth": int,
    "max_hits": int,
    "certificates_needed": int,
    "n_max": int,
    "gamma_len": int,
    "workers": int,
    "certificates_path": str,
    "summary_path": str,
    "csv_path": str,
}
# list-valued config fields, given as space-separated rationals
_LIST_FLAGS = ("iet_lengths", "window_lows", "window_highs")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for name in (*_FLAGS, *_LIST_FLAGS):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data)


def cmd_sample(cfg: ExperimentConfig, args) -> int:
    for i in range(cfg.samples):
        seed = cfg.seed + i
        T = draw(cfg, seed)
        _emit({"seed": seed, "iet": T.serialize()})
    return 0


def cmd_induct(cfg: ExperimentConfig, args) -> int:
    T = draw(cfg, cfg.seed)
    try:
        state = rauzy_iterate(T, args.depth)
    except TieNotDefined as exc:
        _emit({"seed": cfg.seed, "status": "TieNotDefined", "depth": exc.depth})
        return 1
    _emit({"seed": cfg.seed, "status": "ok", "state": state.serialize(), "conservation": conservation_holds(state)})
    return 0


def cmd_identities(cfg: ExperimentConfig, args) -> int:
    f = Cocycle.half_jump()
    ok = True
    for i in range(cfg.samples):
        seed = cfg.seed + i
        T = draw(cfg, seed)
        inv, skipped = involution_sweep(T, seed, cfg.involution_points, cfg.n_max)
        lemma = check_half_point_identity(T, f, cfg.n_max)
        rec = {
            "seed": seed,
            "n_max": cfg.n_max,
            "involution": inv,
            "involution_skipped": skipped,
            "half_point_identity": lemma,
            "first_failure": None if lemma else first_half_point_failure(T, f, cfg.n_max),
            "cancellation": check_cancellation(T, f, cfg.n_max),
        }
        ok = ok and inv and lemma and rec["cancellation"]
        _emit(rec)
    return 0 if ok else 1


def cmd_hits(cfg: ExperimentConfig, args) -> int:
    for i in range(cfg.samples):
        seed = cfg.seed + i
        T = draw(cfg, seed)
        scan = find_renormalization_hits(T, cfg.window(), cfg.gamma_len, cfg.max_depth, cfg.max_hits)
        _emit({"seed": seed, "scan": scan.summary(), "hits": [h.summary() for h in scan.hits]})
    return 0


def cmd_certify(cfg: ExperimentConfig, args) -> int:
    report = run_pipeline(cfg)
    for rec in report.records:
        _emit(rec)
    return report.exit_code


def cmd_essval(cfg: ExperimentConfig, args) -> int:
    T = draw(cfg, cfg.seed)
    if args.probe:
        lo, hi = (to_rational(v) for v in args.probe)
        ev = essential_value_evidence(T, Cocycle.half_jump(), args.a, (lo, hi), args.horizon)
        _emit({"seed": cfg.seed, "probe": [format_rational(lo), format_rational(hi)], "evidence": ev.serialize()})
        return 0 if ev.found else 1
    scan = find_renormalization_hits(T, cfg.window(), cfg.gamma_len, cfg.max_depth, cfg.max_hits)
    found = False
    for hit in scan.hits:
        cert = build_certificate(hit)
        if not cert.passed:
            continue
        ev = essential_value_on_floor(cert, args.a)
        found = found or ev.found
        _emit({"seed": cfg.seed, "depth": hit.n_k, "h_k": cert.h_k, "evidence": ev.serialize()})
    return 0 if found else 1


def cmd_orbit(cfg: ExperimentConfig, args) -> int:
    T = draw(cfg, cfg.seed)
    c = Cocycle.half_jump()
    start = SkewPoint(to_rational(args.x), args.level)
    stats = skew_orbit(T, c, start, args.steps, keep_trace=bool(args.trace_csv), stop_at_first_return=args.first_return)
    _emit({"seed": cfg.seed, "orbit": stats.summary()})
    if args.trace_csv:
        with open(args.trace_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "level"])
            for n, level in enumerate(stats.trace or []):
                w.writerow([n, level])
    return 0


def cmd_report(cfg: ExperimentConfig, args) -> int:
    report = run_pipeline(cfg)
    _emit(report.summary())
    return report.exit_code


COMMANDS = {
    "sample": (cmd_sample, "draw symmetric IETs"),
    "induct": (cmd_induct, "run the induction to a given depth"),
    "identities": (cmd_identities, "check the involution and odd-cocycle identities"),
    "hits": (cmd_hits, "scan for renormalization hits"),
    "certify": (cmd_certify, "build certificates, write JSON-lines"),
    "essval": (cmd_essval, "essential-value evidence"),
    "orbit": (cmd_orbit, "skew-product orbit statistics"),
    "report": (cmd_report, "full pipeline with summary"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ietcert", description="Exact certificates for skew products over symmetric IETs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="JSON file with ExperimentConfig fields")
        for flag, typ in _FLAGS.items():
            sp.add_argument("--" + flag.replace("_", "-"), dest=flag, type=typ, default=None)
        for flag in _LIST_FLAGS:
            sp.add_argument("--" + flag.replace("_", "-"), dest=flag, nargs="+", default=None)
        if name == "induct":
            sp.add_argument("--depth", type=int, required=True)
        if name == "essval":
            sp.add_argument("--a", type=int, default=-1)
            sp.add_argument("--probe", nargs=2, metavar=("LO", "HI"))
            sp.add_argument("--horizon", type=int, default=1000)
        if name == "orbit":
            sp.add_argument("--x", default="1/3")
            sp.add_argument("--level", type=int, default=0)
            sp.add_argument("--steps", type=int, default=10**6)
            sp.add_argument("--first-return", action="store_true")
            sp.add_argument("--trace-csv")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command][0](cfg, args)
    except IetError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``hierarchia run | partitions dump | meanfield``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import parse_config
from .errors import ConfigError, DomainError
from .instances import random_one_particle_state
from .kinetic import ScalingSchedule, mean_field_experiment
from .partitions import enumerate_partitions
from .results import VERSION, config_hash
from .suites import run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.buffer.write(text.encode("utf-8"))
        sys.stdout.flush()


def _load(path: str):
    try:
        document = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", "", None) from None
    return parse_config(document)


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if args.experimental_skrrc:
        cfg.experimental_skrrc = True
    fmt = args.format or cfg.output_format
    out = args.out or cfg.output_path
    table, code = run_suite(cfg)
    _emit(table.to_csv() if fmt == "csv" else table.to_json(), out)
    failed = sum(1 for row in table.rows if not row[-1])
    print(f"{len(table.rows)} checks, {failed} failed", file=sys.stderr)
    return code


def cmd_partitions(args) -> int:
    if args.n < 1:
        raise DomainError("--n must be >= 1")
    lines = ["".join(DIGITS[b] for b in p.rgs()) for p in enumerate_partitions(range(1, args.n + 1))]
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_meanfield(args) -> int:
    cfg = _load(args.config)
    try:
        eps = tuple(float(x) for x in args.epsilons.split(","))
    except ValueError:
        raise ConfigError(f"bad --epsilons {args.epsilons!r}", "--epsilons", None) from None
    try:
        schedule = ScalingSchedule(eps, cfg.meanfield.shift)
    except DomainError as exc:
        raise ConfigError(str(exc), "--epsilons", None) from None
    t = cfg.meanfield.t if args.t is None else args.t
    g1 = random_one_particle_state(cfg.seed * 1009 + 6, cfg.model.d)
    table = mean_field_experiment(cfg.model, schedule, g1, t)
    table.metadata = {"config_hash": config_hash(cfg.document), "version": VERSION}
    _emit(table.to_csv() if args.format == "csv" else table.to_json(), args.out)
    e1, e2 = table.column("err_g1_tracenorm"), table.column("err_g2_scaled")
    decreasing = all(b < a for a, b in zip(e1, e1[1:])) and all(b < a for a, b in zip(e2, e2[1:]))
    return EXIT_OK if decreasing else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hierarchia", description="Hierarchies of evolution equations for finite quantum systems.")
    p.add_argument("--version", action="version", version=VERSION)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the verification suites of a config")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--experimental-skrrc", action="store_true",
                     help="enable generating operators of order n >= 3")
    run.set_defaults(func=cmd_run)

    parts = sub.add_parser("partitions", help="partition utilities")
    psub = parts.add_subparsers(dest="action", required=True)
    dump = psub.add_parser("dump", help="print set partitions of 1..n as restricted growth strings")
    dump.add_argument("--n", type=int, required=True)
    dump.set_defaults(func=cmd_partitions)

    mf = sub.add_parser("meanfield", help="mean-field scaling sweep")
    mf.add_argument("--epsilons", default="1,0.5,0.25,0.125")
    mf.add_argument("--t", type=float)
    mf.add_argument("--config", required=True)
    mf.add_argument("--out")
    mf.add_argument("--format", choices=("csv", "json"), default="csv")
    mf.set_defaults(func=cmd_meanfield)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``brdsim {gen,brd,count,exact,sweep}``.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime failure.
Every run logs the seed it used to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import exact as exact_mod
from .brd import outcome_summary, run_brd, trace_jsonl
from .equilibrium import enumerate_pne
from .game import (DenseGame, GameParams, LazyGame, ParameterError, game_to_json,
                   generate_dense, load_dense, save_dense, write_dense_csv)
from .harness import load_spec, run_experiment

log = logging.getLogger("brdsim")

DEFAULT_SWEEP_SEED = 0


class UsageError(Exception):
    pass


def _add_game_args(p: argparse.ArgumentParser, allow_file: bool) -> None:
    p.add_argument("--ka", type=int, help="number of actions of player A")
    p.add_argument("--kb", type=int, help="number of actions of player B")
    p.add_argument("--p", type=float, help="payoff correlation in [0, 1]")
    p.add_argument("--seed", type=int, help="64-bit game seed (required unless --game)")
    if allow_file:
        p.add_argument("--game", type=Path, help="read a game written by `gen` (stem, .csv or .json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brdsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a dense game")
    _add_game_args(gen, allow_file=False)
    gen.add_argument("--out", type=Path, help="output stem; csv writes <stem>.csv and <stem>.json")
    gen.add_argument("--format", choices=["csv", "json"], default="csv")

    brd = sub.add_parser("brd", help="run best-response dynamics once")
    _add_game_args(brd, allow_file=True)
    brd.add_argument("--out", type=Path, help="output file (default stdout)")
    brd.add_argument("--format", choices=["json", "jsonl"], default="json",
                     help="json: outcome summary; jsonl: one line per step")
    brd.add_argument("--trace", type=Path, help="also write the step trace as JSON lines")

    count = sub.add_parser("count", help="enumerate pure Nash equilibria")
    _add_game_args(count, allow_file=True)
    count.add_argument("--out", type=Path)
    count.add_argument("--format", choices=["json", "csv"], default="json")

    ex = sub.add_parser("exact", help="exact tau_NE law of potential games and limit constants")
    ex.add_argument("--ka", type=int, required=True)
    ex.add_argument("--kb", type=int, required=True)
    ex.add_argument("--out", type=Path)
    ex.add_argument("--format", choices=["json", "csv"], default="json")

    sw = sub.add_parser("sweep", help="run a Monte Carlo experiment from a JSON/TOML spec")
    sw.add_argument("--spec", type=Path, required=True)
    sw.add_argument("--seed", type=int, help=f"base seed (default: the spec's, else {DEFAULT_SWEEP_SEED})")
    sw.add_argument("--trials", type=int, help="override the spec's trial count")
    sw.add_argument("--threads", type=int, default=1)
    sw.add_argument("--out", type=Path, help="output stem for <stem>.csv and <stem>.json")
    return parser


def _params(args) -> GameParams:
    missing = [f"--{n}" for n in ("ka", "kb", "p", "seed") if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing {', '.join(missing)}")
    return GameParams(args.ka, args.kb, args.p, args.seed)


def _game(args, lazy: bool) -> DenseGame | LazyGame:
    if getattr(args, "game", None) is not None:
        if any(getattr(args, n) is not None for n in ("ka", "kb", "p", "seed")):
            raise UsageError("--game cannot be combined with --ka/--kb/--p/--seed")
        game = load_dense(args.game)
        log.info("loaded %s (seed=%d)", args.game, game.params.seed)
        return game
    params = _params(args)
    log.info("seed=%d k_a=%d k_b=%d p=%r", params.seed, params.k_a, params.k_b, params.p)
    return LazyGame(params) if lazy else generate_dense(params)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_gen(args) -> None:
    params = _params(args)
    log.info("seed=%d k_a=%d k_b=%d p=%r", params.seed, params.k_a, params.k_b, params.p)
    game = generate_dense(params)
    if args.format == "json":
        _emit(_json(game_to_json(game)), args.out)
    elif args.out is not None:
        paths = save_dense(game, args.out)
        log.info("wrote %s and %s", *paths)
    else:
        write_dense_csv(game, sys.stdout)


def cmd_brd(args) -> None:
    trace = run_brd(_game(args, lazy=True))
    if args.trace is not None:
        _emit(trace_jsonl(trace), args.trace)
    if args.format == "jsonl":
        _emit(trace_jsonl(trace), args.out)
    else:
        _emit(_json(outcome_summary(trace)), args.out)


def cmd_count(args) -> None:
    report = enumerate_pne(_game(args, lazy=False))
    if args.format == "csv":
        lines = ["a,b"] + [f"{a},{b}" for a, b in report.equilibria]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(_json(report.to_dict()), args.out)


def cmd_exact(args) -> None:
    table = exact_mod.hazard(args.ka, args.kb)
    dist = exact_mod.tau_distribution(args.ka, args.kb)
    if args.format == "csv":
        rows = ["t,q,survival,pmf"] + [
            f"{t},{q!r},{s!r},{m!r}" for t, (q, s, m) in enumerate(zip(table.q, dist.survival, dist.pmf))
        ]
        _emit("\n".join(rows) + "\n", args.out)
        return
    _emit(_json({
        "k_a": args.ka, "k_b": args.kb,
        "q": table.q, "survival": dist.survival, "pmf": dist.pmf,
        "mean": dist.mean, "variance": dist.variance,
        "limit": exact_mod.limit_constants(),
    }), args.out)


def cmd_sweep(args) -> None:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec.base_seed = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise UsageError("--trials must be positive")
        spec.trials = args.trials
    if args.threads < 1:
        raise UsageError("--threads must be positive")
    log.info("base_seed=%d trials=%d grid=%d points", spec.base_seed, spec.trials, len(spec.grid))
    summary = run_experiment(spec, threads=args.threads)
    if args.out is None:
        _emit(_json(summary.to_dict()), None)
    else:
        paths = summary.write(args.out)
        log.info("wrote %s and %s", *paths)


COMMANDS = {"gen": cmd_gen, "brd": cmd_brd, "count": cmd_count, "exact": cmd_exact, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        parser.print_usage(sys.stderr)
        print(f"brdsim {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

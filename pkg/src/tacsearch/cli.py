"""Command line entry point: build, reprove, tune, prove."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import SearchConfig, baseline, load_config, load_grid
from .goalsys.syntax import ParseError
from .harness import CorpusError, build_knowledge, prove, reprove, tune
from .knowledge.db import save_knowledge


def _config(args) -> SearchConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else SearchConfig()
    if getattr(args, "baseline", False):
        cfg = baseline(cfg)
    if getattr(args, "budget", None) is not None:
        cfg = cfg.with_(global_timeout=args.budget)
    return cfg


def cmd_build(args) -> int:
    k = build_knowledge(args.corpus, _config(args))
    save_knowledge(k.kb, args.out)
    print(f"{len(k.kb.theorems)} theorems, {len(k.kb.tactics)} pairs, {len(k.kb.goallists)} goal lists -> {args.out}")
    for w in k.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_reprove(args) -> int:
    def show(rec):
        print(f"{rec['status']:>9}  {rec['wall_ms']:>9.1f} ms  {rec['name']}", flush=True)

    rep = reprove(args.corpus, _config(args), progress=show)
    rep.write(args.out)
    print(f"solved {rep.solved}/{len(rep.records)} ({rep.solve_rate:.1%}) -> {args.out}")
    return 0


def cmd_tune(args) -> int:
    table = tune(args.corpus, load_grid(args.grid), _config(args))
    Path(args.out).mkdir(parents=True, exist_ok=True)
    table.write_csv(Path(args.out) / "tune.csv")
    for params, solved in table.rows:
        print(" ".join(f"{k}={v}" for k, v in params.items()), "solved", solved)
    best, solved = table.best()
    print("best:", json.dumps(best, sort_keys=True), "solved", solved)
    return 0


def cmd_prove(args) -> int:
    status = prove(args.goal, args.corpus, _config(args))
    if status.proved:
        print(status.script)
        return 0
    print(status.status)
    return 1


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tacsearch", description="Learned tactic search over a small equational logic.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out):
        sp.add_argument("corpus", help="directory of .thy scripts")
        sp.add_argument("--out", default=out, help="output directory")
        sp.add_argument("--config", help="flat key = value file of search settings")
        sp.add_argument("--baseline", action="store_true", help="disable all learned components")
        sp.add_argument("--budget", type=float, help="seconds per theorem")

    sp = sub.add_parser("build", help="record the corpus into JSON-lines knowledge files")
    common(sp, "knowledge")
    sp.set_defaults(func=cmd_build)
    sp = sub.add_parser("reprove", help="re-prove every theorem chronologically")
    common(sp, "out")
    sp.set_defaults(func=cmd_reprove)
    sp = sub.add_parser("tune", help="evaluate a parameter grid on the tuning slice")
    common(sp, "out")
    sp.add_argument("--grid", required=True, help="grid file: key = v1, v2, ...")
    sp.set_defaults(func=cmd_tune)
    sp = sub.add_parser("prove", help="prove one goal with the full corpus knowledge")
    common(sp, "out")
    sp.add_argument("goal", help='goal text, e.g. "|- add(x,0) = x"')
    sp.set_defaults(func=cmd_prove)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except (CorpusError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

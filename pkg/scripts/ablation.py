"""Full strategy vs. baseline and single-feature ablations on a corpus."""

import argparse
import json
import sys
import time

from tacsearch.config import SearchConfig, baseline
from tacsearch.harness import reprove

ABLATIONS = ("orthogonalization", "abstraction", "evaluation", "auto_priority")


def strategies(budget: float) -> dict[str, SearchConfig]:
    full = SearchConfig(global_timeout=budget)
    out = {"full": full, "baseline": baseline(full)}
    for name in ABLATIONS:
        out[f"no_{name}"] = full.with_(**{name: False})
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("corpus", nargs="?", default="corpus")
    ap.add_argument("--budget", type=float, default=5.0)
    ap.add_argument("--json", help="write the solved counts here")
    args = ap.parse_args(argv)
    table = {}
    for name, cfg in strategies(args.budget).items():
        t0 = time.monotonic()
        rep = reprove(args.corpus, cfg)
        table[name] = rep.solved
        print(f"{name:<22} solved {rep.solved:>3}/{len(rep.records)}  ({time.monotonic() - t0:.1f} s)", flush=True)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(table, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())

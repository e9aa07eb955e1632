"""Replay every human proof of a corpus and report the ones that fail."""

import argparse
import sys
import time

from tacsearch.goalsys.tactics import Context, replay_proof
from tacsearch.harness import load_corpus
from tacsearch.knowledge.script import AliasDef, TheoremDecl, TheoryDecl, globalize


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("corpus", nargs="?", default="corpus")
    args = ap.parse_args(argv)
    ctx = Context()
    bad = total = 0
    for path, decls in load_corpus(args.corpus):
        aliases = {}
        for d in decls:
            if isinstance(d, TheoryDecl):
                ctx.theory = d.name
            elif isinstance(d, AliasDef):
                aliases[d.name] = d.body
            elif isinstance(d, TheoremDecl):
                total += 1
                glob = globalize(d.proof, aliases, ctx)
                t0 = time.perf_counter()
                ok = not glob.unresolved and replay_proof(glob.tactic, d.statement, ctx)
                ms = (time.perf_counter() - t0) * 1000
                if not ok:
                    bad += 1
                    print(f"FAIL {path.name}:{d.line} {d.name}: {d.proof_text}")
                elif ms > 50:
                    print(f"slow {path.name}:{d.line} {d.name}: {ms:.1f} ms")
                ctx.add(ctx.theory, d.name, d.statement)
    print(f"{total - bad}/{total} proofs replay")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())

"""Compare the compiled and pure-Python MSO kernels on automaton-formula checks.

Each case evaluates the automaton formula of a random automaton on the
encoding of one of its runs and on a mutated copy of it.  Both kernels see
the same compiled program, so their verdicts and step counts must match.

    python benchmarks/bench_kernel.py --automata 8 --runs 10
"""
import argparse
import random
import statistics
import sys
import time

from hyperclock.automaton import encode_flow
from hyperclock.engine import GridBudget
from hyperclock.generators import mutate_flow, random_automaton, random_runs
from hyperclock.mso import Evaluator, automaton_formula, available_backends


def cases(automata: int, runs: int, seed: int):
    rng = random.Random(seed)
    budget = GridBudget(4, 4, 5)
    made = 0
    while made < automata:
        A = random_automaton(rng)
        pop = random_runs(A, budget, rng, runs)
        if not pop:
            continue
        made += 1
        phi = automaton_formula(A)
        preds = sorted(A.predicate_names())
        for rho in pop:
            f = encode_flow(A, rho, budget.horizon)
            yield phi, f
            yield phi, mutate_flow(f, preds, rng, budget.granularity, 2)


def timed(phi, f, backend):
    """Verdict, kernel steps, and the kernel's own run time (compilation excluded)."""
    ev = Evaluator(phi, f, backend=backend)
    t0 = time.perf_counter()
    verdict = ev()
    return verdict, ev.stats().steps, time.perf_counter() - t0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--automata", type=int, default=8)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if "c" not in available_backends():
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1
    secs = {"c": [], "py": []}
    steps = []
    accepted = 0
    for phi, f in cases(args.automata, args.runs, args.seed):
        vc, sc, tc = timed(phi, f, "c")
        vp, sp, tp = timed(phi, f, "py")
        if (vc, sc) != (vp, sp):
            print(f"kernels disagree: c={vc}/{sc} py={vp}/{sp}", file=sys.stderr)
            return 1
        secs["c"].append(tc)
        secs["py"].append(tp)
        steps.append(sc)
        accepted += vc
    n = len(steps)
    print(f"cases {n} (accepted {accepted}), median kernel steps {statistics.median(steps):.0f}")
    print(f"{'backend':8} {'total s':>9} {'median ms':>10}")
    for b in ("c", "py"):
        print(f"{b:8} {sum(secs[b]):9.3f} {1000 * statistics.median(secs[b]):10.2f}")
    print(f"speedup {sum(secs['py']) / sum(secs['c']):.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

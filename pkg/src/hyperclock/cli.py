"""Command line interface.

Exit status: 0 when the answer is positive (holds, true, agreement), 1 when it
is negative, 2 on malformed input.  Verdicts are printed as JSON.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import formula as hf
from . import io as hio
from .automaton import AutomatonError
from .engine import EngineError, GridBudget, GridProvider, enumerate_point_runs, verify, verify_point
from .formula import FormulaError
from .mso.emit import automaton_formula, scaling_manifest, translate
from .mso.syntax import MsoError, serialize
from .pointwise import build_interval_automaton
from .semantics import ListProvider, PointSemantics, IntervalSemantics, SemanticsError
from .timecore import INF, TimeError, bound, fmt_rat, rat

log = logging.getLogger("hyperclock")

INPUT_ERRORS = (FormulaError, hio.FormatError, AutomatonError, TimeError, EngineError, MsoError, SemanticsError)


class UsageError(ValueError):
    pass


def seed_from_env(default: int = 0) -> int:
    raw = os.environ.get("HYPERCLOCK_SEED")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"HYPERCLOCK_SEED must be an integer, got {raw!r}") from None


def _formula_arg(text: str) -> str:
    """A formula given inline, or ``@file`` to read it from a file."""
    if text.startswith("@"):
        try:
            return Path(text[1:]).read_text().strip()
        except OSError as exc:
            raise hio.FormatError(f"{text[1:]}: {exc.strerror}") from None
    return text


def _budget(args) -> GridBudget:
    return GridBudget(args.granularity, args.max_transitions, bound(args.horizon))


def _add_budget(p):
    p.add_argument("--granularity", "-k", type=int, default=1, help="grid step is 1/K")
    p.add_argument("--max-transitions", "-d", type=int, default=2)
    p.add_argument("--horizon", "-N", default="5")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for run enumeration")
    p.add_argument("--timing", action="store_true", help="include wall time in the verdict")


def _emit_verdict(v, timing: bool) -> int:
    data = v.to_json()
    if not timing:
        data["stats"] = {k: val for k, val in data["stats"].items() if k != "seconds"}
    print(hio.dump_json(data))
    return 0 if v.holds else 1


# -- subcommands --------------------------------------------------------------------


def cmd_parse(args) -> int:
    phi = hf.parse(_formula_arg(args.formula), allow_open_temporal=args.open)
    if args.tree:
        print(repr(phi))
    print(hf.to_text(phi))
    return 0


def cmd_negate(args) -> int:
    phi = hf.parse(_formula_arg(args.formula), allow_open_temporal=args.open)
    print(hf.to_text(hf.negate(phi)))
    return 0


def cmd_check_trace(args) -> int:
    data = hio.load_json(args.env)
    mode, horizon, paths = hio.environment_from_json(data)
    if args.horizon is not None:
        horizon = bound(args.horizon)
    model = args.automaton or data.get("automaton")
    if model is None:
        raise UsageError("check-trace needs an automaton (--automaton or an 'automaton' field in the environment)")
    mdata = hio.load_json(model) if isinstance(model, str) else model
    phi = hf.parse(_formula_arg(args.formula), allow_open_temporal=True)
    t = rat(args.at)
    anchor = args.anchor if args.anchor not in (None, "", "eps") else None
    if anchor is not None and anchor not in paths:
        raise UsageError(f"anchor {anchor!r} is not a path of the environment")
    missing = set(hf.free_vars(phi)) - set(paths)
    if missing:
        raise UsageError(f"free path variables without a run: {sorted(missing)}")
    needs_runs = not hf.quantifier_free(phi)
    if mode == "interval":
        A = hio.automaton_from_json(mdata)
        prov = GridProvider(A, _budget_or_env(args, horizon)) if needs_runs else None
        sem = IntervalSemantics(A, horizon, prov)
    else:
        B = hio.point_automaton_from_json(mdata)
        prov = ListProvider(enumerate_point_runs(B, _budget_or_env(args, horizon)), point_mode=True) if needs_runs else None
        sem = PointSemantics(B, horizon, prov)
    ok = sem.sat(paths, t, anchor, phi)
    print("true" if ok else "false")
    return 0 if ok else 1


def _budget_or_env(args, horizon) -> GridBudget:
    if horizon is INF:
        raise UsageError("quantified formulas need a finite horizon (--horizon or the environment's horizon)")
    return GridBudget(args.granularity, args.max_transitions, horizon)


def cmd_verify(args) -> int:
    A = hio.automaton_from_json(hio.load_json(args.automaton))
    phi = hf.parse(_formula_arg(args.formula))
    return _emit_verdict(verify(A, phi, _budget(args), jobs=args.jobs), args.timing)


def cmd_verify_point(args) -> int:
    B = hio.point_automaton_from_json(hio.load_json(args.automaton))
    phi = hf.parse(_formula_arg(args.formula))
    return _emit_verdict(verify_point(B, phi, _budget(args), route=args.route), args.timing)


def cmd_to_mso(args) -> int:
    if args.automaton is None:
        raise UsageError("to-mso needs --automaton")
    A = hio.automaton_from_json(hio.load_json(args.automaton))
    phi = hf.parse(_formula_arg(args.formula), allow_open_temporal=True) if args.formula else None
    horizon = bound(args.horizon) if args.horizon is not None else INF
    manifest = scaling_manifest(A, phi, horizon)
    factor = manifest["factor"]
    if factor != 1:
        A = A.scaled(factor)
        if phi is not None:
            phi = hf.scale_formula(phi, factor)
    lines = [
        "; hyperclock MSO(<,+1)",
        f"; scale-factor {factor}",
        f"; horizon {manifest['horizon']}",
        f"; scaled-horizon {manifest['scaled_horizon']}",
    ]
    if phi is None:
        lines.append("; automaton-formula")
        lines.append(serialize(automaton_formula(A)))
    else:
        order = hf.free_vars(phi)
        lines.append(f"; formula {hf.to_text(phi)}")
        lines.append(f"; path-order {' '.join(order) if order else '-'}")
        formulas = translate(phi, A, order)
        picks = range(len(formulas)) if args.index is None else [args.index]
        for i in picks:
            if not 0 <= i < len(formulas):
                raise UsageError(f"--index must lie in 0..{len(formulas) - 1}")
            lines.append(f"; anchor-index {i} free-variable x")
            lines.append(serialize(formulas[i]))
    out = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_point2interval(args) -> int:
    B = hio.point_automaton_from_json(hio.load_json(args.automaton))
    out = {"automaton": hio.automaton_to_json(build_interval_automaton(B))}
    if args.formula:
        phi = hf.parse(_formula_arg(args.formula), allow_open_temporal=True)
        out["formula"] = hf.to_text(hf.point_to_interval(phi))
    print(hio.dump_json(out))
    return 0


def cmd_corpus(args) -> int:
    from .corpus import load_entries, run_entry

    entries = load_entries(args.dir)
    if args.only:
        entries = [e for e in entries if e.name in set(args.only)]
        if not entries:
            raise UsageError(f"no corpus entry named {args.only}")
    if args.action == "list":
        for e in entries:
            print(f"{e.name}\t{e.mode}\t{e.expected}\t{e.formula}")
        return 0
    failures = 0
    results = []
    for e in entries:
        res = run_entry(e, jobs=args.jobs)
        results.append(res)
        status = "ok" if res["ok"] else "MISMATCH"
        if not res["ok"]:
            failures += 1
        if not args.json:
            print(f"{status:8} {e.name:32} expected {e.expected:20} got {res['verdict']}"
                  + (f"  ({res['seconds']:.2f}s)" if args.timing else ""))
    if args.json:
        if not args.timing:
            for r in results:
                r.pop("seconds", None)
        print(hio.dump_json(results))
    return 0 if failures == 0 else 1


# -- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperclock", description="Branching timed hyperproperties of timed automata")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a formula and print it in normal form")
    p.add_argument("formula", help="formula text or @file")
    p.add_argument("--open", action="store_true", help="allow temporal operators outside quantifiers")
    p.add_argument("--tree", action="store_true", help="also print the syntax tree")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("negate", help="print the normal-form negation")
    p.add_argument("formula")
    p.add_argument("--open", action="store_true")
    p.set_defaults(func=cmd_negate)

    p = sub.add_parser("check-trace", help="evaluate a formula on a concrete environment")
    p.add_argument("env", help="environment JSON")
    p.add_argument("formula")
    p.add_argument("--automaton", help="automaton JSON (labels and quantifier domain)")
    p.add_argument("--at", default="0", help="evaluation time")
    p.add_argument("--anchor", default=None, help="last quantified path variable (default: none)")
    p.add_argument("--granularity", "-k", type=int, default=1)
    p.add_argument("--max-transitions", "-d", type=int, default=2)
    p.add_argument("--horizon", "-N", default=None)
    p.set_defaults(func=cmd_check_trace)

    p = sub.add_parser("verify", help="grid-bounded verification over an interval automaton")
    p.add_argument("automaton")
    p.add_argument("formula")
    _add_budget(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("verify-point", help="grid-bounded verification over a point automaton")
    p.add_argument("automaton")
    p.add_argument("formula")
    p.add_argument("--route", choices=("direct", "reduce", "both"), default="both")
    _add_budget(p)
    p.set_defaults(func=cmd_verify_point)

    p = sub.add_parser("to-mso", help="emit the MSO(<,+1) encoding")
    p.add_argument("--automaton", required=False)
    p.add_argument("--formula", default=None)
    p.add_argument("--index", type=int, default=None, help="only the translation anchored at this path index")
    p.add_argument("--horizon", "-N", default=None)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_to_mso)

    p = sub.add_parser("point2interval", help="emit the simulating interval automaton and formula")
    p.add_argument("automaton")
    p.add_argument("--formula", default=None)
    p.set_defaults(func=cmd_point2interval)

    p = sub.add_parser("corpus", help="security-property corpus")
    p.add_argument("action", choices=("run", "list"))
    p.add_argument("--dir", default=None, help="corpus directory (default: the bundled one)")
    p.add_argument("--only", nargs="*", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_corpus)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Bundled security-property corpus: each property with a compliant model and a mutant."""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .. import formula as hf
from .. import io as hio
from ..engine import GridBudget, verify, verify_point
from ..semantics import IntervalSemantics, ListProvider, PointSemantics
from ..timecore import bound

CORPUS_DIR = Path(__file__).resolve().parent


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    property: str
    mode: str  # "interval" or "point"
    model: Path
    formula: str
    budget: GridBudget
    expected: str
    note: str = ""


def load_entries(directory: Optional[str] = None) -> list[CorpusEntry]:
    root = Path(directory) if directory else CORPUS_DIR
    index = hio.load_json(root / "index.json")
    out = []
    for i, e in enumerate(index.get("entries", [])):
        where = f"index.json entries[{i}]"
        try:
            b = e["budget"]
            text = (root / e["formula"]).read_text().strip() if e["formula"].endswith(".hcm") else e["formula"]
            out.append(CorpusEntry(
                e["name"], e["property"], e.get("mode", "interval"), root / e["model"], text,
                GridBudget(int(b["granularity"]), int(b["max_transitions"]), bound(b["horizon"])),
                e["expected"], e.get("note", ""),
            ))
        except (KeyError, TypeError) as exc:
            raise hio.FormatError(f"{where}: missing or malformed field {exc}") from None
        except OSError as exc:
            raise hio.FormatError(f"{where}: {exc}") from None
    return out


def run_entry(entry: CorpusEntry, jobs: int = 1) -> dict:
    """Verify one entry and independently replay its witness, if any."""
    t0 = time.perf_counter()
    phi = hf.parse(entry.formula)
    data = hio.load_json(entry.model)
    if entry.mode == "interval":
        A = hio.automaton_from_json(data)
        v = verify(A, phi, entry.budget, jobs=jobs)
    else:
        A = hio.point_automaton_from_json(data)
        v = verify_point(A, phi, entry.budget)
    replayed = None
    if v.witness is not None:
        replayed = replay_witness(entry, A, phi, v.witness)
    ok = v.verdict == entry.expected and replayed is not False
    return {
        "name": entry.name,
        "expected": entry.expected,
        "verdict": v.verdict,
        "witness": v.witness,
        "replayed": replayed,
        "ok": ok,
        "seconds": time.perf_counter() - t0,
    }


def replay_witness(entry: CorpusEntry, A, phi, witness: dict) -> bool:
    """True when the witness paths falsify the matrix left after the leading universal quantifiers."""
    from ..engine import GridProvider, enumerate_point_runs
    from fractions import Fraction

    paths = witness["paths"]
    rest = phi
    anchor = None
    while isinstance(rest, hf.Forall) and rest.var in paths:
        anchor = rest.var
        rest = rest.body
    if entry.mode == "interval":
        env = {v: hio.execution_from_json(r) for v, r in paths.items()}
        sem = IntervalSemantics(A, entry.budget.horizon, GridProvider(A, entry.budget))
    else:
        env = {v: hio.point_execution_from_json(r) for v, r in paths.items()}
        sem = PointSemantics(A, entry.budget.horizon, ListProvider(enumerate_point_runs(A, entry.budget), point_mode=True))
    return not sem.sat(env, Fraction(0), anchor, rest)

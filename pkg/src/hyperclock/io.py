"""JSON file formats for automata, executions, environments and flows."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .automaton import AutomatonError, Edge, Execution, TimedAutomaton
from .flow import Flow
from .pointwise import PointAutomaton, PointEdge, PointExecution
from .timecore import TRUE, Interval, TimeError, bound, fmt_rat, parse_constraint, rat


class FormatError(ValueError):
    """Malformed input file."""


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None


def dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def _need(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise FormatError(f"{where}: missing field {key!r}")
    return data[key]


def _constraint(text, where):
    try:
        return parse_constraint(text) if text not in (None, "", "true") else TRUE
    except TimeError as exc:
        raise FormatError(f"{where}: {exc}") from None


def automaton_from_json(data: dict) -> TimedAutomaton:
    where = "automaton"
    try:
        sc = {}
        for v, per in (data.get("stateConstraints") or {}).items():
            for x, text in per.items():
                sc[(v, x)] = _constraint(text, f"{where}.stateConstraints.{v}.{x}")
        edges = []
        for i, e in enumerate(_need(data, "edges", where)):
            edges.append(
                Edge(
                    _need(e, "from", f"{where}.edges[{i}]"),
                    _need(e, "to", f"{where}.edges[{i}]"),
                    tuple(_constraint(g, f"{where}.edges[{i}].guards") for g in e.get("guards", [])),
                    frozenset(e.get("resets", [])),
                )
            )
        return TimedAutomaton(
            frozenset(data.get("propositions", [])),
            tuple(_need(data, "states", where)),
            frozenset(_need(data, "initial", where)),
            {v: frozenset(ps) for v, ps in (data.get("labels") or {}).items()},
            tuple(data.get("clocks", [])),
            sc,
            tuple(edges),
            frozenset(_need(data, "final", where)),
        )
    except AutomatonError as exc:
        raise FormatError(f"{where}: {exc}") from None


def automaton_to_json(A: TimedAutomaton) -> dict:
    sc: dict = {}
    for (v, x), psi in sorted(A.state_constraints.items()):
        if psi != TRUE:
            sc.setdefault(v, {})[x] = str(psi)
    return {
        "propositions": sorted(A.propositions),
        "states": list(A.states),
        "initial": sorted(A.initial),
        "labels": {v: sorted(A.label(v)) for v in A.states},
        "clocks": list(A.clocks),
        "stateConstraints": sc,
        "edges": [
            {"from": e.source, "to": e.target, "guards": [str(g) for g in e.guards], "resets": sorted(e.resets)}
            for e in A.edges
        ],
        "final": sorted(A.final),
    }


def point_automaton_from_json(data: dict) -> PointAutomaton:
    where = "point automaton"
    try:
        edges = []
        for i, e in enumerate(_need(data, "edges", where)):
            edges.append(
                PointEdge(
                    _need(e, "from", f"{where}.edges[{i}]"),
                    frozenset(e.get("events", [])),
                    tuple(_constraint(g, f"{where}.edges[{i}].guards") for g in e.get("guards", [])),
                    frozenset(e.get("resets", [])),
                    _need(e, "to", f"{where}.edges[{i}]"),
                )
            )
        return PointAutomaton(
            frozenset(data.get("propositions", [])),
            tuple(_need(data, "states", where)),
            _need(data, "start", where),
            tuple(data.get("clocks", [])),
            tuple(edges),
            frozenset(_need(data, "final", where)),
        )
    except AutomatonError as exc:
        raise FormatError(f"{where}: {exc}") from None


def point_automaton_to_json(B: PointAutomaton) -> dict:
    return {
        "propositions": sorted(B.propositions),
        "states": list(B.states),
        "start": B.start,
        "clocks": list(B.clocks),
        "edges": [
            {"from": e.source, "to": e.target, "events": sorted(e.event), "guards": [str(g) for g in e.guards],
             "resets": sorted(e.resets)}
            for e in B.transitions
        ],
        "final": sorted(B.final),
    }


def execution_from_json(data: dict) -> Execution:
    try:
        segs = tuple(
            (_need(s, "state", "segment"), Interval.parse(_need(s, "interval", "segment")))
            for s in _need(data, "segments", "execution")
        )
        return Execution(segs, tuple(data.get("transitions", [])))
    except (TimeError, AutomatonError) as exc:
        raise FormatError(f"execution: {exc}") from None


def execution_to_json(rho: Execution) -> dict:
    return {
        "segments": [{"state": v, "interval": str(iv)} for v, iv in rho.segments],
        "transitions": list(rho.transitions),
    }


def point_execution_from_json(data: dict) -> PointExecution:
    try:
        return PointExecution(
            tuple((int(_need(s, "edge", "step")), rat(_need(s, "time", "step"))) for s in _need(data, "steps", "point execution"))
        )
    except (TimeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"point execution: {exc}") from None


def point_execution_to_json(eta: PointExecution) -> dict:
    return {"steps": [{"edge": e, "time": fmt_rat(t)} for e, t in eta.steps]}


def environment_from_json(data: dict):
    """``(mode, horizon, {var: run})``."""
    mode = data.get("mode", "interval")
    if mode not in ("interval", "point"):
        raise FormatError(f"environment: unknown mode {mode!r}")
    try:
        horizon = bound(data.get("horizon", "inf"))
    except TimeError as exc:
        raise FormatError(f"environment: {exc}") from None
    dec = execution_from_json if mode == "interval" else point_execution_from_json
    paths = {v: dec(r) for v, r in (data.get("paths") or {}).items()}
    return mode, horizon, paths


def environment_to_json(mode: str, horizon, paths: dict) -> dict:
    enc = execution_to_json if mode == "interval" else point_execution_to_json
    return {"mode": mode, "horizon": fmt_rat(horizon), "paths": {v: enc(r) for v, r in paths.items()}}


def flow_from_json(data: dict) -> Flow:
    try:
        return Flow.from_json(data)
    except (TimeError, KeyError) as exc:
        raise FormatError(f"flow: {exc}") from None

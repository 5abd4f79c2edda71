"""Branching timed hyperproperties over interval-based timed automata.

The package evaluates HCMTL* formulas on concrete executions, encodes
automata and formulas in MSO(<,+1), and verifies sentences over grid
bounded sets of executions.
"""
from .automaton import (
    AutomatonError,
    DecodeError,
    Edge,
    Execution,
    TimedAutomaton,
    decode_flow,
    encode_flow,
    prefix,
    validate_execution,
)
from .engine import GridBudget, Verdict, cross_check_mso, enumerate_runs, verify, verify_point
from .flow import Flow
from .formula import FormulaError, negate, parse, point_to_interval, to_text
from .pointwise import PointAutomaton, PointEdge, PointExecution, build_interval_automaton, chi, chi_inverse
from .semantics import critical_points, sat_interval, sat_point
from .timecore import Interval, parse_constraint

__version__ = "0.1.0"

__all__ = [
    "AutomatonError", "DecodeError", "Edge", "Execution", "Flow", "FormulaError", "GridBudget", "Interval",
    "PointAutomaton", "PointEdge", "PointExecution", "TimedAutomaton", "Verdict", "build_interval_automaton",
    "chi", "chi_inverse", "critical_points", "cross_check_mso", "decode_flow", "encode_flow", "enumerate_runs",
    "negate", "parse", "parse_constraint", "point_to_interval", "prefix", "sat_interval", "sat_point", "to_text",
    "validate_execution", "verify", "verify_point",
]

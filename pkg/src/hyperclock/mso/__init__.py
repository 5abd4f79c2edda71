"""MSO(<,+1) over flows: syntax, evaluation, and encodings of automata and formulas."""
from .emit import RunWitnesses, automaton_formula, env_to_flow, scaling_manifest, translate
from .evaluate import BruteForceWitnesses, Evaluator, WitnessSource, available_backends, default_backend, eval_mso
from .syntax import Mso, MsoError, parse, serialize

__all__ = [
    "BruteForceWitnesses", "Evaluator", "Mso", "MsoError", "RunWitnesses", "WitnessSource", "automaton_formula",
    "available_backends", "default_backend", "env_to_flow", "eval_mso", "parse", "scaling_manifest", "serialize",
    "translate",
]

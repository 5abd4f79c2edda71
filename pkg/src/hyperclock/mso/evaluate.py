"""Exact evaluation of MSO(<,+1) formulas over finitely variable flows on ``[0,N)``.

First-order quantifiers are decided by trying finitely many candidate
values: grid points, integer shifts of the values of the variables in
scope, and one point inside every gap between them.  Within a gap no atom
can change truth, so the candidates represent the whole domain.  Second
order quantifiers range over an explicit finite witness set supplied by
the caller (see :class:`WitnessSource`), which makes them grid bounded.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from ..flow import Flow, elementary_pieces
from ..timecore import INF, rat
from . import _kernel_py
from .syntax import ExistsFO, ExistsSO, Less, Mso, MsoError, Not, Or, PlusOne, Pred, conjuncts, fo_depth, free_fo, free_so

try:  # pragma: no cover - depends on the build
    from . import _kernel_c
except ImportError:  # pragma: no cover
    _kernel_c = None

LESS, PLUS1, PRED, OR, NOT, EXISTS, SO = range(7)
MAX_NATIVE_BITS = 62
MAX_POSITIONS = 10_000_000


def available_backends() -> list:
    return ["c", "py"] if _kernel_c is not None else ["py"]


def default_backend() -> str:
    return available_backends()[0]


class WitnessSource:
    """Supplies the finite set of interpretations a block of second-order variables ranges over."""

    def witnesses(self, preds: tuple) -> list:
        """Flows over (a subset of) ``preds``; absent predicates are empty."""
        raise NotImplementedError


class NoWitnesses(WitnessSource):
    def witnesses(self, preds):
        raise MsoError(f"second-order quantifier over {list(preds)} needs a witness source")


class BruteForceWitnesses(WitnessSource):
    """Every labelling of the grid pieces of ``[0,N)`` with at most ``max_changes`` label changes."""

    def __init__(self, horizon, granularity: int = 1, max_changes: Optional[int] = None):
        self.horizon = rat(horizon)
        self.granularity = granularity
        self.max_changes = max_changes

    def witnesses(self, preds):
        import itertools

        pts = [Fraction(i, self.granularity) for i in range(int(self.horizon * self.granularity) + 1)]
        pieces = elementary_pieces(pts, self.horizon)
        labels = [frozenset(c) for r in range(len(preds) + 1) for c in itertools.combinations(sorted(preds), r)]
        out = []

        def go(k, acc, changes):
            if k == len(pieces):
                out.append(Flow(self.horizon, tuple(zip(pieces, acc))))
                return
            for lab in labels:
                ch = changes + (1 if acc and acc[-1] != lab else 0)
                if self.max_changes is not None and ch > self.max_changes:
                    continue
                go(k + 1, acc + [lab], ch)

        go(0, [], 0)
        return out


@dataclass
class Program:
    op: list = field(default_factory=list)
    a: list = field(default_factory=list)
    b: list = field(default_factory=list)
    kids: list = field(default_factory=list)
    lows: list = field(default_factory=list)
    highs: list = field(default_factory=list)
    fn: list = field(default_factory=list)
    fslots: list = field(default_factory=list)
    desc: list = field(default_factory=list)
    memo_fo: list = field(default_factory=list)
    memo_so: list = field(default_factory=list)
    nslots: int = 0
    nblocks: int = 0
    block_bits: list = field(default_factory=list)
    block_preds: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)  # per block: list of raw Flow, later mask lists
    bits: dict = field(default_factory=dict)

    def add(self, op, a=0, b=0, kids=()):
        self.op.append(op)
        self.a.append(a)
        self.b.append(b)
        self.kids.append(tuple(kids))
        for lst in (self.lows, self.highs, self.fn, self.fslots, self.memo_fo, self.memo_so):
            lst.append(())
        self.desc.append(False)
        return len(self.op) - 1

    def bit(self, name: str) -> int:
        if name not in self.bits:
            self.bits[name] = len(self.bits)
        return self.bits[name]


class _Compiler:
    def __init__(self, source: WitnessSource):
        self.prog = Program()
        self.source = source
        self.flow_slots: dict = {}

    def slot(self):
        self.prog.nslots += 1
        return self.prog.nslots - 1

    def compile(self, phi: Mso, scope: dict, so_scope: dict) -> int:
        p = self.prog
        if isinstance(phi, Less):
            return p.add(LESS, self.var(phi.x, scope), self.var(phi.y, scope))
        if isinstance(phi, PlusOne):
            return p.add(PLUS1, self.var(phi.x, scope), self.var(phi.y, scope))
        if isinstance(phi, Pred):
            name = so_scope.get(phi.name, phi.name)
            return p.add(PRED, p.bit(name), self.var(phi.var, scope))
        if isinstance(phi, Or):
            kids = [self.compile(c, scope, so_scope) for c in phi.args]
            return p.add(OR, kids=kids)
        if isinstance(phi, Not):
            return p.add(NOT, self.compile(phi.arg, scope, so_scope))
        if isinstance(phi, ExistsFO):
            s = self.slot()
            inner = dict(scope)
            inner[phi.var] = s
            child = self.compile(phi.body, inner, so_scope)
            n = p.add(EXISTS, s, child)
            body_free = free_fo(phi.body) - {phi.var}
            p.fslots[n] = tuple(sorted({scope[v] for v in body_free}))
            p.memo_fo[n] = p.fslots[n]
            lows, highs, fn = [], [], []
            for c in conjuncts(phi.body):
                self._bound(c, phi.var, scope, lows, highs, fn)
            p.lows[n], p.highs[n], p.fn[n] = tuple(lows), tuple(highs), tuple(fn[:1])
            p.desc[n] = bool(highs) and not lows
            p.memo_so[n] = self._so_deps(phi, so_scope)
            return n
        if isinstance(phi, ExistsSO):
            preds = []
            body = phi
            while isinstance(body, ExistsSO):
                preds.append(body.pred)
                body = body.body
            blk = p.nblocks
            p.nblocks += 1
            inner = dict(so_scope)
            renamed = []
            for q in preds:
                fresh = f"{q}#{blk}"
                inner[q] = fresh
                renamed.append(fresh)
            p.block_preds.append((tuple(preds), tuple(renamed)))
            p.witnesses.append(list(self.source.witnesses(tuple(preds))))
            bits = 0
            for r in renamed:
                bits |= 1 << p.bit(r)
            p.block_bits.append(bits)
            child = self.compile(body, scope, inner)
            n = p.add(SO, blk, child)
            p.memo_fo[n] = tuple(sorted({scope[v] for v in free_fo(phi)}))
            p.memo_so[n] = self._so_deps(phi, so_scope)
            return n
        raise MsoError(f"not an MSO formula: {phi!r}")

    def var(self, name, scope):
        if name not in scope:
            raise MsoError(f"first-order variable {name!r} is not bound")
        return scope[name]

    def _so_deps(self, phi, so_scope):
        deps = set()
        for q in free_so(phi):
            if q in so_scope:
                deps.add(int(so_scope[q].rsplit("#", 1)[1]))
        return tuple(sorted(deps))

    def _bound(self, c, var, scope, lows, highs, fn):
        def other(name):
            return scope[name] if name != var and name in scope else None

        if isinstance(c, PlusOne):
            if c.y == var and other(c.x) is not None:
                fn.append((other(c.x), 1))
            elif c.x == var and other(c.y) is not None:
                fn.append((other(c.y), -1))
        elif isinstance(c, Less):
            if c.y == var and other(c.x) is not None:
                lows.append((other(c.x), 1))
            elif c.x == var and other(c.y) is not None:
                highs.append((other(c.y), 1))
        elif isinstance(c, Not) and isinstance(c.arg, Less):
            a = c.arg
            if a.x == var and other(a.y) is not None:  # not (var < s): var >= s
                lows.append((other(a.y), 0))
            elif a.y == var and other(a.x) is not None:  # not (s < var): var <= s
                highs.append((other(a.x), 0))
        elif isinstance(c, Not) and isinstance(c.arg, Or) and len(c.arg.args) == 2:
            l1, l2 = c.arg.args
            if isinstance(l1, Less) and isinstance(l2, Less) and (l1.x, l1.y) == (l2.y, l2.x):
                s = l1.y if l1.x == var else l1.x if l1.y == var else None
                if s is not None and other(s) is not None:
                    fn.append((other(s), 0))


@dataclass
class EvalStats:
    backend: str
    unit: int
    cell: int
    steps: int
    witnesses: int


class Evaluator:
    """Compiled formula bound to one flow; reusable for many first-order assignments."""

    def __init__(self, phi: Mso, flow: Flow, free: Iterable[str] = (), source: Optional[WitnessSource] = None,
                 backend: Optional[str] = None, extra_points: Iterable = ()):
        if flow.horizon is INF:
            raise MsoError("MSO evaluation needs a finite horizon")
        self.horizon = rat(flow.horizon)
        self.free = list(free)
        missing = free_fo(phi) - set(self.free)
        if missing:
            raise MsoError(f"free first-order variables {sorted(missing)} have no value")
        comp = _Compiler(source or NoWitnesses())
        scope = {}
        for v in self.free:
            scope[v] = comp.slot()
        self.scope = scope
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
        self.root = comp.compile(phi, scope, {})
        prog = comp.prog
        for name in flow.predicates():
            prog.bit(name)
        denoms = {self.horizon.denominator}
        for t in flow.breakpoints():
            denoms.add(t.denominator)
        for t in extra_points:
            denoms.add(rat(t).denominator)
        for ws in prog.witnesses:
            for w in ws:
                for t in w.breakpoints():
                    denoms.add(t.denominator)
        per_unit = 1
        for d in denoms:
            per_unit = per_unit * d // math.gcd(per_unit, d)
        depth = fo_depth(phi)
        self.cell = 2 ** max(depth, 1)
        self.unit = per_unit * self.cell
        self.limit = int(self.horizon * self.unit)
        npos = 2 * int(self.horizon * per_unit) + 1
        if npos * self.cell > MAX_POSITIONS:
            raise MsoError(f"evaluation grid of {npos * self.cell} positions is too fine; use coarser time values")
        self.masks = self._masks(flow, prog.bits, per_unit, npos)
        wit_masks = []
        for blk, ws in enumerate(prog.witnesses):
            names, renamed = prog.block_preds[blk]
            ren = dict(zip(names, renamed))
            sub = {ren[q]: prog.bits[ren[q]] for q in names}
            wit_masks.append([self._masks(w, sub, per_unit, npos, rename=ren) for w in ws])
        prog.witnesses = wit_masks
        self.prog = prog
        self.nwitness = sum(len(w) for w in wit_masks)
        self.backend = backend or default_backend()
        if self.backend == "c" and (_kernel_c is None or len(prog.bits) > MAX_NATIVE_BITS):
            self.backend = "py"
        mod = _kernel_c if self.backend == "c" else _kernel_py
        self.kernel = mod.Kernel(prog, self.masks, self.unit, self.cell, self.limit)

    @staticmethod
    def _masks(flow: Flow, bits: Mapping, per_unit: int, npos: int, rename=None) -> list:
        masks = [0] * npos
        for iv, labels in flow.segments:
            m = 0
            for q in labels:
                name = rename.get(q) if rename is not None else q
                if name in bits:
                    m |= 1 << bits[name]
            if not m:
                continue
            lo = int(iv.left * per_unit)
            hi = int(iv.right * per_unit) if iv.right is not INF else npos
            first = 2 * lo if iv.left_closed else 2 * lo + 1
            last = 2 * hi if iv.right_closed else 2 * hi - 1
            for pos in range(first, min(last, npos - 1) + 1):
                masks[pos] |= m
        return masks[: npos - 1]

    def ticks(self, t) -> int:
        q = rat(t) * self.unit
        if q.denominator != 1:
            raise MsoError(f"value {t} is not on the evaluation grid")
        return int(q)

    def __call__(self, **values) -> bool:
        vals = {}
        for v in self.free:
            t = rat(values[v])
            if not 0 <= t < self.horizon:
                raise MsoError(f"value of {v} must lie in [0,{self.horizon})")
            vals[self.scope[v]] = self.ticks(t)
        return self.kernel.run(self.root, vals)

    def stats(self) -> EvalStats:
        return EvalStats(self.backend, self.unit, self.cell, self.kernel.steps, self.nwitness)


def eval_mso(flow: Flow, interp: Mapping, phi: Mso, source: Optional[WitnessSource] = None,
             backend: Optional[str] = None) -> bool:
    """Truth of ``phi`` on ``flow`` under the first-order assignment ``interp``."""
    ev = Evaluator(phi, flow, list(interp), source, backend, extra_points=interp.values())
    return ev(**{k: v for k, v in interp.items()})

"""Finitely variable flows: maps from a time domain to sets of monadic predicates.

Predicates are plain strings following one naming convention::

    v:<state>   tminus:<edge>   tplus:<edge>   rminus:<clock>   rplus:<clock>   mark

Copies used for path environments carry an ``@<index>`` suffix (``v:s1@2``).
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .timecore import INF, Interval, TimeBound, TimeError, consecutive, contains, fmt_rat


def state_pred(v: str) -> str:
    return f"v:{v}"


def tminus(e: int) -> str:
    return f"tminus:{e}"


def tplus(e: int) -> str:
    return f"tplus:{e}"


def rminus(x: str) -> str:
    return f"rminus:{x}"


def rplus(x: str) -> str:
    return f"rplus:{x}"


MARK = "mark"


def indexed(pred: str, index: int) -> str:
    return f"{pred}@{index}"


def split_index(pred: str) -> tuple[str, Optional[int]]:
    base, sep, idx = pred.rpartition("@")
    if not sep:
        return pred, None
    return base, int(idx)


def pred_kind(pred: str) -> tuple[str, str]:
    """``("v", "s1")`` for ``"v:s1"``; ``("mark", "")`` for the event mark."""
    if pred == MARK:
        return "mark", ""
    kind, sep, arg = pred.partition(":")
    if not sep or kind not in ("v", "tminus", "tplus", "rminus", "rplus"):
        raise TimeError(f"unknown predicate name {pred!r}")
    return kind, arg


@dataclass(frozen=True)
class Flow:
    """Nonempty-labelled pieces, disjoint and sorted; everything else maps to the empty set."""

    horizon: TimeBound
    segments: tuple = field(default=())

    def __post_init__(self):
        pieces = [(iv, frozenset(labels)) for iv, labels in self.segments if labels]
        pieces.sort(key=lambda p: (p[0].left, not p[0].left_closed))
        for (a, _), (b, _) in zip(pieces, pieces[1:]):
            if a.right is INF or a.right > b.left or (
                a.right == b.left and a.right_closed and b.left_closed
            ):
                raise TimeError(f"flow pieces {a} and {b} overlap")
        if pieces and self.horizon is not INF:
            last = pieces[-1][0]
            if last.right is INF or last.right > self.horizon or (
                last.right == self.horizon and last.right_closed
            ):
                raise TimeError(f"flow piece {last} leaves the domain [0,{fmt_rat(self.horizon)})")
        object.__setattr__(self, "segments", tuple(_merge(pieces)))

    def at(self, t) -> frozenset:
        lefts = [iv.left for iv, _ in self.segments]
        i = bisect.bisect_right(lefts, t)
        for j in (i - 1, i - 2):
            if 0 <= j < len(self.segments) and contains(self.segments[j][0], t):
                return self.segments[j][1]
        return frozenset()

    def predicates(self) -> frozenset:
        out = set()
        for _, labels in self.segments:
            out |= labels
        return frozenset(out)

    def breakpoints(self) -> list[Fraction]:
        pts = set()
        for iv, _ in self.segments:
            pts.add(iv.left)
            if iv.right is not INF:
                pts.add(iv.right)
        return sorted(pts)

    def restrict(self, preds) -> "Flow":
        keep = frozenset(preds)
        return Flow(self.horizon, tuple((iv, labels & keep) for iv, labels in self.segments))

    def rename(self, mapping) -> "Flow":
        return Flow(
            self.horizon,
            tuple((iv, frozenset(mapping(p) for p in labels)) for iv, labels in self.segments),
        )

    def union(self, other: "Flow") -> "Flow":
        return union_flows([self, other], self.horizon)

    def to_json(self) -> dict:
        return {
            "horizon": fmt_rat(self.horizon),
            "segments": [
                {"interval": str(iv), "predicates": sorted(labels)} for iv, labels in self.segments
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Flow":
        from .timecore import bound

        return cls(
            bound(data.get("horizon", "inf")),
            tuple(
                (Interval.parse(s["interval"]), frozenset(s["predicates"]))
                for s in data.get("segments", [])
            ),
        )

    def __str__(self):
        body = ", ".join(f"{iv}: {{{', '.join(sorted(l))}}}" for iv, l in self.segments)
        return f"Flow(N={fmt_rat(self.horizon)}; {body})"


def _merge(pieces):
    out = []
    for iv, labels in pieces:
        if out and out[-1][1] == labels and consecutive(out[-1][0], iv):
            prev = out[-1][0]
            out[-1] = (Interval(prev.left, iv.right, prev.left_closed, iv.right_closed), labels)
        else:
            out.append((iv, labels))
    return out


def elementary_pieces(points: Iterable[Fraction], horizon: TimeBound) -> list[Interval]:
    """Partition ``[0, horizon)`` into the given points and the open gaps between them."""
    pts = sorted({p for p in points if p >= 0 and (horizon is INF or p < horizon)} | {Fraction(0)})
    out = []
    for a, b in zip(pts, pts[1:]):
        out.append(Interval.point(a))
        out.append(Interval(a, b, False, False))
    out.append(Interval.point(pts[-1]))
    if horizon is INF or pts[-1] < horizon:
        out.append(Interval(pts[-1], horizon, False, False))
    return out


def union_flows(flows: Iterable["Flow"], horizon: TimeBound) -> Flow:
    flows = list(flows)
    pts = set()
    for f in flows:
        pts.update(f.breakpoints())
    pieces = []
    for iv in elementary_pieces(pts, horizon):
        probe = iv.left if iv.singular else _inside(iv)
        labels = frozenset().union(*(f.at(probe) for f in flows)) if flows else frozenset()
        pieces.append((iv, labels))
    return Flow(horizon, tuple(pieces))


def _inside(iv: Interval) -> Fraction:
    if iv.right is INF:
        return iv.left + 1
    return (iv.left + iv.right) / 2

"""Value data of reduced curve germs: semigroups of values, Hilbert
tables, dual heights, delta invariants and the two-branch Alexander
correction term."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    Inconsistent,
    NotStable,
    ParseError,
    PreconditionViolated,
    RankMismatch,
)
from .lattice import (
    HeightTable,
    Point,
    Rectangle,
    WeightTable,
    p_add,
    p_leq,
    p_min,
    p_sub,
    symmetrize,
    unit,
    weight_from_pair,
)


def _points(pts, what: str) -> frozenset:
    out = set()
    for p in pts:
        out.add(tuple(int(c) for c in p))
    ranks = {len(p) for p in out}
    if len(ranks) > 1:
        raise RankMismatch(f"mixed ranks {sorted(ranks)} in {what}")
    return frozenset(out)


@dataclass(frozen=True)
class ValueSemigroup:
    """Semigroup points inside ``R(0, c)``; everything above ``c`` is
    implicit, and points with a coordinate past ``c`` are recovered by
    clamping to the box."""

    rank: int
    c: Point
    elements: frozenset

    @classmethod
    def of(cls, rank: int, conductor, elements) -> "ValueSemigroup":
        c = tuple(int(x) for x in conductor)
        if len(c) != rank or rank < 1:
            raise RankMismatch(f"conductor {c} does not have rank {rank}")
        if any(x < 0 for x in c):
            raise Inconsistent(f"negative conductor {c}")
        elems = _points(elements, "semigroup")
        box = Rectangle.based(c)
        for e in elems:
            if e not in box:
                raise Inconsistent(f"element {e} outside R(0, {c})")
        if tuple(0 for _ in c) not in elems:
            raise Inconsistent("0 is not an element")
        for a in elems:
            for b in elems:
                if p_min(a, b) not in elems:
                    raise Inconsistent(
                        f"not min-closed: {a}, {b} present, {p_min(a, b)} missing"
                    )
        return cls(rank, c, elems)

    @classmethod
    def from_generators(cls, gens) -> "ValueSemigroup":
        """Rank-1 numerical semigroup expanded to its conductor."""
        gens = sorted({int(g) for g in gens if int(g) != 0})
        if not gens or gens[0] < 0:
            raise NotStable(f"generators {gens} span no numerical semigroup")
        if math.gcd(*gens) != 1:
            raise NotStable(f"gcd({', '.join(map(str, gens))}) > 1, no conductor")
        bound = gens[0] * gens[-1] + 1
        reach = 1
        for _ in range(bound // gens[0] + 1):
            prev = reach
            for g in gens:
                reach |= (reach << g) & ((1 << (bound + 1)) - 1)
            if reach == prev:
                break
        gaps = [i for i in range(bound + 1) if not (reach >> i) & 1]
        c = gaps[-1] + 1 if gaps else 0
        return cls(1, (c,), frozenset((s,) for s in range(c + 1) if (reach >> s) & 1))

    def __contains__(self, p) -> bool:
        p = tuple(p)
        if len(p) != self.rank or any(x < 0 for x in p):
            return False
        return p_min(p, self.c) in self.elements

    def _jump(self, l: Point, v: int) -> bool:
        return any(e[v] == l[v] and p_leq(l, e) for e in self.elements)


@dataclass(frozen=True)
class SemigroupModule:
    """Value tuples of the dual module inside ``R(-c, 0)``."""

    rank: int
    c: Point
    elements: frozenset

    @classmethod
    def of(cls, rank: int, conductor, elements) -> "SemigroupModule":
        c = tuple(int(x) for x in conductor)
        if len(c) != rank or rank < 1:
            raise RankMismatch(f"conductor {c} does not have rank {rank}")
        elems = _points(elements, "semigroup module")
        box = Rectangle(tuple(-x for x in c), tuple(0 for _ in c))
        for e in elems:
            if e not in box:
                raise Inconsistent(f"element {e} outside R({box.lo}, 0)")
        return cls(rank, c, elems)

    def closed_under(self, s: ValueSemigroup) -> bool:
        if s.rank != self.rank:
            raise RankMismatch(f"rank {s.rank} semigroup on rank {self.rank} module")
        for m in self.elements:
            for e in s.elements:
                q = p_add(m, e)
                if all(x <= 0 for x in q) and q not in self.elements:
                    return False
        return True


@dataclass(frozen=True)
class AlexanderSupport:
    """Per-branch semigroup supports and the pairwise correction supports."""

    branch: tuple
    pairs: tuple

    @classmethod
    def of(cls, branch_supports, pair_supports) -> "AlexanderSupport":
        branch = tuple(frozenset(int(s) for s in b) for b in branch_supports)
        for b in branch:
            if any(s < 0 for s in b):
                raise Inconsistent(f"negative branch support entry in {sorted(b)}")
        pairs = []
        for (i, j), supp in sorted(dict(pair_supports).items()):
            if not (0 <= i < j < len(branch)):
                raise Inconsistent(f"pair ({i}, {j}) out of range")
            supp = _points(supp, f"pair support ({i}, {j})")
            if supp and len(next(iter(supp))) != 2:
                raise RankMismatch("pair supports must consist of integer pairs")
            if any(x < 0 for p in supp for x in p):
                raise Inconsistent(f"negative pair support entry for ({i}, {j})")
            pairs.append(((i, j), supp))
        return cls(branch, tuple(pairs))


def conductor(s: ValueSemigroup) -> Point:
    """Validated conductor: ``c`` itself lies in the semigroup and no
    immediate predecessor has its whole upper orthant inside."""
    if s.c not in s.elements:
        raise NotStable(f"{s.c} is not a semigroup point")
    for v in range(s.rank):
        if s.c[v] == 0:
            continue
        if p_sub(s.c, unit(s.rank, v)) in s.elements:
            raise NotStable(f"{p_sub(s.c, unit(s.rank, v))} already stable, {s.c} not minimal")
    return s.c


def hilbert_from_semigroup(s: ValueSemigroup) -> HeightTable:
    """Edge rule: h steps by one in direction v exactly when a semigroup
    point sits above the level with equal v-coordinate."""
    rect = Rectangle.based(s.c)
    vals: dict = {}
    for p in rect.points():
        if not any(p):
            vals[p] = 0
            continue
        v = next(i for i, x in enumerate(p) if x > 0)
        q = p_sub(p, unit(s.rank, v))
        vals[p] = vals[q] + s._jump(q, v)
    h = HeightTable(rect, vals, "increasing")
    for p in rect.points():
        for v in range(s.rank):
            q = p_add(p, unit(s.rank, v))
            if q in rect and h[q] - h[p] != s._jump(p, v):
                raise Inconsistent(
                    f"edge increments disagree across paths at {p} + e_{v}"
                )
    return h


def _curve_table(h: HeightTable, what: str) -> None:
    if any(h.rect.lo):
        raise PreconditionViolated(f"{what} must live on a based rectangle")
    if h[h.rect.lo] != 0:
        raise Inconsistent(f"{what} does not vanish at 0")
    for p in h.rect.points():
        for v in range(h.rect.rank):
            q = p_add(p, unit(h.rect.rank, v))
            if q in h.rect and h[q] - h[p] not in (0, 1):
                raise Inconsistent(f"{what} step at {p} + e_{v} is not 0 or 1")


def semigroup_from_hilbert(h: HeightTable) -> ValueSemigroup:
    """Jump set of h; steps past the box corner always jump, so boundary
    directions are unconstrained."""
    _curve_table(h, "Hilbert table")
    rect = h.rect
    c = rect.hi
    elems = set()
    for p in rect.points():
        ok = True
        for v in range(rect.rank):
            if p[v] == c[v]:
                continue
            if h[p_add(p, unit(rect.rank, v))] <= h[p]:
                ok = False
                break
        if ok:
            elems.add(p)
    return ValueSemigroup.of(rect.rank, c, elems)


def delta(s: ValueSemigroup) -> int:
    """Gap count |c| - h(c)."""
    h = hilbert_from_semigroup(s)
    return sum(s.c) - h[s.c]


def gorenstein_test(s: ValueSemigroup) -> bool:
    return sum(s.c) == 2 * delta(s)


def analytic_weight(h: HeightTable) -> WeightTable:
    """w = 2h - |l|; the dual height pairing gives the same table."""
    _curve_table(h, "Hilbert table")
    return WeightTable(h.rect, {p: 2 * h[p] - sum(p) for p in h.rect.points()})


def dual_height(h: HeightTable) -> HeightTable:
    """Codimensions of the dual filtration: delta + h - |l|, decreasing."""
    _curve_table(h, "Hilbert table")
    d = sum(h.rect.hi) - h[h.rect.hi]
    return HeightTable(
        h.rect, {p: d + h[p] - sum(p) for p in h.rect.points()}, "decreasing"
    )


def symmetric_conductor_weight(h: HeightTable) -> WeightTable:
    """Weight of the conductor ideal's symmetric realization,
    h + h(c - .) - h(c); differs from the analytic table unless the
    semigroup is symmetric."""
    _curve_table(h, "Hilbert table")
    return weight_from_pair(h, symmetrize(h, h.rect.hi))


def semigroup_module_from_heights(hc: HeightTable) -> SemigroupModule:
    """Points -l where hc drops strictly into l in every direction;
    below 0 the dual height keeps climbing, so zero coordinates are
    unconstrained."""
    if any(hc.rect.lo):
        raise PreconditionViolated("dual height must live on a based rectangle")
    rect = hc.rect
    for p in rect.points():
        for v in range(rect.rank):
            q = p_add(p, unit(rect.rank, v))
            if q in rect and hc[q] - hc[p] not in (0, -1):
                raise Inconsistent(f"dual height step at {p} + e_{v} is not 0 or -1")
    elems = set()
    for u in rect.points():
        ok = True
        for v in range(rect.rank):
            if u[v] == 0:
                continue
            if hc[p_sub(u, unit(rect.rank, v))] <= hc[u]:
                ok = False
                break
        if ok:
            elems.add(tuple(-x for x in u))
    return SemigroupModule.of(rect.rank, rect.hi, elems)


def local_minima(s: ValueSemigroup, m: SemigroupModule | None = None) -> set:
    """Semigroup points whose negative carries a module value; these are
    the one-point components of their sublevel set."""
    if m is None:
        if not gorenstein_test(s):
            raise PreconditionViolated(
                "module data is required for a non-Gorenstein semigroup"
            )
        m = SemigroupModule.of(s.rank, s.c, {p_sub(e, s.c) for e in s.elements})
    if m.rank != s.rank:
        raise RankMismatch(f"semigroup rank {s.rank}, module rank {m.rank}")
    return {e for e in s.elements if tuple(-x for x in e) in m.elements}


def _row(b, what: str) -> list:
    if isinstance(b, HeightTable):
        if b.rect.rank != 1:
            raise RankMismatch(f"{what} must be one-variable")
        return [b[(i,)] for i in range(b.rect.lo[0], b.rect.hi[0] + 1)]
    return [int(x) for x in b]


def hilbert_two_branch(b1, b2, supp_delta) -> HeightTable:
    """h(l) = h1(l1) + h2(l2) - #{p in supp : l >= p + (1, 1)}."""
    r1 = _row(b1, "first branch")
    r2 = _row(b2, "second branch")
    supp = _points(supp_delta, "supp Delta") if supp_delta else frozenset()
    if supp and len(next(iter(supp))) != 2:
        raise RankMismatch("supp Delta must consist of integer pairs")
    rect = Rectangle.based((len(r1) - 1, len(r2) - 1))
    vals = {
        (a, b): r1[a]
        + r2[b]
        - sum(1 for p in supp if p[0] + 1 <= a and p[1] + 1 <= b)
        for a, b in rect.points()
    }
    return HeightTable(rect, vals, "increasing")


def _branch_support(row: list) -> frozenset:
    return frozenset(i for i in range(len(row) - 1) if row[i + 1] > row[i])


def curve_semigroup_from_json(data: dict) -> ValueSemigroup:
    kind = data.get("kind")
    if kind == "semigroup":
        try:
            return ValueSemigroup.of(
                int(data["rank"]), data["conductor"], data["elements"]
            )
        except KeyError as exc:
            raise ParseError(f"semigroup input misses {exc}") from None
    if kind == "branch_gens":
        try:
            return ValueSemigroup.from_generators(data["gens"])
        except KeyError as exc:
            raise ParseError(f"branch_gens input misses {exc}") from None
    if kind == "two_branch":
        return semigroup_from_hilbert(curve_hilbert_from_json(data))
    raise ParseError(f"unknown curve input kind {kind!r}")


def curve_hilbert_from_json(data: dict) -> HeightTable:
    kind = data.get("kind")
    if kind in ("semigroup", "branch_gens"):
        return hilbert_from_semigroup(curve_semigroup_from_json(data))
    if kind == "two_branch":
        try:
            h1, h2 = data["h1"], data["h2"]
            supp = data["suppDelta"]
        except KeyError as exc:
            raise ParseError(f"two_branch input misses {exc}") from None
        AlexanderSupport.of(
            (_branch_support(_row(h1, "h1")), _branch_support(_row(h2, "h2"))),
            {(0, 1): supp},
        )
        return hilbert_two_branch(h1, h2, supp)
    raise ParseError(f"unknown curve input kind {kind!r}")

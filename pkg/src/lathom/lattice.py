"""Integer lattice geometry: rectangles, cubes, height and weight tables.

Lattice points are plain ``tuple[int, ...]``; all tables are dense dicts
keyed by point over a bounding :class:`Rectangle`.  Serialisation uses a
row-major value list ordered lexicographically by coordinates.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Iterator, Mapping

from .errors import (
    CrossCheckError,
    DomainMismatch,
    Inconsistent,
    PreconditionViolated,
    RankMismatch,
    ShapeMismatch,
    VertexOutOfRectangle,
)

Point = tuple[int, ...]


def p_add(a: Point, b: Point) -> Point:
    """Componentwise sum.

    >>> p_add((1, 2), (0, 3))
    (1, 5)
    """
    return tuple(x + y for x, y in zip(a, b, strict=True))


def p_sub(a: Point, b: Point) -> Point:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def p_min(a: Point, b: Point) -> Point:
    return tuple(min(x, y) for x, y in zip(a, b, strict=True))


def p_max(a: Point, b: Point) -> Point:
    return tuple(max(x, y) for x, y in zip(a, b, strict=True))


def p_leq(a: Point, b: Point) -> bool:
    """Componentwise order.  Not total: ``p_leq(a,b)`` and ``p_leq(b,a)``
    may both be false.

    >>> p_leq((1, 0), (1, 2)), p_leq((2, 0), (1, 2))
    (True, False)
    """
    return all(x <= y for x, y in zip(a, b, strict=True))


def unit(rank: int, v: int) -> Point:
    return tuple(1 if i == v else 0 for i in range(rank))


class Rectangle:
    """Axis-parallel box ``[lo, hi]`` of lattice points."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Point, hi: Point):
        lo, hi = tuple(lo), tuple(hi)
        if len(lo) != len(hi):
            raise RankMismatch(f"corner ranks differ: {len(lo)} vs {len(hi)}")
        if not p_leq(lo, hi):
            raise ShapeMismatch(f"empty rectangle: lo={lo} hi={hi}")
        self.lo = lo
        self.hi = hi

    @classmethod
    def based(cls, hi: Point) -> "Rectangle":
        return cls(tuple(0 for _ in hi), hi)

    @property
    def rank(self) -> int:
        return len(self.lo)

    def __contains__(self, p: Point) -> bool:
        return len(p) == self.rank and p_leq(self.lo, p) and p_leq(p, self.hi)

    def __len__(self) -> int:
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= b - a + 1
        return n

    def points(self) -> Iterator[Point]:
        """Lexicographic enumeration; fixes the serialisation order."""
        return itertools.product(
            *(range(a, b + 1) for a, b in zip(self.lo, self.hi))
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Rectangle)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"Rectangle({self.lo}, {self.hi})"


class Cube:
    """Unit cube spanned at ``base`` along the axes in ``dirs``."""

    __slots__ = ("base", "dirs")

    def __init__(self, base: Point, dirs: tuple[int, ...]):
        self.base = tuple(base)
        self.dirs = tuple(sorted(dirs))
        if len(set(self.dirs)) != len(self.dirs):
            raise ShapeMismatch(f"repeated direction in {dirs}")

    @property
    def dim(self) -> int:
        return len(self.dirs)

    def vertices(self) -> Iterator[Point]:
        base = self.base
        for eps in itertools.product((0, 1), repeat=len(self.dirs)):
            p = list(base)
            for e, v in zip(eps, self.dirs):
                p[v] += e
            yield tuple(p)

    def key(self) -> tuple:
        return (self.base, self.dirs)

    def faces(self) -> Iterator[tuple[int, "Cube"]]:
        """Boundary faces with their incidence signs."""
        for i, v in enumerate(self.dirs):
            rest = self.dirs[:i] + self.dirs[i + 1 :]
            sign = -1 if i % 2 else 1
            yield -sign, Cube(self.base, rest)
            shifted = list(self.base)
            shifted[v] += 1
            yield sign, Cube(tuple(shifted), rest)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Cube)
            and self.base == other.base
            and self.dirs == other.dirs
        )

    def __hash__(self) -> int:
        return hash((self.base, self.dirs))

    def __repr__(self) -> str:
        return f"Cube({self.base}, {self.dirs})"


class _Table:
    """Shared storage for dense integer tables over a rectangle."""

    __slots__ = ("rect", "values")

    def __init__(self, rect: Rectangle, values: Mapping[Point, int]):
        self.rect = rect
        self.values = dict(values)
        if len(self.values) != len(rect):
            missing = next(p for p in rect.points() if p not in self.values)
            raise DomainMismatch(f"table misses point {missing} of {rect}")

    def __getitem__(self, p: Point) -> int:
        try:
            return self.values[tuple(p)]
        except KeyError:
            raise VertexOutOfRectangle(f"{tuple(p)} outside {self.rect}") from None

    @classmethod
    def tabulate(cls, rect: Rectangle, fn: Callable[[Point], int], **kw):
        return cls(rect, {p: fn(p) for p in rect.points()}, **kw)

    def to_json(self) -> dict:
        return {
            "lo": list(self.rect.lo),
            "hi": list(self.rect.hi),
            "values": [self.values[p] for p in self.rect.points()],
        }

    @staticmethod
    def _values_from_json(data: dict) -> tuple[Rectangle, dict]:
        rect = Rectangle(tuple(data["lo"]), tuple(data["hi"]))
        vals = list(data["values"])
        if len(vals) != len(rect):
            raise Inconsistent(
                f"value list has {len(vals)} entries, rectangle has {len(rect)}"
            )
        return rect, dict(zip(rect.points(), vals))


class HeightTable(_Table):
    """Monotone table of filtration codimensions."""

    __slots__ = ("monotone",)

    def __init__(self, rect, values, monotone: str = "increasing"):
        if monotone not in ("increasing", "decreasing"):
            raise ValueError(f"bad monotone flag {monotone!r}")
        super().__init__(rect, values)
        self.monotone = monotone

    def check_monotone(self) -> bool:
        sgn = 1 if self.monotone == "increasing" else -1
        for p in self.rect.points():
            for v in range(self.rect.rank):
                q = p_add(p, unit(self.rect.rank, v))
                if q in self.rect and sgn * (self[q] - self[p]) < 0:
                    return False
        return True

    @classmethod
    def from_json(cls, data: dict, monotone: str | None = None) -> "HeightTable":
        rect, values = cls._values_from_json(data)
        if monotone is None:
            for guess in ("increasing", "decreasing"):
                t = cls(rect, values, guess)
                if t.check_monotone():
                    return t
            raise Inconsistent("height table is not monotone in either sense")
        t = cls(rect, values, monotone)
        if not t.check_monotone():
            raise Inconsistent(f"height table is not {monotone}")
        return t


class WeightTable(_Table):
    """Vertex weights; cube weights are vertex maxima."""

    __slots__ = ()

    def cube_weight(self, c: Cube) -> int:
        return max(self[p] for p in c.vertices())

    def min_weight(self) -> int:
        return min(self.values.values())

    def max_weight(self) -> int:
        return max(self.values.values())

    @classmethod
    def from_json(cls, data: dict) -> "WeightTable":
        rect, values = cls._values_from_json(data)
        return cls(rect, values)


def cube_weight(wt: WeightTable, c: Cube) -> int:
    """Maximum of the vertex weights; the cube must sit in ``wt.rect``."""
    for p in c.vertices():
        if p not in wt.rect:
            raise VertexOutOfRectangle(f"vertex {p} of {c} outside {wt.rect}")
    return wt.cube_weight(c)


def check_matroid(table) -> bool:
    """Submodularity on every unit square.

    ``table`` is any rectangle-backed integer table.  The two-step
    inequality on arbitrary pairs follows from the unit-square case by
    induction, so only adjacent squares are examined.

    >>> r = Rectangle.based((1, 1))
    >>> check_matroid(WeightTable(r, {(0, 0): 0, (1, 0): 0, (0, 1): 0, (1, 1): 1}))
    False
    """
    rect = table.rect
    for p in rect.points():
        for v in range(rect.rank):
            pv = p_add(p, unit(rect.rank, v))
            if pv not in rect:
                continue
            for w in range(v + 1, rect.rank):
                pw = p_add(p, unit(rect.rank, w))
                if pw not in rect:
                    continue
                pvw = p_add(pv, unit(rect.rank, w))
                if table[pv] + table[pw] < table[p] + table[pvw]:
                    return False
    return True


def check_cdp(h: HeightTable, hc: HeightTable) -> bool:
    """No common jump: along each edge at most one of the two tables moves."""
    if h.rect != hc.rect:
        raise ShapeMismatch(f"{h.rect} vs {hc.rect}")
    rect = h.rect
    for p in rect.points():
        for v in range(rect.rank):
            q = p_add(p, unit(rect.rank, v))
            if q not in rect:
                continue
            if h[q] != h[p] and hc[q] != hc[p]:
                return False
    return True


def weight_from_pair(h: HeightTable, hc: HeightTable) -> WeightTable:
    """``w0 = h + hc - hc(lo)`` on the shared rectangle."""
    if h.rect != hc.rect:
        raise ShapeMismatch(f"{h.rect} vs {hc.rect}")
    base = hc[h.rect.lo]
    return WeightTable(
        h.rect, {p: h[p] + hc[p] - base for p in h.rect.points()}
    )


def symmetrize(h: HeightTable, d: Point) -> HeightTable:
    """Reflect through ``d``: result(l) = h(d - l); flips monotonicity."""
    rect = Rectangle.based(d)
    if h.rect != rect:
        raise DomainMismatch(f"table on {h.rect}, reflection needs {rect}")
    flipped = "decreasing" if h.monotone == "increasing" else "increasing"
    return HeightTable(rect, {p: h[p_sub(d, p)] for p in rect.points()}, flipped)


class LatticePath:
    """Sequence of lattice points with unit steps."""

    __slots__ = ("points", "increasing")

    def __init__(self, points: Iterable[Point]):
        pts = [tuple(p) for p in points]
        if not pts:
            raise ShapeMismatch("empty path")
        rank = len(pts[0])
        inc = True
        for a, b in zip(pts, pts[1:]):
            if len(b) != rank:
                raise RankMismatch("mixed ranks along path")
            step = p_sub(b, a)
            if sum(abs(s) for s in step) != 1:
                raise ShapeMismatch(f"non-unit step {a} -> {b}")
            if min(step) < 0:
                inc = False
        self.points = tuple(pts)
        self.increasing = inc

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticePath) and self.points == other.points

    def __repr__(self) -> str:
        return f"LatticePath({list(self.points)})"


def path_signs(wt: WeightTable, path: LatticePath) -> list[int]:
    """Sign of the weight change along each edge (-1, 0 or 1)."""
    out = []
    for a, b in zip(path.points, path.points[1:]):
        d = wt[b] - wt[a]
        out.append(0 if d == 0 else (1 if d > 0 else -1))
    return out


def positive_variation(wt: WeightTable, path: LatticePath) -> int:
    return sum(max(wt[b] - wt[a], 0) for a, b in zip(path.points, path.points[1:]))


def _bounding_rect(points: Iterable[Point]) -> Rectangle:
    pts = list(points)
    lo, hi = pts[0], pts[0]
    for p in pts[1:]:
        lo, hi = p_min(lo, p), p_max(hi, p)
    return Rectangle(lo, hi)


def order_path(wt: WeightTable, path: LatticePath) -> LatticePath:
    """Reorder an increasing path so its edge signs run +, 0, -.

    The result keeps the endpoints, maximises the total positive variation
    and minimises the negative one among all increasing paths between them.
    Requires ``wt`` to be submodular on the bounding box of the endpoints.
    """
    if not path.increasing:
        raise PreconditionViolated("path is not increasing")
    x0, xt = path.points[0], path.points[-1]
    box = _bounding_rect([x0, xt])
    for p in (x0, xt):
        if p not in wt.rect:
            raise VertexOutOfRectangle(f"{p} outside {wt.rect}")
    sub = WeightTable(box, {p: wt[p] for p in box.points()})
    if not check_matroid(sub):
        raise PreconditionViolated("weight table not submodular on the box")

    rank = box.rank

    def sign(p: Point, v: int) -> int:
        q = p_add(p, unit(rank, v))
        return sub[q] - sub[p]

    # All-positive reachability from x0, with BFS parents for reconstruction.
    up_parent: dict[Point, tuple[Point, int] | None] = {x0: None}
    frontier = [x0]
    while frontier:
        nxt = []
        for p in frontier:
            for v in range(rank):
                if p[v] >= xt[v]:
                    continue
                q = p_add(p, unit(rank, v))
                if q in up_parent or sign(p, v) <= 0:
                    continue
                up_parent[q] = (p, v)
                nxt.append(q)
        frontier = sorted(nxt)

    # All-negative co-reachability into xt, processed by descending size.
    down_next: dict[Point, tuple[Point, int] | None] = {xt: None}
    order = sorted(box.points(), key=lambda p: (-sum(p), p))
    for p in order:
        if p in down_next:
            continue
        for v in range(rank):
            if p[v] >= xt[v]:
                continue
            q = p_add(p, unit(rank, v))
            if q in down_next and sign(p, v) < 0:
                down_next[p] = (q, v)
                break

    # Pick the highest peak whose neutral plateau meets the descent set.
    # Peaks are scanned by descending weight (lex to break ties), so the
    # first completable one realises the maximal positive variation.
    found: tuple[Point, Point, dict] | None = None
    for peak in sorted(up_parent, key=lambda p: (-sub[p], p)):
        flat_parent: dict[Point, tuple[Point, int] | None] = {peak: None}
        frontier = [peak]
        hit = peak if peak in down_next else None
        while frontier and hit is None:
            nxt = []
            for p in frontier:
                for v in range(rank):
                    if p[v] >= xt[v]:
                        continue
                    q = p_add(p, unit(rank, v))
                    if q in flat_parent or sign(p, v) != 0:
                        continue
                    flat_parent[q] = (p, v)
                    if q in down_next:
                        hit = q
                        break
                    nxt.append(q)
                if hit is not None:
                    break
            frontier = sorted(nxt)
        if hit is not None:
            found = (peak, hit, flat_parent)
            break
    if found is None:
        raise CrossCheckError(
            "no sign-ordered path exists; submodularity should forbid this"
        )
    peak, plateau_end, flat_parent = found

    def climb(parent: dict, end: Point) -> list[Point]:
        seq = [end]
        while parent[seq[-1]] is not None:
            prev, _ = parent[seq[-1]]
            seq.append(prev)
        return seq[::-1]

    ascent = climb(up_parent, peak)
    flat = climb(flat_parent, plateau_end)
    descent = [plateau_end]
    while down_next[descent[-1]] is not None:
        nxt, _ = down_next[descent[-1]]
        descent.append(nxt)
    pts = ascent + flat[1:] + descent[1:]
    return LatticePath(pts)

"""Bigraded homology of weighted cube complexes.

A weight table on a rectangle filters the cubical decomposition by
sublevel sets ``S_n`` (cubes whose vertex-max weight is at most ``n``).
The engine runs one integer persistence pass over the whole filtration
for ranks and tower structure, then an incremental integer echelon pass
per boundary operator for torsion and for an independent per-level
cross-check of every Betti number it reports.
"""

from __future__ import annotations

import hashlib
import itertools
import re

from . import _intmat
from .errors import (
    CrossCheckError,
    DomainMismatch,
    ParseError,
    ShapeMismatch,
)
from .lattice import Cube, Point, Rectangle, WeightTable, p_add, unit


def iter_cubes(rect: Rectangle):
    """All cubes of the rectangle's cubical decomposition, all dimensions."""
    axes = range(rect.rank)
    for base in rect.points():
        room = [v for v in axes if base[v] < rect.hi[v]]
        for k in range(len(room) + 1):
            for dirs in itertools.combinations(room, k):
                yield Cube(base, dirs)


class LevelComplex:
    """Sublevel cubical complex ``S_n`` of a weight table."""

    __slots__ = ("rect", "level", "cubes")

    def __init__(self, rect: Rectangle, level: int, cubes: list[Cube]):
        self.rect = rect
        self.level = level
        self.cubes = cubes

    def cubes_of_dim(self, q: int) -> list[Cube]:
        return [c for c in self.cubes if c.dim == q]

    @property
    def max_dim(self) -> int:
        return max((c.dim for c in self.cubes), default=-1)


def build_level_complex(wt: WeightTable, n: int) -> LevelComplex:
    cubes = [c for c in iter_cubes(wt.rect) if wt.cube_weight(c) <= n]
    cubes.sort(key=lambda c: (c.dim, c.key()))
    return LevelComplex(wt.rect, n, cubes)


def boundary_matrices(cx: LevelComplex) -> list[list[list[int]]]:
    """Dense boundary matrices per dimension, ``mats[q]`` rows are
    (q-1)-cubes, columns q-cubes, both sorted by key."""
    by_dim: dict[int, list[Cube]] = {}
    for c in cx.cubes:
        by_dim.setdefault(c.dim, []).append(c)
    for cubes in by_dim.values():
        cubes.sort(key=lambda c: c.key())
    mats: list[list[list[int]]] = []
    top = cx.max_dim
    for q in range(top + 1):
        cols = by_dim.get(q, [])
        rows = by_dim.get(q - 1, [])
        index = {c.key(): i for i, c in enumerate(rows)}
        mat = [[0] * len(cols) for _ in rows]
        if q > 0:
            for j, c in enumerate(cols):
                for sign, f in c.faces():
                    mat[index[f.key()]][j] += sign
        mats.append(mat)
    return mats


def smith_homology(cx: LevelComplex) -> dict[int, tuple[int, tuple[int, ...]]]:
    """Integral homology of one complex: ``q -> (betti, torsion factors)``."""
    by_dim: dict[int, list[Cube]] = {}
    for c in cx.cubes:
        by_dim.setdefault(c.dim, []).append(c)
    for cubes in by_dim.values():
        cubes.sort(key=lambda c: c.key())
    top = cx.max_dim
    ranks: dict[int, int] = {}
    torsions: dict[int, tuple[int, ...]] = {}
    for q in range(1, top + 1):
        rows = {c.key(): i for i, c in enumerate(by_dim.get(q - 1, []))}
        cols = []
        for c in by_dim.get(q, []):
            col: dict[int, int] = {}
            for sign, f in c.faces():
                i = rows[f.key()]
                col[i] = col.get(i, 0) + sign
            cols.append({r: v for r, v in col.items() if v})
        factors = _intmat.invariant_factors_of_columns(cols)
        ranks[q] = len(factors)
        torsions[q - 1] = tuple(d for d in factors if d != 1)
    out = {}
    for q in range(top + 1):
        betti = len(by_dim.get(q, [])) - ranks.get(q, 0) - ranks.get(q + 1, 0)
        out[q] = (betti, torsions.get(q, ()))
    return out


class GradedRoot:
    """Merge tree of sublevel components, one node per (level, component)."""

    __slots__ = ("min_level", "stable_level", "nodes", "parent")

    def __init__(
        self,
        min_level: int,
        stable_level: int,
        nodes: dict[int, tuple[str, ...]],
        parent: dict[tuple[int, str], str],
    ):
        self.min_level = min_level
        self.stable_level = stable_level
        self.nodes = {n: tuple(sorted(ids)) for n, ids in nodes.items()}
        self.parent = dict(parent)

    @staticmethod
    def label(n: int, cid: str) -> str:
        return f"n={n}/{cid}"

    def node_labels(self) -> list[str]:
        return [
            self.label(n, cid)
            for n in range(self.min_level, self.stable_level + 1)
            for cid in self.nodes[n]
        ]

    def edge_labels(self) -> list[tuple[str, str]]:
        out = []
        for n in range(self.min_level, self.stable_level):
            for cid in self.nodes[n]:
                out.append(
                    (self.label(n, cid), self.label(n + 1, self.parent[(n, cid)]))
                )
        return out

    def children(self) -> dict[tuple[int, str], list[str]]:
        kids: dict[tuple[int, str], list[str]] = {}
        for (n, cid), parent in self.parent.items():
            kids.setdefault((n + 1, parent), []).append(cid)
        return kids

    def canonical_hash(self) -> str:
        """Order-independent tree hash; ids do not enter, levels do."""
        kids = self.children()
        memo: dict[tuple[int, str], str] = {}

        def visit(n: int, cid: str) -> str:
            key = (n, cid)
            if key not in memo:
                sub = sorted(visit(n - 1, k) for k in kids.get(key, []))
                payload = f"{n}|" + "|".join(sub)
                memo[key] = hashlib.sha256(payload.encode()).hexdigest()
            return memo[key]

        top = self.nodes[self.stable_level]
        if len(top) != 1:
            raise CrossCheckError("graded root is not connected at the top")
        return visit(self.stable_level, top[0])

    def to_json(self) -> dict:
        return {
            "min_level": self.min_level,
            "stable_level": self.stable_level,
            "nodes": self.node_labels(),
            "edges": [list(e) for e in self.edge_labels()],
            "hash": self.canonical_hash(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GradedRoot":
        nodes: dict[int, list[str]] = {}
        try:
            for lab in data["nodes"]:
                n, cid = _parse_label(lab)
                nodes.setdefault(n, []).append(cid)
            parent = {}
            for child, par in data["edges"]:
                n, cid = _parse_label(child)
                pn, pid = _parse_label(par)
                if pn != n + 1:
                    raise ParseError(f"edge {child} -> {par} skips a level")
                parent[(n, cid)] = pid
            root = cls(
                int(data["min_level"]),
                int(data["stable_level"]),
                {n: tuple(ids) for n, ids in nodes.items()},
                parent,
            )
        except KeyError as e:
            raise ParseError(f"graded root JSON misses {e}") from None
        return root

    def to_dot(self) -> str:
        lines = ["digraph gradedroot {", "  rankdir=BT;"]
        for n in range(self.min_level, self.stable_level + 1):
            row = " ".join(f'"{self.label(n, cid)}";' for cid in self.nodes[n])
            lines.append(f"  {{ rank=same; {row} }}")
        for child, par in self.edge_labels():
            lines.append(f'  "{child}" -> "{par}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dot(cls, text: str) -> "GradedRoot":
        nodes: dict[int, list[str]] = {}
        parent: dict[tuple[int, str], str] = {}
        for child, par in re.findall(r'"([^"]+)"\s*->\s*"([^"]+)"', text):
            n, cid = _parse_label(child)
            _, pid = _parse_label(par)
            parent[(n, cid)] = pid
        for lab in re.findall(r'"([^"]+)";', text):
            n, cid = _parse_label(lab)
            if cid not in nodes.setdefault(n, []):
                nodes[n].append(cid)
        if not nodes:
            raise ParseError("no graded-root nodes in DOT input")
        return cls(min(nodes), max(nodes), {n: tuple(v) for n, v in nodes.items()}, parent)

    def render_ascii(self) -> str:
        kids = self.children()
        lines: list[str] = []

        def walk(n: int, cid: str, prefix: str, tail: bool, first: bool) -> None:
            if first:
                lines.append(self.label(n, cid))
                child_prefix = ""
            else:
                lines.append(prefix + ("`- " if tail else "+- ") + self.label(n, cid))
                child_prefix = prefix + ("   " if tail else "|  ")
            sub = sorted(kids.get((n, cid), []))
            for i, k in enumerate(sub):
                walk(n - 1, k, child_prefix, i == len(sub) - 1, False)

        top = self.nodes[self.stable_level]
        for cid in top:
            walk(self.stable_level, cid, "", True, True)
        return "\n".join(lines) + "\n"


def _parse_label(lab: str) -> tuple[int, str]:
    m = re.fullmatch(r"n=(-?\d+)/(.*)", lab)
    if not m:
        raise ParseError(f"bad graded-root label {lab!r}")
    return int(m.group(1)), m.group(2)


def graded_root(wt: WeightTable) -> GradedRoot:
    """Merge tree of the sublevel sets of a weight table."""
    rect = wt.rect
    points = sorted(rect.points())
    uf: dict[Point, Point] = {}
    roots: set[Point] = set()

    def find(p: Point) -> Point:
        root = p
        while uf[root] != root:
            root = uf[root]
        while uf[p] != root:
            uf[p], p = root, uf[p]
        return root

    def union(a: Point, b: Point) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the lex-smallest point as representative; every point
            # joins as its own root, so reps stay lex-minima
            if rb < ra:
                ra, rb = rb, ra
            uf[rb] = ra
            roots.discard(rb)

    edges = []
    for p in points:
        for v in range(rect.rank):
            q = p_add(p, unit(rect.rank, v))
            if q in rect:
                edges.append((max(wt[p], wt[q]), p, q))
    edges.sort()
    min_level = wt.min_weight()
    stable = wt.max_weight()
    nodes: dict[int, tuple[str, ...]] = {}
    parent: dict[tuple[int, str], str] = {}
    ei = 0
    by_weight: dict[int, list[Point]] = {}
    for p in points:
        by_weight.setdefault(wt[p], []).append(p)
    prev_reps: dict[str, Point] = {}
    for n in range(min_level, stable + 1):
        for p in by_weight.get(n, ()):
            uf[p] = p
            roots.add(p)
        while ei < len(edges) and edges[ei][0] <= n:
            _, a, b = edges[ei]
            union(a, b)
            ei += 1
        nodes[n] = tuple(sorted(",".join(map(str, r)) for r in roots))
        for cid, rep in prev_reps.items():
            parent[(n - 1, cid)] = ",".join(map(str, find(rep)))
        prev_reps = {",".join(map(str, r)): r for r in roots}
    return GradedRoot(min_level, stable, nodes, parent)


class BigradedModule:
    """Levelwise integral homology with the degree-shift tower maps.

    ``entries[(q, n)]`` holds ``(betti, torsion)`` of ``H_q(S_n)`` for
    ``min_level <= n <= stable_level``.  Outside the stored window the
    values are implied: zero below ``min_level``, a single free rank in
    ``q = 0`` above ``stable_level``.  ``u_rank(q, n, k)`` is the rank of
    the map ``H_q(S_n) -> H_q(S_{n+k})``.
    """

    __slots__ = ("min_level", "stable_level", "entries", "u_ranks", "bars", "codim")

    def __init__(
        self,
        min_level: int,
        stable_level: int,
        entries: dict[tuple[int, int], tuple[int, tuple[int, ...]]],
        u_ranks: dict[tuple[int, int, int], int] | None = None,
        bars: dict[int, list[tuple[int, int | None]]] | None = None,
        codim: int | None = None,
    ):
        self.min_level = min_level
        self.stable_level = stable_level
        self.entries = {
            qn: (b, tuple(t)) for qn, (b, t) in entries.items() if b or t
        }
        self.bars = bars
        self.codim = codim
        if u_ranks is None:
            if bars is None:
                raise ShapeMismatch("need either u_ranks or bars")
            u_ranks = self._ranks_from_bars()
        self.u_ranks = {k: v for k, v in u_ranks.items() if v}

    def _ranks_from_bars(self) -> dict[tuple[int, int, int], int]:
        out: dict[tuple[int, int, int], int] = {}
        for q, bars in self.bars.items():
            for n in range(self.min_level, self.stable_level):
                for k in range(1, self.stable_level - n + 1):
                    r = sum(
                        1
                        for b, d in bars
                        if b <= n and (d is None or d > n + k)
                    )
                    if r:
                        out[(q, n, k)] = r
        return out

    def max_q(self) -> int:
        return max((q for q, _ in self.entries), default=0)

    def betti(self, q: int, n: int) -> int:
        if n < self.min_level:
            return 0
        if n > self.stable_level:
            return 1 if q == 0 else 0
        return self.entries.get((q, n), (0, ()))[0]

    def torsion(self, q: int, n: int) -> tuple[int, ...]:
        if self.min_level <= n <= self.stable_level:
            return self.entries.get((q, n), (0, ()))[1]
        return ()

    def has_torsion(self) -> bool:
        return any(t for _, t in self.entries.values())

    def u_rank(self, q: int, n: int, k: int) -> int:
        if k <= 0:
            raise ShapeMismatch(f"k must be positive, got {k}")
        if n < self.min_level:
            return 0
        if n >= self.stable_level:
            return 1 if q == 0 else 0
        if n + k > self.stable_level:
            # only the infinite tower survives past stabilisation
            return 1 if q == 0 else 0
        return self.u_ranks.get((q, n, k), 0)

    def towers(self) -> list[dict]:
        """Tower decomposition of the q = 0 part (requires engine bars)."""
        if self.bars is None:
            raise ShapeMismatch("tower decomposition needs engine-computed bars")
        out = []
        for b, d in sorted(self.bars.get(0, []), key=lambda x: (x[0], x[1] is not None, x[1] or 0)):
            if d is None:
                out.append({"bottom": b, "length": None})
            else:
                out.append({"bottom": b, "length": d - b})
        return out

    def is_trivial(self) -> bool:
        if self.min_level != self.stable_level:
            return False
        return all(
            q == 0 and b == 1 and not t
            for (q, _n), (b, t) in self.entries.items()
        )

    def to_json(self) -> dict:
        entries = [
            {"q": q, "n": n, "betti": b, "torsion": list(t)}
            for (q, n), (b, t) in sorted(self.entries.items())
        ]
        u_ranks = [
            {"q": q, "n": n, "k": k, "rank": r}
            for (q, n, k), r in sorted(self.u_ranks.items())
        ]
        return {
            "min_level": self.min_level,
            "stable_level": self.stable_level,
            "entries": entries,
            "u_ranks": u_ranks,
        }

    @classmethod
    def from_json(cls, data: dict) -> "BigradedModule":
        try:
            entries = {
                (e["q"], e["n"]): (e["betti"], tuple(e.get("torsion", ())))
                for e in data["entries"]
            }
            u_ranks = {
                (u["q"], u["n"], u["k"]): u["rank"] for u in data.get("u_ranks", [])
            }
            return cls(
                int(data["min_level"]),
                int(data["stable_level"]),
                entries,
                u_ranks=u_ranks,
            )
        except KeyError as e:
            raise ParseError(f"bigraded module JSON misses {e}") from None


def homology_of_table(
    wt: WeightTable, codim: int | None = None
) -> tuple[BigradedModule, GradedRoot]:
    """Run the full engine on a weight table.

    Persistence provides ranks and tower structure; an independent
    integer echelon pass recomputes every per-level Betti number and the
    torsion, and any disagreement raises :class:`CrossCheckError`.
    """
    rect = wt.rect
    rank = rect.rank
    vals = wt.values
    lo, hi = rect.lo, rect.hi
    # cells in dimension order: weight of a cube is the max over the two
    # faces along its first direction, so one pass suffices
    cells: list[tuple] = []  # (key, dim, faces)
    weights: dict[tuple, int] = {}
    for q in range(rank + 1):
        for dirs in itertools.combinations(range(rank), q):
            inside = set(dirs)
            ranges = [
                range(lo[v], hi[v] + (0 if v in inside else 1))
                for v in range(rank)
            ]
            splits = [
                (v, dirs[:i] + dirs[i + 1 :], -1 if i % 2 else 1)
                for i, v in enumerate(dirs)
            ]
            for base in itertools.product(*ranges):
                key = (base, dirs)
                if q == 0:
                    weights[key] = vals[base]
                    cells.append((key, 0, ()))
                    continue
                faces = []
                for v, rest, sign in splits:
                    upper = base[:v] + (base[v] + 1,) + base[v + 1 :]
                    faces.append((-sign, (base, rest)))
                    faces.append((sign, (upper, rest)))
                weights[key] = max(weights[faces[0][1]], weights[faces[1][1]])
                cells.append((key, q, faces))
    cells.sort(key=lambda c: (weights[c[0]], c[1], c[0]))
    keys = [c[0] for c in cells]
    dims = [c[1] for c in cells]
    wlist = [weights[k] for k in keys]
    index = {k: i for i, k in enumerate(keys)}
    boundaries: list[_intmat.Col] = [
        {index[fk]: sign for sign, fk in c[2]} for c in cells
    ]

    pairs, essentials = _intmat.reduce_persistence(boundaries, dims)
    bars: dict[int, list[tuple[int, int | None]]] = {}
    for i, j in pairs:
        b, d = wlist[i], wlist[j]
        if b < d:
            bars.setdefault(dims[i], []).append((b, d))
    for i in essentials:
        bars.setdefault(dims[i], []).append((wlist[i], None))

    min_level = wt.min_weight()
    stable = wt.max_weight()
    levels = range(min_level, stable + 1)
    nlev = stable - min_level + 1
    bcount = [[0] * (nlev + 1) for _ in range(rank + 1)]
    for q, bar in bars.items():
        row = bcount[q]
        for b, d in bar:
            row[b - min_level] += 1
            if d is not None:
                row[d - min_level] -= 1
    for row in bcount:
        for i in range(1, nlev):
            row[i] += row[i - 1]

    def persistence_betti(q: int, n: int) -> int:
        return bcount[q][n - min_level]

    # independent integral pass, level by level
    lattices = [_intmat.EchelonLattice() for _ in range(rank + 1)]
    counts = [0] * (rank + 1)
    pos = 0
    total = len(cells)
    entries: dict[tuple[int, int], tuple[int, tuple[int, ...]]] = {}
    for n in levels:
        while pos < total and wlist[pos] <= n:
            counts[dims[pos]] += 1
            if dims[pos] > 0:
                lattices[dims[pos]].insert(boundaries[pos])
            pos += 1
        for q in range(rank + 1):
            rank_q = lattices[q].rank if q > 0 else 0
            rank_q1 = lattices[q + 1].rank if q + 1 <= rank else 0
            betti = counts[q] - rank_q - rank_q1
            if betti != persistence_betti(q, n):
                raise CrossCheckError(
                    f"betti mismatch at q={q} n={n}: "
                    f"echelon {betti} vs persistence {persistence_betti(q, n)}"
                )
            torsion: tuple[int, ...] = ()
            if q + 1 <= rank:
                torsion = tuple(lattices[q + 1].nontrivial_factors())
            if betti or torsion:
                entries[(q, n)] = (betti, torsion)

    module = BigradedModule(
        min_level, stable, entries, bars=bars, codim=codim
    )
    root = graded_root(wt)
    # the merge tree must reproduce the q = 0 ranks
    for n in levels:
        if len(root.nodes[n]) != module.betti(0, n):
            raise CrossCheckError(
                f"component count {len(root.nodes[n])} != betti_0 {module.betti(0, n)} at level {n}"
            )
    if codim is not None:
        eu = euler_characteristic(module)
        if eu != codim:
            raise CrossCheckError(f"euler characteristic {eu} != codimension {codim}")
    return module, root


def lattice_homology(
    r, doubling: str = "auto"
) -> tuple[BigradedModule, GradedRoot]:
    """Homology of a realization on the condensed grid over ``R(0, d_cap)``.

    Doubling is applied according to the mode when the two heights jump
    along a common edge; levels are unaffected by it.
    """
    from . import valuations

    wt, _used, _doubled = valuations.realization_table(r, doubling)
    return homology_of_table(wt, codim=r.codim)


def euler_characteristic(m: BigradedModule) -> int:
    """Normalised Euler characteristic: the infinite tower contributes
    ``-min_level``, each finite rank one unit per level it survives."""
    total = -m.min_level
    for n in range(m.min_level, m.stable_level):
        for q in range(m.max_q() + 1):
            finite = m.betti(q, n) - (1 if q == 0 else 0)
            total += finite if q % 2 == 0 else -finite
    return total


def euler_by_weights(wt: WeightTable) -> int:
    """Signed cube-weight sum ``sum (-1)^(dim+1) w(cube)``.

    Equals :func:`euler_characteristic` of the homology of the same
    table; computing it straight off the weights gives the engine an
    independent target.
    """
    total = 0
    for c in iter_cubes(wt.rect):
        w = wt.cube_weight(c)
        total += -w if c.dim % 2 == 0 else w
    return total


def homdim(m: BigradedModule) -> int:
    """Largest homological degree carrying anything; -1 for the module of
    a full submodule (trivial tower only)."""
    if m.is_trivial():
        return -1
    return max((q for (q, _n), (b, t) in m.entries.items() if b or t), default=0)


def modules_isomorphic(a: BigradedModule, b: BigradedModule) -> bool:
    lo = min(a.min_level, b.min_level)
    hi = max(a.stable_level, b.stable_level)
    top = max(a.max_q(), b.max_q())
    for n in range(lo, hi + 1):
        for q in range(top + 1):
            if a.betti(q, n) != b.betti(q, n):
                return False
            if sorted(a.torsion(q, n)) != sorted(b.torsion(q, n)):
                return False
            for k in range(1, hi - n + 2):
                if a.u_rank(q, n, k) != b.u_rank(q, n, k):
                    return False
    return True


def nonpositivity_report(m: BigradedModule) -> dict:
    """Check that reduced homology is confined to nonpositive levels."""
    violations = []
    for (q, n), (betti, torsion) in sorted(m.entries.items()):
        if n >= 1:
            reduced = betti - (1 if q == 0 else 0)
            if reduced > 0 or torsion:
                violations.append({"q": q, "n": n, "betti": betti, "torsion": list(torsion)})
    s0 = m.betti(0, 0)
    holds = not violations and (m.codim in (None, 0) or s0 >= 2)
    return {
        "holds": holds,
        "violations": violations,
        "s0_components": s0,
        "codim": m.codim,
    }


def kunneth_product(w1: WeightTable, w2: WeightTable) -> WeightTable:
    """Sum table on the product rectangle; both factors must be based at 0."""
    for w in (w1, w2):
        if any(w.rect.lo):
            raise DomainMismatch(f"factor rectangle {w.rect} not based at 0")
    hi = w1.rect.hi + w2.rect.hi
    r1 = w1.rect.rank
    rect = Rectangle.based(hi)
    return WeightTable(
        rect, {p: w1[p[:r1]] + w2[p[r1:]] for p in rect.points()}
    )

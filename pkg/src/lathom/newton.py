"""Newton diagrams of monomial ideals: closure, adjoint, conductor data,
kerb configurations and the two-variable line-realization sweep."""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import (
    CrossCheckError,
    EmptySupport,
    NonConvenient,
    NotClosed,
    NotStrong,
    PreconditionViolated,
    ShapeMismatch,
)
from .lattice import Point, p_leq, weight_from_pair
from .valuations import Realization, height_pair, spectrum_from_monomial_data


@dataclass(frozen=True)
class ExponentSet:
    """Finite set of exponent vectors of monomial generators."""

    m: int
    points: frozenset

    @classmethod
    def of(cls, pts) -> "ExponentSet":
        pts = [tuple(int(c) for c in p) for p in pts]
        if not pts:
            raise EmptySupport("no exponents")
        m = len(pts[0])
        for p in pts:
            if len(p) != m:
                raise ShapeMismatch(f"mixed lengths {len(p)} vs {m}")
            if any(c < 0 for c in p):
                raise PreconditionViolated(f"negative exponent in {p}")
        return cls(m, frozenset(pts))

    def is_convenient(self) -> bool:
        for i in range(self.m):
            if not any(all(c == 0 for j, c in enumerate(p) if j != i) for p in self.points):
                return False
        return True

    def sorted_points(self) -> list:
        return sorted(self.points)


@dataclass(frozen=True)
class NewtonDiagram:
    """Facet inequalities of the positive hull of a support.

    Facets are pairs (primitive normal, level) with level > 0; in the
    convenient case all normals are strictly positive and the region is
    exactly {x >= 0 : <n, x> >= level for all facets}.
    """

    m: int
    facets: tuple
    vertices: tuple
    convenient: bool

    def member(self, p: Point) -> bool:
        return all(_dot(n, p) >= lv for n, lv in self.facets)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _pareto_min(pts) -> list:
    pts = sorted(set(pts))
    keep = []
    for p in pts:
        if not any(p_leq(q, p) and q != p for q in pts):
            keep.append(p)
    return keep


def _cross(a, b, c) -> int:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _chain2(pts) -> list:
    mins = _pareto_min(pts)
    chain = []
    for p in mins:
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0:
            chain.pop()
        chain.append(p)
    return chain


def _facets3(pts) -> list:
    mins = _pareto_min(pts)
    dirs = [_sub(p, q) for p in mins for q in mins if p != q]
    dirs += [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    cands = set()
    for u, v in itertools.combinations(dirs, 2):
        n = (
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        )
        if n == (0, 0, 0):
            continue
        if all(c <= 0 for c in n):
            n = tuple(-c for c in n)
        if any(c < 0 for c in n):
            continue
        g = gcd(gcd(n[0], n[1]), n[2])
        cands.add(tuple(c // g for c in n))
    facets = []
    for n in sorted(cands):
        level = min(_dot(n, p) for p in mins)
        if level <= 0:
            continue
        active = [p for p in mins if _dot(n, p) == level]
        span = [_sub(p, active[0]) for p in active[1:]]
        span += [e for i, e in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))) if n[i] == 0]
        if _rank(span) == 2:
            facets.append((n, level))
    return facets


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _rank(vectors) -> int:
    rows = [[Fraction(c) for c in v] for v in vectors if any(v)]
    rank = 0
    for col in range(len(rows[0]) if rows else 0):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def newton_diagram(s: ExponentSet) -> NewtonDiagram:
    """Facets of the positive-orthant hull of the support.

    Missing axes are flagged via ``convenient`` rather than raised; the
    facet list then includes the axis-parallel pieces with positive level
    so that membership stays correct.
    """
    if not s.points:
        raise EmptySupport("empty support")
    if s.m == 1:
        a = min(p[0] for p in s.points)
        facets = (((1,), a),) if a > 0 else ()
        return NewtonDiagram(1, facets, ((a,),), True)
    if s.m == 2:
        chain = _chain2(s.points)
        facets = []
        for a, b in zip(chain, chain[1:]):
            dx, dy = b[0] - a[0], a[1] - b[1]
            g = gcd(dx, dy)
            n = (dy // g, dx // g)
            facets.append((n, _dot(n, a)))
        if chain[0][0] > 0:
            facets.append(((1, 0), chain[0][0]))
        if chain[-1][1] > 0:
            facets.append(((0, 1), chain[-1][1]))
        return NewtonDiagram(2, tuple(facets), tuple(chain), s.is_convenient())
    if s.m == 3:
        facets = _facets3(s.points)
        verts = []
        for p in _pareto_min(s.points):
            if not all(_dot(n, p) >= lv for n, lv in facets):
                continue
            active = [n for n, lv in facets if _dot(n, p) == lv]
            active += [e for i, e in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))) if p[i] == 0]
            if _rank(active) == 3:
                verts.append(p)
        return NewtonDiagram(3, tuple(facets), tuple(sorted(verts)), s.is_convenient())
    raise ShapeMismatch(f"diagrams implemented for m <= 3, got m={s.m}")


def _default_box(s: ExponentSet) -> Point:
    return tuple(max(p[i] for p in s.points) + 1 for i in range(s.m))


def region_member(p: Point, s: ExponentSet) -> bool:
    """Monomial-ideal membership from the generators."""
    return any(p_leq(g, p) for g in s.points)


def closure_support(s: ExponentSet, box: Point | None = None) -> ExponentSet:
    """Lattice points of the integral closure inside R(0, box)."""
    d = newton_diagram(s)
    if not d.convenient:
        raise NonConvenient("closure complement is infinite")
    box = box or _default_box(s)
    pts = [p for p in itertools.product(*(range(b + 1) for b in box)) if d.member(p)]
    return ExponentSet(s.m, frozenset(pts))


def is_closed(s: ExponentSet, box: Point | None = None) -> bool:
    d = newton_diagram(s)
    if not d.convenient:
        raise NonConvenient("closure complement is infinite")
    box = box or _default_box(s)
    return all(
        region_member(p, s) == d.member(p)
        for p in itertools.product(*(range(b + 1) for b in box))
    )


def adjoint_support(s: ExponentSet, box: Point | None = None) -> ExponentSet:
    """Points p with p + 1 strictly above the diagram, inside R(0, box)."""
    d = newton_diagram(s)
    if not d.convenient:
        raise NonConvenient("adjoint complement is infinite")
    box = box or _default_box(s)
    one = (1,) * s.m
    pts = [
        p
        for p in itertools.product(*(range(b + 1) for b in box))
        if all(_dot(n, _add(p, one)) > lv for n, lv in d.facets)
    ]
    return ExponentSet(s.m, frozenset(pts))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def pset(d: NewtonDiagram) -> ExponentSet:
    """Shifted lattice points strictly under the diagram.

    These index the quotient by the adjoint ideal; p belongs iff some
    facet has <n, p + 1> <= level.
    """
    if not d.convenient:
        raise NonConvenient("P-set is infinite without a convenient diagram")
    one = (1,) * d.m
    bound = max((lv for _n, lv in d.facets), default=0)
    pts = [
        p
        for p in itertools.product(range(bound + 1), repeat=d.m)
        if any(_dot(n, _add(p, one)) <= lv for n, lv in d.facets)
    ]
    return ExponentSet(d.m, frozenset(pts))


def primitive_pieces(d: NewtonDiagram) -> list:
    """Primitive segments of the compact facets as (normal, level, conductor).

    Pieces are listed starting from the x1-axis end of the boundary;
    a facet whose segment spans g lattice steps contributes g equal
    pieces.
    """
    if d.m != 2:
        raise ShapeMismatch("primitive facet decomposition implemented for m=2")
    if not d.convenient:
        raise NonConvenient("compact boundary does not reach the axes")
    pieces = []
    chain = list(reversed(d.vertices))
    for a, b in zip(chain, chain[1:]):
        dx, dy = a[0] - b[0], b[1] - a[1]
        g = gcd(dx, dy)
        n = (dy // g, dx // g)
        lv = _dot(n, a)
        pieces.extend([(n, lv, lv + 1 - n[0] - n[1])] * g)
    return pieces


def comb_conductor(d: NewtonDiagram) -> Point:
    """Conductor coordinates, one per primitive piece."""
    return tuple(c for _n, _lv, c in primitive_pieces(d))


def comb_weight(d: NewtonDiagram):
    """Realization and weight table of the diagram's combinatorial homology.

    The spectrum records the piece-wise degrees of the P-set on
    R(0, conductor); the primitive decomposition makes the height satisfy
    the duality property without further doubling.
    """
    pieces = primitive_pieces(d)
    c_gamma = tuple(c for _n, _lv, c in pieces)
    if any(c < 0 for c in c_gamma):
        raise PreconditionViolated(f"negative conductor {c_gamma}")
    normals = [n for n, _lv, _c in pieces]
    points = sorted(pset(d).points)
    r = spectrum_from_monomial_data(normals, c_gamma, points)
    h, hc = height_pair(r)
    return r, weight_from_pair(h, hc)


def closure_realization(s: ExponentSet) -> Realization:
    """Realization of the integral closure by the facet valuations.

    Thresholds are the facet levels; the quotient basis is the finite
    complement of the region.  The height need not satisfy the duality
    property, so run homology with doubling enabled.
    """
    d = newton_diagram(s)
    if not d.convenient:
        raise NonConvenient("closure has infinite codimension")
    if not d.facets:
        raise PreconditionViolated("unit ideal has no facet valuations")
    box = _default_box(s)
    basis = [
        p
        for p in itertools.product(*(range(b + 1) for b in box))
        if not d.member(p)
    ]
    normals = [n for n, _lv in d.facets]
    thresholds = tuple(lv for _n, lv in d.facets)
    return spectrum_from_monomial_data(normals, thresholds, sorted(basis))


@dataclass(frozen=True)
class KerbConfiguration:
    """Alternating blue/red staircase sequence; empty for the unit ideal."""

    points: tuple
    classification: str


@dataclass(frozen=True)
class GeometricRealization:
    """Separating lines as (slope, intercept) pairs of Fractions.

    ``critical`` keeps the tangential slopes the sweep stopped at; the
    lines themselves use mediants just below them.
    """

    lines: tuple
    critical: tuple = ()


def _slope(a, b) -> Fraction:
    return Fraction(b[1] - a[1], b[0] - a[0])


def verify_kerb(seq, support: ExponentSet) -> str:
    """Classify a candidate sequence as none, weak or strong.

    Weak needs the alternating colours and the slope chain
    s0 <= s1 < s2 <= s3 < ...; strong additionally forbids blue points
    other than the sequence itself on or above all its lines within the
    quadrant spanned by the first and last point.
    """
    pts = [tuple(p) for p in seq]
    if len(pts) % 2 == 0 or not pts:
        return "none"
    for a, b in zip(pts, pts[1:]):
        if not (b[0] > a[0] and b[1] < a[1]):
            return "none"
    for l, p in enumerate(pts):
        if region_member(p, support) != (l % 2 == 1):
            return "none"
    slopes = [_slope(a, b) for a, b in zip(pts, pts[1:])]
    for l in range(len(slopes) - 1):
        if l % 2 == 0:
            if not slopes[l] <= slopes[l + 1]:
                return "none"
        elif not slopes[l] < slopes[l + 1]:
            return "none"
    intercepts = [p[1] - s * p[0] for p, s in zip(pts, slopes)]
    maxx = max(p[0] for p in support.points)
    maxy = max(p[1] for p in support.points)
    evens = set(pts[::2])
    for p in itertools.product(range(pts[0][0], maxx + 1), range(pts[-1][1], maxy + 1)):
        if region_member(p, support) or p in evens:
            continue
        if all(p[1] - s * p[0] >= b for s, b in zip(slopes, intercepts)):
            return "weak"
    return "strong"


def _tangent(pareto, m: Fraction):
    b = min(p[1] - m * p[0] for p in pareto)
    on_line = [p for p in pareto if p[1] - m * p[0] == b]
    return b, min(p[0] for p in on_line)


def linedim(support: ExponentSet):
    """Minimal number of separating lines, by the tangential-line sweep.

    Returns (count, strong kerb of maximal length, minimal realization).
    The realization replaces the infinitesimal rotation of each critical
    tangential line by the mediant with the next smaller lattice slope.
    """
    if support.m != 2:
        raise ShapeMismatch("line realizations implemented for m=2")
    d = newton_diagram(support)
    if not d.convenient:
        raise NonConvenient("support has infinite codimension")
    box = tuple(c + 1 for c in (max(v[0] for v in d.vertices), max(v[1] for v in d.vertices)))
    grid = list(itertools.product(range(box[0] + 1), range(box[1] + 1)))
    for p in grid:
        if region_member(p, support) != d.member(p):
            raise NotClosed(f"support differs from its closure at {p}")
    region = [p for p in grid if d.member(p)]
    blue_all = [p for p in grid if not d.member(p)]
    pareto = _pareto_min(region)

    cands = {Fraction(0)}
    for p in blue_all + pareto:
        for q in pareto:
            if q[0] != p[0]:
                s = _slope(p, q)
                if s < 0:
                    cands.add(s)
    sweep = sorted(cands)
    all_slopes = {Fraction(0)}
    for p, q in itertools.combinations(grid, 2):
        if q[0] != p[0]:
            s = _slope(p, q)
            if s < 0:
                all_slopes.add(s)
    all_slopes = sorted(all_slopes)

    def bucket(blues, m):
        b, first = _tangent(pareto, m)
        return [p for p in blues if p[1] - m * p[0] >= b and p[0] < first]

    kerb = []
    crit = []
    blues = list(blue_all)
    prev = None
    while blues:
        m_i = next(
            (m for m in sweep if (prev is None or m > prev) and bucket(blues, m)),
            None,
        )
        if m_i is None:
            raise CrossCheckError("sweep exhausted slopes with blue points left")
        hit = bucket(blues, m_i)
        p_even = max(hit, key=lambda p: p[0])
        b, first = _tangent(pareto, m_i)
        on_line = sorted(p for p in pareto if p[1] - m_i * p[0] == b)
        kerb.append(p_even)
        kerb.append(on_line[0])
        crit.append(m_i)
        blues = [
            p for p in blues if p not in hit and p[1] - m_i * p[0] >= b
        ]
        prev = m_i
    if kerb:
        kerb.pop()

    lines = []
    for m_i in crit:
        i = bisect.bisect_left(all_slopes, m_i)
        if i == 0:
            s = m_i - 1
        else:
            lo = all_slopes[i - 1]
            s = Fraction(lo.numerator + m_i.numerator, lo.denominator + m_i.denominator)
        b = min(p[1] - s * p[0] for p in pareto)
        lines.append((s, b))

    realized = {
        p
        for p in grid
        if all(p[1] - s * p[0] >= b for s, b in lines)
    }
    if realized != set(region):
        raise CrossCheckError("sweep lines do not cut out the support")
    config = KerbConfiguration(tuple(kerb), "strong")
    if kerb and verify_kerb(kerb, support) != "strong":
        raise CrossCheckError("sweep produced a non-strong sequence")
    return len(lines), config, GeometricRealization(tuple(lines), tuple(crit))


def check_geometric_realization(lines, support: ExponentSet, box: Point | None = None) -> bool:
    """Whether the lattice points on or above every line are the support."""
    if support.m != 2:
        raise ShapeMismatch("line realizations implemented for m=2")
    pairs = lines.lines if isinstance(lines, GeometricRealization) else [tuple(l) for l in lines]
    pairs = [(Fraction(s), Fraction(b)) for s, b in pairs]
    d = newton_diagram(support)
    if box is None:
        box = tuple(
            c + 1 for c in (max(v[0] for v in d.vertices), max(v[1] for v in d.vertices))
        )
    for p in itertools.product(range(box[0] + 1), range(box[1] + 1)):
        above = all(p[1] - s * p[0] >= b for s, b in pairs)
        if above != region_member(p, support):
            return False
    return True


def witness_monomials(k: KerbConfiguration, support: ExponentSet | None = None):
    """Alternating-sum witness exponents (F list, G list) of a strong kerb.

    Their pairwise sums tile the kerb: F_i + G_i recovers the i-th blue
    point, mixed sums land in the region.  Checked against the support
    when one is given.
    """
    if k.classification != "strong":
        raise NotStrong(f"witnesses need a strong configuration, got {k.classification}")
    pts = list(k.points)
    if not pts or len(pts) % 2 == 0:
        raise NotStrong("need an odd-length sequence")
    t = (len(pts) - 1) // 2
    F = [
        (
            sum((-1) ** (l + 1) * pts[l][0] for l in range(0, 2 * i)),
            sum((-1) ** l * pts[l][1] for l in range(2 * i, 2 * t + 1)),
        )
        for i in range(t + 1)
    ]
    G = [
        (
            sum((-1) ** l * pts[l][0] for l in range(0, 2 * j + 1)),
            sum((-1) ** (l + 1) * pts[l][1] for l in range(2 * j + 1, 2 * t + 1)),
        )
        for j in range(t + 1)
    ]
    for i in range(t + 1):
        if _add(F[i], G[i]) != pts[2 * i]:
            raise CrossCheckError("witness sums do not recover the blue points")
    if support is not None and not verify_htop_witness(F, G, support):
        raise CrossCheckError("witnesses fail the pairing conditions")
    return F, G


def verify_htop_witness(F, G, support: ExponentSet) -> bool:
    """Pairing certificate: diagonal sums outside, mixed sums inside.

    When it holds with r pairs, no realization of the ideal can use
    fewer than r valuations.
    """
    F = [tuple(p) for p in F]
    G = [tuple(p) for p in G]
    if len(F) != len(G):
        raise ShapeMismatch(f"{len(F)} vs {len(G)} witnesses")
    for i, f in enumerate(F):
        for j, g in enumerate(G):
            inside = region_member(_add(f, g), support)
            if inside == (i == j):
                return False
    return True


def realization_from_lines(lines, support: ExponentSet) -> Realization:
    """Monomial realization attached to a geometric realization.

    Each line of reduced slope -a/b and intercept c/e becomes the
    valuation (2ae, 2be) with threshold 2bc; the doubling bakes in the
    duality property.
    """
    pairs = lines.lines if isinstance(lines, GeometricRealization) else [tuple(l) for l in lines]
    pairs = [(Fraction(s), Fraction(b)) for s, b in pairs]
    if not check_geometric_realization(pairs, support):
        raise PreconditionViolated("lines do not realize the support")
    normals = []
    thresholds = []
    for s, b in pairs:
        mu, nu = -s.numerator, s.denominator
        beta, gamma = b.numerator, b.denominator
        normals.append((2 * mu * gamma, 2 * nu * gamma))
        thresholds.append(2 * nu * beta)
    d = newton_diagram(support)
    box = tuple(
        c + 1 for c in (max(v[0] for v in d.vertices), max(v[1] for v in d.vertices))
    )
    basis = sorted(
        p
        for p in itertools.product(range(box[0] + 1), range(box[1] + 1))
        if not region_member(p, support)
    )
    return spectrum_from_monomial_data(normals, tuple(thresholds), basis)

"""Valuation spectra, realizations and quasi-valuation verification.

A realization presents a pair ``N <= M`` by the value tuples of finitely
many (quasi-)valuations on a basis of ``M/N`` (algebra side, values in
``[0, d]``) and of ``M`` against the cap ``d`` (module side, values in
``[-d, 0]``).  Heights count tuples outside upper sets; everything the
homology engine needs is derived from those counts.
"""

from __future__ import annotations

import itertools
import random
import warnings
from fractions import Fraction

from .errors import (
    CrossCheckError,
    EmptySupport,
    Inconsistent,
    InvalidAction,
    InvalidAlgebra,
    PreconditionViolated,
    RankMismatch,
    ShapeMismatch,
)
from .lattice import (
    HeightTable,
    Point,
    Rectangle,
    WeightTable,
    check_cdp,
    p_leq,
)


def _clamp_tuple(t: Point, lo: Point, hi: Point, what: str) -> Point:
    clamped = tuple(min(max(x, a), b) for x, a, b in zip(t, lo, hi))
    if clamped != t:
        warnings.warn(f"{what} tuple {t} clamped to {clamped}", stacklevel=3)
    return clamped


class AlgebraSpectrum:
    """Multiset of value tuples of the quotient algebra basis."""

    __slots__ = ("caps", "tuples")

    def __init__(self, caps: Point, tuples):
        self.caps = tuple(caps)
        zero = tuple(0 for _ in self.caps)
        fixed = []
        for t in tuples:
            t = tuple(t)
            if len(t) != len(self.caps):
                raise RankMismatch(f"tuple {t} vs caps {self.caps}")
            fixed.append(_clamp_tuple(t, zero, self.caps, "algebra"))
        self.tuples = tuple(sorted(fixed))
        if self.tuples and self.tuples.count(zero) != 1:
            raise Inconsistent(
                f"algebra spectrum needs exactly one zero tuple, "
                f"got {self.tuples.count(zero)}"
            )

    @property
    def rank(self) -> int:
        return len(self.caps)

    def __len__(self) -> int:
        return len(self.tuples)


class ModuleSpectrum:
    """Multiset of value tuples of module generators missing from ``N``."""

    __slots__ = ("caps", "tuples")

    def __init__(self, caps: Point, tuples):
        self.caps = tuple(caps)
        zero = tuple(0 for _ in self.caps)
        lo = tuple(-c for c in self.caps)
        fixed = []
        for t in tuples:
            t = tuple(t)
            if len(t) != len(self.caps):
                raise RankMismatch(f"tuple {t} vs caps {self.caps}")
            t = _clamp_tuple(t, lo, zero, "module")
            if t == zero:
                raise Inconsistent(
                    "zero module tuple: the element already lies in the submodule"
                )
            fixed.append(t)
        self.tuples = tuple(sorted(fixed))

    @property
    def rank(self) -> int:
        return len(self.caps)

    def __len__(self) -> int:
        return len(self.tuples)


class Realization:
    """Algebra and module spectra sharing rank and caps."""

    __slots__ = ("algebra", "module")

    def __init__(self, algebra: AlgebraSpectrum, module: ModuleSpectrum):
        if algebra.caps != module.caps:
            raise ShapeMismatch(f"caps differ: {algebra.caps} vs {module.caps}")
        self.algebra = algebra
        self.module = module

    @property
    def rank(self) -> int:
        return self.algebra.rank

    @property
    def caps(self) -> Point:
        return self.algebra.caps

    @property
    def codim(self) -> int:
        return len(self.module)

    def d_cap(self) -> Point:
        """Componentwise extent of the module spectrum."""
        if not self.module.tuples:
            return tuple(0 for _ in self.caps)
        return tuple(
            max(-s[v] for s in self.module.tuples) for v in range(self.rank)
        )

    def to_json(self) -> dict:
        return {
            "kind": "spectrum",
            "caps": list(self.caps),
            "algebra": [list(t) for t in self.algebra.tuples],
            "module": [list(t) for t in self.module.tuples],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Realization":
        caps = tuple(data["caps"])
        return cls(
            AlgebraSpectrum(caps, data.get("algebra", [])),
            ModuleSpectrum(caps, data.get("module", [])),
        )


def hilbert_from_spectrum(tuples, level: Point) -> int:
    """Number of tuples not componentwise above ``level``."""
    level = tuple(level)
    n = 0
    for t in tuples:
        if len(t) != len(level):
            raise RankMismatch(f"tuple {t} vs level {level}")
        if not p_leq(level, t):
            n += 1
    return n


def dual_hilbert(module_tuples, level: Point) -> int:
    """Number of module tuples not componentwise above ``-level``."""
    neg = tuple(-x for x in level)
    return hilbert_from_spectrum(module_tuples, neg)


def double_realization(r: Realization) -> Realization:
    caps = tuple(2 * c for c in r.caps)
    return Realization(
        AlgebraSpectrum(caps, (tuple(2 * x for x in t) for t in r.algebra.tuples)),
        ModuleSpectrum(caps, (tuple(2 * x for x in t) for t in r.module.tuples)),
    )


def height_pair(r: Realization, hi: Point | None = None) -> tuple[HeightTable, HeightTable]:
    """Dense height tables on ``R(0, hi)``; ``hi`` defaults to ``d_cap``."""
    if hi is None:
        hi = r.d_cap()
    rect = Rectangle.based(hi)
    h = HeightTable.tabulate(
        rect, lambda p: hilbert_from_spectrum(r.algebra.tuples, p), monotone="increasing"
    )
    hc = HeightTable.tabulate(
        rect, lambda p: dual_hilbert(r.module.tuples, p), monotone="decreasing"
    )
    return h, hc


def condensed_axes(r: Realization, hi: Point) -> list[list[int]]:
    """Per axis, the level thresholds where some height can jump.

    Between consecutive kept values both heights are constant in that
    coordinate, so the sublevel complexes deformation-retract onto the
    condensed grid and all homology levels are preserved.
    """
    axes = []
    for v in range(r.rank):
        keep = {0, hi[v]}
        for t in r.algebra.tuples:
            a = t[v] + 1
            if a <= hi[v]:
                keep.add(a)
        for s in r.module.tuples:
            a = -s[v]
            if 0 < a <= hi[v]:
                keep.add(a)
        axes.append(sorted(keep))
    return axes


def realization_table(
    r: Realization, doubling: str = "auto"
) -> tuple[WeightTable, Realization, bool]:
    """Condensed weight table of a realization on ``R(0, d_cap)``.

    Returns the table (on grid indices), the realization actually used
    (doubled or not) and whether doubling happened.  ``doubling`` is one
    of ``auto``, ``always``, ``never``; with ``never`` a failure of the
    no-common-jump property raises :class:`PreconditionViolated`, with
    ``auto`` it triggers doubling.
    """
    if doubling not in ("auto", "always", "never"):
        raise ValueError(f"bad doubling mode {doubling!r}")

    def build(real: Realization) -> tuple[WeightTable, bool]:
        hi = real.d_cap()
        axes = condensed_axes(real, hi)
        rect = Rectangle.based(tuple(len(a) - 1 for a in axes))
        # Per axis and grid index, bitmasks of the spectrum tuples still
        # componentwise above the level; h/hc drop to popcounts then.
        alg = list(real.algebra.tuples)
        mod = list(real.module.tuples)
        na, nm = len(alg), len(mod)
        alg_masks = []
        mod_masks = []
        for v, ax in enumerate(axes):
            col = []
            for a in ax:
                m = 0
                for i, t in enumerate(alg):
                    if t[v] >= a:
                        m |= 1 << i
                col.append(m)
            alg_masks.append(col)
            col = []
            for a in ax:
                m = 0
                for i, s in enumerate(mod):
                    if -s[v] <= a:
                        m |= 1 << i
                col.append(m)
            mod_masks.append(col)
        full = (1 << na) - 1 if na else 0
        fullm = (1 << nm) - 1 if nm else 0
        hvals = {}
        hcvals = {}
        for p in rect.points():
            ma, mm = full, fullm
            for v, i in enumerate(p):
                ma &= alg_masks[v][i]
                mm &= mod_masks[v][i]
            hvals[p] = na - ma.bit_count()
            hcvals[p] = nm - mm.bit_count()
        h = HeightTable(rect, hvals, monotone="increasing")
        hc = HeightTable(rect, hcvals, monotone="decreasing")
        base = hc[rect.lo]
        wt = WeightTable(rect, {p: h[p] + hc[p] - base for p in rect.points()})
        return wt, check_cdp(h, hc)

    if doubling == "always":
        r = double_realization(r)
        wt, ok = build(r)
        if not ok:
            raise CrossCheckError("doubling failed to separate the jumps")
        return wt, r, True
    wt, ok = build(r)
    if ok:
        return wt, r, False
    if doubling == "never":
        raise PreconditionViolated(
            "heights jump together along an edge; doubling is required"
        )
    r2 = double_realization(r)
    wt, ok = build(r2)
    if not ok:
        raise CrossCheckError("doubling failed to separate the jumps")
    return wt, r2, True


def monomial_value(support_normal: Point, exponent: Point) -> int:
    """Monomial valuation of a single exponent under one normal."""
    if len(support_normal) != len(exponent):
        raise RankMismatch(f"{support_normal} vs {exponent}")
    return sum(n * x for n, x in zip(support_normal, exponent))


def spectrum_from_monomial_data(
    normals: list[Point], thresholds: Point, quotient_basis: list[Point]
) -> Realization:
    """Realization of a monomial-valuation ideal.

    ``quotient_basis`` lists the exponents of the monomials outside the
    ideal ``{f : v_i(f) >= d_i for all i}``; values are clamped to the
    thresholds on the algebra side and shifted by them on the module
    side.  Basis monomials that already satisfy every threshold would
    carry a zero module tuple and are rejected.
    """
    if not normals:
        raise EmptySupport("need at least one valuation")
    d = tuple(thresholds)
    if len(normals) != len(d):
        raise ShapeMismatch(f"{len(normals)} normals vs {len(d)} thresholds")
    alg = []
    mod = []
    for p in quotient_basis:
        vals = tuple(monomial_value(n, p) for n in normals)
        if all(v >= dv for v, dv in zip(vals, d)):
            raise Inconsistent(
                f"basis exponent {tuple(p)} lies in the ideal it should avoid"
            )
        alg.append(tuple(min(v, dv) for v, dv in zip(vals, d)))
        mod.append(tuple(min(max(v - dv, -dv), 0) for v, dv in zip(vals, d)))
    return Realization(AlgebraSpectrum(d, alg), ModuleSpectrum(d, mod))


def realization_from_weight_row(values: list[int]) -> Realization:
    """Recover the rank-one realization printed as a weight row.

    The row must start at 0; increments give the algebra multiset, the
    decrements the module one.  The recovered realization is required to
    reproduce the row exactly.
    """
    if not values:
        raise EmptySupport("empty weight row")
    if values[0] != 0:
        raise Inconsistent(f"weight row must start at 0, got {values[0]}")
    d = len(values) - 1
    alg: list[Point] = []
    mod: list[Point] = []
    for a in range(d):
        step = values[a + 1] - values[a]
        if step > 0:
            alg.extend([(a,)] * step)
        elif step < 0:
            mod.extend([(-(a + 1),)] * (-step))
    r = Realization(AlgebraSpectrum((d,), alg), ModuleSpectrum((d,), mod))
    h0c = len(mod)
    for ell in range(d + 1):
        w = (
            hilbert_from_spectrum(r.algebra.tuples, (ell,))
            + dual_hilbert(r.module.tuples, (ell,))
            - h0c
        )
        if w != values[ell]:
            raise Inconsistent(
                f"row is not realizable: mismatch {w} != {values[ell]} at {ell}"
            )
    return r


def truncate_valuation(values, d: int) -> list[int]:
    """Clamp valuation values into ``[0, d]``; ``None`` stands for infinity."""
    out = []
    for v in values:
        if v is None or v == float("inf"):
            out.append(d)
        else:
            out.append(min(max(int(v), 0), d))
    return out


# ---------------------------------------------------------------------------
# quasi-valuation presentations


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float) and x == int(x):
        return Fraction(int(x))
    raise Inconsistent(f"cannot read {x!r} as an exact rational")


Vec = dict[int, Fraction]


def _vec(entries) -> Vec:
    out: Vec = {}
    for i, x in enumerate(entries):
        f = _as_fraction(x)
        if f:
            out[i] = f
    return out


def _vec_add(a: Vec, b: Vec, scale: Fraction = Fraction(1)) -> Vec:
    out = dict(a)
    for i, x in b.items():
        y = out.get(i, Fraction(0)) + scale * x
        if y:
            out[i] = y
        else:
            out.pop(i, None)
    return out


class QuasiPresentation:
    """Finite presentation of a (possibly extended) quasi-valuation.

    ``mult[i][j]`` expresses the product of basis elements ``i`` and ``j``
    in the same basis; values live in ``[0, cap]`` with the unit at value
    0.  The optional module block carries an action table and values in
    ``[-cap, 0]``.
    """

    __slots__ = (
        "dim",
        "unit_index",
        "mult",
        "values",
        "cap",
        "module_dim",
        "action",
        "module_values",
    )

    def __init__(
        self,
        values: list[int],
        cap: int,
        unit_index: int,
        mult,
        module_values: list[int] | None = None,
        action=None,
    ):
        self.dim = len(values)
        self.values = list(values)
        self.cap = int(cap)
        self.unit_index = int(unit_index)
        self.mult = [[_vec(mult[i][j]) for j in range(self.dim)] for i in range(self.dim)]
        if module_values is None:
            self.module_dim = 0
            self.action = None
            self.module_values = []
        else:
            self.module_values = list(module_values)
            self.module_dim = len(module_values)
            if action is None:
                raise Inconsistent("module values without an action table")
            self.action = [
                [_vec(action[i][j]) for j in range(self.module_dim)]
                for i in range(self.dim)
            ]
        self._validate_values()

    def _validate_values(self) -> None:
        if not (0 <= self.unit_index < self.dim):
            raise Inconsistent(f"unit index {self.unit_index} out of range")
        if self.values[self.unit_index] != 0:
            raise InvalidAlgebra("unit must carry value 0")
        for q in self.values:
            if not (0 <= q <= self.cap):
                raise InvalidAlgebra(f"algebra value {q} outside [0, {self.cap}]")
        for s in self.module_values:
            if not (-self.cap <= s <= 0):
                raise InvalidAction(f"module value {s} outside [-{self.cap}, 0]")

    def validate_structure(self) -> None:
        """Commutativity, associativity, unitality; action compatibility."""
        o = self.dim
        e = self.unit_index
        for i in range(o):
            for j in range(i, o):
                if self.mult[i][j] != self.mult[j][i]:
                    raise InvalidAlgebra(f"products {i}*{j} and {j}*{i} differ")
        for j in range(o):
            expect = {j: Fraction(1)}
            if self.mult[e][j] != expect:
                raise InvalidAlgebra(f"unit fails on basis element {j}")
        for i in range(o):
            for j in range(i, o):
                for k in range(j, o):
                    lhs: Vec = {}
                    for l, c in self.mult[i][j].items():
                        lhs = _vec_add(lhs, self.mult[l][k], c)
                    rhs: Vec = {}
                    for l, c in self.mult[j][k].items():
                        rhs = _vec_add(rhs, self.mult[i][l], c)
                    if lhs != rhs:
                        raise InvalidAlgebra(f"associativity fails at ({i},{j},{k})")
        if self.action is None:
            return
        u = self.module_dim
        for j in range(u):
            if self.action[e][j] != {j: Fraction(1)}:
                raise InvalidAction(f"unit fails on module element {j}")
        for i in range(o):
            for j in range(o):
                for k in range(u):
                    lhs = {}
                    for l, c in self.mult[i][j].items():
                        lhs = _vec_add(lhs, self.action[l][k], c)
                    rhs = {}
                    for l, c in self.action[j][k].items():
                        rhs = _vec_add(rhs, self.action[i][l], c)
                    if lhs != rhs:
                        raise InvalidAction(f"action fails at ({i},{j},{k})")

    @classmethod
    def from_json(cls, data: dict) -> "QuasiPresentation":
        mod = data.get("module")
        return cls(
            values=list(data["values"]),
            cap=int(data["cap"]),
            unit_index=int(data.get("unit_index", 0)),
            mult=data["mult"],
            module_values=list(mod["values"]) if mod else None,
            action=mod["action"] if mod else None,
        )


class QuasiVerdict:
    """Outcome of a compatibility check.

    ``status`` is Verified, Refuted or Probabilistic.  A refutation
    carries the witness pair of coefficient vectors and the value levels
    at which the product escapes its prescribed span gap.
    """

    __slots__ = ("status", "levels", "witness", "trials", "detail")

    def __init__(self, status, levels=None, witness=None, trials=0, detail=""):
        self.status = status
        self.levels = levels
        self.witness = witness
        self.trials = trials
        self.detail = detail

    def __repr__(self) -> str:
        return f"QuasiVerdict({self.status!r}, levels={self.levels}, detail={self.detail!r})"

    def to_json(self) -> dict:
        out = {"status": self.status, "detail": self.detail}
        if self.levels is not None:
            out["levels"] = list(self.levels)
        if self.witness is not None:
            out["witness"] = [
                {str(i): [c.numerator, c.denominator] for i, c in side.items()}
                for side in self.witness
            ]
        if self.trials:
            out["trials"] = self.trials
        return out


def _qkernel_vector(rows: list[list[Fraction]], ncols: int):
    """A nonzero rational kernel vector of the matrix, or None."""
    mat = [row[:] for row in rows]
    pivots: dict[int, int] = {}
    rank = 0
    for c in range(ncols):
        pr = None
        for r in range(rank, len(mat)):
            if mat[r][c]:
                pr = r
                break
        if pr is None:
            continue
        mat[rank], mat[pr] = mat[pr], mat[rank]
        pv = mat[rank][c]
        mat[rank] = [x / pv for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                f = mat[r][c]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[rank])]
        pivots[c] = rank
        rank += 1
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    c0 = free[0]
    vec = [Fraction(0)] * ncols
    vec[c0] = Fraction(1)
    for c, r in pivots.items():
        vec[c] = -mat[r][c0]
    return vec


class _PairProblem:
    """Exclusion problem for one pair of value levels.

    ``tensor[t][i][j]`` is the coordinate at target index ``t`` of the
    product of the ``i``-th element of side A and the ``j``-th of side B.
    A violation is a pair of nonzero coefficient vectors whose product
    has no component at the target level.
    """

    def __init__(self, tensor: list[list[list[Fraction]]], na: int, nb: int):
        self.tensor = tensor
        self.na = na
        self.nb = nb

    def apply(self, u: list[Fraction], v: list[Fraction]) -> list[Fraction]:
        out = []
        for sheet in self.tensor:
            s = Fraction(0)
            for i, ui in enumerate(u):
                if not ui:
                    continue
                row = sheet[i]
                for j, vj in enumerate(v):
                    if vj:
                        s += ui * vj * row[j]
            out.append(s)
        return out

    def matrix_for_u(self, u: list[Fraction]) -> list[list[Fraction]]:
        return [
            [
                sum((u[i] * sheet[i][j] for i in range(self.na)), Fraction(0))
                for j in range(self.nb)
            ]
            for sheet in self.tensor
        ]

    def transposed(self) -> "_PairProblem":
        tensor = [
            [[sheet[i][j] for i in range(self.na)] for j in range(self.nb)]
            for sheet in self.tensor
        ]
        return _PairProblem(tensor, self.nb, self.na)


def _small_vectors(n: int):
    """Support <= 2 probe vectors, deterministic order."""
    for i in range(n):
        vec = [Fraction(0)] * n
        vec[i] = Fraction(1)
        yield vec
    coeffs = [Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(1, 2), Fraction(-1, 2)]
    for i in range(n):
        for j in range(i + 1, n):
            for c in coeffs:
                vec = [Fraction(0)] * n
                vec[i] = Fraction(1)
                vec[j] = c
                yield vec


def _decide_pair(prob: _PairProblem, rng: random.Random, trials: int):
    """(found_witness, u, v, exact) for one exclusion problem."""
    # cheap witness search
    for u in _small_vectors(prob.na):
        mat = prob.matrix_for_u(u)
        for v in _small_vectors(prob.nb):
            out = [sum((row[j] * v[j] for j in range(prob.nb)), Fraction(0)) for row in mat]
            if not any(out):
                return True, u, v, True
    if prob.na == 1 or prob.nb == 1:
        if prob.na == 1:
            mat = prob.matrix_for_u([Fraction(1)])
            v = _qkernel_vector(mat, prob.nb)
            if v is not None:
                return True, [Fraction(1)], v, True
            return False, None, None, True
        back = prob.transposed()
        found, u, v, exact = _decide_pair(back, rng, trials)
        return found, v, u, exact
    if prob.na == 2 or prob.nb == 2:
        res = _pencil_decide(prob if prob.na == 2 else prob.transposed())
        if res is not None:
            found, u, v = res
            if prob.na != 2 and found:
                u, v = v, u
            return found, u, v, True
    if prob.na * prob.nb <= 36 and len(prob.tensor) <= 16:
        res = _groebner_decide(prob)
        if res is not None:
            return res
    # randomized fallback
    for _ in range(trials):
        u = [Fraction(rng.randint(-9, 9)) for _ in range(prob.na)]
        v = [Fraction(rng.randint(-9, 9)) for _ in range(prob.nb)]
        if not any(u) or not any(v):
            continue
        if not any(prob.apply(u, v)):
            return True, u, v, True
    return False, None, None, False


def _pencil_decide(prob: _PairProblem):
    """Exact decision when side A is two-dimensional.

    The kernel condition degenerates exactly along the projective roots
    of the gcd of the maximal minors of the pencil ``x*M0 + M1``; only
    rational roots matter over the rational field.
    """
    from math import comb

    import sympy

    x = sympy.Symbol("x")
    rowsx = [
        [
            sympy.Rational(sheet[0][j]) * x + sympy.Rational(sheet[1][j])
            for j in range(prob.nb)
        ]
        for sheet in prob.tensor
    ]
    nrows, ncols = len(rowsx), prob.nb
    if nrows < ncols:
        # never full column rank: any u gives a kernel
        u = [Fraction(1), Fraction(0)]
        v = _qkernel_vector(prob.matrix_for_u(u), prob.nb)
        return True, u, v
    if comb(nrows, ncols) > 200:
        return None
    m = sympy.Matrix(rowsx)
    g = sympy.Integer(0)
    for rows in itertools.combinations(range(nrows), ncols):
        g = sympy.gcd(g, sympy.expand(m[list(rows), :].det()))
        if g.is_number and g != 0:
            break
    candidates: list[list[Fraction]] = [[Fraction(1), Fraction(0)]]
    if g == 0:
        # identically rank-deficient: any parameter value works
        candidates += [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(1)]]
    elif not g.is_number:
        _, factors = sympy.factor_list(sympy.Poly(g, x))
        for fac, _mult in factors:
            poly = sympy.Poly(fac, x)
            if poly.degree() == 1:
                a, b = poly.all_coeffs()
                root = sympy.Rational(-b, a)
                candidates.append([Fraction(int(root.p), int(root.q)), Fraction(1)])
    for u in candidates:
        v = _qkernel_vector(prob.matrix_for_u(u), prob.nb)
        if v is not None:
            return True, u, v
    return False, None, None


def _groebner_decide(prob: _PairProblem):
    """Chart-by-chart emptiness certificate over the algebraic closure."""
    import sympy

    us = sympy.symbols(f"u0:{prob.na}")
    vs = sympy.symbols(f"v0:{prob.nb}")
    eqs = []
    for sheet in prob.tensor:
        e = sympy.Integer(0)
        for i in range(prob.na):
            for j in range(prob.nb):
                c = sheet[i][j]
                if c:
                    e += sympy.Rational(c) * us[i] * vs[j]
        eqs.append(sympy.expand(e))
    any_chart_nonempty = False
    for i in range(prob.na):
        for j in range(prob.nb):
            subs = {us[k]: 0 for k in range(i)} | {us[i]: 1}
            subs |= {vs[k]: 0 for k in range(j)} | {vs[j]: 1}
            chart_eqs = [e.subs(subs) for e in eqs]
            chart_eqs = [e for e in chart_eqs if e != 0]
            vars_left = [s for s in us[i + 1 :] + vs[j + 1 :]]
            if not chart_eqs:
                any_chart_nonempty = True
                continue
            if not vars_left:
                if all(e == 0 for e in chart_eqs):
                    any_chart_nonempty = True
                continue
            try:
                gb = sympy.groebner(chart_eqs, *vars_left, order="grevlex")
            except Exception:
                return None
            if list(gb.exprs) != [sympy.Integer(1)]:
                any_chart_nonempty = True
    if not any_chart_nonempty:
        return False, None, None, True
    # solutions exist over the closure; this certificate alone cannot
    # exhibit a rational witness
    return None


def _exclusion_problem(
    tensor_rows, a_idx: list[int], b_idx: list[int], target_idx: list[int]
) -> _PairProblem:
    tensor = []
    for t in target_idx:
        sheet = [
            [tensor_rows(i, j).get(t, Fraction(0)) for j in b_idx] for i in a_idx
        ]
        tensor.append(sheet)
    return _PairProblem(tensor, len(a_idx), len(b_idx))


def verify_quasi(
    p: QuasiPresentation, seed: int = 0, trials: int = 200
) -> QuasiVerdict:
    """Check that the tabulated values define a quasi-valuation.

    For every pair of value levels the product of the exact-value spans
    must land in the span at the capped sum and, when the capped sum is
    below the cap, must not sink entirely into the next span.  The first
    condition is decided on basis pairs; the second exactly where the
    dimensions allow and by randomized search beyond that.
    """
    p.validate_structure()
    rng = random.Random(seed)
    d = p.cap
    by_value: dict[int, list[int]] = {}
    for i, q in enumerate(p.values):
        by_value.setdefault(q, []).append(i)
    levels = sorted(by_value)
    any_probabilistic = False
    for ai, a in enumerate(levels):
        for b in levels[ai:]:
            A, B = by_value[a], by_value[b]
            t = min(a + b, d)
            # inclusion on basis pairs settles inclusion on spans
            for i in A:
                for j in B:
                    for l, c in p.mult[i][j].items():
                        if c and p.values[l] < t:
                            return QuasiVerdict(
                                "Refuted",
                                levels=(a, b),
                                witness=({i: Fraction(1)}, {j: Fraction(1)}),
                                detail=f"product of {i} and {j} has a component at value {p.values[l]} < {t}",
                            )
            if t == d:
                continue
            target = [l for l in range(p.dim) if p.values[l] == t]
            if not target:
                return QuasiVerdict(
                    "Refuted",
                    levels=(a, b),
                    witness=({A[0]: Fraction(1)}, {B[0]: Fraction(1)}),
                    detail=f"no basis value equals {t}; every product overshoots",
                )
            prob = _exclusion_problem(
                lambda i, j: p.mult[i][j], A, B, target
            )
            found, u, v, exact = _decide_pair(prob, rng, trials)
            if found:
                wu = {A[i]: c for i, c in enumerate(u) if c}
                wv = {B[j]: c for j, c in enumerate(v) if c}
                return QuasiVerdict(
                    "Refuted",
                    levels=(a, b),
                    witness=(wu, wv),
                    detail=f"span product at levels ({a},{b}) sinks below value {t}",
                )
            if not exact:
                any_probabilistic = True
    if any_probabilistic:
        return QuasiVerdict("Probabilistic", trials=trials)
    return QuasiVerdict("Verified")


def verify_extended_quasi(
    p: QuasiPresentation, seed: int = 0, trials: int = 200
) -> QuasiVerdict:
    """Check the module half of an extended quasi-valuation.

    Runs the algebra check first and reports its refutation unchanged.
    The module pairing uses the capped negative sum and the same span
    gap conditions against the action table.
    """
    if p.action is None:
        raise Inconsistent("presentation has no module block")
    base = verify_quasi(p, seed=seed, trials=trials)
    if base.status == "Refuted":
        return base
    rng = random.Random(seed + 1)
    d = p.cap
    by_value: dict[int, list[int]] = {}
    for i, q in enumerate(p.values):
        by_value.setdefault(q, []).append(i)
    by_mvalue: dict[int, list[int]] = {}
    for j, s in enumerate(p.module_values):
        by_mvalue.setdefault(s, []).append(j)
    any_probabilistic = base.status == "Probabilistic"
    for a in sorted(by_value):
        for b in sorted(by_mvalue):
            A, B = by_value[a], by_mvalue[b]
            t = min(a + b, 0)
            for i in A:
                for j in B:
                    for l, c in p.action[i][j].items():
                        if c and p.module_values[l] < t:
                            return QuasiVerdict(
                                "Refuted",
                                levels=(a, b),
                                witness=({i: Fraction(1)}, {j: Fraction(1)}),
                                detail=f"action of {i} on {j} has a component at value {p.module_values[l]} < {t}",
                            )
            if t == 0:
                continue
            target = [l for l in range(p.module_dim) if p.module_values[l] == t]
            if not target:
                return QuasiVerdict(
                    "Refuted",
                    levels=(a, b),
                    witness=({A[0]: Fraction(1)}, {B[0]: Fraction(1)}),
                    detail=f"no module value equals {t}; every product overshoots",
                )
            prob = _exclusion_problem(lambda i, j: p.action[i][j], A, B, target)
            found, u, v, exact = _decide_pair(prob, rng, trials)
            if found:
                wu = {A[i]: c for i, c in enumerate(u) if c}
                wv = {B[j]: c for j, c in enumerate(v) if c}
                return QuasiVerdict(
                    "Refuted",
                    levels=(a, b),
                    witness=(wu, wv),
                    detail=f"span action at levels ({a},{b}) sinks below value {t}",
                )
            if not exact:
                any_probabilistic = True
    if any_probabilistic:
        return QuasiVerdict("Probabilistic", trials=trials)
    return QuasiVerdict("Verified")


def realization_from_quasi(p: QuasiPresentation) -> Realization:
    """Rank-one realization from the value multisets of a presentation."""
    zeroes = [i for i, q in enumerate(p.values) if q == 0]
    if len(zeroes) != 1:
        raise InvalidAlgebra(
            f"need exactly one basis element of value 0, got {len(zeroes)}"
        )
    caps = (p.cap,)
    alg = [(q,) for q in p.values]
    mod = [(s,) for s in p.module_values if s != 0]
    return Realization(AlgebraSpectrum(caps, alg), ModuleSpectrum(caps, mod))

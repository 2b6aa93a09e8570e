"""Sparse exact integer linear algebra.

Columns are dicts ``row -> nonzero int``.  Three consumers:

* persistence reduction of a filtered boundary matrix (rational ranks,
  so columns may be rescaled);
* an incremental echelon form of an integer column lattice (no
  rescaling; the lattice itself matters) for per-level Smith data;
* Smith invariant factors of small dense cores.
"""

from __future__ import annotations

from math import gcd

Col = dict[int, int]


def combine(a: int, col_a: Col, b: int, col_b: Col) -> Col:
    """Sparse ``a*col_a + b*col_b``."""
    out = {} if a == 0 else {r: a * v for r, v in col_a.items()}
    if b != 0:
        for r, v in col_b.items():
            w = out.get(r, 0) + b * v
            if w:
                out[r] = w
            else:
                out.pop(r, None)
    return out


def normalize(col: Col) -> Col:
    """Divide by the gcd of the entries; changes the lattice, keeps the span."""
    if not col:
        return col
    g = 0
    for v in col.values():
        g = gcd(g, v)
        if g == 1:
            return col
    return {r: v // g for r, v in col.items()}


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with g = s*a + t*b, g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def reduce_persistence(
    boundaries: list[Col], dims: list[int] | None = None
) -> tuple[list[tuple[int, int]], list[int]]:
    """Column reduction of a filtered boundary matrix.

    ``boundaries[j]`` holds the boundary of cell ``j`` over cell indices
    ``< j`` in filtration order.  Returns the persistence pairs
    ``(creator, destroyer)`` and the list of unpaired creators.

    With ``dims`` the reduction runs one dimension at a time from the
    top and clears paired creators: their columns are rational cycles,
    so skipping them changes nothing but the work done.  Column
    additions never mix dimensions, hence the passes are equivalent to
    one interleaved sweep.
    """
    n = len(boundaries)
    low_owner: dict[int, int] = {}
    reduced: dict[int, Col] = {}
    pairs: list[tuple[int, int]] = []
    paired = [False] * n

    def reduce_column(j: int) -> None:
        col = dict(boundaries[j])
        while col:
            low = max(col)
            owner = low_owner.get(low)
            if owner is None:
                break
            piv = reduced[owner]
            x, y = piv[low], col[low]
            g = gcd(x, y)
            a, b = x // g, y // g
            # col <- a*col - b*piv, in place; rescaling is fine here
            # because only ranks are read off, never the lattice
            if a != 1:
                for r in col:
                    col[r] *= a
            if b == 1:
                for r, v in piv.items():
                    w = col.get(r, 0) - v
                    if w:
                        col[r] = w
                    else:
                        col.pop(r, None)
            elif b == -1:
                for r, v in piv.items():
                    w = col.get(r, 0) + v
                    if w:
                        col[r] = w
                    else:
                        col.pop(r, None)
            else:
                for r, v in piv.items():
                    w = col.get(r, 0) - b * v
                    if w:
                        col[r] = w
                    else:
                        col.pop(r, None)
            if a != 1 and col:
                g = 0
                for v in col.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                if g > 1:
                    for r in col:
                        col[r] //= g
        if col:
            low = max(col)
            low_owner[low] = j
            reduced[j] = col
            pairs.append((low, j))
            paired[low] = True
            paired[j] = True

    if dims is None:
        for j in range(n):
            reduce_column(j)
    else:
        for q in range(max(dims, default=0), 0, -1):
            for j in range(n):
                if dims[j] == q and not paired[j]:
                    reduce_column(j)
    essentials = [j for j in range(n) if not paired[j]]
    return pairs, essentials


class EchelonLattice:
    """Integer column lattice kept in echelon form by largest row index.

    Insertions never rescale columns, so the stored basis spans exactly
    the lattice generated by the inserted columns.
    """

    __slots__ = ("basis", "_nonunit")

    def __init__(self) -> None:
        self.basis: dict[int, Col] = {}
        self._nonunit = 0

    def insert(self, col: Col) -> bool:
        """Add one column; returns True when the rank grew."""
        col = dict(col)
        basis = self.basis
        while col:
            r = max(col)
            piv = basis.get(r)
            if piv is None:
                basis[r] = col
                if col[r] not in (1, -1):
                    self._nonunit += 1
                return True
            x, y = piv[r], col[r]
            if y % x == 0:
                # col <- col - (y//x)*piv, in place
                q = y // x
                for k, v in piv.items():
                    w = col.get(k, 0) - q * v
                    if w:
                        col[k] = w
                    else:
                        col.pop(k, None)
            else:
                # pivot shrinks to gcd(x, y); x was no unit or the
                # divisibility branch would have caught y
                g, s, t = _ext_gcd(x, y)
                basis[r] = combine(s, piv, t, col)
                if g == 1:
                    self._nonunit -= 1
                col = combine(x // g, col, -(y // g), piv)
        return False

    @property
    def rank(self) -> int:
        return len(self.basis)

    def pivots_all_units(self) -> bool:
        return self._nonunit == 0

    def invariant_factors(self) -> list[int]:
        """Invariant factors of the basis matrix, 1s included."""
        if self.pivots_all_units():
            # unit-pivot echelon spans a direct summand
            return [1] * len(self.basis)
        cols = [dict(c) for c in self.basis.values()]
        return invariant_factors_of_columns(cols)

    def nontrivial_factors(self) -> list[int]:
        if self._nonunit == 0:
            return []
        return [d for d in self.invariant_factors() if d != 1]


def invariant_factors_of_columns(cols: list[Col]) -> list[int]:
    """Smith invariant factors of the integer matrix with these columns."""
    rows: dict[int, dict[int, int]] = {}
    for c, col in enumerate(cols):
        for r, v in col.items():
            if v:
                rows.setdefault(r, {})[c] = v
    col_index: dict[int, set[int]] = {}
    for r, entries in rows.items():
        for c in entries:
            col_index.setdefault(c, set()).add(r)

    def drop(r: int, c: int) -> None:
        entries = rows.get(r)
        if entries and c in entries:
            del entries[c]
            if not entries:
                del rows[r]
            col_index[c].discard(r)
            if not col_index[c]:
                del col_index[c]

    def put(r: int, c: int, v: int) -> None:
        if v:
            rows.setdefault(r, {})[c] = v
            col_index.setdefault(c, set()).add(r)
        else:
            drop(r, c)

    def add_row(dst: int, src: int, mult: int) -> None:
        for c, v in list(rows.get(src, {}).items()):
            put(dst, c, rows.get(dst, {}).get(c, 0) + mult * v)

    def add_col(dst: int, src: int, mult: int) -> None:
        for r in list(col_index.get(src, ())):
            v = rows[r][src]
            put(r, dst, rows.get(r, {}).get(dst, 0) + mult * v)

    factors: list[int] = []
    while rows:
        # smallest magnitude first keeps the Euclid loops short
        r0, c0, best = 0, 0, 0
        for r, entries in rows.items():
            for c, v in entries.items():
                if best == 0 or abs(v) < best:
                    r0, c0, best = r, c, abs(v)
                    if best == 1:
                        break
            if best == 1:
                break
        while True:
            p = rows[r0][c0]
            moved = False
            for c in list(rows[r0].keys()):
                if c == c0:
                    continue
                v = rows[r0][c]
                q = v // p
                if q:
                    add_col(c, c0, -q)
                if rows.get(r0, {}).get(c, 0):
                    c0, moved = c, True
                    break
            if moved:
                continue
            for r in list(col_index.get(c0, ())):
                if r == r0:
                    continue
                v = rows[r][c0]
                q = v // p
                if q:
                    add_row(r, r0, -q)
                if rows.get(r, {}).get(c0, 0):
                    r0, moved = r, True
                    break
            if not moved:
                break
        p = abs(rows[r0][c0])
        factors.append(p)
        for c in list(rows.get(r0, {}).keys()):
            drop(r0, c)
        for r in list(col_index.get(c0, ())):
            drop(r, c0)

    # enforce divisibility: per-prime valuations get pairwise sorted
    changed = True
    while changed:
        changed = False
        for i in range(len(factors)):
            for j in range(i + 1, len(factors)):
                a, b = factors[i], factors[j]
                if b % a:
                    g = gcd(a, b)
                    factors[i], factors[j] = g, a * b // g
                    changed = True
    return sorted(factors)


def rank_of_columns(cols: list[Col]) -> int:
    lat = EchelonLattice()
    for c in cols:
        lat.insert(c)
    return lat.rank

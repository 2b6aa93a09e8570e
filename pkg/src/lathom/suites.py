"""Randomized executable checks of the structural theorems.

Each suite draws small random inputs, runs the engine on them and tests
one theorem's assertion exactly.  Counterexamples are collected with
enough data to replay the trial, never raised; the caller decides what a
failing suite means.
"""

from __future__ import annotations

import itertools
import random
from math import gcd

from .curves import ValueSemigroup, analytic_weight, delta, hilbert_from_semigroup
from .errors import UnknownSuite
from .homology import (
    homdim,
    homology_of_table,
    kunneth_product,
    lattice_homology,
    modules_isomorphic,
    nonpositivity_report,
)
from .newton import (
    ExponentSet,
    closure_realization,
    closure_support,
    linedim,
    newton_diagram,
)
from .valuations import (
    AlgebraSpectrum,
    ModuleSpectrum,
    QuasiPresentation,
    Realization,
    realization_table,
    spectrum_from_monomial_data,
    verify_quasi,
)


def _report(suite: str, seed: int, count: int, failures: list) -> dict:
    return {
        "suite": suite,
        "seed": seed,
        "count": count,
        "passed": not failures,
        "failures": failures,
    }


def _random_support(
    rng: random.Random, span: int = 5, extra: int = 3, m: int = 2
) -> ExponentSet:
    pts = set()
    for i in range(m):
        p = [0] * m
        p[i] = rng.randint(1, span)
        pts.add(tuple(p))
    for _ in range(rng.randint(0, extra)):
        p = tuple(rng.randint(1, max(1, span - 1)) for _ in range(m))
        pts.add(p)
    return ExponentSet.of(pts)


def _random_space_support(rng: random.Random) -> ExponentSet:
    """Small 3-variable supports whose diagonal plane is usually cut."""
    corners = [(rng.randint(2, 3), 0, 0), (0, rng.randint(2, 3), 0), (0, 0, rng.randint(1, 2))]
    pool = [(1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    extras = rng.sample(pool, rng.randint(1, 2))
    return ExponentSet.of(corners + extras)


def _principal_realization(d: int) -> Realization:
    return Realization(
        AlgebraSpectrum((d,), [(t,) for t in range(d)]),
        ModuleSpectrum((d,), [(-t,) for t in range(1, d + 1)]),
    )


def _random_semigroup(rng: random.Random, span: int = 11) -> ValueSemigroup:
    g1 = rng.randint(2, 5)
    g2 = rng.randint(g1 + 1, span)
    while gcd(g1, g2) != 1:
        g2 = rng.randint(g1 + 1, span)
    gens = [g1, g2]
    if rng.random() < 0.5:
        gens.append(rng.randint(g1 + 1, g1 * g2))
    return ValueSemigroup.from_generators(gens)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _redundant_valuation(diagram) -> tuple:
    """An extra (normal, threshold) implied by the facet valuations.

    The sum of two facets sharing a minimizing vertex keeps its level
    attained; a lone facet is simply doubled.
    """
    candidates = set(diagram.vertices)
    for (n1, l1), (n2, l2) in itertools.combinations(diagram.facets, 2):
        for v in candidates:
            if _dot(n1, v) == l1 and _dot(n2, v) == l2:
                return tuple(a + b for a, b in zip(n1, n2)), l1 + l2
    n, lv = diagram.facets[0]
    return tuple(2 * c for c in n), 2 * lv


def independence_suite(seed: int = 0, count: int = 20) -> dict:
    """Homology does not depend on the presenting valuation set.

    Random closed planar ideals are realized by their facet valuations,
    by the same set plus a redundant valuation, and with the valuation
    order permuted; every fifth trial compares a principal one-variable
    ideal against its duplicated-coordinate presentation instead.
    """
    rng = random.Random(seed)
    failures = []
    for trial in range(count):
        if trial % 5 == 4:
            d = rng.randint(2, 6)
            doubled = Realization(
                AlgebraSpectrum((d, d), [(t, t) for t in range(d)]),
                ModuleSpectrum((d, d), [(-t, -t) for t in range(1, d + 1)]),
            )
            m1, _ = lattice_homology(_principal_realization(d), "auto")
            m2, _ = lattice_homology(doubled, "auto")
            if not modules_isomorphic(m1, m2):
                failures.append({"trial": trial, "variant": "duplicated coordinate", "d": d})
            continue
        s = _random_support(rng, span=4, extra=2)
        diagram = newton_diagram(s)
        box = tuple(max(p[i] for p in s.points) + 1 for i in range(s.m))
        basis = sorted(
            p
            for p in itertools.product(*(range(b + 1) for b in box))
            if not diagram.member(p)
        )
        normals = [n for n, _lv in diagram.facets]
        levels = tuple(lv for _n, lv in diagram.facets)
        base, _ = lattice_homology(closure_realization(s), "auto")
        extra_n, extra_l = _redundant_valuation(diagram)
        variants = {
            "redundant valuation": spectrum_from_monomial_data(
                normals + [extra_n], levels + (extra_l,), basis
            ),
            "permuted valuations": spectrum_from_monomial_data(
                normals[::-1], levels[::-1], basis
            ),
        }
        for name, r in variants.items():
            m, _ = lattice_homology(r, "auto")
            if not modules_isomorphic(base, m):
                failures.append(
                    {"trial": trial, "variant": name, "support": sorted(s.points)}
                )
    return _report("independence", seed, count, failures)


def nonpositivity_suite(seed: int = 0, count: int = 30) -> dict:
    """Reduced homology of closed ideals and curve tables sits at n <= 0."""
    rng = random.Random(seed)
    failures = []
    for trial in range(count):
        kind = trial % 3
        if kind == 0:
            s = _random_support(rng, span=6)
            m, _ = lattice_homology(closure_realization(s), "auto")
            label = {"support": sorted(s.points)}
        elif kind == 1:
            s = _random_space_support(rng)
            m, _ = lattice_homology(closure_realization(s), "auto")
            label = {"support": sorted(s.points)}
        else:
            sg = _random_semigroup(rng)
            h = hilbert_from_semigroup(sg)
            m, _ = homology_of_table(analytic_weight(h), codim=delta(sg))
            label = {"semigroup": sorted(sg.elements)}
        rep = nonpositivity_report(m)
        if not rep["holds"]:
            failures.append({"trial": trial, **label, "violations": rep["violations"]})
    return _report("nonpositivity", seed, count, failures)


def homdim_suite(seed: int = 0, count: int = 50) -> dict:
    """Top homological degree of a closed planar ideal is linedim - 1."""
    rng = random.Random(seed)
    failures = []
    for trial in range(count):
        s = _random_support(rng, span=7)
        lines, _kerb, _geo = linedim(closure_support(s))
        m, _ = lattice_homology(closure_realization(s), "auto")
        hd = homdim(m)
        if hd != lines - 1:
            failures.append(
                {
                    "trial": trial,
                    "support": sorted(s.points),
                    "lines": lines,
                    "homdim": hd,
                }
            )
    return _report("homdim", seed, count, failures)


def _bar_key(bar):
    b, d = bar
    return (b, d is not None, d if d is not None else 0)


def _bars_of(m) -> dict:
    return {
        q: sorted(bars, key=_bar_key) for q, bars in (m.bars or {}).items() if bars
    }


def _bar_convolution(m1, m2) -> dict:
    """Bar decomposition of the product module from the factor bars.

    Finite bars contribute a min-length bar one degree up the pair of
    births, and the torsion-free pairing puts a min-length bar at the
    sum of the later endpoints one degree higher still; infinite bars
    just shift the other factor.
    """
    out: dict[int, list] = {}

    def add(q, bar):
        out.setdefault(q, []).append(bar)

    for q1, bars1 in (m1.bars or {}).items():
        for q2, bars2 in (m2.bars or {}).items():
            for b1, d1 in bars1:
                for b2, d2 in bars2:
                    if d1 is None and d2 is None:
                        add(q1 + q2, (b1 + b2, None))
                    elif d1 is None:
                        add(q1 + q2, (b1 + b2, b1 + d2))
                    elif d2 is None:
                        add(q1 + q2, (b1 + b2, b2 + d1))
                    else:
                        l1, l2 = d1 - b1, d2 - b2
                        lo, hi = min(l1, l2), max(l1, l2)
                        add(q1 + q2, (b1 + b2, b1 + b2 + lo))
                        add(q1 + q2 + 1, (b1 + b2 + hi, b1 + b2 + hi + lo))
    return {q: sorted(bars, key=_bar_key) for q, bars in out.items() if bars}


def _factor_table(rng: random.Random, planar: bool):
    if planar:
        s = _random_support(rng, span=3, extra=2)
        wt, _used, _doubled = realization_table(closure_realization(s), "auto")
        return wt, {"support": sorted(s.points)}
    if rng.random() < 0.5:
        d = rng.randint(1, 6)
        wt, _used, _doubled = realization_table(_principal_realization(d), "auto")
        return wt, {"principal": d}
    sg = _random_semigroup(rng, span=7)
    return analytic_weight(hilbert_from_semigroup(sg)), {
        "semigroup": sorted(sg.elements)
    }


def kunneth_suite(seed: int = 0, count: int = 30) -> dict:
    """Engine homology of a sum table equals the bar-algebra product.

    Factors are one-variable tables, every third trial pairing one with
    a small planar ideal table; all factors here are torsion-free, so
    the product must be too and its bars must match the convolution.
    """
    rng = random.Random(seed)
    failures = []
    for trial in range(count):
        w1, lab1 = _factor_table(rng, planar=False)
        w2, lab2 = _factor_table(rng, planar=trial % 3 == 2)
        m1, _ = homology_of_table(w1)
        m2, _ = homology_of_table(w2)
        prod, _ = homology_of_table(kunneth_product(w1, w2))
        label = {"trial": trial, "first": lab1, "second": lab2}
        if prod.has_torsion() or m1.has_torsion() or m2.has_torsion():
            failures.append({**label, "reason": "unexpected torsion"})
            continue
        got, want = _bars_of(prod), _bar_convolution(m1, m2)
        if got != want:
            failures.append({**label, "engine": got, "convolution": want})
    return _report("kunneth", seed, count, failures)


def _truncated_semigroup_algebra(g1: int, g2: int, cap: int) -> tuple[list, list, int]:
    """Order-valuation data of k[t^g1, t^g2] cut at twice the cap.

    Returns values, the dense multiplication table and the basis index
    of t^(2 g1), the entry the broken variant re-values.
    """
    bound = 2 * cap
    hit = [False] * (bound + 1)
    hit[0] = True
    for s in range(1, bound + 1):
        hit[s] = (s >= g1 and hit[s - g1]) or (s >= g2 and hit[s - g2])
    elems = [s for s in range(bound + 1) if hit[s]]
    index = {s: i for i, s in enumerate(elems)}
    n = len(elems)
    mult = []
    for a in elems:
        row = []
        for b in elems:
            out = [0] * n
            if a + b <= bound:
                out[index[a + b]] = 1
            row.append(out)
        mult.append(row)
    values = [min(s, cap) for s in elems]
    return values, mult, index[2 * g1]


def quasi_suite(seed: int = 0, count: int = 20) -> dict:
    """Truncated semigroup algebras verify; a bumped value refutes.

    The clean presentation has one basis element per value below the
    cap, so every exclusion problem is settled exactly.  Re-valuing
    t^(2 g1) one step up empties the target span of the (g1, g1) pair
    and must be refuted there.
    """
    rng = random.Random(seed)
    failures = []
    for trial in range(count):
        g1 = rng.randint(2, 4)
        g2 = rng.randint(g1 + 1, 9)
        while gcd(g1, g2) != 1:
            g2 = rng.randint(g1 + 1, 9)
        cap = rng.randint(2 * g1 + 1, 2 * g1 + 6)
        label = {"trial": trial, "generators": [g1, g2], "cap": cap}
        values, mult, bump_at = _truncated_semigroup_algebra(g1, g2, cap)
        clean = QuasiPresentation(values=values, cap=cap, unit_index=0, mult=mult)
        verdict = verify_quasi(clean)
        if verdict.status != "Verified":
            failures.append({**label, "clean": verdict.to_json()})
            continue
        bumped = list(values)
        bumped[bump_at] += 1
        broken = QuasiPresentation(values=bumped, cap=cap, unit_index=0, mult=mult)
        verdict = verify_quasi(broken)
        if verdict.status != "Refuted" or verdict.levels != (g1, g1):
            failures.append({**label, "broken": verdict.to_json()})
    return _report("quasi", seed, count, failures)


SUITES = {
    "independence": independence_suite,
    "nonpositivity": nonpositivity_suite,
    "homdim": homdim_suite,
    "kunneth": kunneth_suite,
    "quasi": quasi_suite,
}


def run_suite(name: str, seed: int = 0, count: int | None = None) -> dict:
    if name not in SUITES:
        raise UnknownSuite(
            f"no suite named {name!r}; choose from {', '.join(sorted(SUITES))}"
        )
    if count is None:
        return SUITES[name](seed=seed)
    return SUITES[name](seed=seed, count=count)

"""Batch front-end: parse input files, dispatch computations, emit reports.

Exit codes: 0 success, 1 parse or usage error, 2 internal invariant
failure, 3 verification-suite counterexample.  All output is UTF-8 JSON
except the ASCII and DOT renders.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from time import perf_counter

from .curves import (
    analytic_weight,
    curve_hilbert_from_json,
    curve_semigroup_from_json,
    delta,
    dual_height,
    gorenstein_test,
    hilbert_from_semigroup,
    local_minima,
    semigroup_from_hilbert,
    semigroup_module_from_heights,
)
from .errors import CrossCheckError, LathomError, ParseError, UnknownSuite
from .homology import (
    GradedRoot,
    euler_by_weights,
    euler_characteristic,
    graded_root,
    homdim,
    homology_of_table,
    kunneth_product,
    modules_isomorphic,
    nonpositivity_report,
)
from .lattice import WeightTable, check_cdp, check_matroid, weight_from_pair
from .newton import (
    ExponentSet,
    adjoint_support,
    closure_realization,
    closure_support,
    comb_conductor,
    is_closed,
    linedim,
    newton_diagram,
    pset,
    verify_kerb,
    witness_monomials,
)
from .suites import run_suite
from .valuations import (
    QuasiPresentation,
    Realization,
    height_pair,
    realization_from_quasi,
    realization_from_weight_row,
    realization_table,
    verify_extended_quasi,
    verify_quasi,
)

# mirror checks on dense realization tables stop above this many points
_SYMMETRY_POINT_CAP = 200_000


@dataclass
class Computed:
    """One input resolved to the table the engine runs on."""

    wt: WeightTable
    codim: int | None
    route: str
    used: Realization | None = None
    doubled: bool | None = None
    cdp: bool | None = None
    echo: dict = field(default_factory=dict)


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return data


def _spectrum_route(r: Realization, doubling: str, route: str, echo: dict) -> Computed:
    wt, used, doubled = realization_table(r, doubling)
    if doubling == "always":
        cdp = _dense_cdp(r)
    else:
        # auto doubles exactly when the pair check fails, never refuses
        cdp = not doubled if doubling == "auto" else True
    return Computed(
        wt, r.codim, route, used=used, doubled=doubled, cdp=cdp, echo=echo
    )


def _dense_cdp(r: Realization) -> bool | None:
    size = 1
    for d in r.d_cap():
        size *= d + 1
    if size > _SYMMETRY_POINT_CAP:
        return None
    h, hc = height_pair(r)
    return check_cdp(h, hc)


def _compute_input(data: dict, doubling: str, seed: int) -> Computed:
    kind = data.get("kind")
    if kind == "spectrum":
        r = Realization.from_json(data)
        if "rank" in data and int(data["rank"]) != r.rank:
            raise ParseError(f"rank {data['rank']} does not match caps {r.caps}")
        return _spectrum_route(r, doubling, "spectrum", {})
    if kind == "monomial_ideal":
        gens = data.get("generators")
        if not gens:
            raise ParseError("monomial_ideal input needs generators")
        s = ExponentSet.of(gens)
        if "vars" in data and int(data["vars"]) != s.m:
            raise ParseError(f"vars {data['vars']} does not match exponent length {s.m}")
        r = closure_realization(s)
        echo = {"already_closed": is_closed(s)}
        return _spectrum_route(r, doubling, "monomial_ideal", echo)
    if kind == "quasi":
        p = QuasiPresentation.from_json(data)
        if "dim" in data and int(data["dim"]) != p.dim:
            raise ParseError(f"dim {data['dim']} does not match {p.dim} basis elements")
        check = verify_extended_quasi if p.action is not None else verify_quasi
        verdict = check(p, seed=seed)
        if verdict.status == "Refuted":
            raise ParseError(
                f"presentation is not a quasi-valuation: {verdict.detail}"
            )
        r = realization_from_quasi(p)
        return _spectrum_route(r, doubling, "quasi", {"verdict": verdict.to_json()})
    if kind in ("semigroup", "branch_gens", "two_branch"):
        h = curve_hilbert_from_json(data)
        c = h.rect.hi
        codim = sum(c) - h[c]
        wt = analytic_weight(h)
        return Computed(
            wt,
            codim,
            "curve",
            cdp=check_cdp(h, dual_height(h)),
            echo={"conductor": list(c), "delta": codim},
        )
    if kind is None and {"lo", "hi", "values"} <= data.keys():
        wt = WeightTable.from_json(data)
        codim = None
        echo: dict = {}
        if wt.rect.rank == 1:
            row = [wt[(i,)] for i in range(wt.rect.lo[0], wt.rect.hi[0] + 1)]
            try:
                r = realization_from_weight_row(row)
            except LathomError:
                pass
            else:
                codim = r.codim
                echo["realization"] = r.to_json()
        return Computed(wt, codim, "table", echo=echo)
    raise ParseError(f"unrecognized input kind {kind!r}")


def _mirror_symmetric(wt: WeightTable) -> bool:
    lo, hi = wt.rect.lo, wt.rect.hi
    return all(
        wt[p] == wt[tuple(a + b - c for a, b, c in zip(lo, hi, p))]
        for p in wt.rect.points()
    )


def _symmetry(comp: Computed) -> bool | None:
    if comp.used is None:
        return _mirror_symmetric(comp.wt)
    size = 1
    for d in comp.used.d_cap():
        size *= d + 1
    if size > _SYMMETRY_POINT_CAP:
        return None
    h, hc = height_pair(comp.used)
    return _mirror_symmetric(weight_from_pair(h, hc))


_LEVELS_RE = re.compile(r"(-?\d+)\.\.(-?\d+)")


def _parse_levels(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    m = _LEVELS_RE.fullmatch(text)
    if not m:
        raise ParseError(f"bad --levels {text!r}, expected LO..HI")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise ParseError(f"--levels range {text!r} is empty")
    return lo, hi


def _module_summary(module, levels: tuple[int, int] | None) -> dict:
    out = module.to_json()
    reduced = {}
    for q in range(module.max_q() + 1):
        total = 0
        for n in range(module.min_level, module.stable_level + 1):
            total += module.betti(q, n) - (1 if q == 0 else 0)
        reduced[str(q)] = total
    out["reduced_ranks"] = reduced
    out["towers"] = module.towers()
    if levels is not None:
        lo, hi = levels
        out["entries"] = [e for e in out["entries"] if lo <= e["n"] <= hi]
        out["u_ranks"] = [e for e in out["u_ranks"] if lo <= e["n"] <= hi]
    return out


def _build_report(comp: Computed, levels: tuple[int, int] | None) -> tuple[dict, int]:
    t0 = perf_counter()
    module, root = homology_of_table(comp.wt, codim=comp.codim)
    eu_h = euler_characteristic(module)
    eu_w = euler_by_weights(comp.wt)
    agree = eu_h == eu_w and (comp.codim is None or eu_h == comp.codim)
    report = {
        "command": "compute",
        "route": comp.route,
        "status": "OK" if agree else "FAILED",
        "module": _module_summary(module, levels),
        "root": root.to_json(),
        "euler": {
            "by_homology": eu_h,
            "by_cube_weights": eu_w,
            "module_tuples": comp.codim,
            "agree": agree,
        },
        "homdim": homdim(module),
        "checks": {
            "cdp": comp.cdp,
            "doubled": comp.doubled,
            "matroid": check_matroid(comp.wt),
            "symmetry": _symmetry(comp),
            "nonpositivity": nonpositivity_report(module),
        },
        "input": comp.echo,
        "timing": {"seconds": round(perf_counter() - t0, 6)},
    }
    return report, (0 if agree else 2)


def _render_compute_ascii(report: dict, root_text: str) -> str:
    eu = report["euler"]
    lines = [
        f"status {report['status']}",
        f"euler {eu['by_homology']} (cube weights {eu['by_cube_weights']},"
        f" module tuples {eu['module_tuples']})",
        f"homdim {report['homdim']}",
        f"levels {report['module']['min_level']}..{report['module']['stable_level']}",
    ]
    for e in report["module"]["entries"]:
        tor = f" torsion {e['torsion']}" if e["torsion"] else ""
        lines.append(f"  betti q={e['q']} n={e['n']}: {e['betti']}{tor}")
    checks = report["checks"]
    flat = " ".join(
        f"{k}={checks[k]}" for k in ("cdp", "doubled", "matroid", "symmetry")
    )
    lines.append(f"checks {flat} nonpositive={checks['nonpositivity']['holds']}")
    lines.append("root:")
    lines.append(root_text.rstrip("\n"))
    return "\n".join(lines) + "\n"


def _emit(obj: dict) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_compute(args) -> int:
    comp = _compute_input(_load_json(args.input[0]), args.doubling, args.seed)
    report, code = _build_report(comp, _parse_levels(args.levels))
    if args.figure:
        from . import figures

        figures.render_report(args.figure, comp.wt, GradedRoot.from_json(report["root"]))
        report["figure"] = args.figure
    if args.format == "ascii":
        root = GradedRoot.from_json(report["root"])
        sys.stdout.write(_render_compute_ascii(report, root.render_ascii()))
    else:
        _emit(report)
    return code


def cmd_root(args) -> int:
    comp = _compute_input(_load_json(args.input[0]), args.doubling, args.seed)
    root = graded_root(comp.wt)
    if args.format == "dot":
        sys.stdout.write(root.to_dot())
    elif args.format == "ascii":
        sys.stdout.write(root.render_ascii())
    else:
        _emit(root.to_json())
    if args.figure:
        from . import figures

        figures.render_report(args.figure, comp.wt, root)
    return 0


def _first_difference(a, b) -> dict | None:
    lo = min(a.min_level, b.min_level)
    hi = max(a.stable_level, b.stable_level)
    top = max(a.max_q(), b.max_q())
    for n in range(lo, hi + 2):
        for q in range(top + 1):
            if a.betti(q, n) != b.betti(q, n) or sorted(a.torsion(q, n)) != sorted(
                b.torsion(q, n)
            ):
                return {"q": q, "n": n}
            for k in range(1, hi - n + 2):
                if a.u_rank(q, n, k) != b.u_rank(q, n, k):
                    return {"q": q, "n": n, "k": k}
    return None


def cmd_independence(args) -> int:
    if len(args.input) != 2:
        raise ParseError("independence needs exactly two --input files")
    modules = []
    for path in args.input:
        comp = _compute_input(_load_json(path), args.doubling, args.seed)
        module, _root = homology_of_table(comp.wt, codim=comp.codim)
        modules.append(module)
    a, b = modules
    iso = modules_isomorphic(a, b)
    _emit(
        {
            "command": "independence",
            "inputs": list(args.input),
            "isomorphic": iso,
            "first_difference": None if iso else _first_difference(a, b),
        }
    )
    return 0


def cmd_kunneth(args) -> int:
    if len(args.input) != 2:
        raise ParseError("kunneth needs exactly two --input files")
    comps = [
        _compute_input(_load_json(path), args.doubling, args.seed)
        for path in args.input
    ]
    for comp in comps:
        if any(comp.wt.rect.lo):
            raise ParseError("kunneth factors must be tables based at 0")
    factors = [homology_of_table(c.wt)[0] for c in comps]
    wt = kunneth_product(comps[0].wt, comps[1].wt)
    product, _root = homology_of_table(wt)
    bar_check: bool | None = None
    if not any(m.has_torsion() for m in factors):
        from .suites import _bar_convolution, _bars_of

        bar_check = _bars_of(product) == _bar_convolution(*factors)
        if not bar_check:
            raise CrossCheckError(
                "product homology disagrees with the bar convolution of the factors"
            )
    _emit(
        {
            "command": "kunneth",
            "inputs": list(args.input),
            "factors": [_module_summary(m, None) for m in factors],
            "product": _module_summary(product, _parse_levels(args.levels)),
            "euler": {
                "by_homology": euler_characteristic(product),
                "by_cube_weights": euler_by_weights(wt),
            },
            "bar_check": bar_check,
        }
    )
    return 0


def _frac(x) -> list[int]:
    return [x.numerator, x.denominator]


def _support_input(data: dict) -> ExponentSet:
    if data.get("kind") != "monomial_ideal":
        raise ParseError("newton commands need a monomial_ideal input")
    gens = data.get("generators")
    if not gens:
        raise ParseError("monomial_ideal input needs generators")
    s = ExponentSet.of(gens)
    if "vars" in data and int(data["vars"]) != s.m:
        raise ParseError(f"vars {data['vars']} does not match exponent length {s.m}")
    return s


def cmd_newton(args) -> int:
    data = _load_json(args.input[0])
    s = _support_input(data)
    sub = args.subcommand
    if sub == "closure":
        closed = closure_support(s)
        d = newton_diagram(s)
        _emit(
            {
                "command": "newton closure",
                "closure": [list(p) for p in closed.sorted_points()],
                "facets": [[list(n), lv] for n, lv in d.facets],
                "convenient": d.convenient,
                "already_closed": is_closed(s),
            }
        )
        return 0
    if sub == "adjoint":
        adj = adjoint_support(s)
        _emit(
            {
                "command": "newton adjoint",
                "adjoint": [list(p) for p in adj.sorted_points()],
            }
        )
        return 0
    if sub == "conductor":
        d = newton_diagram(s)
        _emit({"command": "newton conductor", "conductor": list(comb_conductor(d))})
        return 0
    if sub == "pset":
        d = newton_diagram(s)
        _emit(
            {
                "command": "newton pset",
                "points": [list(p) for p in pset(d).sorted_points()],
            }
        )
        return 0
    if sub == "linedim":
        count, kerb, geo = linedim(s)
        try:
            f, g = witness_monomials(kerb, s)
            witnesses = {"F": [list(p) for p in f], "G": [list(p) for p in g]}
        except LathomError:
            witnesses = None
        _emit(
            {
                "command": "newton linedim",
                "linedim": count,
                "kerb": [list(p) for p in kerb.points],
                "classification": kerb.classification,
                "lines": [
                    {"slope": _frac(sl), "intercept": _frac(ic)} for sl, ic in geo.lines
                ],
                "critical": [_frac(sl) for sl in geo.critical],
                "witnesses": witnesses,
            }
        )
        return 0
    if sub == "kerb":
        if "seq" in data:
            cls = verify_kerb(data["seq"], s)
            _emit(
                {
                    "command": "newton kerb",
                    "seq": [list(p) for p in data["seq"]],
                    "classification": cls,
                }
            )
        else:
            _count, kerb, _geo = linedim(s)
            _emit(
                {
                    "command": "newton kerb",
                    "kerb": [list(p) for p in kerb.points],
                    "classification": kerb.classification,
                }
            )
        return 0
    raise ParseError(f"unknown newton subcommand {sub!r}")


def cmd_curve(args) -> int:
    data = _load_json(args.input[0])
    kind = data.get("kind")
    if kind not in ("semigroup", "branch_gens", "two_branch"):
        raise ParseError("curve commands need a semigroup, branch_gens or two_branch input")
    h = curve_hilbert_from_json(data)
    c = h.rect.hi
    d = sum(c) - h[c]
    sub = args.subcommand
    if sub == "hilbert":
        out = h.to_json()
        out["command"] = "curve hilbert"
        _emit(out)
        return 0
    if sub == "delta":
        _emit({"command": "curve delta", "delta": d, "conductor": list(c)})
        return 0
    if sub == "gorenstein":
        _emit(
            {
                "command": "curve gorenstein",
                "gorenstein": sum(c) == 2 * d,
                "conductor_norm": sum(c),
                "two_delta": 2 * d,
            }
        )
        return 0
    if sub == "minima":
        if kind == "two_branch":
            s = semigroup_from_hilbert(h)
        else:
            s = curve_semigroup_from_json(data)
        module = semigroup_module_from_heights(dual_height(h))
        pts = local_minima(s, module)
        _emit(
            {
                "command": "curve minima",
                "minima": sorted(list(p) for p in pts),
                "gorenstein": gorenstein_test(s),
            }
        )
        return 0
    raise ParseError(f"unknown curve subcommand {sub!r}")


def cmd_quasi_check(args) -> int:
    data = _load_json(args.input[0])
    if data.get("kind") != "quasi":
        raise ParseError("quasi-check needs a quasi input")
    p = QuasiPresentation.from_json(data)
    if p.action is not None:
        verdict = verify_extended_quasi(p, seed=args.seed)
        mode = "extended"
    else:
        verdict = verify_quasi(p, seed=args.seed)
        mode = "algebra"
    out = verdict.to_json()
    out["command"] = "quasi-check"
    out["mode"] = mode
    out["seed"] = args.seed
    _emit(out)
    return 0


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed, count=args.count)
    _emit(report)
    return 0 if report["passed"] else 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for
    # internal failures, so usage problems leave through code 1
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="lathom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inputs=1, formats=("json",)):
        p.add_argument(
            "--input",
            action="append",
            default=[],
            metavar="PATH",
            help="input JSON file" + (" (repeat)" if inputs > 1 else ""),
        )
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--doubling", choices=("auto", "always", "never"), default="auto"
        )
        p.add_argument("--levels", metavar="LO..HI", default=None)

    p = sub.add_parser("compute", help="full lattice-homology report")
    common(p, formats=("json", "ascii"))
    p.add_argument("--figure", metavar="PATH", default=None)
    p.set_defaults(fn=cmd_compute)

    p = sub.add_parser("root", help="graded root of the input's weight table")
    common(p, formats=("json", "ascii", "dot"))
    p.add_argument("--figure", metavar="PATH", default=None)
    p.set_defaults(fn=cmd_root)

    p = sub.add_parser("independence", help="compare two presentations")
    common(p, inputs=2)
    p.set_defaults(fn=cmd_independence)

    p = sub.add_parser("kunneth", help="homology of the product table")
    common(p, inputs=2)
    p.set_defaults(fn=cmd_kunneth)

    p = sub.add_parser("newton", help="Newton-diagram certificates")
    p.add_argument(
        "subcommand",
        choices=("closure", "adjoint", "conductor", "pset", "linedim", "kerb"),
    )
    common(p)
    p.set_defaults(fn=cmd_newton)

    p = sub.add_parser("curve", help="semigroup-of-values computations")
    p.add_argument("subcommand", choices=("hilbert", "delta", "gorenstein", "minima"))
    common(p)
    p.set_defaults(fn=cmd_curve)

    p = sub.add_parser("quasi-check", help="verify a quasi-valuation presentation")
    common(p)
    p.set_defaults(fn=cmd_quasi_check)

    p = sub.add_parser("verify", help="run a randomized theorem suite")
    p.add_argument(
        "--suite",
        required=True,
        choices=("independence", "nonpositivity", "homdim", "kunneth", "quasi"),
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    needs_input = args.command not in ("verify",)
    try:
        if needs_input and not args.input:
            raise ParseError(f"{args.command} needs --input")
        return args.fn(args)
    except CrossCheckError as exc:
        print(f"lathom: internal cross-check failed: {exc}", file=sys.stderr)
        return 2
    except UnknownSuite as exc:
        print(f"lathom: {exc}", file=sys.stderr)
        return 1
    except LathomError as exc:
        print(f"lathom: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

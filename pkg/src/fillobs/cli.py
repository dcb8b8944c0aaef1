"""Command-line interface.

Exit codes: 0 when the command ran (whatever the verdict), 1 for usage,
parse and document errors, 2 when a check is asked to run outside its
hypotheses.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import bundle as bnd
from . import obstruct as ob
from .abelian import Coefficients
from .catalog import mentions, mod_p_ring, parse_class, read_manifold, serialize
from .errors import FillObsError, InputError, PreconditionError
from .gradedring import GradedRing, poincare_pairing_nondegenerate, rationalize, validate

LENS_NOTE = "the lens-space ring structure is asserted by the catalog, not computed"
RATIONALIZED = "the integral ring was rationalized (torsion discarded) for this rational check"


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _ring_summary(r: GradedRing) -> dict:
    return {
        "label": r.label,
        "coefficients": str(r.coeffs),
        "top_degree": r.top_degree,
        "groups": [str(g) for g in r.groups],
    }


def _infer_n(r: GradedRing, n: Optional[int], odd: bool = True) -> int:
    """Complex dimension ``n`` from the top degree (2n-1, or 2n-2 for a base)."""
    D = r.top_degree
    want = D + 1 if odd else D + 2
    if n is None:
        if want % 2:
            kind = "odd" if odd else "even"
            raise PreconditionError(f"top degree {D} is not {kind}; no n fits (pass --n to see why)")
        return want // 2
    if 2 * n != want:
        expect = "2n-1" if odd else "2n-2"
        raise PreconditionError(f"n = {n} needs top degree {expect} = {2 * n - (1 if odd else 2)}, the ring has {D}")
    return n


def _base_caveats(expr) -> list[str]:
    return [LENS_NOTE] if expr is not None and mentions(expr, "lens") else []


def _verdict_entry(v: ob.Verdict, r: GradedRing, **extra) -> dict:
    return {"kind": "verdict", **extra, **v.to_dict(r)}


def cmd_check(args) -> dict:
    r, expr = read_manifold(args.manifold)
    caveats = _base_caveats(expr)
    results = []
    which = args.check
    if which in ("milnor", "holo"):
        if args.coeffs:
            raise UsageError(f"--coeffs is only meaningful for stein and smoothable; {which} is rational")
        if r.coeffs.kind == "Z":
            r = rationalize(r)
            caveats.append(RATIONALIZED)
        n = _infer_n(r, args.n)
        v = ob.milnor_check(r, n) if which == "milnor" else ob.holo_check(r, n)
        results.append(_verdict_entry(v, r, n=n, coefficients=str(r.coeffs)))
        return {"ring": _ring_summary(r), "results": results, "caveats": caveats}

    n = _infer_n(r, args.n)
    run = ob.stein_check if which == "stein" else ob.smoothability_check
    rings = [(None, r)]
    if args.coeffs:
        rings = []
        for tag in args.coeffs.split(","):
            cf = Coefficients.parse(tag)
            if cf == r.coeffs:
                rings.append((tag, r))
            elif r.coeffs.kind != "Z":
                caveats.append(f"coefficients {cf} skipped: the ring is given over {r.coeffs}")
            elif cf.kind == "Q":
                rings.append((tag, rationalize(r)))
            else:
                alt = mod_p_ring(expr, cf.modulus) if expr is not None and cf.is_field else None
                if alt is None:
                    caveats.append(
                        f"coefficients {cf} skipped: the mod-{cf.modulus} ring cannot be derived "
                        "from the integral ring"
                    )
                else:
                    rings.append((tag, alt))
    for _, ring in rings:
        v = run(ring, n)
        results.append(_verdict_entry(v, ring, n=n, coefficients=str(ring.coeffs)))
    return {"ring": _ring_summary(r), "results": results, "caveats": caveats}


def cmd_bound(args) -> dict:
    r, expr = read_manifold(args.manifold)
    caveats = _base_caveats(expr)
    if args.bound == "homotopy":
        m = r.top_degree + 1
        if args.n is not None:
            _infer_n(r, args.n)
        value = ob.min_homotopical_dim_bound(r, m)
        entry = {
            "kind": "bound",
            "bound": "homotopical dimension",
            "value": value,
            "meaning": "every compact orientable filling has homotopical dimension >= value"
            if value else "no lower bound found (value 0)",
        }
    else:
        n = _infer_n(r, args.n)
        value = ob.exceptional_dim_bound(r, n)
        entry = {
            "kind": "bound",
            "bound": "exceptional set dimension",
            "n": n,
            "value": value,
            "meaning": "the exceptional set of every resolution has complex dimension >= value"
            if value else "no lower bound found (value 0)",
        }
    return {"ring": _ring_summary(r), "results": [entry], "caveats": caveats}


def _read_bundle(args) -> tuple[bnd.CircleBundle, list]:
    base, expr = read_manifold(args.base)
    if base.top_degree < 2:
        raise PreconditionError("a circle-bundle base needs top degree >= 2")
    e = parse_class(base, 2, args.euler)
    return bnd.CircleBundle(base, e), _base_caveats(expr)


def cmd_bundle(args) -> dict:
    b, caveats = _read_bundle(args)
    r = b.base
    euler = r.format_class(b.euler)
    head = {"ring": _ring_summary(r), "euler": euler}
    if args.bundle == "check":
        if args.h is None:
            raise UsageError("bundle check needs --h")
        v = bnd.bundle_check(b, args.h)
        return {**head, "results": [{"kind": "bundle", **v.to_dict()}], "caveats": caveats}
    if args.bundle == "gysin":
        cf = Coefficients.parse(args.field or "q")
        if cf.kind == "Z":
            raise PreconditionError("Gysin ranks are computed over a field (q or z<p>)")
        layers = bnd.gysin_cohomology(b, cf.modulus or 0)
        entry = {
            "kind": "gysin",
            "field": str(cf),
            "betti": [L.dim for L in layers],
            "layers": [{"degree": L.degree, "coker": L.coker_dim, "ker": L.ker_dim} for L in layers],
            "euler_characteristic": bnd.euler_characteristic(layers),
        }
        return {**head, "results": [entry], "caveats": caveats}
    n = _infer_n(r, args.n, odd=False)
    cone = bnd.LineBundleCone(b, n)
    h, scan = bnd.cone_bound_scan(cone)
    bound_entry = {
        "kind": "bound",
        "bound": "exceptional set dimension",
        "n": n,
        "value": bnd.cone_exceptional_bound(cone),
        "largest_h": h,
        "meaning": "the exceptional set of every resolution has complex dimension >= value",
    }
    if scan is not None:
        bound_entry["tuple"] = list(scan.tuple)
        bound_entry["euler_cokernel"] = str(scan.euler_cokernel)
    results = [bound_entry]
    if n >= 3:
        v = bnd.cone_smoothability_check(cone)
        results.append(_verdict_entry(v, r, n=n))
    else:
        caveats.append("smoothability check skipped: it needs n >= 3")
    return {**head, "results": results, "caveats": caveats}


def cmd_ring(args) -> dict:
    r, expr = read_manifold(args.manifold)
    caveats = _base_caveats(expr)
    if args.ring == "serialize":
        return {"document": serialize(r)}
    if args.ring == "validate":
        bad = validate(r)
        entry = {"kind": "validation", "valid": not bad, "violations": [str(v) for v in bad]}
        q = r if r.coeffs.is_field else (rationalize(r) if r.coeffs.kind == "Z" else None)
        try:
            entry["poincare_pairing"] = poincare_pairing_nondegenerate(q) if q is not None and not bad else None
        except PreconditionError:
            entry["poincare_pairing"] = None
        return {"ring": _ring_summary(r), "results": [entry], "caveats": caveats}
    degrees = []
    for d in range(r.top_degree + 1):
        degrees.append({
            "degree": d,
            "group": str(r.groups[d]),
            "generators": list(r.names[d]),
            "relations": [list(x) for x in r.groups[d].relations],
        })
    products = []
    for (p, q) in sorted(r.mult):
        if p == 0 or q == 0:
            continue
        for (i, j), v in sorted(r.mult[(p, q)].items()):
            prod = r.product_of_generators(p, i, q, j)
            if r.is_zero_sparse(p + q, prod):
                continue
            products.append(f"{r.names[p][i]} * {r.names[q][j]} = {r.format_class(r.from_sparse(p + q, prod))}")
    entry = {"kind": "ring", "degrees": degrees, "products": products}
    return {"ring": _ring_summary(r), "results": [entry], "caveats": caveats}


# ---------------------------------------------------------------------------
# Rendering


def _render_text(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    ring = report.get("ring")
    if ring:
        lines.append(f"ring: {ring['label']} over {ring['coefficients']}, top degree {ring['top_degree']}")
        lines.append("groups: " + ", ".join(f"H^{d} = {g}" for d, g in enumerate(ring["groups"])))
    if "euler" in report:
        lines.append(f"euler class: {report['euler']}")
    for res in report.get("results", []):
        lines += _render_result(res)
    for c in report.get("caveats", []):
        lines.append(f"caveat: {c}")
    return "\n".join(lines) + "\n"


def _render_result(res: dict) -> list[str]:
    kind = res["kind"]
    out = []
    if kind == "verdict":
        ctx = ", ".join(f"{k} = {res[k]}" for k in ("n", "coefficients") if k in res)
        out.append(f"result: {res['status']}" + (f" ({ctx})" if ctx else ""))
        out.append(f"  criterion: {res['criterion']}")
        out.append(f"  searched: {res['searched']}")
        w = res["witness"]
        if w:
            tup = ", ".join(str(i) for i in w["tuple"])
            out.append(f"  witness ({tup}): {'*'.join(w['factors'])} = {w['product']} != 0")
        out += [f"  note: {x}" for x in res["notes"]]
    elif kind == "bundle":
        out.append(f"result: {res['status']} (h = {res['h']})")
        out.append(f"  criterion: {res['criterion']}")
        out.append(f"  searched: {res['searched']}")
        if res["tuple"]:
            tup = ", ".join(str(i) for i in res["tuple"])
            out.append(f"  tuple ({tup}): cup products spanning the target:")
            out += [f"    generators {tuple(w['generators'])}: {w['product']}" for w in res["surjectivity_witness"]]
            out.append(f"  cokernel of multiplication by the Euler class: {res['euler_cokernel']}")
        out += [f"  note: {x}" for x in res["notes"]]
    elif kind == "bound":
        out.append(f"{res['bound']} bound: {res['value']}")
        if "largest_h" in res:
            out.append(f"  largest firing h: {res['largest_h']}")
        if "tuple" in res:
            out.append(f"  tuple: ({', '.join(str(i) for i in res['tuple'])}), cokernel {res['euler_cokernel']}")
        out.append(f"  meaning: {res['meaning']}")
    elif kind == "gysin":
        out.append(f"Gysin Betti numbers over {res['field']}: {' '.join(str(b) for b in res['betti'])}")
        for L in res["layers"]:
            out.append(f"  H^{L['degree']}: coker {L['coker']} + ker {L['ker']}")
        out.append(f"  Euler characteristic: {res['euler_characteristic']}")
    elif kind == "validation":
        out.append(f"axioms: {'ok' if res['valid'] else 'VIOLATED'}")
        out += [f"  violation: {v}" for v in res["violations"]]
        pp = res["poincare_pairing"]
        out.append(f"Poincare pairing: {'n/a' if pp is None else 'nondegenerate' if pp else 'DEGENERATE'}")
    elif kind == "ring":
        for d in res["degrees"]:
            gens = ", ".join(d["generators"]) or "-"
            rels = f"; relations {d['relations']}" if d["relations"] else ""
            out.append(f"H^{d['degree']} = {d['group']}  generators: {gens}{rels}")
        out.append("products:")
        out += [f"  {p}" for p in res["products"]] or ["  (none beyond the unit)"]
    return out


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")

    p = _Parser(prog="fillobs", description="Cup-product obstructions to fillings of odd-dimensional manifolds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="run a fillability obstruction")
    c.add_argument("check", choices=("stein", "milnor", "holo", "smoothable"))
    c.add_argument("--manifold", required=True, help="ring expression or @document.json")
    c.add_argument("--n", type=int)
    c.add_argument("--coeffs", help="comma list for stein/smoothable, e.g. z,q,z2")
    c.set_defaults(run=cmd_check)

    b = sub.add_parser("bound", parents=[common], help="lower bounds from the obstructions")
    b.add_argument("bound", choices=("homotopy", "exceptional"))
    b.add_argument("--manifold", required=True)
    b.add_argument("--n", type=int)
    b.set_defaults(run=cmd_bound)

    u = sub.add_parser("bundle", parents=[common], help="circle-bundle criteria")
    u.add_argument("bundle", choices=("check", "gysin", "cone"))
    u.add_argument("--base", required=True)
    u.add_argument("--euler", required=True, help='degree-2 class, e.g. "-2*a-2*b"')
    u.add_argument("--h", type=int)
    u.add_argument("--n", type=int)
    u.add_argument("--field", help="q or z<p> (gysin only)")
    u.set_defaults(run=cmd_bundle)

    r = sub.add_parser("ring", parents=[common], help="inspect a ring")
    r.add_argument("ring", choices=("show", "validate", "serialize"))
    r.add_argument("--manifold", required=True)
    r.set_defaults(run=cmd_ring)
    return p


def _glue_negative_values(argv: list) -> list:
    # "--euler -2*x" would otherwise read the class as an option
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a == "--euler" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--euler={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv) -> tuple[str, str, int]:
    """Run one command; returns (stdout, stderr, exit code)."""
    argv = _glue_negative_values(list(argv))
    fmt = "text"
    try:
        args = _build_parser().parse_args(argv)
        fmt = args.format
        report = args.run(args)
    except FillObsError as exc:
        msg = f"error: {exc.name}: {exc}\n"
        if fmt == "structured":
            body = {"error": exc.name, "message": str(exc), "exit_status": exc.exit_code}
            return json.dumps(body, indent=2) + "\n", msg, exc.exit_code
        return "", msg, exc.exit_code
    except ValueError as exc:
        # constructor-level argument checks (degrees, shapes)
        return "", f"error: InputError: {exc}\n", 1
    if "document" in report:
        return report["document"], "", 0
    name = getattr(args, "check", None) or getattr(args, "bound", None) or getattr(args, "bundle", None) or args.ring
    report = {"command": f"{args.command} {name}", **report, "exit_status": 0}
    if fmt == "structured":
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n", "", 0
    return _render_text(report), "", 0


def main(argv=None) -> int:
    try:
        out, err, code = run(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())

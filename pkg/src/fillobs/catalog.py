"""Ring expressions and ring documents.

Expression grammar (whitespace-insensitive, lowercase names)::

    expr := NAME '(' arg (',' arg)* ')' | NAME
    arg  := INTEGER | expr

Constructors: ``torus(n)``, ``sphere(d)``, ``cp(n)`` (projective space of
complex dimension n-1), ``truncpoly(g, n)``, ``rp_mod2(d)``, ``lens(a, n)``,
``product(e1, e2)``, ``rationalize(e)`` and ``point``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

from .abelian import ZZ, Coefficients, FpAbGroup, zmod
from .errors import (
    ArityError,
    AxiomViolation,
    InputError,
    ParamRange,
    ParseError,
    SchemaError,
    UnbalancedParens,
    UnexpectedToken,
    UnknownConstructor,
)
from .gradedring import (
    GradedRing,
    RingClass,
    _monogenic,
    exterior_algebra,
    point,
    rationalize,
    reduce_mod,
    relabel,
    sphere,
    tensor_product,
    truncated_polynomial,
    validate,
)

MAX_TORUS = 12

# argument kinds per constructor: "i" an integer, "e" an expression
_SIGNATURES = {
    "torus": "i",
    "sphere": "i",
    "cp": "i",
    "truncpoly": "ii",
    "rp_mod2": "i",
    "lens": "ii",
    "product": "ee",
    "rationalize": "e",
    "point": "",
}


def _param_rules(name: str, vals: list[int]) -> Optional[tuple[int, str]]:
    """Return (index of the offending parameter, complaint), or None."""
    if name == "torus":
        if not 1 <= vals[0] <= MAX_TORUS:
            return 0, f"torus(n) needs 1 <= n <= {MAX_TORUS}"
    elif name == "sphere":
        if vals[0] < 1:
            return 0, "sphere(d) needs d >= 1"
    elif name == "cp":
        if vals[0] < 2:
            return 0, "cp(n) needs n >= 2 (cp(n) is projective space of complex dimension n-1)"
    elif name == "truncpoly":
        g, n = vals
        if g < 2 or g % 2:
            return 0, "truncpoly(g, n) needs an even generator degree g >= 2"
        if n < 2:
            return 1, "truncpoly(g, n) needs n >= 2"
    elif name == "rp_mod2":
        d = vals[0]
        if d < 1 or d % 2 == 0:
            return 0, "rp_mod2(d) needs an odd d >= 1"
    elif name == "lens":
        a, n = vals
        if a < 2:
            return 0, "lens(a, n) needs a >= 2"
        if n < 2:
            return 1, "lens(a, n) needs n >= 2"
    return None


@dataclass(frozen=True)
class RingExpr:
    name: str
    args: tuple  # ints and RingExprs
    offset: int = field(default=0, compare=False)

    def __str__(self):
        return render(self)


def render(e: RingExpr) -> str:
    if not e.args:
        return e.name
    return f"{e.name}({', '.join(str(a) if isinstance(a, int) else render(a) for a in e.args)})"


_TOKEN = re.compile(r"\s*(?:(?P<name>[a-z_][a-z0-9_]*)|(?P<int>-?\d+)|(?P<punct>[(),])|(?P<bad>\S))")


def _tokens(text: str):
    out = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        kind = m.lastgroup
        start = len(text[: m.start(kind)].encode())
        out.append((kind, m.group(kind), start))
    end = len(text.encode())
    return out, end


def parse(text: str) -> RingExpr:
    tokens, end = _tokens(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None, end)

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def expr() -> RingExpr:
        kind, val, off = take()
        if kind is None:
            raise UnexpectedToken("expected a constructor name, found end of input", off)
        if kind == "bad":
            raise UnexpectedToken(f"unexpected character {val!r}", off)
        if kind != "name":
            raise UnexpectedToken(f"expected a constructor name, found {val!r}", off)
        if val not in _SIGNATURES:
            hint = (
                "; mod-m rings are not derivable from integral rings, use a mod-m "
                "constructor such as rp_mod2 or a ring document"
                if val == "mod" else ""
            )
            raise UnknownConstructor(f"unknown constructor {val!r}{hint}", off)
        args, arg_offsets = [], []
        if peek()[1] == "(":
            open_off = take()[2]
            while True:
                k, v, o = peek()
                if k is None:
                    raise UnbalancedParens(f"'(' at offset {open_off} is never closed", o)
                if v == ")" and not args:
                    break
                arg_offsets.append(o)
                if k == "int":
                    take()
                    args.append(int(v))
                else:
                    args.append(expr())
                k, v, o = peek()
                if v == ",":
                    take()
                    continue
                if v == ")":
                    break
                if k is None:
                    raise UnbalancedParens(f"'(' at offset {open_off} is never closed", o)
                raise UnexpectedToken(f"expected ',' or ')', found {v!r}", o)
            take()
        sig = _SIGNATURES[val]
        if len(args) != len(sig):
            raise ArityError(f"{val} takes {len(sig)} argument(s), got {len(args)}", off)
        for a, want, o in zip(args, sig, arg_offsets):
            if want == "i" and not isinstance(a, int):
                raise ParamRange(f"{val} expects an integer here", o)
            if want == "e" and isinstance(a, int):
                raise ParamRange(f"{val} expects a ring expression here", o)
        bad = _param_rules(val, [a for a in args if isinstance(a, int)])
        if bad:
            k, complaint = bad
            int_offsets = [o for a, o in zip(args, arg_offsets) if isinstance(a, int)]
            raise ParamRange(complaint, int_offsets[k])
        return RingExpr(val, tuple(args), off)

    e = expr()
    kind, val, off = peek()
    if kind is not None:
        if val == ")":
            raise UnbalancedParens("unmatched ')'", off)
        raise UnexpectedToken(f"unexpected trailing {val!r}", off)
    return e


def rp_mod2(d: int) -> GradedRing:
    """Z/2[a]/(a^(d+1)) with deg a = 1 (real projective space of odd dimension d)."""
    return _monogenic(1, d + 1, zmod(2), "a", f"rp_mod2({d})")


def lens(a: int, n: int) -> GradedRing:
    """Integral ring of the lens space L(a; n) of dimension 2n-1: Z/a in
    even degrees 2..2n-2 generated by powers of ``y``, Z in degree 2n-1."""
    D = 2 * n - 1
    groups, names = [], []
    for d in range(D + 1):
        if d == 0 or d == D:
            groups.append(FpAbGroup(1))
            names.append(("1",) if d == 0 else ("v",))
        elif d % 2 == 0:
            groups.append(FpAbGroup(1, ((a,),)))
            k = d // 2
            names.append(("y" if k == 1 else f"y^{k}",))
        else:
            groups.append(FpAbGroup(0))
            names.append(())
    mult = {}
    for i in range(n):
        for j in range(n - i):
            mult[(2 * i, 2 * j)] = {(0, 0): {0: 1}}
    mult[(0, D)] = {(0, 0): {0: 1}}
    mult[(D, 0)] = {(0, 0): {0: 1}}
    return GradedRing(D, ZZ, tuple(groups), tuple(names), mult, f"lens({a}, {n})")


def _eval(e: RingExpr) -> GradedRing:
    n = e.name
    a = e.args
    if n == "torus":
        return exterior_algebra(a[0])
    if n == "sphere":
        return sphere(a[0])
    if n == "cp":
        return relabel(truncated_polynomial(2, a[0]), render(e))
    if n == "truncpoly":
        return truncated_polynomial(a[0], a[1])
    if n == "rp_mod2":
        return rp_mod2(a[0])
    if n == "lens":
        return lens(a[0], a[1])
    if n == "point":
        return point()
    if n == "product":
        return relabel(tensor_product(evaluate(a[0]), evaluate(a[1])), render(e))
    if n == "rationalize":
        return relabel(rationalize(evaluate(a[0])), render(e))
    raise UnknownConstructor(f"unknown constructor {n!r}", e.offset)


@lru_cache(maxsize=64)
def _eval_cached(text: str) -> GradedRing:
    return _eval(parse(text))


def evaluate(e: Union[RingExpr, str]) -> GradedRing:
    """Evaluate an expression (or its text) to a ring; results are shared."""
    return _eval_cached(render(e) if isinstance(e, RingExpr) else render(parse(e)))


def mentions(e: RingExpr, name: str) -> bool:
    return e.name == name or any(isinstance(a, RingExpr) and mentions(a, name) for a in e.args)


def mod_p_ring(e: RingExpr, p: int) -> Optional[GradedRing]:
    """The mod-p ring of a catalog entry when it is known, else None.

    Known cases: ``rp_mod2`` at p = 2, ``lens(2, n)`` at p = 2 (real
    projective space), and torsion-free integral entries (plain reduction).
    """
    if e.name == "rp_mod2":
        return evaluate(e) if p == 2 else None
    if e.name == "lens" and e.args[0] == 2 and p == 2:
        return relabel(rp_mod2(2 * e.args[1] - 1), f"{render(e)} mod 2")
    r = evaluate(e)
    if r.coeffs.kind != "Z" or any(g.torsion for g in r.groups):
        return None
    return reduce_mod(r, p)


# ---------------------------------------------------------------------------
# Classes typed by name


_CLASS_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:(?P<coef>\d+)\s*\*?\s*)?(?P<name>[A-Za-z][A-Za-z0-9_^.]*)?\s*"
)


def parse_class(r: GradedRing, degree: int, text: str) -> RingClass:
    """Parse an integer combination of degree-``degree`` generator names,
    e.g. ``"-2*a - 2*b"`` or ``"2*x12"``."""
    if not 0 <= degree <= r.top_degree:
        raise InputError(f"degree {degree} is outside 0..{r.top_degree}")
    coords = [0] * r.ngens(degree)
    s = text.strip()
    if s == "0":
        return RingClass(degree, tuple(coords))
    pos, first = 0, True
    while pos < len(text):
        m = _CLASS_TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot read class {text!r}", len(text[:pos].encode()))
        if not m.group("sign") and not first:
            raise ParseError("expected '+' or '-' between terms", len(text[: m.start()].encode()))
        if not m.group("name"):
            raise ParseError(
                f"expected a generator name of degree {degree} "
                f"(one of {', '.join(r.names[degree]) or 'none'})",
                len(text[: m.end()].encode()),
            )
        name = m.group("name")
        try:
            k = r.index_of(degree, name)
        except KeyError:
            raise ParseError(
                f"{name!r} is not a degree-{degree} generator "
                f"(one of {', '.join(r.names[degree]) or 'none'})",
                len(text[: m.start('name')].encode()),
            ) from None
        c = int(m.group("coef") or 1)
        coords[k] += -c if m.group("sign") == "-" else c
        pos, first = m.end(), False
    if first:
        raise ParseError("empty class", 0)
    return RingClass(degree, tuple(coords))


# ---------------------------------------------------------------------------
# Ring documents

FORMAT = "fillobs.ring/1"


def _line(obj) -> str:
    return json.dumps(obj, separators=(", ", ": "), ensure_ascii=False)


def serialize(r: GradedRing) -> str:
    """Canonical JSON text: fixed key order, one degree or product per line."""
    degrees = [
        _line({"degree": d, "generators": list(r.names[d]), "relations": [list(x) for x in g.relations]})
        for d, g in enumerate(r.groups)
    ]
    products = []
    for (p, q) in sorted(r.mult):
        block = r.mult[(p, q)]
        for (i, j) in sorted(block):
            v = block[(i, j)]
            pairs = [[v[t], v[t + 1]] for t in range(0, len(v), 2)]
            products.append(_line({"p": p, "q": q, "i": i, "j": j, "value": pairs}))
    out = [
        "{",
        f'  "format": {_line(FORMAT)},',
        f'  "label": {_line(r.label)},',
        f'  "coefficients": {_line(str(r.coeffs))},',
        f'  "top_degree": {r.top_degree},',
        '  "degrees": [',
        ",\n".join("    " + x for x in degrees),
        "  ],",
        '  "products": [',
        ",\n".join("    " + x for x in products),
        "  ]",
        "}",
    ]
    return "\n".join(x for x in out if x) + "\n"


def _int(x, where) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(f"{where}: expected an integer, got {x!r}")
    return x


def _get(obj, key, where):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def load_ring(doc: Union[str, dict], check: bool = True) -> GradedRing:
    """Build a ring from a document; raises SchemaError or AxiomViolation."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not a JSON document: {exc}") from None
    if _get(doc, "format", "document") != FORMAT:
        raise SchemaError(f"unsupported format {doc.get('format')!r}, expected {FORMAT!r}")
    label = _get(doc, "label", "document")
    if not isinstance(label, str):
        raise SchemaError("label must be a string")
    try:
        coeffs = Coefficients.parse(str(_get(doc, "coefficients", "document")))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    D = _int(_get(doc, "top_degree", "document"), "top_degree")
    if D < 0:
        raise SchemaError("top_degree must be >= 0")
    degrees = _get(doc, "degrees", "document")
    if not isinstance(degrees, list) or len(degrees) != D + 1:
        raise SchemaError(f"degrees must list {D + 1} entries")
    groups, names = [], []
    for d, entry in enumerate(degrees):
        where = f"degrees[{d}]"
        if _int(_get(entry, "degree", where), where + ".degree") != d:
            raise SchemaError(f"{where}: degree field must be {d}")
        gens = _get(entry, "generators", where)
        if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
            raise SchemaError(f"{where}.generators must be a list of names")
        if len(set(gens)) != len(gens):
            raise SchemaError(f"{where}.generators has repeated names")
        rels = _get(entry, "relations", where)
        if not isinstance(rels, list):
            raise SchemaError(f"{where}.relations must be a list of rows")
        rows = []
        for k, row in enumerate(rels):
            if not isinstance(row, list) or len(row) != len(gens):
                raise SchemaError(
                    f"{where}.relations[{k}] must have {len(gens)} entries (one per generator)"
                )
            rows.append(tuple(_int(x, f"{where}.relations[{k}]") for x in row))
        groups.append(FpAbGroup(len(gens), tuple(rows), coeffs))
        names.append(tuple(gens))
    if not groups[0].ngens:
        raise SchemaError("degree 0 needs a unit generator")
    products = _get(doc, "products", "document")
    if not isinstance(products, list):
        raise SchemaError("products must be a list")
    mult: dict = {}
    for k, entry in enumerate(products):
        where = f"products[{k}]"
        p, q, i, j = (_int(_get(entry, f, where), f"{where}.{f}") for f in "pqij")
        if not (0 <= p <= D and 0 <= q <= D and p + q <= D):
            raise SchemaError(f"{where}: degrees ({p}, {q}) outside 0..{D}")
        if not (0 <= i < groups[p].ngens and 0 <= j < groups[q].ngens):
            raise SchemaError(f"{where}: generator index out of range")
        value = _get(entry, "value", where)
        if not isinstance(value, list):
            raise SchemaError(f"{where}.value must be a list of [index, coefficient] pairs")
        sparse = {}
        for pair in value:
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{where}.value must be a list of [index, coefficient] pairs")
            t, c = _int(pair[0], where), _int(pair[1], where)
            if not 0 <= t < groups[p + q].ngens:
                raise SchemaError(f"{where}.value names a missing generator {t}")
            sparse[t] = sparse.get(t, 0) + c
        block = mult.setdefault((p, q), {})
        if (i, j) in block:
            raise SchemaError(f"{where}: duplicate product entry")
        block[(i, j)] = sparse
    r = GradedRing(D, coeffs, tuple(groups), tuple(names), mult, label)
    if check:
        bad = validate(r)
        if bad:
            raise AxiomViolation(bad)
    return r


def read_manifold(arg: str) -> tuple[GradedRing, Optional[RingExpr]]:
    """Resolve a CLI manifold argument: an expression or ``@path`` to a document."""
    if arg.startswith("@"):
        try:
            with open(arg[1:], encoding="utf-8") as fh:
                return load_ring(fh.read()), None
        except OSError as exc:
            raise InputError(f"cannot read {arg[1:]}: {exc.strerror}") from None
    e = parse(arg)
    return evaluate(e), e


__all__ = [
    "RingExpr",
    "parse",
    "render",
    "evaluate",
    "rp_mod2",
    "lens",
    "mod_p_ring",
    "parse_class",
    "serialize",
    "load_ring",
    "read_manifold",
]

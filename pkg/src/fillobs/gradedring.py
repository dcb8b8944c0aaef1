"""Graded-commutative rings stored up to a top degree.

A ring keeps one presented group per degree ``0..D`` and a sparse bilinear
table of generator products. Generator 0 of degree 0 is the unit. Products
that would land above ``D`` are zero.

Table values are flat tuples ``(k1, c1, k2, c2, ...)`` listing the nonzero
coordinates of a product, sorted by generator index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb, gcd
from typing import Mapping, Sequence

import numpy as np

from .abelian import (
    QQ,
    ZZ,
    Coefficients,
    FpAbGroup,
    elem_is_zero,
    field_frame,
    is_prime,
    quotient_invariants,
    rank_over_field,
    zmod,
)
from .errors import DimensionMismatch, PreconditionError, TorsionKunneth


@dataclass(frozen=True)
class RingClass:
    """A homogeneous class: coordinates on the generators of one degree."""

    degree: int
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(x) for x in self.coords))


def _flat(sparse: Mapping[int, int]) -> tuple:
    out = []
    for k in sorted(sparse):
        if sparse[k]:
            out += (k, sparse[k])
    return tuple(out)


def _sparse(flat: tuple) -> dict:
    return dict(zip(flat[::2], flat[1::2]))


@dataclass(frozen=True, eq=False)
class GradedRing:
    top_degree: int
    coeffs: Coefficients
    groups: tuple
    names: tuple
    mult: dict = field(repr=False)
    label: str = ""

    def __post_init__(self):
        D = self.top_degree
        if D < 0 or len(self.groups) != D + 1 or len(self.names) != D + 1:
            raise DimensionMismatch("need one group and one name list per degree 0..D")
        for d, (g, nm) in enumerate(zip(self.groups, self.names)):
            if g.coeffs != self.coeffs:
                raise ValueError(f"degree {d} group has coefficients {g.coeffs}, ring has {self.coeffs}")
            if len(nm) != g.ngens:
                raise DimensionMismatch(f"degree {d}: {len(nm)} names for {g.ngens} generators")
        if self.groups[0].ngens < 1:
            raise ValueError("degree 0 needs a unit generator")
        table = {}
        for (p, q), entries in self.mult.items():
            if p < 0 or q < 0 or p + q > D:
                if any(_as_sparse(v, 0) for v in entries.values()):
                    raise DimensionMismatch(f"product table ({p},{q}) lands outside degrees 0..{D}")
                continue
            n = self.groups[p + q].ngens
            block = {}
            for (i, j), v in entries.items():
                if not (0 <= i < self.groups[p].ngens and 0 <= j < self.groups[q].ngens):
                    raise DimensionMismatch(f"product ({p},{q},{i},{j}) names a missing generator")
                sp = _as_sparse(v, n)
                if sp:
                    block[(i, j)] = _flat(sp)
            if block:
                table[(p, q)] = block
        object.__setattr__(self, "names", tuple(tuple(n) for n in self.names))
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "mult", table)

    # -- shape -------------------------------------------------------------

    @property
    def D(self) -> int:
        return self.top_degree

    def ngens(self, d: int) -> int:
        return self.groups[d].ngens if 0 <= d <= self.top_degree else 0

    def group(self, d: int) -> FpAbGroup:
        if 0 <= d <= self.top_degree:
            return self.groups[d]
        return FpAbGroup(0, (), self.coeffs)

    def ranks(self) -> list[int]:
        return [g.free_rank for g in self.groups]

    @cached_property
    def offsets(self) -> list[int]:
        out, acc = [], 0
        for g in self.groups:
            out.append(acc)
            acc += g.ngens
        return out

    @property
    def basis_size(self) -> int:
        return sum(g.ngens for g in self.groups)

    # -- classes -----------------------------------------------------------

    def generator(self, d: int, i: int) -> RingClass:
        n = self.ngens(d)
        if not 0 <= i < n:
            raise IndexError(f"degree {d} has {n} generators")
        return RingClass(d, tuple(int(k == i) for k in range(n)))

    def unit(self) -> RingClass:
        return self.generator(0, 0)

    def zero(self, d: int) -> RingClass:
        return RingClass(d, (0,) * self.ngens(d))

    def from_sparse(self, d: int, sparse: Mapping[int, int]) -> RingClass:
        c = [0] * self.ngens(d)
        for k, v in sparse.items():
            c[k] += v
        return RingClass(d, tuple(c))

    def is_zero(self, c: RingClass) -> bool:
        if c.degree > self.top_degree or c.degree < 0:
            return True
        return elem_is_zero(self.groups[c.degree], c.coords)

    def index_of(self, d: int, name: str) -> int:
        try:
            return self.names[d].index(name)
        except (ValueError, IndexError):
            raise KeyError(f"no generator named {name!r} in degree {d}") from None

    def format_class(self, c: RingClass) -> str:
        if c.degree > self.top_degree:
            return "0"
        return format_combination(
            {k: v for k, v in enumerate(c.coords) if v}, self.names[c.degree]
        )

    # -- products ----------------------------------------------------------

    def product_of_generators(self, p: int, i: int, q: int, j: int) -> dict:
        """Sparse coordinates of generator ``i`` (deg p) times ``j`` (deg q)."""
        block = self.mult.get((p, q))
        if not block:
            return {}
        v = block.get((i, j))
        return _sparse(v) if v else {}

    def mul_sparse(self, p: int, a: Mapping[int, int], q: int, b: Mapping[int, int]) -> dict:
        if p + q > self.top_degree:
            return {}
        block = self.mult.get((p, q))
        if not block:
            return {}
        out: dict[int, int] = {}
        for i, x in a.items():
            if not x:
                continue
            for j, y in b.items():
                if not y:
                    continue
                v = block.get((i, j))
                if v:
                    xy = x * y
                    for t in range(0, len(v), 2):
                        k = v[t]
                        out[k] = out.get(k, 0) + xy * v[t + 1]
        m = self.coeffs.modulus
        if m:
            return {k: c % m for k, c in out.items() if c % m}
        return {k: c for k, c in out.items() if c}

    def is_zero_sparse(self, d: int, sparse: Mapping[int, int]) -> bool:
        if d > self.top_degree or not sparse:
            return True
        g = self.groups[d]
        if not g.relations:
            m = self.coeffs.modulus
            return all(v % m == 0 for v in sparse.values()) if m else not any(sparse.values())
        c = [0] * g.ngens
        for k, v in sparse.items():
            c[k] = v
        return elem_is_zero(g, c)


def _as_sparse(v, n) -> dict:
    if type(v) is dict or isinstance(v, Mapping):
        return {int(k): int(x) for k, x in v.items() if x}
    v = tuple(v)
    if n and len(v) != n:
        raise DimensionMismatch(f"product value of length {len(v)}, expected {n}")
    return {k: int(x) for k, x in enumerate(v) if x}


def format_combination(sparse: Mapping[int, int], names: Sequence[str]) -> str:
    if not sparse:
        return "0"
    parts = []
    for k in sorted(sparse):
        c = sparse[k]
        name = names[k]
        body = name if abs(c) == 1 else f"{abs(c)}*{name}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


def multiply(r: GradedRing, a: RingClass, b: RingClass) -> RingClass:
    """Cup product of two homogeneous classes (zero above the top degree)."""
    for c in (a, b):
        if not 0 <= c.degree <= r.top_degree:
            raise ValueError(f"class of degree {c.degree} in a ring of top degree {r.top_degree}")
        if len(c.coords) != r.ngens(c.degree):
            raise DimensionMismatch(f"class has {len(c.coords)} coordinates, degree {c.degree} has {r.ngens(c.degree)} generators")
    d = a.degree + b.degree
    if d > r.top_degree:
        return RingClass(d, ())
    sa = {k: v for k, v in enumerate(a.coords) if v}
    sb = {k: v for k, v in enumerate(b.coords) if v}
    return r.from_sparse(d, r.mul_sparse(a.degree, sa, b.degree, sb))


# ---------------------------------------------------------------------------
# Constructors


def point(coeffs: Coefficients = ZZ) -> GradedRing:
    return GradedRing(
        0, coeffs, (FpAbGroup(1, (), coeffs),), (("1",),), {(0, 0): {(0, 0): {0: 1}}}, "point"
    )


def _subset_name(s: tuple, n: int) -> str:
    if not s:
        return "1"
    sep = "_" if n >= 10 else ""
    return "x" + sep.join(str(i) for i in s)


def exterior_algebra(n: int) -> GradedRing:
    """Integral exterior algebra on ``n`` degree-one generators (the torus T^n).

    Basis in degree k: increasing index subsets, in lexicographic order.
    """
    if n < 1:
        raise ValueError("exterior_algebra needs n >= 1")
    bases = [list(combinations(range(1, n + 1), k)) for k in range(n + 1)]
    pos = {}
    for k, b in enumerate(bases):
        for i, s in enumerate(b):
            pos[sum(1 << (a - 1) for a in s)] = (k, i)
    full = (1 << n) - 1
    # odd[s] has bit b set when s has an odd number of elements above b
    odd = {}
    for s in pos:
        m = 0
        for b in range(n):
            if bin(s >> (b + 1)).count("1") % 2:
                m |= 1 << b
        odd[s] = m
    mult: dict = {(p, q): {} for p in range(n + 1) for q in range(n + 1 - p)}
    for s, (p, i) in pos.items():
        rest = full & ~s
        t = rest
        while True:
            q, j = pos[t]
            k, idx = pos[s | t]
            mult[(p, q)][(i, j)] = {idx: -1 if bin(t & odd[s]).count("1") % 2 else 1}
            if t == 0:
                break
            t = (t - 1) & rest
    groups = tuple(FpAbGroup(comb(n, k)) for k in range(n + 1))
    names = tuple(tuple(_subset_name(s, n) for s in b) for b in bases)
    return GradedRing(n, ZZ, groups, names, mult, f"torus({n})")


def _power_name(letter: str, k: int) -> str:
    return "1" if k == 0 else letter if k == 1 else f"{letter}^{k}"


def _monogenic(gen_degree, n, coeffs, letter, label, relation=None):
    """``coeffs[x]/(x^n)``; ``relation`` optionally adds ``relation * x^k = 0``
    for 0 < k < n."""
    D = gen_degree * (n - 1)
    groups, names = [], []
    for d in range(D + 1):
        if d % gen_degree == 0:
            k = d // gen_degree
            rel = ((relation,),) if relation and 0 < k else ()
            groups.append(FpAbGroup(1, rel, coeffs))
            names.append((_power_name(letter, k),))
        else:
            groups.append(FpAbGroup(0, (), coeffs))
            names.append(())
    mult = {}
    for a in range(n):
        for b in range(n - a):
            mult[(a * gen_degree, b * gen_degree)] = {(0, 0): {0: 1}}
    return GradedRing(D, coeffs, tuple(groups), tuple(names), mult, label)


def truncated_polynomial(gen_degree: int, n: int) -> GradedRing:
    """``Z[x]/(x^n)`` with ``deg x = gen_degree`` (CP^{n-1} when it is 2)."""
    if gen_degree < 2 or gen_degree % 2:
        raise ValueError("generator degree must be even and >= 2 over Z")
    if n < 2:
        raise ValueError("truncated_polynomial needs n >= 2")
    return _monogenic(gen_degree, n, ZZ, "x", f"truncpoly({gen_degree}, {n})")


def sphere(d: int) -> GradedRing:
    if d < 1:
        raise ValueError("sphere needs d >= 1")
    groups = [FpAbGroup(1)] + [FpAbGroup(0)] * (d - 1) + [FpAbGroup(1)]
    names = [("1",)] + [()] * (d - 1) + [("s",)]
    mult = {(0, 0): {(0, 0): {0: 1}}, (0, d): {(0, 0): {0: 1}}, (d, 0): {(0, 0): {0: 1}}}
    return GradedRing(d, ZZ, tuple(groups), tuple(names), mult, f"sphere({d})")


def relabel(r: GradedRing, label: str) -> GradedRing:
    return GradedRing(r.top_degree, r.coeffs, r.groups, r.names, _raw_table(r), label)


def _raw_table(r: GradedRing) -> dict:
    return {pq: {ij: _sparse(v) for ij, v in block.items()} for pq, block in r.mult.items()}


def _letters(r: GradedRing) -> list[str]:
    return sorted({ch for names in r.names for nm in names for ch in nm if ch.isalpha()})


def _rename(r: GradedRing, mapping: Mapping[str, str]) -> tuple:
    return tuple(
        tuple("".join(mapping.get(ch, ch) for ch in nm) for nm in names) for names in r.names
    )


def _tensor_names(r1: GradedRing, r2: GradedRing):
    n1 = {nm for names in r1.names for nm in names if nm != "1"}
    n2 = {nm for names in r2.names for nm in names if nm != "1"}
    if not n1 & n2:
        return r1.names, r2.names
    # clashing names: rewrite each factor's letters onto disjoint fresh letters
    l1, l2 = _letters(r1), _letters(r2)
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    if len(l1) + len(l2) > len(alphabet):
        raise ValueError("too many generator letters to name a product")
    m1 = dict(zip(l1, alphabet))
    m2 = dict(zip(l2, alphabet[len(l1):]))
    return _rename(r1, m1), _rename(r2, m2)


def _join(a: str, b: str) -> str:
    if a == "1":
        return b
    if b == "1":
        return a
    return f"{a}.{b}"


def _tor_free(g1: FpAbGroup, g2: FpAbGroup) -> bool:
    if not g1.torsion or not g2.torsion:
        return True
    if g1.coeffs.kind == "Z":
        return all(gcd(a, b) == 1 for a in g1.torsion for b in g2.torsion)
    return False


def tensor_product(r1: GradedRing, r2: GradedRing) -> GradedRing:
    """Künneth product with the Koszul sign
    ``(a x b)(a' x b') = (-1)^{|b||a'|} aa' x bb'``."""
    if r1.coeffs != r2.coeffs:
        raise PreconditionError(f"coefficients differ: {r1.coeffs} vs {r2.coeffs}")
    coeffs = r1.coeffs
    if not coeffs.is_field:
        for p, g1 in enumerate(r1.groups):
            for q, g2 in enumerate(r2.groups):
                if not _tor_free(g1, g2):
                    raise TorsionKunneth(
                        f"Tor(H^{p}, H^{q}) is nonzero for {r1.label} x {r2.label}; "
                        "the Künneth ring would need Tor terms"
                    )
    D1, D2 = r1.top_degree, r2.top_degree
    D = D1 + D2
    names1, names2 = _tensor_names(r1, r2)
    # block layout of degree k: (p, q) for p ascending, generator (i, j) -> off + i*n2 + j
    layout = []
    groups, names = [], []
    for k in range(D + 1):
        blocks, off, rels, nm = {}, 0, [], []
        for p in range(min(k, D1), max(0, k - D2) - 1, -1):
            q = k - p
            g1, g2 = r1.groups[p], r2.groups[q]
            blocks[p] = off
            n1, n2 = g1.ngens, g2.ngens
            nm += [_join(a, b) for a in names1[p] for b in names2[q]]
            off += n1 * n2
        total = off
        for p in range(max(0, k - D2), min(k, D1) + 1):
            q = k - p
            g1, g2 = r1.groups[p], r2.groups[q]
            base, n2 = blocks[p], g2.ngens
            for rel in g1.relations:
                for j in range(n2):
                    row = [0] * total
                    for i, v in enumerate(rel):
                        row[base + i * n2 + j] = v
                    rels.append(tuple(row))
            for rel in g2.relations:
                for i in range(g1.ngens):
                    row = [0] * total
                    for j, v in enumerate(rel):
                        row[base + i * n2 + j] = v
                    rels.append(tuple(row))
        layout.append(blocks)
        groups.append(FpAbGroup(total, tuple(rels), coeffs))
        names.append(tuple(nm))

    mult: dict = {}
    for k in range(D + 1):
        for l in range(D + 1 - k):
            block = {}
            for p in range(max(0, k - D2), min(k, D1) + 1):
                q = k - p
                bk, n2 = layout[k][p], r2.ngens(q)
                for pp in range(max(0, l - D2), min(l, D1) + 1):
                    qq = l - pp
                    if p + pp > D1 or q + qq > D2:
                        continue
                    bl, nn2 = layout[l][pp], r2.ngens(qq)
                    out_base = layout[k + l][p + pp]
                    out_n2 = r2.ngens(q + qq)
                    sign = -1 if (q * pp) % 2 else 1
                    t1 = r1.mult.get((p, pp), {})
                    t2 = r2.mult.get((q, qq), {})
                    if not t1 or not t2:
                        continue
                    for (i, ii), v1 in t1.items():
                        a = _sparse(v1)
                        for (j, jj), v2 in t2.items():
                            b = _sparse(v2)
                            val = {}
                            for x, cx in a.items():
                                for y, cy in b.items():
                                    val[out_base + x * out_n2 + y] = sign * cx * cy
                            block[(bk + i * n2 + j, bl + ii * nn2 + jj)] = val
            if block:
                mult[(k, l)] = block
    label = f"product({r1.label}, {r2.label})"
    return GradedRing(D, coeffs, tuple(groups), tuple(names), mult, label)


def rationalize(r: GradedRing) -> GradedRing:
    """Change coefficients Z -> Q: torsion dies, products are projected."""
    if r.coeffs.kind != "Z":
        raise PreconditionError(f"rationalize needs an integral ring, got {r.coeffs}")
    label = f"rationalize({r.label})"
    if not any(g.relations for g in r.groups):
        # free presentation: the basis lifts are the generators themselves
        groups = tuple(FpAbGroup(g.ngens, (), QQ) for g in r.groups)
        return GradedRing(r.top_degree, QQ, groups, r.names, _raw_table(r), label)
    frames =[field_frame(g) for g in r.groups]
    groups, names = [], []
    for d, (g, (lifts, _)) in enumerate(zip(r.groups, frames)):
        groups.append(FpAbGroup(len(lifts), (), QQ))
        nm = []
        for t, lift in enumerate(lifts):
            nz = [k for k, v in enumerate(lift) if v]
            if len(nz) == 1 and lift[nz[0]] == 1:
                nm.append(r.names[d][nz[0]])
            else:
                nm.append(f"g{d}_{t}")
        names.append(tuple(nm))
    mult = {}
    for (p, q) in r.mult:
        lp, lq = frames[p][0], frames[q][0]
        if not lp or not lq:
            continue
        proj = frames[p + q][1]
        block = {}
        for i, a in enumerate(lp):
            sa = {k: v for k, v in enumerate(a) if v}
            for j, b in enumerate(lq):
                sb = {k: v for k, v in enumerate(b) if v}
                prod = r.mul_sparse(p, sa, q, sb)
                if not prod:
                    continue
                dense = [0] * r.ngens(p + q)
                for k, v in prod.items():
                    dense[k] = v
                val = proj(dense)
                if any(val):
                    block[(i, j)] = val
        if block:
            mult[(p, q)] = block
    return GradedRing(r.top_degree, QQ, tuple(groups), tuple(names), mult, label)


def reduce_mod(r: GradedRing, p: int) -> GradedRing:
    """Reduce a torsion-free integral ring mod a prime ``p``.

    Only torsion-free rings are accepted: then the universal coefficient
    theorem makes the mod-p ring the reduction of the integral one.
    """
    if not is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    if r.coeffs.kind != "Z":
        raise PreconditionError(f"reduce_mod needs an integral ring, got {r.coeffs}")
    if any(g.torsion for g in r.groups):
        raise PreconditionError(
            f"{r.label} has torsion; its mod-{p} ring is not determined by the integral ring"
        )
    cf = zmod(p)
    groups = tuple(FpAbGroup(g.ngens, g.relations, cf) for g in r.groups)
    return GradedRing(r.top_degree, cf, groups, r.names, _raw_table(r), f"{r.label} mod {p}")


# ---------------------------------------------------------------------------
# Axioms


@dataclass(frozen=True)
class Violation:
    kind: str
    generators: tuple  # ((degree, index), ...)
    detail: str = ""

    def __str__(self):
        gens = ", ".join(f"H^{d}[{i}]" for d, i in self.generators)
        return f"{self.kind} fails at ({gens})" + (f": {self.detail}" if self.detail else "")


def validate(r: GradedRing, limit: int = 100) -> list[Violation]:
    """Check well-definedness, unit, associativity and graded commutativity.

    Associativity is checked with a left factor drawn from a set ``G`` of
    algebra generators (chosen here so that G generates every degree). The
    left nucleus {x : (xy)z = x(yz) for all y, z} is a subalgebra, so it is
    the whole ring once it contains G. With associativity in hand the graded
    centre is a subalgebra too, so commutativity is checked on G against
    the full basis. The returned list is empty iff every axiom holds on all
    generator tuples.
    """
    out: list[Violation] = []
    _check_well_defined(r, out, limit)
    _check_unit(r, out, limit)
    if len(out) >= limit:
        return out[:limit]
    gens = algebra_generators(r)
    tables = _monomial_tables(r)
    if tables is not None:
        _monomial_axioms(r, tables, gens, out, limit)
    else:
        _general_axioms(r, gens, out, limit)
    return out[:limit]


def _check_well_defined(r, out, limit):
    D = r.top_degree
    for p, g in enumerate(r.groups):
        for rel in g.relations:
            sp = {k: v for k, v in enumerate(rel) if v}
            for q in range(D + 1 - p):
                for j in range(r.ngens(q)):
                    left = r.mul_sparse(p, sp, q, {j: 1})
                    right = r.mul_sparse(q, {j: 1}, p, sp)
                    if not r.is_zero_sparse(p + q, left) or not r.is_zero_sparse(p + q, right):
                        out.append(Violation("well-definedness", ((q, j),), f"relation {rel} of degree {p} times this generator is nonzero"))
                        if len(out) >= limit:
                            return


def _check_unit(r, out, limit):
    for d in range(r.top_degree + 1):
        for i in range(r.ngens(d)):
            e = {i: 1}
            for left, right in (((0, {0: 1}), (d, e)), ((d, e), (0, {0: 1}))):
                prod = r.mul_sparse(left[0], left[1], right[0], right[1])
                diff = dict(prod)
                diff[i] = diff.get(i, 0) - 1
                if not r.is_zero_sparse(d, {k: v for k, v in diff.items() if v}):
                    out.append(Violation("unit", ((d, i),), "1*x != x or x*1 != x"))
                    if len(out) >= limit:
                        return
                    break


def algebra_generators(r: GradedRing) -> list[tuple[int, int]]:
    """A set of basis elements generating ``r`` as an algebra.

    Degree by degree: keep the products of already-chosen generators with
    the full basis of lower degrees, then add basis elements (in index order)
    until the degree is spanned.
    """
    gens = [(0, i) for i in range(r.ngens(0))]
    for k in range(1, r.top_degree + 1):
        g = r.groups[k]
        n = g.ngens
        if n == 0:
            continue
        rows = []
        for (j, gi) in gens:
            if j == 0:
                continue
            if j > k:
                break
            for w in range(r.ngens(k - j)):
                v = r.mul_sparse(j, {gi: 1}, k - j, {w: 1})
                if v:
                    rows.append(v)
        base = [{c: v for c, v in enumerate(rel) if v} for rel in g.relations]
        cur = quotient_invariants(rows + base, n, r.coeffs)
        if cur == (0, ()):
            continue
        for i in range(n):
            cand = quotient_invariants(rows + base + [{i: 1}], n, r.coeffs)
            if cand != cur:
                gens.append((k, i))
                rows.append({i: 1})
                cur = cand
                if cur == (0, ()):
                    break
    return gens


def _monomial_tables(r: GradedRing):
    """Index/sign tables when every generator product is 0 or +-generator and
    no degree carries relations; ``None`` otherwise."""
    if any(g.relations for g in r.groups):
        return None
    m = r.coeffs.modulus
    N = r.basis_size
    if N * N > 40_000_000:
        return None
    off = r.offsets
    idx = np.full((N, N), -1, dtype=np.int32)
    sgn = np.zeros((N, N), dtype=np.int8)
    for (p, q), block in r.mult.items():
        base = off[p + q]
        for (i, j), v in block.items():
            if len(v) != 2:
                return None
            c = v[1]
            if m:
                c %= m
                if c == 0:
                    continue
                if c == m - 1 and m > 2:
                    c = -1
            if c not in (1, -1):
                return None
            idx[off[p] + i, off[q] + j] = base + v[0]
            sgn[off[p] + i, off[q] + j] = c
    deg = np.zeros(N, dtype=np.int64)
    for d in range(r.top_degree + 1):
        deg[off[d]: off[d] + r.ngens(d)] = d
    return idx, sgn, deg


def _global_to_local(r: GradedRing, g: int) -> tuple[int, int]:
    off = r.offsets
    d = max(k for k in range(len(off)) if off[k] <= g and r.ngens(k) > 0)
    return d, g - off[d]


def _monomial_axioms(r, tables, gens, out, limit):
    idx, sgn, deg = tables
    N = idx.shape[0]
    mod2 = r.coeffs.modulus == 2
    off = r.offsets

    def mismatch(i1, s1, i2, s2):
        if mod2:
            nz1, nz2 = s1 != 0, s2 != 0
            return (nz1 != nz2) | (nz1 & (i1 != i2))
        return (s1 != s2) | ((s1 != 0) & (i1 != i2))

    chunk = max(1, 2_000_000 // max(N, 1))
    for (gd, gi) in gens:
        a = off[gd] + gi
        ga, sa = idx[a], sgn[a].astype(np.int8)
        for y0 in range(0, N, chunk):
            y1 = min(N, y0 + chunk)
            gy = ga[y0:y1]
            ok = gy >= 0
            safe = np.where(ok, gy, 0)
            L_idx = np.where(ok[:, None], idx[safe], -1)
            L_sgn = np.where(ok[:, None], sa[y0:y1, None] * sgn[safe], 0)
            yz = idx[y0:y1]
            ok2 = yz >= 0
            safe2 = np.where(ok2, yz, 0)
            R_idx = np.where(ok2, ga[safe2], -1)
            R_sgn = np.where(ok2, sgn[y0:y1] * sa[safe2], 0)
            bad = np.argwhere(mismatch(L_idx, L_sgn, R_idx, R_sgn))
            for y, z in bad[: limit - len(out)]:
                out.append(Violation("associativity", ((gd, gi), _global_to_local(r, y0 + int(y)), _global_to_local(r, int(z)))))
            if len(out) >= limit:
                return
    gset = {off[d] + i for d, i in gens}
    for (gd, gi) in gens:
        a = off[gd] + gi
        eps = np.where((deg * gd) % 2 == 1, -1, 1).astype(np.int8)
        bad = mismatch(idx[a], sgn[a], idx[:, a], sgn[:, a] * eps)
        for y in np.flatnonzero(bad):
            y = int(y)
            if y in gset and y < a:
                continue
            out.append(Violation("graded commutativity", ((gd, gi), _global_to_local(r, y))))
            if len(out) >= limit:
                return


def _general_axioms(r, gens, out, limit):
    D = r.top_degree
    basis = [(d, i) for d in range(D + 1) for i in range(r.ngens(d))]
    for (gd, gi) in gens:
        for (yd, yi) in basis:
            if gd + yd > D:
                continue
            gy = r.mul_sparse(gd, {gi: 1}, yd, {yi: 1})
            for (zd, zi) in basis:
                if gd + yd + zd > D:
                    continue
                left = r.mul_sparse(gd + yd, gy, zd, {zi: 1})
                yz = r.mul_sparse(yd, {yi: 1}, zd, {zi: 1})
                right = r.mul_sparse(gd, {gi: 1}, yd + zd, yz)
                if not _equal(r, gd + yd + zd, left, right):
                    out.append(Violation("associativity", ((gd, gi), (yd, yi), (zd, zi))))
                    if len(out) >= limit:
                        return
    gset = set(gens)
    for (gd, gi) in gens:
        for (yd, yi) in basis:
            if gd + yd > D:
                continue
            if (yd, yi) in gset and (yd, yi) < (gd, gi):
                continue
            xy = r.mul_sparse(gd, {gi: 1}, yd, {yi: 1})
            yx = r.mul_sparse(yd, {yi: 1}, gd, {gi: 1})
            if (gd * yd) % 2:
                yx = {k: -v for k, v in yx.items()}
            if not _equal(r, gd + yd, xy, yx):
                out.append(Violation("graded commutativity", ((gd, gi), (yd, yi))))
                if len(out) >= limit:
                    return


def _equal(r, d, a, b) -> bool:
    diff = dict(a)
    for k, v in b.items():
        diff[k] = diff.get(k, 0) - v
    return r.is_zero_sparse(d, {k: v for k, v in diff.items() if v})


def poincare_pairing_nondegenerate(r: GradedRing) -> bool:
    """Whether ``H^i x H^{D-i} -> H^D`` is perfect for every i.

    Needs field coefficients (Q or Z/p) and one-dimensional H^0 and H^D.
    """
    if not r.coeffs.is_field:
        raise PreconditionError(f"Poincaré pairing needs field coefficients, got {r.coeffs}")
    p = r.coeffs.modulus
    D = r.top_degree
    frames = [field_frame(g, p) for g in r.groups]
    if len(frames[0][0]) != 1 or len(frames[D][0]) != 1:
        raise PreconditionError("Poincaré pairing needs H^0 and H^D of dimension one")
    top = frames[D][1]
    for i in range(D + 1):
        li, lj = frames[i][0], frames[D - i][0]
        if len(li) != len(lj):
            return False
        if not li:
            continue
        if not (r.groups[i].relations or r.groups[D - i].relations or r.groups[D].relations):
            # free presentations: the pairing matrix is the product block itself
            rows = [[0] * len(lj) for _ in li]
            for (a, b), v in r.mult.get((i, D - i), {}).items():
                rows[a][b] = _sparse(v).get(0, 0)
            if rank_over_field(rows, len(lj), p) != len(li):
                return False
            continue
        rows = []
        for a in li:
            sa = {k: v for k, v in enumerate(a) if v}
            row = []
            for b in lj:
                sb = {k: v for k, v in enumerate(b) if v}
                prod = r.mul_sparse(i, sa, D - i, sb)
                dense = [0] * r.ngens(D)
                for k, v in prod.items():
                    dense[k] = v
                row.append(top(dense)[0])
            rows.append(row)
        if rank_over_field(rows, len(lj), p) != len(li):
            return False
    return True

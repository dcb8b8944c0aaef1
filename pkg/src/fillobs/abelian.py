"""Exact linear algebra over Z, Q and Z/m.

Groups are finitely presented: ``ngens`` generators modulo the row span of an
integer relation matrix. A Z/m group is the Z-group whose relations are
extended by ``m`` times the identity, so one Smith normal form engine serves
every coefficient ring. Nothing in this module touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Optional, Sequence

from .errors import DimensionMismatch, NonPrimeField

Matrix = list[list[int]]


@dataclass(frozen=True)
class Coefficients:
    """Coefficient ring: ``Z``, ``Q`` or ``Z/m`` (m >= 2)."""

    kind: str
    modulus: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "Z/m"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "Z/m" and self.modulus < 2:
            raise ValueError("Z/m needs m >= 2")
        if self.kind != "Z/m" and self.modulus:
            raise ValueError(f"{self.kind} takes no modulus")

    @property
    def is_field(self) -> bool:
        return self.kind == "Q" or (self.kind == "Z/m" and is_prime(self.modulus))

    @property
    def characteristic(self) -> int:
        return self.modulus if self.kind == "Z/m" else 0

    def __str__(self):
        return f"Z/{self.modulus}" if self.kind == "Z/m" else self.kind

    @classmethod
    def parse(cls, text: str) -> "Coefficients":
        """Accept ``Z``, ``Q``, ``Z/5``, or the CLI spellings ``z``, ``q``, ``z5``."""
        t = text.strip().upper().replace(" ", "")
        if t in ("Z", "Q"):
            return cls(t)
        digits = t[2:] if t.startswith("Z/") else t[1:] if t.startswith("Z") else ""
        if digits.isdigit() and int(digits) >= 2:
            return cls("Z/m", int(digits))
        raise ValueError(f"cannot parse coefficients {text!r}")


ZZ = Coefficients("Z")
QQ = Coefficients("Q")


def zmod(m: int) -> Coefficients:
    return Coefficients("Z/m", m)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


# ---------------------------------------------------------------------------
# Smith normal form


def _identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _ncols(m: Sequence[Sequence[int]], ncols: Optional[int]) -> int:
    if ncols is None:
        if not m:
            raise DimensionMismatch("column count of an empty matrix must be given")
        ncols = len(m[0])
    for row in m:
        if len(row) != ncols:
            raise DimensionMismatch(f"row of length {len(row)} in a matrix with {ncols} columns")
    return ncols


def _smith(m, ncols=None, want_inverse=False):
    rows = len(m)
    cols = _ncols(m, ncols)
    A = [[int(x) for x in row] for row in m]
    U = _identity(rows)
    V = _identity(cols)
    Vi = _identity(cols) if want_inverse else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]
        if Vi is not None:
            Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(dst, src, k):
        # row[dst] += k * row[src]
        for M in (A, U):
            s, d = M[src], M[dst]
            for c in range(len(d)):
                if s[c]:
                    d[c] += k * s[c]

    def add_col(dst, src, k):
        # col[dst] += k * col[src]; inverse acts on rows of Vi
        for M in (A, V):
            for row in M:
                if row[src]:
                    row[dst] += k * row[src]
        if Vi is not None:
            s, d = Vi[dst], Vi[src]
            for c in range(cols):
                if s[c]:
                    d[c] -= k * s[c]

    t = 0
    while t < min(rows, cols):
        while True:
            # smallest |entry| in the active block, ties to lowest (row, col)
            best = None
            for i in range(t, rows):
                Ai = A[i]
                for j in range(t, cols):
                    v = Ai[j]
                    if v and (best is None or abs(v) < best[0]):
                        best = (abs(v), i, j)
                        if best[0] == 1:
                            break
                if best is not None and best[0] == 1:
                    break
            if best is None:
                break
            _, i, j = best
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
            if A[t][t] < 0:
                for M in (A, U):
                    M[t] = [-x for x in M[t]]
            p = A[t][t]
            clean = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and not A[i][t]
            for j in range(t + 1, cols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and not A[t][j]
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, rows) if any(A[i][j] % p for j in range(t + 1, cols))),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if best is None:
            break
        t += 1

    d = [A[i][i] for i in range(min(rows, cols))]
    return d, U, V, Vi


def smith_normal_form(m: Sequence[Sequence[int]], ncols: Optional[int] = None):
    """Return ``(d, U, V)`` with ``U @ m @ V`` diagonal, diagonal ``d``.

    ``d`` has length ``min(rows, cols)``, entries are non-negative and each
    divides the next (zeros only at the tail). ``U`` and ``V`` are unimodular.
    Pivots are the smallest nonzero absolute value, ties broken by lowest
    (row, col), so output is deterministic.
    """
    d, U, V, _ = _smith(m, ncols)
    return d, U, V


def _divisors(rows: Sequence[Sequence[int]], ncols: int) -> list[int]:
    """Nonzero invariant factors of the row lattice (no transforms kept)."""
    return _divisors_sparse([{c: v for c, v in enumerate(r) if v} for r in rows])


def _divisors_sparse(rows: Sequence[dict]) -> list[int]:
    """As ``_divisors`` for rows given as ``{column: value}`` dicts.

    Unit entries are eliminated first: a row with a +-1 in column c lets c be
    solved away without changing the quotient Z^n / rowspan.
    """
    sparse = [dict(r) for r in rows if r]
    units = 0
    by_col: dict[int, set[int]] = {}
    for k, r in enumerate(sparse):
        for c in r:
            by_col.setdefault(c, set()).add(k)
    alive = set(range(len(sparse)))
    progress = True
    while progress:
        progress = False
        for k in sorted(alive):
            if k not in alive:
                continue
            r = sparse[k]
            c = next((c for c, v in sorted(r.items()) if v in (1, -1)), None)
            if c is None:
                continue
            s = r[c]
            for other in sorted(by_col.get(c, ())):
                if other == k or other not in alive:
                    continue
                o = sparse[other]
                f = o[c] * s
                for cc, v in r.items():
                    nv = o.get(cc, 0) - f * v
                    if nv:
                        if cc not in o:
                            by_col.setdefault(cc, set()).add(other)
                        o[cc] = nv
                    elif cc in o:
                        del o[cc]
                        by_col[cc].discard(other)
                if not o:
                    alive.discard(other)
            alive.discard(k)
            for cc in r:
                by_col[cc].discard(k)
            units += 1
            progress = True
    rest = [sparse[k] for k in sorted(alive) if sparse[k]]
    if not rest:
        return [1] * units
    cols = sorted({c for r in rest for c in r})
    dense = [[r.get(c, 0) for c in cols] for r in rest]
    d, _, _, _ = _smith(dense, len(cols))
    return [1] * units + [x for x in d if x]


def quotient_invariants(rows: Sequence[dict], ngens: int, coeffs: "Coefficients"):
    """``(free_rank, torsion)`` of the free module on ``ngens`` generators
    modulo sparse ``rows`` (modulus rows are added here for Z/m)."""
    rows = list(rows)
    m = coeffs.modulus
    if m:
        rows += [{i: m} for i in range(ngens)]
    d = _divisors_sparse(rows)
    if coeffs.kind == "Q":
        return ngens - len(d), ()
    if coeffs.kind == "Z/m":
        return sum(1 for x in d if x == m), tuple(x for x in d if 1 < x < m)
    return ngens - len(d), tuple(x for x in d if x > 1)


def rank_over_field(rows: Sequence[Sequence[int]], ncols: int, p: int = 0) -> int:
    """Rank of an integer matrix over Q (``p = 0``) or over F_p (``p`` prime)."""
    if p:
        work = [{c: v % p for c, v in enumerate(r) if v % p} for r in rows]
    else:
        work = [{c: v for c, v in enumerate(r) if v} for r in rows]
    work = [r for r in work if r]
    rank = 0
    while work:
        # sparsest row, lowest column as pivot
        work.sort(key=lambda r: (len(r), min(r)))
        piv = work.pop(0)
        c = min(piv)
        pv = piv[c]
        nxt = []
        for r in work:
            if c in r:
                rv = r[c]
                if p:
                    f = rv * pow(pv, -1, p) % p
                    new = dict(r)
                    for cc, v in piv.items():
                        nv = (new.get(cc, 0) - f * v) % p
                        if nv:
                            new[cc] = nv
                        else:
                            new.pop(cc, None)
                else:
                    new = {cc: pv * v for cc, v in r.items()}
                    for cc, v in piv.items():
                        nv = new.get(cc, 0) - rv * v
                        if nv:
                            new[cc] = nv
                        else:
                            new.pop(cc, None)
                    if new:
                        g = 0
                        for v in new.values():
                            g = gcd(g, v)
                        if g > 1:
                            new = {cc: v // g for cc, v in new.items()}
                if new:
                    nxt.append(new)
            else:
                nxt.append(r)
        work = nxt
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# Groups


@dataclass(frozen=True, eq=False)
class FpAbGroup:
    """Finitely presented abelian group (or module over Q, Z/m).

    ``relations`` rows are vectors of length ``ngens``; the group is the
    quotient of the free module on the generators by their span.
    """

    ngens: int
    relations: tuple = ()
    coeffs: Coefficients = ZZ

    def __post_init__(self):
        rels = tuple(tuple(int(x) for x in r) for r in self.relations)
        for r in rels:
            if len(r) != self.ngens:
                raise DimensionMismatch(
                    f"relation of length {len(r)} for a group on {self.ngens} generators"
                )
        object.__setattr__(self, "relations", rels)

    @property
    def modulus(self) -> Optional[int]:
        return self.coeffs.modulus or None

    @property
    def effective_relations(self) -> list[tuple[int, ...]]:
        rows = list(self.relations)
        m = self.coeffs.modulus
        if m:
            rows += [tuple(m * (i == j) for j in range(self.ngens)) for i in range(self.ngens)]
        return rows

    @cached_property
    def _invariants(self):
        rows = [{c: v for c, v in enumerate(r) if v} for r in self.relations]
        return quotient_invariants(rows, self.ngens, self.coeffs)

    @property
    def free_rank(self) -> int:
        """Rank of the free part; for Z/m groups, the number of Z/m summands."""
        return self._invariants[0]

    @property
    def torsion(self) -> tuple[int, ...]:
        return self._invariants[1]

    def canonical(self):
        return self.free_rank, self.torsion, self.modulus

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def isomorphic(self, other: "FpAbGroup") -> bool:
        return self.coeffs.kind == other.coeffs.kind and self.canonical() == other.canonical()

    @cached_property
    def _snf(self):
        rels = self.effective_relations
        if not rels:
            return [], None, None
        d, _, V, Vi = _smith(rels, self.ngens, want_inverse=True)
        return d, V, Vi

    def _reduced(self, coords) -> list[int]:
        """Coordinates in the Smith basis (``coords @ V``)."""
        _, V, _ = self._snf
        if V is None:
            return list(coords)
        n = self.ngens
        out = [0] * n
        for i, x in enumerate(coords):
            if x:
                row = V[i]
                for j in range(n):
                    if row[j]:
                        out[j] += x * row[j]
        return out

    def __str__(self):
        return format_group(self)

    def __repr__(self):
        return f"FpAbGroup({format_group(self)})"


def format_group(g: FpAbGroup) -> str:
    rank, tors = g.free_rank, g.torsion
    kind = g.coeffs.kind
    if kind == "Z/m":
        base = f"Z/{g.coeffs.modulus}"
        parts = [base if rank == 1 else f"({base})^{rank}"] if rank else []
    else:
        base = kind
        parts = [base if rank == 1 else f"{base}^{rank}"] if rank else []
    for t in sorted(set(tors)):
        k = tors.count(t)
        parts.append(f"Z/{t}" if k == 1 else f"(Z/{t})^{k}")
    return " + ".join(parts) if parts else "0"


def group_from_relations(ngens: int, relations=(), modulus: Optional[int] = None) -> FpAbGroup:
    if modulus is not None and modulus < 2:
        raise ValueError("modulus must be >= 2")
    coeffs = zmod(modulus) if modulus else ZZ
    return FpAbGroup(ngens, tuple(tuple(r) for r in relations), coeffs)


def free_group(rank: int, coeffs: Coefficients = ZZ) -> FpAbGroup:
    return FpAbGroup(rank, (), coeffs)


def elem_is_zero(g: FpAbGroup, coords: Sequence[int]) -> bool:
    """Whether ``coords`` lies in the relation lattice of ``g``."""
    if len(coords) != g.ngens:
        raise DimensionMismatch(f"element of length {len(coords)} in a group on {g.ngens} generators")
    d, V, _ = g._snf
    if V is None:
        if g.coeffs.kind == "Z/m":
            return all(x % g.coeffs.modulus == 0 for x in coords)
        return not any(coords)
    y = g._reduced(coords)
    rational = g.coeffs.kind == "Q"
    for i, yi in enumerate(y):
        di = d[i] if i < len(d) else 0
        if di == 0:
            if yi:
                return False
        elif not rational and yi % di:
            return False
    return True


def field_frame(g: FpAbGroup, p: int = 0):
    """A basis of ``g`` tensored with Q (``p = 0``) or with F_p.

    Returns ``(lifts, project)``: integer vectors lifting the basis, and a
    function sending coordinates to field coordinates on that basis
    (integers, reduced mod p when ``p``).
    """
    d, V, Vi = g._snf
    n = g.ngens
    if V is None and not g.coeffs.modulus:
        lifts = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        if p:
            return lifts, lambda x: [v % p for v in x]
        return lifts, list
    if p:
        keep = [i for i in range(n) if (d[i] if i < len(d) else 0) % p == 0]
    else:
        keep = [i for i in range(n) if (d[i] if i < len(d) else 0) == 0]
    lifts = [tuple(Vi[i]) for i in keep]

    def project(x):
        y = g._reduced(x)
        return [y[i] % p for i in keep] if p else [y[i] for i in keep]

    return lifts, project


def dim_over_field(g: FpAbGroup, p: int = 0) -> int:
    """Dimension of ``g`` tensored with Q (``p = 0``) or F_p."""
    if p and not is_prime(p):
        raise NonPrimeField(f"{p} is not prime")
    return g.ngens - rank_over_field(g.effective_relations, g.ngens, p)


@dataclass(frozen=True, eq=False)
class GroupMap:
    """Homomorphism given by the images of the source generators."""

    source: FpAbGroup
    target: FpAbGroup
    images: tuple

    def __post_init__(self):
        imgs = tuple(tuple(int(x) for x in v) for v in self.images)
        if len(imgs) != self.source.ngens:
            raise DimensionMismatch(
                f"{len(imgs)} images for a source on {self.source.ngens} generators"
            )
        for v in imgs:
            if len(v) != self.target.ngens:
                raise DimensionMismatch(f"image of length {len(v)} in a target on {self.target.ngens} generators")
        object.__setattr__(self, "images", imgs)
        for rel in self.source.effective_relations:
            if not elem_is_zero(self.target, self.apply(rel)):
                raise ValueError(f"map is not well defined: relation {rel} does not map to zero")

    def apply(self, coords: Sequence[int]) -> list[int]:
        out = [0] * self.target.ngens
        for x, img in zip(coords, self.images):
            if x:
                for j, v in enumerate(img):
                    if v:
                        out[j] += x * v
        return out


def cokernel(f: GroupMap) -> FpAbGroup:
    t = f.target
    rels = t.relations + tuple(v for v in f.images if any(v))
    return FpAbGroup(t.ngens, rels, t.coeffs)


def map_is_surjective(f: GroupMap) -> bool:
    return cokernel(f).is_trivial()


def kernel_rank_over_field(f: GroupMap, p: int = 0) -> int:
    """Dimension of the kernel of ``f`` tensored with Q (``p = 0``) or F_p."""
    if p and not is_prime(p):
        raise NonPrimeField(f"{p} is not prime")
    src_dim = dim_over_field(f.source, p)
    t = f.target
    trel = t.effective_relations
    image_rank = rank_over_field(list(f.images) + trel, t.ngens, p) - rank_over_field(trel, t.ngens, p)
    return src_dim - image_rank

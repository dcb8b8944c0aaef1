"""Cup-product obstruction search.

Every check here asks one question: for some tuple of degrees
``i1 <= ... <= ik`` drawn from a family, is the multilinear cup map
``H^i1 x ... x H^ik -> H^(i1+...+ik)`` nonzero? By multilinearity it is
enough to multiply one basis generator per slot, and by graded
commutativity the generators within a run of equal degrees can be taken in
nondecreasing index order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import Iterator, Optional

from .errors import PreconditionError
from .gradedring import GradedRing, RingClass

FIRES = "FIRES"
INCONCLUSIVE = "INCONCLUSIVE"

NO_OBSTRUCTION = (
    "no obstruction found; this does not show that a filling exists"
)

HOMOTOPY = "cup-product obstruction to fillings of homotopical dimension <= h"
STEIN = "cup-product obstruction to Stein fillings"
MILNOR = "Durfee-Hain rational cup-product obstruction to Milnor fillings"
HOLO = "Bungart rational cup-product obstruction to holomorphic fillings"
SMOOTHING = "non-smoothability via the Stein filling obstruction on the link"


@dataclass(frozen=True)
class TupleFamily:
    max_index: int
    min_sum: int
    max_sum: int

    def __post_init__(self):
        if self.max_index < 1 or self.min_sum < 1:
            raise ValueError("tuple family needs max_index >= 1 and min_sum >= 1")

    def describe(self) -> str:
        return f"indices in 1..{self.max_index}, sum in {self.min_sum}..{self.max_sum}"


def enumerate_tuples(f: TupleFamily) -> Iterator[tuple]:
    """Nondecreasing tuples in the family, ordered by (sum, tuple)."""
    for s in range(f.min_sum, f.max_sum + 1):
        yield from _partitions(s, 1, f.max_index)


def _partitions(total: int, lo: int, hi: int) -> Iterator[tuple]:
    # lexicographic: smallest first part first
    if total == 0:
        yield ()
        return
    for first in range(lo, min(hi, total) + 1):
        for rest in _partitions(total - first, first, hi):
            yield (first,) + rest


@dataclass(frozen=True)
class Witness:
    tuple: tuple
    generators: tuple  # generator index per slot
    product: RingClass

    def factor_names(self, r: GradedRing) -> list[str]:
        return [r.names[d][i] for d, i in zip(self.tuple, self.generators)]

    def describe(self, r: GradedRing) -> str:
        lhs = "*".join(self.factor_names(r))
        return f"{lhs} = {r.format_class(self.product)} != 0"

    def to_dict(self, r: GradedRing) -> dict:
        return {
            "tuple": list(self.tuple),
            "generators": list(self.generators),
            "factors": self.factor_names(r),
            "product": r.format_class(self.product),
        }


@dataclass(frozen=True)
class Verdict:
    status: str
    criterion: str
    searched: str
    witness: Optional[Witness] = None
    notes: tuple = field(default=())

    def __post_init__(self):
        if (self.status == FIRES) != (self.witness is not None):
            raise ValueError("a verdict fires exactly when it has a witness")

    @property
    def fires(self) -> bool:
        return self.status == FIRES

    def to_dict(self, r: GradedRing) -> dict:
        return {
            "status": self.status,
            "criterion": self.criterion,
            "searched": self.searched,
            "witness": self.witness.to_dict(r) if self.witness else None,
            "notes": list(self.notes),
        }


def _check_tuple(r: GradedRing, t) -> tuple:
    t = tuple(sorted(int(i) for i in t))
    if not t:
        raise ValueError("degree tuple must be nonempty")
    if t[0] < 1 or t[-1] > r.top_degree:
        raise ValueError(f"tuple {t} has an index outside 1..{r.top_degree}")
    return t


def cup_map_vanishes(r: GradedRing, t) -> Optional[Witness]:
    """Return the first nonzero generator product for tuple ``t``, or None.

    The search order is lexicographic in the generator indices, so the
    witness is deterministic.
    """
    t = _check_tuple(r, t)
    if sum(t) > r.top_degree:
        return None
    if any(r.ngens(d) == 0 for d in t):
        return None
    k = len(t)
    chosen: list[int] = []

    def dfs(slot: int, deg: int, partial: dict) -> Optional[Witness]:
        if slot == k:
            return Witness(t, tuple(chosen), r.from_sparse(deg, partial))
        d = t[slot]
        start = chosen[-1] if slot and t[slot - 1] == d else 0
        for i in range(start, r.ngens(d)):
            nxt = r.mul_sparse(deg, partial, d, {i: 1})
            if r.is_zero_sparse(deg + d, nxt):
                continue
            chosen.append(i)
            w = dfs(slot + 1, deg + d, nxt)
            chosen.pop()
            if w is not None:
                return w
        return None

    return dfs(0, 0, {0: 1})


def _tuples(count: int) -> str:
    return "1 tuple" if count == 1 else f"{count} tuples"


def search_family(r: GradedRing, f: TupleFamily, criterion: str, notes=()) -> Verdict:
    count = 0
    for t in enumerate_tuples(f):
        count += 1
        w = cup_map_vanishes(r, t)
        if w is not None:
            return Verdict(FIRES, criterion, f"{f.describe()}; fired at tuple {count}", w, tuple(notes))
    return Verdict(
        INCONCLUSIVE, criterion, f"{f.describe()}; {_tuples(count)}, all vanish",
        None, tuple(notes) + (NO_OBSTRUCTION,),
    )


def _need_dim(r: GradedRing, D: int, what: str):
    if r.top_degree != D:
        raise PreconditionError(f"{what} needs a ring of top degree {D}, got {r.top_degree}")


def _need_rational(r: GradedRing, what: str):
    if r.coeffs.kind != "Q":
        raise PreconditionError(
            f"{what} is a rational obstruction; the ring has {r.coeffs} coefficients "
            "(use rationalize(...))"
        )


def hyphom_check(r: GradedRing, m: int, h: int) -> Verdict:
    """Does the (m-1)-manifold with ring ``r`` bound nothing of homotopical
    dimension <= h?"""
    if m < 4:
        raise PreconditionError(f"need m >= 4, got {m}")
    if not 1 <= h <= m - 3:
        raise PreconditionError(f"h must lie in 1..{m - 3}, got {h}")
    _need_dim(r, m - 1, "the homotopical-dimension check")
    f = TupleFamily(m - 2 - h, h + 1, m - 1)
    return search_family(r, f, f"{HOMOTOPY} (h = {h})")


def min_homotopical_dim_bound(r: GradedRing, m: int) -> int:
    """1 + the largest h whose check fires, or 0."""
    if m < 4:
        raise PreconditionError(f"need m >= 4, got {m}")
    _need_dim(r, m - 1, "the homotopical-dimension bound")
    for h in range(m - 3, 0, -1):
        if hyphom_check(r, m, h).fires:
            return h + 1
    return 0


def stein_check(r: GradedRing, n: int) -> Verdict:
    if n < 3:
        raise PreconditionError(f"the Stein obstruction says nothing for n < 3 (got n = {n})")
    _need_dim(r, 2 * n - 1, "the Stein check")
    return search_family(r, TupleFamily(n - 2, n + 1, 2 * n - 1), f"{STEIN} (coefficients {r.coeffs})")


def milnor_check(r: GradedRing, n: int) -> Verdict:
    if n < 2:
        raise PreconditionError(f"the Milnor check needs n >= 2, got {n}")
    _need_rational(r, "the Milnor check")
    _need_dim(r, 2 * n - 1, "the Milnor check")
    return search_family(r, TupleFamily(n - 1, n, 2 * n - 1), MILNOR)


def holo_check(r: GradedRing, n: int) -> Verdict:
    if n < 3:
        raise PreconditionError(
            f"the holomorphic obstruction says nothing about 3-dimensional manifolds (got n = {n})"
        )
    _need_rational(r, "the holomorphic check")
    _need_dim(r, 2 * n - 1, "the holomorphic check")
    return search_family(r, TupleFamily(n - 2, n + 1, 2 * n - 1), HOLO)


def smoothability_check(r: GradedRing, n: int) -> Verdict:
    v = stein_check(r, n)
    return Verdict(v.status, SMOOTHING, v.searched, v.witness, v.notes)


def exceptional_dim_bound(r: GradedRing, n: int) -> int:
    """Lower bound on the complex dimension of the exceptional set of any
    resolution of an isolated singularity with link ring ``r``."""
    if n < 2:
        raise PreconditionError(f"need n >= 2, got {n}")
    _need_dim(r, 2 * n - 1, "the exceptional-set bound")
    for h in range(2 * n - 3, 0, -1):
        f = TupleFamily(2 * n - 2 - h, h + 1, 2 * n - 1)
        if search_family(r, f, HOMOTOPY).fires:
            return ceil((h + 1) / 2)
    return 0

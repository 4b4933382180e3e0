"""Explicit abelian p-groups  Z/p^k1 + ... + Z/p^kr + Z(p^inf)^d.

Cyclic coordinates are residues mod p^k; Prufer coordinates are
:class:`fractions.Fraction` values in [0, 1) whose denominator is a power of
p.  Both are kept in canonical form, so element equality is syntactic.

:class:`ElementTableGroup` is the Cayley-table representation used by the
brute-force oracles.  Its tables are numpy integer arrays.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import ParseError, TableError
from .ordinal import OMEGA, ExtendedCount, Ordinal

__all__ = [
    "is_prime",
    "valuation",
    "GroupElement",
    "ExplicitPGroup",
    "ElementTableGroup",
    "elem_order",
    "in_pn_subgroup",
    "direct_sum",
    "parse_group",
    "format_group",
    "parse_element",
    "format_element",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def valuation(p: int, x: int, cap: int) -> int:
    """p-adic valuation of ``x`` mod p^cap, with valuation(0) == cap."""
    x %= p**cap
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _denominator_exponent(p: int, q: Fraction) -> int:
    d, e = q.denominator, 0
    while d > 1:
        d, r = divmod(d, p)
        if r:
            raise ValueError(f"{q} does not have a {p}-power denominator")
        e += 1
    return e


@dataclass(frozen=True)
class GroupElement:
    cyclic: tuple[int, ...] = ()
    prufer: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cyclic", tuple(int(c) for c in self.cyclic))
        object.__setattr__(self, "prufer", tuple(Fraction(q) for q in self.prufer))

    def __str__(self):
        return format_element(self)


@dataclass(frozen=True)
class ExplicitPGroup:
    """``exps`` is kept sorted in descending order."""

    p: int
    exps: tuple[int, ...] = ()
    div_rank: int = 0

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValueError(f"p={self.p!r} is not prime")
        exps = tuple(sorted((int(k) for k in self.exps), reverse=True))
        if any(k < 1 for k in exps):
            raise ValueError("cyclic exponents must be >= 1")
        if self.div_rank < 0:
            raise ValueError("divisible rank must be >= 0")
        object.__setattr__(self, "exps", exps)

    # -- shape ---------------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.div_rank == 0

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise ValueError("group is infinite")
        return self.p ** sum(self.exps)

    def size(self) -> ExtendedCount:
        return self.order if self.is_finite else OMEGA

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(self.p**k for k in self.exps)

    def __str__(self):
        return format_group(self)

    # -- elements ------------------------------------------------------------

    def zero(self) -> GroupElement:
        return GroupElement((0,) * len(self.exps), (Fraction(0),) * self.div_rank)

    def element(self, cyclic: Sequence[int] = (), prufer: Sequence = ()) -> GroupElement:
        x = GroupElement(
            tuple(c % m for c, m in zip(cyclic, self.moduli)),
            tuple(Fraction(q) % 1 for q in prufer),
        )
        self.check(x)
        return x

    def check(self, x: GroupElement) -> None:
        if len(x.cyclic) != len(self.exps) or len(x.prufer) != self.div_rank:
            raise ValueError(f"element {x} has the wrong shape for {self}")
        for c, m in zip(x.cyclic, self.moduli):
            if not 0 <= c < m:
                raise ValueError(f"cyclic coordinate {c} out of range [0, {m})")
        for q in x.prufer:
            if not 0 <= q < 1:
                raise ValueError(f"Prufer coordinate {q} outside [0, 1)")
            _denominator_exponent(self.p, q)

    def add(self, x: GroupElement, y: GroupElement) -> GroupElement:
        self._same_shape(x, y)
        return GroupElement(
            tuple((a + b) % m for a, b, m in zip(x.cyclic, y.cyclic, self.moduli)),
            tuple((a + b) % 1 for a, b in zip(x.prufer, y.prufer)),
        )

    def neg(self, x: GroupElement) -> GroupElement:
        self._same_shape(x, x)
        return GroupElement(
            tuple(-a % m for a, m in zip(x.cyclic, self.moduli)),
            tuple(-a % 1 for a in x.prufer),
        )

    def scalar_mul(self, k: int, x: GroupElement) -> GroupElement:
        self._same_shape(x, x)
        return GroupElement(
            tuple(k * a % m for a, m in zip(x.cyclic, self.moduli)),
            tuple(k * a % 1 for a in x.prufer),
        )

    def _same_shape(self, x: GroupElement, y: GroupElement) -> None:
        n, d = len(self.exps), self.div_rank
        if len(x.cyclic) != n or len(y.cyclic) != n or len(x.prufer) != d or len(y.prufer) != d:
            raise ValueError("coordinate count does not match the group")

    def order_exp(self, x: GroupElement) -> int:
        """The n with ord(x) = p^n."""
        self._same_shape(x, x)
        best = 0
        for a, k in zip(x.cyclic, self.exps):
            best = max(best, k - valuation(self.p, a, k))
        for q in x.prufer:
            best = max(best, _denominator_exponent(self.p, q))
        return best

    def denominator_exp(self, x: GroupElement) -> int:
        return max((_denominator_exponent(self.p, q) for q in x.prufer), default=0)

    def in_pn_subgroup(self, alpha, x: GroupElement) -> bool:
        """Membership of ``x`` in p^alpha G (closed form)."""
        self._same_shape(x, x)
        if isinstance(alpha, Ordinal):
            if not alpha.is_finite:
                # every explicit group has finite length
                return all(a == 0 for a in x.cyclic)
            alpha = int(alpha)
        for a, k in zip(x.cyclic, self.exps):
            if alpha >= k:
                if a:
                    return False
            elif a % self.p**alpha:
                return False
        return True

    def p_preimages(self, x: GroupElement) -> list[GroupElement]:
        """All y with p*y == x; empty or of size p^(#coordinates)."""
        self._same_shape(x, x)
        p = self.p
        choices: list[list] = []
        for a, m in zip(x.cyclic, self.moduli):
            if a % p:
                return []
            step = m // p
            choices.append([(a // p + j * step) % m for j in range(p)])
        for q in x.prufer:
            choices.append([(q + j) / p for j in range(p)])
        n = len(self.exps)
        return [GroupElement(c[:n], c[n:]) for c in itertools.product(*choices)]

    def socle(self) -> list[GroupElement]:
        """G[p], listed in enumeration order."""
        p = self.p
        coords = [[j * (m // p) for j in range(p)] for m in self.moduli]
        coords += [[Fraction(j, p) for j in range(p)] for _ in range(self.div_rank)]
        n = len(self.exps)
        return [GroupElement(c[:n], c[n:]) for c in _little_endian(coords)]

    def enumerate(self, denom_bound: int = 0) -> list[GroupElement]:
        """Elements whose Prufer denominators are at most p^denom_bound.

        Order: cyclic coordinates as little-endian digits (first coordinate
        fastest), then Prufer coordinates, each Prufer coordinate ordered by
        denominator then numerator.
        """
        if denom_bound < 0:
            raise ValueError("denominator bound must be >= 0")
        coords: list[list] = [list(range(m)) for m in self.moduli]
        coords += [prufer_fractions(self.p, denom_bound)] * self.div_rank
        n = len(self.exps)
        return [GroupElement(c[:n], c[n:]) for c in _little_endian(coords)]

    # -- finite groups as tables ----------------------------------------------

    def index_of(self, x: GroupElement) -> int:
        if not self.is_finite:
            raise ValueError("index_of needs a finite group")
        idx, place = 0, 1
        for a, m in zip(x.cyclic, self.moduli):
            idx += a * place
            place *= m
        return idx

    def element_at(self, idx: int) -> GroupElement:
        if not self.is_finite:
            raise ValueError("element_at needs a finite group")
        digits = []
        for m in self.moduli:
            idx, r = divmod(idx, m)
            digits.append(r)
        if idx:
            raise IndexError("index out of range")
        return GroupElement(tuple(digits), ())

    def to_table(self) -> "ElementTableGroup":
        if not self.is_finite:
            raise ValueError("cannot tabulate a group with a divisible part")
        n = self.order
        idx = np.arange(n, dtype=np.int64)
        table = np.zeros((n, n), dtype=np.int64)
        place = 1
        for m in self.moduli:
            digit = (idx // place) % m
            table += ((digit[:, None] + digit[None, :]) % m) * place
            place *= m
        return ElementTableGroup(self.p, table, 0)

    def direct_sum(self, other: "ExplicitPGroup") -> "ExplicitPGroup":
        if self.p != other.p:
            raise ValueError(f"cannot sum a {self.p}-group with a {other.p}-group")
        return ExplicitPGroup(self.p, self.exps + other.exps, self.div_rank + other.div_rank)

    def embed_left(self, other: "ExplicitPGroup", x: GroupElement) -> GroupElement:
        """Image of x in self (+) other, where the summands concatenate."""
        return GroupElement(x.cyclic + (0,) * len(other.exps), x.prufer + (Fraction(0),) * other.div_rank)


def prufer_fractions(p: int, denom_bound: int) -> list[Fraction]:
    out = [Fraction(0)]
    for e in range(1, denom_bound + 1):
        q = p**e
        out.extend(Fraction(c, q) for c in range(1, q) if c % p)
    return out


def _little_endian(coords: list[list]) -> Iterator[tuple]:
    for combo in itertools.product(*reversed(coords)):
        yield combo[::-1]


def elem_order(G: ExplicitPGroup, x: GroupElement) -> int:
    return G.order_exp(x)


def in_pn_subgroup(G: ExplicitPGroup, alpha, x: GroupElement) -> bool:
    return G.in_pn_subgroup(alpha, x)


def direct_sum(G: ExplicitPGroup, H: ExplicitPGroup) -> ExplicitPGroup:
    return G.direct_sum(H)


# --- Cayley tables ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ElementTableGroup:
    """A finite abelian p-group on the indices 0..N-1.

    The table is validated on construction unless ``verify=False`` is passed
    by a caller that has already validated it.
    """

    p: int
    table: np.ndarray
    zero: int = 0
    verify: bool = field(default=True, repr=False)

    def __post_init__(self):
        table = np.array(self.table, dtype=np.int64)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        if self.verify:
            check_group_table(self.p, table, self.zero)

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def add(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    @cached_property
    def negatives(self) -> np.ndarray:
        rows, cols = np.nonzero(self.table == self.zero)
        neg = np.empty(self.size, dtype=np.int64)
        neg[rows] = cols
        return neg

    def neg(self, a: int) -> int:
        return int(self.negatives[a])

    def mul(self, k: int, a: int) -> int:
        acc, base = self.zero, a
        while k:
            if k & 1:
                acc = int(self.table[acc, base])
            base = int(self.table[base, base])
            k >>= 1
        return acc

    @cached_property
    def times_p(self) -> np.ndarray:
        """Multiplication by p as an index map."""
        idx = np.arange(self.size, dtype=np.int64)
        acc = np.full(self.size, self.zero, dtype=np.int64)
        for _ in range(self.p):
            acc = self.table[acc, idx]
        return acc

    @cached_property
    def order_exps(self) -> np.ndarray:
        """n with ord(x) = p^n, for every index x."""
        out = np.zeros(self.size, dtype=np.int64)
        cur = np.arange(self.size, dtype=np.int64)
        n = 0
        while True:
            live = cur != self.zero
            if not live.any():
                return out
            out[live] += 1
            cur = self.times_p[cur]
            n += 1
            if n > 64:
                raise TableError("element of non-p-power order")

    def pn_mask(self, n: int) -> np.ndarray:
        """Boolean mask of p^n T."""
        mask = np.ones(self.size, dtype=bool)
        for _ in range(n):
            nxt = np.zeros(self.size, dtype=bool)
            nxt[self.times_p[mask]] = True
            if (nxt == mask).all():
                break
            mask = nxt
        return mask

    def socle_mask(self) -> np.ndarray:
        return self.times_p == self.zero

    def subtable(self, members: np.ndarray) -> tuple["ElementTableGroup", np.ndarray]:
        """Restrict to a subgroup.  Returns the new table and old indices."""
        members = np.asarray(members)
        old = np.flatnonzero(members) if members.dtype == bool else np.sort(members)
        new_of = np.full(self.size, -1, dtype=np.int64)
        new_of[old] = np.arange(len(old))
        sub = new_of[self.table[np.ix_(old, old)]]
        if (sub < 0).any():
            raise TableError("subset is not closed under addition")
        return ElementTableGroup(self.p, sub, int(new_of[self.zero])), old

    def relabel(self, perm: Sequence[int]) -> "ElementTableGroup":
        """Transport along the bijection old index i -> perm[i]."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        table = perm[self.table[np.ix_(inv, inv)]]
        return ElementTableGroup(self.p, table, int(perm[self.zero]), verify=False)

    def direct_sum(self, other: "ElementTableGroup") -> "ElementTableGroup":
        """Index (a, b) is a + N_self * b."""
        if self.p != other.p:
            raise ValueError("mismatched primes")
        n1, n2 = self.size, other.size
        a = np.arange(n1 * n2) % n1
        b = np.arange(n1 * n2) // n1
        table = self.table[np.ix_(a, a)] + n1 * other.table[np.ix_(b, b)]
        return ElementTableGroup(self.p, table, self.zero + n1 * other.zero, verify=False)


def cyclic_table(p: int, k: int) -> ElementTableGroup:
    return ExplicitPGroup(p, (k,)).to_table()


def magma_closure(table: np.ndarray, seeds: Sequence[int], start: np.ndarray | None = None) -> np.ndarray:
    n = table.shape[0]
    mask = np.zeros(n, dtype=bool) if start is None else start.copy()
    mask[list(seeds)] = True
    while True:
        members = np.flatnonzero(mask)
        nxt = mask.copy()
        nxt[table[np.ix_(members, members)].ravel()] = True
        if (nxt == mask).all():
            return mask
        mask = nxt


def check_group_table(p: int, table: np.ndarray, zero: int) -> None:
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise TableError("table must be a non-empty square array")
    n = table.shape[0]
    if not 0 <= zero < n:
        raise TableError("zero index out of range")
    if table.min() < 0 or table.max() >= n:
        raise TableError("table entries out of range")
    idx = np.arange(n)
    if not (table[zero] == idx).all() or not (table[:, zero] == idx).all():
        raise TableError("zero is not an identity")
    if not (table == table.T).all():
        raise TableError("table is not commutative")
    if not (np.sort(table, axis=1) == idx).all():
        raise TableError("table is not a Latin square")
    # Light's test: associativity needs checking only with a generator in the
    # middle position.
    gens: list[int] = []
    covered = np.zeros(n, dtype=bool)
    covered[zero] = True
    for x in range(n):
        if not covered[x]:
            gens.append(x)
            covered = magma_closure(table, [x], covered)
    for g in gens:
        lhs = table[table[:, g]]  # (x+g)+y
        rhs = table[:, table[g]]  # x+(g+y)
        if not (lhs == rhs).all():
            raise TableError("table is not associative")
    m = n
    while m % p == 0:
        m //= p
    if m != 1:
        raise TableError(f"order {n} is not a power of {p}")


# --- text formats ---------------------------------------------------------------

_GROUP_RE = re.compile(r"^\s*p\s*=\s*(\d+)\s*;\s*cyclic\s*=\s*\[([^\]]*)\]\s*;\s*divisible\s*=\s*(\d+)\s*$")
_ELEM_RE = re.compile(r"^\s*cyclic\s*=\s*\(([^)]*)\)\s*;\s*prufer\s*=\s*\(([^)]*)\)\s*$")


def format_group(G: ExplicitPGroup) -> str:
    return f"p={G.p}; cyclic=[{','.join(map(str, G.exps))}]; divisible={G.div_rank}"


def parse_group(text: str) -> ExplicitPGroup:
    m = _GROUP_RE.match(text)
    if not m:
        raise ParseError(f"bad group text {text!r}")
    try:
        exps = tuple(int(s) for s in m.group(2).split(",") if s.strip())
        return ExplicitPGroup(int(m.group(1)), exps, int(m.group(3)))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _format_fraction(q: Fraction) -> str:
    return "0" if q == 0 else f"{q.numerator}/{q.denominator}"


def format_element(x: GroupElement) -> str:
    cyc = ",".join(map(str, x.cyclic))
    pru = ",".join(_format_fraction(q) for q in x.prufer)
    return f"cyclic=({cyc}); prufer=({pru})"


def parse_element(text: str, G: ExplicitPGroup | None = None) -> GroupElement:
    m = _ELEM_RE.match(text)
    if not m:
        raise ParseError(f"bad element text {text!r}")
    try:
        cyc = tuple(int(s) for s in m.group(1).split(",") if s.strip())
        pru = tuple(Fraction(s.strip()) for s in m.group(2).split(",") if s.strip())
        x = GroupElement(cyc, pru)
        if G is not None:
            G.check(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(str(exc)) from exc
    return x

"""Ulm invariants, length, profiles and group isomorphism.

Closed forms work on :class:`ExplicitPGroup`; the oracles work on Cayley
tables and never look at the exponent list.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .errors import ParseError
from .ordinal import (
    OMEGA,
    ZERO,
    ExtendedCount,
    Ordinal,
    count_add,
    format_count,
    format_ordinal,
    is_count,
    ord_add,
    ord_cmp,
    parse_count,
    parse_ordinal,
)
from .pgroup import ElementTableGroup, ExplicitPGroup, is_prime

__all__ = [
    "UlmProfile",
    "ulm_invariant",
    "ulm_invariant_oracle",
    "table_ulm_invariant",
    "length",
    "table_length",
    "profile_of",
    "iso_by_ulm",
    "profile_sum",
    "shift_profile",
    "brute_force_group_iso",
    "iter_group_isos",
    "parse_profile",
    "format_profile",
]


@dataclass(frozen=True)
class UlmProfile:
    """Finitely supported alpha -> u_alpha, plus divisible rank.

    ``invariants`` holds only the nonzero values, sorted by ordinal.
    ``declared_length`` does not take part in equality.
    """

    p: int
    invariants: tuple[tuple[Ordinal, ExtendedCount], ...] = ()
    div_rank: ExtendedCount = 0
    declared_length: Ordinal = field(default=ZERO, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        items = dict(self.invariants) if not isinstance(self.invariants, Mapping) else dict(self.invariants)
        cleaned = []
        for alpha, val in items.items():
            if isinstance(alpha, int):
                alpha = Ordinal.of(alpha)
            if not is_count(val):
                raise ValueError(f"invalid Ulm invariant value {val!r}")
            if val != 0:
                cleaned.append((alpha, val))
        cleaned.sort(key=lambda t: _ord_key(t[0]))
        if not is_count(self.div_rank):
            raise ValueError(f"invalid divisible rank {self.div_rank!r}")
        if cleaned and ord_cmp(cleaned[-1][0], self.declared_length) >= 0:
            raise ValueError("Ulm invariant supported at or beyond the declared length")
        object.__setattr__(self, "invariants", tuple(cleaned))

    @classmethod
    def from_dict(cls, p: int, invariants: Mapping, div_rank: ExtendedCount = 0, declared_length=None):
        inv = {Ordinal.of(a) if isinstance(a, int) else a: v for a, v in invariants.items()}
        if declared_length is None:
            support = [a for a, v in inv.items() if v != 0]
            declared_length = max(support, key=_ord_key) + 1 if support else ZERO
        elif isinstance(declared_length, int):
            declared_length = Ordinal.of(declared_length)
        return cls(p, tuple(inv.items()), div_rank, declared_length)

    def u(self, alpha) -> ExtendedCount:
        if isinstance(alpha, int):
            alpha = Ordinal.of(alpha)
        return dict(self.invariants).get(alpha, 0)

    def as_dict(self) -> dict[Ordinal, ExtendedCount]:
        return dict(self.invariants)

    def __str__(self):
        return format_profile(self)


def _ord_key(a: Ordinal):
    # CNF terms sort lexicographically in the same order as the ordinals,
    # once a sentinel makes shorter prefixes compare smaller.
    return tuple(a.terms) + ((-1, 0),)


# --- closed forms -------------------------------------------------------------


def ulm_invariant(G: ExplicitPGroup, n) -> int:
    if isinstance(n, Ordinal):
        if not n.is_finite:
            return 0
        n = int(n)
    return sum(1 for k in G.exps if k == n + 1)


def length(G: ExplicitPGroup) -> Ordinal:
    return Ordinal.of(max(G.exps, default=0))


def profile_of(G: ExplicitPGroup) -> UlmProfile:
    counts: dict[Ordinal, int] = {}
    for k in G.exps:
        key = Ordinal.of(k - 1)
        counts[key] = counts.get(key, 0) + 1
    return UlmProfile(G.p, tuple(counts.items()), G.div_rank, length(G))


def _as_profile(G) -> UlmProfile:
    return G if isinstance(G, UlmProfile) else profile_of(G)


def iso_by_ulm(G, H) -> bool:
    """Ulm's theorem: isomorphic iff profiles (and divisible ranks) agree."""
    a, b = _as_profile(G), _as_profile(H)
    if a.p != b.p:
        raise ValueError(f"cannot compare a {a.p}-group with a {b.p}-group")
    return a == b


def profile_sum(a: UlmProfile, b: UlmProfile) -> UlmProfile:
    if a.p != b.p:
        raise ValueError("mismatched primes")
    out = dict(a.invariants)
    for alpha, v in b.invariants:
        out[alpha] = count_add(out.get(alpha, 0), v)
    lam = a.declared_length if ord_cmp(a.declared_length, b.declared_length) >= 0 else b.declared_length
    return UlmProfile(a.p, tuple(out.items()), count_add(a.div_rank, b.div_rank), lam)


def shift_profile(u: UlmProfile, m: ExtendedCount) -> UlmProfile:
    """Invariant m at 0, and u(alpha) moved to 1 + alpha."""
    one = Ordinal.of(1)
    out: dict[Ordinal, ExtendedCount] = {ZERO: m}
    for alpha, v in u.invariants:
        out[ord_add(one, alpha)] = v
    if u.declared_length == ZERO and m == 0:
        lam = ZERO
    else:
        lam = ord_add(one, u.declared_length)
    return UlmProfile(u.p, tuple(out.items()), u.div_rank, lam)


# --- table oracles ------------------------------------------------------------


def _log_p(p: int, n: int) -> int:
    k = round(math.log(n, p))
    if p**k != n:
        raise ValueError(f"{n} is not a power of {p}")
    return k


def table_ulm_invariant(T: ElementTableGroup, n: int) -> int:
    """log_p |(p^n T)[p]| - log_p |(p^(n+1) T)[p]| by counting."""
    socle = T.socle_mask()
    upper = int(np.count_nonzero(T.pn_mask(n) & socle))
    lower = int(np.count_nonzero(T.pn_mask(n + 1) & socle))
    return _log_p(T.p, upper) - _log_p(T.p, lower)


def ulm_invariant_oracle(G: ExplicitPGroup, n: int) -> int:
    if not G.is_finite:
        raise ValueError("the socle-counting oracle needs a finite group")
    return table_ulm_invariant(G.to_table(), n)


def table_length(T: ElementTableGroup) -> int:
    """Smallest n with p^n T == p^(n+1) T, found by iterating the filtration."""
    n = 0
    cur = T.pn_mask(0)
    while True:
        nxt = T.pn_mask(n + 1)
        if (nxt == cur).all():
            return n
        cur, n = nxt, n + 1


# --- brute-force isomorphism ----------------------------------------------------


def _pruning_key(T: ElementTableGroup) -> tuple:
    orders = tuple(np.bincount(T.order_exps, minlength=1).tolist())
    sizes = []
    n = 0
    while True:
        size = int(np.count_nonzero(T.pn_mask(n)))
        sizes.append(size)
        if size == 1:
            break
        n += 1
    return orders, tuple(sizes)


def _heights(T: ElementTableGroup) -> np.ndarray:
    h = np.zeros(T.size, dtype=np.int64)
    n = 1
    while True:
        mask = T.pn_mask(n)
        h[mask] = n
        if np.count_nonzero(mask) == 1:
            return h
        n += 1


def iter_group_isos(T1: ElementTableGroup, T2: ElementTableGroup) -> Iterator[np.ndarray]:
    """Yield every additive bijection T1 -> T2 as an index array.

    Backtracks over images of a greedy generating sequence of T1.  Every
    yielded map has been checked against both tables in full.
    """
    if T1.p != T2.p or T1.size != T2.size:
        return
    if _pruning_key(T1) != _pruning_key(T2):
        return
    sig1 = list(zip(T1.order_exps.tolist(), _heights(T1).tolist()))
    sig2 = list(zip(T2.order_exps.tolist(), _heights(T2).tolist()))
    by_sig: dict[tuple, list[int]] = {}
    for y, s in enumerate(sig2):
        by_sig.setdefault(s, []).append(y)

    n, p = T1.size, T1.p
    gens: list[int] = []
    rel: list[int] = []  # relative order exponents
    covered = np.zeros(n, dtype=bool)
    covered[T1.zero] = True
    members = np.array([T1.zero])
    for g in sorted(range(n), key=lambda x: (-sig1[x][0], x)):
        if covered[g]:
            continue
        r, x = 0, g
        while not covered[x]:
            x = int(T1.times_p[x])
            r += 1
        mult = _multiples(T1, g, p**r)
        members = T1.table[np.ix_(members, mult)].ravel()
        covered[members] = True
        gens.append(g)
        rel.append(r)

    phi = np.full(n, -1, dtype=np.int64)
    phi[T1.zero] = T2.zero

    def extend(i: int, dom: np.ndarray) -> Iterator[np.ndarray]:
        if i == len(gens):
            if len(dom) == n and _is_hom(T1, T2, phi):
                yield phi.copy()
            return
        g, r = gens[i], rel[i]
        target = phi[_p_power(T1, g, r)]
        gm = _multiples(T1, g, p**r)
        new_dom = T1.table[np.ix_(dom, gm)].ravel()
        saved = phi[dom].copy()
        used = np.zeros(T2.size, dtype=bool)
        used[saved] = True
        for y in by_sig.get(sig1[g], ()):
            if used[y] or _p_power(T2, y, r) != target:
                continue
            img = T2.table[np.ix_(saved, _multiples(T2, y, p**r))].ravel()
            if len(np.unique(img)) != len(img):
                continue
            phi[new_dom] = img
            yield from extend(i + 1, new_dom)
            phi[new_dom] = -1
            phi[dom] = saved

    yield from extend(0, np.array([T1.zero]))


def _p_power(T: ElementTableGroup, x: int, r: int) -> int:
    for _ in range(r):
        x = int(T.times_p[x])
    return x


def _multiples(T: ElementTableGroup, g: int, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.int64)
    acc = T.zero
    for j in range(count):
        out[j] = acc
        acc = int(T.table[acc, g])
    return out


def _is_hom(T1: ElementTableGroup, T2: ElementTableGroup, phi: np.ndarray) -> bool:
    if (phi < 0).any() or len(np.unique(phi)) != len(phi):
        return False
    return bool((T2.table[np.ix_(phi, phi)] == phi[T1.table]).all())


def brute_force_group_iso(T1: ElementTableGroup, T2: ElementTableGroup) -> np.ndarray | None:
    return next(iter_group_isos(T1, T2), None)


# --- text format ----------------------------------------------------------------

_PROFILE_RE = re.compile(
    r"^\s*p\s*=\s*(\d+)\s*;\s*u\s*=\s*\{([^}]*)\}\s*;\s*div\s*=\s*(\w+)\s*;\s*len\s*=\s*([\w^*+]+)\s*$"
)


def format_profile(u: UlmProfile) -> str:
    inv = ",".join(f"{format_ordinal(a)}:{format_count(v)}" for a, v in u.invariants)
    return f"p={u.p}; u={{{inv}}}; div={format_count(u.div_rank)}; len={format_ordinal(u.declared_length)}"


def parse_profile(text: str) -> UlmProfile:
    m = _PROFILE_RE.match(text)
    if not m:
        raise ParseError(f"bad profile text {text!r}")
    try:
        inv: dict[Ordinal, ExtendedCount] = {}
        body = m.group(2).strip()
        if body:
            for item in body.split(","):
                key, _, val = item.partition(":")
                alpha = parse_ordinal(key)
                if alpha in inv:
                    raise ValueError(f"duplicate index {key}")
                inv[alpha] = parse_count(val)
        return UlmProfile(int(m.group(1)), tuple(inv.items()), parse_count(m.group(3)), parse_ordinal(m.group(4)))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc

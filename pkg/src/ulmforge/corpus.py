"""Seeded corpora of groups and L_p structures, plus the mutation fixtures."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from importlib import resources
from typing import Iterator

from .pgroup import ExplicitPGroup, format_group
from .tp import SCHEMATA, LpStructure, check_axioms, encode, parse_structure, structure_iso


@dataclass(frozen=True)
class CorpusSpec:
    primes: tuple[int, ...] = (2, 3)
    max_summands: int = 4
    max_exponent: int = 4
    max_order: int = 64
    max_div_rank: int = 1
    max_m: int = 3
    seed: int = 0
    relabel_samples: int = 1

    def __post_init__(self):
        for name in ("max_summands", "max_exponent", "max_order", "max_div_rank", "max_m", "relabel_samples"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def empty(self) -> bool:
        return not self.primes or self.max_order < 1


def partitions(n: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of n into non-increasing parts."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def finite_groups(p: int, max_order: int, max_summands: int | None = None,
                  max_exponent: int | None = None) -> list[ExplicitPGroup]:
    """One representative per isomorphism type of order <= max_order."""
    out = []
    k = 0
    while p**k <= max_order:
        for part in partitions(k):
            if max_summands is not None and len(part) > max_summands:
                continue
            if max_exponent is not None and part and part[0] > max_exponent:
                continue
            out.append(ExplicitPGroup(p, part))
        k += 1
    return out


def group_corpus(spec: CorpusSpec) -> list[ExplicitPGroup]:
    if spec.empty:
        return []
    return [G for p in spec.primes
            for G in finite_groups(p, spec.max_order, spec.max_summands, spec.max_exponent)]


def divisible_corpus(spec: CorpusSpec) -> list[ExplicitPGroup]:
    """Small groups with a divisible part, for the formula evaluators."""
    if spec.empty:
        return []
    out = []
    for p in spec.primes:
        for d in range(1, spec.max_div_rank + 1):
            for exps in [(), (1,), (2,)]:
                out.append(ExplicitPGroup(p, exps, d))
    return out


def random_relabel(M: LpStructure, rng: random.Random) -> tuple[LpStructure, list[int]]:
    perm = list(range(M.size))
    rng.shuffle(perm)
    return M.relabel(perm), perm


def model_corpus(spec: CorpusSpec) -> list[tuple[str, LpStructure]]:
    """encode(G, m) for every corpus group and m <= max_m, followed by
    seeded random relabelings of each."""
    rng = random.Random(spec.seed)
    out = []
    for G in group_corpus(spec):
        for m in range(spec.max_m + 1):
            M = encode(G, m)
            label = f"{format_group(G).replace(' ', '')} m={m}"
            out.append((label, M))
            for i in range(spec.relabel_samples):
                out.append((f"{label} relabel={i}", random_relabel(M, rng)[0]))
    return out


def thicken_zero(M: LpStructure, k: int) -> LpStructure:
    """Put zero into R_1..R_k as well, copying every triple that mentions
    zero under each admissible re-ranking of those positions."""
    ranks = range(1, k + 1)
    R = {n: set(xs) for n, xs in M.R.items()}
    for n in ranks:
        R.setdefault(n, set()).add(M.zero)
    P = {key: set(ts) for key, ts in M.P.items()}
    for key, ts in M.P.items():
        for t in ts:
            slots = [i for i in range(3) if t[i] == M.zero]
            for choice in itertools.product([None, *ranks], repeat=len(slots)):
                new = list(key)
                for i, c in zip(slots, choice):
                    if c is not None:
                        new[i] = c
                if new[2] <= max(new[0], new[1]):
                    P.setdefault(tuple(new), set()).add(t)
    return M.replace(R=R, P=P)


# --- exhaustive model enumeration ---------------------------------------------------


def _rank_assignments(T, p: int, max_index: int, single_rank: bool):
    """Rank sets with n-1 a rank of p*x and n a rank of j*x (1 < j < p)
    whenever n >= 1 is a rank of x.  Zero always has rank 0 and nothing
    else does."""
    positive = range(1, max_index + 1)
    if single_rank:
        nonzero_opts = [frozenset({n}) for n in positive]
        zero_opts = [frozenset({0})]
    else:
        nonzero_opts = [frozenset(s) for r in range(1, max_index + 1)
                        for s in itertools.combinations(positive, r)]
        zero_opts = [frozenset({0}) | s for s in [frozenset()] + nonzero_opts]
    order = sorted(range(T.size), key=lambda x: (int(T.order_exps[x]), x))
    rk: dict[int, frozenset] = {}

    def consistent(x: int) -> bool:
        for y in (x, *rk):
            if y not in rk:
                continue
            for n in rk[y]:
                if n == 0:
                    continue
                needs = [(T.mul(p, y), n - 1)] + [(T.mul(j, y), n) for j in range(2, p)]
                if any(z in rk and k not in rk[z] for z, k in needs):
                    return False
        return True

    def extend(i: int):
        if i == len(order):
            yield tuple(rk[x] for x in range(T.size))
            return
        x = order[i]
        for opt in (zero_opts if x == T.zero else nonzero_opts):
            rk[x] = opt
            if consistent(x):
                yield from extend(i + 1)
            del rk[x]

    yield from extend(0)


def _key_options(T, p: int, rk) -> list[tuple[tuple[int, int], list[frozenset]]] | None:
    """Per unordered pair, every admissible key set (swap-closed on the
    diagonal); None when some requirement cannot be met."""
    size = T.size
    required: dict[tuple[int, int], set] = {(x, y): set() for x in range(size) for y in range(size)}
    for x in range(size):
        for n in rk[x]:
            required[(T.zero, x)].add((0, n, n))
            required[(x, T.zero)].add((n, 0, n))
            neg = T.neg(x)
            required[(x, neg)].add((n, n, 0))
            required[(neg, x)].add((n, n, 0))
            if n >= 1:
                for j in range(1, p):
                    e = n if j < p - 1 else n - 1
                    required[(x, T.mul(j, x))].add((n, n, e))
    out = []
    for x in range(size):
        for y in range(x, size):
            z = T.add(x, y)
            allowed = {(l, m, n) for l in rk[x] for m in rk[y] for n in rk[z] if n <= max(l, m)}
            need = required[(x, y)] | {(m, l, n) for l, m, n in required[(y, x)]}
            if not need <= allowed:
                return None
            if x == y:
                need |= {(m, l, n) for l, m, n in need}
                units = sorted({frozenset({(l, m, n), (m, l, n)}) for l, m, n in allowed - need}, key=sorted)
            else:
                units = [frozenset({k}) for k in sorted(allowed - need)]
            opts = []
            for r in range(len(units) + 1):
                for extra in itertools.combinations(units, r):
                    keys = frozenset(need).union(*extra)
                    covered = {(l, m) for l, m, _ in keys}
                    if all((l, m) in covered for l in rk[x] for m in rk[y]):
                        opts.append(keys)
            if not opts:
                return None
            out.append(((x, y), opts))
    return out


def enumerate_models(p: int, max_domain: int, max_index: int, single_rank: bool = False,
                     limit: int = 200_000) -> list[LpStructure]:
    """Every model of T_p with at most max_domain elements whose nonempty
    relations all have indices <= max_index, one per isomorphism type.

    Uses that the ranked elements of a model form an abelian p-group under
    P and the unranked ones occur in no relation, so a model is a group, a
    number of loose points, a set of ranks per element and a set of keys
    per pair.  Each candidate is confirmed by the axiom checker.  With
    ``single_rank`` only structures whose elements each lie in exactly one
    R_n are produced.
    """
    found: list[LpStructure] = []
    examined = 0
    for G in finite_groups(p, max_domain):
        T = G.to_table()
        for rk in _rank_assignments(T, p, max_index, single_rank):
            options = _key_options(T, p, rk)
            if options is None:
                continue
            pairs = [pr for pr, _ in options]
            for combo in itertools.product(*(opts for _, opts in options)):
                examined += 1
                if examined > limit:
                    raise RuntimeError("enumeration exceeded its candidate limit")
                R: dict[int, set[int]] = {}
                for x, ns in enumerate(rk):
                    for n in ns:
                        R.setdefault(n, set()).add(x)
                P: dict[tuple, set] = {}
                for (x, y), keys in zip(pairs, combo):
                    z = T.add(x, y)
                    for l, m, n in keys:
                        P.setdefault((l, m, n), set()).add((x, y, z))
                        P.setdefault((m, l, n), set()).add((y, x, z))
                for extra in range(max_domain - T.size + 1):
                    M = LpStructure(p, T.size + extra, T.zero, R, P)
                    if not check_axioms(M).passed:
                        break
                    if not any(structure_iso(M, N) is not None for N in found):
                        found.append(M)
    return found


# --- mutation fixtures ---------------------------------------------------------------


def load_mutation_fixtures() -> dict[str, LpStructure]:
    """Structures failing exactly one schema, keyed by schema name."""
    root = resources.files("ulmforge") / "fixtures" / "mutations"
    out = {}
    for schema in SCHEMATA:
        f = root / f"{schema}.txt"
        if f.is_file():
            out[schema] = parse_structure(f.read_text())
    return out

"""The relational language L_p, its theory T_p, and the encoder/decoder pair.

An :class:`LpStructure` lives on indices 0..N-1 with a constant ``zero``,
unary relations ``R[n]`` and ternary relations ``P[(l, m, n)]`` (read
P^n_{l,m}).  Only finitely many relations are nonempty.
"""
from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import NotAModelError, ParseError
from .pgroup import ElementTableGroup, ExplicitPGroup, is_prime
from .ulm import table_length, table_ulm_invariant

__all__ = [
    "SCHEMATA",
    "LpStructure",
    "AxiomReport",
    "Failure",
    "encode",
    "encode_table",
    "check_axioms",
    "decode",
    "classify",
    "structure_iso",
    "parse_structure",
    "format_structure",
]

Key = tuple[int, int, int]
Triple = tuple[int, int, int]

SCHEMATA = ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8")


@dataclass(frozen=True, eq=False)
class LpStructure:
    p: int
    size: int
    zero: int
    R: Mapping[int, frozenset[int]] = field(default_factory=dict)
    P: Mapping[Key, frozenset[Triple]] = field(default_factory=dict)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.size < 1 or not 0 <= self.zero < self.size:
            raise ValueError("structure needs a non-empty domain containing zero")
        R = {}
        for n, members in sorted(self.R.items()):
            members = frozenset(int(x) for x in members)
            if n < 0:
                raise ValueError(f"bad relation index R{n}")
            if any(not 0 <= x < self.size for x in members):
                raise ValueError(f"R{n} mentions an index outside the domain")
            if members:
                R[int(n)] = members
        P = {}
        for key, triples in sorted(self.P.items()):
            l, m, n = key
            if min(key) < 0 or n > max(l, m):
                raise ValueError(f"P[{l},{m}->{n}] is not a symbol of L_p")
            triples = frozenset(tuple(int(v) for v in t) for t in triples)
            if any(len(t) != 3 or not all(0 <= v < self.size for v in t) for t in triples):
                raise ValueError(f"P[{l},{m}->{n}] has a bad triple")
            if triples:
                P[(l, m, n)] = triples
        object.__setattr__(self, "R", MappingProxyType(R))
        object.__setattr__(self, "P", MappingProxyType(P))

    def __eq__(self, other):
        if not isinstance(other, LpStructure):
            return NotImplemented
        return (self.p, self.size, self.zero, dict(self.R), dict(self.P)) == (
            other.p, other.size, other.zero, dict(other.R), dict(other.P))

    def __hash__(self):
        return hash((self.p, self.size, self.zero, len(self.P)))

    @property
    def max_index(self) -> int:
        """Largest index of any nonempty relation symbol (0 if none)."""
        idx = list(self.R) + [v for key in self.P for v in key]
        return max(idx, default=0)

    def ranked(self) -> frozenset[int]:
        """Elements lying in some R_n."""
        return frozenset().union(*self.R.values()) if self.R else frozenset()

    def replace(self, R=None, P=None) -> "LpStructure":
        return LpStructure(self.p, self.size, self.zero,
                           dict(self.R) if R is None else R,
                           dict(self.P) if P is None else P)

    def relabel(self, perm: Sequence[int]) -> "LpStructure":
        """Image under the bijection i -> perm[i]."""
        perm = list(perm)
        if sorted(perm) != list(range(self.size)):
            raise ValueError("not a permutation of the domain")
        R = {n: {perm[x] for x in xs} for n, xs in self.R.items()}
        P = {k: {(perm[a], perm[b], perm[c]) for a, b, c in ts} for k, ts in self.P.items()}
        return LpStructure(self.p, self.size, perm[self.zero], R, P)

    def __str__(self):
        return format_structure(self)


# --- encoder --------------------------------------------------------------------


def encode_table(T: ElementTableGroup, m: int = 0) -> LpStructure:
    """The structure of T plus m relation-free points, on indices of T."""
    if not isinstance(m, int) or m < 0:
        raise ValueError("m must be a natural number")
    n = T.size
    orders = T.order_exps
    R: dict[int, set[int]] = defaultdict(set)
    for x, k in enumerate(orders.tolist()):
        R[k].add(x)
    xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    zs = T.table
    keys = np.stack([orders[xs], orders[ys], orders[zs]], axis=-1).reshape(-1, 3)
    trip = np.stack([xs, ys, zs], axis=-1).reshape(-1, 3)
    P: dict[Key, set[Triple]] = defaultdict(set)
    for key, t in zip(map(tuple, keys.tolist()), map(tuple, trip.tolist())):
        P[key].add(t)
    return LpStructure(T.p, n + m, T.zero, R, P)


def encode(G: ExplicitPGroup, m: int = 0) -> LpStructure:
    """M(G, m): element i of G's enumeration is index i; points follow."""
    if not G.is_finite:
        raise ValueError("encode needs a finite group")
    return encode_table(G.to_table(), m)


# --- axiom checker ----------------------------------------------------------------


class Failure(NamedTuple):
    instance: str
    witness: tuple[tuple[str, int], ...]

    def __str__(self):
        wit = " ".join(f"{k}={v}" for k, v in self.witness)
        return f"{self.instance} {wit}".strip()


@dataclass
class AxiomReport:
    bound: int
    failures: dict[str, list[Failure]] = field(default_factory=dict)
    truncated: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())

    def status(self, schema: str) -> bool:
        return not self.failures.get(schema)

    @property
    def failing(self) -> list[str]:
        return [s for s in SCHEMATA if not self.status(s)]

    def to_text(self) -> str:
        lines = [f"bound={self.bound}"]
        for s in SCHEMATA:
            fails = self.failures.get(s, [])
            if not fails:
                lines.append(f"{s} PASS")
                continue
            more = " (more omitted)" if self.truncated.get(s) else ""
            lines.append(f"{s} FAIL {len(fails)} instance(s){more}")
            lines.extend(f"  {s} {f}" for f in fails)
        lines.append("model: yes" if self.passed else "model: no")
        return "\n".join(lines)


class _Index:
    """Lookup tables for one structure restricted to symbols <= bound."""

    def __init__(self, M: LpStructure, bound: int):
        self.M = M
        self.bound = bound
        self.ranks: list[list[int]] = [[] for _ in range(M.size)]
        for n, xs in M.R.items():
            if n <= bound:
                for x in xs:
                    self.ranks[x].append(n)
        self.R = {n: xs for n, xs in M.R.items() if n <= bound}
        self.pset: set[tuple] = set()
        self.out: dict[tuple, list[tuple[int, int]]] = defaultdict(list)
        for (l, m, n), ts in M.P.items():
            if max(l, m, n) > bound:
                continue
            for x, y, z in ts:
                self.pset.add((l, m, n, x, y, z))
                self.out[(l, m, x, y)].append((n, z))

    def in_R(self, n: int, x: int) -> bool:
        return x in self.R.get(n, ())


def _a1(ix: _Index):
    for (l, m, n, x, y, z) in sorted(ix.pset):
        if not (ix.in_R(l, x) and ix.in_R(m, y) and ix.in_R(n, z)):
            yield Failure(f"l={l} m={m} n={n}", (("x", x), ("y", y), ("z", z)))


def _chain(ix: _Index, n: int, x: int) -> bool:
    p = ix.M.p
    frontier = {x}
    for j in range(1, p):
        e = n if j < p - 1 else n - 1
        frontier = {z for y in frontier for (k, z) in ix.out.get((n, n, x, y), ()) if k == e}
        if not frontier:
            return False
    return True


def _a2(ix: _Index):
    M = ix.M
    for x in range(M.size):
        if ix.in_R(0, x) != (x == M.zero):
            yield Failure("n=0", (("x", x),))
    for n in range(1, ix.bound + 1):
        for x in range(M.size):
            if ix.in_R(n, x) != _chain(ix, n, x):
                yield Failure(f"n={n}", (("x", x),))


def _a3(ix: _Index):
    by_pair: dict[tuple, set[int]] = defaultdict(set)
    for (l, m, x, y), outs in ix.out.items():
        for _, z in outs:
            by_pair[(l, m, x, y)].add(z)
    for (l, m, x, y), zs in sorted(by_pair.items()):
        if len(zs) > 1:
            z1, z2 = sorted(zs)[:2]
            yield Failure(f"l={l} m={m}", (("x", x), ("y", y), ("z", z1), ("z'", z2)))


def _a4(ix: _Index):
    M = ix.M
    for x in range(M.size):
        for l in ix.ranks[x]:
            for y in range(M.size):
                for m in ix.ranks[y]:
                    if not any(n <= max(l, m) for n, _ in ix.out.get((l, m, x, y), ())):
                        yield Failure(f"l={l} m={m}", (("x", x), ("y", y)))


def _a5(ix: _Index):
    zero = ix.M.zero
    for x in range(ix.M.size):
        for l in ix.ranks[x]:
            if (0, l, l, zero, x, x) not in ix.pset or (l, 0, l, x, zero, x) not in ix.pset:
                yield Failure(f"l={l}", (("x", x),))


def _a6(ix: _Index):
    M = ix.M
    for x in range(M.size):
        for l in ix.ranks[x]:
            if not any((l, l, 0, x, y, M.zero) in ix.pset and (l, l, 0, y, x, M.zero) in ix.pset
                       for y in range(M.size)):
                yield Failure(f"l={l}", (("x", x),))


def _a7_general(ix: _Index):
    M = ix.M
    ranked = [(x, l) for x in range(M.size) for l in ix.ranks[x]]
    for x, l in ranked:
        for y, m in ranked:
            xy = ix.out.get((l, m, x, y), ())
            for z, n in ranked:
                if not _a7_instance(ix, x, y, z, l, m, n, xy):
                    yield Failure(f"l={l} m={m} n={n}", (("x", x), ("y", y), ("z", z)))


def _a7_instance(ix: _Index, x, y, z, l, m, n, xy) -> bool:
    for r, u in xy:
        if r > max(l, m):
            continue
        for s, v in ix.out.get((m, n, y, z), ()):
            if s > max(m, n):
                continue
            for t, w in ix.out.get((r, n, u, z), ()):
                if t <= max(r, n) and t <= max(l, s) and (l, s, t, x, v, w) in ix.pset:
                    return True
    return False


def _clean_ranks(ix: _Index) -> np.ndarray | None:
    """Rank array when every P triple is keyed by the unique ranks of its
    entries and each pair has at most one sum; None otherwise.

    Under these conditions P^r_{l,m}(x,y,u) holds iff u = x+y in the
    partial table and (l, m, r) are the ranks, and the order constraints
    of the associativity schema are implied by the keys existing.
    """
    M = ix.M
    rank = np.full(M.size, -1, dtype=np.int64)
    for x, rs in enumerate(ix.ranks):
        if len(rs) > 1:
            return None
        if rs:
            rank[x] = rs[0]
    seen = set()
    for (l, m, n, x, y, z) in ix.pset:
        if (x, y) in seen or rank[x] != l or rank[y] != m or rank[z] != n:
            return None
        seen.add((x, y))
    return rank


def _a7_fast(ix: _Index, rank: np.ndarray):
    M = ix.M
    live = np.flatnonzero(rank >= 0)
    if len(live) == 0:
        return
    pos = np.full(M.size, -1, dtype=np.int64)
    pos[live] = np.arange(len(live))
    k = len(live)
    add = np.full((k + 1, k + 1), k, dtype=np.int64)  # k is the "undefined" sink
    for (_, _, _, x, y, z) in ix.pset:
        add[pos[x], pos[y]] = pos[z]
    a = add[:k, :k]
    u = a[:, :, None]                 # x+y
    v = a[None, :, :]                 # y+z
    w = add[u, np.arange(k)[None, None, :]]   # (x+y)+z
    w2 = add[np.arange(k)[:, None, None], v]  # x+(y+z)
    ok = (u < k) & (v < k) & (w < k) & (w2 == w)
    for i, j, l in np.argwhere(~ok):
        x, y, z = live[i], live[j], live[l]
        yield Failure(f"l={rank[x]} m={rank[y]} n={rank[z]}", (("x", int(x)), ("y", int(y)), ("z", int(z))))


def _a8(ix: _Index):
    for (l, m, n, x, y, z) in sorted(ix.pset):
        if ix.in_R(l, x) and ix.in_R(m, y) and ix.in_R(n, z) and (m, l, n, y, x, z) not in ix.pset:
            yield Failure(f"l={l} m={m} n={n}", (("x", x), ("y", y), ("z", z)))


def check_axioms(M: LpStructure, bound: int | None = None, max_failures: int = 20,
                 fast: bool = True) -> AxiomReport:
    """Evaluate every schema instance with symbol indices <= bound.

    The default bound is one more than the largest index of a nonempty
    relation; every instance above it has an empty antecedent on both sides.
    """
    if bound is None:
        bound = M.max_index + 1
    ix = _Index(M, bound)
    a7 = _a7_general
    if fast:
        rank = _clean_ranks(ix)
        if rank is not None:
            a7 = lambda ix: _a7_fast(ix, rank)  # noqa: E731
    checks = {"A1": _a1, "A2": _a2, "A3": _a3, "A4": _a4, "A5": _a5, "A6": _a6, "A7": a7, "A8": _a8}
    report = AxiomReport(bound)
    for name in SCHEMATA:
        fails = []
        truncated = False
        for f in checks[name](ix):
            if len(fails) == max_failures:
                truncated = True
                break
            fails.append(f)
        report.failures[name] = fails
        report.truncated[name] = truncated
    return report


# --- decoder ---------------------------------------------------------------------


class Decoded(NamedTuple):
    table: ElementTableGroup
    size: int
    domain: tuple[int, ...]  # structure index of each table index


def decode(M: LpStructure) -> Decoded:
    """G(M) on the ranked elements (renumbered in increasing order), and #M."""
    report = check_axioms(M)
    if not report.passed:
        raise NotAModelError(f"not a model of T_p: fails {', '.join(report.failing)}", report)
    domain = tuple(sorted(M.ranked()))
    pos = {x: i for i, x in enumerate(domain)}
    k = len(domain)
    table = np.full((k, k), -1, dtype=np.int64)
    for ts in M.P.values():
        for x, y, z in ts:
            table[pos[x], pos[y]] = pos[z]
    T = ElementTableGroup(M.p, table, pos[M.zero])
    return Decoded(T, M.size - k, domain)


def classify(T: ElementTableGroup) -> ExplicitPGroup:
    """Exponent k appears u_{k-1}(T) times, by socle counting."""
    exps: list[int] = []
    for k in range(1, table_length(T) + 1):
        exps.extend([k] * table_ulm_invariant(T, k - 1))
    G = ExplicitPGroup(T.p, tuple(exps))
    if G.order != T.size:
        raise ValueError("table is not an abelian p-group")
    return G


# --- structure isomorphism ---------------------------------------------------------


def _height_layers(M: LpStructure) -> list[tuple[bool, ...]]:
    """Membership of each element in D, pD, p^2 D, ... where D is the domain
    and p.y is read off P as y + y + ... + y (all branches).  Definable from
    the relations, hence preserved by any isomorphism."""
    out: dict[tuple[int, int], set[int]] = defaultdict(set)
    for ts in M.P.values():
        for x, y, z in ts:
            out[(x, y)].add(z)

    def times_p(y: int) -> set[int]:
        cur = {y}
        for _ in range(M.p - 1):
            cur = {z for c in cur for z in out.get((c, y), ())}
        return cur

    images = [times_p(y) for y in range(M.size)]
    layer = frozenset(range(M.size))
    layers = [layer]
    for _ in range(M.size):
        layer = frozenset().union(*(images[y] for y in layer)) if layer else frozenset()
        if layer in layers:
            break
        layers.append(layer)
    return [tuple(x in L for L in layers) for x in range(M.size)]


def _signatures(M: LpStructure) -> list[tuple]:
    sig: list[Counter] = [Counter() for _ in range(M.size)]
    for n, xs in M.R.items():
        for x in xs:
            sig[x][("R", n)] += 1
    for key, ts in M.P.items():
        for t in ts:
            for i, v in enumerate(t):
                sig[v][("P", key, i)] += 1
    heights = _height_layers(M)
    return [(x == M.zero, heights[x], tuple(sorted(c.items()))) for x, c in enumerate(sig)]


def _refine_step(M: LpStructure, colour: list[int]) -> list[tuple]:
    nbr: list[list[tuple]] = [[] for _ in range(M.size)]
    for key, ts in M.P.items():
        for t in ts:
            cs = tuple(colour[v] for v in t)
            for i, v in enumerate(t):
                nbr[v].append((key, i, cs))
    return [(colour[x], tuple(sorted(nb))) for x, nb in enumerate(nbr)]


def _refined_colours(M: LpStructure, N: LpStructure):
    """Joint colour refinement; None when the colour multisets diverge."""
    sm, sn = _signatures(M), _signatures(N)
    while True:
        if Counter(sm) != Counter(sn):
            return None, None
        names = {s: i for i, s in enumerate(sorted(set(sm), key=repr))}
        cm, cn = [names[s] for s in sm], [names[s] for s in sn]
        sm, sn = _refine_step(M, cm), _refine_step(N, cn)
        if len(set(sm)) == len(names):
            if Counter(sm) != Counter(sn):
                return None, None
            return cm, cn


def structure_iso(M: LpStructure, N: LpStructure) -> list[int] | None:
    """A bijection M -> N preserving 0, every R_n and every P^n_{l,m}.

    Backtracking with forward checking; candidates are restricted to equal
    relation-degree signatures.
    """
    if M.p != N.p or M.size != N.size:
        return None
    if {n: len(x) for n, x in M.R.items()} != {n: len(x) for n, x in N.R.items()}:
        return None
    if {k: len(t) for k, t in M.P.items()} != {k: len(t) for k, t in N.P.items()}:
        return None
    sm, sn = _refined_colours(M, N)
    if sm is None:
        return None
    by_sig: dict[tuple, set[int]] = defaultdict(set)
    for y, s in enumerate(sn):
        by_sig[s].add(y)
    domains = [set(by_sig[s]) for s in sm]

    m_trip: list[list[tuple[Key, Triple]]] = [[] for _ in range(M.size)]
    for key, ts in M.P.items():
        for t in ts:
            for v in set(t):
                m_trip[v].append((key, t))
    n_set = {(key, t) for key, ts in N.P.items() for t in ts}
    n_slot: dict[tuple, set[int]] = defaultdict(set)
    for key, ts in N.P.items():
        for a, b, c in ts:
            n_slot[(key, 0, b, c)].add(a)
            n_slot[(key, 1, a, c)].add(b)
            n_slot[(key, 2, a, b)].add(c)
    n_trip: list[list[tuple[Key, Triple]]] = [[] for _ in range(N.size)]
    for key, ts in N.P.items():
        for t in ts:
            for v in set(t):
                n_trip[v].append((key, t))

    f = [-1] * M.size
    g = [-1] * N.size

    def consistent(x: int, y: int) -> bool:
        for key, t in m_trip[x]:
            img = tuple(y if v == x else f[v] for v in t)
            if -1 not in img and (key, img) not in n_set:
                return False
        for key, t in n_trip[y]:
            pre = tuple(x if v == y else g[v] for v in t)
            if -1 not in pre and pre not in M.P.get(key, ()):
                return False
        return True

    def propagate(x: int, doms: list[set[int]]) -> list[set[int]] | None:
        doms = list(doms)
        for key, t in m_trip[x]:
            unknown = [i for i, v in enumerate(t) if f[v] == -1]
            if len(set(t[i] for i in unknown)) != 1:
                continue
            target = t[unknown[0]]
            if len(unknown) == 1:
                i = unknown[0]
                others = tuple(f[v] for j, v in enumerate(t) if j != i)
                new = doms[target] & n_slot.get((key, i) + others, set())
            else:
                # the same element fills several slots of the triple
                new = {c for c in doms[target]
                       if (key, tuple(c if v == target else f[v] for v in t)) in n_set}
            if not new:
                return None
            doms[target] = new
        return doms

    def search(doms: list[set[int]]) -> bool:
        free = [x for x in range(M.size) if f[x] == -1]
        if not free:
            return True
        x = min(free, key=lambda v: (len(doms[v] - used), v))
        for y in sorted(doms[x] - used):
            if not consistent(x, y):
                continue
            f[x], g[y] = y, x
            used.add(y)
            nd = propagate(x, doms)
            if nd is not None and search(nd):
                return True
            f[x], g[y] = -1, -1
            used.discard(y)
        return False

    used: set[int] = set()
    domains[M.zero] &= {N.zero}
    if search(domains):
        return f
    return None


# --- text format ----------------------------------------------------------------

_HEADER_RE = re.compile(r"^p\s*=\s*(\d+)\s*;\s*N\s*=\s*(\d+)\s*;\s*zero\s*=\s*(\d+)$")
_R_RE = re.compile(r"^R(\d+)\s*=\s*\{([^}]*)\}$")
_P_RE = re.compile(r"^P\[(\d+),(\d+)->(\d+)\]\s*=\s*\{(.*)\}$")
_TRIPLE_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)")


def format_structure(M: LpStructure) -> str:
    lines = [f"p={M.p}; N={M.size}; zero={M.zero}"]
    for n, xs in sorted(M.R.items()):
        lines.append(f"R{n} = {{{','.join(map(str, sorted(xs)))}}}")
    for (l, m, n), ts in sorted(M.P.items()):
        body = ",".join(f"({a},{b},{c})" for a, b, c in sorted(ts))
        lines.append(f"P[{l},{m}->{n}] = {{{body}}}")
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> LpStructure:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty structure text")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise ParseError(f"bad header {lines[0]!r}")
    p, size, zero = map(int, m.groups())
    R: dict[int, set[int]] = {}
    P: dict[Key, set[Triple]] = {}
    for ln in lines[1:]:
        if mr := _R_RE.match(ln):
            n = int(mr.group(1))
            if n in R:
                raise ParseError(f"R{n} given twice")
            body = mr.group(2).strip()
            try:
                R[n] = {int(s) for s in body.split(",")} if body else set()
            except ValueError as exc:
                raise ParseError(f"bad element list in {ln!r}") from exc
            continue
        if mp := _P_RE.match(ln):
            key = tuple(int(g) for g in mp.groups()[:3])
            if key in P:
                raise ParseError(f"P{list(key)} given twice")
            body = mp.group(4).strip()
            triples = _TRIPLE_RE.findall(body)
            if _TRIPLE_RE.sub("", body).replace(",", "").strip():
                raise ParseError(f"bad triple list in {ln!r}")
            P[key] = {tuple(map(int, t)) for t in triples}
            continue
        raise ParseError(f"unrecognised line {ln!r}")
    try:
        return LpStructure(p, size, zero, R, P)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc

"""The extension G* (pa_b = b for a basis b of G/pG), the group
H(G, m) = G* + (Z/p)^m, its verification lemmas, and the Borel reduction
between models of T_p and abelian p-groups.

Large instances are handled without materialising Cayley tables: the
group operations below act on index arrays, and Ulm invariants are
counted from the multiplication-by-p map alone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ordinal import OMEGA, ExtendedCount
from .pgroup import ElementTableGroup, ExplicitPGroup, format_group
from .tp import LpStructure, classify, decode, encode
from .ulm import UlmProfile, brute_force_group_iso, profile_of, shift_profile

__all__ = [
    "BasisSet",
    "StarElement",
    "StarGroup",
    "HGroup",
    "basis_mod_p",
    "table_basis_mod_p",
    "decomposition_counts",
    "decompose",
    "gstar_table",
    "hred",
    "hred_table",
    "verify_hred",
    "borel_reduce",
    "borel_forward",
]


@dataclass(frozen=True)
class BasisSet:
    """Representatives whose cosets form a basis of G/pG.

    Holds :class:`GroupElement` values for explicit groups and table
    indices for element tables.
    """

    representatives: tuple

    def __len__(self):
        return len(self.representatives)


def basis_mod_p(G: ExplicitPGroup) -> BasisSet:
    """Standard generators of the cyclic summands."""
    reps = []
    for i in range(len(G.exps)):
        cyc = [0] * len(G.exps)
        cyc[i] = 1
        reps.append(G.element(cyc, [0] * G.div_rank))
    return BasisSet(tuple(reps))


def _subgroup_join(T: ElementTableGroup, mask: np.ndarray, g: int) -> np.ndarray:
    """<mask, g> for a subgroup mask containing p*g."""
    out = mask.copy()
    members = np.flatnonzero(mask)
    shift = members
    for _ in range(1, T.p):
        shift = T.table[shift, g]
        out[shift] = True
    return out


def table_basis_mod_p(T: ElementTableGroup) -> BasisSet:
    """Greedy choice in index order: keep x when it lies outside the
    subgroup generated by pT and the elements kept so far."""
    span = T.pn_mask(1)
    reps = []
    for x in range(T.size):
        if not span[x]:
            reps.append(x)
            span = _subgroup_join(T, span, x)
    return BasisSet(tuple(reps))


def _combinations(T: ElementTableGroup, basis: BasisSet) -> np.ndarray:
    """sum_b x_b b for every x in [0,p)^r, x read little-endian."""
    sums = np.array([T.zero], dtype=np.int64)
    for b in basis.representatives:
        mults = [T.zero]
        for _ in range(1, T.p):
            mults.append(int(T.table[mults[-1], b]))
        # new index j * len(old) + i holds old[i] + j*b
        sums = T.table[np.ix_(np.array(mults), sums)].ravel()
    return sums


def decomposition_counts(T: ElementTableGroup, basis: BasisSet) -> np.ndarray:
    """For each g, how many (h, x) with h in pT satisfy g = h + sum x_b b."""
    combos = _combinations(T, basis)
    in_pg = T.pn_mask(1)
    neg = T.negatives
    h = T.table[:, neg[combos]]  # g - combo
    return in_pg[h].sum(axis=1)


def decompose(T: ElementTableGroup, basis: BasisSet, g: int) -> tuple[int, tuple[int, ...]]:
    combos = _combinations(T, basis)
    h = T.table[g, T.negatives[combos]]
    hits = np.flatnonzero(T.pn_mask(1)[h])
    if len(hits) != 1:
        raise ValueError(f"element {g} has {len(hits)} decompositions")
    code = int(hits[0])
    coeffs = tuple((code // T.p**i) % T.p for i in range(len(basis)))
    return int(h[code]), coeffs


@dataclass(frozen=True)
class StarElement:
    base: int
    coeffs: tuple[int, ...]


def _digits(code: np.ndarray, p: int, r: int) -> np.ndarray:
    return (code[..., None] // (p ** np.arange(r))) % p


def _undigits(d: np.ndarray, p: int) -> np.ndarray:
    return (d * (p ** np.arange(d.shape[-1]))).sum(axis=-1)


class StarGroup:
    """G* as pairs (g, x) with x in [0,p)^r; index g + |T| * code(x).

    (g, x) + (h, y) = (g + h + sum_b floor((x_b + y_b) / p) b, (x + y) mod p).
    """

    def __init__(self, T: ElementTableGroup, basis: BasisSet | None = None):
        self.T = T
        self.p = T.p
        self.basis = table_basis_mod_p(T) if basis is None else basis
        self.rank = len(self.basis)
        self.size = T.size * self.p**self.rank
        self.zero = T.zero
        # carry vectors are 0/1, so tabulate sum_b c_b b for c in {0,1}^r
        carry = np.array([T.zero], dtype=np.int64)
        for b in self.basis.representatives:
            carry = np.concatenate([carry, T.table[carry, b]])
        self._carry = carry

    def index(self, e: StarElement) -> int:
        code = sum(c * self.p**i for i, c in enumerate(e.coeffs))
        return e.base + self.T.size * code

    def element(self, idx: int) -> StarElement:
        code, base = divmod(int(idx), self.T.size)
        return StarElement(base, tuple(int(c) for c in _digits(np.array(code), self.p, self.rank)))

    def generator(self, i: int) -> int:
        """a_b for the i-th representative."""
        return self.zero + self.T.size * self.p**i

    def add(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        n, p, r = self.T.size, self.p, self.rank
        g, x = a % n, a // n
        h, y = b % n, b // n
        s = _digits(x, p, r) + _digits(y, p, r)
        carry_code = _undigits(s // p, 2) if r else np.zeros_like(x)
        base = self.T.table[self.T.table[g, h], self._carry[carry_code]]
        return base + n * (_undigits(s % p, p) if r else 0)

    def table(self) -> ElementTableGroup:
        idx = np.arange(self.size, dtype=np.int64)
        return ElementTableGroup(self.p, self.add(idx[:, None], idx[None, :]), self.zero)


class HGroup:
    """G* + (Z/p)^m; index s + |G*| * code(v)."""

    def __init__(self, T: ElementTableGroup, m: int, basis: BasisSet | None = None):
        self.star = StarGroup(T, basis)
        self.p = T.p
        self.m = m
        self.size = self.star.size * self.p**m
        self.zero = self.star.zero

    def add(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        n = self.star.size
        s = self.star.add(a % n, b % n)
        if self.m == 0:
            return s
        v = _undigits((_digits(a // n, self.p, self.m) + _digits(b // n, self.p, self.m)) % self.p, self.p)
        return s + n * v

    def table(self, verify: bool = True) -> ElementTableGroup:
        idx = np.arange(self.size, dtype=np.int64)
        return ElementTableGroup(self.p, self.add(idx[:, None], idx[None, :]), self.zero, verify)


def gstar_table(T: ElementTableGroup, basis: BasisSet | None = None) -> ElementTableGroup:
    return StarGroup(T, basis).table()


def hred_table(T: ElementTableGroup, m: int, basis: BasisSet | None = None) -> ElementTableGroup:
    return HGroup(T, m, basis).table()


def hred(G: ExplicitPGroup, m: ExtendedCount):
    """Closed form: every exponent grows by one and m copies of Z/p join.

    An infinite m gives a :class:`UlmProfile`.
    """
    if m is OMEGA:
        return shift_profile(profile_of(G), OMEGA)
    if not isinstance(m, int) or m < 0:
        raise ValueError("m must be a natural number or OMEGA")
    return ExplicitPGroup(G.p, tuple(k + 1 for k in G.exps) + (1,) * m, G.div_rank)


# --- counting on operation-only groups --------------------------------------------------


def _times_p(group, p: int) -> np.ndarray:
    idx = np.arange(group.size, dtype=np.int64)
    acc = idx.copy()
    for _ in range(p - 1):
        acc = group.add(acc, idx)
    return acc


def _ulm_by_counting(times_p: np.ndarray, zero: int, p: int) -> dict[int, int]:
    socle = times_p == zero
    layer = np.ones(len(times_p), dtype=bool)
    out = {}
    n = 0
    while True:
        nxt = np.zeros_like(layer)
        nxt[times_p[layer]] = True
        if (nxt == layer).all():
            return out
        here = int(np.count_nonzero(layer & socle))
        below = int(np.count_nonzero(nxt & socle))
        if here != below:
            out[n] = _log(p, here) - _log(p, below)
        layer, n = nxt, n + 1


def _log(p: int, x: int) -> int:
    k = 0
    while x > 1:
        if x % p:
            raise ValueError("count is not a power of p")
        x //= p
        k += 1
    return k


def _profile_from_counts(p: int, counts: dict[int, int]) -> UlmProfile:
    return UlmProfile.from_dict(p, counts, 0, max(counts, default=-1) + 1)


def _image_subtable(group, image: np.ndarray) -> ElementTableGroup:
    members = np.flatnonzero(image)
    pos = np.full(group.size, -1, dtype=np.int64)
    pos[members] = np.arange(len(members))
    sums = group.add(members[:, None], members[None, :])
    return ElementTableGroup(group.p, pos[sums], int(pos[group.zero]))


def _alternative_basis(T: ElementTableGroup, basis: BasisSet) -> BasisSet:
    """Reversed order, every representative shifted by a nonzero element of
    pT when there is one, and scaled by 2 when p > 2."""
    pg = np.flatnonzero(T.pn_mask(1) & (np.arange(T.size) != T.zero))
    shift = int(pg[0]) if len(pg) else T.zero
    reps = []
    for b in reversed(basis.representatives):
        c = T.mul(2, b) if T.p > 2 else b
        reps.append(int(T.table[c, shift]))
    return BasisSet(tuple(reps))


@dataclass
class HredReport:
    lines: list[str]

    @property
    def passed(self) -> bool:
        return all(line.startswith("PASS") for line in self.lines)

    def to_text(self) -> str:
        return "\n".join(self.lines)


def verify_hred(G: ExplicitPGroup, m: int, table_limit: int = 4096, presentation_limit: int = 16) -> HredReport:
    """Check the H(G, m) lemmas on one finite group.

    Isomorphisms are found by brute-force search; where the group is
    larger than ``table_limit`` the basis-invariance and recovery lines
    compare Ulm invariants counted from the multiplication-by-p map.
    """
    if not G.is_finite:
        raise ValueError("verify_hred needs a finite group")
    T = G.to_table()
    p = G.p
    tag = f"{format_group(G).replace(' ', '')} m={m}"
    lines: list[str] = []

    def record(ok: bool, lemma: str):
        lines.append(f"{'PASS' if ok else 'FAIL'} {lemma} {tag}")

    basis = table_basis_mod_p(T)
    record(len(basis) == len(G.exps), "basis-size")
    record(bool((decomposition_counts(T, basis) == 1).all()), "unique-decomposition")

    H = HGroup(T, m, basis)
    star = H.star
    # every element is (g, x) with a unique code, the relations hold, and
    # G with the a_b generates a group of order |G| p^r
    star_tp = _times_p(star, p)
    gens_ok = all(int(star_tp[star.generator(i)]) == b for i, b in enumerate(basis.representatives))
    span = np.zeros(star.size, dtype=bool)
    span[: T.size] = True
    for i in range(len(basis)):
        members = np.flatnonzero(span)
        a = star.generator(i)
        shift = members
        for _ in range(1, p):
            shift = star.add(shift, a)
            span[shift] = True
    record(gens_ok and bool(span.all()) and star.size == T.size * p**len(basis), "star-unique-representation")

    image = np.zeros(star.size, dtype=bool)
    image[star_tp] = True
    embedded = np.zeros(star.size, dtype=bool)
    embedded[: T.size] = True
    record(bool((image == embedded).all()), "p-star-equals-G")

    h_tp = _times_p(H, p)
    h_image = np.zeros(H.size, dtype=bool)
    h_image[h_tp] = True
    pH = _image_subtable(H, h_image)
    record(brute_force_group_iso(pH, T) is not None, "p-hred-iso-G")

    socle = int(np.count_nonzero(h_tp == H.zero))
    p_socle = int(np.count_nonzero(h_image & (h_tp == H.zero)))
    record(_log(p, socle) - _log(p, p_socle) == m, "socle-quotient-dim")

    counted = _profile_from_counts(p, _ulm_by_counting(h_tp, H.zero, p))
    record(counted == profile_of(hred(G, m)), "closed-form-ulm")
    recovered = _ulm_by_counting(_times_p(_TableOps(pH), p), pH.zero, p)
    record(_profile_from_counts(p, recovered) == profile_of(G), "recovery")

    alt = HGroup(T, m, _alternative_basis(T, basis))
    if H.size <= table_limit:
        # a bijection respecting every sum carries the group laws across
        same = brute_force_group_iso(H.table(), alt.table(verify=False)) is not None
    else:
        same = counted == _profile_from_counts(p, _ulm_by_counting(_times_p(alt, p), alt.zero, p))
    record(same, "basis-invariance")

    if T.size <= presentation_limit:
        closed = hred(G, m).to_table()
        pres = gstar_table(T, basis).direct_sum(ExplicitPGroup(p, (1,) * m).to_table())
        record(brute_force_group_iso(closed, pres) is not None, "closed-form-iso-presentation")
    return HredReport(lines)


class _TableOps:
    def __init__(self, T: ElementTableGroup):
        self.T, self.size, self.zero, self.p = T, T.size, T.zero, T.p

    def add(self, a, b):
        return self.T.table[a, b]


# --- reductions ------------------------------------------------------------------------


def borel_reduce(M: LpStructure) -> ExplicitPGroup:
    """M -> H(G(M), #M); raises NotAModelError on non-models."""
    decoded = decode(M)
    return hred(classify(decoded.table), decoded.size)


def borel_forward(G: ExplicitPGroup) -> LpStructure:
    """G -> M(G, 0)."""
    return encode(G, 0)


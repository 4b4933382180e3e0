"""Evaluation of the infinitary formulas that pin down Ulm invariants.

* ``psi[alpha](x)`` defines p^alpha G.  Successor stages search the finite
  set of p-preimages, one summand at a time; limit stages use stabilization of the filtration at
  the (finite) length of an explicit group.
* ``phi[alpha,>=n]`` asks for n socle elements satisfying psi[alpha] with
  no nonzero Z/p-combination satisfying psi[alpha+1].
* ``divrank[=n]`` / ``divrank[=w]`` are the divisible-part sentences.  Their
  quantifiers over the divisible part are bounded by a denominator exponent.

Reading of the divisible-part terms: ``(c/p^k) x`` denotes any w in the
divisible part with p^k w = c x, and is 0 when c = 0.  Witnesses x_i are
drawn from the socle of the divisible part.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ParseError
from .ordinal import OMEGA, ExtendedCount, Ordinal, format_count, format_ordinal, ord_cmp, parse_count, parse_ordinal
from .pgroup import ExplicitPGroup, GroupElement, format_element, format_group
from .ulm import length, ulm_invariant

__all__ = [
    "FormulaId",
    "EvalReport",
    "DEFAULT_CAP",
    "eval_psi",
    "eval_phi_geq",
    "eval_phi_exact",
    "eval_divisible_sentence",
    "evaluate",
    "parse_formula",
    "format_formula",
]

DEFAULT_CAP = 8

KINDS = ("psi", "phi_geq", "phi_exact", "divrank_exact", "divrank_infinite")


@dataclass(frozen=True)
class FormulaId:
    kind: str
    alpha: Ordinal | None = None
    n: ExtendedCount | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown formula kind {self.kind!r}")
        needs_alpha = self.kind in ("psi", "phi_geq", "phi_exact")
        if needs_alpha != isinstance(self.alpha, Ordinal):
            raise ValueError(f"{self.kind} {'needs' if needs_alpha else 'takes no'} ordinal index")
        if self.kind == "psi" and self.n is not None:
            raise ValueError("psi takes no count")
        if self.kind in ("phi_geq", "divrank_exact") and not (isinstance(self.n, int) and self.n >= 0):
            raise ValueError(f"{self.kind} needs a natural count")
        if self.kind == "phi_exact" and not (self.n is OMEGA or (isinstance(self.n, int) and self.n >= 0)):
            raise ValueError("phi_exact needs a natural count or w")

    def __str__(self):
        return format_formula(self)


@dataclass
class EvalReport:
    formula: FormulaId
    group: ExplicitPGroup
    verdict: bool
    bound: int | None = None
    witness: tuple[GroupElement, ...] | None = None
    notes: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"formula={format_formula(self.formula)}",
            f"group={format_group(self.group)}",
            f"bound={'none' if self.bound is None else self.bound}",
            f"verdict={'true' if self.verdict else 'false'}",
        ]
        if self.witness is not None:
            lines.append("witness=[" + "; ".join(f"({format_element(w)})" for w in self.witness) + "]")
        lines.extend(f"note={n}" for n in self.notes)
        return "\n".join(lines)


def _as_ordinal(alpha) -> Ordinal:
    return Ordinal.of(alpha) if isinstance(alpha, int) else alpha


def _stage(G: ExplicitPGroup, alpha) -> int:
    """Finite stage equivalent to psi[alpha] on G."""
    alpha = _as_ordinal(alpha)
    lam = length(G)
    if ord_cmp(alpha, lam) >= 0:
        return int(lam)
    return int(alpha)


@lru_cache(maxsize=1 << 16)
def _psi_cyclic(p: int, modulus: int, n: int, a: int) -> bool:
    if n == 0:
        return True
    if a % p:
        return False
    step = modulus // p
    return any(_psi_cyclic(p, modulus, n - 1, (a // p + j * step) % modulus) for j in range(p))


@lru_cache(maxsize=1 << 16)
def _psi_prufer(p: int, n: int, q: Fraction) -> bool:
    if n == 0:
        return True
    return any(_psi_prufer(p, n - 1, (q + j) / p) for j in range(p))


def _psi(G: ExplicitPGroup, n: int, x: GroupElement) -> bool:
    # Addition is coordinatewise, so "exists y with p*y = x and psi(y)"
    # splits into one preimage search per summand.
    return (all(_psi_cyclic(G.p, m, n, a) for a, m in zip(x.cyclic, G.moduli))
            and all(_psi_prufer(G.p, n, q) for q in x.prufer))


def eval_psi(G: ExplicitPGroup, alpha, x: GroupElement) -> bool:
    G.check(x)
    return _psi(G, _stage(G, alpha), x)


def _combination(G: ExplicitPGroup, coeffs, elems) -> GroupElement:
    acc = G.zero()
    for c, x in zip(coeffs, elems):
        if c:
            acc = G.add(acc, G.scalar_mul(c, x))
    return acc


def _extends(G: ExplicitPGroup, stage_next: int, chosen: list[GroupElement], x: GroupElement) -> bool:
    """No combination with nonzero coefficient on x satisfies psi[next]."""
    p = G.p
    for coeffs in itertools.product(range(p), repeat=len(chosen)):
        base = _combination(G, coeffs, chosen)
        for c in range(1, p):
            if _psi(G, stage_next, G.add(base, G.scalar_mul(c, x))):
                return False
    return True


def eval_phi_geq(G: ExplicitPGroup, alpha, n: int, exhaustive: bool = False) -> tuple[bool, tuple[GroupElement, ...] | None]:
    """Decide phi[alpha,>=n]; returns (verdict, witness tuple or None).

    The admissible tuples are exactly the sets independent modulo the
    subspace (p^(alpha+1) G)[p], so a greedy scan reaches the maximum size.
    ``exhaustive=True`` runs the full backtracking search instead.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return True, ()
    alpha = _as_ordinal(alpha)
    here = _stage(G, alpha)
    nxt = _stage(G, alpha + 1)
    pool = [x for x in G.socle() if _psi(G, here, x)]

    if not exhaustive:
        chosen: list[GroupElement] = []
        for x in pool:
            if _extends(G, nxt, chosen, x):
                chosen.append(x)
                if len(chosen) == n:
                    return True, tuple(chosen)
        return False, None

    def search(start: int, chosen: list[GroupElement]):
        if len(chosen) == n:
            return tuple(chosen)
        for i in range(start, len(pool)):
            if _extends(G, nxt, chosen, pool[i]):
                found = search(i + 1, chosen + [pool[i]])
                if found:
                    return found
        return None

    found = search(0, [])
    return found is not None, found


def eval_phi_exact(G: ExplicitPGroup, alpha, n: ExtendedCount, cap: int = DEFAULT_CAP) -> EvalReport:
    alpha = _as_ordinal(alpha)
    formula = FormulaId("phi_exact", alpha, n)
    if n is OMEGA:
        # the infinite conjunction is decided by the closed form; the
        # truncated conjunction is recorded alongside it
        truncated = all(eval_phi_geq(G, alpha, k)[0] for k in range(cap + 1))
        verdict = ulm_invariant(G, alpha) is OMEGA
        notes = [f"conjunction over n<={cap} evaluates to {'true' if truncated else 'false'}",
                 "verdict from closed form u_alpha = w"]
        return EvalReport(formula, G, verdict, None, None, notes)
    lo, wit = eval_phi_geq(G, alpha, n)
    hi, _ = eval_phi_geq(G, alpha, n + 1)
    return EvalReport(formula, G, lo and not hi, None, wit if lo else None)


# --- divisible part -------------------------------------------------------------


class _DivisibleBox:
    """Divisible elements with denominator exponent <= E, as integer codes.

    Coordinate j of code i is the j-th base-p^E digit a_j, standing for
    a_j / p^E in Z(p^inf).
    """

    def __init__(self, G: ExplicitPGroup, E: int):
        self.G, self.E = G, E
        self.q = G.p**E
        self.d = G.div_rank
        self.size = self.q**self.d
        codes = np.arange(self.size)
        self.digits = np.stack([(codes // self.q**j) % self.q for j in range(self.d)], axis=1) if self.d else np.zeros((1, 0), dtype=np.int64)
        self.place = np.array([self.q**j for j in range(self.d)], dtype=np.int64)

    def encode(self, x: GroupElement) -> int:
        if any(x.cyclic):
            raise ValueError("not in the divisible part")
        return int(sum(int(q * self.q) * self.q**j for j, q in enumerate(x.prufer)))

    def element(self, code: int) -> GroupElement:
        digits = self.digits[code]
        return GroupElement((0,) * len(self.G.exps), tuple(Fraction(int(a), self.q) for a in digits))

    def scale(self, k: int) -> np.ndarray:
        """code -> code of k * element."""
        return ((self.digits * k) % self.q) @ self.place

    def sumset(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ia, ib = np.flatnonzero(a), np.flatnonzero(b)
        out = np.zeros(self.size, dtype=bool)
        if len(ia) and len(ib):
            s = (self.digits[ia][:, None, :] + self.digits[ib][None, :, :]) % self.q
            out[(s @ self.place).ravel()] = True
        return out

    def roots(self, x_code: int) -> np.ndarray:
        """Union over c in 1..p-1 and k in 0..E-1 of {w : p^k w = c x}."""
        p = self.G.p
        mask = np.zeros(self.size, dtype=bool)
        for k in range(self.E):
            pk = self.scale(p**k)
            for c in range(1, p):
                target = int(self.scale(c)[x_code])
                mask |= pk == target
        return mask


def _independent(box: _DivisibleBox, root_sets: list[np.ndarray]) -> bool:
    for r in range(1, len(root_sets) + 1):
        for subset in itertools.combinations(root_sets, r):
            acc = subset[0]
            for s in subset[1:]:
                acc = box.sumset(acc, s)
            if acc[0]:
                return False
    return True


def _spans(box: _DivisibleBox, root_sets: list[np.ndarray]) -> bool:
    acc = np.zeros(box.size, dtype=bool)
    acc[0] = True
    for r in root_sets:
        acc = box.sumset(acc, r | _only_zero(box))
    return bool(acc.all())


def _only_zero(box: _DivisibleBox) -> np.ndarray:
    z = np.zeros(box.size, dtype=bool)
    z[0] = True
    return z


def _divisible_witnesses(G: ExplicitPGroup, box: _DivisibleBox, n: int, need_span: bool):
    lam = length(G)
    socle = [x for x in G.socle() if not any(x.cyclic)]
    pool = [x for x in socle if any(x.prufer) and eval_psi(G, lam, x)]
    for combo in itertools.combinations(pool, n):
        roots = [box.roots(box.encode(x)) for x in combo]
        if not _independent(box, roots):
            continue
        if need_span and not _spans(box, roots):
            continue
        return combo
    return None


def eval_divisible_sentence(G: ExplicitPGroup, n: ExtendedCount, denom_bound: int = 3, cap: int = DEFAULT_CAP) -> EvalReport:
    """Does the divisible part look like Z(p^inf)^n?

    All quantifiers over the divisible part range over elements whose
    denominators are at most p^denom_bound.
    """
    if denom_bound < 1:
        raise ValueError("denominator bound must be >= 1")
    box = _DivisibleBox(G, denom_bound)
    notes = [f"divisible-part quantifiers bounded at denominator p^{denom_bound}"]
    if n is OMEGA:
        formula = FormulaId("divrank_infinite")
        verdict = True
        for m in range(cap + 1):
            if _divisible_witnesses(G, box, m, need_span=False) is None:
                verdict = False
                notes.append(f"battery fails at m={m}")
                break
        else:
            notes.append(f"battery truncated at m<={cap}")
        return EvalReport(formula, G, verdict, denom_bound, None, notes)
    formula = FormulaId("divrank_exact", None, n)
    wit = _divisible_witnesses(G, box, n, need_span=True)
    return EvalReport(formula, G, wit is not None, denom_bound, wit, notes)


def evaluate(formula: FormulaId, G: ExplicitPGroup, x: GroupElement | None = None,
             denom_bound: int = 3, cap: int = DEFAULT_CAP) -> EvalReport:
    """Evaluate any formula id; ``psi`` needs the element ``x``."""
    if formula.kind == "psi":
        if x is None:
            raise ValueError("psi needs an element")
        return EvalReport(formula, G, eval_psi(G, formula.alpha, x), None, (x,))
    if formula.kind == "phi_geq":
        verdict, wit = eval_phi_geq(G, formula.alpha, formula.n)
        return EvalReport(formula, G, verdict, None, wit)
    if formula.kind == "phi_exact":
        return eval_phi_exact(G, formula.alpha, formula.n, cap)
    if formula.kind == "divrank_exact":
        return eval_divisible_sentence(G, formula.n, denom_bound, cap)
    return eval_divisible_sentence(G, OMEGA, denom_bound, cap)


# --- text format ----------------------------------------------------------------

_PSI_RE = re.compile(r"^psi\[([^\]]+)\]$")
_PHI_RE = re.compile(r"^phi\[([^,\]]+),(>=|=)(\w+)\]$")
_DIV_RE = re.compile(r"^divrank\[=(\w+)\]$")


def format_formula(f: FormulaId) -> str:
    if f.kind == "psi":
        return f"psi[{format_ordinal(f.alpha)}]"
    if f.kind == "phi_geq":
        return f"phi[{format_ordinal(f.alpha)},>={f.n}]"
    if f.kind == "phi_exact":
        return f"phi[{format_ordinal(f.alpha)},={format_count(f.n)}]"
    if f.kind == "divrank_exact":
        return f"divrank[={f.n}]"
    return "divrank[=w]"


def parse_formula(text: str) -> FormulaId:
    s = text.strip().replace(" ", "")
    try:
        if m := _PSI_RE.match(s):
            return FormulaId("psi", parse_ordinal(m.group(1)))
        if m := _PHI_RE.match(s):
            alpha, rel, n = parse_ordinal(m.group(1)), m.group(2), parse_count(m.group(3))
            if rel == ">=":
                return FormulaId("phi_geq", alpha, n)
            return FormulaId("phi_exact", alpha, n)
        if m := _DIV_RE.match(s):
            n = parse_count(m.group(1))
            return FormulaId("divrank_infinite") if n is OMEGA else FormulaId("divrank_exact", None, n)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError(f"bad formula text {text!r}")

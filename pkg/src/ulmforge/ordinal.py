"""Ordinals below omega^omega in Cantor normal form, and extended counts.

An :class:`Ordinal` is a descending tuple of ``(exponent, coefficient)``
terms, so ``w^2*3 + w + 4`` is ``((2, 3), (1, 1), (0, 4))``.  Exponents are
natural numbers, which caps every value strictly below omega^omega.

:data:`OMEGA` (the count) and :data:`W` (the ordinal) are different objects
on purpose: counts are cardinal-like and never enter ordinal arithmetic.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Union

__all__ = [
    "Ordinal",
    "W",
    "ZERO",
    "ONE",
    "OMEGA",
    "ExtendedCount",
    "ord_cmp",
    "ord_add",
    "ord_succ",
    "is_limit",
    "parse_ordinal",
    "format_ordinal",
    "parse_count",
    "format_count",
    "count_add",
    "is_count",
]


def _normalize(terms: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    merged: dict[int, int] = {}
    for exp, coef in terms:
        if exp < 0 or coef < 0:
            raise ValueError(f"negative term ({exp}, {coef})")
        if coef:
            merged[exp] = merged.get(exp, 0) + coef
    return tuple(sorted(merged.items(), reverse=True))


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        terms = tuple(tuple(t) for t in self.terms)
        for i, (exp, coef) in enumerate(terms):
            if not isinstance(exp, int) or not isinstance(coef, int):
                raise TypeError("ordinal terms must be integer pairs")
            if exp < 0 or coef <= 0:
                raise ValueError(f"invalid CNF term ({exp}, {coef})")
            if i and terms[i - 1][0] <= exp:
                raise ValueError("CNF exponents must be strictly decreasing")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("ordinals are non-negative")
        return cls(((0, n),)) if n else cls()

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[int, int]]) -> "Ordinal":
        """Build from possibly unsorted terms, merging equal exponents."""
        return cls(_normalize(terms))

    @property
    def is_finite(self) -> bool:
        return not self.terms or self.terms[0][0] == 0

    @property
    def finite_part(self) -> int:
        if self.terms and self.terms[-1][0] == 0:
            return self.terms[-1][1]
        return 0

    def __int__(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return self.finite_part

    def __lt__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return ord_cmp(self, other) < 0

    def __add__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return ord_add(self, other)

    def __radd__(self, other):
        if isinstance(other, int):
            return ord_add(Ordinal.of(other), self)
        return NotImplemented

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({format_ordinal(self)!r})"


ZERO = Ordinal()
ONE = Ordinal.of(1)
W = Ordinal(((1, 1),))


def ord_cmp(a: Ordinal, b: Ordinal) -> int:
    """Return -1, 0 or 1.  CNF is lexicographic on (exponent, coefficient)."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        if ea != eb:
            return -1 if ea < eb else 1
        if ca != cb:
            return -1 if ca < cb else 1
    la, lb = len(a.terms), len(b.terms)
    return (la > lb) - (la < lb)


def ord_add(a: Ordinal, b: Ordinal) -> Ordinal:
    if not b.terms:
        return a
    lead = b.terms[0][0]
    # terms of a below b's leading exponent are absorbed
    kept = [t for t in a.terms if t[0] >= lead]
    if kept and kept[-1][0] == lead:
        exp, coef = kept.pop()
        kept.append((exp, coef + b.terms[0][1]))
        return Ordinal(tuple(kept) + b.terms[1:])
    return Ordinal(tuple(kept) + b.terms)


def ord_succ(a: Ordinal) -> Ordinal:
    return ord_add(a, ONE)


def is_limit(a: Ordinal) -> bool:
    return bool(a.terms) and a.terms[-1][0] > 0


_TERM_RE = re.compile(r"^(?:w(?:\^(\d+))?(?:\*(\d+))?|(\d+))$")


def parse_ordinal(text: str) -> Ordinal:
    """Parse ``"0"``, ``"5"``, ``"w"``, ``"w^2*3+w*1+4"`` and similar.

    Terms must be written in strictly descending order; ``w^w`` and anything
    else at or above omega^omega is rejected.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty ordinal")
    if s == "0":
        return ZERO
    terms: list[tuple[int, int]] = []
    for part in s.split("+"):
        m = _TERM_RE.match(part.strip())
        if not m:
            raise ValueError(f"bad ordinal term {part!r} in {text!r}")
        if m.group(3) is not None:
            exp, coef = 0, int(m.group(3))
        else:
            exp = int(m.group(1)) if m.group(1) is not None else 1
            coef = int(m.group(2)) if m.group(2) is not None else 1
        if coef == 0:
            raise ValueError(f"zero coefficient in {text!r}")
        if terms and terms[-1][0] <= exp:
            raise ValueError(f"terms not strictly descending in {text!r}")
        terms.append((exp, coef))
    return Ordinal(tuple(terms))


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for exp, coef in a.terms:
        if exp == 0:
            parts.append(str(coef))
            continue
        head = "w" if exp == 1 else f"w^{exp}"
        parts.append(head if coef == 1 else f"{head}*{coef}")
    return "+".join(parts)


# --- extended counts -------------------------------------------------------


class _OmegaCount:
    """The count omega: larger than every natural number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OMEGA"

    __str__ = __repr__

    def __reduce__(self):
        return (_OmegaCount, ())

    def __hash__(self):
        return hash("ulmforge.OMEGA")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        if other is self or isinstance(other, int):
            return False
        return NotImplemented

    def __le__(self, other):
        if other is self:
            return True
        if isinstance(other, int):
            return False
        return NotImplemented

    def __gt__(self, other):
        if other is self:
            return False
        if isinstance(other, int):
            return True
        return NotImplemented

    def __ge__(self, other):
        if other is self or isinstance(other, int):
            return True
        return NotImplemented


OMEGA = _OmegaCount()
ExtendedCount = Union[int, _OmegaCount]


def is_count(value) -> bool:
    return value is OMEGA or (isinstance(value, int) and not isinstance(value, bool) and value >= 0)


def count_add(a: ExtendedCount, b: ExtendedCount) -> ExtendedCount:
    if a is OMEGA or b is OMEGA:
        return OMEGA
    return a + b


def parse_count(text: str) -> ExtendedCount:
    s = text.strip()
    if s == "w":
        return OMEGA
    if not s.isdigit():
        raise ValueError(f"bad count {text!r}")
    return int(s)


def format_count(n: ExtendedCount) -> str:
    return "w" if n is OMEGA else str(n)

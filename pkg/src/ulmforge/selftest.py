"""Corpus-wide cross-checks, reported as a deterministic plain-text ledger."""
from __future__ import annotations

from typing import Iterable

from .corpus import CorpusSpec, group_corpus, model_corpus
from .pgroup import format_group
from .reduction import verify_hred
from .tp import LpStructure, check_axioms, classify, decode, encode, structure_iso
from .ulm import profile_of, table_ulm_invariant, ulm_invariant


def _line(ok: bool, check: str, subject: str, detail: str = "") -> str:
    return " ".join(s for s in ("PASS" if ok else "FAIL", check, subject, detail) if s)


def _tag(G) -> str:
    return format_group(G).replace(" ", "")


def run_selftest(spec: CorpusSpec, inject: Iterable[tuple[str, LpStructure]] = (),
                 hred_limit: int = 64) -> list[str]:
    """Every line is PASS or FAIL.  Injected structures are checked as if
    they were corpus models, so known-bad fixtures produce FAIL lines."""
    lines: list[str] = []
    groups = group_corpus(spec)
    for G in groups:
        T = G.to_table()
        top = max(G.exps, default=0)
        ok = all(table_ulm_invariant(T, n) == ulm_invariant(G, n) for n in range(top + 1))
        lines.append(_line(ok, "ulm-oracle", _tag(G)))
        for m in range(spec.max_m + 1):
            M = encode(G, m)
            report = check_axioms(M)
            lines.append(_line(report.passed, "model-lemma", _tag(G), f"m={m}"))
            if not report.passed:
                continue
            dec = decode(M)
            ok = profile_of(classify(dec.table)) == profile_of(G) and dec.size == m
            lines.append(_line(ok, "round-trip-decode", _tag(G), f"m={m}"))
            if G.order <= hred_limit:
                lines.extend(verify_hred(G, m).lines)

    for label, M in model_corpus(spec):
        if "relabel" not in label:
            continue
        dec = decode(M)
        back = encode(classify(dec.table), dec.size)
        lines.append(_line(structure_iso(back, M) is not None, "round-trip-encode", label))

    for label, M in inject:
        report = check_axioms(M)
        failing = ",".join(report.failing) or "none"
        lines.append(_line(report.passed, "model-check", label, f"failing={failing}"))
    return lines

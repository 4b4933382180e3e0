import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ulmforge.corpus import finite_groups, load_mutation_fixtures, random_relabel, thicken_zero
from ulmforge.errors import NotAModelError, ParseError
from ulmforge.pgroup import ExplicitPGroup
from ulmforge.tp import (
    SCHEMATA, LpStructure, check_axioms, classify, decode, encode, format_structure, parse_structure,
    structure_iso,
)
from ulmforge.ulm import brute_force_group_iso, profile_of

Z2 = ExplicitPGroup(2, (1,))
TRIVIAL = ExplicitPGroup(2)


def literal_failures(M: LpStructure, bound: int) -> set[str]:
    """Evaluate each schema by quantifying over every tuple of the domain
    and every index up to bound."""
    D = range(M.size)
    idx = range(bound + 1)
    R = lambda n, x: x in M.R.get(n, ())  # noqa: E731
    P = lambda l, m, n, x, y, z: (x, y, z) in M.P.get((l, m, n), ())  # noqa: E731
    keys = [(l, m, n) for l in idx for m in idx for n in idx if n <= max(l, m)]
    bad = set()
    zero = M.zero
    for (l, m, n), x, y, z in itertools.product(keys, D, D, D):
        if P(l, m, n, x, y, z) and not (R(l, x) and R(m, y) and R(n, z)):
            bad.add("A1")
        if R(l, x) and R(m, y) and R(n, z) and P(l, m, n, x, y, z) and not P(m, l, n, y, x, z):
            bad.add("A8")
    for x in D:
        if R(0, x) != (x == zero):
            bad.add("A2")
        for n in idx[1:]:
            chain = any(
                all(P(n, n, n if j < M.p - 1 else n - 1, x, xs[j - 1], xs[j]) for j in range(1, M.p))
                for rest in itertools.product(D, repeat=M.p - 1) for xs in [(x,) + rest])
            if R(n, x) != chain:
                bad.add("A2")
    for (l, m, n), (l2, m2, n2) in itertools.product(keys, keys):
        if (l, m) != (l2, m2):
            continue
        for x, y, z, z2 in itertools.product(D, D, D, D):
            if P(l, m, n, x, y, z) and P(l, m, n2, x, y, z2) and z != z2:
                bad.add("A3")
    for l, m, x, y in itertools.product(idx, idx, D, D):
        if R(l, x) and R(m, y) and not any(P(l, m, n, x, y, z) for n in range(max(l, m) + 1) for z in D):
            bad.add("A4")
    for l, x in itertools.product(idx, D):
        if R(l, x) and not (P(0, l, l, zero, x, x) and P(l, 0, l, x, zero, x)):
            bad.add("A5")
        if R(l, x) and not any(P(l, l, 0, x, y, zero) and P(l, l, 0, y, x, zero) for y in D):
            bad.add("A6")
    for l, m, n in itertools.product(idx, repeat=3):
        for x, y, z in itertools.product(D, D, D):
            if not (R(l, x) and R(m, y) and R(n, z)):
                continue
            if not any(
                P(l, m, r, x, y, u) and P(r, n, t, u, z, w) and P(m, n, s, y, z, v) and P(l, s, t, x, v, w)
                for r in range(max(l, m) + 1) for s in range(max(m, n) + 1)
                for t in range(min(max(r, n), max(l, s)) + 1)
                for u, v, w in itertools.product(D, D, D)
            ):
                bad.add("A7")
    return bad


def z2_with_point():
    return encode(Z2, 1)


def small_structures():
    out = [encode(G, m) for p in (2, 3) for G in finite_groups(p, 4) for m in range(2)]
    out.append(thicken_zero(encode(Z2, 0), 1))
    out += [M for M in load_mutation_fixtures().values() if M.size <= 4]
    return out


def toggle(M: LpStructure, rng: random.Random) -> LpStructure:
    """Flip one random atom with indices <= max_index + 1."""
    top = M.max_index + 1
    R = {n: set(xs) for n, xs in M.R.items()}
    P = {k: set(ts) for k, ts in M.P.items()}
    if rng.random() < 0.3:
        n, x = rng.randint(0, top), rng.randrange(M.size)
        R.setdefault(n, set()).symmetric_difference_update({x})
    else:
        l, m = rng.randint(0, top), rng.randint(0, top)
        key = (l, m, rng.randint(0, max(l, m)))
        t = tuple(rng.randrange(M.size) for _ in range(3))
        P.setdefault(key, set()).symmetric_difference_update({t})
    return M.replace(R=R, P=P)


# --- encoder ---------------------------------------------------------------------------


def test_encode_examples():
    M = encode(TRIVIAL, 0)
    assert (M.size, dict(M.R), dict(M.P)) == (1, {0: {0}}, {(0, 0, 0): {(0, 0, 0)}})
    M = z2_with_point()
    assert M.size == 3
    assert dict(M.R) == {0: {0}, 1: {1}}
    assert dict(M.P) == {(1, 0, 1): {(1, 0, 1)}, (0, 1, 1): {(0, 1, 1)}, (1, 1, 0): {(1, 1, 0)},
                         (0, 0, 0): {(0, 0, 0)}}
    assert 2 not in M.ranked()


def test_encode_rejects_bad_input():
    with pytest.raises(ValueError):
        encode(ExplicitPGroup(2, (1,), 1))
    with pytest.raises(ValueError):
        encode(Z2, -1)


def test_structure_validation():
    with pytest.raises(ValueError):
        LpStructure(2, 2, 0, {}, {(1, 1, 2): {(0, 0, 0)}})
    with pytest.raises(ValueError):
        LpStructure(2, 2, 0, {1: {2}}, {})
    with pytest.raises(ValueError):
        LpStructure(4, 1, 0)


# --- checker ---------------------------------------------------------------------------


def test_checker_examples():
    assert check_axioms(encode(ExplicitPGroup(2, (2, 1)), 2)).passed
    M = z2_with_point()
    P = {k: set(v) for k, v in M.P.items()}
    P[(1, 1, 0)].discard((1, 1, 0))
    report = check_axioms(M.replace(P=P))
    assert not report.status("A4")
    assert ("x", 1) in report.failures["A4"][0].witness and ("y", 1) in report.failures["A4"][0].witness
    report = check_axioms(M.replace(R={0: {0}, 1: {1, 2}}))
    assert not report.status("A2")
    assert any(f.instance == "n=1" and f.witness == (("x", 2),) for f in report.failures["A2"])


def test_report_text():
    text = check_axioms(z2_with_point()).to_text()
    assert text.splitlines()[0] == "bound=2"
    assert text.splitlines()[-1] == "model: yes"
    M = load_mutation_fixtures()["A5"]
    text = check_axioms(M).to_text()
    assert "A5 FAIL" in text and text.endswith("model: no")


def test_failure_cap_marks_truncation():
    M = LpStructure(2, 30, 0, {0: {0}, 1: set(range(1, 30))}, {})
    report = check_axioms(M, max_failures=3)
    assert len(report.failures["A4"]) == 3 and report.truncated["A4"]


@pytest.mark.parametrize("M", small_structures(), ids=lambda M: f"p{M.p}N{M.size}")
def test_checker_matches_literal_evaluation(M):
    bound = M.max_index + 1
    assert set(check_axioms(M).failing) == literal_failures(M, bound)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(range(4)), st.integers(0, 2**32))
def test_checker_matches_literal_evaluation_after_toggles(which, seed):
    rng = random.Random(seed)
    base = [encode(Z2, 1), encode(ExplicitPGroup(2, (2,))), encode(ExplicitPGroup(3, (1,))),
            thicken_zero(encode(Z2), 1)][which]
    M = base
    for _ in range(rng.randint(1, 3)):
        M = toggle(M, rng)
    assert set(check_axioms(M).failing) == literal_failures(M, M.max_index + 1)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(range(3)), st.integers(0, 2**32))
def test_fast_associativity_matches_general(which, seed):
    rng = random.Random(seed)
    M = [encode(ExplicitPGroup(2, (2, 1)), 1), encode(ExplicitPGroup(3, (2,))),
         load_mutation_fixtures()["A7"]][which]
    for _ in range(rng.randint(0, 3)):
        M = toggle(M, rng)
    fast = check_axioms(M, max_failures=10**6)
    slow = check_axioms(M, max_failures=10**6, fast=False)
    assert fast.status("A7") == slow.status("A7")
    assert {f.witness for f in fast.failures["A7"]} <= {f.witness for f in slow.failures["A7"]}


def test_vacuity_bound_plus_three():
    corpus = [encode(G, m) for p in (2, 3) for G in finite_groups(p, 27) for m in range(2)]
    corpus += list(load_mutation_fixtures().values())
    corpus += [thicken_zero(encode(Z2), k) for k in (1, 2)]
    for M in corpus:
        base = check_axioms(M)
        wide = check_axioms(M, bound=base.bound + 3)
        assert {s: wide.status(s) for s in SCHEMATA} == {s: base.status(s) for s in SCHEMATA}


# --- decoder ----------------------------------------------------------------------------


def test_decode_examples():
    dec = decode(encode(TRIVIAL, 5))
    assert dec.size == 5 and dec.table.size == 1
    G = ExplicitPGroup(3, (2, 1))
    dec = decode(encode(G, 2))
    assert brute_force_group_iso(dec.table, G.to_table()) is not None and dec.size == 2
    with pytest.raises(NotAModelError) as info:
        decode(load_mutation_fixtures()["A8"])
    assert info.value.report.failing == ["A8"]


def test_classify_examples():
    assert classify(ExplicitPGroup(2, (2,)).to_table()).exps == (2,)
    assert classify(TRIVIAL.to_table()).exps == ()
    assert classify(ExplicitPGroup(2, (1, 1)).to_table()).exps == (1, 1)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.lists(st.integers(1, 3), max_size=3), st.integers(0, 3), st.integers(0, 2**32))
def test_round_trip_through_relabeling(p, exps, m, seed):
    G = ExplicitPGroup(p, tuple(exps))
    if G.order > 81:
        return
    M, _ = random_relabel(encode(G, m), random.Random(seed))
    dec = decode(M)
    assert profile_of(classify(dec.table)) == profile_of(G) and dec.size == m
    assert structure_iso(encode(classify(dec.table), dec.size), M) is not None


def test_fat_model_is_not_canonical():
    """Zero may sit in several R_n: such a structure satisfies every schema,
    decodes to the same group and size, yet is not the encoding of anything."""
    fat = thicken_zero(encode(Z2, 0), 1)
    assert check_axioms(fat).passed
    dec = decode(fat)
    assert classify(dec.table) == Z2 and dec.size == 0
    assert structure_iso(encode(Z2, 0), fat) is None
    deeper = [thicken_zero(encode(Z2, 0), k) for k in range(1, 4)]
    assert all(check_axioms(M).passed for M in deeper)
    assert all(structure_iso(a, b) is None for a, b in itertools.combinations(deeper, 2))


# --- isomorphism ------------------------------------------------------------------------


def test_iso_examples():
    M = encode(ExplicitPGroup(2, (2, 1)), 1)
    assert structure_iso(M, M) == list(range(M.size))
    assert structure_iso(encode(Z2, 0), encode(TRIVIAL, 1)) is None
    N, perm = random_relabel(M, random.Random(7))
    f = structure_iso(M, N)
    assert f is not None and M.relabel(f) == N


def test_iso_distinguishes_pure_set_sizes_and_groups():
    assert structure_iso(encode(Z2, 1), encode(Z2, 2)) is None
    assert structure_iso(encode(ExplicitPGroup(2, (2,))), encode(ExplicitPGroup(2, (1, 1)))) is None


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), st.lists(st.integers(1, 2), max_size=3), st.integers(0, 2), st.integers(0, 2**32))
def test_iso_returns_a_structure_isomorphism(p, exps, m, seed):
    G = ExplicitPGroup(p, tuple(exps))
    if G.order > 81:
        return
    M = encode(G, m)
    N, _ = random_relabel(M, random.Random(seed))
    f = structure_iso(M, N)
    assert f is not None and M.relabel(f) == N


# --- text format ------------------------------------------------------------------------


def test_text_format_round_trip():
    for M in [encode(ExplicitPGroup(3, (1, 1)), 2), *load_mutation_fixtures().values()]:
        assert parse_structure(format_structure(M)) == M
    text = format_structure(z2_with_point())
    assert text.splitlines()[:3] == ["p=2; N=3; zero=0", "R0 = {0}", "R1 = {1}"]


@pytest.mark.parametrize("text", [
    "", "p=2; N=0; zero=0", "p=2; N=2; zero=0\nR1 = {5}", "p=2; N=2; zero=0\nQ = {}",
    "p=2; N=2; zero=0\nP[1,1->2] = {(0,0,0)}", "p=2; N=2; zero=0\nP[1,1->0] = {(0,0)}",
    "p=2; N=2; zero=0\nR1 = {1}\nR1 = {0}",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_structure(text)

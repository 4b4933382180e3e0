import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ulmforge.errors import NotAModelError
from ulmforge.corpus import load_mutation_fixtures
from ulmforge.ordinal import OMEGA, W
from ulmforge.pgroup import ExplicitPGroup
from ulmforge.reduction import (
    HGroup, StarElement, StarGroup, basis_mod_p, borel_forward, borel_reduce, decompose, gstar_table,
    hred, hred_table, table_basis_mod_p, verify_hred,
)
from ulmforge.tp import encode, structure_iso
from ulmforge.ulm import UlmProfile, brute_force_group_iso, profile_of, shift_profile, ulm_invariant_oracle

small = st.builds(ExplicitPGroup, st.sampled_from([2, 3]), st.lists(st.integers(1, 3), max_size=3).map(tuple)) \
    .filter(lambda G: G.order <= 27)


def quotient_dim_by_enumeration(G):
    """log_p [G : pG], enumerating pG directly."""
    elems = G.enumerate()
    pg = {G.scalar_mul(G.p, x) for x in elems}
    return round(np.log(len(elems) // len(pg)) / np.log(G.p))


def decompositions_by_search(T, basis, g):
    """All (h, x) with h in pT and g = h + sum x_b b."""
    p = T.p
    in_pg = set(np.flatnonzero(T.pn_mask(1)).tolist())
    out = []
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        acc = T.zero
        for c, b in zip(coeffs, basis.representatives):
            acc = T.add(acc, T.mul(c, b))
        h = T.add(g, T.neg(acc))
        if h in in_pg:
            out.append((h, coeffs))
    return out


def line(report, lemma):
    return next(ln for ln in report.lines if ln.split()[1] == lemma)


def test_basis_examples():
    G = ExplicitPGroup(2, (2, 1))
    assert len(basis_mod_p(G)) == 2 == quotient_dim_by_enumeration(G)
    assert len(table_basis_mod_p(G.to_table())) == 2
    assert len(basis_mod_p(ExplicitPGroup(3))) == 0
    assert len(basis_mod_p(ExplicitPGroup(3, (), 2))) == 0


def test_gstar_examples():
    Z2 = ExplicitPGroup(2, (1,))
    S = gstar_table(Z2.to_table())
    assert S.size == 4 and int(S.order_exps.max()) == 2
    assert brute_force_group_iso(S, ExplicitPGroup(2, (2,)).to_table()) is not None
    assert gstar_table(ExplicitPGroup(2).to_table()).size == 1


def test_hred_examples():
    Z2 = ExplicitPGroup(2, (1,))
    assert brute_force_group_iso(hred_table(Z2.to_table(), 0), ExplicitPGroup(2, (2,)).to_table()) is not None
    assert hred(Z2, 0) == ExplicitPGroup(2, (2,))
    assert hred(ExplicitPGroup(3), 2) == ExplicitPGroup(3, (1, 1))
    H = hred(ExplicitPGroup(2, (2, 1)), 2)
    assert H.exps == (3, 2, 1, 1)
    assert profile_of(H) == UlmProfile.from_dict(2, {0: 2, 1: 1, 2: 1})
    assert [ulm_invariant_oracle(H, n) for n in range(3)] == [2, 1, 1]
    assert hred(ExplicitPGroup(2, (2,), 1), 1).div_rank == 1
    prof = hred(ExplicitPGroup(2, (1,)), OMEGA)
    assert prof.u(0) is OMEGA and prof.u(1) == 1
    with pytest.raises(ValueError):
        hred(Z2, -1)


def test_verify_examples():
    report = verify_hred(ExplicitPGroup(2, (2,)), 3)
    assert line(report, "socle-quotient-dim").startswith("PASS")
    assert line(verify_hred(ExplicitPGroup(2, (1, 1)), 0), "p-hred-iso-G").startswith("PASS")
    assert line(verify_hred(ExplicitPGroup(2, (1, 2)), 1), "basis-invariance").startswith("PASS")
    assert line(report, "basis-size") == "PASS basis-size p=2;cyclic=[2];divisible=0 m=3"


def test_verify_large_group_uses_counting_path():
    G = ExplicitPGroup(2, (3, 2, 1))
    report = verify_hred(G, 2, table_limit=256)
    assert report.passed
    assert not any("closed-form-iso-presentation" in ln for ln in report.lines)


def test_borel_examples():
    assert borel_reduce(encode(ExplicitPGroup(2, (1,)), 1)).exps == (2, 1)
    assert borel_reduce(encode(ExplicitPGroup(2), 0)) == ExplicitPGroup(2)
    assert borel_forward(ExplicitPGroup(2, (1,))) == encode(ExplicitPGroup(2, (1,)), 0)
    assert borel_forward(ExplicitPGroup(3)).size == 1
    assert structure_iso(borel_forward(ExplicitPGroup(2, (2,))), borel_forward(ExplicitPGroup(2, (1, 1)))) is None
    with pytest.raises(NotAModelError):
        borel_reduce(load_mutation_fixtures()["A3"])


@settings(max_examples=30, deadline=None)
@given(small)
def test_unique_decomposition_matches_search(G):
    T = G.to_table()
    basis = table_basis_mod_p(T)
    assert len(basis) == quotient_dim_by_enumeration(G)
    for g in range(T.size):
        found = decompositions_by_search(T, basis, g)
        assert len(found) == 1
        assert decompose(T, basis, g) == found[0]


@settings(max_examples=30, deadline=None)
@given(small)
def test_star_elements_match_indices(G):
    star = StarGroup(G.to_table())
    elems = [star.element(i) for i in range(star.size)]
    assert len(set(elems)) == star.size
    assert all(star.index(e) == i for i, e in enumerate(elems))
    assert star.element(star.generator(0) if star.rank else 0) == \
        (StarElement(star.zero, (1,) + (0,) * (star.rank - 1)) if star.rank else StarElement(star.zero, ()))


@settings(max_examples=30, deadline=None)
@given(small, st.integers(0, 2))
def test_star_table_is_group_with_p_image_equal_to_g(G, m):
    T = G.to_table()
    star = StarGroup(T)
    S = star.table()  # validates the group laws
    image = np.zeros(S.size, dtype=bool)
    image[S.times_p] = True
    assert (np.flatnonzero(image) == np.arange(T.size)).all()
    assert (S.table[: T.size, : T.size] == T.table).all()
    for i, b in enumerate(star.basis.representatives):
        assert S.mul(G.p, star.generator(i)) == b
    H = HGroup(T, m)
    assert brute_force_group_iso(H.table(), hred(G, m).to_table()) is not None


@settings(max_examples=25, deadline=None)
@given(small, st.integers(0, 3))
def test_verify_hred_passes(G, m):
    report = verify_hred(G, m)
    assert report.passed, report.to_text()
    assert len(report.lines) == (10 if G.order <= 16 else 9)


@given(st.builds(ExplicitPGroup, st.sampled_from([2, 3, 5]), st.lists(st.integers(1, 6), max_size=5).map(tuple),
                 st.integers(0, 2)),
       st.one_of(st.integers(0, 5), st.just(OMEGA)))
def test_shift_identity(G, m):
    H = hred(G, m)
    assert (H if m is OMEGA else profile_of(H)) == shift_profile(profile_of(G), m)


def test_shift_identity_transfinite_support():
    u = UlmProfile.from_dict(2, {W: 1})
    assert shift_profile(u, 1) == UlmProfile.from_dict(2, {0: 1, W: 1})

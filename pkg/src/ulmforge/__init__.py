"""Abelian p-groups, Ulm invariants, the theory T_p and its Borel reduction."""
from .ordinal import OMEGA, Ordinal, ord_add, parse_ordinal, format_ordinal
from .pgroup import ElementTableGroup, ExplicitPGroup, GroupElement, parse_group, format_group
from .ulm import UlmProfile, iso_by_ulm, profile_of, shift_profile, brute_force_group_iso
from .tp import LpStructure, check_axioms, classify, decode, encode, structure_iso
from .reduction import borel_forward, borel_reduce, gstar_table, hred, verify_hred

__all__ = [
    "OMEGA", "Ordinal", "ord_add", "parse_ordinal", "format_ordinal",
    "ElementTableGroup", "ExplicitPGroup", "GroupElement", "parse_group", "format_group",
    "UlmProfile", "iso_by_ulm", "profile_of", "shift_profile", "brute_force_group_iso",
    "LpStructure", "check_axioms", "classify", "decode", "encode", "structure_iso",
    "borel_forward", "borel_reduce", "gstar_table", "hred", "verify_hred",
]

"""Search small mutations of encoded groups for structures failing exactly
one axiom schema, and write the smallest one found per schema.

Usage: python scripts/find_mutation_fixtures.py [--out DIR] [--depth 2]
"""
from __future__ import annotations

import argparse
import itertools
from pathlib import Path

from ulmforge.pgroup import ExplicitPGroup
from ulmforge.corpus import thicken_zero
from ulmforge.tp import SCHEMATA, LpStructure, check_axioms, encode, format_structure


def atoms(M: LpStructure, max_rank: int):
    """Single-fact edits: toggle one R membership or one P triple."""
    idx = range(M.size)
    for n in range(max_rank + 1):
        for x in idx:
            yield ("R", n, x)
    for l, m in itertools.product(range(max_rank + 1), repeat=2):
        for n in range(max(l, m) + 1):
            for t in itertools.product(idx, repeat=3):
                yield ("P", (l, m, n), t)


def toggle(M: LpStructure, edits) -> LpStructure:
    R = {n: set(xs) for n, xs in M.R.items()}
    P = {k: set(ts) for k, ts in M.P.items()}
    for kind, key, val in edits:
        target = (R if kind == "R" else P).setdefault(key, set())
        target.symmetric_difference_update({val})
    return M.replace(R=R, P=P)


def zero_semigroup() -> LpStructure:
    # every sum is 0: associative, commutative, inverses exist, 0 is no identity
    return LpStructure(2, 2, 0, {0: {0}, 1: {1}},
                       {(0, 0, 0): {(0, 0, 0)}, (1, 0, 0): {(1, 0, 0)},
                        (0, 1, 0): {(0, 1, 0)}, (1, 1, 0): {(1, 1, 0)}})


def quaternion8() -> LpStructure:
    # index 2*u + s encodes (-1)^s * unit u, units 1, i, j, k
    table = {(0, 0): (0, 0), (0, 1): (1, 0), (0, 2): (2, 0), (0, 3): (3, 0),
             (1, 0): (1, 0), (1, 1): (0, 1), (1, 2): (3, 0), (1, 3): (2, 1),
             (2, 0): (2, 0), (2, 1): (3, 1), (2, 2): (0, 1), (2, 3): (1, 0),
             (3, 0): (3, 0), (3, 1): (2, 0), (3, 2): (1, 1), (3, 3): (0, 1)}

    def mul(a, b):
        u, s = table[(a // 2, b // 2)]
        return 2 * u + (s ^ (a % 2) ^ (b % 2))

    order = {0: 0, 1: 1}
    order.update({x: 2 for x in range(2, 8)})
    R: dict = {}
    P: dict = {}
    for x in range(8):
        R.setdefault(order[x], set()).add(x)
        for y in range(8):
            z = mul(x, y)
            P.setdefault((order[x], order[y], order[z]), set()).add((x, y, z))
    return LpStructure(2, 8, 0, R, P)


def inverse_on_wrong_key() -> LpStructure:
    # Z/4 with zero also given rank 1, then a + 3a = 0 filed under P[2,2->1]
    M = thicken_zero(encode(ExplicitPGroup(2, (2,)), 0), 1)
    P = {k: set(ts) for k, ts in M.P.items()}
    moved = {t for t in P[(2, 2, 0)] if t[2] == M.zero}
    P[(2, 2, 0)] -= moved
    P.setdefault((2, 2, 1), set()).update(moved)
    return M.replace(P=P)


def broken_zero_chain() -> LpStructure:
    # zero in R_0, R_1, R_2 for Z/2, minus the chain triple that puts it in R_2
    M = thicken_zero(encode(ExplicitPGroup(2, (1,)), 0), 2)
    P = {k: set(ts) for k, ts in M.P.items()}
    P[(2, 2, 1)].discard((M.zero, M.zero, M.zero))
    return M.replace(P=P)


def steiner_loop() -> LpStructure:
    # points of the affine plane over F_3 plus an identity; x + x = 0 and
    # x + y completes the line through x and y.  Commutative, not associative.
    pts = [(a, b) for a in range(3) for b in range(3)]

    def add(x, y):
        if x == 0 or y == 0:
            return x + y
        if x == y:
            return 0
        (a, b), (c, d) = pts[x - 1], pts[y - 1]
        return pts.index(((-a - c) % 3, (-b - d) % 3)) + 1

    P: dict = {}
    for x in range(10):
        for y in range(10):
            z = add(x, y)
            P.setdefault((min(x, 1), min(y, 1), min(z, 1)), set()).add((x, y, z))
    return LpStructure(2, 10, 0, {0: {0}, 1: set(range(1, 10))}, P)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="src/ulmforge/fixtures/mutations")
    ap.add_argument("--depth", type=int, default=2)
    args = ap.parse_args()

    found: dict[str, tuple[str, LpStructure]] = {}

    def record(label: str, M: LpStructure):
        failing = check_axioms(M).failing
        if len(failing) == 1 and failing[0] not in found:
            found[failing[0]] = (label, M)
            print(f"{failing[0]}: {label}", flush=True)

    record("zero semigroup on two points", zero_semigroup())
    record("quaternion group of order 8", quaternion8())
    record("Z/2, zero thickened to rank 2, chain triple for rank 2 removed", broken_zero_chain())
    record("Steiner loop of the affine plane over F_3", steiner_loop())
    record("Z/4, zero thickened to rank 1, inverse pair moved to P[2,2->1]", inverse_on_wrong_key())
    bases = [("Z/2 + 1 point", encode(ExplicitPGroup(2, (1,)), 1), args.depth),
             ("Z/3", encode(ExplicitPGroup(3, (1,)), 0), 1),
             ("Z/4", encode(ExplicitPGroup(2, (2,)), 0), 1)]
    for name, base, max_depth in bases:
        universe = list(atoms(base, base.max_index + 1))
        for depth in range(1, max_depth + 1):
            for edits in itertools.combinations(universe, depth):
                record(f"{name}, toggled {list(edits)}", toggle(base, edits))
                # no structure fails A4 alone: with 0 in R_0, the A7 instance
                # (x, y, 0) already demands the sum that A4 asks for
                if set(SCHEMATA) - {"A4"} <= found.keys():
                    break

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for schema in SCHEMATA:
        if schema in found:
            label, M = found[schema]
            (out / f"{schema}.txt").write_text(f"# fails only {schema}: {label}\n" + format_structure(M))
        else:
            print(f"{schema}: no single-schema structure found")


if __name__ == "__main__":
    main()

"""Show models of T_p that decode to the same (G, #M) as a canonical
encoding but are not isomorphic to it: zero is also put into R_1..R_k.

Usage: python3 scripts/fat_models.py [--p 2] [--cyclic 1] [--m 0] [--max-k 4]
"""
from __future__ import annotations

import argparse

from ulmforge.corpus import thicken_zero
from ulmforge.pgroup import ExplicitPGroup
from ulmforge.reduction import borel_reduce
from ulmforge.tp import check_axioms, classify, decode, encode, structure_iso
from ulmforge.ulm import iso_by_ulm


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--cyclic", type=int, nargs="*", default=[1])
    ap.add_argument("--m", type=int, default=0)
    ap.add_argument("--max-k", type=int, default=4)
    args = ap.parse_args()

    thin = encode(ExplicitPGroup(args.p, tuple(args.cyclic)), args.m)
    models = [thin] + [thicken_zero(thin, k) for k in range(1, args.max_k + 1)]
    print("k  model  decodes-to                             iso-to-k=0  same-reduction")
    for k, M in enumerate(models):
        dec = decode(M)
        same_image = iso_by_ulm(borel_reduce(thin), borel_reduce(M))
        print(f"{k:<2} {'yes' if check_axioms(M).passed else 'no':<6} "
              f"{str(classify(dec.table)) + ' size=' + str(dec.size):<38} "
              f"{'yes' if structure_iso(thin, M) is not None else 'no':<11} {'yes' if same_image else 'no'}")


if __name__ == "__main__":
    main()

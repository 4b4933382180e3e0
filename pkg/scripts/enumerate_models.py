"""Enumerate small models of T_p up to isomorphism and group them by the
(G, #M) they decode to.

Usage: python3 scripts/enumerate_models.py [--p 2] [--max-domain 4] [--max-index 1] [--single-rank]
"""
from __future__ import annotations

import argparse
from collections import defaultdict

from ulmforge.corpus import enumerate_models
from ulmforge.tp import classify, decode, format_structure


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--max-domain", type=int, default=4)
    ap.add_argument("--max-index", type=int, default=1)
    ap.add_argument("--single-rank", action="store_true")
    ap.add_argument("--show", action="store_true", help="print every model in text form")
    args = ap.parse_args()

    models = enumerate_models(args.p, args.max_domain, args.max_index, single_rank=args.single_rank)
    by_key = defaultdict(list)
    for M in models:
        dec = decode(M)
        by_key[(str(classify(dec.table)), dec.size)].append(M)
    print(f"{len(models)} models, {len(by_key)} distinct (G, #M)")
    for (group, size), ms in sorted(by_key.items()):
        print(f"{len(ms):4d}  {group} size={size}")
        if args.show:
            for M in ms:
                print(format_structure(M))


if __name__ == "__main__":
    main()

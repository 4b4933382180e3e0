"""Command-line entry point: ``ulmforge <command> ...``.

Exit codes: 0 success (model / isomorphic / all PASS), 1 negative answer
(non-model / not isomorphic / some FAIL), 2 unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .corpus import CorpusSpec, group_corpus, load_mutation_fixtures, model_corpus
from .errors import NotAModelError, ParseError, TableError
from .logic import evaluate, parse_formula
from .ordinal import format_count, format_ordinal, parse_count
from .pgroup import ExplicitPGroup, format_group, parse_element, parse_group
from .reduction import borel_reduce, hred, verify_hred
from .selftest import run_selftest
from .tp import check_axioms, classify, decode, encode, format_structure, parse_structure, structure_iso
from .ulm import iso_by_ulm, profile_of, table_length, table_ulm_invariant

EXIT_OK, EXIT_NO, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _write(args, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _group(path: str) -> ExplicitPGroup:
    return parse_group(_first_line(_read(path)))


def _first_line(text: str) -> str:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ParseError("empty input")
    return lines[0]


def _check_p(args, p: int) -> None:
    if args.p is not None and args.p != p:
        raise ParseError(f"input has p={p} but --p {args.p} was given")


# --- commands -----------------------------------------------------------------


def cmd_check(args) -> int:
    M = parse_structure(_read(args.file))
    _check_p(args, M.p)
    report = check_axioms(M)
    print(report.to_text())
    return EXIT_OK if report.passed else EXIT_NO


def cmd_ulm(args) -> int:
    G = _group(args.file)
    _check_p(args, G.p)
    if G.is_finite:
        T = G.to_table()
        counts = {n: table_ulm_invariant(T, n) for n in range(table_length(T))}
        inv = ",".join(f"{n}:{u}" for n, u in counts.items() if u)
    else:
        inv = ",".join(f"{format_ordinal(a)}:{format_count(u)}" for a, u in profile_of(G).invariants)
    print(f"u={{{inv}}}; div={format_count(G.div_rank)}")
    return EXIT_OK


def cmd_iso(args) -> int:
    a, b = _read(args.a), _read(args.b)
    try:
        G, H = parse_group(_first_line(a)), parse_group(_first_line(b))
    except ParseError:
        M, N = parse_structure(a), parse_structure(b)
        same = M.p == N.p and structure_iso(M, N) is not None
    else:
        if G.p != H.p:
            same = False
        else:
            same = iso_by_ulm(G, H)
    print("isomorphic" if same else "not isomorphic")
    return EXIT_OK if same else EXIT_NO


def cmd_encode(args) -> int:
    G = _group(args.file)
    _check_p(args, G.p)
    if not G.is_finite:
        raise ParseError("encode needs a finite group (divisible=0)")
    if G.order > args.max_size:
        raise ParseError(f"|G| = {G.order} exceeds --max-size {args.max_size}")
    _write(args, format_structure(encode(G, args.m)))
    return EXIT_OK


def cmd_decode(args) -> int:
    M = parse_structure(_read(args.file))
    _check_p(args, M.p)
    try:
        dec = decode(M)
    except NotAModelError as exc:
        print(exc.report.to_text(), file=sys.stderr)
        return EXIT_NO
    _write(args, f"{format_group(classify(dec.table))}\nsize={dec.size}\n")
    return EXIT_OK


def cmd_reduce(args) -> int:
    M = parse_structure(_read(args.file))
    _check_p(args, M.p)
    try:
        H = borel_reduce(M)
    except NotAModelError as exc:
        print(exc.report.to_text(), file=sys.stderr)
        return EXIT_NO
    _write(args, format_group(H) + "\n")
    return EXIT_OK


def cmd_hred(args) -> int:
    G = _group(args.file)
    H = hred(G, parse_count(args.m))
    _write(args, (format_group(H) if isinstance(H, ExplicitPGroup) else str(H)) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    G = _group(args.file)
    report = verify_hred(G, args.m)
    print(report.to_text())
    return EXIT_OK if report.passed else EXIT_NO


def cmd_eval(args) -> int:
    f = parse_formula(args.formula)
    G = _group(args.file)
    x = parse_element(args.element, G) if args.element else None
    report = evaluate(f, G, x, denom_bound=args.denom_bound)
    print(report.to_text())
    return EXIT_OK if report.verdict else EXIT_NO


def _spec(args) -> CorpusSpec:
    primes = (args.p,) if args.p else (2, 3)
    return CorpusSpec(primes=primes, max_order=args.max_size, max_m=args.max_m, seed=args.seed,
                      relabel_samples=args.samples)


def cmd_selftest(args) -> int:
    inject = []
    if args.inject_mutations:
        inject = [(f"fixture-{k}", M) for k, M in load_mutation_fixtures().items()]
    for path in args.fixture or ():
        inject.append((Path(path).stem, parse_structure(_read(path))))
    lines = run_selftest(_spec(args), inject)
    for line in lines:
        print(line)
    return EXIT_OK if all(ln.startswith("PASS") for ln in lines) else EXIT_NO


def cmd_gen(args) -> int:
    spec = _spec(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    if args.kind == "groups":
        for G in group_corpus(spec):
            name = f"group-p{G.p}-{'_'.join(map(str, G.exps)) or 'trivial'}.txt"
            (out / name).write_text(format_group(G) + "\n")
            names.append(name)
    else:
        for i, (label, M) in enumerate(model_corpus(spec)):
            name = f"model-{i:04d}.txt"
            (out / name).write_text(f"# {label}\n{format_structure(M)}")
            names.append(name)
    print(f"wrote {len(names)} files to {out}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get("ULMFORGE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=None, help="prime to require or restrict to")
    common.add_argument("--seed", type=int, default=_default_seed(), help="RNG seed (default $ULMFORGE_SEED or 0)")
    common.add_argument("--max-size", type=int, default=64, help="largest group order handled")
    common.add_argument("--denom-bound", type=int, default=3, help="Prufer denominator exponent bound")
    common.add_argument("--format", choices=["text"], default="text")

    ap = argparse.ArgumentParser(prog="ulmforge", description="Abelian p-groups, Ulm invariants and T_p models.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    add("check", cmd_check, "check a structure against T_p").add_argument("file")
    add("ulm", cmd_ulm, "Ulm invariants of a group").add_argument("file")
    p = add("iso", cmd_iso, "compare two groups or two structures")
    p.add_argument("a")
    p.add_argument("b")
    p = add("encode", cmd_encode, "group -> L_p structure")
    p.add_argument("file")
    p.add_argument("--m", type=int, default=0, help="number of relation-free points")
    p.add_argument("-o", "--output")
    p = add("decode", cmd_decode, "model of T_p -> group and size")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p = add("reduce", cmd_reduce, "model of T_p -> H(G(M), #M)")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p = add("hred", cmd_hred, "closed form of H(G, m)")
    p.add_argument("file")
    p.add_argument("--m", default="0", help="natural number or w")
    p.add_argument("-o", "--output")
    p = add("verify", cmd_verify, "check the H(G, m) lemmas on one group")
    p.add_argument("file")
    p.add_argument("--m", type=int, default=0)
    p = add("eval", cmd_eval, "evaluate psi / phi / divisible-rank formulas")
    p.add_argument("formula")
    p.add_argument("file")
    p.add_argument("--element", help='e.g. "cyclic=(1,0); prufer=()"')
    for name, func, text in [("selftest", cmd_selftest, "run the corpus cross-checks"),
                             ("gen", cmd_gen, "write a seeded corpus to a directory")]:
        p = add(name, func, text)
        p.add_argument("--max-m", type=int, default=2)
        p.add_argument("--samples", type=int, default=1, help="relabelled copies per model")
        if name == "selftest":
            p.add_argument("--inject-mutations", action="store_true", help="add the known-bad fixtures")
            p.add_argument("--fixture", action="append", help="extra structure file to check")
        else:
            p.add_argument("--kind", choices=["groups", "models"], default="groups")
            p.add_argument("--out", required=True)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParseError, TableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

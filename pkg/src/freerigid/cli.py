"""Command-line front end.

Exit status is 0 on success, 1 on a domain error (reported as an
``error: <code>`` line on stderr) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import math
import random
import sys
from pathlib import Path

from . import formats
from .currents import frequency_csv, frequency_vector
from .dynamics import build_z, escape_power, iterate_edge
from .errors import FreeGroupError, InputError
from .metric import format_length, random_marked_rose, spectra_agree, translation_length
from .rigidity import (
    AgreeUpTo,
    CosetSpec,
    Limits,
    WitnessFamily,
    check_property_w,
    convergence_csv,
    convergence_report,
    make_coset_witness,
    propw_certificate,
    rigidity_distinguisher,
)
from .stallings import (
    coset_power_bound,
    contains,
    fold,
    index,
    power_bound,
    reads_based,
    rebase,
    with_basepoint,
)
from .words import CyclicWord, count_occurrences, cyclic_reduce, parse_word, parse_words

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- argument helpers

def _index_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        if not (lo.isdigit() and hi.isdigit()) or int(lo) > int(hi):
            raise UsageError(f"bad index range {text!r}")
        return list(range(int(lo), int(hi) + 1))
    if not text.isdigit():
        raise UsageError(f"bad index {text!r}")
    return [int(text)]


def _indices(values: list[str] | None, default: list[int]) -> list[int]:
    if not values:
        return default
    out: list[int] = []
    for v in values:
        for part in v.split(","):
            out.extend(_index_range(part))
    return out


def _cosets(specs: list[str], rank: int | None) -> list[CosetSpec]:
    """``tail:g1,g2`` or just ``g1,g2`` (trivial tail)."""
    out = []
    for spec in specs:
        tail, sep, gens = spec.rpartition(":")
        out.append(CosetSpec(parse_word(tail, rank) if sep else parse_word("1"), tuple(parse_words(gens, rank))))
    return out


def _load_map(arg: str | None):
    if arg is None:
        raise UsageError("--map is required")
    if Path(arg).is_file():
        return formats.load_map(formats.read_text(arg))
    return formats.load_fixture(arg)


def _load_graph(arg: str):
    text = sys.stdin.read() if arg == "-" else formats.read_text(arg)
    return formats.load_graph(text)


def _cyclic(text: str, rank: int | None) -> CyclicWord:
    return cyclic_reduce(parse_word(text, rank))[0]


def _bool(x: bool) -> str:
    return "true" if x else "false"


def _bound(x) -> str:
    return "unbounded" if x == math.inf else str(x)


# ---------------------------------------------------------------- subcommands

def cmd_reduce(a):
    return str(parse_word(a.word, a.rank))


def cmd_cyclic(a):
    c, conj = cyclic_reduce(parse_word(a.word, a.rank))
    return f"{c} {conj}"


def cmd_count(a):
    return str(count_occurrences(_cyclic(a.g, a.rank), parse_word(a.v, a.rank)))


def cmd_freq(a):
    g = _cyclic(a.g, a.rank)
    if not g.letters:
        raise InputError("the trivial word has no counting current")
    return frequency_csv(frequency_vector(g, a.L, a.rank)).rstrip("\n")


def cmd_fold(a):
    if a.rank is None:
        raise UsageError("fold needs -r/--rank")
    return formats.dump_graph(fold(parse_words(a.generators, a.rank), a.rank)).rstrip("\n")


def cmd_index(a):
    n = index(_load_graph(a.graph))
    return "infinite" if n == math.inf else str(n)


def cmd_member(a):
    g = _load_graph(a.graph)
    return _bool(contains(g, parse_word(a.word, g.rank)))


def cmd_reads(a):
    g = _load_graph(a.graph)
    bg = with_basepoint(g, parse_word(a.tail, g.rank))
    return _bool(reads_based(bg, parse_word(a.word, g.rank)))


def cmd_rebase(a):
    phi = _load_map(a.map).word_images if a.map else tuple(parse_words(a.phi or "", a.rank))
    if not phi:
        raise UsageError("rebase needs --map or --phi")
    return formats.dump_graph(rebase(parse_words(a.generators, len(phi)), phi)).rstrip("\n")


def cmd_powbound(a):
    g = _load_graph(a.graph)
    z = parse_word(a.z, g.rank)
    if a.tail is None:
        return _bound(power_bound(g, z))
    return _bound(coset_power_bound(g, parse_word(a.tail, g.rank), z))


def _trees(a, need: int | None = None):
    trees = [formats.parse_tree_arg(t) for t in (a.tree or [])]
    if need is not None and len(trees) != need:
        raise UsageError(f"exactly {need} --tree option(s) required")
    return trees


def cmd_length(a):
    (t,) = _trees(a, 1)
    x = translation_length(t, parse_word(a.word, t.rank))
    return str(x) if a.exact else format_length(x)


def cmd_spectra(a):
    t1, t2 = _trees(a, 2)
    words = [parse_word(w, t1.rank) for w in a.words]
    return _bool(spectra_agree(t1, t2, words, a.tol))


def cmd_iterate(a):
    f = _load_map(a.map)
    w, cancelled = iterate_edge(f, parse_word(a.edge).letters[0], a.n)
    return f"{w}" + (" cancelled" if cancelled else "")


def cmd_escape(a):
    f = _load_map(a.map)
    cosets = _cosets(a.cosets, f.num_edges)
    targets = [with_basepoint(fold(c.generators, f.num_edges), c.tail.inverse()) for c in cosets]
    res = escape_power(f, targets, a.window, a.max_depth)
    lines = [f"edge {e} target {i} m {m}" for (e, i), m in sorted(res.table.items())]
    lines += [f"edge {e} m {m}" for e, m in sorted(res.per_edge.items())]
    lines.append(f"overall {res.overall}")
    return "\n".join(lines)


def cmd_buildz(a):
    f = _load_map(a.map)
    seed = parse_word(a.letter, f.num_edges).letters[0]
    edge = parse_word(a.edge, f.num_edges).letters[0] if a.edge else None
    z, n = build_z(f, seed, a.m, edge, a.search_limit)
    return f"{z} {n}"


def cmd_certify(a):
    f = _load_map(a.map)
    cert = propw_certificate(_cosets(a.cosets, f.num_edges), f, Limits(window=a.window, max_depth=a.max_depth))
    return formats.dump_certificate(cert).rstrip("\n")


def cmd_checkw(a):
    cert = formats.load_certificate(formats.read_text(a.cert))
    cosets = _cosets(a.cosets, len(cert.phi))
    ok, violations = check_property_w(cosets, cert, a.samples, a.max_len, a.seed)
    lines = [f"# seed={a.seed}", f"samples {a.samples} max_len {a.max_len} M {cert.M}"]
    lines += [f"violation coset {v.coset} h {v.h} run {v.run}" for v in violations[:20]]
    lines.append("ok" if ok else f"violations {len(violations)}")
    if not ok:
        raise _Violated(f"{len(violations)} sampled members exceed M = {cert.M}", "\n".join(lines))
    return "\n".join(lines)


class _Violated(FreeGroupError):
    code = "property_w_violated"

    def __init__(self, message: str, output: str):
        super().__init__(message)
        self.output = output


def _family(a) -> WitnessFamily:
    u = _cyclic(a.u, a.rank)
    r = _cyclic(a.r, a.rank)
    if not u.letters or not r.letters:
        raise InputError("u and r must be nontrivial")
    tail = parse_word(a.g, a.rank) if a.g else parse_word("1")
    return WitnessFamily.build(u, r, tail, a.rank)


def cmd_witness(a):
    fam = _family(a)
    lines = ["connectors " + " ".join(str(c) for c in fam.connectors)]
    for i in _indices(a.i, [1]):
        w = make_coset_witness(fam, i) if fam.tail else fam.word(i)
        lines.append(f"{i} {w} {len(w)}")
    return "\n".join(lines)


def cmd_converge(a):
    fam = _family(a)
    trees = {f"T{k}": t for k, t in enumerate(_trees(a))}
    rng = random.Random(a.seed)
    rank = max([2, *(abs(x) for x in fam.u.letters + fam.r.letters + fam.tail.letters),
                *(t.rank for t in trees.values())])
    for k in range(a.random_trees):
        trees[f"R{k}"] = random_marked_rose(rank, rng)
    rows = convergence_report(fam, a.L, _indices(a.i, [1]), trees, a.jobs, rank)
    text = f"# seed={a.seed}\n" + convergence_csv(rows)
    if a.csv:
        Path(a.csv).write_text(text, encoding="utf-8")
    return text.rstrip("\n")


def cmd_distinguish(a):
    t1, t2 = _trees(a, 2)
    res = rigidity_distinguisher(t1, t2, parse_word(a.r, t1.rank), a.i_max, a.u_len)
    if isinstance(res, AgreeUpTo):
        return f"agree i_max {res.i_max} u_search_length {res.u_search_length}"
    return "\n".join([
        f"u {res.u}",
        "connectors " + " ".join(str(c) for c in res.family.connectors),
        f"i {res.i}",
        f"word {res.word}",
        f"lengths {res.length_1} {res.length_2}",
    ])


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freerigid", description="Exact computations in free groups.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_, rank_flags=("-r", "--rank")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument(*rank_flags, dest="rank", type=int)
        sp.add_argument("-o", "--output", help="write the result to this file instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("reduce", cmd_reduce, "freely reduce a word")
    sp.add_argument("word")
    sp = add("cyclic", cmd_cyclic, "cyclic reduction and conjugator")
    sp.add_argument("word")
    sp = add("count", cmd_count, "occurrences of v or v^-1 in the cyclic word g")
    sp.add_argument("g")
    sp.add_argument("v")
    sp = add("freq", cmd_freq, "frequency vector of a cyclic word as CSV")
    sp.add_argument("g")
    sp.add_argument("-L", type=int, default=2)
    sp = add("fold", cmd_fold, "Stallings graph of a subgroup")
    sp.add_argument("generators", help="comma-separated words")
    sp = add("index", cmd_index, "index of the subgroup of a graph file")
    sp.add_argument("graph", help="graph file, or - for stdin")
    sp = add("member", cmd_member, "membership test")
    sp.add_argument("graph")
    sp.add_argument("word")
    sp = add("reads", cmd_reads, "readability of a path anywhere in core plus bridge")
    sp.add_argument("graph")
    sp.add_argument("word")
    sp.add_argument("--tail", default="1")
    sp = add("rebase", cmd_rebase, "subgroup graph over the basis {phi(x_k)}")
    sp.add_argument("generators")
    sp.add_argument("--map")
    sp.add_argument("--phi", help="comma-separated basis images")
    sp = add("powbound", cmd_powbound, "exact bound on readable z-powers")
    sp.add_argument("graph")
    sp.add_argument("-z", required=True)
    sp.add_argument("--tail", help="coset tail; gives the doubled cyclic bound")
    sp = add("length", cmd_length, "translation length")
    sp.add_argument("word")
    sp.add_argument("--tree", action="append")
    sp.add_argument("--exact", action="store_true", help="print an exact fraction")
    sp = add("spectra", cmd_spectra, "compare two length spectra on a word list")
    sp.add_argument("words", nargs="+")
    sp.add_argument("--tree", action="append")
    sp.add_argument("--tol", default="0")
    sp = add("iterate", cmd_iterate, "iterate a map on an edge")
    sp.add_argument("--map")
    sp.add_argument("-e", "--edge", default="a")
    sp.add_argument("-n", type=int, default=1)
    sp = add("escape", cmd_escape, "escape powers for coset targets")
    sp.add_argument("cosets", nargs="+", help="tail:g1,g2 or g1,g2")
    sp.add_argument("--map")
    sp.add_argument("--window", type=int, default=5)
    sp.add_argument("--max-depth", type=int, default=40)
    sp = add("buildz", cmd_buildz, "primitive element containing f^m(e)")
    sp.add_argument("--map")
    sp.add_argument("--letter", default="a")
    sp.add_argument("-e", "--edge")
    sp.add_argument("-m", type=int, required=True)
    sp.add_argument("--search-limit", type=int, default=30)
    sp = add("certify", cmd_certify, "Property W certificate for a union of cosets")
    sp.add_argument("cosets", nargs="*")
    sp.add_argument("--map")
    sp.add_argument("--window", type=int, default=5)
    sp.add_argument("--max-depth", type=int, default=40)
    sp = add("checkw", cmd_checkw, "sample-check a certificate")
    sp.add_argument("cosets", nargs="*")
    sp.add_argument("--cert", required=True)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--max-len", type=int, default=40)
    sp.add_argument("--seed", type=int, default=0)

    for name, func, help_ in (("witness", cmd_witness, "witness words w_i"),
                              ("converge", cmd_converge, "convergence report as CSV")):
        sp = add(name, func, help_, ("--rank",))
        sp.add_argument("-u", required=True)
        sp.add_argument("-r", dest="r", required=True, help="the normal generator r")
        sp.add_argument("-g", help="coset tail")
        sp.add_argument("-i", action="append", help="index or range a..b; repeatable")
        if name == "converge":
            sp.add_argument("-L", type=int, default=1)
            sp.add_argument("--tree", action="append")
            sp.add_argument("--random-trees", type=int, default=0)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--jobs", type=int, default=1)
            sp.add_argument("--csv")

    sp = add("distinguish", cmd_distinguish, "element of ncl(r) separating two trees", ("--rank",))
    sp.add_argument("--tree", action="append")
    sp.add_argument("-r", dest="r", required=True, help="the normal generator r")
    sp.add_argument("--i-max", type=int, default=50)
    sp.add_argument("--u-len", type=int, default=4)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _emit(args, args.func(args))
    except UsageError as exc:
        parser.error(str(exc))
    except FreeGroupError as exc:
        if isinstance(exc, _Violated):
            _emit(args, exc.output)
        print(f"error: {exc.code}", file=sys.stderr)
        print(f"detail: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: io", file=sys.stderr)
        print(f"detail: {exc}", file=sys.stderr)
        return 1
    return 0


def _emit(args, out: str) -> None:
    if args.output:
        Path(args.output).write_text(out + "\n", encoding="utf-8")
    else:
        print(out)


if __name__ == "__main__":
    sys.exit(main())

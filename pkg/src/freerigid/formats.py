"""Plain-text line formats for graphs, trees, maps and certificates.

Every format is line based; blank lines and ``#`` comments are ignored,
except in certificates where ``# key = value`` lines carry provenance.
"""
from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

from .dynamics import GraphMap
from .errors import InputError
from .metric import MarkedMetricGraph, rose
from .rigidity import PropertyWCertificate
from .stallings import CoreGraph
from .words import Word, format_letters, parse_word

__all__ = [
    "dump_graph",
    "load_graph",
    "dump_tree",
    "load_tree",
    "parse_tree_arg",
    "dump_map",
    "load_map",
    "dump_certificate",
    "load_certificate",
    "load_fixture",
    "fixture_names",
    "read_text",
]


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InputError(f"line {lineno}: {what} must be an integer, got {tok!r}") from None


def _header(fields: dict, key: str, default=None) -> int:
    if key in fields:
        return fields[key]
    if default is None:
        raise InputError(f"missing '{key}' line")
    return default


def _letter_index(tok: str, rank: int, lineno: int) -> int:
    w = parse_word(tok)
    if len(w) != 1 or w.letters[0] < 0 or w.letters[0] > rank:
        raise InputError(f"line {lineno}: {tok!r} is not a basis letter of rank {rank}")
    return w.letters[0]


# ---------------------------------------------------------------- subgroup graphs

def dump_graph(g: CoreGraph) -> str:
    out = [f"rank {g.rank}", f"vertices {g.num_vertices}", f"base {g.base}"]
    out += [f"edge {format_letters((label,))} {s} {t}" for label, s, t in g.edges]
    return "\n".join(out) + "\n"


def load_graph(text: str) -> CoreGraph:
    fields: dict[str, int] = {}
    raw_edges = []
    for lineno, tok in _lines(text):
        key = tok[0]
        if key in ("rank", "vertices", "base") and len(tok) == 2:
            fields[key] = _int(tok[1], key, lineno)
        elif key == "edge" and len(tok) == 4:
            raw_edges.append((lineno, tok[1], _int(tok[2], "source", lineno), _int(tok[3], "target", lineno)))
        else:
            raise InputError(f"line {lineno}: cannot parse {' '.join(tok)!r}")
    rank = _header(fields, "rank")
    edges = tuple((_letter_index(name, rank, lineno), s, t) for lineno, name, s, t in raw_edges)
    return CoreGraph(rank, _header(fields, "vertices"), edges, _header(fields, "base", 0))


# ---------------------------------------------------------------- marked metric graphs

def _signed_edges(names: dict[str, int], toks, lineno: int) -> tuple[int, ...]:
    out = []
    for tok in toks:
        sign = -1 if tok.startswith("-") else 1
        name = tok.lstrip("-")
        if name not in names:
            raise InputError(f"line {lineno}: unknown edge {name!r}")
        out.append(sign * names[name])
    return tuple(out)


def _length(tok: str, lineno: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"line {lineno}: bad length {tok!r}") from None


def dump_tree(t: MarkedMetricGraph) -> str:
    out = [f"rank {t.rank}", f"vertices {t.num_vertices}", f"base {t.base}"]
    for name, (s, d), length in zip(t.names, t.ends, t.lengths):
        out.append(f"edge {name} {s} {d} {length}")
    for k, loop in enumerate(t.marking, start=1):
        path = " ".join(t.names[e - 1] if e > 0 else "-" + t.names[-e - 1] for e in loop)
        out.append(f"marking x{k} = {path}".rstrip())
    return "\n".join(out) + "\n"


def load_tree(text: str) -> MarkedMetricGraph:
    fields: dict[str, int] = {}
    edges: list[tuple[str, int, int, Fraction]] = []
    markings: dict[int, tuple[int, list[str]]] = {}
    for lineno, tok in _lines(text):
        key = tok[0]
        if key == "rose":
            if len(tok) < 2:
                raise InputError(f"line {lineno}: rose needs at least one length")
            return rose([_length(x, lineno) for x in tok[1:]])
        if key in ("rank", "vertices", "base") and len(tok) == 2:
            fields[key] = _int(tok[1], key, lineno)
        elif key == "edge" and len(tok) == 5:
            edges.append((tok[1], _int(tok[2], "source", lineno), _int(tok[3], "target", lineno),
                          _length(tok[4], lineno)))
        elif key == "marking" and len(tok) >= 3 and tok[2] == "=":
            if not (tok[1].startswith("x") and tok[1][1:].isdigit()):
                raise InputError(f"line {lineno}: marking target must be x<k>")
            markings[int(tok[1][1:])] = (lineno, tok[3:])
        else:
            raise InputError(f"line {lineno}: cannot parse {' '.join(tok)!r}")
    rank = _header(fields, "rank")
    names = {name: k for k, (name, *_rest) in enumerate(edges, start=1)}
    if len(names) != len(edges):
        raise InputError("edge names must be distinct")
    if any(name.startswith("-") for name in names):
        raise InputError("edge names may not start with '-'")
    if sorted(markings) != list(range(1, rank + 1)):
        raise InputError(f"need exactly one marking line for each of x1..x{rank}")
    marking = tuple(_signed_edges(names, markings[k][1], markings[k][0]) for k in range(1, rank + 1))
    return MarkedMetricGraph(
        num_vertices=_header(fields, "vertices"),
        ends=tuple((s, t) for _, s, t, _ in edges),
        lengths=tuple(x for *_, x in edges),
        marking=marking,
        base=_header(fields, "base", 0),
        names=tuple(names),
    )


def parse_tree_arg(arg: str) -> MarkedMetricGraph:
    """``rose:l1,l2,...`` or a path to a tree file."""
    if arg.startswith("rose:"):
        return rose([_length(x, 0) for x in arg[5:].split(",") if x])
    return load_tree(read_text(arg))


# ---------------------------------------------------------------- graph maps

def dump_map(f: GraphMap) -> str:
    if f.is_rose:
        out = [f"rank {f.num_edges}"]
        out += [f"image x{k} = {format_letters(img)}" for k, img in enumerate(f.images, start=1)]
        return "\n".join(out) + "\n"
    out = [f"vertices {f.num_vertices}"]
    out += [f"edge e{k} {s} {t}" for k, (s, t) in enumerate(f.ends, start=1)]
    for k, img in enumerate(f.images, start=1):
        out.append(f"image e{k} = " + " ".join(f"e{x}" if x > 0 else f"-e{-x}" for x in img))
    return "\n".join(out) + "\n"


def load_map(text: str) -> GraphMap:
    fields: dict[str, int] = {}
    edges: list[tuple[str, int, int]] = []
    images: dict[str, tuple[int, list[str]]] = {}
    for lineno, tok in _lines(text):
        key = tok[0]
        if key in ("rank", "vertices") and len(tok) == 2:
            fields[key] = _int(tok[1], key, lineno)
        elif key == "edge" and len(tok) == 4:
            edges.append((tok[1], _int(tok[2], "source", lineno), _int(tok[3], "target", lineno)))
        elif key == "image" and len(tok) >= 4 and tok[2] == "=":
            images[tok[1]] = (lineno, tok[3:])
        else:
            raise InputError(f"line {lineno}: cannot parse {' '.join(tok)!r}")
    if not edges:
        rank = _header(fields, "rank")
        if sorted(images) != sorted(f"x{k}" for k in range(1, rank + 1)):
            raise InputError(f"need exactly one image line for each of x1..x{rank}")
        out = []
        for k in range(1, rank + 1):
            lineno, toks = images[f"x{k}"]
            if len(toks) != 1:
                raise InputError(f"line {lineno}: image must be a single word")
            w = parse_word(toks[0], rank)
            if len(w.letters) != len(toks[0]):
                raise InputError(f"line {lineno}: image {toks[0]!r} is not reduced")
            out.append(w.letters)
        return GraphMap(tuple(out))
    names = {name: k for k, (name, _, _) in enumerate(edges, start=1)}
    if sorted(images) != sorted(names):
        raise InputError("need exactly one image line per edge")
    out = [_signed_edges(names, images[name][1], images[name][0]) for name in names]
    return GraphMap(tuple(out), tuple((s, t) for _, s, t in edges), _header(fields, "vertices"))


def fixture_names() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files("freerigid").joinpath("data").iterdir()
                  if p.name.endswith(".map"))


def load_fixture(name: str) -> GraphMap:
    """A shipped map such as ``fibonacci`` or ``tribonacci``."""
    if name not in fixture_names():
        raise InputError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    return load_map(resources.files("freerigid").joinpath("data").joinpath(f"{name}.map").read_text(encoding="utf-8"))


# ---------------------------------------------------------------- certificates

def dump_certificate(cert: PropertyWCertificate) -> str:
    out = [f"# {k} = {v}" for k, v in cert.provenance.items()]
    out.append(f"z {cert.z}")
    out += [f"phi x{k} = {w}" for k, w in enumerate(cert.phi, start=1)]
    out.append(f"M {cert.M}")
    return "\n".join(out) + "\n"


def load_certificate(text: str) -> PropertyWCertificate:
    provenance: dict[str, str] = {}
    z = m = None
    phi: dict[int, Word] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                provenance[key.strip()] = value.strip()
            continue
        tok = line.split()
        if tok[0] == "z" and len(tok) == 2:
            z = parse_word(tok[1])
        elif tok[0] == "M" and len(tok) == 2:
            m = _int(tok[1], "M", lineno)
        elif tok[0] == "phi" and len(tok) == 4 and tok[2] == "=" and tok[1][1:].isdigit():
            phi[int(tok[1][1:])] = parse_word(tok[3])
        else:
            raise InputError(f"line {lineno}: cannot parse {line!r}")
    if z is None or m is None or not phi:
        raise InputError("certificate needs z, phi and M lines")
    if sorted(phi) != list(range(1, len(phi) + 1)):
        raise InputError("phi lines must cover x1..xN")
    return PropertyWCertificate(z, tuple(phi[k] for k in sorted(phi)), m, provenance)

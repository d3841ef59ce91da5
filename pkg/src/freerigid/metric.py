"""Marked metric graphs (points of Outer Space) and their translation length functions."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InputError
from .stallings import fold, index, invert_automorphism
from .words import Basis, Word

__all__ = [
    "MarkedMetricGraph",
    "translation_length",
    "spectra_agree",
    "rose",
    "marked_rose",
    "scale",
    "random_nielsen_automorphism",
    "random_marked_rose",
    "format_length",
]


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class MarkedMetricGraph:
    """Finite graph with positive edge lengths and a marking.

    Edges are numbered 1..E; an edgepath is a sequence of signed edge numbers
    (``-e`` traverses edge ``e`` backwards). ``marking[k-1]`` is the loop at
    ``base`` representing the basis letter x_k.
    """

    num_vertices: int
    ends: tuple[tuple[int, int], ...]
    lengths: tuple[Fraction, ...]
    marking: tuple[tuple[int, ...], ...]
    base: int = 0
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(_as_fraction(x) for x in self.lengths))
        object.__setattr__(self, "ends", tuple(tuple(e) for e in self.ends))
        object.__setattr__(self, "marking", tuple(tuple(m) for m in self.marking))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"e{i}" for i in range(1, len(self.ends) + 1)))
        if len(self.lengths) != len(self.ends) or len(self.names) != len(self.ends):
            raise InputError("one length and one name per edge required")
        if any(x <= 0 for x in self.lengths):
            raise InputError("edge lengths must be positive")
        if not 0 <= self.base < self.num_vertices:
            raise InputError("base vertex out of range")
        for s, t in self.ends:
            if not (0 <= s < self.num_vertices and 0 <= t < self.num_vertices):
                raise InputError("edge endpoint out of range")
        for k, loop in enumerate(self.marking, start=1):
            if self._endpoint(loop) != self.base:
                raise InputError(f"marking of x{k} is not a closed edgepath at the base")
        self._check_marking()

    @property
    def rank(self) -> int:
        return len(self.marking)

    def _endpoint(self, path: Sequence[int]) -> int | None:
        v = self.base
        for e in path:
            if e == 0 or abs(e) > len(self.ends):
                raise InputError(f"unknown edge {e}")
            s, t = self.ends[abs(e) - 1]
            if e > 0 and s == v:
                v = t
            elif e < 0 and t == v:
                v = s
            else:
                return None
        return v

    def _check_marking(self) -> None:
        """The marking must be an isomorphism onto pi_1 of the graph.

        Loops are rewritten in chord coordinates of a spanning tree; they must
        generate the whole free group on the chords, whose rank must equal N.
        """
        tree_path = {self.base: ()}
        chords: list[int] = []
        frontier = [self.base]
        remaining = set(range(1, len(self.ends) + 1))
        while frontier:
            v = frontier.pop()
            for e in sorted(remaining):
                s, t = self.ends[e - 1]
                if s == v and t not in tree_path:
                    tree_path[t] = tree_path[v] + (e,)
                elif t == v and s not in tree_path:
                    tree_path[s] = tree_path[v] + (-e,)
                else:
                    continue
                remaining.discard(e)
                frontier.append(t if s == v else s)
        if len(tree_path) != self.num_vertices:
            raise InputError("graph is not connected")
        chords = sorted(remaining)
        if len(chords) != self.rank:
            raise InputError(f"graph has rank {len(chords)} but marking has {self.rank} loops")
        if not chords:
            return
        chord_letter = {e: i for i, e in enumerate(chords, start=1)}
        coords = [Word(tuple(
            (chord_letter[abs(e)] if e > 0 else -chord_letter[abs(e)])
            for e in loop if abs(e) in chord_letter)) for loop in self.marking]
        if index(fold(coords, len(chords))) != 1:
            raise InputError("marking loops do not generate the fundamental group")

    def image(self, g: Word) -> list[int]:
        out: list[int] = []
        for x in g.letters:
            loop = self.marking[abs(x) - 1]
            out.extend(loop if x > 0 else (-e for e in reversed(loop)))
        return out


def _cyclic_edge_reduce(path: Iterable[int]) -> list[int]:
    stack: list[int] = []
    for e in path:
        if stack and stack[-1] == -e:
            stack.pop()
        else:
            stack.append(e)
    i, j = 0, len(stack) - 1
    while i < j and stack[i] == -stack[j]:
        i += 1
        j -= 1
    return stack[i:j + 1]


def translation_length(tree: MarkedMetricGraph, g: Word) -> Fraction:
    """Length of the cyclically reduced loop representing the marked image of g."""
    lengths = tree.lengths
    return sum((lengths[abs(e) - 1] for e in _cyclic_edge_reduce(tree.image(g))), Fraction(0))


def spectra_agree(t1: MarkedMetricGraph, t2: MarkedMetricGraph, sigma: Iterable[Word], tol=0) -> bool:
    if t1.rank != t2.rank:
        raise InputError("trees are marked by free groups of different rank")
    tol = _as_fraction(tol)
    return all(abs(translation_length(t1, g) - translation_length(t2, g)) <= tol for g in sigma)


def rose(lengths: Sequence) -> MarkedMetricGraph:
    """One-vertex graph, petal k of length lengths[k-1], identity marking."""
    n = len(lengths)
    Basis(n)
    return MarkedMetricGraph(1, ((0, 0),) * n, tuple(lengths), tuple((k,) for k in range(1, n + 1)))


def marked_rose(phi: Sequence[Word], lengths: Sequence) -> MarkedMetricGraph:
    """Rose whose marking sends x_k to the petal loop spelling phi(x_k)."""
    if len(phi) != len(lengths):
        raise InputError("one length per basis letter required")
    invert_automorphism(phi)
    n = len(lengths)
    return MarkedMetricGraph(1, ((0, 0),) * n, tuple(lengths), tuple(w.letters for w in phi))


def scale(tree: MarkedMetricGraph, c) -> MarkedMetricGraph:
    c = _as_fraction(c)
    if c <= 0:
        raise InputError("scale factor must be positive")
    return MarkedMetricGraph(tree.num_vertices, tree.ends, tuple(c * x for x in tree.lengths),
                             tree.marking, tree.base, tree.names)


def random_nielsen_automorphism(rank: int, rng: random.Random, max_moves: int = 5) -> tuple[Word, ...]:
    """Compose up to ``max_moves`` random elementary Nielsen moves (at least one when rank >= 2)."""
    images = [Word((k,)) for k in range(1, rank + 1)]
    for _ in range(rng.randint(1, max_moves)):
        i = rng.randrange(rank)
        kind = rng.choice(("invert", "swap", "right", "left")) if rank > 1 else "invert"
        if kind == "invert":
            images[i] = images[i].inverse()
            continue
        j = rng.choice([k for k in range(rank) if k != i])
        if kind == "swap":
            images[i], images[j] = images[j], images[i]
            continue
        other = images[j] if rng.random() < 0.5 else images[j].inverse()
        images[i] = images[i] * other if kind == "right" else other * images[i]
    return tuple(images)


def random_marked_rose(rank: int, rng: random.Random, max_moves: int = 5) -> MarkedMetricGraph:
    """Marked rose with a random Nielsen marking and lengths uniform in {1/10, 2/10, ..., 10}."""
    phi = random_nielsen_automorphism(rank, rng, max_moves)
    lengths = [Fraction(rng.randint(1, 100), 10) for _ in range(rank)]
    return marked_rose(phi, lengths)


def format_length(x: Fraction) -> str:
    """Decimal rendering with 12 significant digits."""
    return f"{float(x):.12g}"


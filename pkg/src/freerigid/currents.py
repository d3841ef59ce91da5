"""Finite-window frequency vectors of counting currents."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .metric import MarkedMetricGraph, translation_length
from .words import (
    CyclicWord,
    Word,
    class_representative,
    cylinder_counts,
    format_letters,
    parse_word,
    reduced_words,
    shortlex_key,
)

__all__ = [
    "FrequencyVector",
    "cylinder_keys",
    "frequency_vector",
    "current_distance",
    "pair_with_tree",
    "frequency_csv",
]

_KEY_CACHE: dict[tuple[int, int], tuple[tuple[int, ...], ...]] = {}


def cylinder_keys(rank: int, window: int) -> tuple[tuple[int, ...], ...]:
    """One representative per class {v, v^-1} with 1 <= |v| <= window, shortlex order."""
    key = (rank, window)
    if key not in _KEY_CACHE:
        reps = {class_representative(w.letters) for w in reduced_words(rank, window, min_len=1)}
        _KEY_CACHE[key] = tuple(sorted(reps, key=shortlex_key))
    return _KEY_CACHE[key]


@dataclass(frozen=True)
class FrequencyVector:
    """Normalized cylinder values n_g(v±)/||g|| for every class with |v| <= window."""

    window: int
    rank: int
    table: dict
    source_length: int

    def __getitem__(self, v) -> Fraction:
        if isinstance(v, str):
            v = parse_word(v)
        letters = v.letters if isinstance(v, Word) else tuple(v)
        return self.table[class_representative(letters)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencyVector):
            return NotImplemented
        return (self.window, self.rank, self.table) == (other.window, other.rank, other.table)

    __hash__ = None


def frequency_vector(g: CyclicWord, window: int, rank: int | None = None) -> FrequencyVector:
    if not g.letters:
        raise InputError("the trivial word has no counting current")
    if window < 1:
        raise InputError("window must be at least 1")
    rank = rank if rank is not None else max(2, max(abs(x) for x in g.letters))
    if max(abs(x) for x in g.letters) > rank:
        raise InputError("word uses letters outside the basis")
    counts = cylinder_counts(g, window)
    n = len(g)
    table = {v: Fraction(counts.get(v, 0), n) for v in cylinder_keys(rank, window)}
    return FrequencyVector(window, rank, table, n)


def current_distance(u: FrequencyVector, w: FrequencyVector) -> Fraction:
    """Sup over cylinders of the difference between normalized values."""
    if u.window != w.window or u.rank != w.rank:
        raise InputError("frequency vectors have different windows or bases")
    return max(abs(u.table[k] - w.table[k]) for k in u.table)


def pair_with_tree(tree: MarkedMetricGraph, g: Word) -> Fraction:
    """<T, eta_g> = ||g||_T."""
    return translation_length(tree, g)


def frequency_csv(vec: FrequencyVector) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cylinder", "value_num", "value_den", "value_decimal"])
    for k, val in vec.table.items():
        writer.writerow([format_letters(k), val.numerator, val.denominator, f"{float(val):.12g}"])
    return buf.getvalue()

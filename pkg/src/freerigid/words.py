"""Reduced and cyclic words in a free group F_N.

Letters are nonzero integers: ``k`` is the basis letter x_k and ``-k`` its
inverse. In text, ``a, b, c, ...`` spell x1, x2, x3, ... and upper case
spells inverses; the empty word is ``1``.
"""
from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import InputError

__all__ = [
    "Basis",
    "Word",
    "CyclicWord",
    "parse_word",
    "parse_words",
    "format_letters",
    "reduce",
    "cyclic_reduce",
    "count_occurrences",
    "cylinder_counts",
    "class_representative",
    "max_power_run",
    "is_proper_power",
    "substitute",
    "shortlex_key",
    "reduced_words",
]

_LOWER = string.ascii_lowercase


@dataclass(frozen=True)
class Basis:
    rank: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rank < 1:
            raise InputError(f"rank must be positive, got {self.rank}")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{k}" for k in range(1, self.rank + 1)))
        if len(self.names) != self.rank or len(set(self.names)) != self.rank:
            raise InputError("basis names must be distinct, one per letter")

    def letters(self) -> tuple[int, ...]:
        """All 2N signed letters in shortlex order."""
        return tuple(sorted((s * k for k in range(1, self.rank + 1) for s in (1, -1)), key=letter_key))

    def check(self, letters: Iterable[int]) -> None:
        for x in letters:
            if x == 0 or abs(x) > self.rank:
                raise InputError(f"letter index {x} not in basis of rank {self.rank}")


def letter_key(x: int) -> tuple[bool, int]:
    # a < b < ... < A < B < ...
    return (x < 0, abs(x))


def _letter_code(x: int) -> int:
    return abs(x) + (1 << 20 if x < 0 else 0)


def shortlex_key(letters: Sequence[int]) -> tuple:
    return (len(letters), tuple(letter_key(x) for x in letters))


def _free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise InputError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A freely reduced word. Construction always reduces."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    @classmethod
    def parse(cls, text: str) -> Word:
        return parse_word(text)

    @property
    def rank(self) -> int:
        """Smallest rank whose basis contains every letter (at least 1)."""
        return max((abs(x) for x in self.letters), default=1)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.letters[item])
        return self.letters[item]

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> Word:
        if n < 0:
            return self.inverse() ** (-n)
        c, conj = cyclic_reduce(self)
        return Word(conj.letters + c.letters * n + conj.inverse().letters)

    def inverse(self) -> Word:
        return Word(tuple(-x for x in reversed(self.letters)))

    def conjugate(self, h: Word) -> Word:
        """h * self * h^-1."""
        return h * self * h.inverse()

    def contains_subword(self, v: Word) -> bool:
        n, m = len(self.letters), len(v.letters)
        return any(self.letters[p:p + m] == v.letters for p in range(n - m + 1))

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]

    def __str__(self) -> str:
        return format_letters(self.letters)

    def __repr__(self) -> str:
        return f"Word({self})"


@dataclass(frozen=True, eq=False)
class CyclicWord:
    """A cyclically reduced word, compared up to rotation."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(self.letters)
        if _free_reduce(letters) != letters:
            raise InputError(f"{format_letters(letters)} is not freely reduced")
        if len(letters) >= 2 and letters[0] == -letters[-1]:
            raise InputError(f"{format_letters(letters)} is not cyclically reduced")
        object.__setattr__(self, "letters", letters)

    @cached_property
    def canonical(self) -> tuple[int, ...]:
        """Shortlex-least rotation."""
        letters = self.letters
        if not letters:
            return ()
        codes = [_letter_code(x) for x in letters]
        doubled = codes + codes
        n = len(codes)
        best = min(range(n), key=lambda i: doubled[i:i + n])
        return letters[best:] + letters[:best]

    @classmethod
    def of(cls, w: Word | str) -> CyclicWord:
        if isinstance(w, str):
            w = parse_word(w)
        return cyclic_reduce(w)[0]

    @property
    def word(self) -> Word:
        return Word(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CyclicWord):
            return NotImplemented
        return self.canonical == other.canonical

    def __hash__(self) -> int:
        return hash(self.canonical)

    def inverse(self) -> CyclicWord:
        return CyclicWord(tuple(-x for x in reversed(self.letters)))

    def __pow__(self, n: int) -> CyclicWord:
        base = self if n >= 0 else self.inverse()
        return CyclicWord(base.letters * abs(n))

    def __str__(self) -> str:
        return format_letters(self.letters)

    def __repr__(self) -> str:
        return f"CyclicWord({self})"


def format_letters(letters: Sequence[int]) -> str:
    if not letters:
        return "1"
    if any(abs(x) > 26 for x in letters):
        raise InputError("text syntax covers ranks up to 26")
    return "".join(_LOWER[x - 1] if x > 0 else _LOWER[-x - 1].upper() for x in letters)


def parse_word(text: str, rank: int | None = None) -> Word:
    """Parse the letter syntax ("abAB", "1" for the empty word) into a reduced Word."""
    text = text.strip()
    if text in ("1", ""):
        return Word()
    letters = []
    for ch in text:
        if ch.islower() and ch in _LOWER:
            letters.append(_LOWER.index(ch) + 1)
        elif ch.isupper() and ch.lower() in _LOWER:
            letters.append(-(_LOWER.index(ch.lower()) + 1))
        else:
            raise InputError(f"bad letter {ch!r} in word {text!r}")
    if rank is not None:
        Basis(rank).check(letters)
    return Word(tuple(letters))


def parse_words(text: str, rank: int | None = None) -> list[Word]:
    """Comma-separated list of words; an empty string gives no words."""
    return [parse_word(t, rank) for t in text.split(",") if t.strip()]


def reduce(raw: Iterable[int], basis: Basis | None = None) -> Word:
    raw = tuple(raw)
    if basis is not None:
        basis.check(raw)
    return Word(raw)


def cyclic_reduce(w: Word) -> tuple[CyclicWord, Word]:
    """Return (c, conjugator) with w = conjugator * c * conjugator^-1."""
    letters = w.letters
    n = len(letters)
    k = 0
    while n - 2 * k >= 2 and letters[k] == -letters[n - 1 - k]:
        k += 1
    return CyclicWord(letters[k:n - k]), Word(letters[:k])


def is_proper_power(w: CyclicWord) -> tuple[CyclicWord, int]:
    """Return (root, exponent) with exponent maximal and w = root**exponent."""
    letters = w.letters
    n = len(letters)
    if n == 0:
        raise InputError("the empty word has no root")
    for d in range(1, n + 1):
        if n % d == 0 and letters[:d] * (n // d) == letters:
            return CyclicWord(letters[:d]), n // d
    raise AssertionError("unreachable")


def _reads_at(letters: Sequence[int], p: int, v: Sequence[int]) -> bool:
    n = len(letters)
    return all(letters[(p + j) % n] == x for j, x in enumerate(v))


def count_occurrences(g: CyclicWord, v: Word) -> int:
    """Number n_g(v±) of cyclic positions of g at which v or v^-1 can be read.

    Reading may wind around the cycle more than once. For a proper power
    g = h^k the count is k * n_h(v±).
    """
    if not v:
        raise InputError("cannot count occurrences of the empty word")
    if not g.letters:
        return 0
    root, k = is_proper_power(g)
    fwd = v.letters
    bwd = v.inverse().letters
    h = root.letters
    hits = sum(1 for p in range(len(h)) if _reads_at(h, p, fwd) or _reads_at(h, p, bwd))
    return k * hits


def class_representative(v: Sequence[int]) -> tuple[int, ...]:
    """Shortlex-least element of {v, v^-1}."""
    v = tuple(v)
    inv = tuple(-x for x in reversed(v))
    return min(v, inv, key=shortlex_key)


def cylinder_counts(g: CyclicWord, max_len: int) -> Counter:
    """n_g(v±) for every class {v, v^-1} with 1 <= |v| <= max_len that occurs in g.

    Single pass over positions; keys are class representatives.
    """
    raw: Counter = Counter()
    letters = g.letters
    n = len(letters)
    if n == 0:
        return raw
    ext = letters * (max_len // n + 2)
    for p in range(n):
        for ell in range(1, max_len + 1):
            raw[ext[p:p + ell]] += 1
    counts: Counter = Counter()
    for v, k in raw.items():
        counts[class_representative(v)] += k
    return counts


def max_power_run(w: CyclicWord, z: CyclicWord | Word) -> int:
    """Largest |k| such that z^k is a subpath of w read cyclically.

    A run may wrap past the end of w but never overlaps itself, so
    k * |z| <= |w|.
    """
    if not isinstance(z, CyclicWord):
        z = CyclicWord(z.letters)
    m = len(z)
    if m == 0:
        raise InputError("power runs of the empty word are undefined")
    n = len(w)
    if n == 0:
        return 0
    letters = w.letters
    kmax = n // m
    best = 0
    for pattern in (z.letters, z.inverse().letters):
        hit = [_reads_at(letters, p, pattern) for p in range(n)]
        for p in range(n):
            k = 0
            while k < kmax and hit[(p + k * m) % n]:
                k += 1
            best = max(best, k)
    return best


def substitute(images: Sequence[Word], w: Word) -> Word:
    """Apply the endomorphism x_k -> images[k-1] to w and reduce."""
    out: list[int] = []
    if any(abs(x) > len(images) for x in w.letters):
        raise InputError(f"{w} uses letters beyond the {len(images)} given images")
    for x in w.letters:
        img = images[abs(x) - 1].letters
        out.extend(img if x > 0 else (-y for y in reversed(img)))
    return Word(tuple(out))


def reduced_words(rank: int, max_len: int, min_len: int = 0):
    """Yield every reduced word of length in [min_len, max_len], shortlex order."""
    letters = Basis(rank).letters()
    layer: list[tuple[int, ...]] = [()]
    for ell in range(max_len + 1):
        if ell >= min_len:
            for t in layer:
                yield Word(t)
        layer = [t + (x,) for t in layer for x in letters if not t or t[-1] != -x]

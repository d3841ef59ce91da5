"""Graph self-maps: iteration, train-track checks, escape powers and primitive elements.

Edges are numbered 1..E and edgepaths are sequences of signed edge numbers,
stored as :class:`~freerigid.words.Word` (for the rose, edge k is the basis
letter x_k, so edgepaths and words coincide).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import (
    DepthExhaustedError,
    FiniteIndexError,
    InputError,
    InsufficientDepthError,
    NotTrainTrackError,
)
from .stallings import BasedGraph, fold, index, reads_based
from .words import CyclicWord, Word, cyclic_reduce, parse_word, reduced_words

__all__ = [
    "GraphMap",
    "rose_map",
    "iterate_edge",
    "iterate_word",
    "is_train_track_up_to",
    "is_automorphism",
    "crossing_power",
    "EscapeResult",
    "escape_power",
    "build_z",
    "quasiperiodicity_profile",
    "periodic_classes",
]


@dataclass(frozen=True)
class GraphMap:
    """Self-map of a finite graph sending each edge to a nonempty edgepath.

    ``images[k-1]`` is the raw (possibly unreduced) image of edge k. The
    default graph is the rose with one vertex.
    """

    images: tuple[tuple[int, ...], ...]
    ends: tuple[tuple[int, int], ...] = ()
    num_vertices: int = 1
    vertex_images: tuple[int, ...] = ()

    def __post_init__(self):
        images = tuple(tuple(img) for img in self.images)
        object.__setattr__(self, "images", images)
        n = len(images)
        if n == 0:
            raise InputError("a graph map needs at least one edge")
        if not self.ends:
            object.__setattr__(self, "ends", ((0, 0),) * n)
        if not self.vertex_images:
            object.__setattr__(self, "vertex_images", tuple(range(self.num_vertices)) if self.num_vertices == 1
                               else self._infer_vertex_images())
        if len(self.ends) != n:
            raise InputError("one image per edge required")
        for k, img in enumerate(images, start=1):
            if not img:
                raise InputError(f"image of edge {k} is empty")
            if any(x == 0 or abs(x) > n for x in img):
                raise InputError(f"image of edge {k} uses an unknown edge")
            s, t = self.ends[k - 1]
            if self._walk(self.vertex_images[s], img) != self.vertex_images[t]:
                raise InputError(f"image of edge {k} does not respect incidence")

    def _infer_vertex_images(self) -> tuple[int, ...]:
        vim: dict[int, int] = {}
        for k, img in enumerate(self.images, start=1):
            s, t = self.ends[k - 1]
            first, last = img[0], img[-1]
            start = self.ends[first - 1][0] if first > 0 else self.ends[-first - 1][1]
            end = self.ends[last - 1][1] if last > 0 else self.ends[-last - 1][0]
            for v, w in ((s, start), (t, end)):
                if vim.setdefault(v, w) != w:
                    raise InputError(f"vertex {v} would have two images")
        if len(vim) != self.num_vertices:
            raise InputError("every vertex needs an incident edge")
        return tuple(vim[v] for v in range(self.num_vertices))

    def _walk(self, v: int, path: Sequence[int]) -> int | None:
        for x in path:
            s, t = self.ends[abs(x) - 1]
            if x > 0 and s == v:
                v = t
            elif x < 0 and t == v:
                v = s
            else:
                return None
        return v

    @property
    def num_edges(self) -> int:
        return len(self.images)

    @property
    def is_rose(self) -> bool:
        return self.num_vertices == 1

    @property
    def word_images(self) -> tuple[Word, ...]:
        return tuple(Word(img) for img in self.images)

    def apply(self, path: Sequence[int]) -> tuple[tuple[int, ...], bool]:
        """Image of an edgepath, reduced, plus whether any cancellation happened."""
        stack: list[int] = []
        cancelled = False
        images = self.images
        for x in path:
            img = images[x - 1] if x > 0 else [-y for y in reversed(images[-x - 1])]
            for y in img:
                if stack and stack[-1] == -y:
                    stack.pop()
                    cancelled = True
                else:
                    stack.append(y)
        return tuple(stack), cancelled

    def power(self, p: int) -> GraphMap:
        if p < 1:
            raise InputError("map powers start at 1")
        return GraphMap(tuple(iterate_edge(self, k, p)[0].letters for k in range(1, self.num_edges + 1)),
                        self.ends, self.num_vertices)


def rose_map(images: Sequence[Word | str]) -> GraphMap:
    """Map of the rose given by basis images, e.g. ``rose_map(["ab", "a"])``."""
    return GraphMap(tuple((parse_word(w) if isinstance(w, str) else w).letters for w in images))


def _orbit(f: GraphMap, path: Sequence[int]) -> Iterator[tuple[tuple[int, ...], bool]]:
    cur = tuple(path)
    yield cur, False
    while True:
        cur, cancelled = f.apply(cur)
        yield cur, cancelled


def iterate_edge(f: GraphMap, e: int, n: int) -> tuple[Word, bool]:
    """f^n(e) by repeated substitution, and whether any stage cancelled."""
    if n < 0:
        raise InputError("iteration count must be nonnegative")
    if e == 0 or abs(e) > f.num_edges:
        raise InputError(f"unknown edge {e}")
    return iterate_word(f, (e,), n)


def iterate_word(f: GraphMap, path: Sequence[int], n: int) -> tuple[Word, bool]:
    flag = False
    for k, (cur, cancelled) in enumerate(_orbit(f, path)):
        flag = flag or cancelled
        if k == n:
            return Word(cur), flag
    raise AssertionError("unreachable")


def is_train_track_up_to(f: GraphMap, n_max: int) -> bool:
    if n_max < 1:
        raise InputError("window must be at least 1")
    for e in range(1, f.num_edges + 1):
        for k, (cur, cancelled) in enumerate(_orbit(f, (e,))):
            if cancelled or not cur:
                return False
            if k == n_max:
                break
    return True


def is_automorphism(f: GraphMap) -> bool:
    """Images generate F_N (index-one fold); surjective endomorphisms of F_N are automorphisms."""
    if not f.is_rose:
        raise InputError("automorphism check needs a map of the rose")
    return index(fold(f.word_images, f.num_edges)) == 1


def crossing_power(f: GraphMap, limit: int = 20) -> int | None:
    """Least p <= limit such that every f^p(e) crosses every edge; None if not found."""
    everything = set(range(1, f.num_edges + 1))
    orbits = [_orbit(f, (e,)) for e in everything]
    for it in orbits:
        next(it)
    for p in range(1, limit + 1):
        current = [next(it)[0] for it in orbits]
        if all({abs(x) for x in path} == everything for path in current):
            return p
    return None


@dataclass(frozen=True)
class EscapeResult:
    """Least escape exponents: ``table[(edge, target)]``, per-edge maxima and the overall maximum."""

    table: dict = field(default_factory=dict)
    per_edge: dict = field(default_factory=dict)
    overall: int = 0


def escape_power(f: GraphMap, targets: Sequence[BasedGraph], window: int = 5, max_depth: int = 40) -> EscapeResult:
    """For each edge e and target, the least m with f^n(e) unreadable for every n in [m, m + window]."""
    if not f.is_rose:
        raise InputError("escape search reads edgepaths in subgroup graphs over the rose")
    if window < 1:
        raise InputError("confirmation window must be positive")
    for t in targets:
        if index(t.core) != math.inf:
            raise FiniteIndexError("a finite-index subgroup carries every leaf segment")
    table: dict[tuple[int, int], int] = {}
    for e in range(1, f.num_edges + 1):
        streak_start: list[int | None] = [None] * len(targets)
        done = [False] * len(targets)
        for n, (cur, cancelled) in enumerate(_orbit(f, (e,))):
            if cancelled:
                raise NotTrainTrackError(f"f^{n}(e{e}) cancels; not a train track at this depth")
            word = Word(cur)
            for i, t in enumerate(targets):
                if done[i]:
                    continue
                if reads_based(t, word):
                    streak_start[i] = None
                    continue
                if streak_start[i] is None:
                    streak_start[i] = n
                if n - streak_start[i] >= window:
                    table[(e, i)] = streak_start[i]
                    done[i] = True
            if all(done):
                break
            if n >= max_depth:
                raise DepthExhaustedError(f"no confirmed escape for edge {e} within depth {max_depth}")
    per_edge = {e: max((table[(e, i)] for i in range(len(targets))), default=0)
                for e in range(1, f.num_edges + 1)}
    return EscapeResult(table, per_edge, max(per_edge.values(), default=0))


def build_z(f: GraphMap, seed: int, m: int, edge: int | None = None, search_limit: int = 30) -> tuple[Word, int]:
    """Least n <= search_limit with f^m(edge) a subpath of z = f^n(seed); returns (z, n).

    z is primitive: it is the image of a basis letter under the automorphism f^n.
    """
    edge = seed if edge is None else edge
    segment, _ = iterate_edge(f, edge, m)
    backwards = segment.inverse()
    for n, (cur, _) in enumerate(_orbit(f, (seed,))):
        z = Word(cur)
        if z.contains_subword(segment) or z.contains_subword(backwards):
            return z, n
        if n >= search_limit:
            break
    raise DepthExhaustedError(f"f^{m}(e{edge}) not found in f^n(x{seed}) for n <= {search_limit}")


def quasiperiodicity_profile(f: GraphMap, e: int, L: int, depth: int) -> int:
    """Least L' such that every window of length L' of f^depth(e) contains every factor of length <= L.

    Raises InsufficientDepthError when only the whole segment works, since
    recurrence is then not witnessed.
    """
    if L <= 0:
        return 0
    seg = iterate_edge(f, e, depth)[0].letters
    n = len(seg)
    factors: dict[tuple[int, ...], list[int]] = {}
    for ell in range(1, L + 1):
        for p in range(n - ell + 1):
            factors.setdefault(seg[p:p + ell], []).append(p)

    def covers(width: int) -> bool:
        for u, positions in factors.items():
            # every window [s, s + width) must contain an occurrence [p, p + |u|)
            nxt = 0
            for s in range(n - width + 1):
                while nxt < len(positions) and positions[nxt] < s:
                    nxt += 1
                if nxt == len(positions) or positions[nxt] + len(u) > s + width:
                    return False
        return True

    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if covers(mid):
            hi = mid
        else:
            lo = mid + 1
    if lo >= n:
        raise InsufficientDepthError(f"segment of length {n} is too short to witness recurrence")
    return lo


def periodic_classes(f: GraphMap, max_len: int, max_period: int) -> list[CyclicWord]:
    """Cyclic words of length <= max_len whose conjugacy class f^k fixes for some k <= max_period.

    A fully irreducible map has none; this is a finite surrogate check.
    """
    if not f.is_rose:
        raise InputError("periodic class search works over the rose")
    found = []
    seen: set[CyclicWord] = set()
    for w in reduced_words(f.num_edges, max_len, min_len=1):
        c = cyclic_reduce(w)[0]
        if len(c) != len(w) or c in seen:
            continue
        seen.add(c)
        cur = c.letters
        for _ in range(max_period):
            cur = cyclic_reduce(Word(f.apply(cur)[0]))[0].letters
            if CyclicWord(cur) == c:
                found.append(c)
                break
    return found

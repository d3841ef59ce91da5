"""Stallings subgroup graphs.

A :class:`CoreGraph` is a folded graph with edges labelled by positive basis
letters. Reading the inverse letter ``-k`` traverses a ``k``-edge backwards.
Closed paths at the base spell exactly the reduced words of the subgroup.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import InputError, NotAutomorphismError
from .words import Basis, Word, cyclic_reduce, substitute

__all__ = [
    "CoreGraph",
    "BasedGraph",
    "fold",
    "contains",
    "express",
    "index",
    "reads",
    "with_basepoint",
    "reads_based",
    "invert_automorphism",
    "rebase",
    "power_bound",
    "coset_power_bound",
]

Edge = tuple[int, int, int]  # (label > 0, source, target)


@dataclass(frozen=True)
class CoreGraph:
    rank: int
    num_vertices: int
    edges: tuple[Edge, ...]
    base: int = 0
    _delta: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        Basis(self.rank)
        if not 0 <= self.base < self.num_vertices:
            raise InputError(f"base {self.base} out of range")
        delta: dict[tuple[int, int], int] = {}
        for label, s, t in self.edges:
            if not 1 <= label <= self.rank:
                raise InputError(f"edge label {label} exceeds rank {self.rank}")
            if not (0 <= s < self.num_vertices and 0 <= t < self.num_vertices):
                raise InputError(f"edge {label} {s}->{t} has an endpoint out of range")
            if (s, label) in delta or (t, -label) in delta:
                raise InputError("graph is not folded")
            delta[(s, label)] = t
            delta[(t, -label)] = s
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        object.__setattr__(self, "_delta", delta)

    def step(self, v: int, letter: int) -> int | None:
        return self._delta.get((v, letter))

    def read(self, start: int, word: Word | Sequence[int]) -> int | None:
        """Endpoint of reading ``word`` from ``start``, or None if it falls off."""
        v = start
        delta = self._delta
        for x in word:
            v = delta.get((v, x))
            if v is None:
                return None
        return v

    def degree(self, v: int) -> int:
        return sum(1 for x in range(1, self.rank + 1) for s in (x, -x) if (v, s) in self._delta)

    def canonical(self) -> CoreGraph:
        """Renumber vertices in BFS order from the base, letters in shortlex order."""
        order = {self.base: 0}
        queue = deque([self.base])
        letters = Basis(self.rank).letters()
        while queue:
            v = queue.popleft()
            for x in letters:
                w = self._delta.get((v, x))
                if w is not None and w not in order:
                    order[w] = len(order)
                    queue.append(w)
        if len(order) != self.num_vertices:
            raise InputError("graph is not connected")
        edges = tuple((lab, order[s], order[t]) for lab, s, t in self.edges)
        return CoreGraph(self.rank, self.num_vertices, edges, 0)


@dataclass(frozen=True)
class BasedGraph:
    """A core graph with a bridge to an external basepoint.

    ``graph`` is the union of core and bridge, with its base at the external
    point; ``attach`` is the core vertex where the bridge starts.
    """

    core: CoreGraph
    bridge: Word
    attach: int
    graph: CoreGraph

    @property
    def basepoint(self) -> int:
        return self.graph.base


class _Folder:
    """Mutable labelled graph that folds itself.

    With ``tags`` each edge carries a word; closed paths at the base keep the
    same tag product through every fold (gauge changes at the eliminated
    vertex). Used to express basis letters in terms of generators.
    """

    def __init__(self, rank: int, tagged: bool = False):
        self.rank = rank
        self.tagged = tagged
        self.edges: dict[int, list] = {}  # id -> [label, src, dst, tag]
        self.alive: set[int] = {0}
        self.base = 0
        self.next_vertex = 1
        self.next_edge = 0
        self.incident: dict[int, set[int]] = {0: set()}
        self.relation = False

    def new_vertex(self) -> int:
        v = self.next_vertex
        self.next_vertex += 1
        self.alive.add(v)
        self.incident[v] = set()
        return v

    def add_edge(self, label: int, s: int, t: int, tag: Word = Word()) -> None:
        eid = self.next_edge
        self.next_edge += 1
        self.edges[eid] = [label, s, t, tag]
        self.incident[s].add(eid)
        self.incident[t].add(eid)

    def add_petal(self, word: Word, tag: Word = Word()) -> None:
        """Attach a closed path spelling ``word`` at the base.

        The tag goes on the last edge, oriented so that traversal contributes it.
        """
        v = self.base
        n = len(word)
        for i, x in enumerate(word):
            last = i == n - 1
            w = self.base if last else self.new_vertex()
            t = tag if last else Word()
            if x > 0:
                self.add_edge(x, v, w, t)
            else:
                self.add_edge(-x, w, v, t.inverse())
            v = w

    def _gauge(self, x: int, g: Word) -> None:
        for eid in self.incident[x]:
            e = self.edges[eid]
            tag = e[3]
            if e[1] == x:
                tag = g * tag
            if e[2] == x:
                tag = tag * g.inverse()
            e[3] = tag

    def _remove_edge(self, eid: int) -> None:
        _, s, t, _ = self.edges.pop(eid)
        self.incident[s].discard(eid)
        self.incident[t].discard(eid)

    def _merge(self, x: int, y: int) -> None:
        """Identify vertex x into y."""
        for eid in list(self.incident[x]):
            e = self.edges[eid]
            if e[1] == x:
                e[1] = y
            if e[2] == x:
                e[2] = y
            self.incident[y].add(eid)
        del self.incident[x]
        self.alive.discard(x)

    def _find_pair(self, v: int):
        seen: dict[tuple[int, bool], int] = {}
        for eid in self.incident[v]:
            label, s, t, _ = self.edges[eid]
            for outgoing in (True, False):
                if (s if outgoing else t) != v:
                    continue
                key = (label, outgoing)
                if key in seen:
                    return seen[key], eid, outgoing
                seen[key] = eid
        return None

    def fold(self) -> None:
        work = deque(self.alive)
        while work:
            v = work.popleft()
            if v not in self.alive:
                continue
            found = self._find_pair(v)
            if found is None:
                continue
            e1, e2, outgoing = found
            far = 2 if outgoing else 1
            t1, t2 = self.edges[e1][far], self.edges[e2][far]
            if t1 == t2:
                if self.tagged and self.edges[e1][3] != self.edges[e2][3]:
                    self.relation = True
                self._remove_edge(e2)
            else:
                if t2 == self.base:
                    e1, e2, t1, t2 = e2, e1, t2, t1
                if self.tagged:
                    a, b = self.edges[e1][3], self.edges[e2][3]
                    g = a.inverse() * b if outgoing else a * b.inverse()
                    self._gauge(t2, g)
                self._remove_edge(e2)
                self._merge(t2, t1)
                work.append(t1)
            work.append(v)

    def prune(self) -> None:
        """Remove non-base vertices of degree one until none remain."""
        changed = True
        while changed:
            changed = False
            for v in list(self.alive):
                if v == self.base:
                    continue
                inc = self.incident[v]
                deg = sum(2 if self.edges[e][1] == self.edges[e][2] else 1 for e in inc)
                if deg <= 1:
                    for eid in list(inc):
                        self._remove_edge(eid)
                    del self.incident[v]
                    self.alive.discard(v)
                    changed = True

    def to_graph(self) -> CoreGraph:
        numbering = {v: i for i, v in enumerate(sorted(self.alive, key=lambda u: u != self.base))}
        edges = tuple((lab, numbering[s], numbering[t]) for lab, s, t, _ in self.edges.values())
        return CoreGraph(self.rank, len(numbering), edges, numbering[self.base]).canonical()


def fold(generators: Iterable[Word], rank: int) -> CoreGraph:
    """Folded core graph of the subgroup generated by ``generators``."""
    basis = Basis(rank)
    folder = _Folder(rank)
    for g in generators:
        basis.check(g.letters)
        folder.add_petal(g)
    folder.fold()
    folder.prune()
    return folder.to_graph()


@lru_cache(maxsize=32)
def _tagged_steps(generators: tuple[Word, ...], rank: int) -> tuple[int, dict]:
    basis = Basis(rank)
    folder = _Folder(rank, tagged=True)
    for k, g in enumerate(generators, start=1):
        basis.check(g.letters)
        if g:
            folder.add_petal(g, tag=Word((k,)))
    folder.fold()
    step: dict[tuple[int, int], tuple[int, Word]] = {}
    for label, s, t, tag in folder.edges.values():
        step[(s, label)] = (t, tag)
        step[(t, -label)] = (s, tag.inverse())
    return folder.base, step


def express(generators: Sequence[Word], w: Word, rank: int) -> Word | None:
    """Write w as a product of generators, or return None if w is not in the subgroup.

    The result is a word whose letter k stands for ``generators[k-1]``;
    substituting the generators back gives w.
    """
    base, step = _tagged_steps(tuple(generators), rank)
    v, out = base, []
    for x in w.letters:
        if (v, x) not in step:
            return None
        v, tag = step[(v, x)]
        out.extend(tag.letters)
    return Word(tuple(out)) if v == base else None


def contains(graph: CoreGraph, w: Word) -> bool:
    return graph.read(graph.base, w.letters) == graph.base


def index(graph: CoreGraph) -> int | float:
    """Index of the subgroup: vertex count when every vertex is letter-regular, else math.inf."""
    for v in range(graph.num_vertices):
        for x in range(1, graph.rank + 1):
            if graph.step(v, x) is None or graph.step(v, -x) is None:
                return math.inf
    return graph.num_vertices


def _reachable_set(graph: CoreGraph, starts: Iterable[int], letters: Sequence[int]) -> set[int]:
    current = set(starts)
    delta = graph._delta
    for x in letters:
        current = {w for v in current if (w := delta.get((v, x))) is not None}
        if not current:
            break
    return current


def reads(graph: CoreGraph, p: Word) -> bool:
    """True iff p is readable as a path from some vertex."""
    return bool(_reachable_set(graph, range(graph.num_vertices), p.letters))


def with_basepoint(graph: CoreGraph, tail: Word) -> BasedGraph:
    """Attach a path spelling ``tail`` at the base and fold.

    The readable prefix of ``tail`` folds into the core; what remains is the
    bridge. Paths from the new basepoint to the old base spell tail^-1 * H.
    """
    graph.canonical()  # connectivity check
    v = graph.base
    k = 0
    for x in tail.letters:
        w = graph.step(v, x)
        if w is None:
            break
        v, k = w, k + 1
    bridge = tail[k:]
    edges = list(graph.edges)
    n = graph.num_vertices
    cur = v
    for x in bridge.letters:
        new = n
        n += 1
        edges.append((x, cur, new) if x > 0 else (-x, new, cur))
        cur = new
    combined = CoreGraph(graph.rank, n, tuple(edges), cur)
    return BasedGraph(core=graph, bridge=bridge, attach=v, graph=combined)


def reads_based(bg: BasedGraph, p: Word) -> bool:
    return reads(bg.graph, p)


def invert_automorphism(images: Sequence[Word]) -> tuple[Word, ...]:
    """Images of the basis letters under phi^-1, where phi sends x_k to images[k-1].

    Folds the wedge of image petals while tracking which generator each loop
    came from; raises NotAutomorphismError unless the fold ends in the rose
    with no relation among the images.
    """
    rank = len(images)
    if rank == 0:
        raise InputError("an automorphism needs at least one image")
    folder = _Folder(rank, tagged=True)
    for k, img in enumerate(images, start=1):
        Basis(rank).check(img.letters)
        if not img:
            raise NotAutomorphismError(f"image of x{k} is trivial")
        folder.add_petal(img, tag=Word((k,)))
    folder.fold()
    if folder.relation or len(folder.alive) != 1 or len(folder.edges) != rank:
        raise NotAutomorphismError("images do not form a free basis")
    inverse: dict[int, Word] = {}
    for label, _, _, tag in folder.edges.values():
        inverse[label] = tag
    result = tuple(inverse[k] for k in range(1, rank + 1))
    for k in range(1, rank + 1):
        if substitute(images, result[k - 1]) != Word((k,)):
            raise AssertionError("automorphism inversion failed its own check")
    return result


def rebase(generators: Iterable[Word], phi: Sequence[Word]) -> CoreGraph:
    """Core graph of H written over the basis {phi(x_k)}: folds phi^-1 of each generator."""
    inv = invert_automorphism(phi)
    return fold((substitute(inv, h) for h in generators), len(phi))


def _reading_ends(graph: CoreGraph, word: Word) -> set[int]:
    ends = set()
    for v in range(graph.num_vertices):
        w = graph.read(v, word.letters)
        if w is not None:
            ends.add(w)
    return ends


def power_bound(graph: CoreGraph, z: Word) -> int | float:
    """Exact max k with z^k readable from some vertex; math.inf when unbounded."""
    if not z:
        raise InputError("power bound of the empty word is undefined")
    core, conj = cyclic_reduce(z)
    # [z^k] = conj * core^k * conj^-1: core-runs must start and end where conj can end
    allowed = _reading_ends(graph, conj) if conj else set(range(graph.num_vertices))
    step = {v: graph.read(v, core.letters) for v in range(graph.num_vertices)}
    best = 0
    for start in allowed:
        visited: dict[int, int] = {}
        v, k = start, 0
        while v is not None and v not in visited:
            visited[v] = k
            if v in allowed:
                best = max(best, k)
            v, k = step[v], k + 1
        if v is not None:
            cycle_start = visited[v]
            if any(u in allowed for u, j in visited.items() if j >= cycle_start):
                return math.inf
    return best


def coset_power_bound(graph: CoreGraph, tail: Word, z: Word) -> int | float:
    """Upper bound on z-runs in cyclically reduced words of the coset tail^-1 * H.

    A cyclic run splits into at most a suffix run and a prefix run of a
    readable linear representative. For a single-letter z the split falls
    between copies, so the bound is 2*M_lin; longer z may straddle the split
    with one more copy.
    """
    m_lin = power_bound(with_basepoint(graph, tail).graph, z)
    if m_lin == math.inf:
        return math.inf
    return 2 * m_lin + (0 if len(z) == 1 else 1)

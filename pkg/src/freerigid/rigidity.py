"""Property W certificates for finite unions of cosets, and witness families in normal closures."""
from __future__ import annotations

import csv
import io
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .currents import current_distance, frequency_vector
from .dynamics import GraphMap, build_z, crossing_power, escape_power, is_automorphism
from .errors import (
    ConnectorSearchError,
    DepthExhaustedError,
    FiniteIndexError,
    InputError,
    NotAutomorphismError,
    UnboundedError,
)
from .metric import MarkedMetricGraph, translation_length
from .stallings import coset_power_bound, fold, index, invert_automorphism, rebase, power_bound, with_basepoint
from .words import (
    CyclicWord,
    Word,
    cyclic_reduce,
    max_power_run,
    reduced_words,
    substitute,
)

__all__ = [
    "CosetSpec",
    "PropertyWCertificate",
    "Limits",
    "WitnessFamily",
    "find_connectors",
    "make_witness",
    "make_coset_witness",
    "ConvergenceRow",
    "convergence_report",
    "convergence_csv",
    "Distinguisher",
    "AgreeUpTo",
    "rigidity_distinguisher",
    "propw_certificate",
    "check_property_w",
    "Violation",
    "sampled_max_run",
]


@dataclass(frozen=True)
class CosetSpec:
    """The coset tail * <generators>."""

    tail: Word
    generators: tuple[Word, ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))


@dataclass(frozen=True)
class PropertyWCertificate:
    """No cyclically reduced member, written over the basis {phi(x_k)}, contains z^k with |k| > M."""

    z: Word
    phi: tuple[Word, ...]
    M: int
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        if self.z not in self.phi:
            raise InputError("z must be one of the new basis elements")

    @property
    def z_letter(self) -> int:
        """Index k with phi(x_k) = z, i.e. z written over the new basis."""
        return self.phi.index(self.z) + 1


@dataclass(frozen=True)
class Limits:
    window: int = 5
    max_depth: int = 40
    z_search_limit: int = 30
    crossing_limit: int = 20
    seed_letter: int = 1


# ---------------------------------------------------------------- witnesses

def _connector_candidates(rank: int, max_len: int) -> list[Word]:
    return list(reduced_words(rank, max_len))


def _compositions(cands: list[Word], parts: int, total: int) -> Iterator[tuple[Word, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for w in cands:
        if len(w) <= total:
            for rest in _compositions(cands, parts - 1, total - len(w)):
                yield (w,) + rest


def _pieces(u: CyclicWord, r: CyclicWord, conn: Sequence[Word], i: int, tail: Word) -> list[tuple[int, ...]]:
    alpha, beta, gamma, delta = (c.letters for c in conn)
    inv = lambda t: tuple(-x for x in reversed(t))  # noqa: E731
    up = u.letters * i
    down = inv(up)
    return [tail.letters, alpha, up, beta, r.letters, inv(beta), down, inv(alpha),
            gamma, up, delta, r.letters, inv(delta), down, inv(gamma)]


def _cancellation_free(pieces: list[tuple[int, ...]]) -> bool:
    flat = [x for p in pieces for x in p]
    if any(a == -b for a, b in zip(flat, flat[1:])):
        return False
    return len(flat) < 2 or flat[0] != -flat[-1]


def find_connectors(u: CyclicWord, r: CyclicWord, tail: Word = Word(), rank: int | None = None,
                    max_len: int = 2) -> tuple[Word, Word, Word, Word]:
    """Shortlex-least (alpha, beta, gamma, delta), each of length <= max_len, making
    tail * w_i freely and cyclically reduced as written, for every i >= 1."""
    if not u.letters or not r.letters:
        raise InputError("u and r must be nontrivial")
    letters = u.letters + r.letters + tail.letters
    rank = rank if rank is not None else max(2, max(abs(x) for x in letters))
    cands = _connector_candidates(rank, max_len)
    for total in range(4 * max_len + 1):
        for conn in _compositions(cands, 4, total):
            if _cancellation_free(_pieces(u, r, conn, 1, tail)):
                return conn
    raise ConnectorSearchError(f"no connectors of length <= {max_len} for u={u}, r={r}, tail={tail}")


@dataclass(frozen=True)
class WitnessFamily:
    """w_i = alpha u^i beta r beta^-1 u^-i alpha^-1 gamma u^i delta r delta^-1 u^-i gamma^-1,
    optionally prefixed by a coset tail g."""

    u: CyclicWord
    r: CyclicWord
    alpha: Word
    beta: Word
    gamma: Word
    delta: Word
    tail: Word = Word()

    @classmethod
    def build(cls, u: CyclicWord, r: CyclicWord, tail: Word = Word(), rank: int | None = None) -> WitnessFamily:
        return cls(u, r, *find_connectors(u, r, tail, rank), tail=tail)

    @property
    def connectors(self) -> tuple[Word, Word, Word, Word]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def word(self, i: int) -> CyclicWord:
        if i < 1:
            raise InputError("witness index starts at 1")
        pieces = _pieces(self.u, self.r, self.connectors, i, self.tail)
        if not _cancellation_free(pieces):
            raise InputError("connectors do not give a cyclically reduced witness")
        return CyclicWord(tuple(x for p in pieces for x in p))

    def conjugators(self, i: int) -> tuple[Word, Word]:
        """(c1, c2) with w_i = c1 r c1^-1 c2 r c2^-1."""
        up = Word(self.u.letters * i)
        return self.alpha * up * self.beta, self.gamma * up * self.delta

    def constant_length(self) -> int:
        """|w_i| - 4 i |u|, independent of i."""
        return len(self.tail) + 2 * len(self.r) + 2 * sum(len(c) for c in self.connectors)


def make_witness(family: WitnessFamily, i: int) -> CyclicWord:
    if family.tail:
        family = WitnessFamily.build(family.u, family.r)
    return family.word(i)


def make_coset_witness(family: WitnessFamily, i: int) -> CyclicWord:
    """[[g w_i]] for the family's tail g, with connectors chosen for the tail."""
    if not _cancellation_free(_pieces(family.u, family.r, family.connectors, 1, family.tail)):
        family = WitnessFamily.build(family.u, family.r, family.tail)
    return family.word(i)


# ---------------------------------------------------------------- convergence

@dataclass(frozen=True)
class ConvergenceRow:
    i: int
    d: Fraction
    lam: Fraction
    tree_id: str
    gap: Fraction | None


def _rows_for(args) -> list[ConvergenceRow]:
    family, window, i, trees, rank = args
    w = family.word(i)
    u = family.u
    d = current_distance(frequency_vector(w, window, rank), frequency_vector(u, window, rank))
    lam = Fraction(len(u), len(w))
    if not trees:
        return [ConvergenceRow(i, d, lam, "", None)]
    rows = []
    for tree_id, tree in trees:
        gap = abs(lam * translation_length(tree, w.word) - translation_length(tree, u.word))
        rows.append(ConvergenceRow(i, d, lam, tree_id, gap))
    return rows


def convergence_report(family: WitnessFamily, window: int, i_list: Sequence[int],
                       trees: Sequence[MarkedMetricGraph] | dict = (), jobs: int = 1,
                       rank: int | None = None) -> list[ConvergenceRow]:
    """d_i = distance between the frequency vectors of w_i and u; lambda_i = |u|/|w_i|;
    gap_i(T) = |lambda_i ||w_i||_T - ||u||_T| for each tree."""
    if window < 1:
        raise InputError("window must be at least 1")
    named = list(trees.items()) if isinstance(trees, dict) else [(f"T{k}", t) for k, t in enumerate(trees)]
    if rank is None:
        letters = family.u.letters + family.r.letters + family.tail.letters
        rank = max([2, *(abs(x) for x in letters), *(t.rank for _, t in named)])
    work = [(family, window, i, named, rank) for i in i_list]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_rows_for, work))
    else:
        chunks = [_rows_for(w) for w in work]
    return [row for chunk in chunks for row in chunk]


def _frac(x: Fraction) -> str:
    return str(x)


def convergence_csv(rows: Sequence[ConvergenceRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "d_i_num", "d_i_den", "lambda_i", "tree_id", "gap_i"])
    for row in rows:
        writer.writerow([row.i, row.d.numerator, row.d.denominator, _frac(row.lam), row.tree_id,
                         "" if row.gap is None else _frac(row.gap)])
    return buf.getvalue()


# ---------------------------------------------------------------- distinguisher

@dataclass(frozen=True)
class Distinguisher:
    word: CyclicWord
    i: int
    u: CyclicWord
    family: WitnessFamily
    length_1: Fraction
    length_2: Fraction


@dataclass(frozen=True)
class AgreeUpTo:
    i_max: int
    u_search_length: int


def rigidity_distinguisher(t1: MarkedMetricGraph, t2: MarkedMetricGraph, r: Word, i_max: int = 50,
                           u_search_length: int = 4) -> Distinguisher | AgreeUpTo:
    """Find an element of the normal closure of r on which the two trees disagree."""
    if not r:
        raise InputError("r must be nontrivial")
    if t1.rank != t2.rank:
        raise InputError("trees are marked by free groups of different rank")
    rank = t1.rank
    rc = cyclic_reduce(r)[0]
    seen: set[CyclicWord] = set()
    for w in reduced_words(rank, u_search_length, min_len=1):
        if not w.is_cyclically_reduced():
            continue
        u = CyclicWord(w.letters)
        if u in seen:
            continue
        seen.add(u)
        if translation_length(t1, w) == translation_length(t2, w):
            continue
        family = WitnessFamily.build(u, rc, rank=rank)
        for i in range(1, i_max + 1):
            wi = family.word(i)
            l1, l2 = translation_length(t1, wi.word), translation_length(t2, wi.word)
            if l1 != l2:
                return Distinguisher(wi, i, u, family, l1, l2)
    return AgreeUpTo(i_max, u_search_length)


# ---------------------------------------------------------------- property W

def _identity(rank: int) -> tuple[Word, ...]:
    return tuple(Word((k,)) for k in range(1, rank + 1))


def propw_certificate(cosets: Sequence[CosetSpec], f: GraphMap, limits: Limits = Limits()) -> PropertyWCertificate:
    """Certify Property W for the union of cosets using the fully irreducible fixture f."""
    if not f.is_rose:
        raise InputError("the fixture must be a map of the rose")
    if not is_automorphism(f):
        raise NotAutomorphismError("fixture does not induce an automorphism")
    rank = f.num_edges
    graphs = []
    for c in cosets:
        g = fold(c.generators, rank)
        if index(g) != math.inf:
            raise FiniteIndexError(f"subgroup generated by {', '.join(map(str, c.generators)) or '1'} "
                                   f"has finite index {index(g)}")
        graphs.append(g)
    p = crossing_power(f, limits.crossing_limit)
    if p is None:
        raise DepthExhaustedError(f"no power <= {limits.crossing_limit} of f crosses every edge")
    # basepoint b with paths b -> base spelling tail * h
    targets = [with_basepoint(g, c.tail.inverse()) for g, c in zip(graphs, cosets)]
    esc = escape_power(f, targets, limits.window, limits.max_depth)
    seed = limits.seed_letter
    z, n = build_z(f, seed, esc.overall, edge=seed, search_limit=limits.z_search_limit)
    phi = f.power(n).word_images if n > 0 else _identity(rank)
    inv = invert_automorphism(phi)
    z_new = Word((seed,))
    linear, bounds = [], []
    for c in cosets:
        g_new = rebase(c.generators, phi)
        tail_new = substitute(inv, c.tail)
        m_lin = power_bound(with_basepoint(g_new, tail_new.inverse()).graph, z_new)
        bound = coset_power_bound(g_new, tail_new.inverse(), z_new)
        if bound == math.inf:
            raise UnboundedError(f"z-runs are unbounded in coset {c.tail} <{', '.join(map(str, c.generators))}>")
        linear.append(m_lin)
        bounds.append(bound)
    M = max([1, *bounds])
    provenance = {
        "map": " ".join(str(w) for w in f.word_images),
        "crossing_power": p,
        "escape": " ".join(f"e{e}:{m}" for e, m in sorted(esc.per_edge.items())),
        "escape_overall": esc.overall,
        "seed_letter": seed,
        "z_exponent": n,
        "linear_bounds": " ".join(map(str, linear)),
        "coset_bounds": " ".join(map(str, bounds)),
    }
    return PropertyWCertificate(z, phi, M, provenance)


@dataclass(frozen=True)
class Violation:
    coset: int
    h: Word
    cyclic_word: CyclicWord
    run: int


def check_property_w(cosets: Sequence[CosetSpec], cert: PropertyWCertificate, samples: int = 1000,
                     max_len: int = 40, seed: int = 0) -> tuple[bool, list[Violation]]:
    """Sample members g*h of each coset, rewrite over the certificate basis, and compare z-runs to M.

    ``samples`` is per coset; h ranges over random generator products whose
    length over the new basis is at most ``max_len``.
    """
    rng = random.Random(seed)
    inv = invert_automorphism(cert.phi)
    z_new = CyclicWord((cert.z_letter,))
    violations: list[Violation] = []
    for ci, c in enumerate(cosets):
        gens = [substitute(inv, h) for h in c.generators]
        steps = gens + [h.inverse() for h in gens]
        tail_new = substitute(inv, c.tail)
        for _ in range(samples):
            h = Word()
            if steps:
                for _ in range(rng.randint(0, max_len)):
                    cand = h * rng.choice(steps)
                    if len(cand) > max_len:
                        break
                    h = cand
            cw = cyclic_reduce(tail_new * h)[0]
            if not cw.letters:
                continue
            run = max_power_run(cw, z_new)
            if run > cert.M:
                violations.append(Violation(ci, substitute(cert.phi, h), cw, run))
    return not violations, violations


def sampled_max_run(cosets: Sequence[CosetSpec], cert: PropertyWCertificate, samples: int, max_len: int,
                    seed: int = 0) -> int:
    """Largest z-run seen in the same samples that check_property_w draws."""
    probe = PropertyWCertificate(cert.z, cert.phi, -1)
    _, found = check_property_w(cosets, probe, samples, max_len, seed)
    return max((v.run for v in found), default=0)

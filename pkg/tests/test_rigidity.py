import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from freerigid.dynamics import rose_map
from freerigid.errors import ConnectorSearchError, FiniteIndexError, InputError, NotAutomorphismError
from freerigid.metric import rose, scale
from freerigid.rigidity import (
    AgreeUpTo,
    CosetSpec,
    Distinguisher,
    PropertyWCertificate,
    WitnessFamily,
    check_property_w,
    convergence_csv,
    convergence_report,
    find_connectors,
    make_coset_witness,
    make_witness,
    propw_certificate,
    rigidity_distinguisher,
    sampled_max_run,
)
from freerigid.stallings import fold, invert_automorphism
from freerigid.words import CyclicWord, Word, cyclic_reduce, max_power_run, parse_word, parse_words, substitute

from oracles import brute_reduce, strip_ends

C = CyclicWord.of
W = parse_word
FIB = rose_map(["ab", "a"])
COSETS = [CosetSpec(Word(), tuple(parse_words("a,baB"))), CosetSpec(W("b"), (W("a"),))]

cyclic = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=4).map(
    lambda t: cyclic_reduce(Word(tuple(t)))[0]).filter(lambda c: len(c) > 0)


def _is_cyclically_reduced_raw(letters):
    return brute_reduce(letters) == tuple(letters) and strip_ends(letters)[1] == ()


@pytest.mark.parametrize("u, r, expected", [
    ("a", "b", ("1", "1", "b", "1")),
    ("b", "a", ("1", "1", "a", "1")),
    ("ab", "ab", ("1", "a", "b", "a")),
])
def test_find_connectors_examples(u, r, expected):
    conn = find_connectors(C(u), C(r))
    assert tuple(str(c) for c in conn) == expected


def test_connector_search_failure_is_reported():
    with pytest.raises(ConnectorSearchError):
        find_connectors(C("a"), C("a"), rank=1)
    with pytest.raises(InputError):
        find_connectors(CyclicWord(), C("a"))


def test_witness_examples():
    fam = WitnessFamily.build(C("a"), C("b"))
    assert str(make_witness(fam, 1)) == "abAbabAB"
    assert len(make_witness(fam, 9)) == 40
    assert str(make_witness(fam, 2)) == "aabAAbaabAAB"
    with pytest.raises(InputError):
        fam.word(0)


def test_coset_witness_example():
    fam = WitnessFamily.build(C("a"), C("b"), tail=W("b"))
    w = make_coset_witness(fam, 1)
    assert str(w) == "babABabAb" and len(w) == 9
    assert _is_cyclically_reduced_raw(w.letters)
    # rebuilt connectors when the family lacks a tail-compatible choice
    plain = WitnessFamily.build(C("a"), C("b"))
    tailed = WitnessFamily(plain.u, plain.r, *plain.connectors, tail=W("b"))
    assert make_coset_witness(tailed, 1) == w


@given(cyclic, cyclic, st.integers(min_value=1, max_value=12))
@settings(max_examples=80, deadline=None)
def test_witness_is_product_of_two_conjugates(u, r, i):
    fam = WitnessFamily.build(u, r, rank=2)
    w = fam.word(i)
    c1, c2 = fam.conjugators(i)
    assert r.word.conjugate(c1) * r.word.conjugate(c2) == w.word
    assert _is_cyclically_reduced_raw(w.letters)
    assert len(w) == 4 * i * len(u) + fam.constant_length()


@given(cyclic, cyclic, st.sampled_from(["b", "A", "ab", "aB"]))
@settings(max_examples=40, deadline=None)
def test_coset_witness_cyclically_reduced(u, r, g):
    fam = WitnessFamily.build(u, r, tail=W(g), rank=2)
    for i in (1, 3):
        w = make_coset_witness(fam, i)
        assert _is_cyclically_reduced_raw(w.letters)
        assert w.word == W(g) * fam.conjugators(i)[0] * fam.r.word * fam.conjugators(i)[0].inverse() \
            * fam.conjugators(i)[1] * fam.r.word * fam.conjugators(i)[1].inverse()


@pytest.mark.parametrize("i", [1, 9, 99])
def test_convergence_closed_forms(i):
    fam = WitnessFamily.build(C("a"), C("b"))
    (row,) = convergence_report(fam, 1, [i], [rose([1, 2])])
    assert row.d == Fraction(1, i + 1)
    assert row.lam == Fraction(1, 4 * i + 4)
    assert row.gap == Fraction(1, i + 1)
    assert row.tree_id == "T0"


def test_convergence_csv_and_jobs():
    fam = WitnessFamily.build(C("a"), C("b"))
    trees = {"unit": rose([1, 1]), "skew": rose([1, 2])}
    rows = convergence_report(fam, 2, [1, 2, 3], trees)
    assert convergence_report(fam, 2, [1, 2, 3], trees, jobs=2) == rows
    lines = convergence_csv(rows).splitlines()
    assert lines[0] == "i,d_i_num,d_i_den,lambda_i,tree_id,gap_i"
    assert lines[1].startswith("1,") and ",unit," in lines[1]
    assert len(lines) == 1 + 6
    bare = convergence_report(fam, 1, [9], [])
    assert convergence_csv(bare).splitlines()[1] == "9,1,10,1/40,,"


def test_distinguisher_examples():
    res = rigidity_distinguisher(rose([1, 1]), rose([1, 2]), W("a"))
    assert isinstance(res, Distinguisher)
    assert (str(res.u), res.i, str(res.word)) == ("b", 1, "baBabaBA")
    assert (res.length_1, res.length_2) == (8, 12)
    t = rose([Fraction(3, 2), 1])
    same = rigidity_distinguisher(t, t, W("a"), i_max=3, u_search_length=2)
    assert same == AgreeUpTo(3, 2)
    res = rigidity_distinguisher(t, scale(t, 2), W("a"))
    assert (str(res.u), res.i) == ("a", 1)
    assert res.length_2 == 2 * res.length_1
    with pytest.raises(InputError):
        rigidity_distinguisher(t, t, Word())


def test_certificate_pipeline():
    cert = propw_certificate(COSETS, FIB)
    assert cert.M == 2
    assert str(cert.z) == "abaababa"
    assert [str(w) for w in cert.phi] == ["abaababa", "abaab"]
    assert cert.z_letter == 1
    assert cert.provenance["escape_overall"] == 4
    assert cert.provenance["crossing_power"] == 2
    single = propw_certificate(COSETS[:1], FIB)
    assert single.provenance["escape"] == "e1:3 e2:4"
    assert math.isfinite(propw_certificate(COSETS[1:], FIB).M)


def test_certificate_basis_contains_z():
    cert = propw_certificate(COSETS, FIB)
    inv = invert_automorphism(cert.phi)
    assert substitute(inv, cert.z) == Word((cert.z_letter,))
    with pytest.raises(InputError):
        PropertyWCertificate(W("ab"), tuple(parse_words("a,b")), 1)


def test_certificate_refusals():
    with pytest.raises(FiniteIndexError):
        propw_certificate(COSETS + [CosetSpec(Word(), tuple(parse_words("a,b")))], FIB)
    with pytest.raises(FiniteIndexError):
        propw_certificate([CosetSpec(Word(), tuple(parse_words("a,bb,baB")))], FIB)
    with pytest.raises(NotAutomorphismError):
        propw_certificate(COSETS, rose_map(["ab", "ba"]))


def test_check_property_w():
    cert = propw_certificate(COSETS, FIB)
    ok, violations = check_property_w(COSETS, cert, samples=500, max_len=40, seed=3)
    assert ok and violations == []
    assert check_property_w([], cert) == (True, [])


def test_check_property_w_catches_lowered_bound():
    cert = propw_certificate(COSETS, FIB)
    worst = sampled_max_run(COSETS, cert, 500, 40, seed=3)
    assert 1 <= worst <= cert.M
    lowered = PropertyWCertificate(cert.z, cert.phi, worst - 1)
    ok, violations = check_property_w(COSETS, lowered, samples=500, max_len=40, seed=3)
    assert not ok
    v = violations[0]
    assert v.run == worst
    # the reported h is a genuine member of its subgroup
    assert fold(COSETS[v.coset].generators, 2).read(0, v.h.letters) == 0


def test_coset_runs_against_bound_directly():
    # b<a> over the new basis: members b a^k have cyclic z-runs bounded by M
    cert = propw_certificate(COSETS[1:], FIB)
    inv = invert_automorphism(cert.phi)
    for k in range(-8, 9):
        c = cyclic_reduce(substitute(inv, W("b") * W("a") ** k))[0]
        if c.letters:
            assert max_power_run(c, Word((cert.z_letter,))) <= cert.M

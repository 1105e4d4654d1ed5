import pytest
from hypothesis import given, strategies as st

from artifact.catalog import build_A, build_CE
from artifact.exactalg import ZZ, Zmod
from artifact.freedga import (
    DGAError, DegreeError, Generator, NCPoly, SemifreeDGA, apply_substitution, check_d_squared,
    elementary_automorphism, gen_key, parse_key, stabilize,
)


def _terms(A, key):
    return sorted((tuple(w), c) for w, c in A.canonical_terms(A.d[key]))


def test_keys_round_trip():
    assert gen_key("y", (1, 3)) == "y[1,3]"
    assert parse_key("c'[2,1]") == ("c'", (2, 1))


def test_a31_differentials_by_hand():
    A = build_A(3)
    assert A.format(A.d["x[1]"]) == "0"
    assert _terms(A, "x[2]") == [(("x[1]", "x[1]"), 1)]
    assert _terms(A, "x[3]") == [((), -1), (("x[1]", "x[2]"), 1), (("x[2]", "x[1]"), 1)]
    assert _terms(A, "y[1,1]") == [((), 1), (("y[1,2]", "x[1]"), 1), (("y[1,3]", "x[2]"), 1)]
    assert _terms(A, "y[2,1]") == [(("x[1]", "y[1,1]"), 1), (("y[2,2]", "x[1]"), 1), (("y[2,3]", "x[2]"), 1)]


def test_broken_differential_is_reported():
    ring = ZZ
    gens = [Generator("x", (1,), 1, 0), Generator("x", (2,), 0, 1)]
    d = {"x[1]": NCPoly.zero(ring), "x[2]": NCPoly.gen(ring, "x[1]") * 2}
    ok = SemifreeDGA("Z2", ring, gens, d)
    assert check_d_squared(ok).passed
    d_bad = {"x[1]": NCPoly.one(ring), "x[2]": NCPoly.gen(ring, "x[1]")}
    gens_bad = [Generator("x", (1,), 1, 0), Generator("x", (2,), 0, 1)]
    report = check_d_squared(SemifreeDGA("Z2", ring, gens_bad, d_bad))
    assert not report.passed


def test_json_round_trip_and_malformed_input():
    A = build_CE(3)
    assert SemifreeDGA.from_json(A.to_json()).to_json() == A.to_json()
    with pytest.raises(DGAError):
        SemifreeDGA.from_json({"generators": []})


def test_stabilize_adds_an_acyclic_pair():
    A = build_A(3)
    B = stabilize(A, [(Generator("s", (1,), 0, 0), Generator("t", (1,), 1, 0))])
    assert len(B.keys) == len(A.keys) + 2
    assert B.format(B.d["s[1]"]) == "t[1]"
    assert check_d_squared(B).passed
    with pytest.raises(DegreeError):
        stabilize(A, [(Generator("s", (1,), 0, 0), Generator("t", (1,), 0, 0))])


def _tails(A, target):
    """Words of length ≤ 2 in generators ranked below ``target`` with the right degree."""
    deg = A.degree_of(target)
    below = [k for k in A.keys if A.rank_of(k) < A.rank_of(target)]
    words = [(k,) for k in below] + [(a, b) for a in below for b in below]
    return [w for w in words if A.reduce_degree(A.word_degree(w)) == A.reduce_degree(deg)]


@given(st.data(), st.sampled_from([ZZ, Zmod(3)]))
def test_elementary_automorphisms_preserve_d_squared(data, ring):
    A = build_CE(3, ring)
    target = data.draw(st.sampled_from(A.keys))
    words = _tails(A, target)
    chosen = data.draw(st.lists(st.sampled_from(words), max_size=3)) if words else []
    tail = NCPoly.zero(ring)
    for w in chosen:
        tail = tail + NCPoly.word(ring, list(w), data.draw(st.integers(-2, 2)))
    sub = elementary_automorphism(A, target, 1, tail)
    B = apply_substitution(A, sub)
    assert check_d_squared(B).passed
    inv = sub.inverse_images()
    assert set(inv) == set(A.keys)


def test_non_invertible_assignment_is_rejected():
    A = build_A(3)
    images = {k: NCPoly.gen(A.ring, k) for k in A.keys}
    images["x[2]"] = NCPoly.gen(A.ring, "x[1]") * NCPoly.gen(A.ring, "x[1]")
    with pytest.raises(DGAError):
        apply_substitution(A, images)

import pytest
from hypothesis import given, strategies as st

from artifact import quiver
from artifact.complexes import homology
from artifact.exactalg import QQ, Zmod
from artifact.generators import rng_from_seed
from artifact.suites import random_quiver_object

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(3, 5)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_coxeter_sends_injectives_to_shifted_projectives(n):
    for i in range(1, n):
        C = quiver.coxeter(quiver.injective(n, i, QQ, "Z"))
        ranks = [{e: g.rank for e, g in homology(X).items() if g.rank} for X in C.complexes]
        assert ranks == [{-1: 1} if v >= i else {} for v in range(1, n)]


@pytest.mark.parametrize("n", [3, 4, 6])
def test_injective_projective_witnesses(n):
    assert all(w.verify() for w in quiver.injective_projective_check(n, Zmod(2)))


def test_wrong_maps_are_rejected():
    I = quiver.injective(3, 1, QQ)
    with pytest.raises(quiver.QuiverError):
        quiver.QuiverObject(I.complexes, [])


@given(sizes, seeds)
def test_coxeter_power_witnesses(n, seed):
    A = random_quiver_object(Zmod(2), n, rng_from_seed(seed))
    for k in range(1, n + 1):
        assert quiver.coxeter_power_witness(A, k).verify()


@given(sizes, seeds)
def test_full_turn_returns_the_object(n, seed):
    A = random_quiver_object(Zmod(2), n, rng_from_seed(seed))
    _, W = quiver.coxeter_power_chain(A, n)
    assert W.verify() and W.morphism.target == A


@given(st.integers(3, 4), seeds)
def test_full_turn_shifts_by_two_in_integer_grading(n, seed):
    B = random_quiver_object(Zmod(2), n, rng_from_seed(seed), "Z")
    _, W = quiver.coxeter_power_chain(B, n)
    assert W.verify() and W.morphism.target == B.shift(2)


@given(sizes, seeds)
def test_morphism_differential_squares_to_zero(n, seed):
    rng = rng_from_seed(seed)
    A = random_quiver_object(Zmod(3), n, rng)
    B = random_quiver_object(Zmod(3), n, rng)
    for mu in quiver.closed_quiver_morphisms(A, B)[:3]:
        assert mu.is_closed()
    mu = quiver.random_closed_quiver_morphism(A, B, rng)
    assert mu.is_closed()
    assert quiver.coxeter(mu).is_closed()


@given(sizes, seeds)
def test_json_round_trip(n, seed):
    A = random_quiver_object(QQ, n, rng_from_seed(seed))
    B = quiver.QuiverObject.from_json(A.to_json())
    assert B == quiver.normalized(A)  # the JSON lists each basis by degree
    assert B.to_json() == A.to_json()

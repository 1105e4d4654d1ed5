from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.exactalg import (
    QQ, ZZ, DimensionError, ExactMatrix, RingError, Zmod, inverse, invariant_factors, nullspace, rank,
    ring_from_json, ring_from_name, smith_normal_form, solve,
)
from artifact.generators import random_invertible, random_matrix, rng_from_seed

RINGS = [ZZ, QQ, Zmod(2), Zmod(3), Zmod(7)]
seeds = st.integers(0, 2**32 - 1)
rings = st.sampled_from(RINGS)
fields = st.sampled_from([QQ, Zmod(2), Zmod(3), Zmod(7)])


# hand-computed values

def test_smith_normal_form_of_small_integer_matrix():
    M = ExactMatrix(ZZ, [[2, 4], [6, 8]])
    D, U, V = smith_normal_form(M)
    assert D.to_lists() == [[2, 0], [0, 4]]
    assert U @ M @ V == D
    assert invariant_factors(M) == [2, 4]


def test_rational_inverse():
    Mi = inverse(ExactMatrix(QQ, [[1, 2], [3, 4]]))
    assert Mi.to_lists() == [[-2, 1], [Fraction(3, 2), Fraction(-1, 2)]]


def test_mod_two_arithmetic():
    F = Zmod(2)
    M = ExactMatrix(F, [[1, 1], [1, 1]])
    assert (M @ M).is_zero()
    assert (M + M).is_zero()
    assert rank(M) == 1
    assert Zmod(5).inv(2) == 3


def test_solve_over_q():
    x = solve(ExactMatrix(QQ, [[2, 0], [0, 4]]), ExactMatrix(QQ, [[1], [1]]))
    assert x.to_lists() == [[Fraction(1, 2)], [Fraction(1, 4)]]


def test_shape_errors():
    with pytest.raises(DimensionError):
        ExactMatrix(ZZ, [[1, 2], [3]])
    with pytest.raises(DimensionError):
        ExactMatrix(ZZ, [[1, 2]]) @ ExactMatrix(ZZ, [[1, 2]])


def test_ring_names():
    assert ring_from_name("Z/5") == Zmod(5)
    assert ring_from_name("Q") is QQ
    with pytest.raises((RingError, ValueError)):
        ring_from_name("nonsense")


# properties

@given(rings, seeds)
def test_matrix_product_is_associative_and_distributive(ring, seed):
    rng = rng_from_seed(seed)
    A, B, C = (random_matrix(ring, 3, 3, rng) for _ in range(3))
    assert (A @ B) @ C == A @ (B @ C)
    assert A @ (B + C) == A @ B + A @ C


@given(fields, seeds, st.integers(1, 5), st.integers(1, 5))
def test_rank_nullity(ring, seed, rows, cols):
    M = random_matrix(ring, rows, cols, rng_from_seed(seed))
    K = nullspace(M)
    assert rank(M) + K.shape[1] == cols
    assert (M @ K).is_zero()


@given(fields, seeds, st.integers(1, 5))
def test_inverse_of_random_invertible(ring, seed, n):
    T = random_invertible(ring, n, rng_from_seed(seed))
    assert (inverse(T) @ T).is_identity()


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_smith_normal_form_is_diagonal_with_divisibility(seed, rows, cols):
    M = random_matrix(ZZ, rows, cols, rng_from_seed(seed))
    D, U, V = smith_normal_form(M)
    assert U @ M @ V == D
    diag = [D.to_lists()[i][i] for i in range(min(rows, cols))]
    assert all(D.to_lists()[i][j] == 0 for i in range(rows) for j in range(cols) if i != j)
    nonzero = [abs(x) for x in diag if x != 0]
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))


@given(rings, seeds)
def test_json_round_trip(ring, seed):
    M = random_matrix(ring, 2, 3, rng_from_seed(seed))
    assert ExactMatrix.from_json(M.to_json()) == M
    assert ring_from_json(ring.to_json()) == ring

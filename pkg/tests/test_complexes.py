from hypothesis import given, strategies as st

from artifact import complexes
from artifact.complexes import GradedComplex, cone, homology, is_acyclic, is_homotopy_equivalence, null_homotopy, shift
from artifact.exactalg import QQ, ZZ, ExactMatrix, Zmod
from artifact.generators import random_chain, random_closed_map, random_complex, random_contractible, rng_from_seed
from artifact.suites import random_square

seeds = st.integers(0, 2**32 - 1)
fields = st.sampled_from([QQ, Zmod(2), Zmod(3)])


def test_multiplication_by_two_has_two_torsion():
    X = GradedComplex(ZZ, [0, 1], ExactMatrix(ZZ, [[0, 0], [2, 0]]), "Z")
    H = homology(X)
    assert H[0].rank == 0 and H[0].torsion == ()
    assert H[1].rank == 0 and H[1].torsion == (2,)


def test_same_complex_over_f2_has_homology_in_both_degrees():
    F = Zmod(2)
    X = GradedComplex(F, [0, 1], ExactMatrix(F, [[0, 0], [2, 0]]), "Z")
    H = homology(X)
    assert (H[0].rank, H[1].rank) == (1, 1)


def test_shift_and_cone_degrees():
    X = GradedComplex(ZZ, [0, 1], ExactMatrix(ZZ, [[0, 0], [1, 0]]), "Z")
    assert shift(X).degrees == (-1, 0)
    assert cone(X.identity()).degrees == (-1, 0, 0, 1)


@given(st.sampled_from([ZZ, QQ, Zmod(2)]), seeds)
def test_cone_of_identity_is_acyclic(ring, seed):
    X = random_complex(ring, rng_from_seed(seed))
    assert is_acyclic(cone(X.identity()))
    assert all(g.rank == 0 and not g.torsion for g in homology(cone(X.identity())).values())


@given(fields, seeds)
def test_cone_differential_squares_to_zero(ring, seed):
    (a,) = random_chain(ring, 1, rng_from_seed(seed))
    C = cone(a)
    assert (C.d @ C.d).is_zero()


@given(fields, seeds)
def test_random_closed_maps_are_closed(ring, seed):
    rng = rng_from_seed(seed)
    X, Y = random_complex(ring, rng), random_complex(ring, rng)
    for k in (0, 1):
        assert random_closed_map(X, Y, rng, k).is_closed()


@given(fields, seeds)
def test_contractible_has_null_homotopic_identity(ring, seed):
    C, alpha = random_contractible(ring, rng_from_seed(seed))
    assert alpha.differential().matrix.is_identity()
    h = null_homotopy(C.identity())
    assert h is not None and h.differential().matrix.is_identity()


@given(fields, seeds)
def test_identity_is_a_homotopy_equivalence(ring, seed):
    X = random_complex(ring, rng_from_seed(seed))
    w = is_homotopy_equivalence(X.identity())
    assert w is not None and w.verify()


@given(fields, seeds)
def test_eta_and_rotation_witnesses(ring, seed):
    a1, a2 = random_chain(ring, 2, rng_from_seed(seed))
    for w in (*complexes.eta_cone_exact(a1), *complexes.eta_cone_triple(a1, a2), complexes.cone_rotation(a1, a2)):
        assert w.verify()
        assert (w.forward @ w.backward).matrix.is_identity()


@given(st.sampled_from([QQ, Zmod(2)]), seeds)
def test_nine_lemma_conjugates_the_cone_differentials(ring, seed):
    f1, h1, f2, a1, b1 = random_square(ring, rng_from_seed(seed))
    assert (f2 @ a1 - b1 @ f1) == h1.differential()
    w, left, right = complexes.nine_lemma_witness(f1, h1, f2, a1, b1)
    P, Q = w.forward.matrix, w.backward.matrix
    assert P @ left.d == right.d @ P
    assert (P @ Q).is_identity() and (Q @ P).is_identity()


@given(st.sampled_from([Zmod(2), Zmod(7)]), seeds)
def test_xi_lemmas(ring, seed):
    rng = rng_from_seed(seed)
    (a1,) = random_chain(ring, 1, rng)
    C, alpha = random_contractible(ring, rng)
    x = random_closed_map(a1.source, C, rng)
    y = random_closed_map(C, a1.target, rng)
    xi1, _ = complexes.xi_zero_lemmas(x, alpha=alpha)
    _, xi2 = complexes.xi_zero_lemmas(y, b1=y, beta=alpha)
    assert xi1.verify() and xi2.verify()


@given(st.sampled_from([ZZ, QQ, Zmod(2)]), st.sampled_from(["Z", "Z2"]), seeds)
def test_json_round_trip(ring, grading, seed):
    X = random_complex(ring, rng_from_seed(seed), grading)
    Y = GradedComplex.from_json(X.to_json())
    assert Y == X.permuted(sorted(range(X.dim), key=lambda i: X.degrees[i]))

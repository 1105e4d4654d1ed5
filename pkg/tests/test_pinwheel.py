import pytest
from hypothesis import given, strategies as st

from artifact import pinwheel
from artifact.complexes import GradedComplex
from artifact.exactalg import ExactMatrix, Zmod
from artifact.generators import random_matrix

F2 = Zmod(2)
seeds = st.integers(0, 2**32 - 1)
ps = st.integers(3, 5)


def _m(rows):
    return ExactMatrix(F2, rows)


# A₁ = F₂e ⊕ F₂o with e even and o odd.
ZERO, ID = _m([[0, 0], [0, 0]]), _m([[1, 0], [0, 1]])
H = _m([[0, 1], [0, 0]])  # o ↦ e
K = _m([[0, 0], [1, 0]])  # e ↦ o


def _complex(d):
    return GradedComplex(F2, [0, 1], d, "Z2")


def test_hand_built_monodromy_is_identity():
    obj = pinwheel.SimplifiedObject(_complex(ZERO), [H, K])
    assert pinwheel.monodromy_closed(obj).m == ID  # KH + HK
    assert pinwheel.monodromy_composed(obj.embed()).m == ID


def test_hand_built_pinwheel_object():
    # de = o, so d_End(H) = KH + HK = id and f³ = g^{ii} = H satisfy every relation
    g = {(i, j): H if i == j else ZERO for i in range(1, 4) for j in range(1, 4)}
    good = pinwheel.PinwheelObject(_complex(K), [ZERO, ZERO, H], g)
    report = pinwheel.validate_pinwheel(good)
    assert report.ok and report.catalog_consistent
    bad = pinwheel.PinwheelObject(_complex(ZERO), [ZERO, ZERO, H], g)
    assert not pinwheel.validate_pinwheel(bad).ok
    assert ("f", 3) in pinwheel.validate_pinwheel(bad).failures


def test_simplified_object_relations_are_enforced():
    with pytest.raises(pinwheel.PinwheelError):
        pinwheel.SimplifiedObject(_complex(ZERO), [_m([[0, 1], [1, 0]]), ZERO])  # d f² = 0 but f¹f¹ = id


def test_sphere_fixture():
    pinwheel.sphere_object(_complex(ZERO), _m([[0, 1], [1, 0]]))
    with pytest.raises(pinwheel.PinwheelError):
        pinwheel.sphere_object(_complex(K), H)  # dH = id ≠ 0


def test_search_on_rank_zero_has_one_object():
    assert len(pinwheel.brute_force_search(3, (0, 0)).solutions) == 1


@pytest.mark.slow
def test_search_matches_the_independent_validator():
    res = pinwheel.brute_force_search(3, (1, 1))
    assert set(res.solutions) == pinwheel.accepted_set(3, (1, 1))
    assert pinwheel.orbit_invariant(res.solutions, 3, (1, 1))


def test_search_encoding_round_trip():
    res = pinwheel.brute_force_search(3, (1, 1))
    for sol in res.solutions[:50]:
        obj = pinwheel.decode_solution(3, (1, 1), sol)
        assert pinwheel.encode_object(obj) == tuple(sol)
        assert pinwheel.validate_pinwheel(obj).ok


@given(ps, seeds)
def test_closed_and_composed_monodromy_agree(p, seed):
    obj = pinwheel.random_simplified_object(p, F2, seed)
    assert pinwheel.monodromy_closed(obj).m == pinwheel.monodromy_composed(obj.embed()).m


@given(ps, st.sampled_from([F2, Zmod(3)]), seeds)
def test_embedding_is_a_valid_circle_pair(p, ring, seed):
    obj = pinwheel.random_simplified_object(p, ring, seed)
    assert obj.embed().is_valid


@given(st.integers(3, 4), seeds)
def test_simplification_audit_trail(p, seed):
    pair = pinwheel.random_circle_pair(p, F2, seed)
    s = pinwheel.simplify_full(pair)
    assert s.verify() == []
    assert s.result.p == p


@given(st.sampled_from([F2, Zmod(3), Zmod(7)]), seeds, st.integers(1, 5))
def test_two_hbar_recursions_agree(ring, seed, length):
    rng = pinwheel.np.random.default_rng(seed)
    hs = [random_matrix(ring, 3, 2, rng) for _ in range(length)]
    abar = random_matrix(ring, 2, 3, rng)
    assert pinwheel.hbar_sequence(hs, abar) == pinwheel.hbar_sequence_right(hs, abar)


@given(ps, seeds, st.integers(0, 1))
def test_reduced_morphism_monodromy_commutes_with_d(p, seed, k):
    rng = pinwheel.np.random.default_rng(seed)
    A = pinwheel.random_simplified_object(p, F2, rng)
    B = pinwheel.random_simplified_object(p, F2, rng)
    mu = pinwheel.random_reduced_morphism(A, B, rng, k)
    assert pinwheel.monodromy_morphism(mu.differential()) == pinwheel.monodromy_morphism(mu).differential()
    assert mu.differential().differential().is_zero()


@given(seeds)
def test_attach_disk_produces_a_pinwheel_object(seed):
    obj = pinwheel.random_pinwheel_object(3, F2, seed)
    report = pinwheel.validate_pinwheel(obj)
    assert report.ok and report.catalog_consistent


@given(seeds, st.integers(0, 1))
def test_pinwheel_morphism_differential_squares_to_zero(seed, k):
    rng = pinwheel.np.random.default_rng(seed)
    A = pinwheel.random_pinwheel_object(3, F2, rng)
    B = pinwheel.random_pinwheel_object(3, F2, rng)
    mu = pinwheel.random_pinwheel_morphism(A, B, rng, k)
    assert mu.differential().differential().is_zero()


@given(seeds)
def test_corrected_composition_is_leibniz(seed):
    rng = pinwheel.np.random.default_rng(seed)
    A, B, C = (pinwheel.random_pinwheel_object(3, F2, rng) for _ in range(3))
    m1 = pinwheel.random_pinwheel_morphism(A, B, rng, 0)
    m2 = pinwheel.random_pinwheel_morphism(B, C, rng, 1)
    lhs = m2.compose_corrected(m1).differential()
    rhs = m2.differential().compose_corrected(m1) - m2.compose_corrected(m1.differential())
    assert lhs == rhs


def test_json_round_trips():
    obj = pinwheel.random_simplified_object(4, F2, 11)
    assert pinwheel.SimplifiedObject.from_json(obj.to_json()).to_json() == obj.to_json()
    pair = pinwheel.random_circle_pair(3, F2, 11)
    assert pinwheel.CirclePair.from_json(pair.to_json()).to_json() == pair.to_json()
    w = pinwheel.random_pinwheel_object(3, F2, 11)
    assert pinwheel.PinwheelObject.from_json(w.to_json()) == w

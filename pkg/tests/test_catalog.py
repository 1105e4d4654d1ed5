import pytest

from artifact import catalog
from artifact.exactalg import Zmod
from artifact.freedga import check_d_squared, is_valid_tame_ordering


@pytest.mark.parametrize("p", [3, 4, 5])
def test_generator_counts(p):
    assert len(catalog.build_A(p).keys) == p + p * p
    # b_ij and c_ij for i > j, a_i, and p² generators c'_ij
    assert len(catalog.build_CE(p).keys) == 2 * (p * (p - 1) // 2) + p + p * p


@pytest.mark.parametrize("p", [3, 4, 5])
@pytest.mark.parametrize("build", [catalog.build_CE, catalog.build_A, catalog.build_B])
def test_d_squared(p, build):
    assert check_d_squared(build(p)).passed
    assert check_d_squared(build(p, Zmod(2))).passed


def test_ce_low_degree_differentials():
    ce = catalog.build_CE(3)
    assert ce.format(ce.d["a[1]"]) == "0"
    assert ce.format(ce.d["c[3,1]"]) == "c[3,2]*c[2,1]"


@pytest.mark.parametrize("p", [3, 4])
def test_transformed_differentials(p):
    report = catalog.verify_transformed_differentials(p)
    assert report.passed
    assert all(report.family_passed(f) for f in catalog.B_FAMILIES)


@pytest.mark.parametrize("p", [3, 4])
def test_stabilization(p):
    assert catalog.verify_stabilization(p)


def test_beta_recursion():
    assert all(r.is_zero() for r in catalog.beta_table(4).recursion_residuals().values())


def test_ordering_is_tame_only_forwards():
    ce = catalog.build_CE(3)
    order = catalog.five_rule_ordering(3)
    sub = catalog.change_of_variables(3)
    assert sorted(order) == sorted(ce.keys)
    assert is_valid_tame_ordering(ce, order, sub)
    assert not is_valid_tame_ordering(ce, order[::-1], sub)


def test_factorization_reproduces_the_change_of_variables():
    assert catalog.factorization_reproduces(3)

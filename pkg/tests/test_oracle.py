from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fpp import oracle
from fpp.errors import DomainError, OracleSizeError
from fpp.lattice import Edge, Region
from fpp.shortest_path import Explicit, passage_time
from fpp.validation import SMALL_CYLINDER
from fpp.weights import Dirac, TwoPoint, Uniform, WeightField


def test_single_edge_region():
    region = Region.box((0, 1), (0, 0))
    assert oracle.brute_force_passage({Edge((0, 0), 1): 0.7}, (0, 0), (1, 0), region) == 0.7


def test_dirac_three_by_three():
    assert oracle.brute_force_passage(WeightField(Dirac(1.25), 0), (0, 0), (2, 0), Region.box((0, 2), (0, 2))) == 2.5


def test_unreachable_is_infinite():
    region = Region.box((0, 1), (0, 0))
    assert oracle.brute_force_passage({Edge((0, 0), 1): float("inf")}, (0, 0), (1, 0), region) == float("inf")


def test_exact_arithmetic_with_fractions():
    region = Region.box((0, 1), (0, 1))
    w = {Edge((0, 0), 1): Fraction(1, 3), Edge((0, 0), 2): Fraction(1, 10),
         Edge((0, 1), 1): Fraction(1, 10), Edge((1, 0), 2): Fraction(1, 10)}
    assert oracle.brute_force_passage(w, (0, 0), (1, 0), region) == Fraction(3, 10)


def test_size_caps():
    with pytest.raises(OracleSizeError):
        oracle.brute_force_passage(WeightField(Dirac(1.0), 0), (0, 0), (1, 0), Region.box((0, 4), (0, 3)))
    with pytest.raises(OracleSizeError):
        oracle.exact_expectation(TwoPoint(1.0, 2.0, 0.5), (0, 0), (1, 0), Region.box((0, 3), (0, 3)))
    with pytest.raises(OracleSizeError):
        oracle.brute_force_passage(WeightField(Dirac(1.0), 0), (0, 0), (1, 0), Region.cylinder(1, 2))


def test_exact_expectation_needs_finite_support():
    with pytest.raises(DomainError):
        oracle.exact_expectation(Uniform(1.0, 2.0), (0, 0), (1, 0), Region.box((0, 1), (0, 0)))


def test_dirac_expectation():
    res = oracle.exact_expectation(Dirac(0.5), (0, 0), (2, 1), Region.box((0, 2), (0, 1)))
    assert res.value == Fraction(3, 2) and res.configurations == 1


@pytest.mark.parametrize("eps, p", [(0.01, 0.3), (0.001, 0.05), (0.5, 0.5)])
def test_single_edge_expectation(eps, p):
    res = oracle.exact_expectation(TwoPoint(eps, 1.0, p), (0, 0), (1, 0), Region.box((0, 1), (0, 0)))
    p_, e_ = Fraction(repr(p)), Fraction(repr(eps))
    assert res.value == e_ * (1 - p_) + p_
    assert res.configurations == 2


def test_truncated_cylinder_configuration_count():
    res = oracle.exact_expectation(TwoPoint(0.01, 1.0, 0.3), (0, 0), (1, 0), SMALL_CYLINDER)
    assert res.configurations == 2**7
    assert 0.01 <= res.value <= 1


@pytest.mark.parametrize("spec", [TwoPoint(0.01, 1.0, 0.3), TwoPoint(1.0, 2.0, 0.5)], ids=repr)
def test_expectation_decreases_as_region_grows(spec):
    chain = [Region.box((0, 1), (0, 0)), Region.box((0, 1), (0, 1)), Region.box((0, 1), (-1, 1)),
             Region.box((0, 1), (-1, 2))]
    values = [oracle.exact_expectation(spec, (0, 0), (1, 0), r).value for r in chain]
    assert all(x >= y for x, y in zip(values, values[1:]))


def test_reference_dijkstra_agrees_with_enumeration():
    region = Region.box((0, 3), (0, 3))
    for r in range(20):
        field = WeightField(Uniform(0.0, 1.0), 8, r)
        full = oracle.brute_force_from(field, (0, 0), region)
        for b, value in full.items():
            assert oracle.reference_passage(field, (0, 0), b, region) == pytest.approx(value, abs=1e-12)


@given(st.integers(0, 2**32), st.integers(0, 1000))
def test_all_pairs_matches_engine(seed, rep):
    region = Region.box((0, 2), (0, 3))
    field = WeightField(TwoPoint(1.0, 2.0, 0.5), seed, rep)
    for (a, b), value in oracle.brute_force_all(field, region).items():
        assert passage_time(field, a, b, Explicit(region)).value == value

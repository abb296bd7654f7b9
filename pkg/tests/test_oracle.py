import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from softef1.core import Allocation, Instance, component_balance_check, is_ef1, violation_count
from softef1.generators import cliques, gnp, star
from softef1.oracle import (
    OracleLimitError,
    enumerate_allocations,
    enumerate_assignment_extremes,
    is_ef1_bruteforce,
    min_violations_ef1,
)

from strategies import instances


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_star_minimum_is_one(n):
    count, witness = min_violations_ef1(star(n))
    assert count == 1
    assert is_ef1_bruteforce(star(n), witness)


def test_edgeless_minimum_zero():
    assert min_violations_ef1(gnp(3, 6, 0.0, seed=1))[0] == 0


def test_two_agents_triangle():
    inst = Instance(((1, 1, 1),) * 2, ((0, 1), (0, 2), (1, 2)))
    count, witness = min_violations_ef1(inst)
    assert count == 1 and violation_count(inst, witness) == 1


def test_weighted_minimum_is_fraction():
    inst = Instance(((1, 1, 1),) * 2, ((0, 1), (0, 2), (1, 2)), (Fraction(1, 2), Fraction(3), Fraction(2)))
    assert min_violations_ef1(inst)[0] == Fraction(1, 2)


def test_first_witness_in_enumeration_order():
    # everything is EF1 with zero values, so the first allocation wins
    inst = Instance(((0, 0, 0),) * 2, ())
    assert min_violations_ef1(inst)[1].owner == (0, 0, 0)


def test_size_limit():
    with pytest.raises(OracleLimitError, match="oracle size limit"):
        min_violations_ef1(gnp(3, 15, 0.1, seed=1))


def test_enumeration_order_and_coverage():
    inst = gnp(3, 4, 0.5, seed=2)
    owners = np.concatenate([o for o, _, _ in enumerate_allocations(inst, chunk=7)])
    assert len(owners) == 81
    assert [tuple(r) for r in owners] == list(itertools.product(range(3), repeat=4))


@given(instances(min_n=1, max_n=3, max_m=5))
def test_vectorised_matches_python(inst):
    for owners, viol, ef1 in enumerate_allocations(inst):
        for row, v, e in zip(owners, viol, ef1):
            alloc = Allocation(inst.n, tuple(int(a) for a in row))
            assert bool(e) == is_ef1_bruteforce(inst, alloc) == is_ef1(inst, alloc)
            assert Fraction(int(v), inst.weight_scale) == violation_count(inst, alloc)


@given(instances(min_n=2, max_n=3, max_m=5, weighted=True))
def test_minimum_matches_python_loop(inst):
    best = min(
        violation_count(inst, a)
        for a in (Allocation(inst.n, o) for o in itertools.product(range(inst.n), repeat=inst.m))
        if is_ef1_bruteforce(inst, a)
    )
    assert min_violations_ef1(inst)[0] == best


class TestExtremes:
    def test_zeros(self):
        assert enumerate_assignment_extremes([[0] * 3] * 3) == (0, 0, 0)

    def test_constant_rows(self):
        z = [[4] * 3, [1] * 3, [2] * 3]
        assert enumerate_assignment_extremes(z) == (7, 7, 7)

    def test_identity_like(self):
        assert enumerate_assignment_extremes([[1, 0], [0, 1]]) == (0, 2, 1)

    def test_too_many_rows(self):
        with pytest.raises(ValueError):
            enumerate_assignment_extremes([[0] * 9] * 9)

    @given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)))
    def test_mean_closed_form(self, z):
        _, _, mean = enumerate_assignment_extremes(z)
        assert mean == Fraction(sum(map(sum, z)), len(z))


@pytest.mark.parametrize("sizes", [(3, 3), (4, 2), (5,), (2, 2, 2), (6, 3)])
def test_low_violation_allocations_are_component_balanced(sizes):
    inst = cliques(3, sizes)
    budget = Fraction(inst.num_edges, 3)
    for owners, viol, _ in enumerate_allocations(inst):
        for row in owners[viol <= budget]:
            assert component_balance_check(inst, Allocation(3, tuple(int(a) for a in row)))

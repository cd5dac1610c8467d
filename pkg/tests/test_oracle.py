from itertools import combinations
from math import comb

import pytest
from hypothesis import given, settings

from convex_secretary.core import CostFunction, FractionalSet, single_dim
from convex_secretary.errors import ConfigError
from convex_secretary.matroid import Matroid
from convex_secretary.oracle import MAX_N, brute_force_fractional, brute_force_opt

from conftest import SQ, multi, multi_instances, single_instances


def naive_opt(inst, m):
    best = 0
    for r in range(inst.n + 1):
        for S in combinations(inst.ids, r):
            if m.is_independent(S):
                best = max(best, inst.profit(S))
    return best


class TestBruteForce:
    def test_instance_a(self, inst_a):
        r = brute_force_opt(inst_a)
        assert r.best_profit == 10 and r.best_set == {1, 2} and r.enumerated == 16

    def test_negative_single(self):
        r = brute_force_opt(single_dim([(0, 3)], SQ))
        assert r.best_set == frozenset() and r.best_profit == 0

    def test_uniform_one(self, inst_a):
        m = Matroid.uniform(inst_a.ids, 1)
        r = brute_force_opt(inst_a, m)
        assert r.best_set == {1} and r.best_profit == 9

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_enumeration_count(self, k):
        inst = single_dim([(i, 1) for i in range(6)], SQ)
        r = brute_force_opt(inst, Matroid.uniform(inst.ids, k))
        assert r.enumerated == sum(comb(6, j) for j in range(k + 1))

    def test_refuses_large(self):
        inst = single_dim([(1, 1)] * (MAX_N + 1), SQ)
        with pytest.raises(ConfigError):
            brute_force_opt(inst)

    def test_big_numbers_fall_back(self):
        inst = single_dim([(10**19, 1), (10**19, 2)], CostFunction.power(3))
        assert brute_force_opt(inst).best_profit == naive_opt(inst, inst.feasibility)

    @settings(max_examples=60, deadline=None)
    @given(single_instances(max_n=7))
    def test_matches_naive_single(self, inst):
        assert brute_force_opt(inst).best_profit == naive_opt(inst, inst.feasibility)

    @settings(max_examples=40, deadline=None)
    @given(multi_instances(max_n=5))
    def test_matches_naive_multi(self, inst):
        m = Matroid.uniform(inst.ids, 2)
        assert brute_force_opt(inst, m).best_profit == naive_opt(inst, m)

    @settings(max_examples=40, deadline=None)
    @given(multi_instances(max_n=6))
    def test_multi_opt_has_few_fractional(self, inst):
        O = brute_force_opt(inst).best_set
        assert len(O - inst.integral_ids) <= inst.dims


class TestFractionalOracle:
    def test_instance_a(self, inst_a):
        assert brute_force_fractional(inst_a)[1] == pytest.approx(10.5)

    def test_empty(self):
        fs, p = brute_force_fractional(single_dim([], SQ))
        assert p == 0 and fs == FractionalSet({})

    def test_multi_refused(self):
        with pytest.raises(ConfigError):
            brute_force_fractional(multi([(4, (1, 1)), (0, (3, 3))]))

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convex_secretary.constrained import (
    G_gamma,
    H_gamma,
    decompose,
    is_bounded,
    offline_matroid,
    run_matroid,
)
from convex_secretary.core import Line, single_dim
from convex_secretary.harness import ExperimentConfig, audit_trace, estimate_cr, generate_instance
from convex_secretary.matroid import Matroid
from convex_secretary.offline import fractional_opt, greedy_offline
from convex_secretary.oracle import brute_force_opt
from convex_secretary.trace import THRESHOLD

from conftest import SQ, instance_a, matroids_for, single_instances


class TestDecompose:
    def test_example(self, inst_a):
        d = decompose(inst_a, [1, 2], Fraction(9, 2))
        assert (d.h, d.g) == (Fraction(11, 2), Fraction(9, 2))
        assert d.h + d.g == inst_a.profit([1, 2]) == 10

    def test_empty(self, inst_a):
        d = decompose(inst_a, [], 3)
        assert (d.h, d.g) == (0, 0)

    def test_gamma_zero(self, inst_a):
        d = decompose(inst_a, [1, 3], 0)
        assert d.h == 14 and d.g == -4

    @given(single_instances(min_n=1), st.fractions(0, 30), st.data())
    def test_identity(self, inst, gamma, data):
        A = data.draw(st.sets(st.sampled_from(inst.ids)))
        d = decompose(inst, A, gamma)
        assert d.h + d.g == inst.profit(A)

    @settings(max_examples=150)
    @given(single_instances(min_n=1), st.fractions(0, 20), st.data())
    def test_bounded_sets_dominate_both_parts(self, inst, gamma, data):
        A = data.draw(st.sets(st.sampled_from(inst.ids)))
        w = is_bounded(inst, A, gamma)
        if w.ok:
            d = decompose(inst, A, gamma)
            p = inst.profit(A)
            assert p >= d.h and p >= d.g

    @given(st.sampled_from([SQ]), st.fractions(0, 40), st.data())
    def test_g_monotone_below_cap(self, C, gamma, data):
        cap = C.inverse_marginal(gamma)
        if cap == 0:
            return
        t = data.draw(st.integers(0, cap))
        s = data.draw(st.integers(0, t))
        assert gamma * s - C.total(s) <= gamma * t - C.total(t)

    @settings(max_examples=150, deadline=None)
    @given(single_instances(min_n=1, max_n=8))
    def test_s_star_within_cap(self, inst):
        f = fractional_opt(inst)
        line = Line.of(inst)
        for e in f.fractions:
            assert f.s_star <= inst.costs[0].inverse_marginal(line.rho[e])


class TestHG:
    def test_h_example(self, inst_a):
        m = Matroid.uniform(inst_a.ids, 2)
        H = H_gamma(inst_a, m, None, 4)
        assert H == {1, 2}
        assert decompose(inst_a, H, 4).h == 7

    def test_h_above_everything(self, inst_a):
        assert H_gamma(inst_a, None, None, 11) == frozenset()

    def test_h_free_gamma_zero(self, inst_a):
        assert H_gamma(inst_a, None, None, 0) == {1, 2, 3, 4}

    def test_g_example(self, inst_a):
        m = Matroid.uniform(inst_a.ids, 2)
        G = G_gamma(inst_a, m, None, 4)
        assert G == {1, 2} and sum(inst_a[e].size for e in G) == 3

    def test_g_empty(self, inst_a):
        assert G_gamma(inst_a, None, None, 10) == frozenset()

    def test_g_uniform_one(self, inst_a):
        m = Matroid.uniform(inst_a.ids, 1)
        assert G_gamma(inst_a, m, None, Fraction(3, 2)) == {2}


class TestOfflineMatroid:
    def test_free_matches_unconstrained(self, inst_a):
        assert offline_matroid(inst_a).profit == greedy_offline(inst_a).profit == 10

    def test_uniform_one(self):
        inst = instance_a(Matroid.uniform([1, 2, 3, 4], 1))
        r = offline_matroid(inst)
        assert r.chosen == {1} and r.profit == 9

    def test_empty(self):
        r = offline_matroid(single_dim([], SQ))
        assert r.chosen == frozenset() and r.profit == 0

    @settings(max_examples=150, deadline=None)
    @given(single_instances(min_n=1, max_n=9), st.data())
    def test_four_approximation(self, inst, data):
        m = data.draw(matroids_for(inst.ids))
        inst = inst.with_feasibility(m)
        r = offline_matroid(inst)
        assert m.is_independent(r.chosen)
        assert r.profit == inst.profit(r.chosen)
        assert 4 * r.profit >= brute_force_opt(inst).best_profit


class TestOnline:
    def test_deterministic_replay(self):
        inst = instance_a(Matroid.uniform([1, 2, 3, 4], 2))
        a = run_matroid(inst, None, [2, 4, 1, 3], np.random.default_rng(9))
        b = run_matroid(inst, None, [2, 4, 1, 3], np.random.default_rng(9))
        assert a == b and a.profit >= 0

    def test_sample_holds_everything(self):
        # when every high-density element lands in the sample only low ones remain
        inst = instance_a(Matroid.uniform([1, 2, 3, 4], 2))
        for seed in range(40):
            tr = run_matroid(inst, None, [1, 2, 3, 4], np.random.default_rng(seed))
            if tr.branch == THRESHOLD and tr.k == 4:
                assert tr.accepted == []

    @settings(max_examples=60, deadline=None)
    @given(single_instances(min_n=1, max_n=9), st.data(), st.integers(0, 2**32))
    def test_invariants(self, inst, data, seed):
        m = data.draw(matroids_for(inst.ids))
        inst = inst.with_feasibility(m)
        stream = data.draw(st.permutations(inst.ids))
        tr = run_matroid(inst, None, stream, np.random.default_rng(seed))
        audit_trace(ExperimentConfig("4", inst), stream, tr)
        line = Line.of(inst)
        if tr.branch == THRESHOLD:
            assert all(e in inst.integral_ids and line.rho[e] >= tr.tau for e in tr.accepted)

    def test_random_instance_competitive(self):
        inst = generate_instance({"family": "uniform", "n": 40, "vmax": 60, "smax": 3, "seed": 4,
                                  "matroid": {"kind": "uniform", "k": 4}})
        s = estimate_cr(ExperimentConfig("4", inst, trials=2000, seed=1))
        assert s["oracle_kind"] == "upper-bound"
        # even against an upper bound on the optimum the ratio stays small
        assert 0 < s["mean_profit"] and s["empirical_cr"] <= 200

    def test_bare_line_needs_guard(self, inst_a):
        from convex_secretary.errors import ConfigError
        with pytest.raises(ConfigError):
            run_matroid(Line.of(inst_a), Matroid.free(inst_a.ids), [1, 2], np.random.default_rng(0))

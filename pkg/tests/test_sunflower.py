import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covnet.errors import GraphError, ShapeError
from covnet.generate import GeneratorSpec, generate_instance
from covnet.graph import Instance, load_cost
from covnet.oracle import exact_coverage_optimum, exact_steiner_tree
from covnet.sunflower import solve_sunflower, sunflower_cost, sunflower_lower_bound

from conftest import make


def small_sunflowers(count, seed0=0):
    for s in range(seed0, seed0 + count):
        rng = random.Random(s)
        n = rng.randint(4, 8)
        m = rng.randint(n - 1, min(12, n * (n - 1) // 2))
        yield generate_instance(GeneratorSpec("sunflower", n=n, m=m, g=rng.randint(1, 3), seed=s))


def reweighted(inst, weights):
    return Instance.build(inst.graph, [(grp.terminals, grp.demand) for grp in inst.groups], weights)


class TestExamples:
    def test_path_two_petals(self, path3):
        inst = make(3, [(0, 1, 1), (1, 2, 1)], [([0, 1], ["0", "1"]), ([1, 2], ["0", "2"])])
        res = solve_sunflower(inst, "oracle")
        assert res.core == {"0"} and res.petals == ({"1"}, {"2"})
        assert res.cost == 4 == res.lower_bound == exact_coverage_optimum(inst)[1]
        assert res.ratio == 1

    @pytest.mark.filterwarnings("ignore:terminal sets do not cover")
    def test_single_group_is_steiner_tree(self, cycle4):
        inst = make(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)], [([0, 2], ["a", "b"])], {"a": 3})
        res = solve_sunflower(inst, "oracle")
        assert res.core == {"a", "b"} and res.petals == (frozenset(),)
        assert res.cost == 4 * exact_steiner_tree(inst.graph, [0, 2])[1] == 8

    def test_empty_core(self):
        inst = make(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)], [([0, 1], ["a"]), ([2, 3], ["b"])], {"b": 2})
        res = solve_sunflower(inst, "oracle")
        assert res.core == frozenset() and res.cost == 3

    def test_cost_formula_matches_load(self):
        for inst in small_sunflowers(30):
            res = solve_sunflower(inst, None)
            assert res.cost == load_cost(inst, res.routing)
            assert res.cost == sunflower_cost(inst, res.trees, res.core, res.petals)


class TestBounds:
    def test_oracle_bound_below_optimum(self):
        for inst in small_sunflowers(40):
            _, opt = exact_coverage_optimum(inst)
            res = solve_sunflower(inst, "oracle")
            assert res.lower_bound <= opt <= res.cost <= res.ratio_bound * opt

    def test_relaxed_bound_below_oracle_bound(self):
        for inst in small_sunflowers(40, 100):
            assert sunflower_lower_bound(inst, "relaxed") <= sunflower_lower_bound(inst, "oracle")

    def test_unknown_mode(self, path3):
        inst = make(3, [(0, 1, 1), (1, 2, 1)], [([0, 1], ["a"])])
        with pytest.raises(ValueError):
            sunflower_lower_bound(inst, "guess")

    def test_larger_instances_relaxed(self):
        for seed in range(10):
            inst = generate_instance(GeneratorSpec("sunflower", n=40, m=80, g=8, seed=seed, group_size=6))
            res = solve_sunflower(inst, "relaxed")
            assert res.lower_bound <= res.cost
            assert res.ratio <= res.ratio_bound


class TestOblivious:
    def test_spanner_ignores_packets(self):
        for inst in small_sunflowers(20, 200):
            base = solve_sunflower(inst, None)
            heavy = reweighted(inst, {p: Fraction(7) for p in inst.packets})
            other = solve_sunflower(heavy, None)
            assert base.spanner.h == other.spanner.h and base.trees == other.trees

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000), w=st.fractions(min_value=0, max_value=5, max_denominator=4))
    def test_cost_monotone_in_weights(self, seed, w):
        inst = next(small_sunflowers(1, seed))
        p = sorted(inst.packets)[0]
        lighter = solve_sunflower(inst, None)
        heavier = solve_sunflower(reweighted(inst, {**inst.packets, p: inst.packets[p] + w}), None)
        assert heavier.cost >= lighter.cost


class TestRejects:
    def test_not_sunflower(self):
        inst = make(3, [(0, 1, 1), (1, 2, 1)], [([0, 1], ["a", "b"]), ([1, 2], ["b", "c"]), ([0, 2], ["c", "d"])])
        with pytest.raises(ShapeError):
            solve_sunflower(inst)

    def test_weighted_graph(self):
        inst = make(2, [(0, 1, 2)], [([0, 1], ["a"])])
        with pytest.raises(GraphError):
            solve_sunflower(inst)

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covnet.errors import GraphError, InfeasibleError, InstanceError, InvalidSolutionError
from covnet.graph import (
    Graph,
    RoutingSolution,
    as_rational,
    classify_demands,
    laminar_cost,
    load_cost,
    mst,
    steiner_mst_heuristic,
    subdivide_edges,
)
from covnet.oracle import exact_steiner_tree, minimal_trees

from conftest import brute_steiner, make


class TestGraphBuild:
    def test_parallel_edges_collapse_to_cheapest(self):
        g = Graph.build(2, [(0, 1, 3), (1, 0, "2"), (0, 1, "5/2")])
        assert g.edges == ((0, 1, Fraction(2)),)

    def test_self_loop_rejected(self):
        with pytest.raises(InstanceError, match="self-loop"):
            Graph.build(2, [(1, 1, 1)])

    def test_negative_cost_rejected(self):
        with pytest.raises(InstanceError):
            Graph.build(2, [(0, 1, -1)])

    def test_float_costs_refused(self):
        with pytest.raises(InstanceError):
            as_rational(0.5)

    def test_rational_strings(self):
        assert as_rational("3/4") == Fraction(3, 4)
        assert as_rational(" 7 ") == 7

    def test_group_needs_two_terminals(self):
        with pytest.raises(InstanceError, match="at least 2"):
            make(2, [(0, 1, 1)], [([0], ["p"])])

    def test_empty_demand_rejected(self):
        with pytest.raises(InstanceError, match="empty demand"):
            make(2, [(0, 1, 1)], [([0, 1], [])])


class TestLoadCost:
    def test_single_edge(self):
        inst = make(2, [(0, 1, 1)], [([0, 1], ["p"])])
        assert load_cost(inst, RoutingSolution((frozenset({(0, 1)}),))) == 1

    def _path_instance(self, weights=None):
        return make(3, [(0, 1, 1), (1, 2, 1)], [([0, 1], ["a", "b"]), ([0, 2], ["a", "c"])], weights)

    def test_path_two_groups(self):
        inst = self._path_instance()
        sol = RoutingSolution((frozenset({(0, 1)}), frozenset({(0, 1), (1, 2)})))
        assert load_cost(inst, sol) == 5

    def test_path_enumerated_assignments(self):
        # on a path every group has exactly one tree, so 5 is the only achievable value
        inst = self._path_instance()
        t1 = minimal_trees(inst.graph, [0, 1])
        t2 = minimal_trees(inst.graph, [0, 2])
        assert len(t1) == len(t2) == 1

    def test_weighted_packets(self):
        inst = self._path_instance({"a": 2})
        sol = RoutingSolution((frozenset({(0, 1)}), frozenset({(0, 1), (1, 2)})))
        assert load_cost(inst, sol) == (2 + 1 + 1) + (2 + 1)

    def test_tree_missing_terminal(self):
        inst = self._path_instance()
        sol = RoutingSolution((frozenset({(0, 1)}), frozenset({(0, 1)})))
        with pytest.raises(InvalidSolutionError, match="group 1"):
            load_cost(inst, sol)

    def test_cycle_is_not_a_tree(self, cycle4):
        inst = make(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)], [([0, 2], ["p"])])
        sol = RoutingSolution((frozenset({(0, 1), (1, 2), (2, 3), (0, 3)}),))
        with pytest.raises(InvalidSolutionError, match="not a tree"):
            load_cost(inst, sol)


class TestLaminarCost:
    def test_single_demand(self):
        inst = make(2, [(0, 1, 1)], [([0, 1], ["p", "q"])])
        assert laminar_cost(inst, {frozenset({"p", "q"}): [(0, 1)]}) == 2

    def test_nested(self):
        inst = make(3, [(0, 1, 1), (1, 2, 2)],
                    [([0, 1], ["a", "b"]), ([1, 2], ["a"])])
        forests = {frozenset({"a", "b"}): [(0, 1)], frozenset({"a"}): [(1, 2)]}
        assert laminar_cost(inst, forests) == 2 * 1 + 1 * 2

    def test_disconnected_group(self):
        inst = make(3, [(0, 1, 1), (1, 2, 1)], [([0, 2], ["a"])])
        with pytest.raises(InvalidSolutionError, match="group 0"):
            laminar_cost(inst, {frozenset({"a"}): [(0, 1)]})

    def test_small_demand_may_use_bigger_forest(self):
        inst = make(3, [(0, 1, 1), (1, 2, 1)], [([0, 2], ["a", "b"]), ([0, 2], ["a"])])
        forests = {frozenset({"a", "b"}): [(0, 1), (1, 2)], frozenset({"a"}): []}
        assert laminar_cost(inst, forests, check_routing=True) == 4


class TestMst:
    def test_triangle(self):
        g = Graph.build(3, [(0, 1, 1), (1, 2, 1), (0, 2, 2)])
        assert mst(g) == {(0, 1), (1, 2)}

    def test_tree_input(self, star3):
        assert mst(star3) == {(0, 1), (0, 2), (0, 3)}

    def test_four_cycle_tie_break(self, cycle4):
        # the four spanning trees each drop one edge; the tie-break drops the largest pair (2, 3)
        assert mst(cycle4) == {(0, 1), (0, 3), (1, 2)}

    def test_disconnected(self):
        g = Graph.build(4, [(0, 1, 1), (2, 3, 1)])
        with pytest.raises(GraphError, match=r"\[2, 3\]"):
            mst(g)


class TestSteinerHeuristic:
    def test_adjacent_pair(self):
        g = Graph.build(3, [(0, 1, 5), (0, 2, 1), (1, 2, 1)])
        assert steiner_mst_heuristic(g, [0, 1]) == {(0, 2), (1, 2)}

    def test_star_leaves(self, star3):
        tree = steiner_mst_heuristic(star3, [1, 2, 3])
        assert star3.edge_cost(tree) == 3 == brute_steiner(star3, [1, 2, 3])

    def test_opposite_corners(self, cycle4):
        tree = steiner_mst_heuristic(cycle4, [0, 2])
        assert len(tree) == 2 and cycle4.edge_cost(tree) == 2

    def test_disconnected(self):
        g = Graph.build(4, [(0, 1, 1), (2, 3, 1)])
        with pytest.raises(InfeasibleError):
            steiner_mst_heuristic(g, [0, 3])

    def test_within_twice_optimum(self):
        rng = random.Random(7)
        for _ in range(60):
            n = rng.randint(3, 9)
            edges = {(i, rng.randrange(i)) for i in range(1, n)}
            for _ in range(rng.randint(0, n)):
                u, v = rng.sample(range(n), 2)
                edges.add((u, v))
            g = Graph.build(n, [(u, v, rng.randint(1, 6)) for u, v in edges])
            x = rng.sample(range(n), rng.randint(2, min(n, 8)))
            heur = g.edge_cost(steiner_mst_heuristic(g, x))
            _, exact = exact_steiner_tree(g, x)
            assert exact <= heur <= 2 * exact


class TestSubdivide:
    def test_unit_graph_unchanged(self, path3):
        assert subdivide_edges(path3) == path3

    def test_single_long_edge(self):
        g = subdivide_edges(Graph.build(2, [(0, 1, 3)]))
        assert g.n == 4 and g.m == 3 and g.is_unit()

    def test_total_preserved(self):
        g = Graph.build(3, [(0, 1, 1), (1, 2, 2)])
        sub = subdivide_edges(g)
        assert sub.m == 3 and sub.edge_cost(sub.cost) == 3

    def test_non_integer_refused(self):
        with pytest.raises(GraphError, match="scale"):
            subdivide_edges(Graph.build(2, [(0, 1, "1/2")]))

    def test_preserves_steiner_cost(self):
        rng = random.Random(11)
        for _ in range(30):
            n = rng.randint(3, 6)
            edges = {(i, rng.randrange(i)) for i in range(1, n)}
            edges.add(tuple(rng.sample(range(n), 2)))
            g = Graph.build(n, [(u, v, rng.randint(1, 3)) for u, v in edges])
            x = rng.sample(range(n), rng.randint(2, n))
            assert exact_steiner_tree(subdivide_edges(g), x)[1] == brute_steiner(g, x)


class TestClassify:
    def _inst(self, demands):
        return make(2, [(0, 1, 1)], [([0, 1], d) for d in demands])

    def test_intro_nested(self):
        shape = classify_demands(self._inst([["1"], ["2"], ["1", "2"]]))
        assert shape.tag == "laminar" and shape.laminar and not shape.sunflower

    def test_sunflower_core(self):
        shape = classify_demands(self._inst([["0", "1"], ["0", "2"], ["0", "3"]]))
        assert shape.tag == "sunflower"
        assert shape.core == {"0"}
        assert shape.petals == ({"1"}, {"2"}, {"3"})

    def test_general(self):
        assert classify_demands(self._inst([["1", "2"], ["2", "3"], ["1", "3"]])).tag == "general"

    def test_disjoint_is_both(self):
        shape = classify_demands(self._inst([["1"], ["2"]]))
        assert shape.laminar and shape.sunflower and shape.tag == "laminar"


@st.composite
def small_instances(draw):
    n = draw(st.integers(3, 6))
    tree = [(i, draw(st.integers(0, i - 1))) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3))
    edges = tree + [(u, v) for u, v in extra if u != v]
    costs = draw(st.lists(st.integers(1, 4), min_size=len(edges), max_size=len(edges)))
    groups = draw(st.lists(
        st.tuples(st.sets(st.integers(0, n - 1), min_size=2, max_size=3),
                  st.sets(st.sampled_from("abcd"), min_size=1, max_size=3)),
        min_size=1, max_size=2))
    return make(n, [(u, v, c) for (u, v), c in zip(edges, costs)], groups)


@settings(max_examples=40, deadline=None)
@given(small_instances())
def test_load_cost_matches_direct_sum(inst):
    trees = tuple(steiner_mst_heuristic(inst.graph, grp.terminals) for grp in inst.groups)
    sol = RoutingSolution(trees)
    direct = Fraction(0)
    for u, v, c in inst.graph.edges:
        packets = set()
        for tree, grp in zip(trees, inst.groups):
            if (u, v) in tree:
                packets |= grp.demand
        direct += c * len(packets)
    assert load_cost(inst, sol) == direct


def test_laminar_rewrite_matches_load_cost():
    """Charging each edge to its maximal demand sets gives the same total."""
    rng = random.Random(3)
    family = [{"a", "b", "c", "d"}, {"a", "b"}, {"c"}, {"a"}]
    for _ in range(80):
        n = rng.randint(3, 7)
        edges = {(i, rng.randrange(i)) for i in range(1, n)}
        for _ in range(rng.randint(0, 4)):
            edges.add(tuple(rng.sample(range(n), 2)))
        demands = rng.sample(family, rng.randint(1, 4))
        inst = make(n, [(u, v, rng.randint(1, 4)) for u, v in edges],
                    [(rng.sample(range(n), 2), d) for d in demands])
        trees = [steiner_mst_heuristic(inst.graph, grp.terminals) for grp in inst.groups]
        forests = {}
        for u, v, _ in inst.graph.edges:
            carried = [grp.demand for t, grp in zip(trees, inst.groups) if (u, v) in t]
            for d in carried:
                if not any(d < other for other in carried):
                    forests.setdefault(d, set()).add((u, v))
        sol = RoutingSolution(tuple(trees))
        assert laminar_cost(inst, forests) == load_cost(inst, sol)


def test_sunflower_lower_bound_inequality():
    from covnet.oracle import exact_coverage_optimum

    rng = random.Random(5)
    for _ in range(25):
        n = rng.randint(3, 6)
        edges = {(i, rng.randrange(i)) for i in range(1, n)}
        edges.add(tuple(rng.sample(range(n), 2)))
        inst = make(n, [(u, v, rng.randint(1, 3)) for u, v in edges],
                    [(rng.sample(range(n), 2), ["P", f"x{j}"]) for j in range(rng.randint(1, 3))])
        _, opt = exact_coverage_optimum(inst)
        bound = sum(inst.weight({f"x{j}"}) * brute_steiner(inst.graph, grp.terminals)
                    for j, grp in enumerate(inst.groups))
        assert opt >= bound

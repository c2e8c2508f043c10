"""Sunflower demands: route every group inside one shared group spanner.

With ``D_j = P | P_j`` the routing cost splits into ``w(P) * c(union of trees)``
plus ``w(P_j) * c(T_j)`` per group, so one spanner that keeps every group's
Steiner cost small serves all packet assignments at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import GraphError, ShapeError
from .graph import Edge, Instance, RoutingSolution, classify_demands, check_terminals_connected, steiner_mst_heuristic
from .oracle import DEFAULT_LIMITS, OracleLimits, exact_steiner_forest, exact_steiner_tree
from .spanner import SpannerResult, build_group_spanner


@dataclass(frozen=True)
class SunflowerSolution:
    spanner: SpannerResult
    trees: tuple[frozenset[Edge], ...]
    core: frozenset[str]
    petals: tuple[frozenset[str], ...]
    cost: Fraction
    lower_bound: Fraction | None
    bound_mode: str | None

    @property
    def ratio_bound(self) -> int:
        return 14 + 8 * self.spanner.L

    @property
    def ratio(self) -> Fraction | None:
        if not self.lower_bound:
            return None
        return self.cost / self.lower_bound

    @property
    def routing(self) -> RoutingSolution:
        return RoutingSolution(self.trees)


def _shape(instance: Instance):
    shape = classify_demands(instance)
    if not shape.sunflower:
        raise ShapeError("demand family is not a sunflower: pairwise intersections differ")
    return shape


def sunflower_cost(instance: Instance, trees, core, petals) -> Fraction:
    cost = instance.graph.cost
    union = frozenset().union(*trees) if trees else frozenset()
    total = instance.weight(core) * sum((cost[e] for e in union), Fraction(0))
    for tree, petal in zip(trees, petals):
        total += instance.weight(petal) * sum((cost[e] for e in tree), Fraction(0))
    return total


def sunflower_lower_bound(instance: Instance, mode: str = "relaxed",
                          limits: OracleLimits = DEFAULT_LIMITS) -> Fraction:
    """Lower bound ``w(P) c(F*) + sum_j w(P_j) St_G(X_j)`` on the optimum.

    ``oracle`` computes both Steiner quantities exactly (refused above the
    limits); ``relaxed`` uses half the heuristic cost per group, and
    ``|V|/2`` for the forest on unit graphs whose terminals cover ``V``.
    """
    shape = _shape(instance)
    graph = instance.graph
    groups = [grp.terminals for grp in instance.groups]
    if mode == "oracle":
        _, forest = exact_steiner_forest(graph, groups, limits)
        trees = [exact_steiner_tree(graph, x, limits)[1] for x in groups]
    elif mode == "relaxed":
        trees = [graph.edge_cost(steiner_mst_heuristic(graph, x)) / 2 for x in groups]
        forest = max(trees, default=Fraction(0))
        if graph.is_unit() and instance.covers_vertices():
            forest = max(forest, Fraction(graph.n, 2))
    else:
        raise ValueError(f"unknown bound mode {mode!r}")
    return (instance.weight(shape.core) * forest
            + sum((instance.weight(p) * st for p, st in zip(shape.petals, trees)), Fraction(0)))


def solve_sunflower(instance: Instance, bound: str | None = "relaxed",
                    limits: OracleLimits = DEFAULT_LIMITS) -> SunflowerSolution:
    shape = _shape(instance)
    graph = instance.graph
    if not graph.is_unit():
        raise GraphError("sunflower solver needs a unit-cost graph; subdivide the edges first")
    check_terminals_connected(instance)
    # the spanner sees only the graph and the terminal sets
    spanner = build_group_spanner(graph, [grp.terminals for grp in instance.groups])
    h = graph.subgraph(spanner.h)
    trees = tuple(steiner_mst_heuristic(h, grp.terminals) for grp in instance.groups)
    cost = sunflower_cost(instance, trees, shape.core, shape.petals)
    lb = sunflower_lower_bound(instance, bound, limits) if bound else None
    return SunflowerSolution(spanner, trees, shape.core, shape.petals, cost, lb, bound)

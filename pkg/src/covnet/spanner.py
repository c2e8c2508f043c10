"""Group spanners for unweighted graphs.

The builder starts from a minimum spanning tree ``T`` and adds satisfying
edges in two phases. Phase 1 keeps an oriented copy of every added edge in
an arc set with out-degree at most 2, flipping a short directed path when a
vertex would overflow; phase 2 adds the satisfying edge of each terminal that
is still too far from its predecessors.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import GraphError, InvariantViolation
from .graph import Edge, Graph, edge_key, mst, steiner_mst_heuristic


@dataclass(frozen=True)
class UniformInstance:
    graph: Graph
    terminals: tuple[frozenset[int], ...]  # augmented X'_j
    ordering: tuple[tuple[int, ...], ...]  # x_{j,1}, x_{j,2}, ...
    satisfying: tuple[tuple[Edge | None, ...], ...]  # per terminal; None for the first

    def terminal_refs(self) -> list[tuple[int, int]]:
        return [(j, i) for j, order in enumerate(self.ordering) for i in range(len(order))]


@dataclass
class ArcState:
    out: dict[int, list[int]] = field(default_factory=dict)
    a1: list[Edge] = field(default_factory=list)
    a2: list[Edge] = field(default_factory=list)
    max_outdeg_trace: list[int] = field(default_factory=list)

    def outdeg(self, x: int) -> int:
        return len(self.out.get(x, ()))

    def arcs(self) -> list[tuple[int, int]]:
        return [(x, y) for x, heads in self.out.items() for y in heads]

    def add_arc(self, x: int, y: int) -> None:
        self.out.setdefault(x, []).append(y)

    def flip(self, x: int, y: int) -> None:
        self.out[x].remove(y)
        self.add_arc(y, x)


@dataclass(frozen=True)
class SpannerResult:
    h: frozenset[Edge]
    tree: frozenset[Edge]
    a1: tuple[Edge, ...]
    a2: tuple[Edge, ...]
    arcs: tuple[tuple[int, int], ...]
    g: int
    L: int
    covers: bool  # V equals the union of the terminal sets
    max_outdeg_trace: tuple[int, ...]
    uniform: UniformInstance

    @property
    def terminal_stretch(self) -> int:
        return 2 * self.L

    @property
    def beta(self) -> int:
        return 4 * self.L

    @property
    def alpha(self) -> int | None:
        return 14 if self.covers else None


def depth_bound(g: int) -> int:
    """The integer standing in for ``log g``: ``max(1, ceil(log2 g))``."""
    return max(1, math.ceil(math.log2(g))) if g > 1 else 1


def _preorder(tree: Iterable[Edge], root: int) -> tuple[list[int], dict[int, int]]:
    adj: dict[int, list[int]] = {}
    for u, v in tree:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    order, parent = [], {}
    stack = [root]
    seen = {root}
    while stack:
        x = stack.pop()
        order.append(x)
        for y in sorted(adj.get(x, []), reverse=True):
            if y not in seen:
                seen.add(y)
                parent[y] = x
                stack.append(y)
    return order, parent


def make_uniform(graph: Graph, groups: Sequence[Iterable[int]]) -> UniformInstance:
    """Augment each group with the Steiner vertices of its MST-heuristic tree."""
    if not graph.is_unit():
        raise GraphError("group spanners need a unit-cost graph; subdivide the edges first")
    groups = [frozenset(x) for x in groups]
    covered = frozenset().union(*groups) if groups else frozenset()
    if len(covered) != graph.n:
        warnings.warn("terminal sets do not cover every vertex; the size guarantee is withheld",
                      stacklevel=2)
    terminals, orderings, satisfying = [], [], []
    for x in groups:
        tree = steiner_mst_heuristic(graph, x)
        order, parent = _preorder(tree, min(x))
        terminals.append(frozenset(order))
        orderings.append(tuple(order))
        satisfying.append(tuple(None if i == 0 else edge_key(v, parent[v]) for i, v in enumerate(order)))
    return UniformInstance(graph, tuple(terminals), tuple(orderings), tuple(satisfying))


def gamma(arcs: ArcState, x: int, L: int) -> dict[int, tuple[int, int | None]]:
    """Vertices reachable from ``x`` along arcs within ``L`` steps.

    Maps each reached vertex to ``(depth, predecessor)``; BFS visits heads in
    increasing id order so the recorded paths are shortest.
    """
    reached: dict[int, tuple[int, int | None]] = {x: (0, None)}
    queue = deque([x])
    while queue:
        v = queue.popleft()
        depth = reached[v][0]
        if depth == L:
            continue
        for y in sorted(arcs.out.get(v, ())):
            if y not in reached:
                reached[y] = (depth + 1, v)
                queue.append(y)
    return reached


class _Adjacency:
    def __init__(self, n: int, edges: Iterable[Edge]):
        self.nbrs: list[set[int]] = [set() for _ in range(n)]
        for e in edges:
            self.add(e)

    def add(self, e: Edge) -> None:
        u, v = e
        self.nbrs[u].add(v)
        self.nbrs[v].add(u)

    def within(self, source: int, targets: set[int], limit: int) -> bool:
        """Is some target at BFS distance <= limit from source?"""
        if source in targets:
            return True
        seen = {source}
        frontier = [source]
        for _ in range(limit):
            nxt = []
            for x in frontier:
                for y in self.nbrs[x]:
                    if y not in seen:
                        if y in targets:
                            return True
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
            if not frontier:
                break
        return False


def is_unsatisfied(h: _Adjacency | Iterable[Edge], uniform: UniformInstance, ref: tuple[int, int], L: int) -> bool:
    j, i = ref
    if i == 0:
        return False
    if not isinstance(h, _Adjacency):
        h = _Adjacency(uniform.graph.n, h)
    order = uniform.ordering[j]
    return not h.within(order[i], set(order[:i]), 2 * L)


def eligible_target(arcs: ArcState, x: int, L: int) -> tuple[int, list[int]] | None:
    """Nearest ``z`` in Gamma(x) with out-degree <= 1 (ties by id) and the path x..z."""
    reached = gamma(arcs, x, L)
    picks = [(depth, z) for z, (depth, _) in reached.items() if arcs.outdeg(z) <= 1]
    if not picks:
        return None
    _, z = min(picks)
    path = [z]
    while path[-1] != x:
        path.append(reached[path[-1]][1])
    return z, path[::-1]


def phase1_step(state: ArcState, uniform: UniformInstance, ref: tuple[int, int], L: int) -> ArcState:
    """Add the satisfying edge of an unsatisfied terminal, rebalancing out-degrees."""
    j, i = ref
    x = uniform.ordering[j][i]
    found = eligible_target(state, x, L)
    assert found is not None, "phase-1 step needs an eligible z in Gamma(x)"
    z, path = found
    e = uniform.satisfying[j][i]
    y = e[0] if e[1] == x else e[1]
    state.add_arc(x, y)
    state.a1.append(e)
    if state.outdeg(x) > 2:
        for a, b in zip(path, path[1:]):
            state.flip(a, b)
    assert state.outdeg(x) <= 2
    state.max_outdeg_trace.append(max((len(v) for v in state.out.values()), default=0))
    return state


def undirected_girth(n: int, edges: Sequence[Edge]) -> float:
    """Length of the shortest cycle, ``inf`` for a forest."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    best = math.inf
    for s in range(n):
        if not adj[s]:
            continue
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def run_phase1(uniform: UniformInstance, tree: Iterable[Edge], L: int,
               state: ArcState | None = None) -> tuple[ArcState, _Adjacency, set[tuple[int, int]]]:
    """Round-robin over (group, index) until a full pass adds nothing."""
    state = state or ArcState()
    h = _Adjacency(uniform.graph.n, list(tree) + state.a1)
    refs = uniform.terminal_refs()
    satisfied: set[tuple[int, int]] = set()
    changed = True
    while changed:
        changed = False
        for ref in refs:
            if ref in satisfied:
                continue
            if not is_unsatisfied(h, uniform, ref, L):
                # H only grows, so satisfaction is permanent
                satisfied.add(ref)
                continue
            x = uniform.ordering[ref[0]][ref[1]]
            if eligible_target(state, x, L) is None:
                continue
            phase1_step(state, uniform, ref, L)
            h.add(state.a1[-1])
            satisfied.add(ref)
            changed = True
    return state, h, satisfied


def run_phase2(uniform: UniformInstance, state: ArcState, h: _Adjacency, satisfied: set[tuple[int, int]],
               L: int, check: bool = True) -> ArcState:
    """Add the satisfying edge of every terminal still unsatisfied in ``T + A1``."""
    leftover = [ref for ref in uniform.terminal_refs()
                if ref not in satisfied and is_unsatisfied(h, uniform, ref, L)]
    if check:
        for ref in leftover:
            x = uniform.ordering[ref[0]][ref[1]]
            stuck = [z for z in gamma(state, x, L) if state.outdeg(z) != 2]
            if stuck:
                raise InvariantViolation(f"terminal {ref} left unsatisfied but Gamma has vertices {stuck} below 2")
    a2: dict[Edge, None] = dict.fromkeys(state.a2)
    for ref in leftover:
        a2.setdefault(uniform.satisfying[ref[0]][ref[1]], None)
    state.a2 = list(a2)
    return state


def build_group_spanner(graph: Graph, groups: Sequence[Iterable[int]], check: bool = True) -> SpannerResult:
    groups = [frozenset(x) for x in groups]
    uniform = make_uniform(graph, groups)
    L = depth_bound(len(groups))
    tree = mst(graph)
    state, h, satisfied = run_phase1(uniform, tree, L)
    run_phase2(uniform, state, h, satisfied, L, check)
    return SpannerResult(
        h=frozenset(tree) | frozenset(state.a1) | frozenset(state.a2),
        tree=tree,
        a1=tuple(state.a1),
        a2=tuple(state.a2),
        arcs=tuple(sorted(state.arcs())),
        g=len(groups),
        L=L,
        covers=len(frozenset().union(*groups) if groups else ()) == graph.n,
        max_outdeg_trace=tuple(state.max_outdeg_trace),
        uniform=uniform,
    )


def unsatisfied_terminals(result: SpannerResult) -> list[tuple[int, int]]:
    h = _Adjacency(result.uniform.graph.n, result.h)
    return [ref for ref in result.uniform.terminal_refs() if is_unsatisfied(h, result.uniform, ref, result.L)]


def certify_spanner(result: SpannerResult, graph: Graph, groups: Sequence[Iterable[int]],
                    oracle_limit: int = 6) -> dict:
    """Size, orientation, girth and stretch checks; failures are listed, never raised.

    Groups with at most ``oracle_limit`` terminals get exact Steiner costs in
    both graphs; larger ones compare MST-heuristic costs instead and are
    marked ``"heuristic"``.
    """
    from .oracle import OracleLimits, exact_steiner_tree

    groups = [frozenset(x) for x in groups]
    n = graph.n
    t = len(result.tree)
    checks = []

    def check(name: str, ok: bool, detail: str) -> None:
        checks.append({"name": name, "passed": bool(ok), "detail": detail})

    check("A1 <= 2|V|", len(result.a1) <= 2 * n, f"{len(result.a1)} <= {2 * n}")
    check("A2 <= |V|", len(result.a2) <= n, f"{len(result.a2)} <= {n}")
    check("A1 + A2 <= 6|T|", len(result.a1) + len(result.a2) <= 6 * t,
          f"{len(result.a1) + len(result.a2)} <= {6 * t}")
    if result.covers and n >= 2:
        check("|H| <= 7|T|", len(result.h) <= 7 * t, f"{len(result.h)} <= {7 * t}")
    peak = max(result.max_outdeg_trace, default=0)
    check("max out-degree <= 2 after every iteration", peak <= 2, f"peak {peak}")
    girth = undirected_girth(n, [edge_key(*a) for a in result.arcs])
    check("arc girth >= L", girth >= result.L, f"{girth} >= {result.L}")
    check("arcs match A1", sorted(edge_key(*a) for a in result.arcs) == sorted(result.a1),
          f"{len(result.arcs)} arcs, {len(result.a1)} A1 edges")
    check("H within graph", all(e in graph.cost for e in result.h), f"{len(result.h)} edges")
    bad = unsatisfied_terminals(result)
    check("every terminal within 2L of its predecessors", not bad,
          f"unsatisfied {bad}" if bad else f"2L = {2 * result.L}")

    h_graph = graph.subgraph(result.h)
    limits = OracleLimits(max_terminals=max(oracle_limit, 1))
    stretch = []
    for j, x in enumerate(groups):
        if len(x) <= oracle_limit:
            _, st_h = exact_steiner_tree(h_graph, x, limits)
            _, st_g = exact_steiner_tree(graph, x, limits)
            method = "exact"
        else:
            st_h = h_graph.edge_cost(steiner_mst_heuristic(h_graph, x))
            st_g = graph.edge_cost(steiner_mst_heuristic(graph, x))
            method = "heuristic"
        ok = st_h <= result.beta * st_g
        stretch.append({"group": j, "method": method, "st_h": str(st_h), "st_g": str(st_g), "passed": ok})
    check("St_H(X_j) <= 4L St_G(X_j)", all(s["passed"] for s in stretch),
          f"{sum(s['method'] == 'exact' for s in stretch)} exact, "
          f"{sum(s['method'] == 'heuristic' for s in stretch)} heuristic")
    return {
        "passed": all(c["passed"] for c in checks),
        "alpha": result.alpha,
        "beta": result.beta,
        "L": result.L,
        "sizes": {"T": t, "A1": len(result.a1), "A2": len(result.a2), "H": len(result.h), "V": n},
        "checks": checks,
        "stretch": stretch,
    }

"""Graphs, instances, routing solutions and the shared graph subroutines.

Costs and packet weights are :class:`fractions.Fraction` throughout. Edges
are identified by their endpoint pair ``(u, v)`` with ``u < v``; an edge set
is any collection of such pairs (usually a ``frozenset``).
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import GraphError, InfeasibleError, InstanceError, InvalidSolutionError

Edge = tuple[int, int]


def as_rational(value) -> Fraction:
    """Parse ``"3"``, ``"3/4"`` or an int/Fraction into a Fraction.

    Floats are refused: cost accounting must stay exact.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceError(f"expected an exact rational, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"bad rational {value!r}") from exc
    raise InstanceError(f"expected a rational string, got {value!r}")


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class UnionFind:
    """Disjoint sets over ``0..size-1`` with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            out.setdefault(self.find(x), []).append(x)
        return sorted(out.values())


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices ``0..n-1``.

    ``edges`` holds ``(u, v, cost)`` triples with ``u < v``, one per vertex
    pair, sorted in the global tie-break order ``(cost, u, v)``.
    """

    n: int
    edges: tuple[tuple[int, int, Fraction], ...]

    @classmethod
    def build(cls, n: int, edges: Iterable[Sequence]) -> "Graph":
        if not isinstance(n, int) or n < 0:
            raise InstanceError(f"vertex count must be a nonnegative integer, got {n!r}")
        best: dict[Edge, Fraction] = {}
        for i, item in enumerate(edges):
            if len(item) != 3:
                raise InstanceError(f"edge #{i}: expected [u, v, cost], got {item!r}")
            u, v, c = item
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in (u, v)):
                raise InstanceError(f"edge #{i}: endpoints must be integers")
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"edge #{i}: endpoint out of range 0..{n - 1}")
            if u == v:
                raise InstanceError(f"edge #{i}: self-loop at vertex {u}")
            cost = as_rational(c)
            if cost < 0:
                raise InstanceError(f"edge #{i}: negative cost {cost}")
            key = edge_key(u, v)
            if key not in best or cost < best[key]:
                best[key] = cost
        ordered = sorted(((u, v, c) for (u, v), c in best.items()), key=lambda t: (t[2], t[0], t[1]))
        return cls(n, tuple(ordered))

    @cached_property
    def cost(self) -> dict[Edge, Fraction]:
        return {(u, v): c for u, v, c in self.edges}

    @cached_property
    def adjacency(self) -> list[list[tuple[int, Fraction]]]:
        adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(self.n)]
        for u, v, c in self.edges:
            adj[u].append((v, c))
            adj[v].append((u, c))
        for nbrs in adj:
            nbrs.sort()
        return adj

    @cached_property
    def order(self) -> dict[Edge, int]:
        """Position of each edge in the tie-break order."""
        return {(u, v): i for i, (u, v, _) in enumerate(self.edges)}

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.cost

    def edge_cost(self, edges: Iterable[Edge]) -> Fraction:
        cost = self.cost
        return sum((cost[e] for e in edges), Fraction(0))

    def is_unit(self) -> bool:
        return all(c == 1 for _, _, c in self.edges)

    def subgraph(self, edges: Iterable[Edge]) -> "Graph":
        cost = self.cost
        return Graph.build(self.n, [(u, v, cost[(u, v)]) for u, v in edges])


@dataclass(frozen=True)
class Group:
    terminals: frozenset[int]
    demand: frozenset[str]


@dataclass(frozen=True)
class Instance:
    graph: Graph
    packets: Mapping[str, Fraction]
    groups: tuple[Group, ...]

    @classmethod
    def build(cls, graph: Graph, groups: Iterable[tuple[Iterable[int], Iterable[str]]],
              packets: Mapping[str, object] | None = None) -> "Instance":
        weights: dict[str, Fraction] = {}
        for pid, w in (packets or {}).items():
            w = as_rational(w)
            if w <= 0:
                raise InstanceError(f"packet {pid!r}: weight must be positive, got {w}")
            weights[str(pid)] = w
        built = []
        for j, (terms, demand) in enumerate(groups):
            terms = frozenset(terms)
            demand = frozenset(str(p) for p in demand)
            for t in terms:
                if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t < graph.n:
                    raise InstanceError(f"group {j}: terminal {t!r} is not a vertex")
            if len(terms) < 2:
                raise InstanceError(f"group {j}: needs at least 2 terminals")
            if not demand:
                raise InstanceError(f"group {j}: empty demand set")
            for p in sorted(demand):
                weights.setdefault(p, Fraction(1))
            built.append(Group(terms, demand))
        return cls(graph, dict(sorted(weights.items())), tuple(built))

    def weight(self, packets: Iterable[str]) -> Fraction:
        return sum((self.packets[p] for p in packets), Fraction(0))

    @cached_property
    def demand_sets(self) -> tuple[frozenset[str], ...]:
        """Distinct demand sets in order of first appearance; index = demand-set id."""
        seen: dict[frozenset[str], None] = {}
        for grp in self.groups:
            seen.setdefault(grp.demand, None)
        return tuple(seen)

    @cached_property
    def demand_id(self) -> dict[frozenset[str], int]:
        return {d: i for i, d in enumerate(self.demand_sets)}

    @property
    def g(self) -> int:
        return len(self.groups)

    def covers_vertices(self) -> bool:
        covered = set().union(*(grp.terminals for grp in self.groups)) if self.groups else set()
        return len(covered) == self.graph.n


@dataclass(frozen=True)
class RoutingSolution:
    trees: tuple[frozenset[Edge], ...]


@dataclass(frozen=True)
class DemandShape:
    tag: str  # "laminar" | "sunflower" | "general"
    laminar: bool
    sunflower: bool
    core: frozenset[str] | None = None
    petals: tuple[frozenset[str], ...] | None = None


# ---------------------------------------------------------------------------
# connectivity helpers


def components(n: int, edges: Iterable[Edge]) -> UnionFind:
    uf = UnionFind(n)
    for u, v in edges:
        uf.union(u, v)
    return uf


def spans(n: int, edges: Iterable[Edge], terminals: Iterable[int]) -> bool:
    uf = components(n, edges)
    roots = {uf.find(t) for t in terminals}
    return len(roots) <= 1


def _adjacency_of(edges: Iterable[Edge]) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for nbrs in adj.values():
        nbrs.sort()
    return adj


def is_tree_spanning(edges: Iterable[Edge], terminals: Iterable[int]) -> bool:
    edges = set(edges)
    terminals = set(terminals)
    verts = {x for e in edges for x in e}
    if not edges:
        return len(terminals) <= 1
    if len(edges) != len(verts) - 1 or not terminals <= verts:
        return False
    return spans(max(verts) + 1, edges, verts)


def prune_leaves(edges: Iterable[Edge], keep: Iterable[int]) -> set[Edge]:
    """Repeatedly strip degree-1 vertices outside ``keep``."""
    edges = set(edges)
    keep = set(keep)
    adj = _adjacency_of(edges)
    stack = [x for x, nb in adj.items() if len(nb) == 1 and x not in keep]
    while stack:
        x = stack.pop()
        nbrs = adj.get(x, [])
        if len(nbrs) != 1:
            continue
        y = nbrs[0]
        edges.discard(edge_key(x, y))
        adj[x] = []
        adj[y].remove(x)
        if len(adj[y]) == 1 and y not in keep:
            stack.append(y)
    return edges


def tree_within(edges: Iterable[Edge], terminals: Iterable[int]) -> frozenset[Edge] | None:
    """A minimal tree inside ``edges`` spanning ``terminals`` (BFS tree, then leaf pruning).

    Returns None when the terminals are not all in one component.
    """
    terminals = sorted(set(terminals))
    adj = _adjacency_of(edges)
    root = terminals[0]
    parent = {root: None}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adj.get(x, ()):
            if y not in parent:
                parent[y] = x
                queue.append(y)
    if any(t not in parent for t in terminals):
        return None
    tree = {edge_key(x, p) for x, p in parent.items() if p is not None}
    return frozenset(prune_leaves(tree, terminals))


def has_cycle(edges: Iterable[Edge]) -> bool:
    edges = list(edges)
    if not edges:
        return False
    if len(set(edges)) != len(edges):
        return True
    n = max(max(e) for e in edges) + 1
    uf = UnionFind(n)
    return not all(uf.union(u, v) for u, v in edges)


# ---------------------------------------------------------------------------
# cost evaluation


def check_solution(instance: Instance, sol: RoutingSolution) -> None:
    """Raise InvalidSolutionError naming the first broken tree."""
    if len(sol.trees) != instance.g:
        raise InvalidSolutionError(f"expected {instance.g} trees, got {len(sol.trees)}")
    for j, (tree, grp) in enumerate(zip(sol.trees, instance.groups)):
        for e in tree:
            if e not in instance.graph.cost:
                raise InvalidSolutionError(f"group {j}: edge {list(e)} is not in the graph")
        verts = {x for e in tree for x in e}
        missing = sorted(grp.terminals - verts)
        if missing:
            raise InvalidSolutionError(f"group {j}: tree does not span terminal(s) {missing}")
        if not is_tree_spanning(tree, grp.terminals):
            raise InvalidSolutionError(f"group {j}: edge set is not a tree")


def edge_loads(instance: Instance, sol: RoutingSolution) -> dict[Edge, frozenset[str]]:
    carried: dict[Edge, set[str]] = {}
    for tree, grp in zip(sol.trees, instance.groups):
        for e in tree:
            carried.setdefault(e, set()).update(grp.demand)
    return {e: frozenset(p) for e, p in carried.items()}


def load_cost(instance: Instance, sol: RoutingSolution) -> Fraction:
    """Total coverage cost: each edge pays its cost times the weight of the distinct packets on it."""
    check_solution(instance, sol)
    cost = instance.graph.cost
    return sum((cost[e] * instance.weight(p) for e, p in edge_loads(instance, sol).items()), Fraction(0))


def induced_routing(instance: Instance, forests: Mapping[frozenset[str], Iterable[Edge]]) -> RoutingSolution:
    """Route each group inside the union of the forests of its demand supersets."""
    trees = []
    for j, grp in enumerate(instance.groups):
        allowed = set()
        for d, es in forests.items():
            if d >= grp.demand:
                allowed.update(es)
        tree = tree_within(allowed, grp.terminals)
        if tree is None:
            raise InvalidSolutionError(f"group {j}: terminals disconnected in the forests of its demand supersets")
        trees.append(tree)
    return RoutingSolution(tuple(trees))


def laminar_cost(instance: Instance, forests: Mapping[frozenset[str], Iterable[Edge]],
                 check_routing: bool = False) -> Fraction:
    """``sum_D w(D) * c(H_D)`` after checking every group is connected.

    With ``check_routing`` the value is also compared against the load cost
    of the induced routing, and a mismatch raises InvalidSolutionError.
    """
    routing = induced_routing(instance, forests)
    cost = instance.graph.cost
    total = Fraction(0)
    for d, es in forests.items():
        total += instance.weight(d) * sum((cost[e] for e in es), Fraction(0))
    if check_routing:
        routed = load_cost(instance, routing)
        if routed != total:
            raise InvalidSolutionError(f"laminar cost {total} differs from induced load cost {routed}")
    return total


# ---------------------------------------------------------------------------
# spanning trees and shortest paths


def _separated_component(uf: UnionFind) -> list[int]:
    groups = uf.groups()
    return groups[1] if len(groups) > 1 else []


def mst(graph: Graph) -> frozenset[Edge]:
    """Kruskal in the ``(cost, u, v)`` order."""
    uf = UnionFind(graph.n)
    tree = [(u, v) for u, v, _ in graph.edges if uf.union(u, v)]
    if graph.n and len(tree) != graph.n - 1:
        comp = _separated_component(uf)
        raise GraphError(f"graph is disconnected; component {comp} is separated from vertex 0")
    return frozenset(tree)


def shortest_paths(graph: Graph, source: int) -> tuple[dict[int, Fraction], dict[int, int]]:
    """Dijkstra; returns (distance, predecessor) for reachable vertices."""
    dist = {source: Fraction(0)}
    pred: dict[int, int] = {}
    done = set()
    heap = [(Fraction(0), source)]
    adj = graph.adjacency
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, c in adj[x]:
            nd = d + c
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                pred[y] = x
                heapq.heappush(heap, (nd, y))
    return dist, pred


def path_edges(pred: Mapping[int, int], source: int, target: int) -> list[Edge]:
    out = []
    x = target
    while x != source:
        p = pred[x]
        out.append(edge_key(p, x))
        x = p
    return out


def steiner_mst_heuristic(graph: Graph, terminals: Iterable[int]) -> frozenset[Edge]:
    """2-approximate Steiner tree: MST of the terminal metric closure, expanded and cleaned."""
    terms = sorted(set(terminals))
    if len(terms) <= 1:
        return frozenset()
    sp = {t: shortest_paths(graph, t) for t in terms}
    unreachable = [t for t in terms[1:] if t not in sp[terms[0]][0]]
    if unreachable:
        raise InfeasibleError(f"terminals {unreachable} are not connected to terminal {terms[0]}")
    closure = sorted((sp[a][0][b], a, b) for a, b in combinations(terms, 2))
    uf = UnionFind(graph.n)
    union: set[Edge] = set()
    for _, a, b in closure:
        if uf.union(a, b):
            union.update(path_edges(sp[a][1], a, b))
    # expanded paths may overlap into cycles: re-span and strip non-terminal leaves
    sub = graph.subgraph(union)
    uf2 = UnionFind(graph.n)
    tree = {(u, v) for u, v, _ in sub.edges if uf2.union(u, v)}
    return frozenset(prune_leaves(tree, terms))


def subdivide_edges(graph: Graph) -> Graph:
    """Replace each integer-cost edge by a path of unit edges through fresh vertices."""
    for u, v, c in graph.edges:
        if c.denominator != 1 or c < 1:
            raise GraphError(
                f"edge ({u}, {v}) has cost {c}; subdivision needs positive integer costs, "
                "scale the costs first")
    n = graph.n
    out = []
    for u, v, c in sorted(graph.edges, key=lambda t: (t[0], t[1])):
        chain = [u] + list(range(n, n + int(c) - 1)) + [v]
        n += int(c) - 1
        out.extend((a, b, 1) for a, b in zip(chain, chain[1:]))
    return Graph.build(n, out)


def classify_demands(instance: Instance) -> DemandShape:
    family = instance.demand_sets
    laminar = all(not (a & b) or a <= b or b <= a for a, b in combinations(family, 2))
    demands = [grp.demand for grp in instance.groups]
    core = frozenset.intersection(*demands) if demands else frozenset()
    sunflower = all(a & b == core for a, b in combinations(demands, 2))
    petals = tuple(d - core for d in demands) if sunflower else None
    tag = "laminar" if laminar else "sunflower" if sunflower else "general"
    return DemandShape(tag, laminar, sunflower, core if sunflower else None, petals)


def check_terminals_connected(instance: Instance) -> None:
    uf = components(instance.graph.n, instance.graph.cost)
    for j, grp in enumerate(instance.groups):
        roots = {uf.find(t) for t in grp.terminals}
        if len(roots) > 1:
            first = min(grp.terminals)
            cut = sorted(t for t in grp.terminals if not uf.connected(t, first))
            raise InfeasibleError(f"group {j}: terminals {cut} are disconnected from terminal {first}")


def scale_to_int(values: Iterable[Fraction]) -> int:
    """Smallest positive integer that clears every denominator."""
    from math import lcm

    out = 1
    for v in values:
        out = lcm(out, v.denominator)
    return out

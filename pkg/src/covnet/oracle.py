"""Exact solvers for desk-scale verification.

Everything here is exponential; :class:`OracleLimits` is checked before any
enumeration starts. Internally costs are scaled to integers (exact, just
faster than Fraction arithmetic) and converted back on return.
"""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InfeasibleError, InstanceError, OracleLimitError
from .graph import Edge, Graph, Instance, RoutingSolution, edge_key, prune_leaves, scale_to_int

INF = float("inf")


@dataclass(frozen=True)
class OracleLimits:
    max_terminals: int = 10
    max_edges: int = 14
    max_groups: int = 3

    def __post_init__(self):
        for name in ("max_terminals", "max_edges", "max_groups"):
            if getattr(self, name) <= 0:
                raise InstanceError(f"oracle limit {name} must be positive")

    @classmethod
    def parse(cls, text: str | None, base: "OracleLimits | None" = None) -> "OracleLimits":
        """Parse ``"e=14,g=3,k=10"`` (any subset of keys) over ``base``."""
        base = base or cls()
        if not text:
            return base
        keys = {"e": "max_edges", "g": "max_groups", "k": "max_terminals"}
        values = {
            "max_terminals": base.max_terminals,
            "max_edges": base.max_edges,
            "max_groups": base.max_groups,
        }
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            key, sep, val = part.partition("=")
            if not sep or key.strip() not in keys:
                raise InstanceError(f"bad oracle limit {part!r}; expected e=, g= or k=")
            try:
                values[keys[key.strip()]] = int(val)
            except ValueError as exc:
                raise InstanceError(f"bad oracle limit {part!r}") from exc
        return cls(**values)

    @classmethod
    def from_env(cls) -> "OracleLimits":
        return cls.parse(os.environ.get("COVNET_ORACLE_LIMITS"))


DEFAULT_LIMITS = OracleLimits()


def _int_adjacency(graph: Graph, scale: int) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(graph.n)]
    for u, v, c in graph.edges:
        w = int(c * scale)
        adj[u].append((v, w))
        adj[v].append((u, w))
    return adj


def exact_steiner_tree(graph: Graph, terminals: Iterable[int],
                       limits: OracleLimits = DEFAULT_LIMITS) -> tuple[frozenset[Edge], Fraction]:
    """Dreyfus-Wagner over (terminal subset, vertex) states, Dijkstra-relaxed per subset."""
    terms = sorted(set(terminals))
    if len(terms) > limits.max_terminals:
        raise OracleLimitError(f"{len(terms)} terminals exceed the Dreyfus-Wagner limit {limits.max_terminals}")
    if len(terms) <= 1:
        return frozenset(), Fraction(0)
    scale = scale_to_int(c for _, _, c in graph.edges)
    adj = _int_adjacency(graph, scale)
    n, k = graph.n, len(terms)
    full = (1 << k) - 1
    dp: list[list[float]] = [[] for _ in range(full + 1)]
    back: list[list[tuple]] = [[] for _ in range(full + 1)]
    for mask in range(1, full + 1):
        cost = [INF] * n
        how: list[tuple] = [()] * n
        if mask & (mask - 1) == 0:
            t = terms[mask.bit_length() - 1]
            cost[t] = 0
            how[t] = ("leaf",)
        else:
            low = mask & -mask
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    a, b = dp[sub], dp[mask ^ sub]
                    for v in range(n):
                        c = a[v] + b[v]
                        if c < cost[v]:
                            cost[v] = c
                            how[v] = ("split", sub)
                sub = (sub - 1) & mask
        heap = [(c, v) for v, c in enumerate(cost) if c < INF]
        heapq.heapify(heap)
        while heap:
            c, x = heapq.heappop(heap)
            if c > cost[x]:
                continue
            for y, w in adj[x]:
                if c + w < cost[y]:
                    cost[y] = c + w
                    how[y] = ("edge", x)
                    heapq.heappush(heap, (c + w, y))
        dp[mask], back[mask] = cost, how
    root = terms[0]
    if dp[full][root] == INF:
        raise InfeasibleError(f"terminals {terms} are not connected")
    edges: set[Edge] = set()
    stack = [(full, root)]
    while stack:
        mask, v = stack.pop()
        how = back[mask][v]
        if how[0] == "split":
            stack.append((how[1], v))
            stack.append((mask ^ how[1], v))
        elif how[0] == "edge":
            edges.add(edge_key(how[1], v))
            stack.append((mask, how[1]))
    # zero-cost edges can close cycles in the union of traced pieces
    from .graph import UnionFind

    uf = UnionFind(n)
    tree = {e for e in sorted(edges, key=graph.order.__getitem__) if uf.union(*e)}
    tree = frozenset(prune_leaves(tree, terms))
    return tree, Fraction(dp[full][root], scale)


def _set_partitions(items: Sequence[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def exact_steiner_forest(graph: Graph, groups: Sequence[Iterable[int]],
                         limits: OracleLimits = DEFAULT_LIMITS) -> tuple[frozenset[Edge], Fraction]:
    """Minimum forest connecting each group internally.

    Tries every partition of the groups into merged blocks and sums exact
    Steiner trees per block; the optimum's components induce one such partition.
    """
    groups = [frozenset(x) for x in groups]
    if len(groups) > limits.max_groups:
        raise OracleLimitError(f"{len(groups)} groups exceed the forest enumeration limit {limits.max_groups}")
    everything = frozenset().union(*groups) if groups else frozenset()
    if len(everything) > limits.max_terminals:
        raise OracleLimitError(
            f"{len(everything)} distinct terminals exceed the Dreyfus-Wagner limit {limits.max_terminals}")
    cache: dict[frozenset[int], tuple[frozenset[Edge], Fraction]] = {}

    def tree(terms: frozenset[int]):
        if terms not in cache:
            cache[terms] = exact_steiner_tree(graph, terms, limits)
        return cache[terms]

    best_edges, best = frozenset(), None
    for part in _set_partitions(list(range(len(groups)))):
        edges: set[Edge] = set()
        total = Fraction(0)
        for block in part:
            es, c = tree(frozenset().union(*(groups[i] for i in block)))
            edges |= es
            total += c
        if best is None or total < best:
            best, best_edges = total, frozenset(edges)
    return best_edges, best if best is not None else Fraction(0)


def minimal_trees(graph: Graph, terminals: Iterable[int]) -> list[int]:
    """Every tree of ``graph`` spanning ``terminals`` whose leaves are all terminals.

    Trees are returned as bitmasks over edge indices (``graph.edges`` order).
    Uses include/exclude branching on frontier edges from the lowest terminal,
    so each subtree through the root is visited once.
    """
    terms = frozenset(terminals)
    root = min(terms)
    index = {(u, v): i for i, (u, v, _) in enumerate(graph.edges)}
    inc: list[list[tuple[int, int]]] = [[] for _ in range(graph.n)]
    for (u, v), i in index.items():
        inc[u].append((v, i))
        inc[v].append((u, i))
    ends = [(u, v) for u, v, _ in graph.edges]
    need = len(terms)
    out: list[int] = []

    def reachable_ok(verts: set[int], excluded: int) -> bool:
        seen = set(verts)
        stack = list(verts)
        while stack:
            x = stack.pop()
            for y, i in inc[x]:
                if y not in seen and not excluded >> i & 1:
                    seen.add(y)
                    stack.append(y)
        return terms <= seen

    def grow(verts: set[int], deg: dict[int, int], mask: int, cand: list[int], excluded: int, have: int):
        if have == need:
            if all(d != 1 or x in terms for x, d in deg.items()):
                out.append(mask)
            return
        if not cand or not reachable_ok(verts, excluded):
            return
        e, rest = cand[0], cand[1:]
        u, v = ends[e]
        w, x = (v, u) if u in verts else (u, v)
        new_cand = [f for f in rest if w not in ends[f]]
        new_cand += [i for y, i in inc[w] if y not in verts and not excluded >> i & 1]
        deg[x] = deg.get(x, 0) + 1
        deg[w] = 1
        verts.add(w)
        grow(verts, deg, mask | 1 << e, new_cand, excluded, have + (w in terms))
        verts.discard(w)
        del deg[w]
        deg[x] -= 1
        if not deg[x]:
            del deg[x]
        grow(verts, deg, mask, rest, excluded | 1 << e, have)

    first = [i for _, i in inc[root]]
    grow({root}, {}, 0, first, 0, 1)
    return out


def _mask_edges(graph: Graph, mask: int) -> frozenset[Edge]:
    return frozenset((u, v) for i, (u, v, _) in enumerate(graph.edges) if mask >> i & 1)


def exact_coverage_optimum(instance: Instance,
                           limits: OracleLimits = DEFAULT_LIMITS) -> tuple[RoutingSolution, Fraction]:
    """Exhaustive minimum over per-group minimal trees, with branch and bound.

    Replacing a tree by a minimal subtree never raises any edge load, so
    minimal trees suffice.
    """
    graph = instance.graph
    if graph.m > limits.max_edges:
        raise OracleLimitError(f"{graph.m} edges exceed the enumeration limit {limits.max_edges}")
    if instance.g > limits.max_groups:
        raise OracleLimitError(f"{instance.g} groups exceed the enumeration limit {limits.max_groups}")
    m, g = graph.m, instance.g
    cscale = scale_to_int(c for _, _, c in graph.edges)
    pids = sorted(instance.packets)
    wscale = scale_to_int(instance.packets.values())
    cost = [int(c * cscale) for _, _, c in graph.edges]
    pweight = [int(instance.packets[p] * wscale) for p in pids]
    pbit = {p: 1 << i for i, p in enumerate(pids)}
    dmask = [sum(pbit[p] for p in grp.demand) for grp in instance.groups]

    weight_cache: dict[int, int] = {0: 0}

    def wt(mask: int) -> int:
        if mask not in weight_cache:
            weight_cache[mask] = sum(w for i, w in enumerate(pweight) if mask >> i & 1)
        return weight_cache[mask]

    trees: list[list[int]] = []
    for j, grp in enumerate(instance.groups):
        found = minimal_trees(graph, grp.terminals)
        if not found:
            raise InfeasibleError(f"group {j}: terminals are not connected")
        found.sort(key=lambda t: (sum(cost[i] for i in range(m) if t >> i & 1), sorted(_mask_edges(graph, t))))
        trees.append(found)

    order = sorted(range(g), key=lambda j: (len(trees[j]), j))
    incidence = [np.array([[t >> i & 1 for i in range(m)] for t in trees[j]], dtype=np.int64) for j in range(g)]
    bound = sum(cost) * wt((1 << len(pids)) - 1)
    if bound >= 2**62:
        raise OracleLimitError("instance magnitudes too large for the integer enumeration")

    best = [None, None]  # [value, choice tuple indexed by group]
    carried = [0] * m
    choice = [0] * g

    def descend(level: int, partial: int):
        j = order[level]
        marginal = [cost[i] * (wt(carried[i] | dmask[j]) - wt(carried[i])) for i in range(m)]
        values = incidence[j] @ np.array(marginal, dtype=np.int64)
        if level == g - 1:
            k = int(np.argmin(values))
            total = partial + int(values[k])
            if best[0] is None or total < best[0]:
                choice[j] = k
                best[0], best[1] = total, tuple(choice)
            return
        for k in np.argsort(values, kind="stable"):
            k = int(k)
            total = partial + int(values[k])
            if best[0] is not None and total >= best[0]:
                break
            t = trees[j][k]
            saved = carried[:]
            for i in range(m):
                if t >> i & 1:
                    carried[i] |= dmask[j]
            choice[j] = k
            descend(level + 1, total)
            carried[:] = saved

    if g == 0:
        return RoutingSolution(()), Fraction(0)
    descend(0, 0)
    sol = RoutingSolution(tuple(_mask_edges(graph, trees[j][best[1][j]]) for j in range(g)))
    return sol, Fraction(best[0], cscale * wscale)

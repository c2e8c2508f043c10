"""Primal-dual 2-approximation for laminar demand families.

Demand sets are processed in increasing size. In the phase for demand set
``D`` duals ``y[D, S]`` are raised on the active components of ``F_D``
until an edge goes D-tight, the tight edge joins ``F_D``, and so on until
every group whose demand contains ``D`` is connected. A reverse-delete pass
over decreasing demand sets then yields the forests ``H_D``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InfeasibleError, InvariantViolation, ShapeError
from .graph import (
    Edge,
    Instance,
    RoutingSolution,
    UnionFind,
    classify_demands,
    has_cycle,
    induced_routing,
    laminar_cost,
)


@dataclass(frozen=True)
class DualVariable:
    demand: int
    cut: tuple[int, ...]
    value: Fraction


@dataclass
class PhaseState:
    """Working state of the dual ascent, shared across phases.

    ``loads[d][e]`` is the dual load demand set ``d``'s own cuts put on ``e``;
    the accumulated load ``a(e, D)`` is the sum of ``loads[d'][e]`` over
    ``d' <= D``.
    """

    instance: Instance
    demand: int = -1
    forests: dict[int, list[Edge]] = field(default_factory=dict)
    loads: dict[int, dict[Edge, Fraction]] = field(default_factory=dict)
    duals: dict[tuple[int, tuple[int, ...]], Fraction] = field(default_factory=dict)
    uf: UnionFind | None = None
    # per iteration of each phase: (components, active flags)
    trace: dict[int, list[tuple[list[tuple[int, ...]], list[bool]]]] = field(default_factory=dict)

    def subsets_of(self, d: int) -> list[int]:
        family = self.instance.demand_sets
        return [k for k, other in enumerate(family) if other <= family[d]]

    def relevant_groups(self, d: int) -> list[frozenset[int]]:
        target = self.instance.demand_sets[d]
        return [grp.terminals for grp in self.instance.groups if grp.demand >= target]

    def accumulated(self, e: Edge) -> Fraction:
        return sum((self.loads[k].get(e, Fraction(0)) for k in self.subsets_of(self.demand)), Fraction(0))


@dataclass(frozen=True)
class LaminarCertificate:
    demand_sets: tuple[frozenset[str], ...]
    forests: tuple[tuple[Edge, ...], ...]  # H_D per demand-set id
    duals: tuple[DualVariable, ...]
    primal: Fraction
    dual: Fraction

    def forest_map(self) -> dict[frozenset[str], tuple[Edge, ...]]:
        return dict(zip(self.demand_sets, self.forests))


def phase_order(instance: Instance) -> list[int]:
    family = instance.demand_sets
    return sorted(range(len(family)), key=lambda k: (len(family[k]), k))


def start_phase(state: PhaseState, d: int) -> PhaseState:
    state.demand = d
    state.forests[d] = []
    state.loads[d] = {}
    state.uf = UnionFind(state.instance.graph.n)
    state.trace[d] = []
    return state


def _components(state: PhaseState) -> dict[int, list[int]]:
    comps: dict[int, list[int]] = {}
    for x in range(state.instance.graph.n):
        comps.setdefault(state.uf.find(x), []).append(x)
    return comps


def active_sets(state: PhaseState) -> list[frozenset[int]]:
    """Components of ``F_D`` that split some terminal set whose demand contains ``D``."""
    groups = state.relevant_groups(state.demand)
    out = []
    for comp in sorted(_components(state).values()):
        members = set(comp)
        if any(0 < len(x & members) < len(x) for x in groups):
            out.append(frozenset(comp))
    return out


def check_phase_feasibility(state: PhaseState) -> None:
    """Dual constraints for every demand set containing the current one."""
    inst = state.instance
    family = inst.demand_sets
    cost = inst.graph.cost
    for k, big in enumerate(family):
        if not big >= family[state.demand]:
            continue
        subs = [s for s, small in enumerate(family) if small <= big and s in state.loads]
        w = inst.weight(big)
        for e, c in cost.items():
            a = sum((state.loads[s].get(e, Fraction(0)) for s in subs), Fraction(0))
            if a > w * c:
                raise InvariantViolation(f"dual load {a} exceeds {w}*{c} on edge {list(e)} for demand set {k}")


def dual_ascent_phase(state: PhaseState) -> PhaseState:
    """Run the current phase to completion (see module docstring)."""
    inst = state.instance
    d = state.demand
    w = inst.weight(inst.demand_sets[d])
    graph = inst.graph
    own = state.loads[d]
    subs = [k for k in state.subsets_of(d) if k != d]
    carried = {e: sum((state.loads[k].get(e, Fraction(0)) for k in subs), Fraction(0)) for e in graph.cost}
    while True:
        active = active_sets(state)
        comps = sorted(_components(state).values())
        active_keys = {min(s) for s in active}
        state.trace[d].append(([tuple(c) for c in comps], [c[0] in active_keys for c in comps]))
        if not active:
            return state
        is_active = {}
        for s in active:
            root = state.uf.find(min(s))
            is_active[root] = s
        best = None
        crossing: list[tuple[Edge, int]] = []
        for u, v, c in graph.edges:
            ru, rv = state.uf.find(u), state.uf.find(v)
            if ru == rv:
                continue
            rate = (ru in is_active) + (rv in is_active)
            if not rate:
                continue
            crossing.append(((u, v), rate))
            slack = w * c - carried[(u, v)] - own.get((u, v), Fraction(0))
            t = slack / rate
            if best is None or t < best[0]:
                best = (t, (u, v))
        if best is None:
            raise InfeasibleError(
                f"demand set {d}: active component {sorted(active[0])} has no edge leaving it")
        delta, tight = best
        if delta:
            for s in active:
                key = (d, tuple(sorted(s)))
                state.duals[key] = state.duals.get(key, Fraction(0)) + delta
            for e, rate in crossing:
                own[e] = own.get(e, Fraction(0)) + delta * rate
        for e, _ in crossing:
            if carried[e] + own.get(e, Fraction(0)) > w * graph.cost[e]:
                raise InvariantViolation(f"dual infeasible on edge {list(e)} in phase {d}")
        state.forests[d].append(tight)
        state.uf.union(*tight)


def prune(forests: Mapping[int, Sequence[Edge]], instance: Instance) -> dict[int, list[Edge]]:
    """Reverse delete, largest demand sets first, edges newest first."""
    family = instance.demand_sets
    h = {k: list(es) for k, es in forests.items()}
    order = sorted(range(len(family)), key=lambda k: (-len(family[k]), k))
    n = instance.graph.n
    for d in order:
        owners = [grp.terminals for grp in instance.groups if grp.demand == family[d]]
        above = [e for k, es in h.items() if family[k] > family[d] for e in es]
        for e in reversed(list(h.get(d, []))):
            uf = UnionFind(n)
            for f in above:
                uf.union(*f)
            for f in h[d]:
                if f != e:
                    uf.union(*f)
            if all(len({uf.find(t) for t in x}) == 1 for x in owners):
                h[d].remove(e)
    return h


def extract_trees(instance: Instance, forests: Mapping[int, Sequence[Edge]]) -> RoutingSolution:
    family = instance.demand_sets
    return induced_routing(instance, {family[k]: es for k, es in forests.items()})


def solve_laminar(instance: Instance) -> tuple[RoutingSolution, LaminarCertificate]:
    shape = classify_demands(instance)
    if not shape.laminar:
        raise ShapeError("demand family is not laminar")
    state = PhaseState(instance)
    for d in phase_order(instance):
        start_phase(state, d)
        dual_ascent_phase(state)
        check_phase_feasibility(state)
    pruned = prune(state.forests, instance)
    family = instance.demand_sets
    forests = tuple(tuple(sorted(pruned.get(k, []))) for k in range(len(family)))
    duals = tuple(DualVariable(d, cut, v) for (d, cut), v in state.duals.items() if v > 0)
    primal = laminar_cost(instance, dict(zip(family, forests)))
    cert = LaminarCertificate(family, forests, duals, primal, sum((y.value for y in duals), Fraction(0)))
    return extract_trees(instance, pruned), cert


def run_phases(instance: Instance) -> PhaseState:
    """Dual ascent only, keeping the per-iteration trace (for replay checks)."""
    state = PhaseState(instance)
    for d in phase_order(instance):
        start_phase(state, d)
        dual_ascent_phase(state)
    return state


# ---------------------------------------------------------------------------
# checkers


@dataclass(frozen=True)
class DualViolation:
    kind: str  # "capacity" | "cut" | "value"
    demand: int
    edge: Edge | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None
    cut: tuple[int, ...] | None = None


def _separates(cut: frozenset[int], terminals: frozenset[int]) -> bool:
    return 0 < len(cut & terminals) < len(terminals)


def check_dual_feasibility(instance: Instance, duals: Sequence[DualVariable]) -> list[DualViolation]:
    """Evaluate every dual constraint exactly; an empty list means feasible."""
    family = instance.demand_sets
    out: list[DualViolation] = []
    per_edge: dict[int, dict[Edge, Fraction]] = {}
    for y in duals:
        if not 0 <= y.demand < len(family):
            out.append(DualViolation("cut", y.demand, cut=y.cut))
            continue
        if y.value <= 0:
            out.append(DualViolation("value", y.demand, lhs=y.value, cut=y.cut))
        cut = frozenset(y.cut)
        if not any(_separates(cut, grp.terminals) for grp in instance.groups
                   if grp.demand >= family[y.demand]):
            out.append(DualViolation("cut", y.demand, cut=y.cut))
        loads = per_edge.setdefault(y.demand, {})
        for u, v, _ in instance.graph.edges:
            if (u in cut) != (v in cut):
                loads[(u, v)] = loads.get((u, v), Fraction(0)) + y.value
    for k, big in enumerate(family):
        w = instance.weight(big)
        subs = [s for s in per_edge if family[s] <= big]
        for u, v, c in instance.graph.edges:
            lhs = sum((per_edge[s].get((u, v), Fraction(0)) for s in subs), Fraction(0))
            if lhs > w * c:
                out.append(DualViolation("capacity", k, (u, v), lhs, w * c))
    return out


def disconnected_groups(instance: Instance, forests: Mapping[int, Sequence[Edge]]) -> list[int]:
    family = instance.demand_sets
    bad = []
    for j, grp in enumerate(instance.groups):
        uf = UnionFind(instance.graph.n)
        for k, es in forests.items():
            if 0 <= k < len(family) and family[k] >= grp.demand:
                for e in es:
                    uf.union(*e)
        if len({uf.find(t) for t in grp.terminals}) != 1:
            bad.append(j)
    return bad


def check_primal_feasibility(instance: Instance, forests: Mapping[int, Sequence[Edge]]) -> bool:
    return not disconnected_groups(instance, forests)


def forest_violations(instance: Instance, forests: Mapping[int, Sequence[Edge]]) -> list[int]:
    """Demand-set ids ``D`` whose union of ``H_D'`` over ``D' >= D`` has a cycle."""
    family = instance.demand_sets
    return [d for d in range(len(family))
            if has_cycle([e for k, es in forests.items() if family[k] >= family[d] for e in es])]


def replay_degree_check(instance: Instance, forests: Mapping[int, Sequence[Edge]]) -> list[str]:
    """Replay the ascent and test the degree facts against the final forests.

    For each iteration of each phase ``D``: every inactive component with at
    least one incident edge of ``U = union of H_D' (D' >= D)`` must have
    degree other than 1, and the active components' total degree in ``U``
    is at most twice their number.
    """
    family = instance.demand_sets
    state = run_phases(instance)
    problems = []
    for d, iterations in state.trace.items():
        union = [e for k, es in forests.items() if family[k] >= family[d] for e in es]
        for it, (comps, flags) in enumerate(iterations):
            where = {}
            for i, comp in enumerate(comps):
                for x in comp:
                    where[x] = i
            deg = [0] * len(comps)
            for u, v in union:
                if where[u] != where[v]:
                    deg[where[u]] += 1
                    deg[where[v]] += 1
            for i, comp in enumerate(comps):
                if not flags[i] and deg[i] == 1:
                    problems.append(f"phase {d} iteration {it}: inactive component {list(comp)} has degree 1")
            n_active = sum(flags)
            active_deg = sum(x for x, f in zip(deg, flags) if f)
            if active_deg > 2 * n_active:
                problems.append(f"phase {d} iteration {it}: active degree {active_deg} > 2 * {n_active}")
    return problems

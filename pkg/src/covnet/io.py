"""JSON formats for instances, solutions, certificates and spanners.

Rationals travel as strings (``"3"`` or ``"3/4"``); edges as ``[u, v]``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import InstanceError
from .graph import Edge, Graph, Instance, RoutingSolution, as_rational, edge_key
from .laminar import DualVariable, LaminarCertificate


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load_json(path: str | Path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _need(doc: Any, key: str, where: str, kind=None):
    if not isinstance(doc, dict) or key not in doc:
        raise InstanceError(f"{where}: missing key {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise InstanceError(f"{where}.{key}: expected {kind.__name__}")
    return value


def _rational(value, where: str) -> Fraction:
    try:
        return as_rational(value)
    except InstanceError as exc:
        raise InstanceError(f"{where}: {exc}") from None


def _edges(items, where: str) -> list[Edge]:
    if not isinstance(items, list):
        raise InstanceError(f"{where}: expected a list of [u, v] pairs")
    out = []
    for i, item in enumerate(items):
        if (not isinstance(item, list) or len(item) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in item)):
            raise InstanceError(f"{where}[{i}]: expected [u, v]")
        out.append(edge_key(*item))
    return out


def _edge_list(edges) -> list[list[int]]:
    return [list(e) for e in sorted(edges)]


# ---------------------------------------------------------------------------
# instances


def instance_from_json(doc: Any) -> Instance:
    graph_doc = _need(doc, "graph", "instance", dict)
    n = _need(graph_doc, "n", "instance.graph", int)
    edges = _need(graph_doc, "edges", "instance.graph", list)
    triples = []
    for i, item in enumerate(edges):
        if not isinstance(item, list) or len(item) != 3:
            raise InstanceError(f"instance.graph.edges[{i}]: expected [u, v, cost]")
        triples.append((item[0], item[1], _rational(item[2], f"instance.graph.edges[{i}]")))
    try:
        graph = Graph.build(n, triples)
    except InstanceError as exc:
        raise InstanceError(f"instance.graph: {exc}") from None
    packets = doc.get("packets", {})
    if not isinstance(packets, dict):
        raise InstanceError("instance.packets: expected an object")
    weights = {str(p): _rational(w, f"instance.packets.{p}") for p, w in packets.items()}
    groups = []
    for j, grp in enumerate(_need(doc, "groups", "instance", list)):
        where = f"instance.groups[{j}]"
        terms = _need(grp, "terminals", where, list)
        demand = _need(grp, "demand", where, list)
        groups.append((terms, [str(p) for p in demand]))
    try:
        return Instance.build(graph, groups, weights)
    except InstanceError as exc:
        raise InstanceError(f"instance: {exc}") from None


def instance_to_json(instance: Instance) -> dict:
    return {
        "graph": {
            "n": instance.graph.n,
            "edges": [[u, v, str(c)] for u, v, c in sorted(instance.graph.edges)],
        },
        "packets": {p: str(w) for p, w in instance.packets.items()},
        "groups": [
            {"terminals": sorted(grp.terminals), "demand": sorted(grp.demand)}
            for grp in instance.groups
        ],
    }


def read_instance(path: str | Path) -> Instance:
    return instance_from_json(load_json(path))


# ---------------------------------------------------------------------------
# solutions


def solution_to_json(sol: RoutingSolution, cost: Fraction, **extra) -> dict:
    doc = {"trees": [_edge_list(t) for t in sol.trees], "cost": str(cost)}
    for key, value in extra.items():
        doc[key] = str(value) if isinstance(value, Fraction) else value
    return doc


def solution_from_json(doc: Any) -> tuple[RoutingSolution, Fraction | None]:
    trees = _need(doc, "trees", "solution", list)
    parsed = tuple(frozenset(_edges(t, f"solution.trees[{j}]")) for j, t in enumerate(trees))
    cost = _rational(doc["cost"], "solution.cost") if "cost" in doc else None
    return RoutingSolution(parsed), cost


# ---------------------------------------------------------------------------
# laminar certificates


def certificate_to_json(cert: LaminarCertificate) -> dict:
    return {
        "demands": [sorted(d) for d in cert.demand_sets],
        "forests": [_edge_list(f) for f in cert.forests],
        "duals": [{"demand": y.demand, "cut": list(y.cut), "value": str(y.value)} for y in cert.duals],
        "primal": str(cert.primal),
        "dual": str(cert.dual),
        "ratio_bound": "2",
    }


def certificate_from_json(doc: Any) -> LaminarCertificate:
    demands = _need(doc, "demands", "certificate", list)
    forests = _need(doc, "forests", "certificate", list)
    duals = []
    for i, item in enumerate(_need(doc, "duals", "certificate", list)):
        where = f"certificate.duals[{i}]"
        demand = _need(item, "demand", where, int)
        cut = _need(item, "cut", where, list)
        duals.append(DualVariable(demand, tuple(sorted(cut)), _rational(_need(item, "value", where), where)))
    return LaminarCertificate(
        demand_sets=tuple(frozenset(str(p) for p in d) for d in demands),
        forests=tuple(tuple(sorted(_edges(f, f"certificate.forests[{k}]"))) for k, f in enumerate(forests)),
        duals=tuple(duals),
        primal=_rational(_need(doc, "primal", "certificate"), "certificate.primal"),
        dual=_rational(_need(doc, "dual", "certificate"), "certificate.dual"),
    )


# ---------------------------------------------------------------------------
# spanners


def spanner_to_json(result, certificates: dict | None = None) -> dict:
    return {
        "H": _edge_list(result.h),
        "T": _edge_list(result.tree),
        "A1": [list(e) for e in result.a1],
        "A2": [list(e) for e in result.a2],
        "arcs": [list(a) for a in result.arcs],
        "g": result.g,
        "L": result.L,
        "max_outdeg": max(result.max_outdeg_trace, default=0),
        "certificates": certificates or {},
    }

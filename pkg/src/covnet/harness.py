"""Artifact verification and seeded batch runs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any

from .errors import CovnetError, InstanceError, InvalidSolutionError, OracleLimitError
from .generate import GeneratorSpec, generate_instance
from .graph import Instance, edge_key, laminar_cost, load_cost
from .io import certificate_from_json, solution_from_json
from .laminar import (
    LaminarCertificate,
    check_dual_feasibility,
    disconnected_groups,
    forest_violations,
    solve_laminar,
)
from .oracle import OracleLimits, exact_coverage_optimum
from .spanner import SpannerResult, build_group_spanner, certify_spanner, depth_bound, make_uniform
from .sunflower import solve_sunflower


@dataclass
class Report:
    checks: list[dict] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append({"name": name, "passed": bool(ok), "detail": detail})
        return ok

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": self.checks}


def _optimum(instance: Instance, limits: OracleLimits) -> Fraction | None:
    try:
        return exact_coverage_optimum(instance, limits)[1]
    except OracleLimitError:
        return None


def verify_certificate(instance: Instance, cert: LaminarCertificate, report: Report | None = None) -> Report:
    report = report or Report()
    if not report.add("demand sets match instance", cert.demand_sets == instance.demand_sets,
                      f"{len(cert.demand_sets)} in certificate, {len(instance.demand_sets)} in instance"):
        return report
    violations = check_dual_feasibility(instance, cert.duals)
    detail = "; ".join(
        f"{v.kind} violation: demand {v.demand}"
        + (f", edge {list(v.edge)}: {v.lhs} > {v.rhs}" if v.edge else f", cut {list(v.cut or ())}")
        for v in violations[:5])
    report.add("dual feasibility", not violations, detail or f"{len(cert.duals)} duals")
    forests = dict(enumerate(cert.forests))
    bad = disconnected_groups(instance, forests)
    report.add("primal feasibility", not bad,
               "; ".join(f"group {j} disconnected" for j in bad) or "all groups connected")
    if bad:
        return report
    primal = laminar_cost(instance, cert.forest_map())
    dual = sum((y.value for y in cert.duals), Fraction(0))
    report.add("primal value", primal == cert.primal, f"recomputed {primal}, recorded {cert.primal}")
    report.add("dual value", dual == cert.dual, f"recomputed {dual}, recorded {cert.dual}")
    report.add("primal <= 2 * dual", primal <= 2 * dual, f"{primal} <= 2 * {dual}")
    cyc = forest_violations(instance, forests)
    report.add("nested forests acyclic", not cyc, f"cycles for demand sets {cyc}" if cyc else "")
    return report


def verify_solution(instance: Instance, doc: dict, limits: OracleLimits, report: Report | None = None) -> Report:
    report = report or Report()
    sol, recorded = solution_from_json(doc)
    try:
        cost = load_cost(instance, sol)
    except InvalidSolutionError as exc:
        report.add("primal feasibility", False, str(exc))
        return report
    report.add("primal feasibility", True, "every tree spans its group")
    if recorded is not None:
        report.add("cost", cost == recorded, f"recomputed {cost}, recorded {recorded}")
    if "lower_bound" in doc:
        lb = Fraction(doc["lower_bound"])
        report.add("cost >= lower bound", cost >= lb, f"{cost} >= {lb}")
    if "ratio_bound" in doc:
        bound = Fraction(doc["ratio_bound"])
        opt = _optimum(instance, limits)
        if opt is not None:
            report.add("cost <= ratio_bound * optimum", cost <= bound * opt, f"{cost} <= {bound} * {opt}")
    return report


def verify_spanner(instance: Instance, doc: dict, oracle_limit: int = 6, report: Report | None = None) -> Report:
    report = report or Report()
    groups = [grp.terminals for grp in instance.groups]
    arcs = tuple(tuple(a) for a in doc.get("arcs", []))
    out: dict[int, int] = {}
    for x, _ in arcs:
        out[x] = out.get(x, 0) + 1
    result = SpannerResult(
        h=frozenset(edge_key(*e) for e in doc["H"]),
        tree=frozenset(edge_key(*e) for e in doc.get("T", [])),
        a1=tuple(edge_key(*e) for e in doc.get("A1", [])),
        a2=tuple(edge_key(*e) for e in doc.get("A2", [])),
        arcs=arcs,
        g=len(groups),
        L=int(doc.get("L", depth_bound(len(groups)))),
        covers=instance.covers_vertices(),
        max_outdeg_trace=(max(out.values(), default=0),),
        uniform=make_uniform(instance.graph, groups),
    )
    report.add("L matches group count", result.L == depth_bound(len(groups)), f"L = {result.L}")
    report.add("H = T + A1 + A2", result.h == result.tree | set(result.a1) | set(result.a2), f"|H| = {len(result.h)}")
    for c in certify_spanner(result, instance.graph, groups, oracle_limit)["checks"]:
        report.add(c["name"], c["passed"], c["detail"])
    return report


def verify(instance: Instance, doc: dict, certificate: dict | None = None,
           limits: OracleLimits | None = None, oracle_limit: int = 6) -> Report:
    """Run every checker that applies to the artifact's shape."""
    limits = limits or OracleLimits.from_env()
    report = Report()
    if not isinstance(doc, dict):
        raise InstanceError("artifact: expected a JSON object")
    if "duals" in doc:
        verify_certificate(instance, certificate_from_json(doc), report)
    elif "H" in doc:
        verify_spanner(instance, doc, oracle_limit, report)
    elif "trees" in doc:
        verify_solution(instance, doc, limits, report)
    else:
        raise InstanceError("artifact: expected a solution (trees), certificate (duals) or spanner (H)")
    if certificate is not None:
        verify_certificate(instance, certificate_from_json(certificate), report)
    return report


# ---------------------------------------------------------------------------
# batch


COLUMNS = ["id", "kind", "n", "m", "g", "cost", "bound", "optimum", "ratio", "ratio_bound", "status", "note"]


def run_row(spec: GeneratorSpec, limits: OracleLimits, bound: str = "auto") -> dict[str, Any]:
    """Generate, solve, consult the oracle when in limits, verify. Never raises."""
    row: dict[str, Any] = {"id": f"{spec.kind}-{spec.seed}", "kind": spec.kind, "n": spec.n, "m": "", "g": spec.g}
    try:
        inst = generate_instance(spec)
        row.update(m=inst.graph.m, g=inst.g)
        report = Report()
        if spec.kind == "laminar":
            sol, cert = solve_laminar(inst)
            cost = load_cost(inst, sol)
            verify_certificate(inst, cert, report)
            opt = _optimum(inst, limits)
            if opt is not None:
                report.add("primal <= 2 * optimum", cert.primal <= 2 * opt, f"{cert.primal} <= 2 * {opt}")
            row.update(cost=cost, bound=cert.dual, optimum=opt, ratio_bound=2,
                       ratio=cost / opt if opt else cost / cert.dual if cert.dual else "")
        elif spec.kind == "sunflower":
            mode = bound
            if mode == "auto":
                mode = "oracle"
            try:
                res = solve_sunflower(inst, mode, limits)
            except OracleLimitError:
                res = solve_sunflower(inst, "relaxed", limits)
            opt = _optimum(inst, limits)
            report.add("cost = load cost", res.cost == load_cost(inst, res.routing), str(res.cost))
            report.add("cost >= lower bound", res.cost >= res.lower_bound, f"{res.cost} >= {res.lower_bound}")
            if opt is not None:
                report.add("optimum >= lower bound", opt >= res.lower_bound, f"{opt} >= {res.lower_bound}")
                report.add("cost <= ratio_bound * optimum", res.cost <= res.ratio_bound * opt,
                           f"{res.cost} <= {res.ratio_bound} * {opt}")
            cert = certify_spanner(res.spanner, inst.graph, [grp.terminals for grp in inst.groups])
            report.add("spanner certificate", cert["passed"],
                       "; ".join(c["name"] for c in cert["checks"] if not c["passed"]))
            row.update(cost=res.cost, bound=res.lower_bound, optimum=opt, ratio_bound=res.ratio_bound,
                       ratio=res.cost / opt if opt else res.ratio)
        else:
            groups = [grp.terminals for grp in inst.groups]
            res = build_group_spanner(inst.graph, groups)
            cert = certify_spanner(res, inst.graph, groups)
            for c in cert["checks"]:
                report.add(c["name"], c["passed"], c["detail"])
            row.update(cost=len(res.h), bound=len(res.tree), optimum=None, ratio_bound=7,
                       ratio=Fraction(len(res.h), max(len(res.tree), 1)))
        row["status"] = "PASS" if report.passed else "FAILED"
        row["note"] = "; ".join(f"{c['name']}: {c['detail']}" for c in report.checks if not c["passed"])
    except CovnetError as exc:
        row.update(status="FAILED", note=f"{type(exc).__name__}: {exc}")
    return row


def expand_batch(doc: Any) -> list[tuple[GeneratorSpec, str]]:
    """Run-spec: a list of row templates (or ``{"rows": [...]}``); ``count`` seeds each."""
    if doc is None:
        return []
    if isinstance(doc, dict):
        doc = doc.get("rows", [])
    if not isinstance(doc, list):
        raise InstanceError("batch: expected a list of row specs")
    names = {f.name for f in fields(GeneratorSpec)}
    out = []
    for i, row in enumerate(doc):
        if not isinstance(row, dict):
            raise InstanceError(f"batch[{i}]: expected an object")
        unknown = set(row) - names - {"count", "bound"}
        if unknown:
            raise InstanceError(f"batch[{i}]: unknown keys {sorted(unknown)}")
        base = {k: v for k, v in row.items() if k in names}
        base.setdefault("seed", 0)
        for k in range(int(row.get("count", 1))):
            try:
                spec = GeneratorSpec(**{**base, "seed": base["seed"] + k})
            except TypeError as exc:
                raise InstanceError(f"batch[{i}]: {exc}") from None
            out.append((spec, row.get("bound", "auto")))
    return out


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    return str(value)


def batch(doc: Any, limits: OracleLimits | None = None) -> tuple[str, bool]:
    """Run every row; returns (csv text, all passed)."""
    limits = limits or OracleLimits.from_env()
    rows = [run_row(spec, limits, bound) for spec, bound in expand_batch(doc)]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format_cell(row.get(k)) for k in COLUMNS})
    return buf.getvalue(), all(r["status"] == "PASS" for r in rows)

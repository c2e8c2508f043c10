"""Seeded random instances for the three families the solvers handle."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import InstanceError
from .graph import Graph, Instance, edge_key

KINDS = ("laminar", "sunflower", "uniform-pairs")
WEIGHTS = (Fraction(1), Fraction(2), Fraction(3, 2))


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    m: int
    g: int
    depth: int = 2
    seed: int = 0
    model: str = "random"  # "random" or "cycle"
    group_size: int = 3  # max terminals per group (laminar); target for sunflower covers

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InstanceError(f"unknown instance kind {self.kind!r}; pick one of {', '.join(KINDS)}")
        if self.model not in ("random", "cycle"):
            raise InstanceError(f"unknown graph model {self.model!r}")
        if self.n < 2:
            raise InstanceError("need at least 2 vertices")
        if self.model == "random":
            if self.m < self.n - 1:
                raise InstanceError(f"m={self.m} < n-1={self.n - 1}: cannot build a connected graph")
            if self.m > self.n * (self.n - 1) // 2:
                raise InstanceError(f"m={self.m} exceeds the simple-graph maximum for n={self.n}")
        elif self.n < 3:
            raise InstanceError("a cycle needs at least 3 vertices")
        if self.g < 1 and self.kind != "uniform-pairs":
            raise InstanceError("need at least one group")
        if not 0 <= self.seed < 2**64:
            raise InstanceError("seed must fit in 64 bits")
        if self.group_size < 2:
            raise InstanceError("group_size must be at least 2")


def random_graph(rng: random.Random, spec: GeneratorSpec, weighted: bool) -> Graph:
    n = spec.n
    if spec.model == "cycle":
        return Graph.build(n, [(i, (i + 1) % n, 1) for i in range(n)])
    perm = list(range(n))
    rng.shuffle(perm)
    edges = {edge_key(perm[i], perm[rng.randrange(i)]) for i in range(1, n)}
    while len(edges) < spec.m:
        u, v = rng.sample(range(n), 2)
        edges.add(edge_key(u, v))
    return Graph.build(n, [(u, v, rng.randint(1, 5) if weighted else 1) for u, v in sorted(edges)])


def laminar_family(rng: random.Random, packets: list[str], depth: int) -> list[frozenset[str]]:
    """All nodes of a random nesting tree over ``packets``."""
    out = [frozenset(packets)]
    if depth > 0 and len(packets) >= 2:
        parts = rng.randint(2, min(3, len(packets)))
        cuts = sorted(rng.sample(range(1, len(packets)), parts - 1))
        for lo, hi in zip([0] + cuts, cuts + [len(packets)]):
            if rng.random() < 0.8:
                out.extend(laminar_family(rng, packets[lo:hi], depth - 1))
    return list(dict.fromkeys(out))


def _laminar(rng: random.Random, spec: GeneratorSpec) -> Instance:
    graph = random_graph(rng, spec, weighted=True)
    packets = [f"p{i}" for i in range(rng.randint(max(2, spec.depth + 1), 2 * spec.depth + 3))]
    family = laminar_family(rng, packets, spec.depth)
    chosen = rng.sample(family, min(len(family), 4, spec.g))
    demands = chosen + [rng.choice(chosen) for _ in range(spec.g - len(chosen))]
    rng.shuffle(demands)
    used = sorted(set().union(*demands))
    weights = {p: str(rng.choice(WEIGHTS)) for p in used}
    groups = []
    for d in demands:
        size = rng.randint(2, min(spec.group_size, spec.n))
        groups.append((sorted(rng.sample(range(spec.n), size)), sorted(d)))
    return Instance.build(graph, groups, weights)


def _cover_groups(rng: random.Random, n: int, g: int, group_size: int) -> list[list[int]]:
    """``g`` terminal sets of size >= 2 whose union is every vertex."""
    verts = list(range(n))
    rng.shuffle(verts)
    groups: list[set[int]] = [set() for _ in range(g)]
    for i, v in enumerate(verts):
        groups[i % g].add(v)
    for grp in groups:
        while len(grp) < 2:
            grp.add(rng.randrange(n))
        if len(grp) < group_size and rng.random() < 0.5:
            grp.add(rng.randrange(n))
    return [sorted(x) for x in groups]


def _sunflower(rng: random.Random, spec: GeneratorSpec) -> Instance:
    graph = random_graph(rng, spec, weighted=False)
    core = [f"c{i}" for i in range(rng.randint(0, 2))]
    groups = []
    weights = {p: str(rng.choice(WEIGHTS)) for p in core}
    for j, terms in enumerate(_cover_groups(rng, spec.n, spec.g, spec.group_size)):
        petal = [f"q{j}_{i}" for i in range(rng.randint(0 if core else 1, 2))]
        weights.update({p: str(rng.choice(WEIGHTS)) for p in petal})
        groups.append((terms, core + petal))
    return Instance.build(graph, groups, weights)


def _uniform_pairs(rng: random.Random, spec: GeneratorSpec) -> Instance:
    graph = random_graph(rng, spec, weighted=False)
    pairs = [(u, v) for u, v, _ in sorted(graph.edges)]
    if 0 < spec.g < len(pairs):
        picked = sorted(rng.sample(pairs, spec.g))
        covered = {x for e in picked for x in e}
        for e in pairs:
            if not set(e) <= covered and e not in picked:
                picked.append(e)
                covered.update(e)
        pairs = picked
    groups = [(list(e), [f"p{j}"]) for j, e in enumerate(pairs)]
    return Instance.build(graph, groups)


def generate_instance(spec: GeneratorSpec) -> Instance:
    spec.validate()
    rng = random.Random(f"{spec.kind}:{spec.n}:{spec.m}:{spec.g}:{spec.depth}:{spec.model}:{spec.seed}")
    return {"laminar": _laminar, "sunflower": _sunflower, "uniform-pairs": _uniform_pairs}[spec.kind](rng, spec)

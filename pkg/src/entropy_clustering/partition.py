"""Flat clustering of the data graph with per-module volume and cut caches"""

import math
from typing import Dict, List, Sequence, Set

import numpy as np

from .constraints import RelationGraph
from .exceptions import InputError
from .graph import WeightedGraph


class Partition:
    """Disjoint modules covering all vertices.

    Module ids are arbitrary integers; ``volume``, ``cut`` and
    ``relation_cut`` hold V_X, g_X (in G) and g'_X (in G') per module id.
    """

    def __init__(self, assignment: Sequence[int], graph: WeightedGraph, relation: RelationGraph):
        if len(assignment) != graph.n or relation.n != graph.n:
            raise InputError(
                f"Assignment of length {len(assignment)} does not match "
                f"graphs with {graph.n} / {relation.n} vertices"
            )
        self.graph = graph
        self.relation = relation
        self.assignment: List[int] = [int(a) for a in assignment]
        self.members: Dict[int, Set[int]] = {}
        for v, m in enumerate(self.assignment):
            self.members.setdefault(m, set()).add(v)
        self.volume: Dict[int, float] = {}
        self.cut: Dict[int, float] = {}
        self.relation_cut: Dict[int, float] = {}
        self.refresh()

    @classmethod
    def singletons(cls, graph: WeightedGraph, relation: RelationGraph) -> "Partition":
        return cls(range(graph.n), graph, relation)

    def refresh(self) -> None:
        """Recompute every cache from the graphs"""
        self.volume = {m: 0.0 for m in self.members}
        self.cut = {m: 0.0 for m in self.members}
        self.relation_cut = {m: 0.0 for m in self.members}
        for v, m in enumerate(self.assignment):
            self.volume[m] += self.graph.degree[v]
        for cache, source in ((self.cut, self.graph), (self.relation_cut, self.relation)):
            for i, j, w in source.edges():
                a, b = self.assignment[i], self.assignment[j]
                if a != b:
                    cache[a] += w
                    cache[b] += w

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, module: int) -> bool:
        return module in self.members

    def module_ids(self) -> List[int]:
        return sorted(self.members)

    def modules(self) -> List[List[int]]:
        """Vertex lists ordered by their smallest vertex"""
        return sorted(sorted(vs) for vs in self.members.values())

    def labels(self) -> np.ndarray:
        """Compact labels 0..L-1 numbered by smallest member"""
        labels = np.empty(len(self.assignment), dtype=int)
        for k, vs in enumerate(self.modules()):
            labels[vs] = k
        return labels

    def sizes(self) -> List[int]:
        return [len(vs) for vs in self.modules()]

    def merge(self, x: int, y: int, between: float, between_relation: float) -> int:
        """Fold module y into x; between weights are W(X, Y) in G and G'"""
        if x == y or x not in self.members or y not in self.members:
            raise KeyError(f"Cannot merge modules {x} and {y}")
        for v in self.members[y]:
            self.assignment[v] = x
        self.members[x] |= self.members.pop(y)
        self.volume[x] += self.volume.pop(y)
        self.cut[x] += self.cut.pop(y) - 2.0 * between
        self.relation_cut[x] += self.relation_cut.pop(y) - 2.0 * between_relation
        return x

    def move(self, v: int, target: int, links: Dict[int, List[float]]) -> None:
        """Move v into an existing module.

        ``links`` maps module id -> [W(v, module), W'(v, module)] over v's
        neighbors, with v itself excluded.
        """
        source = self.assignment[v]
        if target == source:
            return
        if target not in self.members:
            raise KeyError(f"Unknown module {target}")
        d, rd = self.graph.degree[v], self.relation.degree[v]
        w_src, r_src = links.get(source, (0.0, 0.0))
        w_dst, r_dst = links.get(target, (0.0, 0.0))

        self.members[source].discard(v)
        if self.members[source]:
            self.volume[source] -= d
            self.cut[source] += 2.0 * w_src - d
            self.relation_cut[source] += 2.0 * r_src - rd
        else:
            del self.members[source], self.volume[source], self.cut[source], self.relation_cut[source]

        self.members[target].add(v)
        self.assignment[v] = target
        self.volume[target] += d
        self.cut[target] += d - 2.0 * w_dst
        self.relation_cut[target] += rd - 2.0 * r_dst

    def check_invariants(self, tolerance: float = 1e-9) -> None:
        """Raise AssertionError when modules or caches are inconsistent"""
        covered = set()
        for m, vs in self.members.items():
            assert vs, f"module {m} is empty"
            assert not covered & vs, f"module {m} overlaps another module"
            covered |= vs
            assert all(self.assignment[v] == m for v in vs), f"assignment disagrees with module {m}"
        assert covered == set(range(self.graph.n)), "modules do not cover all vertices"

        fresh = Partition(self.assignment, self.graph, self.relation)
        for name in ("volume", "cut", "relation_cut"):
            ours, theirs = getattr(self, name), getattr(fresh, name)
            for m in self.members:
                assert math.isclose(ours[m], theirs[m], rel_tol=tolerance, abs_tol=tolerance), (
                    f"{name} cache of module {m}: {ours[m]} != {theirs[m]}"
                )

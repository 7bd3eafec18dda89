"""Prior knowledge: pairwise and label constraints and the signed relation graph"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, Hashable, Iterable, List, Set, Tuple, Union

import numpy as np

from .exceptions import ConstraintConflictError, InputError
from .graph import SparseGraph

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]
LabelConstraint = Tuple[int, Hashable]

CONSTRAINT_KINDS = ("pairwise", "label")
# pairwise sampling enumerates candidates below this many admissible pairs
_ENUMERATION_LIMIT = 200_000


def _pair(i: int, j: int) -> Pair:
    i, j = int(i), int(j)
    return (i, j) if i < j else (j, i)


class RelationGraph(SparseGraph):
    """Constraint graph G': signed weights over the data graph's vertices"""

    allow_negative = True


@dataclass
class ConstraintSet:
    """Must-link, cannot-link, positive-label and negative-label constraints"""
    must_link: Set[Pair] = field(default_factory=set)
    cannot_link: Set[Pair] = field(default_factory=set)
    positive_labels: Set[LabelConstraint] = field(default_factory=set)
    negative_labels: Set[LabelConstraint] = field(default_factory=set)

    def __post_init__(self):
        for name in ("must_link", "cannot_link"):
            pairs = set()
            for i, j in getattr(self, name):
                if i == j:
                    raise InputError(f"Pair constraint on a single vertex: ({i}, {j})")
                pairs.add(_pair(i, j))
            setattr(self, name, pairs)
        self.positive_labels = {(int(v), y) for v, y in self.positive_labels}
        self.negative_labels = {(int(v), y) for v, y in self.negative_labels}

        shared = self.must_link & self.cannot_link
        if shared:
            pair = min(shared)
            raise ConstraintConflictError(f"Pair {pair} is both must-link and cannot-link", pair)
        shared_labels = self.positive_labels & self.negative_labels
        if shared_labels:
            v, y = min(shared_labels, key=repr)
            raise ConstraintConflictError(f"Vertex {v} is both in and not in label {y!r}")

    def __len__(self) -> int:
        return (len(self.must_link) + len(self.cannot_link)
                + len(self.positive_labels) + len(self.negative_labels))

    def is_empty(self) -> bool:
        return len(self) == 0

    def vertices(self) -> Set[int]:
        found = {v for pair in self.must_link | self.cannot_link for v in pair}
        found |= {v for v, _ in self.positive_labels | self.negative_labels}
        return found

    def check_vertices(self, n: int) -> None:
        outside = [v for v in self.vertices() if not 0 <= v < n]
        if outside:
            raise InputError(f"Constraint references vertex {min(outside)} outside 0..{n - 1}")


@dataclass(frozen=True)
class WeightPolicy:
    """Constraint strengths derived from the similarity extrema"""
    max_similarity: float
    min_similarity: float
    rho: float

    @classmethod
    def from_counts(cls, sim: np.ndarray, n_must: int, n_cannot: int) -> "WeightPolicy":
        n = sim.shape[0]
        off = sim[~np.eye(n, dtype=bool)]
        # ratio is undefined when one sign class is empty
        rho = n_must / n_cannot if n_must and n_cannot else 1.0
        return cls(float(off.max()), float(off.min()), rho)

    def gamma_m(self, w: float) -> float:
        return self.max_similarity - w

    def gamma_c(self, w: float) -> float:
        return self.rho * (self.min_similarity - w)


def labels_to_pairwise(
    positive: Iterable[LabelConstraint],
    negative: Iterable[LabelConstraint] = (),
) -> Tuple[Set[Pair], Set[Pair]]:
    """Convert label constraints into must-link and cannot-link pairs"""
    must: Set[Pair] = set()
    cannot: Set[Pair] = set()

    members: Dict[Hashable, Set[int]] = defaultdict(set)
    for v, y in positive:
        members[y].add(int(v))
    labels = sorted(members, key=repr)

    for y in labels:
        for i, j in combinations(sorted(members[y]), 2):
            must.add(_pair(i, j))
    for a, b in combinations(labels, 2):
        for i in members[a]:
            for j in members[b]:
                if i != j:
                    cannot.add(_pair(i, j))
    for v, y in negative:
        for i in members.get(y, ()):
            if i != v:
                cannot.add(_pair(i, v))
    # two negatives on the same label say nothing about the pair
    return must, cannot


class UnionFind:
    """Disjoint sets over vertex ids with path compression and union by rank"""

    def __init__(self):
        self.parent: Dict[int, int] = {}
        self.rank: Dict[int, int] = {}

    def find(self, i: int) -> int:
        if i not in self.parent:
            self.parent[i] = i
            self.rank[i] = 0
            return i
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1

    def components(self) -> Dict[int, List[int]]:
        groups: Dict[int, List[int]] = defaultdict(list)
        for v in sorted(self.parent):
            groups[self.find(v)].append(v)
        return dict(groups)


def _close_once(must: Set[Pair], cannot: Set[Pair]) -> Tuple[Set[Pair], Set[Pair]]:
    uf = UnionFind()
    for i, j in must:
        uf.union(i, j)

    closed_must: Set[Pair] = set()
    groups = uf.components()
    for members in groups.values():
        closed_must.update(combinations(members, 2))

    def component(v: int) -> List[int]:
        return groups[uf.find(v)] if v in uf.parent else [v]

    closed_cannot: Set[Pair] = set()
    for b, c in sorted(cannot):
        if b in uf.parent and c in uf.parent and uf.find(b) == uf.find(c):
            raise ConstraintConflictError(
                f"Cannot-link ({b}, {c}) joins two must-linked vertices", (b, c)
            )
        for i in component(b):
            for j in component(c):
                closed_cannot.add(_pair(i, j))
    return closed_must, closed_cannot


def closure(must: Iterable[Pair], cannot: Iterable[Pair]) -> Tuple[Set[Pair], Set[Pair]]:
    """Transitive closure of must-links followed by cannot-link entailment"""
    must = {_pair(i, j) for i, j in must}
    cannot = {_pair(i, j) for i, j in cannot}
    shared = must & cannot
    if shared:
        pair = min(shared)
        raise ConstraintConflictError(f"Pair {pair} is both must-link and cannot-link", pair)

    closed_must, closed_cannot = _close_once(must, cannot)
    conflict = closed_must & closed_cannot
    if conflict:
        pair = min(conflict)
        raise ConstraintConflictError(f"Closure puts pair {pair} in both sets", pair)

    again_must, again_cannot = _close_once(closed_must, closed_cannot)
    if again_must != closed_must or again_cannot != closed_cannot:
        raise ConstraintConflictError("Constraint closure did not reach a fixed point")

    logger.debug(
        f"Closure: {len(must)} -> {len(closed_must)} must-link, "
        f"{len(cannot)} -> {len(closed_cannot)} cannot-link"
    )
    return closed_must, closed_cannot


def build_relation_graph(
    must: Iterable[Pair],
    cannot: Iterable[Pair],
    sim: np.ndarray,
) -> RelationGraph:
    """Weighted signed relation graph from closed constraint sets"""
    n = sim.shape[0]
    must, cannot = sorted(set(must)), sorted(set(cannot))
    if not must and not cannot:
        return RelationGraph.empty(n)

    policy = WeightPolicy.from_counts(sim, len(must), len(cannot))
    weights: Dict[Pair, float] = defaultdict(float)
    for i, j in must:
        weights[(i, j)] += policy.gamma_m(sim[i, j])
    for i, j in cannot:
        weights[(i, j)] += policy.gamma_c(sim[i, j])

    relation = RelationGraph.from_edges(n, weights)
    logger.info(
        f"Relation graph: {len(must)} must-link, {len(cannot)} cannot-link, "
        f"rho={policy.rho:.4f}, {relation.n_edges} nonzero edges"
    )
    return relation


def relation_graph_from_constraints(constraints: ConstraintSet, sim: np.ndarray) -> RelationGraph:
    """Convert labels, close the pairwise sets and build G'"""
    constraints.check_vertices(sim.shape[0])
    must_add, cannot_add = labels_to_pairwise(
        constraints.positive_labels, constraints.negative_labels
    )
    must, cannot = closure(constraints.must_link | must_add, constraints.cannot_link | cannot_add)
    return build_relation_graph(must, cannot, sim)


def _constraint_count(amount: float, n: int) -> int:
    if amount < 0:
        raise InputError(f"Constraint amount must be non-negative, got {amount}")
    # guard against 0.1 * 30 = 3.0000000000000004
    return max(0, math.ceil(amount * n - 1e-9))


def _sample_pairs(labels: np.ndarray, same: bool, count: int, rng: np.random.Generator) -> Set[Pair]:
    n = len(labels)
    _, sizes = np.unique(labels, return_counts=True)
    same_pairs = int(sum(s * (s - 1) // 2 for s in sizes))
    available = same_pairs if same else n * (n - 1) // 2 - same_pairs
    kind = "must-link" if same else "cannot-link"

    if count > available:
        logger.warning(f"Requested {count} {kind} pairs but only {available} exist; capping")
        count = available
    if count == 0:
        return set()

    if available <= _ENUMERATION_LIMIT or count > available // 2:
        rows, cols = np.triu_indices(n, 1)
        admissible = (labels[rows] == labels[cols]) == same
        rows, cols = rows[admissible], cols[admissible]
        picked = rng.choice(len(rows), size=count, replace=False)
        return {_pair(rows[k], cols[k]) for k in sorted(picked.tolist())}

    chosen: Set[Pair] = set()
    while len(chosen) < count:
        i, j = rng.integers(0, n, size=2)
        if i != j and (labels[i] == labels[j]) == same:
            chosen.add(_pair(i, j))
    return chosen


def generate_constraints(labels, kind: str, amount: float, seed: int) -> ConstraintSet:
    """
    Sample constraints from ground-truth labels, deterministic given seed

    Args:
        labels: One ground-truth label per vertex
        kind: "pairwise" for must-link/cannot-link, "label" for positive/negative labels
        amount: Fraction of n drawn per constraint type
        seed: Seed for the random generator

    Returns:
        The sampled constraint set
    """
    labels = np.asarray(labels)
    n = len(labels)
    if kind not in CONSTRAINT_KINDS:
        raise InputError(f"Unknown constraint kind: {kind}")
    count = _constraint_count(amount, n)
    rng = np.random.default_rng(seed)

    if kind == "pairwise":
        must = _sample_pairs(labels, True, count, rng)
        cannot = _sample_pairs(labels, False, count, rng)
        logger.info(f"Generated {len(must)} must-link and {len(cannot)} cannot-link constraints")
        return ConstraintSet(must_link=must, cannot_link=cannot)

    if count > n:
        logger.warning(f"Requested {count} label constraints for {n} points; capping")
        count = n
    classes = sorted(np.unique(labels).tolist())
    positives = {(int(v), labels[v].item()) for v in rng.choice(n, size=count, replace=False)}

    negatives: Set[LabelConstraint] = set()
    if len(classes) < 2:
        if count:
            logger.warning("Only one class present; no negative-label constraint is possible")
    else:
        for v in rng.choice(n, size=count, replace=False).tolist():
            wrong = [c for c in classes if c != labels[v]]
            negatives.add((int(v), wrong[int(rng.integers(len(wrong)))]))
    logger.info(f"Generated {len(positives)} positive and {len(negatives)} negative label constraints")
    return ConstraintSet(positive_labels=positives, negative_labels=negatives)


def _parse_label(token: str) -> Union[int, str]:
    try:
        return int(token)
    except ValueError:
        return token


def parse_constraints(text: str, source: str = "<string>") -> ConstraintSet:
    """Parse `ML i j`, `CL i j`, `PL i label`, `NL i label` lines"""
    must, cannot, positive, negative = set(), set(), set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("ML", "CL", "PL", "NL"):
            raise InputError(f"{source}:{lineno}: cannot parse constraint line {raw!r}")
        tag, first, second = parts
        try:
            v = int(first)
            other = int(second) if tag in ("ML", "CL") else _parse_label(second)
        except ValueError:
            raise InputError(f"{source}:{lineno}: vertex indices must be integers")
        target = {"ML": must, "CL": cannot, "PL": positive, "NL": negative}[tag]
        target.add((v, other))
    return ConstraintSet(must, cannot, positive, negative)


def format_constraints(constraints: ConstraintSet) -> str:
    lines = [f"ML {i} {j}" for i, j in sorted(constraints.must_link)]
    lines += [f"CL {i} {j}" for i, j in sorted(constraints.cannot_link)]
    lines += [f"PL {v} {y}" for v, y in sorted(constraints.positive_labels, key=lambda c: (c[0], str(c[1])))]
    lines += [f"NL {v} {y}" for v, y in sorted(constraints.negative_labels, key=lambda c: (c[0], str(c[1])))]
    return "".join(line + "\n" for line in lines)


def read_constraints(path: Path) -> ConstraintSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"Cannot read constraint file {path}: {e}")
    return parse_constraints(text, str(path))


def write_constraints(constraints: ConstraintSet, path: Path) -> Path:
    path = Path(path)
    path.write_text(format_constraints(constraints), encoding="utf-8")
    logger.info(f"Wrote {len(constraints)} constraints to {path}")
    return path

"""Slow, independent reference implementations used to check the fast paths.

Nothing in this module calls into the optimizers, the incremental caches or
the constraint closure it is compared against; it works on dense matrices
and plain dicts.
"""

from typing import Callable, Dict, Iterable, Iterator, List, Optional, Set, Tuple, TypeVar

import numpy as np

from .exceptions import ConstraintConflictError, OracleLimitError

State = TypeVar("State")

MAX_BRUTE_FORCE_VERTICES = 10


def _dense(graph) -> np.ndarray:
    return np.asarray(graph.matrix.toarray(), dtype=float)


def _plogq(p: float, q: float) -> float:
    return 0.0 if p == 0 or q <= 0 else p * np.log2(q)


def reference_objective(weights: np.ndarray, relation: np.ndarray, labels, phi: float) -> float:
    """Partition objective evaluated directly on dense adjacency matrices"""
    labels = np.asarray(labels)
    degree = weights.sum(axis=1)
    vg = degree.sum()
    if vg == 0:
        return 0.0

    total = 0.0
    for module in np.unique(labels):
        inside = labels == module
        vx = degree[inside].sum()
        gx = weights[np.ix_(inside, ~inside)].sum()
        rx = relation[np.ix_(inside, ~inside)].sum()
        for d in degree[inside]:
            total -= _plogq(d / vg, d / vx) if vx > 0 else 0.0
        if vx > 0:
            total -= _plogq(gx / vg, vx / vg)
            total -= phi * _plogq(rx / vg, vx / vg)
    return float(total)


def set_partitions(n: int) -> Iterator[Tuple[int, ...]]:
    """All set partitions of range(n) as restricted-growth strings, lexicographic"""
    if n == 0:
        yield ()
        return
    labels = [0] * n
    while True:
        yield tuple(labels)
        # rightmost position that can still grow
        i = n - 1
        while i > 0 and labels[i] > max(labels[:i]):
            i -= 1
        if i == 0:
            return
        labels[i] += 1
        for j in range(i + 1, n):
            labels[j] = 0


def brute_force_min_2d(graph, relation, phi: float, limit: int = MAX_BRUTE_FORCE_VERTICES):
    """Exhaustive minimum of the partition objective.

    Returns (labels, value); among equal values the lexicographically first
    restricted-growth string wins.
    """
    n = graph.n
    if n > limit:
        raise OracleLimitError(f"Brute force over {n} vertices exceeds the limit of {limit}")
    weights, signed = _dense(graph), _dense(relation)

    best_labels: Optional[Tuple[int, ...]] = None
    best_value = np.inf
    for labels in set_partitions(n):
        value = reference_objective(weights, signed, labels, phi)
        if value < best_value - 1e-12:
            best_labels, best_value = labels, value
    return np.array(best_labels, dtype=int), float(best_value)


def recompute_check(
    objective: Callable[[State], float],
    before: State,
    operator: Callable[[State], Optional[State]],
    reported_delta: float,
) -> float:
    """|(L_before - L_after) - reported_delta| for one operator application.

    ``operator`` may mutate ``before`` in place and return None, or return a
    new state.
    """
    value_before = objective(before)
    after = operator(before)
    value_after = objective(before if after is None else after)
    return abs((value_before - value_after) - reported_delta)


def transitive_closure_reference(
    must: Iterable[Tuple[int, int]], cannot: Iterable[Tuple[int, int]]
) -> Tuple[Set[Tuple[int, int]], Set[Tuple[int, int]]]:
    """Closed must-link and cannot-link sets via a plain dict union-find"""
    leader: Dict[int, int] = {}

    def find(v: int) -> int:
        leader.setdefault(v, v)
        while leader[v] != v:
            v = leader[v]
        return v

    must = [tuple(sorted(p)) for p in must]
    cannot = [tuple(sorted(p)) for p in cannot]
    if set(must) & set(cannot):
        raise ConstraintConflictError("Pair is both must-link and cannot-link")
    for i, j in must:
        ri, rj = find(i), find(j)
        if ri != rj:
            leader[max(ri, rj)] = min(ri, rj)

    groups: Dict[int, List[int]] = {}
    for v in list(leader):
        groups.setdefault(find(v), []).append(v)

    def group(v: int) -> List[int]:
        return groups[find(v)] if v in leader else [v]

    closed_must = {
        (a, b) for members in groups.values() for a in members for b in members if a < b
    }
    closed_cannot = set()
    for i, j in cannot:
        if i in leader and j in leader and find(i) == find(j):
            raise ConstraintConflictError(f"Cannot-link ({i}, {j}) inside a must-link group")
        for a in group(i):
            for b in group(j):
                closed_cannot.add((min(a, b), max(a, b)))
    return closed_must, closed_cannot

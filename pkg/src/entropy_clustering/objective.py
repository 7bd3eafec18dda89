"""From-scratch structural entropy and constraint-penalty evaluators.

Nothing here reads the incremental caches of a Partition or EncodingTree;
volumes and cuts are recomputed from the graphs on every call, so these
functions double as the reference for the optimizers' deltas. Logs are
base 2, and any term whose volume or cut is zero contributes exactly 0.
"""

import math
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from .constraints import RelationGraph
from .encoding_tree import EncodingTree, crossing_weights
from .graph import WeightedGraph
from .partition import Partition

Labels = Union[Partition, Sequence[int], np.ndarray]


def _xlog(weight: float, ratio_num: float, ratio_den: float) -> float:
    """-weight * log2(num/den) under the 0*log convention"""
    if weight == 0 or ratio_num <= 0 or ratio_den <= 0:
        return 0.0
    return -weight * math.log2(ratio_num / ratio_den)


def _labels(partition: Labels) -> Sequence[int]:
    if isinstance(partition, Partition):
        return partition.assignment
    return [int(x) for x in partition]


def _module_measures(graph, labels: Sequence[int]) -> Dict[int, float]:
    cut: Dict[int, float] = {m: 0.0 for m in labels}
    for i, j, w in graph.edges():
        if labels[i] != labels[j]:
            cut[labels[i]] += w
            cut[labels[j]] += w
    return cut


def _module_volumes(graph: WeightedGraph, labels: Sequence[int]) -> Dict[int, float]:
    volume: Dict[int, float] = {m: 0.0 for m in labels}
    for v, m in enumerate(labels):
        volume[m] += graph.degree[v]
    return volume


def partition_entropy(graph: WeightedGraph, partition: Labels) -> float:
    """Two-level structural entropy of G under a flat partition"""
    vg = graph.total_volume
    if vg == 0:
        return 0.0
    labels = _labels(partition)
    volume = _module_volumes(graph, labels)
    cut = _module_measures(graph, labels)

    total = 0.0
    for v, m in enumerate(labels):
        d = graph.degree[v]
        total += _xlog(d / vg, d, volume[m])
    for m in volume:
        total += _xlog(cut[m] / vg, volume[m], vg)
    return total


def partition_penalty(graph: WeightedGraph, relation: RelationGraph, partition: Labels) -> float:
    """Constraint penalty; violated must-links cost, satisfied cannot-links reward"""
    vg = graph.total_volume
    if vg == 0 or relation.n_edges == 0:
        return 0.0
    labels = _labels(partition)
    volume = _module_volumes(graph, labels)
    relation_cut = _module_measures(relation, labels)
    return sum(_xlog(relation_cut[m] / vg, volume[m], vg) for m in volume)


def partition_objective(
    graph: WeightedGraph, relation: RelationGraph, partition: Labels, phi: float
) -> float:
    return partition_entropy(graph, partition) + phi * partition_penalty(graph, relation, partition)


def _tree_measures(graph: WeightedGraph, tree: EncodingTree) -> Tuple[Dict[int, float], Dict[int, float]]:
    volume: Dict[int, float] = {}
    for node in tree.postorder():
        kids = tree.children[node]
        volume[node] = float(graph.degree[node]) if not kids else sum(volume[c] for c in kids)
    return volume, crossing_weights(tree, graph)


def _vertex_counts(tree: EncodingTree) -> Dict[int, int]:
    count: Dict[int, int] = {}
    for node in tree.postorder():
        kids = tree.children[node]
        count[node] = 1 if not kids else sum(count[c] for c in kids)
    return count


def node_entropy(graph: WeightedGraph, tree: EncodingTree, node: int) -> float:
    """Structural entropy assigned to one non-root tree node"""
    parent = tree.parent[node]
    if parent is None:
        raise ValueError("The root carries no entropy term")
    vg = graph.total_volume
    if vg == 0:
        return 0.0
    members = tree.vertices(node)
    volume = graph.volume(members)
    parent_volume = graph.volume(tree.vertices(parent))
    return _xlog(graph.cut(members) / vg, volume, parent_volume)


def tree_entropy(graph: WeightedGraph, tree: EncodingTree) -> float:
    """Structural entropy of G under an encoding tree"""
    vg = graph.total_volume
    if vg == 0:
        return 0.0
    volume, cut = _tree_measures(graph, tree)
    total = 0.0
    for node, parent in tree.parent.items():
        if parent is not None:
            total += _xlog(cut[node] / vg, volume[node], volume[parent])
    return total


def tree_penalty(graph: WeightedGraph, relation: RelationGraph, tree: EncodingTree) -> float:
    """Constraint penalty over internal nodes holding more than one vertex"""
    vg = graph.total_volume
    if vg == 0 or relation.n_edges == 0:
        return 0.0
    volume, _ = _tree_measures(graph, tree)
    relation_cut = crossing_weights(tree, relation)
    count = _vertex_counts(tree)
    n = tree.n_vertices

    total = 0.0
    for node, parent in tree.parent.items():
        if parent is not None and 1 < count[node] < n:
            total += _xlog(relation_cut[node] / vg, volume[node], volume[parent])
    return total


def tree_objective(
    graph: WeightedGraph, relation: RelationGraph, tree: EncodingTree, phi: float
) -> float:
    return tree_entropy(graph, tree) + phi * tree_penalty(graph, relation, tree)

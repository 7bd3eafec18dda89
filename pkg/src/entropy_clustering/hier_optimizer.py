"""Hierarchical minimization: stretch to a binary tree, compress to height K.

Each non-root node alpha contributes -(G_alpha / V_G) * log2(V_alpha / V_parent)
to the tree objective, with G_alpha = g_alpha + phi * g'_alpha when alpha holds
more than one (and fewer than all) vertices and G_alpha = g_alpha otherwise.
Nodes of zero volume contribute nothing.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from .candidates import CandidateQueue
from .config import Hyperparams
from .constraints import RelationGraph
from .encoding_tree import EncodingTree
from .graph import WeightedGraph
from .objective import tree_objective
from .partition import Partition

logger = logging.getLogger(__name__)

# on_step(kind, delta, tree) with kind in {"stretch", "compress"}
StepHook = Callable[[str, float, EncodingTree], None]


def _penalized(size: int, n: int) -> bool:
    return 1 < size < n


def node_weight(tree: EncodingTree, node: int, phi: float) -> float:
    """G of a node, or 0 when its volume is 0"""
    if tree.volume[node] <= 0:
        return 0.0
    weight = tree.cut[node]
    if _penalized(tree.size[node], tree.n_vertices):
        weight += phi * tree.relation_cut[node]
    return weight


def delta_stretch(
    tree: EncodingTree, a: int, b: int, between: float, between_relation: float, phi: float
) -> float:
    """Objective decrease from inserting a common parent over sisters a and b"""
    vg = tree.volume[tree.root]
    volume = tree.volume[a] + tree.volume[b]
    if vg <= 0 or volume <= 0:
        return 0.0
    gamma = tree.parent[a]
    merged = tree.cut[a] + tree.cut[b] - 2.0 * between
    if _penalized(tree.size[a] + tree.size[b], tree.n_vertices):
        merged += phi * (tree.relation_cut[a] + tree.relation_cut[b] - 2.0 * between_relation)
    numerator = node_weight(tree, a, phi) + node_weight(tree, b, phi) - merged
    return numerator / vg * math.log2(tree.volume[gamma] / volume)


def delta_compress(tree: EncodingTree, node: int, phi: float) -> float:
    """Objective decrease from removing an internal node"""
    vg = tree.volume[tree.root]
    volume = tree.volume[node]
    if vg <= 0 or volume <= 0:
        return 0.0
    gamma = tree.parent[node]
    children = sum(node_weight(tree, c, phi) for c in tree.children[node])
    return (children - node_weight(tree, node, phi)) / vg * math.log2(volume / tree.volume[gamma])


@dataclass
class HierarchyResult:
    """Outcome of minimize_highd"""
    binary_tree: EncodingTree
    tree: EncodingTree
    stretch_trace: List[float] = field(default_factory=list)
    compress_trace: List[float] = field(default_factory=list)

    @property
    def binary_height(self) -> int:
        return self.binary_tree.height

    @property
    def objective(self) -> float:
        return self.compress_trace[-1]


def _root_adjacency(graph: WeightedGraph, relation: RelationGraph) -> Dict[int, Dict[int, List[float]]]:
    adj: Dict[int, Dict[int, List[float]]] = {v: {} for v in range(graph.n)}
    for slot, source in ((0, graph), (1, relation)):
        for i, j, w in source.edges():
            link = adj[i].get(j)
            if link is None:
                link = [0.0, 0.0]
                adj[i][j] = adj[j][i] = link
            link[slot] += w
    return adj


def stretch_to_binary(
    graph: WeightedGraph,
    relation: RelationGraph,
    phi: float,
    on_step: Optional[StepHook] = None,
):
    """Stretch root children pairwise until the root has two children.

    Connected pairs are preferred; once none is left the remaining root
    children are paired by best gain regardless of connectivity.
    Returns (binary tree, objective trace).
    """
    tree = EncodingTree.flat(graph, relation)
    trace = [tree_objective(graph, relation, tree, phi)]
    adj = _root_adjacency(graph, relation)
    queue = CandidateQueue()

    def push(a: int, b: int) -> None:
        w, wr = adj[a].get(b, (0.0, 0.0))
        queue.push(delta_stretch(tree, a, b, w, wr, phi), a, b)

    for a, row in adj.items():
        for b in row:
            if a < b:
                push(a, b)

    fallback = False
    root = tree.children[tree.root]
    while len(root) > 2:
        best = queue.pop_best()
        if best is None:
            logger.debug(f"No connected root children left; pairing {len(root)} components")
            fallback = True
            for i, a in enumerate(root):
                for b in root[i + 1:]:
                    push(a, b)
            continue
        gain, a, b = best
        w, wr = adj[a].get(b, (0.0, 0.0))
        delta = tree.stretch(a, b, w, wr)
        queue.kill(a)
        queue.kill(b)

        adj[delta] = {}
        for old in (a, b):
            for nb, link in adj.pop(old).items():
                if nb in (a, b):
                    continue
                del adj[nb][old]
                existing = adj[delta].get(nb)
                if existing is None:
                    adj[delta][nb] = adj[nb][delta] = link
                else:
                    existing[0] += link[0]
                    existing[1] += link[1]

        if fallback:
            for nb in root:
                if nb != delta:
                    push(delta, nb)
        else:
            for nb in adj[delta]:
                push(delta, nb)

        trace.append(trace[-1] - gain)
        if on_step is not None:
            on_step("stretch", gain, tree)

    logger.info(f"Stretching finished: binary tree of height {tree.height}, L={trace[-1]:.6f}")
    return tree, trace


def compress_to_height(
    tree: EncodingTree,
    height: int,
    phi: float,
    trace: Optional[List[float]] = None,
    on_step: Optional[StepHook] = None,
) -> int:
    """Remove the best internal node in place until the tree height is at most ``height``.

    The best node is removed even when that raises the objective. Returns
    the number of compressions.
    """
    if height < 1:
        raise ValueError(f"Target height must be at least 1, got {height}")
    queue = CandidateQueue()
    for node in tree.internal_nodes():
        queue.push(delta_compress(tree, node, phi), node)

    steps = 0
    while tree.height > height:
        best = queue.pop_best()
        if best is None:
            raise RuntimeError("Compression queue exhausted above the target height")
        gain, node, _ = best
        gamma = tree.parent[node]
        kids = list(tree.children[node])
        tree.compress(node)
        queue.kill(node)

        touched = [c for c in kids if not tree.is_leaf(c)]
        if gamma != tree.root:
            touched.append(gamma)
        for a in touched:
            queue.invalidate(a)
            queue.push(delta_compress(tree, a, phi), a)

        steps += 1
        if trace is not None:
            trace.append(trace[-1] - gain)
        if on_step is not None:
            on_step("compress", gain, tree)
    return steps


def minimize_highd(
    graph: WeightedGraph,
    relation: RelationGraph,
    hp: Optional[Hyperparams] = None,
    on_step: Optional[StepHook] = None,
) -> HierarchyResult:
    """Build the binary tree, then compress a copy of it down to height K"""
    hp = hp or Hyperparams()
    binary, stretch_trace = stretch_to_binary(graph, relation, hp.phi, on_step)

    tree = binary.copy()
    compress_trace = [stretch_trace[-1]]
    steps = compress_to_height(tree, hp.height, hp.phi, compress_trace, on_step)
    logger.info(
        f"Compressing finished: {steps} nodes removed, height {tree.height}, L={compress_trace[-1]:.6f}"
    )
    return HierarchyResult(
        binary_tree=binary,
        tree=tree,
        stretch_trace=stretch_trace,
        compress_trace=compress_trace,
    )


def extract_partition(
    tree: EncodingTree,
    graph: WeightedGraph,
    relation: Optional[RelationGraph] = None,
    phi: float = 2.0,
    height: int = 2,
) -> Partition:
    """Compress a copy of the tree to ``height`` and partition by root children"""
    relation = relation if relation is not None else RelationGraph.empty(graph.n)
    work = tree.copy()
    work.refresh_caches(graph, relation)
    compress_to_height(work, height, phi)
    return Partition(work.root_partition(), graph, relation)

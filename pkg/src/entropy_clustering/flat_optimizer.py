"""Flat (height-2) minimization of the constrained structural entropy.

The objective of a partition can be written as a constant plus
(1/V_G) * sum over modules of h(X), where

    h(X) = (V_X - g_X - phi * g'_X) * log2(V_X / V_G),    h = 0 when V_X = 0,

so every merge or move changes only the h terms of the modules it touches.
All deltas below are decreases of the objective (positive means better).
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from .candidates import CandidateQueue
from .config import Hyperparams
from .constraints import RelationGraph
from .encoding_tree import EncodingTree
from .graph import WeightedGraph
from .objective import partition_objective
from .partition import Partition

logger = logging.getLogger(__name__)

# on_step(kind, delta, partition) with kind in {"merge", "move"}
StepHook = Callable[[str, float, Partition], None]


def module_term(volume: float, cut: float, relation_cut: float, total_volume: float, phi: float) -> float:
    if volume <= 0 or total_volume <= 0:
        return 0.0
    return (volume - cut - phi * relation_cut) * math.log2(volume / total_volume)


def _term(partition: Partition, module: int, phi: float) -> float:
    return module_term(
        partition.volume[module],
        partition.cut[module],
        partition.relation_cut[module],
        partition.graph.total_volume,
        phi,
    )


def delta_merge(
    partition: Partition, x: int, y: int, between: float, between_relation: float, phi: float
) -> float:
    """Objective decrease from merging modules x and y.

    ``between`` and ``between_relation`` are the total edge weights joining
    the two modules in G and G'.
    """
    vg = partition.graph.total_volume
    if vg <= 0:
        return 0.0
    merged = module_term(
        partition.volume[x] + partition.volume[y],
        partition.cut[x] + partition.cut[y] - 2.0 * between,
        partition.relation_cut[x] + partition.relation_cut[y] - 2.0 * between_relation,
        vg,
        phi,
    )
    return (_term(partition, x, phi) + _term(partition, y, phi) - merged) / vg


def vertex_links(partition: Partition, v: int) -> Dict[int, List[float]]:
    """module -> [W(v, module), W'(v, module)] over v's neighbors in G and G'"""
    links: Dict[int, List[float]] = defaultdict(lambda: [0.0, 0.0])
    for j, w in partition.graph.neighbors(v):
        links[partition.assignment[j]][0] += w
    for j, w in partition.relation.neighbors(v):
        links[partition.assignment[j]][1] += w
    return dict(links)


def delta_remove(partition: Partition, v: int, links: Dict[int, List[float]], phi: float) -> float:
    """Objective decrease attributed to taking v out of its module"""
    vg = partition.graph.total_volume
    if vg <= 0:
        return 0.0
    x = partition.assignment[v]
    w, wr = links.get(x, (0.0, 0.0))
    d, rd = partition.graph.degree[v], partition.relation.degree[v]
    if len(partition.members[x]) == 1:
        rest = 0.0
    else:
        rest = module_term(
            partition.volume[x] - d,
            partition.cut[x] + 2.0 * w - d,
            partition.relation_cut[x] + 2.0 * wr - rd,
            vg,
            phi,
        )
    return (_term(partition, x, phi) - rest) / vg


def delta_insert(
    partition: Partition, y: int, v: int, links: Dict[int, List[float]], phi: float
) -> float:
    """Objective increase attributed to putting v into module y"""
    vg = partition.graph.total_volume
    if vg <= 0:
        return 0.0
    w, wr = links.get(y, (0.0, 0.0))
    d, rd = partition.graph.degree[v], partition.relation.degree[v]
    grown = module_term(
        partition.volume[y] + d,
        partition.cut[y] + d - 2.0 * w,
        partition.relation_cut[y] + rd - 2.0 * wr,
        vg,
        phi,
    )
    return (grown - _term(partition, y, phi)) / vg


@dataclass
class FlatResult:
    """Outcome of minimize_2d"""
    partition: Partition
    tree: EncodingTree
    trace: List[float] = field(default_factory=list)
    converged: bool = True
    merges: int = 0
    moves: int = 0
    sweeps: int = 0

    @property
    def objective(self) -> float:
        return self.trace[-1]


def _module_adjacency(partition: Partition) -> Dict[int, Dict[int, List[float]]]:
    """Shared [W, W'] link per connected module pair, stored under both ends"""
    adj: Dict[int, Dict[int, List[float]]] = {m: {} for m in partition.members}
    for slot, source in ((0, partition.graph), (1, partition.relation)):
        for i, j, w in source.edges():
            a, b = partition.assignment[i], partition.assignment[j]
            if a == b:
                continue
            link = adj[a].get(b)
            if link is None:
                link = [0.0, 0.0]
                adj[a][b] = adj[b][a] = link
            link[slot] += w
    return adj


def merging_stage(
    partition: Partition,
    hp: Hyperparams,
    trace: List[float],
    on_step: Optional[StepHook] = None,
) -> int:
    """Greedily apply the best connected merge while it lowers the objective"""
    adj = _module_adjacency(partition)
    queue = CandidateQueue()
    for a, row in adj.items():
        for b, (w, wr) in row.items():
            if a < b:
                queue.push(delta_merge(partition, a, b, w, wr, hp.phi), a, b)

    merges = 0
    while hp.max_merges is None or merges < hp.max_merges:
        best = queue.pop_best()
        if best is None or best[0] <= hp.tol:
            break
        gain, a, b = best
        # the module with more neighbors survives and absorbs the other
        if len(adj[b]) > len(adj[a]):
            keep, gone = b, a
        else:
            keep, gone = a, b
        w, wr = adj[keep][gone]
        partition.merge(keep, gone, w, wr)

        del adj[keep][gone]
        for nb, link in adj.pop(gone).items():
            if nb == keep:
                continue
            del adj[nb][gone]
            existing = adj[keep].get(nb)
            if existing is None:
                adj[keep][nb] = adj[nb][keep] = link
            else:
                existing[0] += link[0]
                existing[1] += link[1]

        queue.kill(gone)
        queue.invalidate(keep)
        for nb, (w, wr) in adj[keep].items():
            queue.push(delta_merge(partition, keep, nb, w, wr, hp.phi), keep, nb)

        merges += 1
        trace.append(trace[-1] - gain)
        logger.debug(f"Merged module {gone} into {keep} (gain {gain:.6g})")
        if on_step is not None:
            on_step("merge", gain, partition)
    return merges


def moving_stage(
    partition: Partition,
    hp: Hyperparams,
    trace: List[float],
    on_step: Optional[StepHook] = None,
):
    """Sweep vertices in index order, moving each to its best neighboring module.

    Returns (moves, sweeps, converged).
    """
    moves = 0
    for sweep in range(1, hp.t_max + 1):
        moved = 0
        for v in range(partition.graph.n):
            source = partition.assignment[v]
            links = vertex_links(partition, v)
            removal = delta_remove(partition, v, links, hp.phi)
            best_gain, target = hp.tol, None
            for y in sorted(links):
                if y == source:
                    continue
                gain = removal - delta_insert(partition, y, v, links, hp.phi)
                if gain > best_gain:
                    best_gain, target = gain, y
            if target is None:
                continue
            partition.move(v, target, links)
            moved += 1
            trace.append(trace[-1] - best_gain)
            if on_step is not None:
                on_step("move", best_gain, partition)
        moves += moved
        logger.debug(f"Sweep {sweep}: {moved} moves")
        if moved == 0:
            return moves, sweep, True
    return moves, hp.t_max, False


def minimize_2d(
    graph: WeightedGraph,
    relation: RelationGraph,
    hp: Optional[Hyperparams] = None,
    on_step: Optional[StepHook] = None,
) -> FlatResult:
    """
    Merge singletons greedily, then refine by single-vertex moves

    Args:
        graph: Data graph
        relation: Signed relation graph, empty for unsupervised runs
        hp: Optimizer knobs, defaults when None
        on_step: Called after every merge and move

    Returns:
        FlatResult with the partition, its height-2 tree and the objective trace
    """
    hp = hp or Hyperparams()
    partition = Partition.singletons(graph, relation)
    trace = [partition_objective(graph, relation, partition, hp.phi)]

    merges = merging_stage(partition, hp, trace, on_step)
    logger.info(f"Merging finished: {merges} merges, {len(partition)} modules, L={trace[-1]:.6f}")

    moves, sweeps, converged = 0, 0, True
    if hp.moving:
        moves, sweeps, converged = moving_stage(partition, hp, trace, on_step)
        if not converged:
            logger.warning(f"Moving stage stopped after {hp.t_max} sweeps without converging")
        logger.info(f"Moving finished: {moves} moves in {sweeps} sweeps, L={trace[-1]:.6f}")

    return FlatResult(
        partition=partition,
        tree=EncodingTree.from_modules(partition.modules(), graph, relation),
        trace=trace,
        converged=converged,
        merges=merges,
        moves=moves,
        sweeps=sweeps,
    )

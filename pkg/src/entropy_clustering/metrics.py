"""External clustering quality indices: ARI, NMI and dendrogram purity"""

import logging
import math
from collections import Counter
from typing import Dict

import numpy as np
import scipy.sparse as sp
from scipy.special import comb

from .encoding_tree import EncodingTree
from .exceptions import InputError

logger = logging.getLogger(__name__)


def _check_pair(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.ndim != 1 or truth.ndim != 1:
        raise InputError("Labelings must be 1-dimensional")
    if pred.shape[0] != truth.shape[0]:
        raise InputError(f"Labelings differ in length: {pred.shape[0]} vs {truth.shape[0]}")
    if pred.shape[0] == 0:
        raise InputError("Labelings are empty")
    return pred, truth


def contingency_matrix(truth, pred) -> np.ndarray:
    """Counts of samples per (true class, predicted cluster)"""
    _, class_idx = np.unique(truth, return_inverse=True)
    _, cluster_idx = np.unique(pred, return_inverse=True)
    return sp.coo_matrix(
        (np.ones(class_idx.shape[0], dtype=np.int64), (class_idx, cluster_idx)),
        shape=(class_idx.max() + 1, cluster_idx.max() + 1),
    ).toarray()


def ari(pred, truth) -> float:
    """Adjusted Rand index (Hubert-Arabie)"""
    pred, truth = _check_pair(pred, truth)
    table = contingency_matrix(truth, pred)
    n = table.sum()

    sum_cells = comb(table, 2).sum()
    sum_rows = comb(table.sum(axis=1), 2).sum()
    sum_cols = comb(table.sum(axis=0), 2).sum()
    expected = sum_rows * sum_cols / comb(n, 2) if n > 1 else 0.0
    maximum = (sum_rows + sum_cols) / 2.0
    if maximum == expected:
        # both labelings are one cluster, or both are all singletons
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))


def _entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(float)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth) -> float:
    """Mutual information normalized by the geometric mean of the entropies"""
    pred, truth = _check_pair(pred, truth)
    table = contingency_matrix(truth, pred).astype(float)
    h_true = _entropy(table.sum(axis=1))
    h_pred = _entropy(table.sum(axis=0))
    if h_true == 0 and h_pred == 0:
        return 1.0
    if h_true == 0 or h_pred == 0:
        return 0.0

    n = table.sum()
    rows, cols = np.nonzero(table)
    cells = table[rows, cols]
    outer = table.sum(axis=1)[rows] * table.sum(axis=0)[cols]
    mi = float((cells / n * (np.log(cells * n) - np.log(outer))).sum())
    mi = max(mi, 0.0)
    return min(mi / math.sqrt(h_true * h_pred), 1.0)


def dendrogram_purity(tree: EncodingTree, truth) -> float:
    """Mean purity of the LCA over all same-class leaf pairs.

    Pairs meeting at a node are counted directly from per-class leaf counts,
    so the result is exact without enumerating pairs.
    """
    truth = np.asarray(truth)
    if truth.ndim != 1 or truth.shape[0] != tree.n_vertices:
        raise InputError(
            f"Tree has {tree.n_vertices} leaves but {truth.shape[0]} labels were given"
        )
    _, classes = np.unique(truth, return_inverse=True)

    total_pairs = sum(math.comb(int(c), 2) for c in np.bincount(classes))
    if total_pairs == 0:
        logger.warning("No class has two members; dendrogram purity is 1 by convention")
        return 1.0

    counts: Dict[int, Counter] = {}
    score = 0.0
    for node in tree.postorder():
        kids = tree.children[node]
        if not kids:
            counts[node] = Counter({int(classes[node]): 1})
            continue
        here: Counter = Counter()
        for child in kids:
            here.update(counts[child])
        size = sum(here.values())
        for label, count in here.items():
            pairs = math.comb(count, 2) - sum(math.comb(counts[c].get(label, 0), 2) for c in kids)
            if pairs:
                score += pairs * count / size
        for child in kids:
            del counts[child]
        counts[node] = here
    return score / total_pairs

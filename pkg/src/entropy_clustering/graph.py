"""Data graph construction and the volume/cut primitives"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import pdist, squareform

from .exceptions import InputError

logger = logging.getLogger(__name__)

KERNELS = ("gaussian", "cosine")


@dataclass(frozen=True)
class KernelSpec:
    """Similarity kernel; sigma is only read by the gaussian kernel"""
    kind: str = "gaussian"
    sigma: float = 10.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise InputError(f"Unknown kernel: {self.kind}")
        if not self.sigma > 0:
            raise InputError(f"Kernel width must be positive, got {self.sigma}")


class SparseGraph:
    """Symmetric sparse graph over vertices 0..n-1 without self-loops"""

    allow_negative = False

    def __init__(self, matrix):
        m = sp.csr_matrix(matrix, dtype=float)
        if m.shape[0] != m.shape[1]:
            raise InputError(f"Adjacency matrix must be square, got {m.shape}")
        m.eliminate_zeros()
        m.sort_indices()

        if m.nnz and not np.all(np.isfinite(m.data)):
            raise InputError("Edge weights must be finite")
        if np.any(m.diagonal() != 0):
            raise InputError("Self-loops are not allowed")
        if (m != m.T).nnz:
            raise InputError("Adjacency matrix must be exactly symmetric")
        if not self.allow_negative and m.nnz and m.data.min() < 0:
            raise InputError("Edge weights must be non-negative")

        self.matrix = m
        self.n = m.shape[0]
        self.degree = np.asarray(m.sum(axis=1)).ravel()
        self._rows: Optional[List[List[Tuple[int, float]]]] = None

    @classmethod
    def from_edges(cls, n: int, edges: Mapping[Tuple[int, int], float]):
        """Build from an {(i, j): weight} map; (i, j) and (j, i) accumulate"""
        acc: Dict[Tuple[int, int], float] = {}
        for (i, j), w in edges.items():
            if i == j:
                raise InputError(f"Self-loop on vertex {i}")
            key = (min(i, j), max(i, j))
            acc[key] = acc.get(key, 0.0) + float(w)
        rows, cols, data = [], [], []
        for (i, j), w in acc.items():
            rows += [i, j]
            cols += [j, i]
            data += [w, w]
        return cls(sp.csr_matrix((data, (rows, cols)), shape=(n, n)))

    @classmethod
    def empty(cls, n: int):
        return cls(sp.csr_matrix((n, n), dtype=float))

    @property
    def n_edges(self) -> int:
        return self.matrix.nnz // 2

    def neighbors(self, i: int) -> List[Tuple[int, float]]:
        """(neighbor, weight) pairs of vertex i, ascending by neighbor"""
        if self._rows is None:
            indptr, indices, data = self.matrix.indptr, self.matrix.indices, self.matrix.data
            self._rows = [
                list(zip(indices[indptr[r]:indptr[r + 1]].tolist(),
                         data[indptr[r]:indptr[r + 1]].tolist()))
                for r in range(self.n)
            ]
        return self._rows[i]

    def weight(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        """Each undirected edge once, as (i, j, w) with i < j"""
        coo = self.matrix.tocoo()
        for i, j, w in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
            if i < j:
                yield i, j, w

    def cut(self, vertices: Iterable[int]) -> float:
        """Weight sum of edges with exactly one endpoint in the set"""
        inside = set(vertices)
        total = 0.0
        for i in inside:
            for j, w in self.neighbors(i):
                if j not in inside:
                    total += w
        return total

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, edges={self.n_edges})"


class WeightedGraph(SparseGraph):
    """Data graph G: non-negative weights with cached degrees and volume"""

    def __init__(self, matrix):
        super().__init__(matrix)
        self.total_volume = float(self.degree.sum())

    def volume(self, vertices: Iterable[int]) -> float:
        return float(sum(self.degree[i] for i in vertices))


def validate_data(data) -> np.ndarray:
    """Check a feature matrix and return it as a float array"""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise InputError(f"Feature matrix must be 2-dimensional, got shape {x.shape}")
    if x.shape[0] < 2:
        raise InputError(f"Need at least 2 data points, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise InputError(f"Non-finite feature at row {bad[0]}, column {bad[1]}")
    return x


def build_similarity(data, kernel: KernelSpec) -> np.ndarray:
    """Dense symmetric similarity matrix with zero diagonal"""
    x = validate_data(data)
    n = x.shape[0]

    if kernel.kind == "gaussian":
        sq = squareform(pdist(x, "sqeuclidean"))
        sim = np.exp(-sq / (2.0 * kernel.sigma ** 2))
    else:
        norms = np.linalg.norm(x, axis=1)
        nonzero = np.flatnonzero(norms > 0)
        if len(nonzero) < n:
            logger.warning(
                f"{n - len(nonzero)} zero-norm rows under cosine kernel; "
                f"their similarities are set to 0"
            )
        sim = np.zeros((n, n))
        if len(nonzero) >= 2:
            block = 1.0 - squareform(pdist(x[nonzero], "cosine"))
            sim[np.ix_(nonzero, nonzero)] = np.maximum(block, 0.0)

    np.fill_diagonal(sim, 0.0)
    return sim


def sparsify_knn(sim: np.ndarray, p: int) -> WeightedGraph:
    """
    p-nearest-neighbor graph with union symmetrization

    Args:
        sim: Dense symmetric similarity matrix with zero diagonal
        p: Neighbors kept per vertex, 1 <= p <= n - 1; ties go to the smaller index

    Returns:
        Data graph holding edge (i, j) when either endpoint picked the other
    """
    n = sim.shape[0]
    if not 1 <= p < n:
        raise InputError(f"p must satisfy 1 <= p < n (n={n}), got {p}")

    masked = np.array(sim, dtype=float)
    np.fill_diagonal(masked, -np.inf)
    # stable sort: ties at the p-th rank go to the smaller vertex index
    order = np.argsort(-masked, axis=1, kind="stable")[:, :p]

    rows = np.repeat(np.arange(n), p)
    cols = order.ravel()
    keep = sim[rows, cols] > 0
    rows, cols = rows[keep], cols[keep]

    selected = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    selected = selected.maximum(selected.T).tocoo()
    weights = sim[selected.row, selected.col]
    graph = WeightedGraph(sp.csr_matrix((weights, (selected.row, selected.col)), shape=(n, n)))

    isolated = int(np.sum(graph.degree == 0))
    if isolated:
        logger.warning(f"{isolated} isolated vertices in the {p}-NN graph")
    logger.info(f"Built {p}-NN graph: {graph.n} vertices, {graph.n_edges} edges")
    return graph


def default_p(k: int, n: int) -> int:
    """Neighbor count floor(20k / log2(n)^2) + 1"""
    if k < 1 or n < 2:
        raise InputError(f"default_p needs k >= 1 and n >= 2, got k={k}, n={n}")
    return int(math.floor(20 * k / math.log2(n) ** 2)) + 1

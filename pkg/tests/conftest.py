"""Shared graph fixtures; vertex indices are 0-based"""

import numpy as np
import pytest

from entropy_clustering.constraints import RelationGraph
from entropy_clustering.encoding_tree import EncodingTree
from entropy_clustering.graph import WeightedGraph


def make_graph(n, edges):
    return WeightedGraph.from_edges(n, edges)


def make_relation(n, edges=None):
    return RelationGraph.from_edges(n, edges) if edges else RelationGraph.empty(n)


def random_instance(rng, n_min=4, n_max=30, density=0.3, n_relation=None):
    """Random data graph plus signed relation graph over the same vertices"""
    n = int(rng.integers(n_min, n_max + 1))
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges[(i, j)] = float(rng.uniform(0.05, 1.0))
    if not edges:
        edges[(0, 1)] = 1.0
    relation = {}
    count = int(rng.integers(0, n + 1)) if n_relation is None else n_relation
    for _ in range(count):
        i, j = rng.choice(n, size=2, replace=False).tolist()
        relation[(min(i, j), max(i, j))] = float(rng.uniform(-1.0, 1.0))
    return make_graph(n, edges), make_relation(n, relation)


def random_tree(rng, graph, relation, steps=None):
    """Tree reached from the flat tree by random stretches and compressions"""
    tree = EncodingTree.flat(graph, relation)
    steps = graph.n * 2 if steps is None else steps
    dense = graph.matrix.toarray()
    signed = relation.matrix.toarray()
    for _ in range(steps):
        parents = [a for a in tree.nodes if len(tree.children[a]) >= 2]
        internal = tree.internal_nodes()
        if internal and rng.random() < 0.25:
            tree.compress(internal[int(rng.integers(len(internal)))])
            continue
        gamma = parents[int(rng.integers(len(parents)))]
        a, b = rng.choice(tree.children[gamma], size=2, replace=False).tolist()
        A, B = tree.vertices(a), tree.vertices(b)
        tree.stretch(a, b, dense[np.ix_(A, B)].sum(), signed[np.ix_(A, B)].sum())
    return tree


def between(graph, A, B):
    return float(graph.matrix.toarray()[np.ix_(list(A), list(B))].sum())


@pytest.fixture
def triangle():
    return make_graph(3, {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0})


@pytest.fixture
def path4():
    return make_graph(4, {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0})


@pytest.fixture
def bridged_triangles():
    edges = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0, (3, 4): 1.0, (4, 5): 1.0, (3, 5): 1.0}
    edges[(2, 3)] = 0.1
    return make_graph(6, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

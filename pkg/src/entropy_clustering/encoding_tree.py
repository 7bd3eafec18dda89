"""Encoding trees: rooted hierarchies whose leaves are the graph vertices"""

import copy
import math
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np

from .constraints import RelationGraph
from .exceptions import InputError
from .graph import WeightedGraph


class EncodingTree:
    """Rooted tree with one leaf per vertex.

    Leaves use node ids 0..n-1 (leaf i holds vertex i), the root is n and
    internal nodes get fresh ids above that. Per node the tree caches the
    vertex count, V (volume in G), g (cut in G), g' (cut in G') and the
    height of the subtree below it.
    """

    def __init__(self, n_vertices: int):
        self.n_vertices = n_vertices
        self.root = n_vertices
        self.parent: Dict[int, Optional[int]] = {self.root: None}
        self.children: Dict[int, List[int]] = {self.root: []}
        self.size: Dict[int, int] = {self.root: 0}
        self.volume: Dict[int, float] = {self.root: 0.0}
        self.cut: Dict[int, float] = {self.root: 0.0}
        self.relation_cut: Dict[int, float] = {self.root: 0.0}
        self.subtree_height: Dict[int, int] = {self.root: 0}
        self._next_id = n_vertices + 1

    # -- construction -----------------------------------------------------

    @classmethod
    def flat(cls, graph: WeightedGraph, relation: RelationGraph) -> "EncodingTree":
        """Root with every vertex as a direct leaf child"""
        tree = cls(graph.n)
        for v in range(graph.n):
            tree._add_leaf(v, tree.root)
        tree.refresh_caches(graph, relation)
        return tree

    @classmethod
    def from_modules(
        cls,
        modules: Sequence[Sequence[int]],
        graph: Optional[WeightedGraph] = None,
        relation: Optional[RelationGraph] = None,
    ) -> "EncodingTree":
        """Height-2 tree: one internal node per module, leaves below"""
        n = sum(len(m) for m in modules)
        tree = cls(n)
        for module in modules:
            node = tree._new_node(tree.root)
            for v in sorted(module):
                tree._add_leaf(v, node)
        tree._check_leaves()
        tree.refresh_caches(graph, relation)
        return tree

    @classmethod
    def from_dict(
        cls,
        data: Dict[str, Any],
        graph: Optional[WeightedGraph] = None,
        relation: Optional[RelationGraph] = None,
    ) -> "EncodingTree":
        """Rebuild from the nested form written by ``to_dict``"""
        def count(node):
            return 1 if "vertex" in node else sum(count(c) for c in node.get("children", []))

        try:
            tree = cls(count(data))

            def attach(node, parent):
                if "vertex" in node:
                    tree._add_leaf(int(node["vertex"]), parent)
                else:
                    if not node["children"]:
                        raise ValueError("internal node without children")
                    created = tree._new_node(parent)
                    for child in node["children"]:
                        attach(child, created)

            for child in data["children"]:
                attach(child, tree.root)
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"Malformed tree description: {e}")
        tree._check_leaves()
        tree.refresh_caches(graph, relation)
        return tree

    def _new_node(self, parent: int) -> int:
        node = self._next_id
        self._next_id += 1
        self.parent[node] = parent
        self.children[node] = []
        self.children[parent].append(node)
        for cache in (self.size, self.subtree_height):
            cache[node] = 0
        for cache in (self.volume, self.cut, self.relation_cut):
            cache[node] = 0.0
        return node

    def _add_leaf(self, v: int, parent: int) -> None:
        if v in self.parent or not 0 <= v < self.n_vertices:
            raise InputError(f"Invalid or repeated leaf vertex {v}")
        self.parent[v] = parent
        self.children[v] = []
        self.children[parent].append(v)
        self.size[v] = 1
        self.subtree_height[v] = 0
        for cache in (self.volume, self.cut, self.relation_cut):
            cache[v] = 0.0

    def _check_leaves(self) -> None:
        missing = [v for v in range(self.n_vertices) if v not in self.parent]
        if missing:
            raise InputError(f"Tree has no leaf for vertex {missing[0]}")

    def refresh_caches(
        self,
        graph: Optional[WeightedGraph] = None,
        relation: Optional[RelationGraph] = None,
    ) -> None:
        """Recompute sizes, heights and (when graphs are given) V, g, g'"""
        for node in self.postorder():
            kids = self.children[node]
            if kids:
                self.size[node] = sum(self.size[c] for c in kids)
                self.subtree_height[node] = 1 + max(self.subtree_height[c] for c in kids)
        if graph is None:
            return
        relation = relation if relation is not None else RelationGraph.empty(graph.n)
        for node in self.postorder():
            kids = self.children[node]
            if kids:
                self.volume[node] = sum(self.volume[c] for c in kids)
            else:
                self.volume[node] = float(graph.degree[node])
        self.cut = crossing_weights(self, graph)
        self.relation_cut = crossing_weights(self, relation)

    def copy(self) -> "EncodingTree":
        return copy.deepcopy(self)

    # -- queries ------------------------------------------------------------

    def is_leaf(self, node: int) -> bool:
        return node < self.n_vertices

    @property
    def height(self) -> int:
        return self.subtree_height[self.root]

    @property
    def nodes(self) -> List[int]:
        return list(self.parent)

    def internal_nodes(self) -> List[int]:
        """Non-root, non-leaf nodes in ascending id order"""
        return sorted(a for a in self.parent if a != self.root and not self.is_leaf(a))

    def postorder(self, start: Optional[int] = None) -> Iterator[int]:
        stack = [(self.root if start is None else start, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                yield node
                continue
            stack.append((node, True))
            for child in reversed(self.children[node]):
                stack.append((child, False))

    def vertices(self, node: int) -> List[int]:
        return sorted(a for a in self.postorder(node) if self.is_leaf(a))

    def root_partition(self) -> np.ndarray:
        """Labels assigning each vertex to the root child above it"""
        labels = np.empty(self.n_vertices, dtype=int)
        for k, child in enumerate(self.children[self.root]):
            labels[self.vertices(child)] = k
        return labels

    # -- operators ----------------------------------------------------------

    def stretch(self, a: int, b: int, between: float, between_relation: float) -> int:
        """Insert a new parent over sister nodes a and b and return it"""
        gamma = self.parent[a]
        if gamma is None or gamma != self.parent[b] or a == b:
            raise ValueError(f"Nodes {a} and {b} are not sisters")
        siblings = self.children[gamma]
        position = min(siblings.index(a), siblings.index(b))
        delta = self._new_node(gamma)
        siblings.remove(delta)
        siblings.remove(a)
        siblings.remove(b)
        siblings.insert(position, delta)
        self.children[delta] = [a, b] if a < b else [b, a]
        self.parent[a] = self.parent[b] = delta

        self.size[delta] = self.size[a] + self.size[b]
        self.volume[delta] = self.volume[a] + self.volume[b]
        self.cut[delta] = self.cut[a] + self.cut[b] - 2.0 * between
        self.relation_cut[delta] = self.relation_cut[a] + self.relation_cut[b] - 2.0 * between_relation
        self.subtree_height[delta] = 1 + max(self.subtree_height[a], self.subtree_height[b])
        self._update_heights(gamma)
        return delta

    def compress(self, node: int) -> None:
        """Remove an internal node, handing its children to its parent"""
        gamma = self.parent[node]
        if gamma is None or self.is_leaf(node):
            raise ValueError(f"Node {node} cannot be compressed")
        siblings = self.children[gamma]
        position = siblings.index(node)
        kids = self.children.pop(node)
        siblings[position:position + 1] = kids
        for child in kids:
            self.parent[child] = gamma
        for cache in (self.parent, self.size, self.volume, self.cut,
                      self.relation_cut, self.subtree_height):
            del cache[node]
        self._update_heights(gamma)

    def _update_heights(self, node: Optional[int]) -> None:
        while node is not None:
            height = 1 + max(self.subtree_height[c] for c in self.children[node])
            if height == self.subtree_height[node]:
                break
            self.subtree_height[node] = height
            node = self.parent[node]

    # -- serialization -------------------------------------------------------

    def to_dict(self, node: Optional[int] = None) -> Dict[str, Any]:
        """Nested JSON-ready form; leaves are {"vertex": i}"""
        def build(a):
            if self.is_leaf(a):
                return {"vertex": a}
            return {"size": self.size[a], "children": [build(c) for c in self.children[a]]}

        return build(self.root if node is None else node)

    def to_newick(self) -> str:
        """Newick string with vertex indices as leaf names"""
        out: List[str] = []
        for a in self.postorder():
            if self.is_leaf(a):
                out.append(str(a))
            else:
                k = len(self.children[a])
                parts = out[len(out) - k:]
                del out[len(out) - k:]
                out.append("(" + ",".join(parts) + ")")
        return out[0] + ";"

    def check_invariants(
        self,
        graph: Optional[WeightedGraph] = None,
        relation: Optional[RelationGraph] = None,
        tolerance: float = 1e-9,
    ) -> None:
        """Raise AssertionError when the structure or caches are inconsistent"""
        assert self.parent[self.root] is None, "root has a parent"
        seen = 0
        for node in self.postorder():
            seen += 1
            kids = self.children[node]
            if self.is_leaf(node):
                assert not kids, f"leaf {node} has children"
                continue
            assert kids, f"internal node {node} has no children"
            assert all(self.parent[c] == node for c in kids), f"parent links broken under {node}"
            assert self.size[node] == sum(self.size[c] for c in kids), f"size cache of {node}"
            assert self.subtree_height[node] == 1 + max(self.subtree_height[c] for c in kids), (
                f"height cache of {node}"
            )
        assert seen == len(self.parent), "unreachable nodes in tree"
        assert self.vertices(self.root) == list(range(self.n_vertices)), "leaves do not cover V"

        if graph is None:
            return
        fresh = self.copy()
        fresh.refresh_caches(graph, relation)
        for name in ("volume", "cut", "relation_cut"):
            ours, theirs = getattr(self, name), getattr(fresh, name)
            for node in self.parent:
                assert math.isclose(ours[node], theirs[node], rel_tol=tolerance, abs_tol=tolerance), (
                    f"{name} cache of node {node}: {ours[node]} != {theirs[node]}"
                )


def crossing_weights(tree: EncodingTree, graph) -> Dict[int, float]:
    """Cut of every tree node in ``graph``, computed from scratch.

    An edge (i, j) crosses exactly the nodes on the two leaf-to-LCA paths,
    LCA excluded.
    """
    cut = {a: 0.0 for a in tree.parent}
    depth = {tree.root: 0}
    stack = [tree.root]
    while stack:
        a = stack.pop()
        for c in tree.children[a]:
            depth[c] = depth[a] + 1
            stack.append(c)

    for i, j, w in graph.edges():
        a, b = i, j
        while a != b:
            if depth[a] >= depth[b]:
                cut[a] += w
                a = tree.parent[a]
            else:
                cut[b] += w
                b = tree.parent[b]
    return cut

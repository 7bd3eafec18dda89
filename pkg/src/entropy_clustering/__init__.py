"""
entropy-clustering - Semi-supervised clustering by structural entropy minimization
"""

__version__ = "0.1.0"

from .clusterer import Clusterer
from .config import Hyperparams, RunConfig
from .constraints import ConstraintSet, RelationGraph
from .encoding_tree import EncodingTree
from .flat_optimizer import minimize_2d
from .graph import KernelSpec, WeightedGraph
from .hier_optimizer import extract_partition, minimize_highd
from .partition import Partition

__all__ = [
    "Clusterer",
    "ConstraintSet",
    "EncodingTree",
    "Hyperparams",
    "KernelSpec",
    "Partition",
    "RelationGraph",
    "RunConfig",
    "WeightedGraph",
    "extract_partition",
    "minimize_2d",
    "minimize_highd",
]

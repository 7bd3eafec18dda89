"""Utility functions for reading inputs and writing results"""

import json
import logging
from dataclasses import dataclass
from datetime import timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .encoding_tree import EncodingTree
from .exceptions import InputError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class Dataset:
    """Feature matrix with optional ground-truth labels"""
    features: np.ndarray
    labels: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_classes(self) -> Optional[int]:
        return None if self.labels is None else int(len(np.unique(self.labels)))


def load_dataset(path: Path, header: bool = False, has_labels: bool = False) -> Dataset:
    """Read a comma-separated feature matrix, optionally with a trailing label column"""
    path = Path(path)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except (OSError, ValueError) as e:
        raise InputError(f"Cannot read CSV {path}: {e}")
    if table.size == 0:
        raise InputError(f"CSV {path} holds no data")

    labels = None
    if has_labels:
        if table.shape[1] < 2:
            raise InputError(f"CSV {path} needs at least one feature column besides the labels")
        column = table[:, -1]
        if not np.all(np.isfinite(column)) or not np.all(column == np.round(column)):
            raise InputError(f"Label column of {path} must hold integers")
        labels = column.astype(int)
        table = table[:, :-1]

    logger.info(f"Loaded {table.shape[0]} points with {table.shape[1]} features from {path}")
    return Dataset(features=table, labels=labels)


def _label(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def read_labels(path: Path) -> np.ndarray:
    """One label per line; blank lines and '#' comments are skipped"""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise InputError(f"Cannot read labels {path}: {e}")
    labels = [_label(line.split("#", 1)[0].strip()) for line in lines]
    labels = [x for x in labels if x != ""]
    if not labels:
        raise InputError(f"No labels in {path}")
    return np.array(labels)


def read_assignment(path: Path) -> np.ndarray:
    """Predicted labels from a labels file or a partition report"""
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = read_json(path)
        if "assignments" not in data:
            raise InputError(f"{path} has no 'assignments' field")
        return np.asarray(data["assignments"])
    return read_labels(path)


def read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read JSON {path}: {e}")


def write_json(data: Dict[str, Any], path: Path) -> Path:
    """Pretty-printed JSON with a trailing newline"""
    path = Path(path)
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    return path


def read_tree(path: Path) -> EncodingTree:
    """Load a tree written in nested-JSON form (optionally inside a report)"""
    data = read_json(Path(path))
    if "tree" in data:
        data = data["tree"]
    return EncodingTree.from_dict(data)


def write_tree(tree: EncodingTree, directory: Path, stem: str) -> List[Path]:
    """
    Write a tree as Newick and as nested JSON

    Args:
        tree: Tree to write
        directory: Existing output directory
        stem: File name without extension

    Returns:
        Paths of ``stem.nwk`` and ``stem.json``
    """
    directory = Path(directory)
    newick = directory / f"{stem}.nwk"
    newick.write_text(tree.to_newick() + "\n")
    nested = write_json(
        {"schema_version": SCHEMA_VERSION, "height": tree.height, "tree": tree.to_dict()},
        directory / f"{stem}.json",
    )
    return [newick, nested]


def summarize(values: Sequence[float]) -> Dict[str, float]:
    """Mean and population standard deviation"""
    arr = np.asarray(values, dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def format_duration(seconds: float) -> str:
    """Format duration in seconds to human-readable string"""
    td = timedelta(seconds=seconds)
    minutes, rest = divmod(td.total_seconds(), 60)
    hours, minutes = divmod(int(minutes), 60)

    if hours > 0:
        return f"{hours}h {minutes}m {int(rest)}s"
    elif minutes > 0:
        return f"{minutes}m {int(rest)}s"
    else:
        return f"{rest:.2f}s"

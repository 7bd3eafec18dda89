"""Run orchestration: data -> graphs -> optimizer -> reports"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .config import GenerationConfig, RunConfig
from .constraints import (
    ConstraintSet,
    RelationGraph,
    generate_constraints,
    read_constraints,
    relation_graph_from_constraints,
)
from .exceptions import InputError
from .flat_optimizer import minimize_2d
from .graph import WeightedGraph, build_similarity, default_p, sparsify_knn
from .hier_optimizer import extract_partition, minimize_highd
from .metrics import ari, dendrogram_purity, nmi
from .utils import SCHEMA_VERSION, Dataset, format_duration, load_dataset, summarize, write_json, write_tree

logger = logging.getLogger(__name__)

COMMANDS = ("partition", "hierarchy")


def _run_repeat(config_data: Dict[str, Any], command: str, offset: int) -> Dict[str, Any]:
    """Process-pool entry point for one repeat"""
    clusterer = Clusterer(RunConfig(**config_data), setup_logging=False)
    return clusterer.run(command, offset)


class Clusterer:
    """Runs the flat or hierarchical pipeline described by a RunConfig"""

    def __init__(self, config: RunConfig, setup_logging: bool = True):
        self.config = config
        if setup_logging:
            self._setup_logging()
        self._dataset: Optional[Dataset] = None
        self._sim: Optional[np.ndarray] = None
        self._graph: Optional[WeightedGraph] = None
        self.p: Optional[int] = None

    def _setup_logging(self):
        """Configure logging"""
        log_file = self.config.output.directory / "run.log"
        logging.basicConfig(
            level=logging.INFO,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=[
                logging.FileHandler(log_file),
                logging.StreamHandler()
            ]
        )

    # -- inputs -------------------------------------------------------------

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            self._dataset = load_dataset(
                self.config.input_path, header=self.config.header, has_labels=self.config.has_labels
            )
        return self._dataset

    def resolve_p(self) -> int:
        n = self.dataset.n
        p = self.config.graph.p
        if p == "auto":
            k = self.dataset.n_classes or self.config.graph.n_clusters
            if k is None:
                raise InputError("p='auto' needs labeled input or a cluster count")
            p = default_p(k, n)
            logger.info(f"p=auto resolved to {p} (k={k}, n={n})")
        if p >= n:
            logger.warning(f"p={p} clamped to n-1={n - 1}")
            p = n - 1
        return int(p)

    def graph(self) -> Tuple[np.ndarray, WeightedGraph]:
        """Similarity matrix and sparsified data graph, built once"""
        if self._graph is None:
            self._sim = build_similarity(self.dataset.features, self.config.graph.kernel.to_spec())
            self.p = self.resolve_p()
            self._graph = sparsify_knn(self._sim, self.p)
        return self._sim, self._graph

    def constraints(self, offset: int = 0) -> ConstraintSet:
        source = self.config.constraints
        if source.path is not None:
            constraints = read_constraints(source.path)
        elif source.generate is not None:
            spec = source.generate
            constraints = generate_constraints(
                self.dataset.labels, spec.kind, spec.amount, spec.seed + offset
            )
        else:
            constraints = ConstraintSet()
        logger.info(f"Using {len(constraints)} constraints")
        return constraints

    def relation(self, offset: int = 0) -> Tuple[ConstraintSet, RelationGraph]:
        sim, graph = self.graph()
        constraints = self.constraints(offset)
        return constraints, relation_graph_from_constraints(constraints, sim)

    # -- pipelines ------------------------------------------------------------

    def _header(self, command: str, constraints: ConstraintSet, offset: int) -> Dict[str, Any]:
        generate = self.config.constraints.generate
        return {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "constraint_seed": None if generate is None else generate.seed + offset,
            "n": self.dataset.n,
            "p": self.p,
            "constraints": {
                "must_link": len(constraints.must_link),
                "cannot_link": len(constraints.cannot_link),
                "positive_labels": len(constraints.positive_labels),
                "negative_labels": len(constraints.negative_labels),
            },
        }

    def _flat_metrics(self, labels: np.ndarray) -> Dict[str, float]:
        truth = self.dataset.labels
        if truth is None:
            return {}
        return {"ari": ari(labels, truth), "nmi": nmi(labels, truth)}

    def run_partition(self, offset: int = 0) -> Dict[str, Any]:
        """Flat clustering; returns the partition report"""
        constraints, relation = self.relation(offset)
        _, graph = self.graph()
        result = minimize_2d(graph, relation, self.config.optimizer)
        labels = result.partition.labels()

        report = self._header("partition", constraints, offset)
        report.update({
            "assignments": labels.tolist(),
            "module_sizes": result.partition.sizes(),
            "n_modules": len(result.partition),
            "objective": result.objective,
            "trace": result.trace,
            "converged": result.converged,
            "merges": result.merges,
            "moves": result.moves,
            "sweeps": result.sweeps,
            "metrics": self._flat_metrics(labels),
        })
        report["_tree"] = result.tree
        return report

    def run_hierarchy(self, offset: int = 0) -> Dict[str, Any]:
        """Binary and height-K trees plus the height-2 partition"""
        constraints, relation = self.relation(offset)
        _, graph = self.graph()
        hp = self.config.optimizer
        result = minimize_highd(graph, relation, hp)
        partition = extract_partition(result.tree, graph, relation, hp.phi)
        labels = partition.labels()

        metrics = self._flat_metrics(labels)
        if self.dataset.labels is not None:
            metrics["dendrogram_purity"] = dendrogram_purity(result.binary_tree, self.dataset.labels)

        report = self._header("hierarchy", constraints, offset)
        report.update({
            "height": hp.height,
            "binary_height": result.binary_height,
            "tree_height": result.tree.height,
            "objective": result.objective,
            "binary_objective": result.stretch_trace[-1],
            "stretch_trace": result.stretch_trace,
            "compress_trace": result.compress_trace,
            "converged": True,
            "assignments": labels.tolist(),
            "module_sizes": partition.sizes(),
            "metrics": metrics,
        })
        report["_binary_tree"] = result.binary_tree
        report["_tree"] = result.tree
        return report

    def run(self, command: str, offset: int = 0) -> Dict[str, Any]:
        if command not in COMMANDS:
            raise ValueError(f"Unknown command: {command}")
        start = time.perf_counter()
        report = self.run_partition(offset) if command == "partition" else self.run_hierarchy(offset)
        logger.info(f"{command} run finished in {format_duration(time.perf_counter() - start)}")
        return report

    # -- outputs ---------------------------------------------------------------

    def write_report(self, report: Dict[str, Any]) -> List[Path]:
        """Write the primary JSON report and its trees; returns written paths"""
        directory = self.config.output.directory
        data = {k: v for k, v in report.items() if not k.startswith("_")}
        data["config"] = self.config.to_dict()
        paths = [write_json(data, directory / f"{report['command']}.json")]
        if report["command"] == "hierarchy":
            paths += write_tree(report["_binary_tree"], directory, "binary_tree")
            paths += write_tree(report["_tree"], directory, "tree_k")
        else:
            paths += write_tree(report["_tree"], directory, "partition_tree")
        for path in paths:
            logger.info(f"Wrote {path}")
        return paths

    def run_repeats(
        self,
        command: str,
        repeats: Optional[int] = None,
        first: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        """Repeat a run with reseeded constraint generation and aggregate metrics.

        Args:
            command: "partition" or "hierarchy"
            repeats: Number of runs, defaults to the configured repeats
            first: An already computed offset-0 report, reused instead of rerun

        Returns:
            Aggregated report with mean and std per metric
        """
        repeats = repeats or self.config.repeats
        reports: List[Dict[str, Any]] = [first] if first is not None else []
        offsets = list(range(len(reports), repeats))
        if self.config.jobs > 1 and len(offsets) > 1:
            data = self.config.to_dict()
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                futures = [pool.submit(_run_repeat, data, command, r) for r in offsets]
                reports += [f.result() for f in tqdm(futures, desc=f"{command} repeats", unit="run")]
        else:
            reports += [self.run(command, r) for r in tqdm(offsets, desc=f"{command} repeats", unit="run")]
        return aggregate(command, reports)

    def sweep(self, command: str, amounts: Sequence[float], repeats: Optional[int] = None) -> Dict[str, Any]:
        """Metric mean and std per constraint amount"""
        if self.dataset.labels is None:
            raise InputError("A sweep needs labeled input")
        base = self.config.constraints.generate or GenerationConfig()
        rows = []
        for amount in amounts:
            generate = base.model_copy(update={"amount": float(amount)})
            config = self.config.model_copy(deep=True)
            config.constraints.generate = generate
            config.constraints.path = None
            runner = Clusterer(config, setup_logging=False)
            runner._dataset, runner._sim, runner._graph, runner.p = self._dataset, self._sim, self._graph, self.p
            summary = runner.run_repeats(command, repeats)
            rows.append({"amount": float(amount), **summary})
            logger.info(f"Sweep amount {amount}: {summary['metrics']}")
        return {"schema_version": SCHEMA_VERSION, "command": command, "kind": base.kind, "rows": rows}


def aggregate(command: str, reports: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Mean and std of objective and metrics across repeated reports"""
    names = sorted(reports[0]["metrics"]) if reports else []
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "repeats": len(reports),
        "constraint_seeds": [r["constraint_seed"] for r in reports],
        "objective": summarize([r["objective"] for r in reports]),
        "metrics": {name: summarize([r["metrics"][name] for r in reports]) for name in names},
        "runs": [
            {"constraint_seed": r["constraint_seed"], "objective": r["objective"], "metrics": r["metrics"]}
            for r in reports
        ],
    }

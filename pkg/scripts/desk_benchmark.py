#!/usr/bin/env python3
"""
Desk-scale benchmark: hierarchical runs on Wine and Breast Cancer, plus the
brute-force agreement report on 8-vertex instances.

Needs scikit-learn for the datasets:

    pip install -e ".[dev]"
    python scripts/desk_benchmark.py --seeds 10
"""
import json
import sys
from pathlib import Path

import click
import numpy as np
from tqdm import tqdm

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from entropy_clustering.config import Hyperparams  # noqa: E402
from entropy_clustering.constraints import generate_constraints, relation_graph_from_constraints  # noqa: E402
from entropy_clustering.flat_optimizer import minimize_2d  # noqa: E402
from entropy_clustering.graph import KernelSpec, build_similarity, sparsify_knn  # noqa: E402
from entropy_clustering.hier_optimizer import extract_partition, minimize_highd  # noqa: E402
from entropy_clustering.metrics import ari, dendrogram_purity  # noqa: E402
from entropy_clustering.oracle import brute_force_min_2d  # noqa: E402
from entropy_clustering.utils import summarize  # noqa: E402

# published reference values (percent) with accepted tolerance
REFERENCE = {
    "wine": {"dendrogram_purity": (92.88, 5.0), "ari": (85.27, 10.0)},
    "breast_cancer": {"dendrogram_purity": (96.53, 5.0)},
}


def load(name):
    from sklearn import datasets
    from sklearn.preprocessing import MinMaxScaler

    bunch = datasets.load_wine() if name == "wine" else datasets.load_breast_cancer()
    features = MinMaxScaler(feature_range=(-1, 1)).fit_transform(bunch.data)
    return features, bunch.target


def run_dataset(name, seeds, p, amount):
    features, truth = load(name)
    sim = build_similarity(features, KernelSpec("cosine"))
    graph = sparsify_knn(sim, p)
    hp = Hyperparams(height=3)

    scores = {"dendrogram_purity": [], "ari": []}
    for seed in tqdm(range(seeds), desc=name, unit="seed"):
        constraints = generate_constraints(truth, "pairwise", amount, seed)
        relation = relation_graph_from_constraints(constraints, sim)
        result = minimize_highd(graph, relation, hp)
        labels = extract_partition(result.tree, graph, relation, hp.phi).labels()
        scores["dendrogram_purity"].append(100 * dendrogram_purity(result.binary_tree, truth))
        scores["ari"].append(100 * ari(labels, truth))
    return {metric: summarize(values) for metric, values in scores.items()}


def brute_force_report(instances):
    equal, gaps = 0, []
    for seed in tqdm(range(instances), desc="brute force", unit="graph"):
        rng = np.random.default_rng(seed)
        points = rng.normal(size=(8, 2)) * 2.0
        sim = build_similarity(points, KernelSpec("gaussian", 1.0))
        graph = sparsify_knn(sim, 3)
        constraints = generate_constraints(rng.integers(0, 3, size=8), "pairwise", 0.25, seed)
        relation = relation_graph_from_constraints(constraints, sim)

        found = minimize_2d(graph, relation).objective
        _, best = brute_force_min_2d(graph, relation, 2.0)
        equal += int(found <= best + 1e-9)
        gaps.append((found - best) / max(abs(best), 1e-12))
    return {"instances": instances, "optimal": equal, "mean_relative_gap": float(np.mean(gaps))}


@click.command()
@click.option('--seeds', type=int, default=10, help='Constraint seeds per dataset')
@click.option('-p', '--neighbors', 'p', type=int, default=5, help='Neighbors per vertex')
@click.option('--amount', type=float, default=0.2, help='Must-link and cannot-link amount (fraction of n each)')
@click.option('--instances', type=int, default=100, help='Random 8-vertex graphs for the brute-force report')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Write results as JSON')
def main(seeds, p, amount, instances, output):
    """Reproduce the desk-scale hierarchy numbers and the brute-force gap"""
    print("🔍 Entropy Clustering - Desk Benchmark")
    print("=" * 50)

    results = {}
    for name in ("wine", "breast_cancer"):
        results[name] = run_dataset(name, seeds, p, amount)
        results[name]["reference"] = {}
        for metric, (target, tolerance) in REFERENCE[name].items():
            measured = results[name][metric]["mean"]
            inside = abs(measured - target) <= tolerance
            results[name]["reference"][metric] = {
                "target": target, "tolerance": tolerance, "measured": measured, "within_tolerance": inside,
            }
            mark = "✅" if inside else "⚠️ "
            print(f"{mark} {name} {metric}: {measured:.2f} ± {results[name][metric]['std']:.2f} "
                  f"(reference {target:.2f} ± {tolerance:.0f})")

    results["brute_force"] = brute_force_report(instances)
    report = results["brute_force"]
    print(f"📊 Brute force: optimal in {report['optimal']}/{report['instances']}, "
          f"mean relative gap {100 * report['mean_relative_gap']:.2f}%")

    if output:
        output.write_text(json.dumps(results, indent=2) + "\n")
        print(f"Results written to {output}")


if __name__ == "__main__":
    main()

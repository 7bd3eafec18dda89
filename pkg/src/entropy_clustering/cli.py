"""Command-line interface for entropy-clustering"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
from pydantic import ValidationError

from .clusterer import Clusterer
from .config import RunConfig, deep_merge, load_mapping
from .constraints import CONSTRAINT_KINDS, generate_constraints, write_constraints
from .exceptions import ConstraintConflictError, EntropyClusteringError, InputError
from .metrics import ari, dendrogram_purity, nmi
from .utils import SCHEMA_VERSION, read_assignment, read_labels, read_tree, write_json

logger = logging.getLogger(__name__)

EXIT_INPUT = 2
EXIT_CONFLICT = 3
EXIT_NOT_CONVERGED = 4

DEFAULT_AMOUNTS = {"pairwise": 0.2, "label": 0.1}


def _execute(ctx: click.Context, verbose: bool, body: Callable[[], int]) -> None:
    """Run a command body, mapping failures onto exit codes"""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        code = body()
    except Exception as e:
        if isinstance(e, ConstraintConflictError):
            click.echo(f"❌ Constraint conflict: {e}", err=True)
            code = EXIT_CONFLICT
        elif isinstance(e, (InputError, ValidationError)):
            click.echo(f"❌ Error: {e}", err=True)
            code = EXIT_INPUT
        elif isinstance(e, (EntropyClusteringError, OSError)):
            click.echo(f"❌ Error: {e}", err=True)
            code = 1
        else:
            raise
        if verbose:
            import traceback
            traceback.print_exc()
    if code:
        ctx.exit(code)


def _parse_p(ctx, param, value):
    if value is None or value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise click.BadParameter("must be a positive integer or 'auto'")


def run_options(f):
    """Options shared by the partition, hierarchy and sweep commands"""
    options = [
        click.argument('input_file', type=click.Path(exists=True, dir_okay=False, path_type=Path)),
        click.option('-o', '--output-dir', type=click.Path(path_type=Path), help='Output directory for results'),
        click.option('--header/--no-header', default=None, help='CSV has a header row'),
        click.option('--labels/--no-labels', 'has_labels', default=None,
                     help='Last CSV column holds ground-truth labels'),
        click.option('--kernel', type=click.Choice(['gaussian', 'cosine']), help='Similarity kernel'),
        click.option('--sigma', type=float, help='Gaussian kernel width'),
        click.option('-p', '--neighbors', 'p', callback=_parse_p, help="Neighbors per vertex or 'auto'"),
        click.option('-k', '--clusters', type=int, help="Cluster count used by p='auto' without labels"),
        click.option('--constraints', 'constraints_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
                     help='Constraint file (ML/CL/PL/NL lines)'),
        click.option('--generate', type=click.Choice(CONSTRAINT_KINDS),
                     help='Sample constraints of this kind from the labels'),
        click.option('--amount', type=float, help='Constraint amount as a fraction of n'),
        click.option('--phi', type=float, help='Penalty weight'),
        click.option('-K', '--height', type=int, help='Target tree height'),
        click.option('--t-max', type=int, help='Max moving-stage sweeps'),
        click.option('--max-merges', type=int, help='Stop merging after this many merges'),
        click.option('--moving/--no-moving', default=None, help='Run the moving stage'),
        click.option('--seed', type=int, help='Seed for constraint sampling'),
        click.option('--repeats', type=int, help='Repeat with reseeded constraints'),
        click.option('--jobs', type=int, help='Parallel processes for repeats'),
        click.option('-c', '--config', type=click.Path(exists=True, dir_okay=False, path_type=Path),
                     help='Configuration file (YAML or JSON)'),
        click.option('--save-config', type=click.Path(path_type=Path), help='Save effective configuration to file'),
        click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def build_config(opts: Dict[str, Any]) -> RunConfig:
    """Flags override the config file, which overrides model defaults"""
    base = load_mapping(opts['config']) if opts.get('config') else {}
    overrides: Dict[str, Any] = {
        "input_path": str(opts['input_file']),
        "header": opts.get('header'),
        "has_labels": opts.get('has_labels'),
        "graph": {
            "kernel": {"kind": opts.get('kernel'), "sigma": opts.get('sigma')},
            "p": opts.get('p'),
            "n_clusters": opts.get('clusters'),
        },
        "optimizer": {
            "phi": opts.get('phi'),
            "height": opts.get('height'),
            "t_max": opts.get('t_max'),
            "max_merges": opts.get('max_merges'),
            "moving": opts.get('moving'),
        },
        "output": {"directory": str(opts['output_dir']) if opts.get('output_dir') else None},
        "repeats": opts.get('repeats'),
        "jobs": opts.get('jobs'),
    }
    data = deep_merge(base, overrides)

    constraints = dict(data.get("constraints") or {})
    if opts.get('constraints_path'):
        constraints = {"path": str(opts['constraints_path'])}
    elif opts.get('generate') or opts.get('amount') is not None:
        generate = dict(constraints.get("generate") or {})
        kind = opts.get('generate') or generate.get("kind", "pairwise")
        generate["kind"] = kind
        if opts.get('amount') is not None:
            generate["amount"] = opts['amount']
        elif 'amount' not in generate:
            generate["amount"] = DEFAULT_AMOUNTS[kind]
        constraints = {"generate": generate}
    if opts.get('seed') is not None and constraints.get("generate") is not None:
        constraints["generate"] = {**constraints["generate"], "seed": opts['seed']}
    data["constraints"] = constraints
    return RunConfig(**data)


def _save_config(cfg: RunConfig, path: Optional[Path]) -> None:
    if not path:
        return
    if path.suffix in ('.yaml', '.yml'):
        cfg.save_yaml(path)
    else:
        cfg.save_json(path)
    click.echo(f"Configuration saved to: {path}")


def _echo_metrics(metrics: Dict[str, Any]) -> None:
    for name, value in metrics.items():
        if isinstance(value, dict):
            click.echo(f"  {name}: {value['mean']:.4f} ± {value['std']:.4f}")
        else:
            click.echo(f"  {name}: {value:.4f}")


def _pipeline(command: str, opts: Dict[str, Any]) -> int:
    cfg = build_config(opts)
    _save_config(cfg, opts.get('save_config'))
    click.echo(f"Input file: {cfg.input_path}")
    click.echo(f"Output directory: {cfg.output.directory}")

    clusterer = Clusterer(cfg)
    report = clusterer.run(command)
    paths = clusterer.write_report(report)
    if cfg.repeats > 1:
        summary = clusterer.run_repeats(command, first=report)
        paths.append(write_json(summary, cfg.output.directory / f"{command}_repeats.json"))

    click.echo("\n" + "=" * 50)
    click.echo(f"✅ {command.capitalize()} complete!")
    click.echo(f"Modules: {len(report['module_sizes'])}  objective: {report['objective']:.6f}")
    if report["metrics"]:
        _echo_metrics(report["metrics"])
    if cfg.repeats > 1:
        click.echo(f"Over {cfg.repeats} repeats:")
        _echo_metrics(summary["metrics"])
    click.echo(f"Report: {paths[0]}")

    if not report["converged"]:
        click.echo("❌ Moving stage hit t_max before converging", err=True)
        return EXIT_NOT_CONVERGED
    return 0


@click.group()
def cli():
    """Semi-supervised clustering by structural entropy minimization"""
    pass


@cli.command()
@run_options
@click.pass_context
def partition(ctx, **opts):
    """
    Flat clustering: merge then move to minimize the two-level objective.

    Example usage:

        entropy-cluster partition data.csv --labels --generate pairwise --amount 0.2 -o results/
    """
    _execute(ctx, opts['verbose'], lambda: _pipeline("partition", opts))


@cli.command()
@run_options
@click.pass_context
def hierarchy(ctx, **opts):
    """
    Hierarchical clustering: stretch to a binary tree, compress to height K.

    Example usage:

        entropy-cluster hierarchy data.csv --labels --kernel cosine -p 5 -K 3
    """
    _execute(ctx, opts['verbose'], lambda: _pipeline("hierarchy", opts))


@cli.command(name='gen-constraints')
@click.argument('labels_file', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--kind', type=click.Choice(CONSTRAINT_KINDS), default='pairwise', help='Constraint kind')
@click.option('--amount', type=float, help='Fraction of n per constraint type (default 0.2 pairwise, 0.1 label)')
@click.option('--seed', type=int, default=0, help='Sampling seed')
@click.option('-o', '--output', type=click.Path(path_type=Path), required=True, help='Constraint file to write')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
def gen_constraints(ctx, labels_file, kind, amount, seed, output, verbose):
    """Sample constraints from ground-truth labels (one label per line)"""
    def body() -> int:
        labels = read_labels(labels_file)
        chosen = DEFAULT_AMOUNTS[kind] if amount is None else amount
        constraints = generate_constraints(labels, kind, chosen, seed)
        write_constraints(constraints, output)
        click.echo(f"✅ Wrote {len(constraints)} constraints to {output}")
        return 0

    _execute(ctx, verbose, body)


@cli.command(name='eval')
@click.option('--truth', type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True,
              help='Ground-truth labels file')
@click.option('--pred', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='Predicted labels file or partition report JSON')
@click.option('--tree', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='Tree in nested-JSON form')
@click.option('-m', '--metric', 'metrics', multiple=True, type=click.Choice(['ari', 'nmi', 'dp']),
              help='Metrics to compute (default: all that the inputs allow)')
@click.option('-o', '--output', type=click.Path(path_type=Path), help='Write the metric report here')
@click.option('-v', '--verbose', is_flag=True, help='Enable verbose logging')
@click.pass_context
def evaluate(ctx, truth, pred, tree, metrics, output, verbose):
    """Score a predicted labeling and/or a tree against ground truth"""
    def body() -> int:
        requested: List[str] = list(metrics)
        if not requested:
            requested = (['ari', 'nmi'] if pred else []) + (['dp'] if tree else [])
        if not requested:
            raise InputError("Nothing to evaluate: give --pred and/or --tree")
        if 'dp' in requested and tree is None:
            raise InputError("Dendrogram purity needs --tree")
        if {'ari', 'nmi'} & set(requested) and pred is None:
            raise InputError("ARI/NMI need --pred")

        truth_labels = read_labels(truth)
        report: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, "n": int(len(truth_labels)), "metrics": {}}
        if pred is not None:
            predicted = read_assignment(pred)
            if 'ari' in requested:
                report["metrics"]["ari"] = ari(predicted, truth_labels)
            if 'nmi' in requested:
                report["metrics"]["nmi"] = nmi(predicted, truth_labels)
        if 'dp' in requested:
            report["metrics"]["dendrogram_purity"] = dendrogram_purity(read_tree(tree), truth_labels)

        if output:
            write_json(report, output)
            click.echo(f"Report: {output}")
        click.echo(json.dumps(report, indent=2))
        return 0

    _execute(ctx, verbose, body)


@cli.command()
@run_options
@click.option('--amounts', default='0.05,0.1,0.15,0.2', help='Comma-separated constraint amounts')
@click.option('--mode', type=click.Choice(['partition', 'hierarchy']), default='partition',
              help='Pipeline to sweep')
@click.pass_context
def sweep(ctx, amounts, mode, **opts):
    """Metric sensitivity to the amount of sampled constraints"""
    def body() -> int:
        try:
            values = [float(a) for a in amounts.split(',') if a.strip()]
        except ValueError:
            raise InputError(f"Bad --amounts list: {amounts}")
        cfg = build_config(opts)
        _save_config(cfg, opts.get('save_config'))
        clusterer = Clusterer(cfg)
        result = clusterer.sweep(mode, values)
        path = write_json(result, cfg.output.directory / "sweep.json")

        click.echo(f"{'amount':>8}  " + "  ".join(f"{m:>18}" for m in result["rows"][0]["metrics"]))
        for row in result["rows"]:
            cells = "  ".join(f"{s['mean']:.4f} ± {s['std']:.4f}".rjust(18) for s in row["metrics"].values())
            click.echo(f"{row['amount']:>8.3f}  {cells}")
        click.echo(f"✅ Sweep written to {path}")
        return 0

    _execute(ctx, opts['verbose'], body)


@cli.command()
def version():
    """Show version information"""
    from . import __version__
    click.echo(f"entropy-clustering v{__version__}")


def main():
    cli(prog_name="entropy-cluster")


if __name__ == '__main__':
    main()

"""kgrefine command-line interface."""

from __future__ import annotations

import json
import sys

import click

from .graph import graph_stats, load_graph, save_graph
from .ingest import augment_graph, evaluation_counts, parse_patient_tables


@click.group()
def main():
    """Knowledge-graph refinement toolkit."""


# --- graph ---

@main.group()
def graph():
    """Graph file operations."""


@graph.command("stats")
@click.argument("kg_file", type=click.Path(exists=True))
def graph_stats_cmd(kg_file):
    s = graph_stats(load_graph(kg_file))
    click.echo(json.dumps({"node_count": s.node_count, "edge_count": s.edge_count,
                           "avg_degree": round(s.avg_degree, 4)}))


@graph.command("validate")
@click.argument("kg_file", type=click.Path(exists=True))
def graph_validate_cmd(kg_file):
    g = load_graph(kg_file)
    g.validate()
    click.echo(f"OK: {g.node_count} nodes, {g.edge_count} edges")


# --- ingest / synth ---

@main.command()
@click.option("--kg", required=True, type=click.Path(exists=True))
@click.option("--patients", required=True, type=click.Path(exists=True))
@click.option("--diagnoses", required=True, type=click.Path(exists=True))
@click.option("--labs", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path())
def ingest(kg, patients, diagnoses, labs, out, report_path):
    """Merge patient tables into the graph and write the augmented graph."""
    g = load_graph(kg)
    records = parse_patient_tables(patients, diagnoses, labs)
    aug, report = augment_graph(g, records)
    save_graph(aug, out)
    payload = {
        "patients_added": report.patients_added,
        "patients_skipped": report.patients_skipped,
        "nodes_added": report.nodes_added,
        "edges_added": report.edges_added,
        "evaluation_counts": report.evaluation_counts,
    }
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    click.echo(json.dumps({k: payload[k] for k in list(payload)[:4]}))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", default=0, type=int)
@click.option("--out-dir", required=True, type=click.Path())
def synth(config_path, seed, out_dir):
    """Generate a synthetic planted-edge benchmark."""
    from .synth import SynthConfig, generate_synthetic_cohort, write_synth_outputs
    cfg = SynthConfig()
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            cfg = SynthConfig(**json.load(fh))
    out = generate_synthetic_cohort(cfg, seed)
    paths = write_synth_outputs(out, out_dir)
    click.echo(json.dumps({k: str(v) for k, v in paths.items()}))


# --- walks / embeddings ---

@main.command()
@click.option("--kg", required=True, type=click.Path(exists=True))
@click.option("--strategy", type=click.Choice(["classic", "mid"]), default="classic")
@click.option("--depth", default=4, type=int)
@click.option("--count", default=100, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", required=True, type=click.Path())
def walk(kg, strategy, depth, count, seed, out):
    """Extract a walk corpus from a frozen graph."""
    from .walks import WalkConfig, extract_corpus
    g = load_graph(kg).freeze()
    corpus = extract_corpus(g, WalkConfig(depth, count, strategy, seed), out_path=out)
    click.echo(f"{len(corpus)} walks -> {out}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--dim", default=200, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--epochs", default=5, type=int)
@click.option("--window", default=5, type=int)
@click.option("--deterministic/--parallel", default=True)
@click.option("--out", required=True, type=click.Path())
def embed(corpus_path, dim, seed, epochs, window, deterministic, out):
    """Train skip-gram embeddings over a walk corpus."""
    from .walks import read_corpus
    from .embeddings import TrainHyperparams, build_vocab, save_model, train_skipgram
    corpus = read_corpus(corpus_path)
    vocab = build_vocab(corpus)
    hp = TrainHyperparams(window=window, epochs=epochs)
    model = train_skipgram(corpus, vocab, dim, hp, seed=seed,
                           deterministic=deterministic)
    save_model(model, out)
    click.echo(f"{len(vocab)} tokens, d={dim} -> {out}")


# --- link prediction ---

@main.command()
@click.option("--kg", required=True, type=click.Path(exists=True))
@click.option("--strategy", type=click.Choice(["random", "per-rule", "opposite"]),
              required=True)
@click.option("--count", "-n", default=None, type=int,
              help="negatives for the random strategy (default: balanced)")
@click.option("--per-rule-k", default=1, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", required=True, type=click.Path())
def sample(kg, strategy, count, per_rule_k, seed, out):
    """Build a positive/negative pair dataset CSV."""
    from .linkpred import (negative_pairs_opposite, negative_pairs_per_rule,
                           negative_pairs_random, positive_pairs, save_dataset)
    g = load_graph(kg)
    positives = positive_pairs(g)
    if strategy == "random":
        negatives = negative_pairs_random(g, count if count is not None else len(positives), seed)
    elif strategy == "per-rule":
        negatives = negative_pairs_per_rule(g, per_rule_k, seed)
    else:
        negatives = negative_pairs_opposite(g, positives)
    save_dataset(positives + negatives, out)
    click.echo(f"{len(positives)} positives, {len(negatives)} negatives -> {out}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--classifier", type=click.Choice(["rf", "svm", "logreg"]), required=True)
@click.option("--folds", default=10, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--grid", "grid_json", default=None, help="JSON hyperparameter grid")
@click.option("--out", required=True, type=click.Path())
def fit(model_path, dataset, classifier, folds, seed, grid_json, out):
    """Grid-search fit a classifier on a pair dataset."""
    from .embeddings import load_model
    from .linkpred import build_dataset, fit_classifier, load_dataset, save_classifier
    model = load_model(model_path)
    samples = load_dataset(dataset)
    X, y = build_dataset(model, samples)
    grid = json.loads(grid_json) if grid_json else None
    params, clf = fit_classifier(classifier, X, y, grid=grid, folds=folds, seed=seed)
    save_classifier(clf, out)
    click.echo(json.dumps({"best_params": {k: repr(v) for k, v in params.items()}}))


@main.command("predict")
@click.option("--clf", "clf_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--pairs", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def predict_cmd(clf_path, model_path, pairs, out):
    """Score (rule_id, factor_id) pairs from a CSV."""
    import csv as _csv
    import numpy as np
    from .embeddings import load_model
    from .linkpred import PairSample, featurize, load_classifier
    from .linkpred.predict import Prediction
    model = load_model(model_path)
    clf = load_classifier(clf_path)
    with open(pairs, newline="", encoding="utf-8") as fh:
        rows = list(_csv.DictReader(fh))
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["rule_id", "factor_id", "score", "label"])
        for row in rows:
            feat = featurize(model, PairSample(row["rule_id"], row["factor_id"], 0, "cli"))
            score = float(clf.predict_proba(np.atleast_2d(feat))[0])
            p = Prediction.from_score(row["rule_id"], row["factor_id"], score)
            writer.writerow([p.rule, p.factor, f"{p.score:.6f}", p.label])
    click.echo(f"{len(rows)} predictions -> {out}")


# --- evaluation harness ---

@main.command("eval")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def eval_cmd(config_path, out):
    """Run the full holdout pipeline from a JSON config."""
    from .evalharness import PipelineConfig, run_pipeline
    report = run_pipeline(PipelineConfig.from_json(config_path))
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    m = report["result"]["metrics"]
    click.echo(f"F1={m['f1']:.4f} macroF1={m['macro_f1']:.4f} "
               f"({report['wall_time_s']:.1f}s)")


@main.command()
@click.option("--axis", required=True,
              type=click.Choice(["walk-strategy", "negative-strategy",
                                 "dimension", "graph-variant"]))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def ablate(axis, config_path, out):
    """Run one ablation axis; writes CSV plus a readable text table."""
    from .evalharness import PipelineConfig, ablation_to_csv, ablation_to_text, run_ablation
    report = run_ablation(PipelineConfig.from_json(config_path), axis)
    ablation_to_csv(report, out)
    click.echo(ablation_to_text(report))


# --- review service ---

@main.command()
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--candidates", required=True, type=click.Path(exists=True))
@click.option("--kg", required=True, type=click.Path(exists=True))
@click.option("--ratings", required=True, type=click.Path())
def serve(port, host, candidates, kg, ratings):
    """Serve the expert review API (and the UI, if built)."""
    from pathlib import Path
    import uvicorn
    from .review import create_app
    static = Path("frontend") / "dist"
    app = create_app(candidates, kg, ratings,
                     static_dir=static if static.is_dir() else None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())

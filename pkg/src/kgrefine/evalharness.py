"""Experimental protocol: leakage-safe holdout of condition edges,
end-to-end pipeline runs (split -> walk -> embed -> sample -> fit ->
predict -> evaluate), and ablations over walk strategy, negative-sampling
strategy, embedding dimension, and graph variant.

The train graph has its held-out edges removed before any walk is
extracted; patient augmentation happens after the split so no derived
edge can reintroduce a held-out relation.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, asdict

import numpy as np

from .errors import InvalidAxis, MissingPrediction, TooFewEdges
from .graph import Graph, condition_edges, load_graph
from .ingest import PatientRecord, augment_graph, parse_patient_tables
from .synth import SynthConfig, generate_synthetic_cohort
from .walks import WalkConfig, extract_corpus, corpus_contains_triple
from .embeddings import TrainHyperparams, build_vocab, train_skipgram
from .linkpred import (
    PairSample,
    build_dataset,
    factor_universe,
    featurize,
    fit_classifier,
    negative_pairs_opposite,
    negative_pairs_per_rule,
    negative_pairs_random,
    positive_pairs,
)
from .linkpred.predict import Prediction
from .linkpred.sampling import _positive_set, opposite_factor


# --- holdout split ---

@dataclass
class SplitSpec:
    fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("holdout fraction must be in (0, 1)")


def holdout_split(graph: Graph, spec: SplitSpec) -> tuple[Graph, list[tuple[str, str, str]]]:
    """Remove fraction of condition edges; returns (train graph, removed triples)."""
    edges = condition_edges(graph)
    if len(edges) < 4:
        raise TooFewEdges(f"need >= 4 condition edges, have {len(edges)}")
    n_test = max(1, int(round(spec.fraction * len(edges))))
    rng = np.random.default_rng(spec.seed)
    picks = sorted(rng.choice(len(edges), size=n_test, replace=False).tolist())
    test = [edges[i] for i in picks]
    train = graph.copy()
    for src, label, dst in test:
        train.remove_edge(src, label, dst)
    return train, test


# --- metrics ---

@dataclass
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float

    @classmethod
    def from_confusion(cls, tp: int, fp: int, tn: int, fn: int) -> "Metrics":
        def prf(tp_, fp_, fn_):
            p = tp_ / (tp_ + fp_) if tp_ + fp_ else 0.0
            r = tp_ / (tp_ + fn_) if tp_ + fn_ else 0.0
            f = 2 * p * r / (p + r) if p + r else 0.0
            return p, r, f

        p_pos, r_pos, f_pos = prf(tp, fp, fn)
        p_neg, r_neg, f_neg = prf(tn, fn, fp)
        return cls(tp, fp, tn, fn, p_pos, r_pos, f_pos,
                   (p_pos + p_neg) / 2, (r_pos + r_neg) / 2, (f_pos + f_neg) / 2)


def evaluate(predictions: dict[tuple[str, str], Prediction],
             test_positives: list[tuple[str, str]],
             test_negatives: list[tuple[str, str]]) -> Metrics:
    tp = fp = tn = fn = 0
    for pair in test_positives:
        pred = predictions.get(pair)
        if pred is None:
            raise MissingPrediction(f"no prediction for positive pair {pair}")
        if pred.label == 1:
            tp += 1
        else:
            fn += 1
    for pair in test_negatives:
        pred = predictions.get(pair)
        if pred is None:
            raise MissingPrediction(f"no prediction for negative pair {pair}")
        if pred.label == 1:
            fp += 1
        else:
            tn += 1
    return Metrics.from_confusion(tp, fp, tn, fn)


# --- pipeline configuration ---

@dataclass
class PipelineConfig:
    # inputs: either file paths or an inline synthetic benchmark
    kg_path: str | None = None
    patients_path: str | None = None
    diagnoses_path: str | None = None
    labevents_path: str | None = None
    synth: dict | None = None
    synth_seed: int = 0
    # protocol
    augment: bool = True
    split_fraction: float = 0.25
    split_seed: int = 0
    walk_strategy: str = "classic"
    walk_depth: int = 4
    walks_per_node: int = 100
    walk_seed: int = 0
    dim: int = 100
    window: int = 5
    epochs: int = 5
    negatives_per_target: int = 5
    learning_rate: float = 0.025
    subsample: float = 0.0
    embed_seed: int = 0
    deterministic: bool = True
    negative_strategy: str = "opposite"  # random | per-rule | opposite
    per_rule_k: int = 1
    negative_seed: int = 0
    classifier: str = "random-forest"
    grid: dict | None = None  # None: single default cell, no CV
    folds: int = 10
    clf_seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


# pipeline runs skip CV for these single-cell grids; pass an explicit grid
# to turn tuning on
SINGLE_CELL_GRIDS = {
    "logreg": {"C": [1.0]},
    "svm": {"kernel": ["rbf"], "C": [1.0]},
    "random-forest": {"n_trees": [100], "max_features": ["sqrt"], "bootstrap": [True]},
}


def load_inputs(cfg: PipelineConfig) -> tuple[Graph, list[PatientRecord]]:
    if cfg.synth is not None:
        out = generate_synthetic_cohort(SynthConfig(**cfg.synth), cfg.synth_seed)
        # route the generated tables through the same CSV parser as real data
        from .synth import write_synth_outputs
        import tempfile
        with tempfile.TemporaryDirectory() as tmp:
            paths = write_synth_outputs(out, tmp)
            records = parse_patient_tables(paths["patients"], paths["diagnoses"],
                                           paths["labevents"])
        return out.graph, records
    if cfg.kg_path is None:
        raise ValueError("config needs either kg_path or synth")
    graph = load_graph(cfg.kg_path)
    records: list[PatientRecord] = []
    if cfg.patients_path:
        records = parse_patient_tables(cfg.patients_path, cfg.diagnoses_path,
                                       cfg.labevents_path)
    return graph, records


class PipelineRunner:
    """Executes pipeline cells over one base graph + cohort, caching walk
    corpora per (graph variant, strategy) and embeddings per (corpus, dim)
    so ablation axes stay isolated."""

    def __init__(self, base_graph: Graph, records: list[PatientRecord],
                 cfg: PipelineConfig):
        self.cfg = cfg
        self.records = records
        split = SplitSpec(cfg.split_fraction, cfg.split_seed)
        self.train_base, self.test_triples = holdout_split(base_graph, split)
        self._graphs: dict[bool, Graph] = {}
        self._corpora: dict = {}
        self._models: dict = {}
        self._test_neg: list[tuple[str, str]] | None = None
        self.timings: dict[str, float] = {}

    def _timed(self, key, fn):
        t0 = time.perf_counter()
        result = fn()
        self.timings[key] = self.timings.get(key, 0.0) + time.perf_counter() - t0
        return result

    def train_graph(self, augment: bool) -> Graph:
        if augment not in self._graphs:
            def build():
                if augment:
                    aug, _ = augment_graph(self.train_base, self.records)
                    return aug.freeze()
                return self.train_base.copy(frozen=True)
            self._graphs[augment] = self._timed("augment", build)
        return self._graphs[augment]

    def corpus(self, augment: bool, strategy: str):
        key = (augment, strategy)
        if key not in self._corpora:
            g = self.train_graph(augment)
            wc = WalkConfig(self.cfg.walk_depth, self.cfg.walks_per_node,
                            strategy, self.cfg.walk_seed)
            self._corpora[key] = self._timed("walks", lambda: extract_corpus(g, wc))
        return self._corpora[key]

    def model(self, augment: bool, strategy: str, dim: int):
        key = (augment, strategy, dim)
        if key not in self._models:
            corpus = self.corpus(augment, strategy)
            vocab = build_vocab(corpus)
            hp = TrainHyperparams(window=self.cfg.window, epochs=self.cfg.epochs,
                                  negatives=self.cfg.negatives_per_target,
                                  learning_rate=self.cfg.learning_rate,
                                  subsample=self.cfg.subsample)
            self._models[key] = self._timed("embed", lambda: train_skipgram(
                corpus, vocab, dim, hp, seed=self.cfg.embed_seed,
                deterministic=self.cfg.deterministic))
        return self._models[key]

    def leakage_hits(self, augment: bool, strategy: str) -> int:
        corpus = self.corpus(augment, strategy)
        return sum(1 for t in self.test_triples if corpus_contains_triple(corpus, t))

    def _train_negatives(self, graph: Graph, positives, strategy: str, k: int):
        if strategy == "random":
            return negative_pairs_random(graph, len(positives), self.cfg.negative_seed)
        if strategy == "per-rule":
            return negative_pairs_per_rule(graph, k, self.cfg.negative_seed)
        if strategy == "opposite":
            return negative_pairs_opposite(graph, positives)
        raise ValueError(f"unknown negative strategy: {strategy}")

    def test_negatives(self) -> list[tuple[str, str]]:
        """Test negatives come from the config's own negative strategy and
        graph variant, and the same set is reused by every ablation cell so
        per-cell scores stay comparable."""
        if self._test_neg is None:
            cfg = self.cfg
            graph = self.train_graph(cfg.augment)
            positives = positive_pairs(graph)
            base_train = self._train_negatives(graph, positives,
                                               cfg.negative_strategy, cfg.per_rule_k)
            test_pos = [(r, f) for r, _, f in self.test_triples]
            used = (_positive_set(graph)
                    | {(s.rule, s.factor) for s in positives + base_train}
                    | set(test_pos))
            self._test_neg = self._build_test_negatives(
                graph, cfg.negative_strategy, cfg.per_rule_k, used)
        return self._test_neg

    def _build_test_negatives(self, graph: Graph, strategy: str, k: int,
                              used: set[tuple[str, str]]):
        """Same strategy as training, over pairs unseen in training."""
        test_pos = [(r, f) for r, _, f in self.test_triples]
        rng = np.random.default_rng(self.cfg.negative_seed + 1)
        factors = factor_universe(graph)
        out = []
        if strategy == "opposite":
            for rule, factor in test_pos:
                opp = opposite_factor(graph, factor)
                if opp is None:
                    continue
                pair = (rule, opp)
                if pair in used or pair in set(test_pos):
                    continue
                used.add(pair)
                out.append(pair)
        elif strategy == "random":
            rules = sorted({r for r, _ in test_pos})
            absent = [(r, f) for r in rules for f in factors if (r, f) not in used]
            take = min(len(test_pos), len(absent))
            picks = rng.choice(len(absent), size=take, replace=False)
            out = [absent[int(i)] for i in sorted(picks)]
        elif strategy == "per-rule":
            for rule in sorted({r for r, _ in test_pos}):
                pool = [f for f in factors if (rule, f) not in used]
                take = min(k, len(pool))
                picks = rng.choice(len(pool), size=take, replace=False)
                out.extend((rule, pool[int(i)]) for i in sorted(picks))
        else:
            raise ValueError(f"unknown negative strategy: {strategy}")
        return out

    def run_cell(self, augment: bool | None = None, strategy: str | None = None,
                 dim: int | None = None, negative_strategy: str | None = None,
                 per_rule_k: int | None = None, classifier: str | None = None) -> dict:
        cfg = self.cfg
        augment = cfg.augment if augment is None else augment
        strategy = cfg.walk_strategy if strategy is None else strategy
        dim = cfg.dim if dim is None else dim
        neg = cfg.negative_strategy if negative_strategy is None else negative_strategy
        k = cfg.per_rule_k if per_rule_k is None else per_rule_k
        clf_kind = cfg.classifier if classifier is None else classifier

        graph = self.train_graph(augment)
        model = self.model(augment, strategy, dim)

        positives = positive_pairs(graph)
        negatives = self._train_negatives(graph, positives, neg, k)
        samples = positives + negatives
        X, y = build_dataset(model, samples)
        grid = cfg.grid if cfg.grid is not None else SINGLE_CELL_GRIDS[
            "random-forest" if clf_kind == "rf" else clf_kind]
        best_params, clf = self._timed("fit", lambda: fit_classifier(
            clf_kind, X, y, grid=grid, folds=cfg.folds, seed=cfg.clf_seed))

        test_pos = [(r, f) for r, _, f in self.test_triples]
        test_neg = self.test_negatives()

        def _predict_all():
            preds = {}
            for rule, factor in test_pos + test_neg:
                feat = featurize(model, PairSample(rule, factor, 0, "test"))
                score = clf.predict_proba(np.atleast_2d(feat))[0]
                preds[(rule, factor)] = Prediction.from_score(rule, factor, score)
            return preds
        predictions = self._timed("predict", _predict_all)
        metrics = evaluate(predictions, test_pos, test_neg)
        return {
            "augment": augment,
            "walk_strategy": strategy,
            "dim": dim,
            "negative_strategy": neg,
            "per_rule_k": k,
            "classifier": clf_kind,
            "best_params": {k_: repr(v) for k_, v in best_params.items()},
            "n_train_positives": len(positives),
            "n_train_negatives": len(negatives),
            "n_test_positives": len(test_pos),
            "n_test_negatives": len(test_neg),
            "leakage_hits": self.leakage_hits(augment, strategy),
            "metrics": asdict(metrics),
        }


def run_pipeline(cfg: PipelineConfig) -> dict:
    """One full protocol run; returns a reproducible report."""
    t0 = time.perf_counter()
    base_graph, records = load_inputs(cfg)
    runner = PipelineRunner(base_graph, records, cfg)
    cell = runner.run_cell()
    return {
        "report_version": 1,
        "config": cfg.to_dict(),
        "config_fingerprint": cfg.fingerprint(),
        "seeds": {
            "split": cfg.split_seed, "walk": cfg.walk_seed,
            "embed": cfg.embed_seed, "negative": cfg.negative_seed,
            "classifier": cfg.clf_seed, "synth": cfg.synth_seed,
        },
        "timings_s": dict(runner.timings),
        "wall_time_s": time.perf_counter() - t0,
        "result": cell,
    }


AXES = ("walk-strategy", "negative-strategy", "dimension", "graph-variant")


def run_ablation(cfg: PipelineConfig, axis: str) -> dict:
    """Grid over one axis with everything else fixed; one shared split."""
    if axis not in AXES:
        raise InvalidAxis(f"axis must be one of {AXES}")
    t0 = time.perf_counter()
    base_graph, records = load_inputs(cfg)
    runner = PipelineRunner(base_graph, records, cfg)
    cells = []
    if axis == "walk-strategy":
        for strategy in ("classic", "mid"):
            for clf in ("logreg", "svm", "random-forest"):
                cells.append(runner.run_cell(strategy=strategy, classifier=clf))
    elif axis == "negative-strategy":
        cells.append(runner.run_cell(negative_strategy="random"))
        for k in (1, 3, 5):
            cells.append(runner.run_cell(negative_strategy="per-rule", per_rule_k=k))
        cells.append(runner.run_cell(negative_strategy="opposite"))
    elif axis == "dimension":
        for dim in (50, 100, 200, 500, 1000, 2000):
            cells.append(runner.run_cell(dim=dim))
    else:  # graph-variant
        for augment in (False, True):
            cells.append(runner.run_cell(augment=augment))
    return {
        "report_version": 1,
        "axis": axis,
        "config": cfg.to_dict(),
        "config_fingerprint": cfg.fingerprint(),
        "timings_s": dict(runner.timings),
        "wall_time_s": time.perf_counter() - t0,
        "cells": cells,
    }


_CELL_COLUMNS = ["augment", "walk_strategy", "dim", "negative_strategy",
                 "per_rule_k", "classifier"]


def ablation_to_csv(report: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CELL_COLUMNS + ["precision", "recall", "f1", "macro_f1"])
        for cell in report["cells"]:
            m = cell["metrics"]
            writer.writerow([cell[c] for c in _CELL_COLUMNS]
                            + [f"{m['precision']:.4f}", f"{m['recall']:.4f}",
                               f"{m['f1']:.4f}", f"{m['macro_f1']:.4f}"])


def ablation_to_text(report: dict) -> str:
    lines = [f"ablation axis: {report['axis']}"]
    for cell in report["cells"]:
        desc = " ".join(f"{c}={cell[c]}" for c in _CELL_COLUMNS)
        m = cell["metrics"]
        lines.append(f"{desc}  P={m['precision']:.4f} R={m['recall']:.4f} "
                     f"F1={m['f1']:.4f} macroF1={m['macro_f1']:.4f}")
    return "\n".join(lines)

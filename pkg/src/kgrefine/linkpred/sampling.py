"""Positive/negative rule-riskfactor pair datasets and featurization.

Positives come from existing condition edges. Negatives come from one of
three strategies: uniformly random absent pairs, per-rule sampling of
unconnected factors, or explicit polarity opposites of known positives.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientAbsentPairs
from ..graph import Graph, NodeKind, RULE_KINDS, condition_edges
from ..embeddings import EmbeddingModel, vector


@dataclass(frozen=True)
class PairSample:
    rule: str
    factor: str
    label: int  # 1 positive, 0 negative
    source: str  # existing-edge | random | per-rule | opposite


def positive_pairs(graph: Graph) -> list[PairSample]:
    seen = set()
    out = []
    for rule, _, factor in condition_edges(graph):
        if (rule, factor) in seen:
            continue
        seen.add((rule, factor))
        out.append(PairSample(rule, factor, 1, "existing-edge"))
    return out


def factor_universe(graph: Graph) -> list[str]:
    """Risk-factor candidates: condition-edge targets plus all polarity
    nodes of graph parameters (targets of evaluates_to edges)."""
    factors = {dst for _, _, dst in condition_edges(graph)}
    for src, label, dst in graph.triples():
        if label == "evaluates_to" and graph.nodes[src].kind == NodeKind.PARAMETER:
            factors.add(dst)
    return sorted(factors)


def _rule_ids(graph: Graph) -> list[str]:
    return sorted(n.id for n in graph.nodes.values() if n.kind in RULE_KINDS)


def _positive_set(graph: Graph) -> set[tuple[str, str]]:
    return {(r, f) for r, _, f in condition_edges(graph)}


def negative_pairs_random(graph: Graph, n: int, seed: int) -> list[PairSample]:
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    rules = _rule_ids(graph)
    factors = factor_universe(graph)
    existing = _positive_set(graph)
    absent = [(r, f) for r in rules for f in factors if (r, f) not in existing]
    if len(absent) < n:
        raise InsufficientAbsentPairs(
            f"requested {n} negatives but only {len(absent)} absent pairs exist")
    picks = rng.choice(len(absent), size=n, replace=False)
    return [PairSample(*absent[int(i)], 0, "random") for i in sorted(picks)]


def negative_pairs_per_rule(graph: Graph, k: int, seed: int) -> list[PairSample]:
    rng = np.random.default_rng(seed)
    factors = factor_universe(graph)
    existing = _positive_set(graph)
    rules_with_pos = sorted({r for r, _ in existing})
    out = []
    for rule in rules_with_pos:
        pool = [f for f in factors if (rule, f) not in existing]
        if not pool:
            continue
        take = min(k, len(pool))
        picks = rng.choice(len(pool), size=take, replace=False)
        out.extend(PairSample(rule, pool[int(i)], 0, "per-rule") for i in sorted(picks))
    return out


_OPPOSITE_SUFFIX = {"_increased": "_decreased", "_decreased": "_increased"}


def opposite_factor(graph: Graph, factor: str) -> str | None:
    """Polarity opposite by explicit oppositeOf edge, else by suffix."""
    for label, dst in graph.out_edges(factor):
        if label == "oppositeOf":
            return dst
    for suffix, flipped in _OPPOSITE_SUFFIX.items():
        if factor.endswith(suffix):
            opp = factor[: -len(suffix)] + flipped
            return opp if graph.has_node(opp) else None
    return None


def negative_pairs_opposite(graph: Graph, positives: list[PairSample]) -> list[PairSample]:
    existing = _positive_set(graph)
    pos_pairs = existing | {(p.rule, p.factor) for p in positives}
    out = []
    seen = set()
    for p in positives:
        opp = opposite_factor(graph, p.factor)
        if opp is None:
            continue
        pair = (p.rule, opp)
        if pair in pos_pairs or pair in seen:
            continue
        seen.add(pair)
        out.append(PairSample(p.rule, opp, 0, "opposite"))
    return out


def featurize(model: EmbeddingModel, pair: PairSample) -> np.ndarray:
    """Rule vector then factor vector, concatenated (length 2d)."""
    return np.concatenate([vector(model, pair.rule), vector(model, pair.factor)])


def build_dataset(model: EmbeddingModel, samples: list[PairSample]):
    X = np.empty((len(samples), 2 * model.dim))
    y = np.empty(len(samples), dtype=np.int64)
    for i, s in enumerate(samples):
        X[i] = featurize(model, s)
        y[i] = s.label
    return X, y


def save_dataset(samples: list[PairSample], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rule_id", "factor_id", "label", "source"])
        for s in samples:
            writer.writerow([s.rule, s.factor, s.label, s.source])


def load_dataset(path) -> list[PairSample]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [PairSample(r["rule_id"], r["factor_id"], int(r["label"]), r["source"])
                for r in reader]

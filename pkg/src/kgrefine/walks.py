"""Random-walk corpus extraction over a frozen graph.

Two strategies: classic walks follow outgoing edges only; mid-walks grow a
window around the origin over both edge directions, so the origin can end
up at any position. Walk tokens alternate node ids and edge labels.

Every node gets its own RNG stream derived from (global seed, node id), so
the corpus is deterministic regardless of iteration or scheduling order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import FrozenGraphError, UnknownNode
from .graph import Graph


@dataclass
class WalkConfig:
    depth: int = 4  # edge hops, so up to depth+1 node tokens
    walks_per_node: int = 100
    strategy: str = "classic"  # classic | mid
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1 or self.walks_per_node < 1:
            raise ValueError("depth and walks_per_node must be >= 1")
        if self.strategy not in ("classic", "mid"):
            raise ValueError(f"unknown walk strategy: {self.strategy}")


@dataclass
class Walk:
    tokens: list[str]
    origin: str
    strategy: str


def _node_rng(seed: int, node_id: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{node_id}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _require_frozen(graph: Graph):
    if not graph.frozen:
        raise FrozenGraphError("walk extraction requires a frozen graph")


def classic_walks(graph: Graph, start: str, config: WalkConfig) -> list[Walk]:
    _require_frozen(graph)
    if not graph.has_node(start):
        raise UnknownNode(f"unknown node: {start}")
    rng = _node_rng(config.seed, start)
    walks = []
    for _ in range(config.walks_per_node):
        tokens = [start]
        cur = start
        for _ in range(config.depth):
            out = graph.out_edges(cur)
            if not out:
                break
            label, dst = out[int(rng.integers(len(out)))]
            tokens.append(label)
            tokens.append(dst)
            cur = dst
        walks.append(Walk(tokens, origin=start, strategy="classic"))
    return walks


def mid_walks(graph: Graph, node: str, config: WalkConfig) -> list[Walk]:
    _require_frozen(graph)
    if not graph.has_node(node):
        raise UnknownNode(f"unknown node: {node}")
    rng = _node_rng(config.seed, node)
    walks = []
    for _ in range(config.walks_per_node):
        tokens = [node]
        left = right = node
        for _ in range(config.depth):
            incoming = graph.in_edges(left)
            outgoing = graph.out_edges(right)
            total = len(incoming) + len(outgoing)
            if total == 0:
                break
            pick = int(rng.integers(total))
            if pick < len(incoming):
                src, label = incoming[pick]
                tokens = [src, label] + tokens
                left = src
            else:
                label, dst = outgoing[pick - len(incoming)]
                tokens.append(label)
                tokens.append(dst)
                right = dst
        walks.append(Walk(tokens, origin=node, strategy="mid"))
    return walks


_STRATEGIES = {"classic": classic_walks, "mid": mid_walks}


def extract_corpus(graph: Graph, config: WalkConfig, out_path=None) -> list[list[str]]:
    """walks_per_node walks per graph node; optionally written one walk per
    line, space-separated."""
    _require_frozen(graph)
    walk_fn = _STRATEGIES[config.strategy]
    corpus: list[list[str]] = []
    for node_id in sorted(graph.nodes):
        corpus.extend(w.tokens for w in walk_fn(graph, node_id, config))
    if out_path is not None:
        write_corpus(corpus, out_path)
    return corpus


def write_corpus(corpus: list[list[str]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tokens in corpus:
            fh.write(" ".join(tokens))
            fh.write("\n")


def read_corpus(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh if line.strip()]


def corpus_contains_triple(corpus: list[list[str]], triple: tuple[str, str, str]) -> bool:
    """Exact scan for a (src, label, dst) token sequence; the leakage guard."""
    src, label, dst = triple
    for tokens in corpus:
        for i in range(0, len(tokens) - 2, 2):
            if tokens[i] == src and tokens[i + 1] == label and tokens[i + 2] == dst:
                return True
    return False

import pytest

from kgrefine.errors import FrozenGraphError, UnknownNode
from kgrefine.graph import Graph, Node, NodeKind
from kgrefine.walks import (
    WalkConfig,
    classic_walks,
    corpus_contains_triple,
    extract_corpus,
    mid_walks,
    read_corpus,
)


def chain_graph():
    """a -> b -> c -> d -> e, plus a side branch b -> x."""
    g = Graph()
    for nid in "abcdex":
        g.add_node(Node(nid, NodeKind.FINDING))
    for src, dst in [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("b", "x")]:
        g.add_edge(src, f"to_{dst}", dst)
    return g.freeze()


def assert_alternation(graph, tokens):
    """Odd positions are edge labels, even positions node ids, and each
    (node, label, node) window is a real triple."""
    assert len(tokens) % 2 == 1
    for i in range(0, len(tokens) - 2, 2):
        src, label, dst = tokens[i], tokens[i + 1], tokens[i + 2]
        assert graph.has_node(src) and graph.has_node(dst)
        assert graph.has_triple(src, label, dst)


class TestClassicWalks:
    def test_requires_frozen_graph(self):
        g = Graph()
        g.add_node(Node("a", NodeKind.FINDING))
        with pytest.raises(FrozenGraphError):
            classic_walks(g, "a", WalkConfig())

    def test_unknown_start(self):
        with pytest.raises(UnknownNode):
            classic_walks(chain_graph(), "nope", WalkConfig())

    def test_walk_count_and_origin(self):
        walks = classic_walks(chain_graph(), "a", WalkConfig(walks_per_node=100))
        assert len(walks) == 100
        for w in walks:
            assert w.tokens[0] == "a"  # classic origin is always first
            assert w.origin == "a"

    def test_depth_bounds_token_count(self):
        g = chain_graph()
        for w in classic_walks(g, "a", WalkConfig(depth=4, walks_per_node=50)):
            node_tokens = w.tokens[0::2]
            assert len(node_tokens) <= 5  # depth 4 -> at most 5 nodes
            assert len(w.tokens) <= 9
            assert_alternation(g, w.tokens)

    def test_walks_follow_outgoing_edges_only(self):
        g = chain_graph()
        for w in classic_walks(g, "c", WalkConfig(depth=4, walks_per_node=50)):
            assert "a" not in w.tokens and "b" not in w.tokens

    def test_dead_end_truncates(self):
        (w,) = classic_walks(chain_graph(), "e", WalkConfig(walks_per_node=1))
        assert w.tokens == ["e"]


class TestMidWalks:
    def test_origin_may_sit_anywhere(self):
        g = chain_graph()
        walks = mid_walks(g, "c", WalkConfig(depth=2, walks_per_node=100))
        positions = set()
        for w in walks:
            assert "c" in w.tokens
            positions.add(w.tokens.index("c") // 2)
            assert_alternation(g, w.tokens)
        assert len(positions) > 1  # grows both ways, not only forward

    def test_reaches_in_neighbours(self):
        g = chain_graph()
        tokens = set()
        for w in mid_walks(g, "e", WalkConfig(depth=4, walks_per_node=100)):
            tokens.update(w.tokens)
        assert "a" in tokens  # only reachable against edge direction

    def test_token_budget(self):
        g = chain_graph()
        for w in mid_walks(g, "c", WalkConfig(depth=4, walks_per_node=100)):
            assert len(w.tokens[0::2]) <= 5


class TestCorpus:
    def test_exactly_walks_per_node_for_every_node(self):
        g = chain_graph()
        corpus = extract_corpus(g, WalkConfig(walks_per_node=100))
        assert len(corpus) == 100 * g.node_count
        origins = [w[0] for w in corpus]
        for nid in g.nodes:
            assert origins.count(nid) == 100

    def test_bit_identical_across_reruns(self):
        g = chain_graph()
        cfg = WalkConfig(depth=4, walks_per_node=100, strategy="mid", seed=5)
        assert extract_corpus(g, cfg) == extract_corpus(g, cfg)

    def test_seed_changes_corpus(self):
        g = chain_graph()
        a = extract_corpus(g, WalkConfig(strategy="mid", seed=0))
        b = extract_corpus(g, WalkConfig(strategy="mid", seed=1))
        assert a != b

    def test_write_read_round_trip(self, tmp_path):
        g = chain_graph()
        path = tmp_path / "walks.txt"
        corpus = extract_corpus(g, WalkConfig(walks_per_node=10), out_path=path)
        assert read_corpus(path) == corpus

    def test_config_validation(self):
        with pytest.raises(ValueError):
            WalkConfig(depth=0)
        with pytest.raises(ValueError):
            WalkConfig(strategy="zigzag")


class TestLeakScan:
    def test_finds_present_triple(self):
        corpus = [["a", "to_b", "b", "to_c", "c"]]
        assert corpus_contains_triple(corpus, ("a", "to_b", "b"))
        assert corpus_contains_triple(corpus, ("b", "to_c", "c"))

    def test_respects_token_alignment(self):
        # the triple exists as a subsequence but never node-aligned
        corpus = [["x", "a", "to_b", "b", "c"]]
        assert not corpus_contains_triple(corpus, ("a", "to_b", "b"))

    def test_removed_edge_never_appears(self):
        g = Graph()
        for nid in "abc":
            g.add_node(Node(nid, NodeKind.FINDING))
        g.add_edge("a", "r", "b")
        g.add_edge("b", "r", "c")
        g.remove_edge("a", "r", "b")
        corpus = extract_corpus(g.freeze(), WalkConfig(strategy="mid", walks_per_node=50))
        assert not corpus_contains_triple(corpus, ("a", "r", "b"))
        assert corpus_contains_triple(corpus, ("b", "r", "c"))

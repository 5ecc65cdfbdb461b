"""Acceptance suite for the refinement pipeline.

Criteria 1-4 run the frozen synthetic benchmark (500 patients, no background
measurements, mid-walks, d=100, 5 epochs, subsample 1e-3, opposite negatives,
random forest) over seeds 0..4. The remaining criteria are exact or
oracle-backed properties. Each criterion prints one PASS/FAIL line.

The criterion 3 threshold (mean positive-class F1 >= 0.52) was calibrated
once from a pilot run of this exact benchmark and is frozen; under the
leakage-free protocol the withheld positives are only reachable through
patient co-occurrence, which caps the achievable F1 well below what the
training edges alone would suggest.
"""

import time

import numpy as np
import pytest
from scipy.optimize import minimize

from kgrefine.embeddings import (
    TrainHyperparams,
    build_vocab,
    cosine,
    load_model,
    pair_gradients,
    save_model,
    train_skipgram,
    vector,
)
from kgrefine.errors import UnitMismatch
from kgrefine.evalharness import (
    Metrics,
    PipelineConfig,
    PipelineRunner,
    SplitSpec,
    evaluate,
    holdout_split,
    load_inputs,
    run_pipeline,
)
from kgrefine.graph import Graph, Node, NodeKind, ReferenceRange, condition_edges, load_graph, save_graph
from kgrefine.ingest import CLOSURE, LabMeasurement, consequence_closure, evaluate_measurement
from kgrefine.linkpred import DecisionTree, LogRegClassifier, RandomForestClassifier, SVMClassifier
from kgrefine.linkpred.predict import Prediction
from kgrefine.walks import WalkConfig, extract_corpus, mid_walks

BENCH_SEEDS = range(5)
RUNTIME_BUDGET_S = 600.0
RECOVERY_F1_FLOOR = 0.52  # calibrated once from the pilot run, frozen


@pytest.fixture
def report(capsys):
    """One PASS/FAIL line per criterion, written past pytest's capture."""
    def _report(num, name, ok, detail=""):
        line = f"[criterion {num:2d}] {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        with capsys.disabled():
            print(line, flush=True)
        assert ok, line
    return _report


def bench_config(seed):
    return PipelineConfig(
        synth={"n_patients": 500, "p_background_measurement": 0.0},
        synth_seed=seed, split_seed=seed, walk_seed=seed, embed_seed=seed,
        negative_seed=seed, clf_seed=seed,
        walk_strategy="mid", epochs=5, subsample=1e-3,
        negative_strategy="opposite", classifier="random-forest", dim=100)


@pytest.fixture(scope="module")
def benchmark():
    """5-seed benchmark grid; the per-seed runner caches graphs, corpora and
    models so the five cells share the expensive stages."""
    t0 = time.perf_counter()
    f1 = {name: [] for name in
          ("baseline", "aug-opposite", "aug-random", "aug-pr1", "aug-pr5")}
    leakage = []
    for seed in BENCH_SEEDS:
        cfg = bench_config(seed)
        base, records = load_inputs(cfg)
        runner = PipelineRunner(base, records, cfg)
        cells = {
            "baseline": runner.run_cell(augment=False),
            "aug-opposite": runner.run_cell(augment=True),
            "aug-random": runner.run_cell(augment=True, negative_strategy="random"),
            "aug-pr1": runner.run_cell(augment=True, negative_strategy="per-rule", per_rule_k=1),
            "aug-pr5": runner.run_cell(augment=True, negative_strategy="per-rule", per_rule_k=5),
        }
        for name, cell in cells.items():
            f1[name].append(cell["metrics"]["f1"])
            leakage.append(cell["leakage_hits"])
    means = {name: float(np.mean(vals)) for name, vals in f1.items()}
    return {"means": means, "f1": f1, "leakage": leakage,
            "elapsed_s": time.perf_counter() - t0}


class TestBenchmarkCriteria:
    def test_criterion_01_augmentation_benefit(self, benchmark, report):
        gap = benchmark["means"]["aug-opposite"] - benchmark["means"]["baseline"]
        within_budget = benchmark["elapsed_s"] < RUNTIME_BUDGET_S
        report(1, "augmentation benefit", gap >= 0.05 and within_budget,
               f"gap={gap:+.4f}, elapsed={benchmark['elapsed_s']:.0f}s")

    def test_criterion_02_negative_strategy_trend(self, benchmark, report):
        m = benchmark["means"]
        ok = (m["aug-opposite"] >= m["aug-random"] - 0.02
              and m["aug-pr5"] <= m["aug-pr1"] + 0.02)
        report(2, "negative-strategy trend", ok,
               f"opposite={m['aug-opposite']:.4f} random={m['aug-random']:.4f} "
               f"k1={m['aug-pr1']:.4f} k5={m['aug-pr5']:.4f}")

    def test_criterion_03_planted_edge_recovery(self, benchmark, report):
        mean = benchmark["means"]["aug-opposite"]
        report(3, "planted-edge recovery", mean >= RECOVERY_F1_FLOOR,
               f"mean F1={mean:.4f}, floor={RECOVERY_F1_FLOOR}")

    def test_criterion_04_leakage_guard(self, benchmark, report):
        hits = sum(benchmark["leakage"])
        report(4, "leakage guard", hits == 0, f"hits={hits}")


def test_criterion_05_walk_invariants(report):
    g = Graph()
    for nid in "abcdex":
        g.add_node(Node(nid, NodeKind.FINDING))
    for src, dst in [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("b", "x")]:
        g.add_edge(src, f"to_{dst}", dst)
    g.freeze()
    cfg = WalkConfig(depth=4, walks_per_node=100, strategy="mid", seed=0)
    ok = True
    walks = mid_walks(g, "c", cfg)
    ok &= len(walks) == 100
    for w in walks:
        ok &= "c" in w.tokens
        ok &= len(w.tokens) % 2 == 1
        ok &= len(w.tokens[0::2]) <= 5
        for i in range(0, len(w.tokens) - 2, 2):
            ok &= g.has_triple(w.tokens[i], w.tokens[i + 1], w.tokens[i + 2])
    corpus_a = extract_corpus(g, cfg)
    corpus_b = extract_corpus(g, cfg)
    ok &= corpus_a == corpus_b
    ok &= len(corpus_a) == 100 * g.node_count
    report(5, "walk invariants", bool(ok))


def test_criterion_06_embedding_numerics(report):
    rng = np.random.default_rng(42)
    eps = 1e-6
    grad_ok = True
    for _ in range(100):
        dim = int(rng.integers(2, 10))
        n_neg = int(rng.integers(1, 5))
        v = rng.normal(0, 1, dim)
        u_c = rng.normal(0, 1, dim)
        u_neg = rng.normal(0, 1, (n_neg, dim))
        _, g_v, g_uc, g_uneg = pair_gradients(v, u_c, u_neg)
        loss = lambda v_, uc_, un_: pair_gradients(v_, uc_, un_)[0]
        for k in range(dim):
            d = np.zeros(dim); d[k] = eps
            num = (loss(v + d, u_c, u_neg) - loss(v - d, u_c, u_neg)) / (2 * eps)
            grad_ok &= abs(num - g_v[k]) <= 1e-4 * max(1.0, abs(num))
            num = (loss(v, u_c + d, u_neg) - loss(v, u_c - d, u_neg)) / (2 * eps)
            grad_ok &= abs(num - g_uc[k]) <= 1e-4 * max(1.0, abs(num))
        for j in range(n_neg):
            for k in range(dim):
                dm = np.zeros((n_neg, dim)); dm[j, k] = eps
                num = (loss(v, u_c, u_neg + dm) - loss(v, u_c, u_neg - dm)) / (2 * eps)
                grad_ok &= abs(num - g_uneg[j, k]) <= 1e-4 * max(1.0, abs(num))

    def clique_corpus(seed, n=300):
        r = np.random.default_rng(seed)
        corpus = []
        for _ in range(n):
            corpus.append(list(r.permutation(["a1", "a2", "a3"])))
            corpus.append(list(r.permutation(["b1", "b2", "b3"])))
        return corpus

    corpus = clique_corpus(1)
    model = train_skipgram(corpus, build_vocab(corpus), 16,
                           TrainHyperparams(window=2, epochs=6), seed=0)
    loss_ok = all(later <= earlier + 1e-6 for earlier, later
                  in zip(model.epoch_losses, model.epoch_losses[1:]))

    sep = 0
    for seed in range(5):
        corpus = clique_corpus(seed)
        m = train_skipgram(corpus, build_vocab(corpus), 16,
                           TrainHyperparams(window=2, epochs=5), seed=seed)
        if cosine(vector(m, "a1"), vector(m, "a2")) > \
           cosine(vector(m, "a1"), vector(m, "b1")):
            sep += 1
    report(6, "embedding numerics", grad_ok and loss_ok and sep == 5,
           f"gradients={'ok' if grad_ok else 'bad'}, "
           f"loss-monotone={'ok' if loss_ok else 'bad'}, separation={sep}/5")


def test_criterion_07_classifier_oracles(report):
    rng = np.random.default_rng(1)
    X = np.vstack([rng.normal(-1, 1, (25, 4)), rng.normal(1, 1, (25, 4))])
    y = np.array([0] * 25 + [1] * 25)

    ours = LogRegClassifier(C=1.0).fit(X, y)
    ys = np.where(y > 0, 1.0, -1.0)
    Xb = np.hstack([X, np.ones((50, 1))])
    reg = np.ones(5); reg[-1] = 0.0

    def obj(theta):
        z = ys * (Xb @ theta)
        return 0.5 * np.sum(reg * theta * theta) + np.sum(np.logaddexp(0.0, -z))

    def grad(theta):
        z = ys * (Xb @ theta)
        s = 1.0 / (1.0 + np.exp(np.clip(z, -500, 500)))
        return reg * theta - Xb.T @ (ys * s)

    res = minimize(obj, np.zeros(5), jac=grad, method="BFGS",
                   options={"gtol": 1e-10, "maxiter": 1000})
    logreg_ok = (np.max(np.abs(ours.w - res.x[:-1])) <= 1e-3
                 and abs(ours.b - res.x[-1]) <= 1e-3)

    from cvxopt import matrix, solvers
    rng2 = np.random.default_rng(5)
    Xs = np.vstack([rng2.normal(-2, 1, (8, 2)), rng2.normal(2, 1, (8, 2))])
    ysvm = np.array([0] * 8 + [1] * 8)
    svm = SVMClassifier(kernel="linear", C=1.0).fit(Xs, ysvm)
    yss = np.where(ysvm > 0, 1.0, -1.0)
    n = len(yss)
    P = matrix(np.outer(yss, yss) * (Xs @ Xs.T))
    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-10
    solvers.options["reltol"] = 1e-10
    sol = solvers.qp(P, matrix(-np.ones(n)),
                     matrix(np.vstack([-np.eye(n), np.eye(n)])),
                     matrix(np.hstack([np.zeros(n), np.ones(n)])),
                     matrix(yss.reshape(1, -1)), matrix(np.zeros(1)))
    alpha_ref = np.asarray(sol["x"]).ravel()
    w_ref = (alpha_ref * yss) @ Xs
    margin_gap = abs(2.0 / np.linalg.norm(svm.weight_vector())
                     - 2.0 / np.linalg.norm(w_ref))
    svm_ok = margin_gap <= 1e-3 and svm.kkt_violation() <= 1e-3

    Xf = np.vstack([rng.normal(-0.5, 1, (30, 5)), rng.normal(0.5, 1, (30, 5))])
    yf = np.array([0] * 30 + [1] * 30)
    forest = RandomForestClassifier(n_trees=1, max_features="all",
                                    bootstrap=False, seed=4).fit(Xf, yf)
    tree = DecisionTree(max_features="all").fit(Xf, yf)
    Xq = rng.normal(0, 2, (200, 5))
    forest_ok = np.array_equal(forest.predict(Xq), tree.predict(Xq))

    report(7, "classifier oracles", logreg_ok and svm_ok and forest_ok,
           f"logreg={'ok' if logreg_ok else 'bad'}, "
           f"svm margin gap={margin_gap:.2e}, "
           f"forest-reduction={'ok' if forest_ok else 'bad'}")


def test_criterion_08_protocol_arithmetic(report):
    g = Graph()
    for i in range(200):
        g.add_node(Node(f"rule{i}", NodeKind.LABORATORY_RULE))
        g.add_node(Node(f"f{i}", NodeKind.FINDING))
        g.add_edge(f"rule{i}", "signals_by", f"f{i}")
    train, test = holdout_split(g, SplitSpec(0.25, seed=0))
    split_ok = len(test) == 50 and len(condition_edges(train)) == 150

    all_correct = Metrics.from_confusion(tp=10, fp=0, tn=10, fn=0)
    all_positive = Metrics.from_confusion(tp=10, fp=10, tn=0, fn=0)
    metrics_ok = (
        (all_correct.precision, all_correct.recall, all_correct.f1) == (1.0, 1.0, 1.0)
        and abs(all_positive.recall - 1.0) <= 1e-9
        and abs(all_positive.precision - 0.5) <= 1e-9
        and abs(all_positive.f1 - 2 / 3) <= 1e-9)

    preds = {("r", "a"): Prediction("r", "a", 0.9, 1),
             ("r", "b"): Prediction("r", "b", 0.2, 0)}
    m = evaluate(preds, [("r", "a"), ("r", "b")], [])
    eval_ok = (m.tp, m.fn) == (1, 1)
    report(8, "protocol arithmetic", split_ok and metrics_ok and eval_ok)


def test_criterion_09_closure_and_ranges(report):
    table_ok = (
        consequence_closure("increased") == {"not_decreased", "not_normal"}
        and consequence_closure("decreased") == {"not_increased", "not_normal"}
        and consequence_closure("normal") == {"not_increased", "not_decreased"}
        and set(CLOSURE) == {"increased", "decreased", "normal"})
    rr = ReferenceRange("Bilirubin_total", 0.3, 1.2, "mg/dl")
    levels = [evaluate_measurement(LabMeasurement("1975-2", v, "mg/dl"), rr)
              for v in (0.29, 0.3, 1.2, 1.21)]
    bounds_ok = levels == ["decreased", "normal", "normal", "increased"]
    try:
        evaluate_measurement(LabMeasurement("1975-2", 0.7, "µmol/l"), rr)
        unit_ok = False
    except UnitMismatch:
        unit_ok = True
    report(9, "consequence closure and ranges",
           table_ok and bounds_ok and unit_ok)


def test_criterion_10_round_trips(tmp_path, report):
    g = Graph()
    g.add_node(Node("r", NodeKind.LABORATORY_RULE, label="Rule"))
    g.add_node(Node("f", NodeKind.FINDING))
    g.add_edge("r", "signals_by", "f")
    path = tmp_path / "g.kgjsonl"
    save_graph(g, path)
    back = load_graph(path)
    save_graph(back, tmp_path / "g2.kgjsonl")
    graph_ok = (path.read_bytes() == (tmp_path / "g2.kgjsonl").read_bytes()
                and back.has_triple("r", "signals_by", "f"))

    corpus = [["a", "x", "b"], ["b", "x", "a"]] * 20
    model = train_skipgram(corpus, build_vocab(corpus), 8,
                           TrainHyperparams(window=2, epochs=2), seed=0)
    save_model(model, tmp_path / "m.txt")
    loaded = load_model(tmp_path / "m.txt")
    embed_ok = (loaded.vocab.tokens == model.vocab.tokens
                and np.allclose(loaded.W_in, model.W_in, atol=5e-7))

    cfg = PipelineConfig(synth={"n_diseases": 4, "rules_per_disease": 2,
                                "conditions_per_rule": 2, "n_patients": 30},
                         walks_per_node=10, dim=50, epochs=2)
    a = run_pipeline(cfg)
    b = run_pipeline(cfg)
    report_ok = (a["config_fingerprint"] == cfg.fingerprint()
                 and a["config_fingerprint"] == b["config_fingerprint"]
                 and a["result"] == b["result"])
    report(10, "round trips", graph_ok and embed_ok and report_ok)

"""Expert review loop: candidate generation, append-only rating log on the
5-point code scale, write-back of accepted relations, and the HTTP API the
review UI consumes."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from pydantic import BaseModel, Field

from .errors import InvalidCode, UnknownCandidate
from .graph import Graph, NodeKind, RULE_KINDS, graph_stats, load_graph, save_graph
from .embeddings import EmbeddingModel
from .linkpred import PairSample, factor_universe, featurize
from .linkpred.sampling import _positive_set

# served verbatim; the UI must render these byte-identically
CODE_DESCRIPTIONS = {
    1: "The relation clearly exists.",
    2: "It is not clear whether the relation exists, but it is plausible.",
    3: "It is not clear whether the relation exists, but the chance is low.",
    4: "The relation clearly does not exist.",
    5: "No statement about the relation can be made.",
}


@dataclass
class Candidate:
    id: str
    rule_id: str
    factor_id: str
    disease_label: str
    score: float
    support: int  # patients with this finding and a matching diagnosis
    evaluation_count: int

    @staticmethod
    def make_id(rule_id: str, factor_id: str, model_fingerprint: str) -> str:
        blob = f"{rule_id}|{factor_id}|{model_fingerprint}".encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Rating:
    candidate_id: str
    code: int
    reviewer: str
    comment: str = ""
    timestamp: float = 0.0


def parameter_of(graph: Graph, factor_id: str) -> str | None:
    """Parameter node a polarity/consequence finding belongs to."""
    for src, label in graph.in_edges(factor_id):
        if label == "evaluates_to" and graph.nodes[src].kind == NodeKind.PARAMETER:
            return src
    for marker in ("_not_", "_increased", "_decreased", "_normal"):
        if marker in factor_id:
            stem = factor_id.split(marker)[0]
            if graph.has_node(stem) and graph.nodes[stem].kind == NodeKind.PARAMETER:
                return stem
    return None


def _rule_diseases(graph: Graph, rule_id: str) -> list[str]:
    return sorted(src for src, label in graph.in_edges(rule_id)
                  if label == "hasRule" and graph.nodes[src].kind == NodeKind.DISEASE)


def _support_count(graph: Graph, rule_id: str, factor_id: str) -> int:
    diseases = set(_rule_diseases(graph, rule_id))
    count = 0
    for src, label in graph.in_edges(factor_id):
        if label != "hasFinding" or graph.nodes[src].kind != NodeKind.PATIENT:
            continue
        patient_diseases = {dst for lab, dst in graph.out_edges(src) if lab == "hasDisease"}
        if patient_diseases & diseases:
            count += 1
    return count


def generate_candidates(graph: Graph, model: EmbeddingModel, classifier,
                        evaluation_counts: dict[str, int],
                        min_evaluations: int = 5,
                        diseases: set[str] | None = None) -> list[Candidate]:
    """Positive-predicted absent rule/factor pairs whose parameter has
    enough evaluations, sorted by score descending."""
    existing = _positive_set(graph)
    fingerprint = model.fingerprint()
    rules = sorted(n.id for n in graph.nodes.values() if n.kind in RULE_KINDS)
    factors = factor_universe(graph)
    out = []
    for rule in rules:
        rule_diseases = _rule_diseases(graph, rule)
        disease_label = rule_diseases[0] if rule_diseases else ""
        if diseases is not None and not (set(rule_diseases) & diseases):
            continue
        for factor in factors:
            if (rule, factor) in existing:
                continue
            param = parameter_of(graph, factor)
            n_evals = evaluation_counts.get(param, 0) if param else 0
            if n_evals < min_evaluations:
                continue
            feat = featurize(model, PairSample(rule, factor, 0, "candidate"))
            score = float(classifier.predict_proba(np.atleast_2d(feat))[0])
            if score < 0.5:
                continue
            out.append(Candidate(
                id=Candidate.make_id(rule, factor, fingerprint),
                rule_id=rule, factor_id=factor, disease_label=disease_label,
                score=score, support=_support_count(graph, rule, factor),
                evaluation_count=n_evals))
    out.sort(key=lambda c: (-c.score, c.rule_id, c.factor_id))
    return out


def save_candidates(candidates: list[Candidate], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([asdict(c) for c in candidates], fh, indent=2)
        fh.write("\n")


def load_candidates(path) -> list[Candidate]:
    with open(path, encoding="utf-8") as fh:
        return [Candidate(**d) for d in json.load(fh)]


class RatingStore:
    """Append-only JSONL rating log. The active view (latest rating per
    candidate+reviewer) is recomputed from the log, never stored."""

    def __init__(self, path):
        self.path = Path(path)
        self._log: list[Rating] = []
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._log.append(Rating(**json.loads(line)))

    def record(self, rating: Rating, known_candidates: set[str]) -> Rating:
        if rating.candidate_id not in known_candidates:
            raise UnknownCandidate(f"unknown candidate: {rating.candidate_id}")
        if rating.code not in CODE_DESCRIPTIONS:
            raise InvalidCode(f"code must be 1..5, got {rating.code}")
        if not rating.timestamp:
            rating.timestamp = time.time()
        self._log.append(rating)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(asdict(rating)))
            fh.write("\n")
        return rating

    @property
    def log(self) -> list[Rating]:
        return list(self._log)

    def active(self) -> dict[tuple[str, str], Rating]:
        """Latest rating per (candidate, reviewer); supersede semantics."""
        view: dict[tuple[str, str], Rating] = {}
        for r in self._log:
            view[(r.candidate_id, r.reviewer)] = r
        return view

    def summary(self, candidates: list[Candidate]) -> dict:
        by_id = {c.id: c for c in candidates}
        per_disease: dict[str, dict[int, int]] = {}
        totals = {code: 0 for code in CODE_DESCRIPTIONS}
        for rating in self.active().values():
            cand = by_id.get(rating.candidate_id)
            disease = cand.disease_label if cand else "unknown"
            row = per_disease.setdefault(disease, {code: 0 for code in CODE_DESCRIPTIONS})
            row[rating.code] += 1
            totals[rating.code] += 1
        return {
            "per_disease": {d: {str(c): n for c, n in row.items()}
                            for d, row in sorted(per_disease.items())},
            "totals": {str(c): n for c, n in totals.items()},
            "rated": sum(totals.values()),
            "codes": {str(c): desc for c, desc in CODE_DESCRIPTIONS.items()},
        }


def apply_accepted(graph: Graph, candidates: list[Candidate], store: RatingStore,
                   accept_codes: set[int] = frozenset({1}),
                   condition_label: str = "signals_by") -> tuple[Graph, list[dict]]:
    """Add one condition edge per accepted candidate; idempotent, with a
    changelog carrying rating provenance."""
    by_id = {c.id: c for c in candidates}
    changelog = []
    for (cand_id, reviewer), rating in sorted(store.active().items()):
        if rating.code not in accept_codes:
            continue
        cand = by_id.get(cand_id)
        if cand is None:
            continue
        if graph.has_triple(cand.rule_id, condition_label, cand.factor_id):
            changelog.append({
                "candidate_id": cand_id, "rule_id": cand.rule_id,
                "factor_id": cand.factor_id, "applied": False,
                "note": "already present", "code": rating.code,
                "reviewer": reviewer})
            continue
        graph.add_edge(cand.rule_id, condition_label, cand.factor_id)
        changelog.append({
            "candidate_id": cand_id, "rule_id": cand.rule_id,
            "factor_id": cand.factor_id, "applied": True,
            "code": rating.code, "reviewer": reviewer})
    return graph, changelog


# --- HTTP service ---

class RatingIn(BaseModel):
    candidate_id: str
    code: int = Field(ge=1, le=5)
    reviewer: str
    comment: str = ""


class ApplyIn(BaseModel):
    accept_codes: list[int] = [1]


def create_app(candidates_path, kg_path, ratings_path, static_dir=None):
    """FastAPI app over a candidate file, a graph file, and a rating log.
    When static_dir points at a built UI bundle it is served under /ui."""
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware

    candidates = load_candidates(candidates_path)
    by_id = {c.id: c for c in candidates}
    graph = load_graph(kg_path)
    store = RatingStore(ratings_path)

    app = FastAPI(title="kgrefine review service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    def candidate_payload(c: Candidate) -> dict:
        rated_codes = [r.code for (cid, _), r in store.active().items() if cid == c.id]
        return {**asdict(c), "status": "rated" if rated_codes else "unrated",
                "codes": rated_codes}

    @app.get("/candidates")
    def list_candidates(status: str | None = None, disease: str | None = None):
        items = [candidate_payload(c) for c in candidates]
        if disease is not None:
            items = [c for c in items if c["disease_label"] == disease]
        if status is not None:
            items = [c for c in items if c["status"] == status]
        return {"candidates": items, "total": len(items)}

    @app.get("/candidates/{candidate_id}")
    def get_candidate(candidate_id: str):
        c = by_id.get(candidate_id)
        if c is None:
            raise HTTPException(status_code=404, detail="unknown candidate")
        return candidate_payload(c)

    @app.post("/ratings", status_code=201)
    def post_rating(body: RatingIn):
        try:
            rating = store.record(Rating(body.candidate_id, body.code,
                                         body.reviewer, body.comment),
                                  set(by_id))
        except UnknownCandidate as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except InvalidCode as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return asdict(rating)

    @app.get("/summary")
    def get_summary():
        return store.summary(candidates)

    @app.get("/codes")
    def get_codes():
        return {str(c): desc for c, desc in CODE_DESCRIPTIONS.items()}

    @app.post("/apply")
    def post_apply(body: ApplyIn):
        _, changelog = apply_accepted(graph, candidates, store,
                                      accept_codes=set(body.accept_codes))
        save_graph(graph, kg_path)
        return {"changelog": changelog,
                "added": sum(1 for e in changelog if e["applied"])}

    @app.get("/graph/stats")
    def get_stats():
        s = graph_stats(graph)
        return {"node_count": s.node_count, "edge_count": s.edge_count,
                "avg_degree": s.avg_degree}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")

    return app

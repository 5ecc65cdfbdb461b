"""Synthetic planted-edge benchmark: a small disease/rule/parameter graph
plus a patient cohort whose lab values statistically reflect the planted
rule conditions. The generator writes a ledger with every planted edge and
exact counts, which downstream tests use as ground truth.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .errors import InvalidConfig
from .fixture import add_parameter
from .graph import Graph, Node, NodeKind, save_graph


@dataclass
class SynthConfig:
    n_diseases: int = 30
    rules_per_disease: int = 2
    conditions_per_rule: int = 3
    n_patients: int = 500
    p_signal: float = 0.9
    p_noise: float = 0.05
    p_background_measurement: float = 0.2  # normal-value measurements of unrelated params
    parameter_pool: int | None = None  # default: half the condition slots
    withheld_fraction: float = 0.0  # planted edges kept out of the emitted graph

    def validate(self) -> None:
        if min(self.n_diseases, self.rules_per_disease,
               self.conditions_per_rule, self.n_patients) < 1:
            raise InvalidConfig("counts must be positive")
        for name in ("p_signal", "p_noise", "p_background_measurement", "withheld_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1]")
        if self.parameter_pool is not None and self.parameter_pool < self.conditions_per_rule:
            raise InvalidConfig("parameter_pool smaller than conditions_per_rule")


# every synthetic parameter shares one reference range
RANGE_LOWER, RANGE_UPPER, RANGE_UNIT = 10.0, 20.0, "u"


@dataclass
class SynthOutput:
    graph: Graph
    patients_rows: list[dict]
    diagnoses_rows: list[dict]
    labevents_rows: list[dict]
    ledger: dict


def _pool_size(cfg: SynthConfig) -> int:
    slots = cfg.n_diseases * cfg.rules_per_disease * cfg.conditions_per_rule
    return cfg.parameter_pool if cfg.parameter_pool is not None else max(cfg.conditions_per_rule, slots // 2)


def generate_synthetic_cohort(config: SynthConfig, seed: int) -> SynthOutput:
    config.validate()
    rng = np.random.default_rng(seed)
    n_params = _pool_size(config)
    params = [f"P{i:03d}" for i in range(n_params)]

    g = Graph()
    for i, pid in enumerate(params):
        add_parameter(g, pid, f"LOINC-{i:04d}", RANGE_LOWER, RANGE_UPPER, RANGE_UNIT)

    planted: list[tuple[str, str, str]] = []  # (rule, factor, disease)
    disease_conditions: dict[str, list[tuple[str, str]]] = {}  # disease -> [(param, dir)]
    for d in range(config.n_diseases):
        did = f"Dz{d:03d}"
        g.add_node(Node(did, NodeKind.DISEASE, codes={"ICD-10": f"ICD-{d:03d}"}))
        disease_conditions[did] = []
        for r in range(config.rules_per_disease):
            rid = f"{did}_Rule{r}"
            g.add_node(Node(rid, NodeKind.LABORATORY_RULE))
            g.add_edge(did, "hasRule", rid)
            chosen = rng.choice(n_params, size=config.conditions_per_rule, replace=False)
            for pi in sorted(int(x) for x in chosen):
                direction = "increased" if rng.random() < 0.5 else "decreased"
                factor = f"{params[pi]}_{direction}"
                planted.append((rid, factor, did))
                disease_conditions[did].append((params[pi], direction))

    n_withheld = int(round(config.withheld_fraction * len(planted)))
    withheld_idx = set(rng.choice(len(planted), size=n_withheld, replace=False).tolist())
    withheld = []
    for i, (rid, factor, _) in enumerate(planted):
        if i in withheld_idx:
            withheld.append([rid, "signals_by", factor])
        else:
            if not g.has_triple(rid, "signals_by", factor):
                g.add_edge(rid, "signals_by", factor)

    # patients: one disease each, signal measurements for its conditions,
    # noise abnormalities and background normals elsewhere
    patients_rows, diagnoses_rows, labevents_rows = [], [], []
    ledger_patients = []
    param_loinc = {pid: f"LOINC-{i:04d}" for i, pid in enumerate(params)}
    for s in range(1, config.n_patients + 1):
        sid = str(s)
        age = int(rng.integers(18, 91))
        sex = "M" if rng.random() < 0.5 else "F"
        did = f"Dz{int(rng.integers(config.n_diseases)):03d}"
        patients_rows.append({"subject_id": sid, "anchor_age": age, "gender": sex})
        diagnoses_rows.append({"subject_id": sid, "icd_code": f"ICD-{int(did[2:]):03d}"})

        values: dict[str, float] = {}
        findings: dict[str, str] = {}
        for pid, direction in disease_conditions[did]:
            if pid in values:
                continue
            if rng.random() < config.p_signal:
                if direction == "increased":
                    v = RANGE_UPPER + 1.0 + 9.0 * rng.random()
                else:
                    v = RANGE_LOWER - 1.0 - 9.0 * rng.random()
                findings[pid] = direction
            else:
                v = RANGE_LOWER + 0.5 + (RANGE_UPPER - RANGE_LOWER - 1.0) * rng.random()
                findings[pid] = "normal"
            values[pid] = v
        for pid in params:
            if pid in values:
                continue
            u = rng.random()
            if u < config.p_noise:
                if rng.random() < 0.5:
                    v = RANGE_UPPER + 1.0 + 9.0 * rng.random()
                    findings[pid] = "increased"
                else:
                    v = RANGE_LOWER - 1.0 - 9.0 * rng.random()
                    findings[pid] = "decreased"
                values[pid] = v
            elif u < config.p_noise + config.p_background_measurement:
                values[pid] = RANGE_LOWER + 0.5 + (RANGE_UPPER - RANGE_LOWER - 1.0) * rng.random()
                findings[pid] = "normal"
        for pid in sorted(values):
            labevents_rows.append({
                "subject_id": sid,
                "loinc_code": param_loinc[pid],
                "valuenum": f"{values[pid]:.2f}",
                "valueuom": RANGE_UNIT,
            })
        ledger_patients.append({
            "subject_id": sid,
            "disease": did,
            "findings": {pid: findings[pid] for pid in sorted(findings)},
        })

    ledger = {
        "config": asdict(config),
        "seed": seed,
        "n_parameters": n_params,
        "planted_edges": [[r, "signals_by", f] for r, f, _ in planted],
        "withheld_edges": withheld,
        "graph_condition_edge_count": len(planted) - len(withheld),
        "graph_node_count": g.node_count,
        "graph_edge_count": g.edge_count,
        "n_patients": config.n_patients,
        "n_diagnosis_rows": len(diagnoses_rows),
        "n_lab_rows": len(labevents_rows),
        "patients": ledger_patients,
    }
    return SynthOutput(g, patients_rows, diagnoses_rows, labevents_rows, ledger)


def write_synth_outputs(out: SynthOutput, out_dir) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "kg": out_dir / "kg.kgjsonl",
        "patients": out_dir / "patients.csv",
        "diagnoses": out_dir / "diagnoses.csv",
        "labevents": out_dir / "labevents.csv",
        "ledger": out_dir / "ledger.json",
    }
    save_graph(out.graph, paths["kg"])
    _write_csv(paths["patients"], ["subject_id", "anchor_age", "gender"], out.patients_rows)
    _write_csv(paths["diagnoses"], ["subject_id", "icd_code"], out.diagnoses_rows)
    _write_csv(paths["labevents"], ["subject_id", "loinc_code", "valuenum", "valueuom"],
               out.labevents_rows)
    with open(paths["ledger"], "w", encoding="utf-8") as fh:
        json.dump(out.ledger, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def _write_csv(path, fieldnames, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

"""Patient ingestion: CSV parsing, nominal evaluation of lab values against
reference ranges, logical-consequence closure, and merging patients into a
knowledge graph as triples.

The CSV subset schema is MIMIC-flavored:
  patients:  subject_id, anchor_age, gender
  diagnoses: subject_id, icd_code
  labevents: subject_id, loinc_code, valuenum, valueuom
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import BadNumeric, MissingColumn, NoApplicableRange, UnitMismatch
from .graph import (
    Graph,
    Node,
    NodeKind,
    ReferenceRange,
    RULE_KINDS,
    reference_ranges,
)

LEVELS = ("decreased", "normal", "increased")

# derived negations implied by each observed level
CLOSURE = {
    "increased": frozenset({"not_decreased", "not_normal"}),
    "decreased": frozenset({"not_increased", "not_normal"}),
    "normal": frozenset({"not_increased", "not_decreased"}),
}

AGE_BUCKETS = ((0, 18), (18, 40), (40, 65), (65, None))


@dataclass
class LabMeasurement:
    loinc: str
    value: float
    unit: str
    timestamp: Optional[str] = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite lab value for {self.loinc}")


@dataclass
class PatientRecord:
    patient_id: str
    age: float
    sex: str  # male | female
    diagnoses: list[str] = field(default_factory=list)
    measurements: list[LabMeasurement] = field(default_factory=list)

    def __post_init__(self):
        if self.age < 0:
            raise ValueError("age must be non-negative")
        if self.sex not in ("male", "female"):
            raise ValueError(f"bad sex value: {self.sex!r}")


@dataclass
class EvaluatedFinding:
    parameter_id: str
    level: str
    derived: frozenset[str]


def consequence_closure(level: str) -> frozenset[str]:
    """Negations logically implied by a nominal level."""
    return CLOSURE[level]


def evaluate_measurement(measurement: LabMeasurement, rr: ReferenceRange) -> str:
    """Map a numeric value to {decreased, normal, increased}. Bounds inclusive."""
    if measurement.unit != rr.unit:
        raise UnitMismatch(
            f"{measurement.loinc}: measurement unit {measurement.unit!r} "
            f"!= range unit {rr.unit!r}")
    if rr.lower is not None and measurement.value < rr.lower:
        return "decreased"
    if rr.upper is not None and measurement.value > rr.upper:
        return "increased"
    return "normal"


def select_range(ranges: list[ReferenceRange], sex: str, age: float) -> ReferenceRange:
    for rr in ranges:
        if rr.applies_to(sex, age):
            return rr
    raise NoApplicableRange(f"no range applicable for sex={sex}, age={age}")


def _read_csv(path, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise MissingColumn(f"{path}: missing column {col!r}")
        return list(reader)


_SEX_ALIASES = {"m": "male", "f": "female", "male": "male", "female": "female"}


def parse_patient_tables(patients_csv, diagnoses_csv, labevents_csv) -> list[PatientRecord]:
    """Join the three tables by subject_id into one record per patient."""
    records: dict[str, PatientRecord] = {}
    for i, row in enumerate(_read_csv(patients_csv, ("subject_id", "anchor_age", "gender")), 1):
        try:
            age = float(row["anchor_age"])
        except ValueError:
            raise BadNumeric(f"bad anchor_age {row['anchor_age']!r}", row=i) from None
        sex = _SEX_ALIASES.get(row["gender"].strip().lower())
        if sex is None:
            raise BadNumeric(f"bad gender {row['gender']!r}", row=i)
        sid = row["subject_id"]
        records[sid] = PatientRecord(patient_id=sid, age=age, sex=sex)

    for i, row in enumerate(_read_csv(diagnoses_csv, ("subject_id", "icd_code")), 1):
        rec = records.get(row["subject_id"])
        code = row["icd_code"].strip()
        if rec is not None and code and code not in rec.diagnoses:
            rec.diagnoses.append(code)

    for i, row in enumerate(_read_csv(labevents_csv, ("subject_id", "loinc_code", "valuenum", "valueuom")), 1):
        rec = records.get(row["subject_id"])
        if rec is None:
            continue
        try:
            value = float(row["valuenum"])
        except ValueError:
            raise BadNumeric(f"bad valuenum {row['valuenum']!r}", row=i) from None
        rec.measurements.append(LabMeasurement(
            loinc=row["loinc_code"], value=value, unit=row["valueuom"]))

    return [records[k] for k in sorted(records)]


@dataclass
class ParameterIndex:
    """Lookup tables from coding systems into graph node ids."""

    loinc_to_parameter: dict[str, str]
    icd_to_disease: dict[str, str]
    ranges: dict[str, list[ReferenceRange]]

    @classmethod
    def from_graph(cls, graph: Graph) -> "ParameterIndex":
        loinc = {}
        icd = {}
        for node in graph.nodes.values():
            if node.kind == NodeKind.PARAMETER and "LOINC" in node.codes:
                loinc[node.codes["LOINC"]] = node.id
            elif node.kind == NodeKind.DISEASE and "ICD-10" in node.codes:
                icd[node.codes["ICD-10"]] = node.id
        return cls(loinc_to_parameter=loinc, icd_to_disease=icd,
                   ranges=reference_ranges(graph))


def evaluate_patient(record: PatientRecord, index: ParameterIndex) -> list[EvaluatedFinding]:
    """Evaluate all measurements; one finding per parameter.

    Multiple measurements of one parameter collapse to the most extreme
    abnormal one, else the last. Measurements with unknown LOINC codes or
    no applicable range are skipped.
    """
    per_param: dict[str, list[tuple[str, float]]] = {}
    for m in record.measurements:
        param = index.loinc_to_parameter.get(m.loinc)
        if param is None or param not in index.ranges:
            continue
        try:
            rr = select_range(index.ranges[param], record.sex, record.age)
            level = evaluate_measurement(m, rr)
        except (NoApplicableRange, UnitMismatch):
            continue
        if level == "increased":
            deviation = m.value - (rr.upper if rr.upper is not None else 0.0)
        elif level == "decreased":
            deviation = (rr.lower if rr.lower is not None else 0.0) - m.value
        else:
            deviation = -math.inf
        per_param.setdefault(param, []).append((level, deviation))

    findings = []
    for param in sorted(per_param):
        evals = per_param[param]
        abnormal = [(lvl, dev) for lvl, dev in evals if lvl != "normal"]
        if abnormal:
            level = max(abnormal, key=lambda t: t[1])[0]
        else:
            level = evals[-1][0]
        findings.append(EvaluatedFinding(param, level, consequence_closure(level)))
    return findings


def evaluation_counts(records: Iterable[PatientRecord], index: ParameterIndex) -> dict[str, int]:
    """Number of successful nominal evaluations per parameter (one per measurement)."""
    counts: dict[str, int] = {}
    for rec in records:
        for m in rec.measurements:
            param = index.loinc_to_parameter.get(m.loinc)
            if param is None or param not in index.ranges:
                continue
            try:
                rr = select_range(index.ranges[param], rec.sex, rec.age)
                evaluate_measurement(m, rr)
            except (NoApplicableRange, UnitMismatch):
                continue
            counts[param] = counts.get(param, 0) + 1
    return counts


def _age_bucket(age: float) -> str:
    for lo, hi in AGE_BUCKETS:
        if hi is None or age < hi:
            return f"age_{lo}_{hi if hi is not None else 'plus'}"
    return "age_unknown"


@dataclass
class AugmentReport:
    patients_added: int = 0
    patients_skipped: int = 0
    nodes_added: int = 0
    edges_added: int = 0
    evaluation_counts: dict[str, int] = field(default_factory=dict)


def augment_graph(kg: Graph, records: list[PatientRecord]) -> tuple[Graph, AugmentReport]:
    """Merge patients into a copy of the graph; the input graph is untouched.

    Per patient: a Patient node, hasDisease edges to matching diseases,
    hasFinding edges to evaluated-parameter polarity nodes and their
    consequence nodes, plus demographic finding nodes. Every polarity or
    consequence node observed in a patient gains a "signals" edge to each
    rule that references it, mirroring the patient-to-rule connection shape.
    Patients matching neither a disease nor a parameter are skipped.
    """
    index = ParameterIndex.from_graph(kg)
    aug = kg.copy()
    report = AugmentReport(evaluation_counts=evaluation_counts(records, index))

    before_nodes, before_edges = aug.node_count, aug.edge_count

    def ensure_finding_node(node_id: str, kind: NodeKind) -> None:
        if not aug.has_node(node_id):
            aug.add_node(Node(node_id, kind))

    def link_edge(src: str, label: str, dst: str) -> None:
        if not aug.has_triple(src, label, dst):
            aug.add_edge(src, label, dst)

    for rec in records:
        diseases = [index.icd_to_disease[c] for c in rec.diagnoses
                    if c in index.icd_to_disease]
        findings = evaluate_patient(rec, index)
        if not diseases and not findings:
            report.patients_skipped += 1
            continue

        pid = f"Patient_{rec.patient_id}"
        if not aug.has_node(pid):
            aug.add_node(Node(pid, NodeKind.PATIENT,
                              properties={"age": rec.age, "sex": rec.sex}))
        report.patients_added += 1

        for d in diseases:
            link_edge(pid, "hasDisease", d)

        touched: list[str] = []
        for f in findings:
            main = f"{f.parameter_id}_{f.level}"
            ensure_finding_node(main, NodeKind.EVALUATED_PARAMETER)
            link_edge(pid, "hasFinding", main)
            touched.append(main)
            for neg in sorted(f.derived):
                neg_id = f"{f.parameter_id}_{neg}"
                ensure_finding_node(neg_id, NodeKind.EVALUATED_PARAMETER)
                link_edge(pid, "hasFinding", neg_id)
                touched.append(neg_id)

        # connect observed findings to the rules that reference them
        for node_id in touched:
            for src, label in list(aug.in_edges(node_id)):
                if label == "signals_by" and aug.nodes[src].kind in RULE_KINDS:
                    link_edge(node_id, "signals", src)

        # demographics as nominal finding nodes so they show up in walks
        sex_id = f"sex_{rec.sex}"
        ensure_finding_node(sex_id, NodeKind.PATIENT_BASE_DATA)
        link_edge(pid, "hasFinding", sex_id)
        bucket_id = _age_bucket(rec.age)
        ensure_finding_node(bucket_id, NodeKind.PATIENT_BASE_DATA)
        link_edge(pid, "hasFinding", bucket_id)

    report.nodes_added = aug.node_count - before_nodes
    report.edges_added = aug.edge_count - before_edges
    return aug, report

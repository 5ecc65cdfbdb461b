"""Small cholestasis diagnosis-path graph used by tests and docs.

One disease, one laboratory rule over three lab parameters, one
examination rule over a symptom finding. Each parameter carries a
reference range and polarity finding nodes for the three nominal levels.
"""

from .graph import Graph, Node, NodeKind, ReferenceRange, add_reference_range

LEVELS = ("decreased", "normal", "increased")


def add_parameter(graph: Graph, param_id: str, loinc: str,
                  lower: float, upper: float, unit: str) -> None:
    """Parameter node + its three polarity finding nodes + reference range."""
    graph.add_node(Node(param_id, NodeKind.PARAMETER, codes={"LOINC": loinc}))
    for level in LEVELS:
        graph.add_node(Node(f"{param_id}_{level}", NodeKind.FINDING))
        graph.add_edge(param_id, "evaluates_to", f"{param_id}_{level}")
    add_reference_range(graph, ReferenceRange(param_id, lower, upper, unit))


def cholestasis_fixture() -> Graph:
    g = Graph()
    g.add_node(Node("Cholestase_(Ikterus)", NodeKind.DISEASE,
                    label="Cholestase (Ikterus)", codes={"ICD-10": "K83.1"}))
    g.add_node(Node("Rule_Cholestase", NodeKind.LABORATORY_RULE))
    g.add_node(Node("Rule_Cholestase_Examination", NodeKind.EXAMINATION_RULE))
    g.add_edge("Cholestase_(Ikterus)", "hasRule", "Rule_Cholestase")
    g.add_edge("Cholestase_(Ikterus)", "hasRule", "Rule_Cholestase_Examination")

    add_parameter(g, "Bilirubin_total", "1975-2", 0.3, 1.2, "mg/dl")
    add_parameter(g, "Alkaline_Phosphatase", "6768-6", 40.0, 130.0, "U/l")
    add_parameter(g, "Gamma_GT", "2324-2", 8.0, 61.0, "U/l")

    g.add_edge("Rule_Cholestase", "signals_by", "Bilirubin_total_increased")
    g.add_edge("Rule_Cholestase", "signals_by", "Alkaline_Phosphatase_increased")
    g.add_edge("Rule_Cholestase", "signals_by", "Gamma_GT_increased")

    g.add_node(Node("Pruritus", NodeKind.FINDING, codes={"SNOMED": "418363000"}))
    g.add_edge("Rule_Cholestase_Examination", "signals_by", "Pruritus")
    return g

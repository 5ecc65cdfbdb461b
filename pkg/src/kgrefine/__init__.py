"""Knowledge-graph refinement toolkit: patient-augmented graphs, walk
embeddings, link prediction, and an expert review loop."""

__version__ = "0.1.0"

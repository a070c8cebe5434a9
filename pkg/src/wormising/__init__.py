"""Worm (Prokofiev-Svistunov) chain for the zero-field Ising model on finite graphs."""
from .graph import Graph, GraphError, boundary, generate, load_graph, parse_graph_spec
from .worm import ChainParams, WormState, make_rng, run, step

__all__ = [
    "ChainParams",
    "Graph",
    "GraphError",
    "WormState",
    "boundary",
    "generate",
    "load_graph",
    "make_rng",
    "parse_graph_spec",
    "run",
    "step",
]

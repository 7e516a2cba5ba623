"""Harmonic analysis on directed graphs through random-walk operators."""
from . import (diffusion_wavelets, errors, filters, graph_core, laplacians, random_walk,
               spectral, ssl, wavelet_frame)
from .graph_core import DirectedGraph, largest_scc_subgraph
from .random_walk import RandomWalk, from_graph
from .spectral import decompose

__version__ = "0.1.0"

__all__ = [
    "DirectedGraph", "RandomWalk", "decompose", "from_graph", "largest_scc_subgraph",
    "diffusion_wavelets", "errors", "filters", "graph_core", "laplacians", "random_walk",
    "spectral", "ssl", "wavelet_frame",
]

"""State-class graphs for time Petri nets with inhibitor (stopwatch) arcs.

Three constructions are provided: the exact polyhedral graph, the classical
DBM overapproximation and the time-distance based tighter approximation,
together with duration and response-time extraction.
"""

from .bound import INF
from .graph import BuildOptions, StateClassGraph, build, diff_graphs
from .io import export_dot, fixture, parse_model, print_model
from .model import Net

__all__ = ["INF", "BuildOptions", "Net", "StateClassGraph", "build", "diff_graphs",
           "export_dot", "fixture", "parse_model", "print_model"]

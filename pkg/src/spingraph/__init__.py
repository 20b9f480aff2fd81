"""Quantum graphs with spin: Dirac, Pauli and Rashba operators on metric graphs."""

__version__ = "0.1.0"

from .graph import MetricGraph, build_graph, total_length, edge_unit_vector  # noqa: E402,F401
from .spectrum import Spectrum, find_spectrum, lift_kramers, unfold, weyl_count  # noqa: E402,F401

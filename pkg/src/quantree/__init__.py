"""Inverse problems for Schrödinger operators on metric trees from the Weyl matrix."""

from .forward import WeylSamples, assemble_weyl, read_weyl_csv, rho_grid, sample_weyl, write_weyl_csv
from .graph import Edge, EdgeData, TreeGraph
from .local import SolverConfig, solve_edge
from .peeling import peel
from .pipeline import compare_edges, run_forward, run_inverse

__all__ = [
    "Edge", "EdgeData", "TreeGraph", "WeylSamples", "SolverConfig",
    "assemble_weyl", "sample_weyl", "rho_grid", "read_weyl_csv", "write_weyl_csv",
    "solve_edge", "peel", "run_forward", "run_inverse", "compare_edges",
]
__version__ = "0.1.0"

"""pathip: integer-programming models and an embedded solver for path-based
optimization problems (multi-robot path planning, minimum constraint removal,
reward collection)."""

__version__ = "0.1.0"

from .graph import Graph, GraphError, grid_graph
from .instances import (InstanceError, MmcrInstance, MppInstance, ParseError,
                        RcpInstance, Solution, load_instance, load_solution,
                        make_mmcr, make_mpp, make_rcp, save_instance,
                        save_solution)
from .model import IpModel, ModelError
from .validation import evaluate_rcp, validate_mmcr_solution, validate_mpp_solution

__all__ = [
    "Graph", "GraphError", "grid_graph",
    "InstanceError", "ParseError",
    "MppInstance", "MmcrInstance", "RcpInstance", "Solution",
    "load_instance", "save_instance", "load_solution", "save_solution",
    "make_mpp", "make_mmcr", "make_rcp",
    "IpModel", "ModelError",
    "evaluate_rcp", "validate_mpp_solution", "validate_mmcr_solution",
]

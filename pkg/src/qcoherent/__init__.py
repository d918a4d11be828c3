"""Coherent (fully quantum) LQG and H-infinity controller synthesis for linear quantum systems."""
from .closedloop import ControllerRealization, PlantModel, assemble_closed_loop, build_controller_from_slh
from .model import SLHParams, check_physical_realizability, slh_to_quadrature
from .performance import PerformanceReport, evaluate, hinf_objective, lqg_index
from .registry import cavity, dpa, remark4

__version__ = "0.1.0"

__all__ = [
    "ControllerRealization", "PlantModel", "assemble_closed_loop", "build_controller_from_slh",
    "SLHParams", "check_physical_realizability", "slh_to_quadrature",
    "PerformanceReport", "evaluate", "hinf_objective", "lqg_index",
    "cavity", "dpa", "remark4",
]

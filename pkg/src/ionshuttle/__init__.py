"""Shuttling compiler and cost analysis for linear segmented ion traps."""

from .circuit_gen import FAMILIES, generate
from .cost_analysis import FitReport, build_report, circuit_fit
from .errors import IonShuttleError
from .initial_ordering import Ordering, cio, oai, order
from .qasm_io import Circuit, Gate, emit, lower_toffolis, parse
from .shuttle_engine import EngineConfig, ShuttleTrace, compile_circuit
from .trap_model import CostModel, TrapState, new_multi, new_uni

__all__ = [
    "FAMILIES", "generate", "FitReport", "build_report", "circuit_fit", "IonShuttleError",
    "Ordering", "cio", "oai", "order", "Circuit", "Gate", "emit", "lower_toffolis", "parse",
    "EngineConfig", "ShuttleTrace", "compile_circuit", "CostModel", "TrapState", "new_multi", "new_uni",
]
__version__ = "0.1.0"

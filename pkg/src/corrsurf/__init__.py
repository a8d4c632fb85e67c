"""corrsurf: Monte Carlo simulation of the planar surface code under
circuit-level depolarizing noise with correlated-error extensions.

Public surface: lattice construction, noise models, the reference shot
runner, the exact matching decoder, and the run/sweep estimators.
"""

from .lattice import Lattice, RoundCircuit, build_lattice, displacement, schedule_round
from .noise import NoiseModel, expected_injected_rate
from .frame import DetectionEvent, PauliFrame, run_shot
from .decoder import Matching, MatchingGraph, build_graph, decode_shot, logical_flip, mwpm
from .montecarlo import RunConfig, RunStats, estimate, fit_slope, sweep

__version__ = "0.1.0"

__all__ = [
    "Lattice",
    "RoundCircuit",
    "build_lattice",
    "schedule_round",
    "displacement",
    "NoiseModel",
    "expected_injected_rate",
    "PauliFrame",
    "DetectionEvent",
    "run_shot",
    "MatchingGraph",
    "Matching",
    "build_graph",
    "mwpm",
    "logical_flip",
    "decode_shot",
    "RunConfig",
    "RunStats",
    "estimate",
    "sweep",
    "fit_slope",
    "__version__",
]

"""porebench: physics-based nanopore trace synthesis and benchmarking."""

__version__ = "0.1.0"

from .physics import (BiasConfig, ElectrolyteConfig, PhysicalConstants,
                      PoreGeometry, blockage_amplitude, open_pore_current)
from .assembly import Trace, TraceConfig, assemble_trace
from .dataset import GridSpec, generate_dataset, segment_windows

__all__ = [
    "BiasConfig", "ElectrolyteConfig", "PhysicalConstants", "PoreGeometry",
    "blockage_amplitude", "open_pore_current",
    "Trace", "TraceConfig", "assemble_trace",
    "GridSpec", "generate_dataset", "segment_windows",
]

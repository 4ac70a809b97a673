"""Quantum echo-state network with a stochastic reset-rate reservoir."""

from .errors import ConfigurationError, DegenerateNormalizationError, QESNError, StepSizeUnderflowError
from .circuits import CircuitPair, load_circuit, load_pair
from .quantum import DensityMatrix, GateOp, PauliString, StateVector, UnitaryCircuit
from .reservoir import ReservoirConfig, channel_step, evolve_channel, evolve_ensemble
from .readout import ReadoutWeights, SplitSpec, nmse, predict, train_readout
from .memory import MemoryCurve, MemoryProtocolSpec, run_mc_protocol

__all__ = [
    "ConfigurationError",
    "DegenerateNormalizationError",
    "QESNError",
    "StepSizeUnderflowError",
    "CircuitPair",
    "load_circuit",
    "load_pair",
    "DensityMatrix",
    "GateOp",
    "PauliString",
    "StateVector",
    "UnitaryCircuit",
    "ReservoirConfig",
    "channel_step",
    "evolve_channel",
    "evolve_ensemble",
    "ReadoutWeights",
    "SplitSpec",
    "nmse",
    "predict",
    "train_readout",
    "MemoryCurve",
    "MemoryProtocolSpec",
    "run_mc_protocol",
]

__version__ = "0.1.0"

"""Numerical workbench for triple-CHSH self-testing of maximally entangled
qubit pairs and self-tested network certification of entanglement."""

from .linalg import apply_controlled, apply_local, eigh, kron, partial_trace, regularize
from .objects import (MeasurementFamily, Strategy, bell_state, correlation_table,
                      ideal_qubit_strategy, max_entangled, parallel_strategy, pauli,
                      pauli_projector, transpose_strategy, werner_state)
from .swap import JunkDecomposition, ResourceCapExceeded

__version__ = "0.1.0"

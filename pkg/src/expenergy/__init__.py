"""Exponential-energy bounds and simulators for bosonic circuits built from
Gaussian unitaries and Kerr gates.

Modules:
    fock: sparse Fock states and energy functionals.
    bounds: closed-form cutoffs, growth factors and sample counts.
    gaussian: Gaussian unitaries on Fock amplitudes and in Bargmann form.
    kerr: phase-shifter decompositions of rational Kerr gates.
    sim_fock: truncated Fock simulator with an error ledger.
    sim_superpos: exact Gaussian-superposition simulator.
    cutting: Monte-Carlo estimator over Kerr decomposition branches.
    cli: the ``expenergy`` command.
"""
from ._accel import HAVE_NUMBA, backend_name
from .circuit import CircuitIR, GenericDiagonal, Layer, from_layers, identity_circuit, single_layer
from .errors import (
    CircuitParseError,
    EmptyProjectionError,
    ExpEnergyError,
    IncompatibleBackendError,
    InadmissibleParameterError,
    ResourceLimitError,
)
from .fock import FockAmplitudeState
from .gaussian import GaussianPureState, GaussianUnitary
from .kerr import IrrationalKerr, RationalKerr

__version__ = "0.1.0"

__all__ = [
    "HAVE_NUMBA",
    "backend_name",
    "CircuitIR",
    "GenericDiagonal",
    "Layer",
    "from_layers",
    "identity_circuit",
    "single_layer",
    "CircuitParseError",
    "EmptyProjectionError",
    "ExpEnergyError",
    "IncompatibleBackendError",
    "InadmissibleParameterError",
    "ResourceLimitError",
    "FockAmplitudeState",
    "GaussianPureState",
    "GaussianUnitary",
    "IrrationalKerr",
    "RationalKerr",
    "__version__",
]

"""Layered circuit representation.

A circuit on ``m`` modes is a sequence of layers; layer ``i`` applies an
energy-preserving diagonal gate ``chi_i`` and then a Gaussian unitary
``G_i``, starting from the vacuum.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .bounds import CircuitEnvelope
from .errors import InadmissibleParameterError
from .gaussian import GaussianUnitary
from .kerr import IrrationalKerr, RationalKerr


@dataclass(frozen=True)
class GenericDiagonal:
    """Diagonal gate given by a phase function of the occupation tuple.

    ``phase(n)`` must return a real angle; the gate multiplies ``|n>`` by
    ``exp(i phase(n))``.
    """

    phase: Callable[[tuple], float]
    label: str = "diagonal"


NonGaussian = Optional[Union[RationalKerr, IrrationalKerr, GenericDiagonal]]


@dataclass(frozen=True)
class Layer:
    non_gaussian: NonGaussian
    gaussian: GaussianUnitary


@dataclass(frozen=True)
class CircuitIR:
    m: int
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if self.m < 1:
            raise InadmissibleParameterError("circuit needs at least one mode")
        if not layers:
            raise InadmissibleParameterError("circuit needs at least one layer")
        for i, layer in enumerate(layers):
            if layer.gaussian.m != self.m:
                raise InadmissibleParameterError(f"layer {i}: Gaussian acts on {layer.gaussian.m} modes, circuit has {self.m}")
            ng = layer.non_gaussian
            if isinstance(ng, (RationalKerr, IrrationalKerr)) and max(ng.modes) >= self.m:
                raise InadmissibleParameterError(f"layer {i}: Kerr mode {max(ng.modes)} out of range")

    @property
    def L(self) -> int:
        return len(self.layers)

    def envelope(self, upto: int | None = None) -> CircuitEnvelope:
        """Worst-case displacement and squeezing over the first ``upto`` layers."""
        layers = self.layers if upto is None else self.layers[:upto]
        if not layers:
            raise InadmissibleParameterError("envelope needs at least one layer")
        a = max(float(np.max(np.abs(l.gaussian.alpha))) for l in layers)
        r = max(float(np.max(l.gaussian.r)) for l in layers)
        return CircuitEnvelope(self.m, len(layers), a, r)

    def irrational_layers(self) -> list[int]:
        return [i for i, l in enumerate(self.layers) if isinstance(l.non_gaussian, IrrationalKerr)]

    @property
    def is_rational(self) -> bool:
        return all(l.non_gaussian is None or isinstance(l.non_gaussian, RationalKerr) for l in self.layers)

    def with_gate(self, i: int, gate: NonGaussian) -> "CircuitIR":
        layers = list(self.layers)
        layers[i] = replace(layers[i], non_gaussian=gate)
        return CircuitIR(self.m, tuple(layers))


def identity_circuit(m: int, L: int = 1) -> CircuitIR:
    return CircuitIR(m, tuple(Layer(None, GaussianUnitary.identity(m)) for _ in range(L)))


def single_layer(gaussian: GaussianUnitary, gate: NonGaussian = None) -> CircuitIR:
    return CircuitIR(gaussian.m, (Layer(gate, gaussian),))


def from_layers(m: int, layers: Sequence[tuple]) -> CircuitIR:
    """Build a circuit from ``(non_gaussian, gaussian)`` pairs."""
    return CircuitIR(m, tuple(Layer(ng, g) for ng, g in layers))

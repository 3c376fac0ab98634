"""Truncated multimode Fock states stored as sparse amplitude maps.

A state on ``m`` modes with cutoff ``k`` keeps only occupation tuples whose
total boson number is at most ``k``. Dense ``(k+1,)*m`` tensors are used only
transiently by the gate kernels; see :meth:`FockAmplitudeState.to_dense`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyProjectionError, InadmissibleParameterError

NORM_TOL = 1e-10
DROP_TOL = 1e-15
_INT64_MAX = np.iinfo(np.int64).max


def total_bosons(n: Sequence[int]) -> int:
    """Return the total boson number ``sum(n)`` of an occupation tuple."""
    return int(sum(n))


def dimension(m: int, k: int) -> int:
    """Number of ``m``-mode occupation tuples with total at most ``k``.

    Raises:
        OverflowError: if the count does not fit in a signed 64-bit integer,
            which is the index type used by the dense kernels.
    """
    if m < 1 or k < 0:
        raise InadmissibleParameterError(f"dimension needs m >= 1 and k >= 0, got m={m}, k={k}")
    d = math.comb(m + k, m)
    if d > _INT64_MAX:
        raise OverflowError(f"dimension({m}, {k}) = {d} exceeds the 64-bit index range")
    return d


@lru_cache(maxsize=64)
def total_grid(m: int, box: int) -> np.ndarray:
    """Integer tensor of shape ``(box+1,)*m`` holding ``|n|`` at each index."""
    grid = np.zeros((box + 1,) * m, dtype=np.int64)
    ar = np.arange(box + 1)
    for ax in range(m):
        shape = [1] * m
        shape[ax] = box + 1
        grid = grid + ar.reshape(shape)
    grid.setflags(write=False)
    return grid


@dataclass(frozen=True)
class FockAmplitudeState:
    """Sparse truncated Fock state.

    Attributes:
        modes: number of modes ``m``.
        cutoff: maximum total boson number ``k`` that may be stored.
        amplitudes: read-only map from occupation tuples to amplitudes.
        normalized: whether the amplitudes are expected to have unit norm.
    """

    modes: int
    cutoff: int
    amplitudes: Mapping[tuple, complex] = field(repr=False)
    normalized: bool = True

    def __post_init__(self):
        if self.modes < 1:
            raise InadmissibleParameterError("modes must be positive")
        if self.cutoff < 0:
            raise InadmissibleParameterError("cutoff must be nonnegative")
        clean = {}
        for n, a in self.amplitudes.items():
            n = tuple(int(x) for x in n)
            if len(n) != self.modes or min(n) < 0:
                raise InadmissibleParameterError(f"invalid occupation tuple {n} for {self.modes} modes")
            if sum(n) > self.cutoff:
                raise InadmissibleParameterError(f"occupation {n} exceeds cutoff {self.cutoff}")
            a = complex(a)
            if a != 0:
                clean[n] = a
        object.__setattr__(self, "amplitudes", MappingProxyType(clean))
        if self.normalized:
            nrm = self.norm_squared()
            if abs(nrm - 1.0) > NORM_TOL:
                raise InadmissibleParameterError(f"state flagged normalized has norm^2 {nrm!r}")

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def __len__(self):
        return len(self.amplitudes)

    def amplitude(self, n: Sequence[int]) -> complex:
        return self.amplitudes.get(tuple(n), 0j)

    def to_dense(self, box: int | None = None) -> np.ndarray:
        """Dense tensor of shape ``(box+1,)*m``; ``box`` defaults to the cutoff."""
        box = self.cutoff if box is None else box
        psi = np.zeros((box + 1,) * self.modes, dtype=np.complex128)
        for n, a in self.amplitudes.items():
            if sum(n) <= box:
                psi[n] = a
        return psi

    @classmethod
    def from_dense(cls, psi: np.ndarray, cutoff: int, normalize: bool = True, drop_tol: float = DROP_TOL):
        """Build a state from a dense tensor.

        Entries with total above ``cutoff`` are ignored. Entries smaller than
        ``drop_tol`` in magnitude are dropped.

        Returns:
            ``(state, dropped_weight)`` where ``dropped_weight`` is the squared
            norm of the dropped entries relative to the kept total.
        """
        psi = np.asarray(psi, dtype=np.complex128)
        m = psi.ndim
        box = psi.shape[0] - 1
        mask = total_grid(m, box) <= cutoff
        mag = np.abs(psi)
        keep = mask & (mag >= drop_tol) & (mag > 0)
        tiny = mask & ~keep
        dropped = float(np.sum(mag[tiny] ** 2))
        idx = np.nonzero(keep)
        vals = psi[idx]
        kept = float(np.sum(np.abs(vals) ** 2))
        if kept == 0.0:
            raise EmptyProjectionError("no amplitude survives at this cutoff")
        weight = dropped / (kept + dropped)
        if normalize:
            vals = vals / math.sqrt(kept)
        amps = dict(zip(map(tuple, np.transpose(idx).tolist()), vals.tolist()))
        return cls(m, cutoff, amps, normalized=normalize), weight


def vacuum(m: int, cutoff: int = 0) -> FockAmplitudeState:
    return FockAmplitudeState(m, cutoff, {(0,) * m: 1.0})


def fock_state(occupations: Sequence[int], cutoff: int | None = None) -> FockAmplitudeState:
    n = tuple(int(x) for x in occupations)
    return FockAmplitudeState(len(n), sum(n) if cutoff is None else cutoff, {n: 1.0})


def from_terms(m: int, terms: Mapping[tuple, complex], cutoff: int | None = None, normalize: bool = True):
    """State from a dict of amplitudes, optionally renormalized."""
    terms = {tuple(k): complex(v) for k, v in terms.items() if v != 0}
    if cutoff is None:
        cutoff = max(sum(n) for n in terms)
    if normalize:
        nrm = math.sqrt(math.fsum(abs(v) ** 2 for v in terms.values()))
        terms = {k: v / nrm for k, v in terms.items()}
    return FockAmplitudeState(m, cutoff, terms, normalized=normalize)


def coherent_amplitudes(alpha: complex, box: int) -> np.ndarray:
    """``<n|alpha>`` for ``n = 0..box``."""
    out = np.empty(box + 1, dtype=np.complex128)
    out[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, box + 1):
        out[n] = out[n - 1] * alpha / math.sqrt(n)
    return out


def coherent_state(alphas: Iterable[complex], cutoff: int) -> FockAmplitudeState:
    """Product coherent state truncated at total ``cutoff`` and renormalized."""
    alphas = [complex(a) for a in alphas]
    psi = np.ones((), dtype=np.complex128)
    for a in alphas:
        psi = np.multiply.outer(psi, coherent_amplitudes(a, cutoff))
    state, _ = FockAmplitudeState.from_dense(psi, cutoff)
    return state


def exp_energy_expectation(state: FockAmplitudeState, s: float) -> float:
    """Return ``<psi| s^N |psi>``."""
    if not s > 1:
        raise InadmissibleParameterError(f"exponential-energy base must exceed 1, got {s}")
    logs = math.log(s)
    return math.fsum(math.exp(sum(n) * logs) * abs(a) ** 2 for n, a in state.amplitudes.items())


def energy_expectation(state: FockAmplitudeState) -> float:
    """Return ``<psi| N |psi>``."""
    return math.fsum(sum(n) * abs(a) ** 2 for n, a in state.amplitudes.items())


def overlap(a: FockAmplitudeState, b: FockAmplitudeState) -> complex:
    """Return ``<a|b>`` summed over the indices both states store."""
    if a.modes != b.modes:
        raise InadmissibleParameterError(f"mode mismatch: {a.modes} vs {b.modes}")
    small, large = (a.amplitudes, b.amplitudes) if len(a) <= len(b) else (b.amplitudes, a.amplitudes)
    re = []
    im = []
    for n, x in small.items():
        y = large.get(n)
        if y is None:
            continue
        v = (x.conjugate() * y) if small is a.amplitudes else (y.conjugate() * x)
        re.append(v.real)
        im.append(v.imag)
    return complex(math.fsum(re), math.fsum(im))


def trace_distance_pure(a: FockAmplitudeState, b: FockAmplitudeState) -> float:
    """Half trace-norm distance between two normalized pure states."""
    f = abs(overlap(a, b)) ** 2
    return math.sqrt(max(0.0, 1.0 - f))


def truncate(state: FockAmplitudeState, k: int):
    """Project onto total boson number at most ``k`` and renormalize.

    Returns:
        ``(truncated_state, discarded_weight)``.

    Raises:
        EmptyProjectionError: if nothing survives the projection.
    """
    if k < 0:
        raise InadmissibleParameterError("cutoff must be nonnegative")
    if k >= state.cutoff:
        return state, 0.0
    kept = {n: a for n, a in state.amplitudes.items() if sum(n) <= k}
    if not kept:
        raise EmptyProjectionError(f"truncation at k={k} removes all weight")
    kw = math.fsum(abs(a) ** 2 for a in kept.values())
    dw = math.fsum(abs(a) ** 2 for n, a in state.amplitudes.items() if sum(n) > k)
    scale = 1.0 / math.sqrt(kw)
    out = FockAmplitudeState(state.modes, k, {n: a * scale for n, a in kept.items()})
    return out, dw / (kw + dw)

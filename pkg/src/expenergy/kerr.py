"""Kerr gates: exact phase-shifter decompositions, rational approximation and
diagonal application.

Gate conventions: the self-Kerr gate is ``exp(i pi x N^2)`` on one mode and
the cross-Kerr gate is ``exp(i 2 pi x N_1 N_2)`` on two modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InadmissibleParameterError
from .fock import FockAmplitudeState

KINDS = ("self", "cross")
CF_DEPTH = 64


def _check_kind(kind: str, modes: Sequence[int]):
    if kind not in KINDS:
        raise InadmissibleParameterError(f"kind must be 'self' or 'cross', got {kind!r}")
    want = 1 if kind == "self" else 2
    if len(modes) != want:
        raise InadmissibleParameterError(f"{kind}-Kerr acts on {want} mode(s), got {list(modes)}")
    if kind == "cross" and modes[0] == modes[1]:
        raise InadmissibleParameterError("cross-Kerr needs two distinct modes")
    if min(modes) < 0:
        raise InadmissibleParameterError("mode indices must be nonnegative")


@dataclass(frozen=True)
class RationalKerr:
    """Kerr gate with rational parameter ``x = p/q`` stored in lowest terms."""

    p: int
    q: int
    kind: str = "self"
    modes: tuple = (0,)

    def __post_init__(self):
        if self.q < 1:
            raise InadmissibleParameterError(f"q must be positive, got {self.q}")
        g = math.gcd(self.p, self.q)
        object.__setattr__(self, "p", int(self.p) // g)
        object.__setattr__(self, "q", int(self.q) // g)
        object.__setattr__(self, "modes", tuple(int(i) for i in self.modes))
        _check_kind(self.kind, self.modes)

    @property
    def x(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class IrrationalKerr:
    """Kerr gate with a real parameter that has not been rationalized."""

    x: float
    kind: str = "self"
    modes: tuple = (0,)

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise InadmissibleParameterError("Kerr parameter must be finite")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "modes", tuple(int(i) for i in self.modes))
        _check_kind(self.kind, self.modes)


@dataclass(frozen=True)
class PhaseShifterDecomposition:
    """Kerr gate written as a complex-weighted sum of phase-shifter layers.

    Attributes:
        source: the gate being decomposed.
        coefficients: branch weights, shape ``(q,)`` or ``(q*q,)``.
        angles: phase-shifter angles per branch and target mode, shape
            ``(branches, len(source.modes))``.
    """

    source: RationalKerr
    coefficients: np.ndarray
    angles: np.ndarray

    @property
    def branches(self) -> list:
        return [(complex(c), tuple(float(a) for a in ang)) for c, ang in zip(self.coefficients, self.angles)]

    def __len__(self):
        return len(self.coefficients)


def _phase_pi(num: np.ndarray, den: int) -> np.ndarray:
    """``exp(i pi num/den)`` with the integer numerator reduced mod ``2 den`` first."""
    num = np.mod(np.asarray(num, dtype=np.int64), 2 * den)
    return np.exp(1j * np.pi * num / den)


def self_kerr_coefficients(p: int, q: int):
    """Branches reproducing ``exp(-i pi (p/q) N^2)`` as phase shifters.

    Even ``q`` uses angles ``-2 pi j/q``; odd ``q`` uses the shifted form
    ``N^2 = N(N-1) + N`` with angles ``-pi (2j + p)/q``.

    Returns:
        ``(coefficients, angles)``, both of length ``q``.
    """
    if q < 1:
        raise InadmissibleParameterError(f"q must be positive, got {q}")
    n = np.arange(q)
    j = np.arange(q)
    if q % 2 == 0:
        target = _phase_pi(-p * n * n, q)
        angles = -2 * np.pi * j / q
    else:
        target = _phase_pi(-p * n * (n - 1), q)
        angles = -np.pi * (2 * j + p) / q
    # g_j = (1/q) sum_n exp(2 pi i j n/q) target_n
    coeffs = np.fft.ifft(target)
    return coeffs, angles


def cross_kerr_coefficients(p: int, q: int):
    """Branches reproducing ``exp(i 2 pi (p/q) N_1 N_2)``.

    Returns:
        ``(coefficients, angles)`` with coefficients of shape ``(q, q)`` and
        angles of shape ``(q, q, 2)`` holding ``(2 pi j/q, 2 pi k/q)``.
    """
    if q < 1:
        raise InadmissibleParameterError(f"q must be positive, got {q}")
    idx = np.arange(q)
    kern = _phase_pi(2 * p * np.outer(idx, idx), q)  # [m, n]
    coeffs = np.fft.fft2(kern) / q**2  # [j, k]
    ang = 2 * np.pi * idx / q
    angles = np.stack(np.meshgrid(ang, ang, indexing="ij"), axis=-1)
    return coeffs, angles


def decompose_kerr(x_num: int, x_den: int, kind: str = "self", modes: Sequence[int] | None = None) -> PhaseShifterDecomposition:
    """Decompose the gate with parameter ``x = x_num/x_den`` into phase shifters.

    The self-Kerr gate ``exp(i pi x N^2)`` is ``exp(-i pi (p/q) N^2)`` with
    ``p = -x_num``; the cross-Kerr gate uses ``p = x_num`` directly.
    """
    if modes is None:
        modes = (0,) if kind == "self" else (0, 1)
    gate = RationalKerr(x_num, x_den, kind, tuple(modes))
    if kind == "self":
        coeffs, angles = self_kerr_coefficients(-gate.p, gate.q)
        return PhaseShifterDecomposition(gate, coeffs, angles[:, None])
    coeffs, angles = cross_kerr_coefficients(gate.p, gate.q)
    return PhaseShifterDecomposition(gate, coeffs.reshape(-1), angles.reshape(-1, 2))


def one_norm(d: PhaseShifterDecomposition) -> float:
    """Sum of branch-coefficient magnitudes."""
    return math.fsum(np.abs(d.coefficients).tolist())


def kerr_phases(x, kind: str, n1: np.ndarray, n2: np.ndarray | None = None) -> np.ndarray:
    """Diagonal Kerr phase factors at occupations ``n1`` (and ``n2``).

    Rational ``x`` (a :class:`~fractions.Fraction` or int) is reduced with
    integer arithmetic so the result stays accurate for large occupations.
    """
    n1 = np.asarray(n1, dtype=np.int64)
    if kind == "self":
        prod = n1 * n1
        scale = 1
    else:
        prod = n1 * np.asarray(n2, dtype=np.int64)
        scale = 2
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        return _phase_pi(scale * x.numerator * prod, x.denominator)
    x = float(x)
    return np.exp(1j * np.pi * np.mod(scale * x * prod, 2.0))


def gate_parameter(gate):
    """Parameter of a Kerr gate in the form :func:`kerr_phases` expects."""
    return gate.x


def apply_kerr_dense(psi: np.ndarray, x, kind: str, modes: Sequence[int]) -> np.ndarray:
    """Apply a diagonal Kerr gate to a dense ``(box+1,)*m`` tensor."""
    m = psi.ndim
    box = psi.shape[0] - 1
    n = np.arange(box + 1)
    if kind == "self":
        ph = kerr_phases(x, kind, n)
        shape = [1] * m
        shape[modes[0]] = box + 1
        return psi * ph.reshape(shape)
    a, b = modes
    ph = kerr_phases(x, kind, n[:, None], n[None, :])
    shape = [1] * m
    shape[a] = box + 1
    shape[b] = box + 1
    if a > b:
        ph = ph.T
    return psi * ph.reshape(shape)


def apply_kerr_diagonal(state: FockAmplitudeState, x, kind: str, modes: Sequence[int]) -> FockAmplitudeState:
    """Multiply each amplitude by its exact Kerr phase (no truncation)."""
    modes = tuple(modes)
    _check_kind(kind, modes)
    if max(modes) >= state.modes:
        raise InadmissibleParameterError(f"mode {max(modes)} out of range for {state.modes} modes")
    keys = list(state.amplitudes.keys())
    if not keys:
        return state
    occ = np.array(keys, dtype=np.int64)
    vals = np.array(list(state.amplitudes.values()), dtype=np.complex128)
    if kind == "self":
        ph = kerr_phases(x, kind, occ[:, modes[0]])
    else:
        ph = kerr_phases(x, kind, occ[:, modes[0]], occ[:, modes[1]])
    new = dict(zip(keys, (vals * ph).tolist()))
    return FockAmplitudeState(state.modes, state.cutoff, new, normalized=state.normalized)


def branch_phase_sum(d: PhaseShifterDecomposition, occupations: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_j g_j exp(i theta_j . n)`` at each row of ``occupations``."""
    occ = np.atleast_2d(np.asarray(occupations, dtype=np.float64))
    return np.exp(1j * occ @ d.angles.T) @ d.coefficients


# ---------------------------------------------------------------- rationals


def convergents(x: float, depth: int = CF_DEPTH) -> list[tuple[int, int]]:
    """Continued-fraction convergents ``(p, q)`` of ``x`` in increasing ``q``.

    The expansion runs on the exact rational value of the double, so it is
    free of floating-point drift and terminates for every finite input.
    """
    if not math.isfinite(x):
        raise InadmissibleParameterError("x must be finite")
    rest = Fraction(x)
    p0, q0, p1, q1 = 1, 0, 0, 1
    out = []
    for _ in range(depth):
        a = math.floor(rest)
        p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
        out.append((p0, q0))
        frac = rest - a
        if frac == 0:
            break
        rest = 1 / frac
    return out


def hurwitz_holds(x: float, p: int, q: int) -> bool:
    """Exact test of ``|x - p/q| < 1/(sqrt(5) q^2)``."""
    err = Fraction(x) - Fraction(p, q)
    return 5 * err * err * q**4 < 1


def diophantine_approx(x: float, q_max: int) -> tuple[int, int]:
    """Largest-denominator convergent of ``x`` with ``q <= q_max`` satisfying
    ``|x - p/q| < 1/(sqrt(5) q^2)``.

    At least one of any three consecutive convergents meets that inequality,
    so a qualifying convergent exists once ``q_max`` reaches the third
    convergent's denominator. Below that, the closest convergent with
    ``q <= q_max`` is returned; use :func:`hurwitz_holds` to tell the cases
    apart.
    """
    if q_max < 1:
        raise InadmissibleParameterError(f"q_max must be positive, got {q_max}")
    cands = [(p, q) for p, q in convergents(x) if q <= q_max]
    good = [pq for pq in cands if hurwitz_holds(x, *pq)]
    if good:
        return good[-1]
    return cands[-1]

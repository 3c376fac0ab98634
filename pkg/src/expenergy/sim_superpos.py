"""Exact simulation of Gaussian plus rational-Kerr circuits as superpositions
of Gaussian states.

Each rational Kerr gate is replaced by its phase-shifter decomposition, so a
layer multiplies the number of Gaussian branches by ``q`` (self-Kerr) or
``q^2`` (cross-Kerr). Heterodyne densities are double sums over branch pairs.
Irrational parameters are first replaced by continued-fraction convergents
under a trace-distance budget (:func:`rationalize`).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import bounds, kernels
from ._accel import thread_count
from .circuit import CircuitIR, GenericDiagonal
from .errors import IncompatibleBackendError, InadmissibleParameterError, ResourceLimitError
from .gaussian import GaussianPureState, GaussianUnitary, evolve_arrays
from .kerr import IrrationalKerr, RationalKerr, convergents, decompose_kerr, hurwitz_holds

DEFAULT_TERM_CAP = 10**6
DEFAULT_Q_CAP = 10**6


@dataclass(frozen=True, eq=False)
class GaussianSuperposition:
    """``sum_J c_J |G_J>`` with the branch states stored as stacked arrays.

    Attributes:
        m: number of modes.
        coefficients: ``(T,)`` branch weights.
        A, b, c: stacked Bargmann parameters of shapes ``(T, m, m)``,
            ``(T, m)`` and ``(T,)``.
        pruned_mass: sum of ``|c_J|`` over branches dropped by pruning; it
            bounds the norm of the discarded part of the state vector.
    """

    m: int
    coefficients: np.ndarray
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    pruned_mass: float = 0.0

    def __len__(self):
        return len(self.coefficients)

    @property
    def terms(self) -> list:
        return [
            (complex(self.coefficients[j]), GaussianPureState(self.A[j], self.b[j], complex(self.c[j])))
            for j in range(len(self))
        ]

    @classmethod
    def vacuum(cls, m: int) -> "GaussianSuperposition":
        return cls(m, np.ones(1, dtype=np.complex128), np.zeros((1, m, m), dtype=np.complex128),
                   np.zeros((1, m), dtype=np.complex128), np.zeros(1, dtype=np.complex128))

    @classmethod
    def from_terms(cls, terms: Sequence[tuple]) -> "GaussianSuperposition":
        coefs = np.array([t[0] for t in terms], dtype=np.complex128)
        A = np.array([t[1].A for t in terms])
        b = np.array([t[1].b for t in terms])
        c = np.array([t[1].c for t in terms])
        return cls(len(b[0]), coefs, A, b, c)


@dataclass(frozen=True)
class RationalizedCircuit:
    """Circuit whose Kerr parameters are all rational.

    Attributes:
        circuit: the rational circuit.
        per_gate_errors: trace-distance bound charged to each replaced gate.
        total_error_bound: sum of ``per_gate_errors``.
        replacements: ``(layer, x, p, q)`` for each replaced gate.
    """

    circuit: CircuitIR
    per_gate_errors: tuple = ()
    total_error_bound: float = 0.0
    replacements: tuple = field(default_factory=tuple)


def _branch_table(gate):
    """``(coefficients, phase_vectors)`` for a layer's non-Gaussian gate."""
    if gate is None:
        return np.ones(1, dtype=np.complex128), None
    if isinstance(gate, RationalKerr):
        d = decompose_kerr(gate.p, gate.q, gate.kind, gate.modes)
        return d.coefficients, d.angles
    if isinstance(gate, IrrationalKerr):
        raise IncompatibleBackendError("irrational Kerr parameter: rationalize the circuit first")
    if isinstance(gate, GenericDiagonal):
        raise IncompatibleBackendError("generic diagonal gates have no phase-shifter decomposition")
    raise IncompatibleBackendError(f"unsupported gate {gate!r}")


def _branch_count(gate) -> int:
    if isinstance(gate, RationalKerr):
        return gate.q if gate.kind == "self" else gate.q**2
    return len(_branch_table(gate)[0])


def expand_layer(sup: GaussianSuperposition, kerr, G: GaussianUnitary, term_cap: int = DEFAULT_TERM_CAP) -> GaussianSuperposition:
    """Split every branch by the Kerr decomposition, then apply ``G``.

    Raises:
        ResourceLimitError: if the new term count would exceed ``term_cap``.
    """
    coefs, angles = _branch_table(kerr)
    T, B, m = len(sup), len(coefs), sup.m
    if T * B > term_cap:
        raise ResourceLimitError(f"term count {T * B} exceeds the cap {term_cap}")
    if angles is None:
        A, b, c = sup.A, sup.b, sup.c
        new_coefs = sup.coefficients
    else:
        d = np.ones((B, m), dtype=np.complex128)
        for t, mode in enumerate(kerr.modes):
            d[:, mode] = np.exp(1j * angles[:, t])
        A = (sup.A[:, None] * d[None, :, :, None] * d[None, :, None, :]).reshape(T * B, m, m)
        b = (sup.b[:, None] * d[None]).reshape(T * B, m)
        c = np.repeat(sup.c, B)
        new_coefs = (sup.coefficients[:, None] * coefs[None, :]).reshape(-1)
    A, b, c = evolve_arrays(A, b, c, G)
    return GaussianSuperposition(m, new_coefs, A, b, c, sup.pruned_mass)


def _as_circuit(circuit) -> CircuitIR:
    return circuit.circuit if isinstance(circuit, RationalizedCircuit) else circuit


def simulate(circuit, term_cap: int = DEFAULT_TERM_CAP, prune_threshold: float = 0.0) -> GaussianSuperposition:
    """Fold :func:`expand_layer` over the layers, starting from the vacuum.

    Args:
        circuit: a :class:`CircuitIR` with rational gates or a
            :class:`RationalizedCircuit`.
        term_cap: maximum number of branches.
        prune_threshold: drop branches with ``|c_J|`` below this value after
            each layer. Off by default; dropped mass is recorded.
    """
    circ = _as_circuit(circuit)
    total = 1
    for layer in circ.layers:
        total *= _branch_count(layer.non_gaussian)
    if prune_threshold <= 0 and total > term_cap:
        raise ResourceLimitError(f"circuit expands to {total} terms, above the cap {term_cap}")
    sup = GaussianSuperposition.vacuum(circ.m)
    for layer in circ.layers:
        sup = expand_layer(sup, layer.non_gaussian, layer.gaussian, term_cap)
        if prune_threshold > 0:
            keep = np.abs(sup.coefficients) >= prune_threshold
            lost = float(np.sum(np.abs(sup.coefficients[~keep])))
            sup = GaussianSuperposition(sup.m, sup.coefficients[keep], sup.A[keep], sup.b[keep], sup.c[keep],
                                        sup.pruned_mass + lost)
    return sup


def _reduce_points(sup: GaussianSuperposition, pts: np.ndarray):
    """:func:`reduce_heterodyne` for every branch and point at once.

    Returns ``br`` of shape ``(G, T, m-k)`` and ``cr`` of shape ``(G, T)``.
    """
    kk = pts.shape[1]
    ac = pts.conj()
    br = sup.b[None, :, kk:] + np.einsum("tij,gj->gti", sup.A[:, kk:, :kk], ac)
    quad = np.einsum("gi,tij,gj->gt", ac, sup.A[:, :kk, :kk], ac)
    lin = np.einsum("ti,gi->gt", sup.b[:, :kk], ac)
    cr = sup.c[None, :] + 0.5 * quad + lin - 0.5 * np.sum(np.abs(pts) ** 2, axis=1)[:, None]
    return np.ascontiguousarray(br), np.ascontiguousarray(cr)


def pair_double_sum(sup: GaussianSuperposition, points) -> np.ndarray:
    """``sum_{J,J'} c_J conj(c_J') <G_J'| Pi(alpha) |G_J>`` at each point.

    ``points`` has shape ``(G, k)``; ``Pi(alpha)`` projects the first ``k``
    modes onto ``|alpha><alpha|``. With ``k = 0`` this is the squared norm.
    The sum over ``J`` is split into fixed blocks whose partial results are
    added in block order, so the value does not depend on the worker count.
    """
    pts = np.asarray(points, dtype=np.complex128)
    if pts.ndim == 1:
        pts = pts[None, :]
    G, kk = pts.shape
    if not 0 <= kk <= sup.m:
        raise InadmissibleParameterError(f"need 0 <= k <= m, got k={kk}, m={sup.m}")
    T = len(sup)
    r = sup.m - kk
    Ar = np.ascontiguousarray(sup.A[:, kk:, kk:])
    br, cr = _reduce_points(sup, pts)
    coefs = np.ascontiguousarray(sup.coefficients)
    block = max(1, min(256, T))
    starts = list(range(0, T, block))

    def run(s):
        rows = np.arange(s, min(T, s + block), dtype=np.int64)
        return kernels.pair_sum(coefs, Ar, br, cr, rows)

    workers = thread_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    out = np.zeros(G, dtype=np.complex128)
    for p in parts:
        out += p
    return out


def density(sup: GaussianSuperposition, points) -> np.ndarray:
    """Heterodyne density on the first ``k`` modes at each row of ``points``."""
    pts = np.asarray(points, dtype=np.complex128)
    if pts.ndim == 1:
        pts = pts[None, :]
    kk = pts.shape[1]
    if not 1 <= kk <= sup.m:
        raise InadmissibleParameterError(f"need 1 <= k <= m, got k={kk}, m={sup.m}")
    vals = pair_double_sum(sup, pts).real / math.pi**kk
    return np.maximum(vals, 0.0)


def probability(sup: GaussianSuperposition, alphas: Sequence[complex]) -> float:
    """Heterodyne density at one point, clamped at zero."""
    return float(density(sup, [list(alphas)])[0])


def norm_squared(sup: GaussianSuperposition) -> complex:
    return complex(pair_double_sum(sup, np.zeros((1, 0)))[0])


# ------------------------------------------------------- rationalization


def _gate_budget_choice(x: float, s: float, E: float, budget: float, q_cap: int):
    """First convergent of ``x`` whose neglect bound fits ``budget``.

    Returns ``(p, q, error)``. Only convergents meeting the Hurwitz inequality
    are considered, so ``pi |x - p/q| < pi/(sqrt 5 q^2)`` bounds the residual
    Kerr angle that the error formula is evaluated at.
    """
    for p, q in convergents(x):
        if q > q_cap:
            break
        if Fraction(x) == Fraction(p, q):
            return p, q, 0.0
        if not hurwitz_holds(x, p, q):
            continue
        eps = math.pi / (math.sqrt(5) * q * q)
        err = bounds.kerr_neglect_error_bound(s, E, eps)
        if err <= budget:
            return p, q, err
    return None


def rationalize(circuit: CircuitIR, delta_total: float, certificates: Sequence | None = None,
                q_cap: int = DEFAULT_Q_CAP) -> RationalizedCircuit:
    """Replace each irrational Kerr parameter by a convergent within budget.

    With ``c`` irrational gates, each gate receives ``delta_total / c``. The
    gate in layer ``i`` acts on the output of the first ``i`` layers, whose
    exponential-energy certificate ``(t, E)`` enters the neglect bound.

    Args:
        circuit: circuit with possibly irrational Kerr gates.
        delta_total: total trace-distance budget in ``(0, 1)``.
        certificates: optional per-layer ``(s, E)`` pairs for the state
            entering that layer's Kerr gate. By default the uniform bound on
            the prefix envelope is used; a gate in the first layer acts on the
            vacuum, which it leaves unchanged, so it is charged nothing.
        q_cap: largest denominator considered.

    Raises:
        ResourceLimitError: naming the gate if no convergent fits.
    """
    if not 0 < delta_total < 1:
        raise InadmissibleParameterError(f"delta_total must lie in (0, 1), got {delta_total}")
    idx = circuit.irrational_layers()
    if not idx:
        return RationalizedCircuit(circuit)
    budget = delta_total / len(idx)
    out = circuit
    errors = []
    reps = []
    for i in idx:
        gate = circuit.layers[i].non_gaussian
        if certificates is not None:
            s, E = certificates[i]
            choice = _gate_budget_choice(gate.x, s, E, budget, q_cap)
        elif i == 0:
            p, q = convergents(gate.x)[0]
            choice = (p, q, 0.0)
        else:
            cert = bounds.circuit_exp_energy_bound(circuit.envelope(i))
            choice = _gate_budget_choice(gate.x, cert.t, cert.tight_exponent, budget, q_cap)
        if choice is None:
            raise ResourceLimitError(
                f"layer {i}: no convergent of x={gate.x!r} with q <= {q_cap} meets the budget {budget:.3e}")
        p, q, err = choice
        out = out.with_gate(i, RationalKerr(p, q, gate.kind, gate.modes))
        errors.append(err)
        reps.append((i, gate.x, p, q))
    return RationalizedCircuit(out, tuple(errors), math.fsum(errors), tuple(reps))

"""Fock-tracking simulator with a per-layer trace-distance ledger.

Starting from the vacuum, each layer applies its diagonal gate exactly and
then its Gaussian unitary gate by gate, truncating to total boson number
``k`` after every gate that changes the energy. Every truncation is charged
to the ledger, so the final ``total_error_bound`` upper-bounds the trace
distance between the returned state and the exact circuit output.

Ledger rules, per layer:

* measured (no certificate): ``sum_j sqrt(w_j + W_ROUND)`` over the
  squeeze/displace truncation steps, where ``w_j`` is the weight removed at
  step ``j``. Each renormalized projection moves a pure state by exactly
  ``sqrt(w_j)`` in trace distance; ``W_ROUND`` covers the rounding in ``w_j``,
  which is measured as a difference of norms. Passive steps stay inside the
  cutoff and are charged nothing.
* certified (exponential-energy certificate ``<t^N> <= S`` on the layer's
  exact output): the final squeeze/displace truncation is charged
  ``2 sqrt(S/t^k)`` a priori, earlier truncations in the same layer are
  charged ``sqrt(w_j)``. Layers without squeezers or displacements never
  truncate and are charged nothing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bounds
from .bounds import ExpEnergyCertificate
from .circuit import CircuitIR, GenericDiagonal
from .errors import InadmissibleParameterError, ResourceLimitError
from .fock import FockAmplitudeState, coherent_amplitudes
from .gaussian import Displace, Squeeze, apply_elementary_dense
from .kerr import IrrationalKerr, RationalKerr, apply_kerr_dense

MAX_DENSE_ENTRIES = 5 * 10**7
# rounding allowance on each measured weight, 64 ulp of a unit norm
W_ROUND = 2.0**-46


def plan_cutoff(circuit: CircuitIR, s: float, S_bound: float, eps_total: float) -> int:
    """Smallest uniform cutoff with ``2 L sqrt(S/s^k) <= eps_total``."""
    bounds._check_base(s)
    if not eps_total > 0:
        raise InadmissibleParameterError(f"eps_total must be positive, got {eps_total}")
    if not S_bound >= 1:
        raise InadmissibleParameterError(f"S_bound must be at least 1, got {S_bound}")
    x = (math.log(S_bound) + 2 * math.log(2 * circuit.L / eps_total)) / math.log(s)
    return max(0, bounds._ceil(x))


def certified_cutoff(circuit: CircuitIR, eps_total: float) -> int:
    """:func:`plan_cutoff` with the circuit's own certificate, in log space.

    Prefix certificates have larger bases and smaller bounds than the full
    one, so the cutoff also meets the per-layer budget of every prefix.
    """
    if not eps_total > 0:
        raise InadmissibleParameterError(f"eps_total must be positive, got {eps_total}")
    cert = bounds.circuit_exp_energy_bound(circuit.envelope())
    x = (cert.log_bound + 2 * math.log(2 * circuit.L / eps_total)) / math.log(cert.t)
    return max(0, bounds._ceil(x))


def prefix_certificates(circuit: CircuitIR) -> list[ExpEnergyCertificate]:
    """Certificate for the output of each prefix ``layers[:i+1]``."""
    return [bounds.circuit_exp_energy_bound(circuit.envelope(i + 1)) for i in range(circuit.L)]


@dataclass(frozen=True)
class SimulationResult:
    """Outcome of :func:`simulate`.

    Attributes:
        state: the truncated output state.
        error_ledger: per-layer trace-distance increments.
        total_error_bound: ``min(1, sum(error_ledger))``.
        step_weights: per layer, the weight removed at each truncation step.
        cutoff: the uniform cutoff used.
        certified: whether certificates fed the ledger.
    """

    state: FockAmplitudeState
    error_ledger: tuple
    total_error_bound: float
    step_weights: tuple
    cutoff: int
    certified: bool = False


def _apply_diagonal(psi: np.ndarray, gate) -> np.ndarray:
    if gate is None:
        return psi
    if isinstance(gate, (RationalKerr, IrrationalKerr)):
        return apply_kerr_dense(psi, gate.x, gate.kind, gate.modes)
    if isinstance(gate, GenericDiagonal):
        out = psi.copy()
        for idx in zip(*np.nonzero(psi)):
            n = tuple(int(i) for i in idx)
            out[n] = psi[n] * np.exp(1j * float(gate.phase(n)))
        return out
    raise InadmissibleParameterError(f"unsupported non-Gaussian gate {gate!r}")


def simulate(circuit: CircuitIR, k: int, certificates: Sequence[ExpEnergyCertificate] | None = None,
             max_entries: int = MAX_DENSE_ENTRIES) -> SimulationResult:
    """Run the circuit in a Fock space truncated at total boson number ``k``.

    Args:
        circuit: the layered circuit.
        k: uniform cutoff.
        certificates: optional per-layer exponential-energy certificates for
            the exact output of each prefix (see :func:`prefix_certificates`).
        max_entries: cap on the size ``(k+1)^m`` of the dense work array and,
            with two or more modes, on the ``(k+1)^3`` beamsplitter table.

    Raises:
        EmptyProjectionError: if a truncation removes all weight.
        ResourceLimitError: if an array would exceed ``max_entries``.
    """
    if k < 0:
        raise InadmissibleParameterError("cutoff must be nonnegative")
    need = max((k + 1) ** circuit.m, (k + 1) ** 3 if circuit.m > 1 else 0)
    if need > max_entries:
        raise ResourceLimitError(f"cutoff {k} on {circuit.m} modes needs {need} entries, cap is {max_entries}")
    if certificates is not None and len(certificates) != circuit.L:
        raise InadmissibleParameterError("need one certificate per layer")
    m = circuit.m
    psi = np.zeros((k + 1,) * m, dtype=np.complex128)
    psi[(0,) * m] = 1.0
    ledger = []
    all_weights = []
    for i, layer in enumerate(circuit.layers):
        psi = _apply_diagonal(psi, layer.non_gaussian)
        gates = layer.gaussian.elementary_gates()
        weights = []
        active = []
        for g in gates:
            psi, w = apply_elementary_dense(psi, g, k)
            weights.append(w)
            active.append(isinstance(g, (Squeeze, Displace)))
        charges = [math.sqrt(w + W_ROUND) if a else math.sqrt(w) for w, a in zip(weights, active)]
        if certificates is not None and any(active):
            last = max(j for j, a in enumerate(active) if a)
            cert = certificates[i]
            head = bounds.truncation_error_bound(cert.t, cert.tight_exponent, k)
            ledger.append(min(1.0, 2 * head) + math.fsum(c for j, c in enumerate(charges) if j != last))
        else:
            ledger.append(math.fsum(charges))
        all_weights.append(tuple(weights))
    state, _ = FockAmplitudeState.from_dense(psi, k, drop_tol=0.0)
    total = min(1.0, math.fsum(ledger))
    return SimulationResult(state, tuple(ledger), total, tuple(all_weights), k, certificates is not None)


def _heterodyne_amplitudes(psi: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Contract the first ``k`` modes with ``<alpha|`` for each point row."""
    G, kk = points.shape
    box = psi.shape[0] - 1
    out = None
    for i in range(kk):
        coh = np.array([coherent_amplitudes(a, box) for a in points[:, i]]).conj()  # (G, box+1)
        if out is None:
            out = np.tensordot(coh, psi, axes=([1], [0]))  # (G, ...)
        else:
            out = np.einsum("gn,gn...->g...", coh, out)
    return out


def heterodyne_density(state: FockAmplitudeState, points) -> np.ndarray:
    """Heterodyne density on the first ``k`` modes at each row of ``points``.

    For ``k = m`` this is ``|<alpha|psi>|^2/pi^m``; for ``k < m`` the residual
    modes are summed out.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.complex128))
    kk = pts.shape[1]
    if not 1 <= kk <= state.modes:
        raise InadmissibleParameterError(f"need 1 <= k <= m, got k={kk}, m={state.modes}")
    psi = state.to_dense()
    amp = _heterodyne_amplitudes(psi, pts)
    dens = np.sum(np.abs(amp.reshape(len(pts), -1)) ** 2, axis=1)
    return dens / math.pi**kk


def heterodyne_probability(state: FockAmplitudeState, alphas: Sequence[complex]) -> float:
    """Heterodyne density at a single point ``alphas`` (length ``k <= m``)."""
    if len(alphas) < 1:
        raise InadmissibleParameterError("need at least one heterodyne mode")
    return float(heterodyne_density(state, [list(alphas)])[0])

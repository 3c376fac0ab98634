"""Gaussian unitaries and pure Gaussian states.

Conventions used throughout the package:

* ``a = (q + i p)/sqrt(2)``.
* ``D(alpha) = exp(alpha a^dag - conj(alpha) a)``.
* ``S(r) = exp(r (a^2 - a^dag^2)/2)`` with ``r >= 0`` squeezing ``q``.
* A passive unitary with matrix ``U`` maps ``a_i^dag -> sum_j U[j, i] a_j^dag``.
* ``BS(theta, phi)`` on modes ``(a, b)`` has the 2x2 block
  ``[[cos t, -e^{-i phi} sin t], [e^{i phi} sin t, cos t]]`` (transmissivity
  ``cos^2 theta``).
* ``R(theta) = exp(i theta N)``.

A pure Gaussian state is stored in Bargmann form: its Fock amplitudes
``psi_n`` satisfy ``sum_n psi_n xi^n / sqrt(n!) = exp(xi^T A xi/2 + b^T xi + c)``.
The constant ``c`` carries both the normalization and the global phase.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import EmptyProjectionError, InadmissibleParameterError
from .fock import FockAmplitudeState, total_grid

UNITARY_TOL = 1e-10

# ------------------------------------------------------------ gate types


@dataclass(frozen=True)
class PhaseShifter:
    mode: int
    theta: float


@dataclass(frozen=True)
class Beamsplitter:
    mode_a: int
    mode_b: int
    theta: float
    phi: float = 0.0


@dataclass(frozen=True)
class Squeeze:
    mode: int
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise InadmissibleParameterError(f"squeezing must be nonnegative, got {self.r}")


@dataclass(frozen=True)
class Displace:
    mode: int
    alpha: complex


ElementaryGate = Union[PhaseShifter, Beamsplitter, Squeeze, Displace]


def gate_modes(g: ElementaryGate) -> tuple:
    if isinstance(g, Beamsplitter):
        return (g.mode_a, g.mode_b)
    return (g.mode,)


def beamsplitter_block(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -cmath.exp(-1j * phi) * s], [cmath.exp(1j * phi) * s, c]])


def gate_matrix(g: ElementaryGate, m: int) -> np.ndarray:
    """``m x m`` mode transformation of a passive elementary gate."""
    out = np.eye(m, dtype=np.complex128)
    if isinstance(g, PhaseShifter):
        out[g.mode, g.mode] = cmath.exp(1j * g.theta)
    elif isinstance(g, Beamsplitter):
        idx = np.array([g.mode_a, g.mode_b])
        out[np.ix_(idx, idx)] = beamsplitter_block(g.theta, g.phi)
    else:
        raise InadmissibleParameterError(f"{type(g).__name__} is not passive")
    return out


def compose_passive(gates: Sequence[ElementaryGate], m: int) -> np.ndarray:
    """Matrix of the passive circuit applying ``gates`` in order."""
    out = np.eye(m, dtype=np.complex128)
    for g in gates:
        out = gate_matrix(g, m) @ out
    return out


def check_unitary(U: np.ndarray, what: str = "matrix") -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InadmissibleParameterError(f"{what} must be square, got shape {U.shape}")
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) if U.size else 0.0
    if not err <= UNITARY_TOL:
        raise InadmissibleParameterError(f"{what} is not unitary (max |U^dag U - I| = {err:.3e})")
    return U


def decompose_passive(U: np.ndarray) -> list:
    """Beamsplitters on neighbouring modes followed by phase shifters.

    Columns are mixed pairwise from the right to null the lower triangle one
    row at a time, which uses at most ``m(m-1)/2`` beamsplitters; the
    remaining diagonal becomes at most ``m`` phase shifters. Gates that act
    as the identity are omitted.
    """
    W = check_unitary(U, "passive unitary").copy()
    m = W.shape[0]
    gates: list = []
    for i in range(m - 1, 0, -1):
        for p in range(i):
            q = p + 1
            x, y = W[i, p], W[i, q]
            if x == 0:
                continue
            theta = math.atan2(abs(x), abs(y))
            phi = cmath.phase(x) - (cmath.phase(y) if y != 0 else 0.0)
            T = beamsplitter_block(theta, phi)
            cols = W[:, [p, q]] @ T.conj().T
            W[:, p], W[:, q] = cols[:, 0], cols[:, 1]
            W[i, p] = 0.0
            gates.append(Beamsplitter(p, q, theta, phi))
    for i in range(m):
        ang = cmath.phase(W[i, i])
        if ang != 0.0:
            gates.append(PhaseShifter(i, ang))
    return gates


@dataclass(frozen=True, eq=False)
class GaussianUnitary:
    """Gaussian unitary ``V D(alpha) S(r) U`` (applied right to left).

    Attributes:
        V: passive unitary applied last.
        alpha: per-mode displacements.
        r: per-mode squeezing parameters, all nonnegative.
        U: passive unitary applied first.
    """

    V: np.ndarray
    alpha: np.ndarray
    r: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        V = check_unitary(self.V, "V")
        U = check_unitary(self.U, "U")
        alpha = np.asarray(self.alpha, dtype=np.complex128).reshape(-1)
        r = np.asarray(self.r, dtype=np.float64).reshape(-1)
        m = U.shape[0]
        if V.shape[0] != m or len(alpha) != m or len(r) != m:
            raise InadmissibleParameterError("V, alpha, r and U must agree on the mode count")
        if np.any(r < 0):
            raise InadmissibleParameterError("squeezing parameters must be nonnegative")
        for name, val in (("V", V), ("alpha", alpha), ("r", r), ("U", U)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def m(self) -> int:
        return self.U.shape[0]

    @classmethod
    def identity(cls, m: int) -> "GaussianUnitary":
        return cls(np.eye(m), np.zeros(m), np.zeros(m), np.eye(m))

    @classmethod
    def passive(cls, U: np.ndarray) -> "GaussianUnitary":
        m = np.asarray(U).shape[0]
        return cls(np.eye(m), np.zeros(m), np.zeros(m), U)

    @property
    def is_passive(self) -> bool:
        return not (np.any(self.r) or np.any(self.alpha))

    def __eq__(self, other):
        if not isinstance(other, GaussianUnitary):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in ("V", "alpha", "r", "U"))

    def __hash__(self):
        return hash(tuple(getattr(self, n).tobytes() for n in ("V", "alpha", "r", "U")))

    def elementary_gates(self) -> list:
        """Gates in application order: U, squeezers, displacements, V."""
        gates = decompose_passive(self.U)
        gates += [Squeeze(k, float(rk)) for k, rk in enumerate(self.r) if rk != 0]
        gates += [Displace(k, complex(ak)) for k, ak in enumerate(self.alpha) if ak != 0]
        gates += decompose_passive(self.V)
        return gates


# ---------------------------------------------------- dense Fock kernels


def _along_axis(M: np.ndarray, psi: np.ndarray, ax: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(M, psi, axes=([1], [ax])), 0, ax)


def _pad(psi: np.ndarray, box: int) -> np.ndarray:
    cur = psi.shape[0] - 1
    if cur >= box:
        return psi
    return np.pad(psi, [(0, box - cur)] * psi.ndim)


def _truncate_dense(psi: np.ndarray, k_out: int, norm2: float | None = None):
    """Zero entries with total above ``k_out``, shrink the box, renormalize.

    ``norm2`` is the squared norm the state would have without truncation;
    mass that a gate pushed past the working box is charged against it.
    Without it only the in-box mass above ``k_out`` counts.

    Returns ``(psi, weight)`` where ``weight`` is the removed fraction of the
    squared norm.
    """
    m = psi.ndim
    box = psi.shape[0] - 1
    if box > k_out:
        psi = psi[(slice(0, k_out + 1),) * m]
    over = total_grid(m, k_out) > k_out
    mag2 = np.abs(psi) ** 2
    above = float(np.sum(mag2[over])) if m > 1 else 0.0
    if above > 0.0:
        psi = psi.copy()
        psi[over] = 0
        mag2[over] = 0
    kept = float(np.sum(mag2))
    if kept <= 0.0:
        raise EmptyProjectionError(f"truncation at k={k_out} removes all weight")
    if norm2 is None:
        lost = above
        norm2 = kept + above
    else:
        lost = max(0.0, norm2 - kept)
    if lost > 0.0 or kept != 1.0:
        psi = psi / math.sqrt(kept)
    return psi, lost / norm2


def apply_elementary_dense(psi: np.ndarray, g: ElementaryGate, k_out: int):
    """Apply one gate to a dense tensor and re-truncate at ``k_out``.

    The working box is ``max(current box, k_out)``. Because each per-mode
    occupation in the box can reach the box size, the projected output is the
    exact restriction of the gate's action.
    """
    m = psi.ndim
    for mode in gate_modes(g):
        if not 0 <= mode < m:
            raise InadmissibleParameterError(f"gate mode {mode} out of range for {m} modes")
    box = max(psi.shape[0] - 1, k_out)
    norm2 = float(np.sum(np.abs(psi) ** 2))
    psi = _pad(psi, box)
    if isinstance(g, PhaseShifter):
        shape = [1] * m
        shape[g.mode] = box + 1
        psi = psi * np.exp(1j * g.theta * np.arange(box + 1)).reshape(shape)
    elif isinstance(g, Squeeze):
        if g.r != 0:
            psi = _along_axis(kernels.squeezing_matrix(float(g.r), box), psi, g.mode)
    elif isinstance(g, Displace):
        if g.alpha != 0:
            psi = _along_axis(kernels.displacement_matrix(complex(g.alpha), box), psi, g.mode)
    elif isinstance(g, Beamsplitter):
        T = beamsplitter_block(g.theta, g.phi)
        sect = kernels.beamsplitter_sectors(T[0, 0], T[0, 1], T[1, 0], T[1, 1], box)
        moved = np.moveaxis(psi, (g.mode_a, g.mode_b), (0, 1))
        shp = moved.shape
        flat = np.ascontiguousarray(moved.reshape(box + 1, box + 1, -1))
        out = kernels.apply_sectors(flat, sect, box).reshape(shp)
        psi = np.moveaxis(out, (0, 1), (g.mode_a, g.mode_b))
    else:
        raise InadmissibleParameterError(f"unknown gate {g!r}")
    # passive gates keep the support inside the box; the others may leak
    return _truncate_dense(psi, k_out, None if isinstance(g, (PhaseShifter, Beamsplitter)) else norm2)


def apply_gaussian_dense(psi: np.ndarray, G: GaussianUnitary, k_out: int):
    """Apply ``G`` gate by gate; returns ``(psi, step_weights)``."""
    if psi.ndim != G.m:
        raise InadmissibleParameterError(f"state has {psi.ndim} modes, gate has {G.m}")
    weights = []
    for g in G.elementary_gates():
        psi, w = apply_elementary_dense(psi, g, k_out)
        weights.append(w)
    if psi.shape[0] - 1 != k_out:
        psi, w = _truncate_dense(_pad(psi, k_out), k_out)
        weights.append(w)
    return psi, weights


def combine_weights(weights: Sequence[float]) -> float:
    """Total removed fraction after successive renormalized truncations."""
    keep = 1.0
    for w in weights:
        keep *= 1.0 - w
    return 1.0 - keep


def apply_elementary(state: FockAmplitudeState, g: ElementaryGate, k_out: int):
    """Apply one elementary gate to a sparse Fock state.

    Returns:
        ``(state, discarded_weight)`` with the state renormalized at ``k_out``.
    """
    psi, w = apply_elementary_dense(state.to_dense(), g, k_out)
    out, dropped = FockAmplitudeState.from_dense(psi, k_out)
    return out, combine_weights([w, dropped])


def apply_gaussian(state: FockAmplitudeState, G: GaussianUnitary, k_out: int):
    """Apply ``G`` to a sparse Fock state, truncating after every gate.

    Returns:
        ``(state, discarded_weight)`` where the weight combines all
        intermediate truncations.
    """
    psi, weights = apply_gaussian_dense(state.to_dense(), G, k_out)
    out, dropped = FockAmplitudeState.from_dense(psi, k_out)
    return out, combine_weights(weights + [dropped])


# ---------------------------------------------------- Gaussian states


@dataclass(frozen=True, eq=False)
class GaussianPureState:
    """Pure Gaussian state in Bargmann form ``exp(xi^T A xi/2 + b^T xi + c)``."""

    A: np.ndarray
    b: np.ndarray
    c: complex = 0j
    normalized: bool = field(default=True, compare=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.complex128)
        b = np.asarray(self.b, dtype=np.complex128).reshape(-1)
        m = len(b)
        if A.shape != (m, m):
            raise InadmissibleParameterError(f"A must be {m}x{m}, got {A.shape}")
        if m and np.max(np.abs(A - A.T)) > 1e-10:
            raise InadmissibleParameterError("A must be symmetric")
        if m and not np.linalg.norm(A, 2) < 1:
            raise InadmissibleParameterError("spectral norm of A must be below 1 for a normalizable state")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", complex(self.c))

    @property
    def m(self) -> int:
        return len(self.b)


def vacuum_gaussian(m: int) -> GaussianPureState:
    return GaussianPureState(np.zeros((m, m)), np.zeros(m), 0j)


def coherent_gaussian(alphas: Sequence[complex]) -> GaussianPureState:
    a = np.asarray(alphas, dtype=np.complex128)
    return GaussianPureState(np.zeros((len(a), len(a))), a, -0.5 * float(np.sum(np.abs(a) ** 2)))


# Batched updates. Arrays carry optional leading batch axes:
# A (..., m, m), b (..., m), c (...).


def passive_update(A, b, c, U):
    """State after the passive unitary with matrix ``U``: ``F(xi) -> F(U^T xi)``."""
    A2 = U @ A @ U.T
    b2 = np.einsum("ij,...j->...i", U, b)
    return A2, b2, c


def squeeze_update(A, b, c, mode: int, r: float):
    """State after ``S(r)`` on ``mode``, from the Gaussian integral against the
    squeezer's Bargmann kernel ``exp(-t x^2/2 + x z/ch + t z^2/2)/sqrt(ch)``."""
    if r == 0:
        return A, b, c
    k = mode
    t = math.tanh(r)
    ch = math.cosh(r)
    akk = A[..., k, k]
    D = 1.0 - akk * t
    row = A[..., k, :].copy()
    row[..., k] = 0.0
    bk = b[..., k]
    A2 = A + (t / D)[..., None, None] * row[..., :, None] * row[..., None, :]
    edge = row / (ch * D)[..., None]
    A2[..., k, :] = edge
    A2[..., :, k] = edge
    A2[..., k, k] = -t + akk / (ch**2 * D)
    b2 = b + (t * bk / D)[..., None] * row
    b2[..., k] = bk / (ch * D)
    c2 = c + 0.5 * t * bk**2 / D - 0.5 * math.log(ch) - 0.5 * np.log(D)
    return A2, b2, c2


def displace_update(A, b, c, alpha):
    """State after ``D(alpha)`` with ``alpha`` an ``m``-vector."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    ac = alpha.conj()
    Aac = np.einsum("...ij,j->...i", A, ac)
    b2 = b + alpha - Aac
    c2 = c - 0.5 * float(np.sum(np.abs(alpha) ** 2)) + 0.5 * (Aac @ ac) - b @ ac
    return A, b2, c2


def evolve_arrays(A, b, c, g):
    """Apply an elementary gate or a :class:`GaussianUnitary` to Bargmann arrays."""
    A = np.array(A, dtype=np.complex128)
    b = np.array(b, dtype=np.complex128)
    c = np.array(c, dtype=np.complex128)
    m = b.shape[-1]
    if isinstance(g, GaussianUnitary):
        A, b, c = passive_update(A, b, c, g.U)
        for k, rk in enumerate(g.r):
            A, b, c = squeeze_update(A, b, c, k, float(rk))
        if np.any(g.alpha):
            A, b, c = displace_update(A, b, c, g.alpha)
        return passive_update(A, b, c, g.V)
    if isinstance(g, (PhaseShifter, Beamsplitter)):
        return passive_update(A, b, c, gate_matrix(g, m))
    if isinstance(g, Squeeze):
        return squeeze_update(A, b, c, g.mode, g.r)
    if isinstance(g, Displace):
        vec = np.zeros(m, dtype=np.complex128)
        vec[g.mode] = g.alpha
        return displace_update(A, b, c, vec)
    raise InadmissibleParameterError(f"unknown gate {g!r}")


def phase_update(A, b, c, modes: Sequence[int], angles: Sequence[float]):
    """Phase shifters ``exp(i theta N)`` on several modes at once."""
    m = b.shape[-1]
    d = np.ones(m, dtype=np.complex128)
    for k, th in zip(modes, angles):
        d[k] *= cmath.exp(1j * th)
    return A * d[:, None] * d[None, :], b * d, c


def evolve_gaussian_state(state: GaussianPureState, g) -> GaussianPureState:
    """Exact evolution of a Gaussian state, global phase included."""
    A, b, c = evolve_arrays(state.A, state.b, state.c, g)
    return GaussianPureState(A, b, complex(c), normalized=state.normalized)


# ----------------------------------------------------------- overlaps


def _inv_sqrt_det(M: np.ndarray) -> complex:
    """``det(M)^{-1/2}`` on the branch continuous from the identity.

    Every eigenvalue of ``M = I - B A`` with ``||A||, ||B|| < 1`` has positive
    real part, so taking principal roots eigenvalue by eigenvalue is safe.
    """
    if M.shape[0] == 0:
        return 1.0 + 0j
    ev = np.linalg.eigvals(M)
    return complex(np.prod(1.0 / np.sqrt(ev)))


def bargmann_inner(A1, b1, c1, A2, b2, c2) -> complex:
    """``<G1|G2>`` for (possibly unnormalized) Bargmann parameters."""
    r = len(b2)
    expo = complex(c2) + complex(np.conj(c1))
    if r == 0:
        return cmath.exp(expo)
    B = np.conj(A1)
    u = np.asarray(b2)
    v = np.conj(b1)
    M = np.eye(r) - B @ A2
    x = np.linalg.solve(M, v + B @ u)
    y = u + A2 @ x
    expo += 0.5 * (u @ x + v @ y)
    return _inv_sqrt_det(M) * cmath.exp(expo)


def gaussian_overlap(a: GaussianPureState, b: GaussianPureState) -> complex:
    """``<a|b>`` including global phases."""
    if a.m != b.m:
        raise InadmissibleParameterError(f"mode mismatch: {a.m} vs {b.m}")
    return bargmann_inner(a.A, a.b, a.c, b.A, b.b, b.c)


def reduce_heterodyne(A, b, c, alphas):
    """Project the first ``k`` modes onto coherent states ``<alpha|``.

    Works on batched arrays. Returns the Bargmann parameters of the
    unnormalized state left on the remaining ``m - k`` modes.
    """
    al = np.asarray(alphas, dtype=np.complex128).reshape(-1)
    k = len(al)
    ac = al.conj()
    Akk = A[..., :k, :k]
    Ark = A[..., k:, :k]
    Arr = A[..., k:, k:]
    br = b[..., k:] + np.einsum("...ij,j->...i", Ark, ac)
    quad = np.einsum("...i,i->...", np.einsum("...ij,j->...i", Akk, ac), ac)
    cr = c + 0.5 * quad + b[..., :k] @ ac - 0.5 * float(np.sum(np.abs(al) ** 2))
    return Arr, br, cr


def partial_heterodyne_overlap(a: GaussianPureState, b: GaussianPureState, alphas: Sequence[complex]) -> complex:
    """``<b| (|alpha><alpha| on the first k modes) |a>``."""
    k = len(alphas)
    if a.m != b.m:
        raise InadmissibleParameterError(f"mode mismatch: {a.m} vs {b.m}")
    if not 0 <= k <= a.m:
        raise InadmissibleParameterError(f"need 0 <= k <= m, got k={k}, m={a.m}")
    ra = reduce_heterodyne(a.A, a.b, a.c, alphas)
    rb = reduce_heterodyne(b.A, b.b, b.c, alphas)
    return bargmann_inner(*rb, *ra)


def fock_tensor_of_gaussian(state: GaussianPureState, box: int) -> np.ndarray:
    """Unnormalized dense Fock amplitudes with total at most ``box``."""
    flat = kernels.gaussian_fock(np.ascontiguousarray(state.A), np.ascontiguousarray(state.b), complex(state.c), box)
    return flat.reshape((box + 1,) * state.m)


def fock_amplitudes_of_gaussian(state: GaussianPureState, cutoff: int):
    """Fock expansion of a Gaussian state truncated at total ``cutoff``.

    Returns:
        ``(state, discarded_weight)``: the renormalized truncated state and the
        squared norm of the tail beyond ``cutoff``, measured against the
        Gaussian state's exact norm.
    """
    psi = fock_tensor_of_gaussian(state, cutoff)
    norm2 = gaussian_overlap(state, state).real
    kept = float(np.sum(np.abs(psi) ** 2))
    out, dropped = FockAmplitudeState.from_dense(psi, cutoff)
    tail = max(0.0, 1.0 - kept / norm2)
    return out, combine_weights([tail, dropped])

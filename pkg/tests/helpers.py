"""Random circuits and independent dense oracles shared by the tests.

The oracles use scipy's matrix exponential on truncated ladder operators and
never call the package's gate kernels.
"""
import math

import numpy as np
from scipy.linalg import expm, logm

from expenergy.circuit import CircuitIR, Layer
from expenergy.gaussian import GaussianUnitary
from expenergy.kerr import IrrationalKerr, RationalKerr


def haar_unitary(m, rng):
    z = (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_gaussian(m, rng, r_max=0.3, a_max=1.0, passive=False):
    U = haar_unitary(m, rng)
    V = haar_unitary(m, rng)
    if passive:
        return GaussianUnitary(V, np.zeros(m), np.zeros(m), U)
    r = rng.uniform(0, r_max, size=m)
    mag = rng.uniform(0, a_max, size=m)
    alpha = mag * np.exp(2j * np.pi * rng.uniform(size=m))
    return GaussianUnitary(V, alpha, r, U)


def random_rational_kerr(m, rng, q_max=4, kinds=("self", "cross")):
    kind = rng.choice([k for k in kinds if k == "self" or m >= 2])
    q = int(rng.integers(1, q_max + 1))
    p = int(rng.integers(-q, q + 1))
    if kind == "self":
        return RationalKerr(p, q, "self", (int(rng.integers(m)),))
    a, b = rng.choice(m, size=2, replace=False)
    return RationalKerr(p, q, "cross", (int(a), int(b)))


def random_circuit(rng, m, L, r_max=0.3, a_max=1.0, q_max=4, kerr_prob=0.8, kinds=("self", "cross")):
    layers = []
    for _ in range(L):
        gate = random_rational_kerr(m, rng, q_max, kinds) if rng.uniform() < kerr_prob else None
        layers.append(Layer(gate, random_gaussian(m, rng, r_max, a_max)))
    return CircuitIR(m, tuple(layers))


def random_fock_amplitudes(m, k, rng, decay=0.5):
    """Random dense amplitudes with total at most ``k`` and geometric decay."""
    psi = rng.normal(size=(k + 1,) * m) + 1j * rng.normal(size=(k + 1,) * m)
    tot = np.zeros((k + 1,) * m, dtype=int)
    for ax in range(m):
        shape = [1] * m
        shape[ax] = k + 1
        tot = tot + np.arange(k + 1).reshape(shape)
    psi = psi * decay ** tot
    psi[tot > k] = 0
    return psi / np.linalg.norm(psi)


# ------------------------------------------------------------ dense oracle


def ladder(box):
    return np.diag(np.sqrt(np.arange(1, box + 1)), 1).astype(np.complex128)


def squeeze_op(r, box):
    a = ladder(box)
    return expm(0.5 * r * (a @ a - a.T @ a.T))


def displace_op(alpha, box):
    a = ladder(box)
    return expm(alpha * a.T - np.conj(alpha) * a)


def coherent_ket(alpha, box):
    n = np.arange(box + 1)
    logmag = -abs(alpha) ** 2 / 2 - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        out = np.zeros(box + 1, dtype=np.complex128)
        out[0] = 1.0
        return out
    return np.exp(logmag + n * math.log(abs(alpha))) * np.exp(1j * n * np.angle(alpha))


def _along(M, psi, ax):
    return np.moveaxis(np.tensordot(M, psi, axes=([1], [ax])), 0, ax)


def passive_dense(U, psi):
    """Apply the passive unitary sector by sector with ``expm`` of its generator.

    Each fixed-total sector is invariant, so the restriction is exact for
    totals up to the box; entries above that are dropped.
    """
    m = psi.ndim
    box = psi.shape[0] - 1
    X = logm(U)
    out = np.zeros_like(psi)
    for N in range(box + 1):
        basis = [n for n in np.ndindex(*(N + 1,) * m) if sum(n) == N]
        index = {n: i for i, n in enumerate(basis)}
        H = np.zeros((len(basis), len(basis)), dtype=np.complex128)
        for col, n in enumerate(basis):
            for j in range(m):
                for k in range(m):
                    if n[k] == 0:
                        continue
                    amp = math.sqrt(n[k])
                    nn = list(n)
                    nn[k] -= 1
                    amp *= math.sqrt(nn[j] + 1)
                    nn[j] += 1
                    H[index[tuple(nn)], col] += X[j, k] * amp
        vec = np.array([psi[n] for n in basis])
        new = expm(H) @ vec
        for i, n in enumerate(basis):
            out[n] = new[i]
    return out


def kerr_dense(psi, gate):
    m = psi.ndim
    box = psi.shape[0] - 1
    n = np.arange(box + 1)
    x = float(gate.x)
    if gate.kind == "self":
        shape = [1] * m
        shape[gate.modes[0]] = box + 1
        return psi * np.exp(1j * np.pi * x * n**2).reshape(shape)
    a, b = gate.modes
    shape = [1] * m
    shape[a] = box + 1
    ph = np.exp(2j * np.pi * x * np.multiply.outer(n, n))
    shape[b] = box + 1
    if a > b:
        ph = ph.T
    return psi * ph.reshape(shape)


def dense_circuit_state(circuit, box):
    """Reference output state on a per-mode box, entries with total above ``box`` zeroed."""
    m = circuit.m
    psi = np.zeros((box + 1,) * m, dtype=np.complex128)
    psi[(0,) * m] = 1.0
    S = {}
    for layer in circuit.layers:
        if layer.non_gaussian is not None:
            psi = kerr_dense(psi, layer.non_gaussian)
        G = layer.gaussian
        psi = passive_dense(G.U, psi)
        for k in range(m):
            if G.r[k]:
                key = ("s", float(G.r[k]))
                S.setdefault(key, squeeze_op(G.r[k], box))
                psi = _along(S[key], psi, k)
        for k in range(m):
            if G.alpha[k]:
                psi = _along(displace_op(G.alpha[k], box), psi, k)
        psi = passive_dense(G.V, psi)
    return psi


def heterodyne_from_dense(psi, alphas):
    """``(1/pi^k) sum_rest |<alpha| psi>|^2`` with explicit coherent kets."""
    box = psi.shape[0] - 1
    amp = psi
    for a in alphas:
        amp = np.tensordot(coherent_ket(a, box).conj(), amp, axes=([0], [0]))
    return float(np.sum(np.abs(amp) ** 2)) / math.pi ** len(alphas)


def irrational_copy(circuit, layer, x):
    g = circuit.layers[layer].non_gaussian
    kind, modes = (g.kind, g.modes) if g is not None else ("self", (0,))
    return circuit.with_gate(layer, IrrationalKerr(x, kind, modes))

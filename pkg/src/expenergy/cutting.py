"""Monte-Carlo quasiprobability estimator for heterodyne densities.

Each rational Kerr gate is a complex-weighted sum of phase-shifter layers
``sum_j g_j P_j``. The density ``|<alpha|psi>|^2/pi^m`` is then a double sum
over branch pairs ``(J, J')`` with weights ``g_J conj(g_J')``. Pairs are drawn
with probability ``|g_J g_J'|/||g||_1`` and the phase moves into the sampled
value, which is bounded by ``||g||_1/pi^m``.

Sampling is chunked: chunk ``i`` uses a Philox stream keyed by
``(i, seed)``, so results depend only on the seed and the sample count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bounds
from ._accel import thread_count
from .circuit import CircuitIR
from .errors import IncompatibleBackendError, InadmissibleParameterError
from .gaussian import evolve_arrays, phase_update, reduce_heterodyne
from .kerr import RationalKerr, decompose_kerr
from .sim_superpos import RationalizedCircuit

CHUNK = 4096
_MASK64 = (1 << 64) - 1


def hoeffding_count(g_one_norm: float, eps: float, delta: float) -> int:
    """Samples needed for ``|estimate - p| <= eps`` with probability ``1 - delta``.

    ``g_one_norm`` is the pair 1-norm, i.e. the range bound of the sampled
    values: ``N = ceil(2 g^2/eps^2 ln(2/delta))``.
    """
    bounds._check_unit_open(eps, "eps")
    bounds._check_unit_open(delta, "delta")
    if not g_one_norm >= 1:
        raise InadmissibleParameterError(f"g_one_norm must be at least 1, got {g_one_norm}")
    return max(1, bounds._ceil(2 * g_one_norm**2 / eps**2 * math.log(2 / delta)))


@dataclass(frozen=True)
class CutPlan:
    """Sampling plan for one circuit.

    Attributes:
        circuit: the rational circuit being estimated.
        one_norm_total: pair 1-norm, the square of the product of per-gate
            1-norms.
        eps, delta: target half-width and failure probability.
        N: number of sampled pairs.
        seed: unsigned 64-bit seed.
    """

    circuit: RationalizedCircuit
    one_norm_total: float
    eps: float
    delta: float
    N: int
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise InadmissibleParameterError("seed must be an unsigned 64-bit integer")
        if self.N < 1:
            raise InadmissibleParameterError("N must be positive")

    @property
    def is_exact(self) -> bool:
        return all(len(t[0]) == 1 for t in _layer_tables(self.circuit.circuit))


def _layer_tables(circ: CircuitIR):
    """Per layer: ``(coefficients, angles, modes)`` with a trivial branch for no gate."""
    out = []
    for i, layer in enumerate(circ.layers):
        g = layer.non_gaussian
        if g is None:
            out.append((np.ones(1, dtype=np.complex128), np.zeros((1, 0)), ()))
        elif isinstance(g, RationalKerr):
            d = decompose_kerr(g.p, g.q, g.kind, g.modes)
            out.append((d.coefficients, d.angles, g.modes))
        else:
            raise IncompatibleBackendError(f"layer {i}: cutting needs a rational Kerr gate, got {g!r}")
    return out


def make_plan(circuit, eps: float, delta: float, seed: int = 0, N: int | None = None) -> CutPlan:
    """Plan with ``N = hoeffding_count(one_norm_total, eps, delta)`` unless given."""
    rc = circuit if isinstance(circuit, RationalizedCircuit) else RationalizedCircuit(circuit)
    tables = _layer_tables(rc.circuit)
    single = math.prod(float(np.sum(np.abs(t[0]))) for t in tables)
    g = single**2
    need = hoeffding_count(max(1.0, g), eps, delta)
    if N is None:
        N = need
    elif N < need:
        raise InadmissibleParameterError(f"N={N} is below the Hoeffding count {need}")
    return CutPlan(rc, g, eps, delta, int(N), int(seed))


class _BranchCache:
    """Lazily evolved branch amplitudes ``<alpha|G_J>`` with a prefix cache."""

    def __init__(self, circ: CircuitIR, tables, alphas: np.ndarray):
        self.circ = circ
        self.tables = tables
        self.alphas = alphas
        m = circ.m
        self.prefix = {(): (np.zeros((m, m), dtype=np.complex128), np.zeros(m, dtype=np.complex128), 0j)}
        self.amps: dict = {}

    def _state(self, J: tuple):
        hit = self.prefix.get(J)
        if hit is not None:
            return hit
        A, b, c = self._state(J[:-1])
        i = len(J) - 1
        _, angles, modes = self.tables[i]
        if modes:
            A, b, c = phase_update(A, b, c, modes, angles[J[-1]])
        A, b, c = evolve_arrays(A, b, c, self.circ.layers[i].gaussian)
        out = (A, b, complex(c))
        if i < len(self.tables) - 1:
            self.prefix[J] = out
        return out

    def amplitude(self, J: tuple) -> complex:
        x = self.amps.get(J)
        if x is None:
            A, b, c = self._state(J)
            _, _, cr = reduce_heterodyne(A, b, c, self.alphas)
            x = complex(np.exp(cr))
            self.amps[J] = x
        return x


def _sample_indices(gen: np.random.Generator, cdfs, n: int) -> np.ndarray:
    cols = [np.minimum(np.searchsorted(cdf, gen.random(n), side="right"), len(cdf) - 1) for cdf in cdfs]
    return np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=np.int64)


class _Evaluator:
    def __init__(self, plan: CutPlan, alphas: Sequence[complex]):
        circ = plan.circuit.circuit
        al = np.asarray(alphas, dtype=np.complex128).reshape(-1)
        if len(al) != circ.m:
            raise InadmissibleParameterError(f"need {circ.m} heterodyne amplitudes, got {len(al)}")
        self.tables = _layer_tables(circ)
        self.weights = [np.abs(t[0]) for t in self.tables]
        self.phases = [np.angle(t[0]) for t in self.tables]
        self.cdfs = [np.cumsum(w) / np.sum(w) for w in self.weights]
        self.scale = plan.one_norm_total / math.pi**circ.m
        self.cache = _BranchCache(circ, self.tables, al)

    def values(self, J: np.ndarray, Jp: np.ndarray) -> np.ndarray:
        """Complex sampled values for pair rows ``J[n], Jp[n]``."""
        n = len(J)
        ph = np.zeros(n)
        for i, p in enumerate(self.phases):
            ph += p[J[:, i]] - p[Jp[:, i]]
        x = np.array([self.cache.amplitude(tuple(int(v) for v in row)) for row in J], dtype=np.complex128)
        xp = np.array([self.cache.amplitude(tuple(int(v) for v in row)) for row in Jp], dtype=np.complex128)
        return self.scale * np.exp(1j * ph) * x * np.conj(xp)


def _chunk_pairs(ev: _Evaluator, seed: int, chunk: int, n: int):
    gen = np.random.Generator(np.random.Philox(key=(chunk << 64) | seed))
    J = _sample_indices(gen, ev.cdfs, n)
    Jp = _sample_indices(gen, ev.cdfs, n)
    return J, Jp


def _chunk_sum(ev: _Evaluator, seed: int, chunk: int, n: int) -> float:
    return math.fsum(ev.values(*_chunk_pairs(ev, seed, chunk, n)).real)


def estimate(plan: CutPlan, alphas: Sequence[complex], workers: int | None = None) -> tuple[float, float]:
    """Estimate the full-mode heterodyne density at ``alphas``.

    Returns ``(estimate, half_width)``; ``half_width`` is the Hoeffding radius
    for ``(N, delta)`` given the range ``[-g/pi^m, g/pi^m]`` of the sampled
    real parts. Plans without any branching return the exact value with zero
    half-width.
    """
    ev = _Evaluator(plan, alphas)
    if plan.is_exact:
        J = np.zeros((1, len(ev.tables)), dtype=np.int64)
        val = float(ev.values(J, J)[0].real)
        return max(val, 0.0), 0.0
    chunks = [(i, min(CHUNK, plan.N - i * CHUNK)) for i in range(-(-plan.N // CHUNK))]
    workers = thread_count() if workers is None else workers
    if workers > 1 and len(chunks) > 1:
        # the branch cache is shared; fill it up front so threads only read
        for i, n in chunks:
            for rows in _chunk_pairs(ev, plan.seed, i, n):
                for row in np.unique(rows, axis=0):
                    ev.cache.amplitude(tuple(int(v) for v in row))
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _chunk_sum(ev, plan.seed, *a), chunks))
    else:
        parts = [_chunk_sum(ev, plan.seed, i, n) for i, n in chunks]
    mean = math.fsum(parts) / plan.N
    half = ev.scale * math.sqrt(2 * math.log(2 / plan.delta) / plan.N)
    return mean, half


def exhaustive_expectation(plan: CutPlan, alphas: Sequence[complex]) -> complex:
    """Exact mean of the sampled value, summing over every ``(J, J')`` pair."""
    ev = _Evaluator(plan, alphas)
    sizes = [len(w) for w in ev.weights]
    grids = np.indices(sizes).reshape(len(sizes), -1).T
    probs = np.ones(len(grids))
    for i, w in enumerate(ev.weights):
        probs = probs * (w / w.sum())[grids[:, i]]
    T = len(grids)
    J = np.repeat(grids, T, axis=0)
    Jp = np.tile(grids, (T, 1))
    vals = ev.values(J, Jp) * np.outer(probs, probs).reshape(-1)
    return complex(math.fsum(vals.real), math.fsum(vals.imag))

"""Closed-form cutoffs, growth factors, energy bounds and sample counts.

Every function is pure and rejects inputs outside its admissible domain with
:class:`~expenergy.errors.InadmissibleParameterError` instead of returning
NaN or infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InadmissibleParameterError

_CEIL_SLACK = 1e-9


def _ceil(x: float) -> int:
    """Ceiling that forgives round-off just above an integer.

    ``2*log10(1e3)`` evaluates to ``5.999999999999999`` and ``log(2**5)/log(2)``
    may land a hair above 5; both should count as exact integers.
    """
    r = round(x)
    if abs(x - r) <= _CEIL_SLACK * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


def _log_base(x: float, s: float) -> float:
    return math.log(x) / math.log(s)


def _check_base(s: float, name: str = "s"):
    if not (math.isfinite(s) and s > 1):
        raise InadmissibleParameterError(f"{name} must be a finite real > 1, got {s}")


def _check_unit_open(x: float, name: str):
    if not (0 < x < 1):
        raise InadmissibleParameterError(f"{name} must lie in (0, 1), got {x}")


@dataclass(frozen=True)
class CircuitEnvelope:
    """Worst-case circuit parameters used by the uniform bounds.

    Attributes:
        m: number of modes.
        L: number of layers.
        alpha_max: largest displacement magnitude over all layers and modes.
        r_max: largest squeezing parameter over all layers and modes.
    """

    m: int
    L: int
    alpha_max: float = 0.0
    r_max: float = 0.0

    def __post_init__(self):
        if self.m < 1 or self.L < 1:
            raise InadmissibleParameterError(f"need m >= 1 and L >= 1, got m={self.m}, L={self.L}")
        if not (self.alpha_max >= 0 and self.r_max >= 0):
            raise InadmissibleParameterError("alpha_max and r_max must be nonnegative")


@dataclass(frozen=True)
class ExpEnergyCertificate:
    """A certificate ``<s^N> <= bound <= t^E`` for some state.

    ``log_bound`` is kept alongside ``bound`` because the bound overflows a
    double long before it stops being useful inside logarithms.
    """

    t: float
    E: float
    log_bound: float

    def __post_init__(self):
        _check_base(self.t, "t")
        if self.E < 0 or self.log_bound < 0:
            raise InadmissibleParameterError("certificate needs E >= 0 and bound >= 1")

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound)

    @property
    def tight_exponent(self) -> float:
        """Smallest exponent ``E'`` with ``t^E' = bound``."""
        return self.log_bound / math.log(self.t)


def energy_cutoff(E: float, eps: float) -> int:
    """Cutoff ``ceil(E/eps^2)`` for states with mean boson number ``E``."""
    if not (0 < eps <= 1):
        raise InadmissibleParameterError(f"eps must lie in (0, 1], got {eps}")
    if E < 0:
        raise InadmissibleParameterError(f"E must be nonnegative, got {E}")
    return _ceil(E / eps**2)


def exp_energy_cutoff(E: float, s: float, eps: float) -> int:
    """Cutoff ``ceil(E + 2 log_s(1/eps))`` for states with ``<s^N> <= s^E``."""
    _check_base(s)
    if not (0 < eps <= 1):
        raise InadmissibleParameterError(f"eps must lie in (0, 1], got {eps}")
    if E < 0:
        raise InadmissibleParameterError(f"E must be nonnegative, got {E}")
    return _ceil(E + 2 * _log_base(1 / eps, s))


def truncation_error_bound(s: float, E: float, k: int) -> float:
    """Trace-distance bound ``min(1, sqrt(s^(E-k)))`` for truncation at ``k``."""
    _check_base(s)
    expo = 0.5 * (E - k) * math.log(s)
    if expo >= 0:
        return 1.0
    return math.exp(expo)


def t_schedule(r: float, L: int) -> list[float]:
    """Exponential-energy bases ``[t_0, ..., t_L]`` for a depth-``L`` circuit.

    ``t_0 = 1 + 2 e^{-2r}`` and ``t_i = 1 + (t_{i-1} - 1)/(e^{2r} + t_{i-1})``.
    """
    if r < 0:
        raise InadmissibleParameterError(f"r must be nonnegative, got {r}")
    if L < 1:
        raise InadmissibleParameterError(f"L must be positive, got {L}")
    e2r = math.exp(2 * r)
    ts = [1 + 2 / e2r]
    for _ in range(L):
        prev = ts[-1]
        ts.append(1 + (prev - 1) / (e2r + prev))
    return ts


def _envelope_exponent(env: CircuitEnvelope) -> float:
    return env.m * env.L**2 * (env.alpha_max**2 + 28 * env.r_max + 9)


def circuit_exp_energy_bound(env: CircuitEnvelope) -> ExpEnergyCertificate:
    """Exponential-energy certificate for any circuit inside ``env``.

    The output state satisfies ``<t_L^N> <= exp(m L^2 (|a|^2 + 28 r + 9))``
    and that value is at most ``t_L^E`` with
    ``E = m L^2 exp(2(2r+1)L) (|a|^2 + 28 r + 9)``.
    """
    t = t_schedule(env.r_max, env.L)[-1]
    x = _envelope_exponent(env)
    E = x * math.exp(2 * (2 * env.r_max + 1) * env.L)
    return ExpEnergyCertificate(t=t, E=E, log_bound=x)


def squeezing_window(r: float, s: float) -> float:
    """Upper end ``f(r, s)`` of the admissible ``t`` interval for squeezing."""
    sr = math.sinh(r)
    return 1 + (s - 1) / (math.exp(2 * r) + sr * math.exp(r) * (s - 1))


def squeezing_growth(r: float, s: float, t: float) -> float:
    """Factor ``g(r, s, t)`` bounding ``S^dag t^N S`` by ``g * s^N`` per mode.

    Raises:
        InadmissibleParameterError: naming the violated condition among
            ``r >= 0``, ``s > 1``, ``s < coth(r)``, ``t > 1`` and ``t < f(r, s)``.
    """
    if r < 0:
        raise InadmissibleParameterError(f"r >= 0 violated: r={r}")
    if not s > 1:
        raise InadmissibleParameterError(f"s > 1 violated: s={s}")
    if r > 0 and not s < 1 / math.tanh(r):
        raise InadmissibleParameterError(f"s < 1/tanh(r) violated: s={s} >= {1 / math.tanh(r)}")
    if not t > 1:
        raise InadmissibleParameterError(f"t > 1 violated: t={t}")
    f = squeezing_window(r, s)
    if not t < f:
        raise InadmissibleParameterError(f"t < f(r, s) violated: t={t} >= f={f}")
    sr = math.sinh(r)
    num = math.exp(2 * r) + sr * math.exp(r) * (s - 1)
    den = math.exp(-2 * r) - sr * math.exp(-r) * (s - 1)
    last = (s - 1) - (t - 1) * num
    return s * math.sqrt(num / den) / last


def displacement_growth(s: float, t: float, alpha_max: float, m: int) -> float:
    """Factor bounding ``D^dag t^N D`` by a multiple of ``s^N`` on ``m`` modes."""
    _check_base(s)
    if not (1 < t < s):
        raise InadmissibleParameterError(f"1 < t < s violated: t={t}, s={s}")
    if m < 1 or alpha_max < 0:
        raise InadmissibleParameterError("need m >= 1 and alpha_max >= 0")
    return (s / (s - t)) ** m * math.exp(m * alpha_max**2 * (s - 1) * (t - 1) / (s - t))


def energy_bound(env: CircuitEnvelope) -> float:
    """Upper bound on ``<N>`` for any circuit inside ``env``.

    Uses ``A = e^{2r} + 4|a|e^r`` and returns ``m (A^L - 1)(1 + |a|^2/(A - 1))``,
    or 0 when ``A = 1`` (no squeezing or displacement).
    """
    A = math.exp(2 * env.r_max) + 4 * env.alpha_max * math.exp(env.r_max)
    if A == 1.0:
        return 0.0
    return env.m * (A**env.L - 1) * (1 + env.alpha_max**2 / (A - 1))


def learning_sample_count(m: int, E: float, s: float, eps: float, delta: float) -> float:
    """Copies sufficient to learn an ``m``-mode state with ``<s^N> <= s^E``."""
    _check_base(s)
    _check_unit_open(eps, "eps")
    _check_unit_open(delta, "delta")
    if m < 1 or E < 0:
        raise InadmissibleParameterError("need m >= 1 and E >= 0")
    core = (1 + E + 2 * _log_base(2 / eps, s) / m) ** m
    return 2**21 / eps**2 * core * math.log(4 / delta) + 24 * math.log(2 / delta)


def kerr_neglect_error_bound(s: float, E: float, eps: float) -> float:
    """Trace-distance cost of dropping ``exp(i eps N^2)`` on a state in ``S_{s,E}``.

    Returns ``2 eps + (eps/sqrt 2)(E + log_s(1/eps^2))^2``.
    """
    _check_base(s)
    if not eps > 0:
        raise InadmissibleParameterError(f"eps must be positive, got {eps}")
    k = E + _log_base(1 / eps**2, s)
    return 2 * eps + eps / math.sqrt(2) * k**2

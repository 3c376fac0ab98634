import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expenergy import bounds, fock, sim_fock
from expenergy.circuit import GenericDiagonal, from_layers, identity_circuit, single_layer
from expenergy.errors import EmptyProjectionError, InadmissibleParameterError, ResourceLimitError
from expenergy.gaussian import GaussianUnitary
from expenergy.kerr import RationalKerr

from helpers import dense_circuit_state, heterodyne_from_dense, random_circuit, random_gaussian


def squeeze_layer(r, m=1):
    return GaussianUnitary(np.eye(m), np.zeros(m), [r] + [0] * (m - 1), np.eye(m))


def pure_distance(psi, state):
    """Trace distance between a dense reference and a simulated state.

    Uses the residual after projecting out the overlap, which avoids the
    cancellation in ``1 - |<a|b>|^2``.
    """
    ref = psi / np.linalg.norm(psi)
    box = max(ref.shape[0] - 1, state.cutoff)
    pad = [(0, box - (ref.shape[0] - 1))] * ref.ndim
    ref = np.pad(ref, pad)
    phi = state.to_dense(box)
    phi = phi / np.linalg.norm(phi)
    ov = np.vdot(phi, ref)
    return float(np.linalg.norm(ref - ov * phi))


# ------------------------------------------------------------- plan_cutoff


def test_plan_cutoff_example():
    c = identity_circuit(1, 1)
    k = sim_fock.plan_cutoff(c, 2, 4, 0.25)
    # 2 sqrt(4/2^k) <= 0.25 needs 2^k >= 256
    assert k == 8
    assert 2 * math.sqrt(4 / 2**k) <= 0.25 < 2 * math.sqrt(4 / 2 ** (k - 1))


def test_plan_cutoff_loose_budget():
    for S in (3.0, 17.0, 1000.0):
        c = identity_circuit(1, 1)
        assert sim_fock.plan_cutoff(c, 2, S, 2.0) == math.ceil(math.log2(S))


def test_plan_cutoff_doubling_layers():
    for S in (4.0, 10.0, 123.0):
        for L in (1, 2, 3, 5):
            a = sim_fock.plan_cutoff(identity_circuit(1, L), 2, S, 0.1)
            b = sim_fock.plan_cutoff(identity_circuit(1, 2 * L), 2, S, 0.1)
            assert b - a == 2
            a = sim_fock.plan_cutoff(identity_circuit(1, L), 4, S, 0.1)
            b = sim_fock.plan_cutoff(identity_circuit(1, 2 * L), 4, S, 0.1)
            assert b - a == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.floats(1.1, 10), st.floats(1, 1e6), st.floats(1e-6, 0.9))
def test_plan_cutoff_meets_budget(L, s, S, eps):
    k = sim_fock.plan_cutoff(identity_circuit(1, L), s, S, eps)
    assert 2 * L * math.sqrt(S / s**k) <= eps * (1 + 1e-9)


def test_certified_cutoff_meets_prefix_budgets():
    rng = np.random.default_rng(4)
    c = random_circuit(rng, 2, 3)
    eps = 0.05
    k = sim_fock.certified_cutoff(c, eps)
    for cert in sim_fock.prefix_certificates(c):
        log_err = math.log(2 * c.L) + 0.5 * (cert.log_bound - k * math.log(cert.t))
        assert log_err <= math.log(eps) + 1e-9


# ---------------------------------------------------------------- simulate


def test_identity_layers_give_vacuum():
    res = sim_fock.simulate(identity_circuit(3, 4), 5)
    assert res.state.amplitudes == {(0, 0, 0): 1.0}
    assert res.error_ledger == (0.0,) * 4 and res.total_error_bound == 0.0


def test_single_layer_matches_dense_oracle():
    c = single_layer(squeeze_layer(0.2), RationalKerr(1, 2))
    res = sim_fock.simulate(c, 25)
    ref = dense_circuit_state(c, 60)
    ref /= np.linalg.norm(ref)
    ov = np.vdot(ref[:26], res.state.to_dense(25))
    assert 1 - abs(ov) ** 2 <= 1e-8
    assert res.total_error_bound >= pure_distance(ref, res.state)


def test_passive_circuit_ledger_is_zero():
    rng = np.random.default_rng(8)
    layers = [(RationalKerr(1, 3, "cross", (0, 1)), random_gaussian(2, rng, passive=True)),
              (RationalKerr(-1, 2, "self", (1,)), random_gaussian(2, rng, passive=True))]
    res = sim_fock.simulate(from_layers(2, layers), 4)
    assert res.error_ledger == (0.0, 0.0) and res.total_error_bound == 0.0
    assert res.state.amplitudes == {(0, 0): pytest.approx(res.state.amplitude([0, 0]))}
    assert abs(abs(res.state.amplitude([0, 0])) - 1) <= 1e-15


def test_passive_circuit_on_excited_input_conserves_weight():
    # displace first, then a passive-only layer must not add ledger entries
    rng = np.random.default_rng(9)
    G1 = GaussianUnitary(np.eye(2), [0.5, 0.3j], [0, 0], np.eye(2))
    G2 = random_gaussian(2, rng, passive=True)
    res = sim_fock.simulate(from_layers(2, [(None, G1), (RationalKerr(1, 2, "cross", (0, 1)), G2)]), 12)
    assert res.error_ledger[1] == 0.0 and res.error_ledger[0] > 0


def test_ledger_valid_on_random_circuits():
    """End-to-end: the ledger bounds the distance to a high-cutoff reference."""
    rng = np.random.default_rng(2718)
    checked = 0
    worst = 0.0
    for trial in range(110):
        m = int(rng.integers(1, 3))
        L = int(rng.integers(1, 4))
        c = random_circuit(rng, m, L)
        k = int(rng.integers(3, 16)) if m == 1 else int(rng.integers(3, 11))
        ref = dense_circuit_state(c, 90 if m == 1 else 40)
        res = sim_fock.simulate(c, k)
        dist = pure_distance(ref, res.state)
        assert dist <= res.total_error_bound, (trial, dist, res.total_error_bound)
        pts = (rng.normal(size=m) + 1j * rng.normal(size=m))
        p_ref = heterodyne_from_dense(ref / np.linalg.norm(ref), pts)
        p_sim = sim_fock.heterodyne_probability(res.state, pts)
        # pure states: |<a|(rho - sigma)|a>| <= trace distance; 1e-14 covers rounding
        assert abs(p_ref - p_sim) <= res.total_error_bound + 1e-14
        worst = max(worst, dist / max(res.total_error_bound, 1e-300))
        checked += 1
    assert checked >= 100
    assert worst > 0


def test_certified_ledger_valid():
    rng = np.random.default_rng(77)
    for _ in range(15):
        m = int(rng.integers(1, 3))
        c = random_circuit(rng, m, int(rng.integers(1, 3)))
        certs = sim_fock.prefix_certificates(c)
        k = 20 if m == 1 else 12
        res = sim_fock.simulate(c, k, certificates=certs)
        assert res.certified
        ref = dense_circuit_state(c, 90 if m == 1 else 40)
        assert pure_distance(ref, res.state) <= res.total_error_bound


def test_error_bound_monotone_in_cutoff():
    rng = np.random.default_rng(31)
    for _ in range(20):
        m = int(rng.integers(1, 3))
        c = random_circuit(rng, m, int(rng.integers(1, 4)))
        ks = range(2, 26) if m == 1 else range(2, 14)
        vals = [sim_fock.simulate(c, k).total_error_bound for k in ks]
        assert all(b <= a for a, b in zip(vals, vals[1:])), vals
        certs = sim_fock.prefix_certificates(c)
        vals = [sim_fock.simulate(c, k, certs).total_error_bound for k in ks]
        assert all(b <= a for a, b in zip(vals, vals[1:])), vals


def test_simulation_deterministic():
    rng = np.random.default_rng(5)
    c = random_circuit(rng, 2, 3)
    a = sim_fock.simulate(c, 9)
    b = sim_fock.simulate(c, 9)
    assert a.state.amplitudes == b.state.amplitudes
    assert a.error_ledger == b.error_ledger and a.total_error_bound == b.total_error_bound


def test_total_is_clamped_sum():
    c = single_layer(GaussianUnitary(np.eye(1), [2.0], [0.8], np.eye(1)), RationalKerr(1, 2))
    res = sim_fock.simulate(c, 1)
    assert res.total_error_bound == min(1.0, math.fsum(res.error_ledger))


def test_generic_diagonal_matches_kerr():
    G = GaussianUnitary(np.eye(1), [0.6 + 0.2j], [0.1], np.eye(1))
    c1 = from_layers(1, [(None, G), (RationalKerr(1, 3), G)])
    c2 = from_layers(1, [(None, G), (GenericDiagonal(lambda n: math.pi * n[0] ** 2 / 3), G)])
    a = sim_fock.simulate(c1, 20)
    b = sim_fock.simulate(c2, 20)
    assert fock.trace_distance_pure(a.state, b.state) <= 1e-7
    assert max(abs(a.state.amplitude(n) - b.state.amplitude(n)) for n in a.state.amplitudes) <= 1e-12


def test_simulate_errors():
    c = single_layer(GaussianUnitary(np.eye(1), [40.0], [0], np.eye(1)))
    with pytest.raises(EmptyProjectionError):
        sim_fock.simulate(c, 0)
    with pytest.raises(InadmissibleParameterError):
        sim_fock.simulate(c, -1)
    with pytest.raises(ResourceLimitError):
        sim_fock.simulate(identity_circuit(4), 200, max_entries=10**6)
    # 401^2 dense entries fit, the 401^3 beamsplitter table does not
    with pytest.raises(ResourceLimitError, match="64481201"):
        sim_fock.simulate(identity_circuit(2), 400)
    assert sim_fock.simulate(identity_circuit(1), 400).cutoff == 400
    with pytest.raises(InadmissibleParameterError):
        sim_fock.simulate(identity_circuit(1, 2), 3, certificates=[])


# --------------------------------------------------------------- heterodyne


def test_heterodyne_vacuum_examples():
    v = fock.vacuum(1)
    assert abs(sim_fock.heterodyne_probability(v, [0]) - 1 / math.pi) <= 1e-15
    assert abs(1 / math.pi - 0.31831) <= 1e-5
    p = sim_fock.heterodyne_probability(v, [np.exp(0.3j)])
    assert abs(p - math.exp(-1) / math.pi) <= 1e-15 and abs(p - 0.11709) <= 1e-5


def test_heterodyne_rejects_bad_k():
    with pytest.raises(InadmissibleParameterError):
        sim_fock.heterodyne_probability(fock.vacuum(1), [0, 0])
    with pytest.raises(InadmissibleParameterError):
        sim_fock.heterodyne_probability(fock.vacuum(1), [])


def _grid(R, n):
    x = np.linspace(-R, R, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return (X + 1j * Y).ravel(), (x[1] - x[0]) ** 2


def test_heterodyne_povm_completeness():
    c = single_layer(GaussianUnitary(np.eye(1), [0.7 - 0.3j], [0.25], np.eye(1)), RationalKerr(1, 3))
    state = sim_fock.simulate(c, 40).state
    pts, dA = _grid(8.0, 161)
    dens = sim_fock.heterodyne_density(state, pts[:, None])
    assert np.all(dens >= 0)
    assert abs(np.sum(dens) * dA - 1) <= 1e-6


def test_marginal_consistency():
    rng = np.random.default_rng(12)
    c = random_circuit(rng, 2, 2, kinds=("cross",))
    state = sim_fock.simulate(c, 16).state
    pts, dA = _grid(8.0, 121)
    for a in (0.3 + 0.1j, -0.8j):
        joint = sim_fock.heterodyne_density(state, np.stack([np.full(len(pts), a), pts], axis=1))
        marg = sim_fock.heterodyne_probability(state, [a])
        assert abs(np.sum(joint) * dA - marg) <= 1e-6


def test_heterodyne_matches_explicit_coherent_kets():
    rng = np.random.default_rng(40)
    c = random_circuit(rng, 2, 2)
    state = sim_fock.simulate(c, 12).state
    psi = state.to_dense()
    for _ in range(5):
        al = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert abs(sim_fock.heterodyne_probability(state, al) - heterodyne_from_dense(psi, al)) <= 1e-14
        assert abs(sim_fock.heterodyne_probability(state, al[:1]) - heterodyne_from_dense(psi, al[:1])) <= 1e-14

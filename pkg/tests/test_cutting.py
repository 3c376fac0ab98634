import math

import numpy as np
import pytest

from expenergy import cutting, kerr, sim_fock, sim_superpos
from expenergy.circuit import from_layers, single_layer
from expenergy.errors import IncompatibleBackendError, InadmissibleParameterError
from expenergy.gaussian import GaussianUnitary
from expenergy.kerr import IrrationalKerr, RationalKerr

from helpers import random_circuit, random_gaussian


def small_circuit():
    G = GaussianUnitary(np.eye(1), [0.5 - 0.3j], [0.2], np.eye(1))
    return single_layer(G, RationalKerr(1, 2))


def test_hoeffding_example():
    # pair norm^2 = q^(2L) = 64 with q = 2, L = 3
    n = cutting.hoeffding_count(8, 0.1, 0.05)
    assert n == math.ceil(2 * 64 / 0.01 * math.log(40))
    assert n == 47218


def test_hoeffding_scaling():
    for g, eps, d in [(1, 0.1, 0.05), (3.7, 0.02, 1e-3), (16, 0.3, 0.2)]:
        raw = 2 * g**2 / eps**2 * math.log(2 / d)
        assert cutting.hoeffding_count(g, eps / 2, d) == math.ceil(4 * raw)
        assert abs(cutting.hoeffding_count(g, eps / 2, d) - 4 * cutting.hoeffding_count(g, eps, d)) <= 3


def test_hoeffding_log_factor_two():
    assert cutting.hoeffding_count(1, 0.5, 2 / math.e**2) == 16


def test_hoeffding_rejects_bad_inputs():
    for args in [(0.5, 0.1, 0.1), (1, 0, 0.1), (1, 0.1, 1), (1, 1.2, 0.1)]:
        with pytest.raises(InadmissibleParameterError):
            cutting.hoeffding_count(*args)


def test_plan_norm_and_count():
    c = from_layers(2, [(RationalKerr(1, 2), random_gaussian(2, np.random.default_rng(0))),
                        (RationalKerr(1, 3, "cross", (0, 1)), random_gaussian(2, np.random.default_rng(1)))])
    plan = cutting.make_plan(c, 0.2, 0.1, seed=5)
    single = kerr.one_norm(kerr.decompose_kerr(1, 2)) * kerr.one_norm(kerr.decompose_kerr(1, 3, "cross"))
    assert plan.one_norm_total == pytest.approx(single**2, rel=1e-14)
    assert plan.N == cutting.hoeffding_count(plan.one_norm_total, 0.2, 0.1)
    with pytest.raises(InadmissibleParameterError):
        cutting.make_plan(c, 0.2, 0.1, N=plan.N - 1)
    assert cutting.make_plan(c, 0.2, 0.1, N=plan.N + 7).N == plan.N + 7


def test_single_branch_plan_is_exact():
    G = GaussianUnitary(np.eye(1), [0.7j], [0.3], np.eye(1))
    c = from_layers(1, [(RationalKerr(2, 1), G), (None, G)])
    plan = cutting.make_plan(c, 0.1, 0.1)
    assert plan.is_exact
    est, half = cutting.estimate(plan, [0.2 - 0.4j])
    ref = sim_superpos.probability(sim_superpos.simulate(c), [0.2 - 0.4j])
    assert half == 0.0 and abs(est - ref) <= 1e-14


@pytest.mark.parametrize("seed", range(6))
def test_exhaustive_mean_equals_exact(seed):
    rng = np.random.default_rng(seed)
    m = 1 + seed % 2
    for _ in range(50):
        c = random_circuit(rng, m, int(rng.integers(1, 4)), q_max=4)
        sizes = [1 if l.non_gaussian is None else l.non_gaussian.q ** (1 if l.non_gaussian.kind == "self" else 2)
                 for l in c.layers]
        if math.prod(sizes) <= 64:
            break
    plan = cutting.make_plan(c, 0.5, 0.5)
    al = rng.normal(size=m) + 1j * rng.normal(size=m)
    mean = cutting.exhaustive_expectation(plan, al)
    exact = sim_superpos.probability(sim_superpos.simulate(c), al)
    assert abs(mean.real - exact) <= 1e-12 and abs(mean.imag) <= 1e-12


def test_coverage_over_seeds():
    c = small_circuit()
    exact = sim_superpos.probability(sim_superpos.simulate(c), [0])
    hits = 0
    for seed in range(200):
        plan = cutting.make_plan(c, 0.1, 0.05, seed=seed)
        est, half = cutting.estimate(plan, [0])
        hits += abs(est - exact) <= plan.eps
    assert plan.N == 2952
    # 190 of 200 is the 1 - delta level
    assert hits >= 190


def test_half_width_formula():
    plan = cutting.make_plan(small_circuit(), 0.1, 0.05, seed=1)
    _, half = cutting.estimate(plan, [0.3])
    g = plan.one_norm_total
    assert half == pytest.approx(g / math.pi * math.sqrt(2 * math.log(40) / plan.N), rel=1e-14)
    assert half <= plan.eps


def test_deterministic_across_runs_and_workers():
    rng = np.random.default_rng(3)
    c = from_layers(2, [(RationalKerr(1, 3), random_gaussian(2, rng)), (RationalKerr(1, 2, "cross", (1, 0)), random_gaussian(2, rng))])
    plan = cutting.make_plan(c, 0.5, 0.1, seed=2**64 - 5, N=3 * cutting.CHUNK + 17)
    al = [0.3 + 0.2j, -0.1j]
    a = cutting.estimate(plan, al, workers=1)
    b = cutting.estimate(plan, al, workers=1)
    d = cutting.estimate(plan, al, workers=3)
    assert a == b == d
    other = cutting.estimate(cutting.make_plan(c, 0.5, 0.1, seed=7, N=plan.N), al, workers=1)
    assert other != a


def test_sampled_values_are_bounded():
    rng = np.random.default_rng(4)
    c = random_circuit(rng, 2, 3, q_max=3)
    plan = cutting.make_plan(c, 0.5, 0.5, seed=9)
    ev = cutting._Evaluator(plan, [0.4, -0.2 + 0.5j])
    J, Jp = cutting._chunk_pairs(ev, plan.seed, 0, 2000)
    vals = ev.values(J, Jp)
    assert np.max(np.abs(vals)) <= plan.one_norm_total / math.pi**2 * (1 + 1e-12)


def test_estimate_agrees_with_fock_backend():
    c = small_circuit()
    plan = cutting.make_plan(c, 0.02, 0.01, seed=11)
    est, half = cutting.estimate(plan, [0.4])
    ref = sim_fock.heterodyne_probability(sim_fock.simulate(c, 50).state, [0.4])
    assert abs(est - ref) <= half


def test_cutting_errors():
    with pytest.raises(IncompatibleBackendError):
        cutting.make_plan(single_layer(GaussianUnitary.identity(1), IrrationalKerr(0.3)), 0.1, 0.1)
    plan = cutting.make_plan(small_circuit(), 0.1, 0.1)
    with pytest.raises(InadmissibleParameterError):
        cutting.estimate(plan, [0.1, 0.2])
    with pytest.raises(InadmissibleParameterError):
        cutting.CutPlan(plan.circuit, 1.0, 0.1, 0.1, 10, seed=-1)

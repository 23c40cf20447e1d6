"""Reference diffusion: simulation, occupation-time laws, CLT sampler."""

import numpy as np
import pytest

import cocyclelab as cl
from cocyclelab import Complement, HalfSpace

HALF_LINE = HalfSpace([1.0])


def test_simulate_moments():
    ends = np.array([cl.simulate(1, 2.0, 1e-2, (9, i)).values[-1, 0]
                     for i in range(10_000)])
    assert 0.95 <= ends.var() / 2.0 <= 1.05
    assert abs(ends.mean()) <= 3.0 * np.sqrt(2.0 / 10_000)


def test_simulate_is_deterministic():
    a = cl.simulate(2, 1.0, 1e-2, 42)
    b = cl.simulate(2, 1.0, 1e-2, 42)
    c = cl.simulate(2, 1.0, 1e-2, 43)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.steps == 100 and a.values.shape == (101, 2)


def test_step_size_guard():
    with pytest.raises(cl.ConfigInvalid):
        cl.simulate(1, 1.0, 0.02, 0)   # h > t/100
    with pytest.raises(cl.ConfigInvalid):
        cl.simulate(1, 1.0, -1e-3, 0)


def test_tau_of_hand_path():
    path = cl.BrownianPath(1, 2.0, 1.0, None, np.array([[0.0], [1.0], [-1.0]]))
    assert cl.tau_brownian(path, HALF_LINE) == pytest.approx(0.75, abs=1e-12)


def test_full_space_occupation_is_total():
    taus = cl.tau_samples(cl.parse_cone("full:1"), 1.0, 1e-2, 50, seed=1)
    assert np.all(taus == 1.0)


def test_mean_occupation_of_half_line():
    taus = cl.tau_samples(HALF_LINE, 1.0, 1e-3, 10_000, seed=4)
    assert abs(taus.mean() - 0.5) <= 0.01
    assert np.all((taus >= 0.0) & (taus <= 1.0))


def test_half_line_occupation_follows_arcsine_law():
    taus = cl.tau_samples(HALF_LINE, 1.0, 1e-3, 2000, seed=1)
    assert cl.arcsine_ks(taus) <= 0.04


def test_arcsine_cdf_shape():
    grid = np.linspace(0.0, 1.0, 11)
    vals = cl.arcsine_cdf(grid)
    assert vals[0] == 0.0 and vals[-1] == 1.0
    assert cl.arcsine_cdf(0.5) == pytest.approx(0.5)
    assert np.all(np.diff(vals) > 0.0)


def test_occupation_scale_invariance():
    ks = cl.scale_invariance_check(HALF_LINE, 1.0, 4.0, 2000, seed=5)
    assert ks <= 0.06


def test_tail_positivity():
    p_hat, (lo, hi) = cl.positivity_check(HALF_LINE, 0.1, 20_000, seed=2)
    assert abs(p_hat - 0.205) <= 0.01
    assert lo <= p_hat <= hi and lo > 0.0
    p_half, _ = cl.positivity_check(HALF_LINE, 0.5, 20_000, seed=2)
    assert abs(p_half - 0.5) <= 0.02


def test_positivity_alpha_guard():
    with pytest.raises(cl.ConfigInvalid):
        cl.positivity_check(HALF_LINE, 0.0, 100)
    with pytest.raises(cl.ConfigInvalid):
        cl.positivity_check(HALF_LINE, 1.0, 100)


def test_clt_reference_covariance():
    sample = cl.clt_reference(2, np.eye(2), seed=0)
    Z = sample(10_000)
    cov = Z.T @ Z / 10_000
    assert np.max(np.abs(cov - np.eye(2))) <= 0.05
    skew = cl.clt_reference(2, [[2.0, 0.5], [0.5, 1.0]], seed=0)(50_000)
    cov2 = skew.T @ skew / 50_000
    assert np.max(np.abs(cov2 - [[2.0, 0.5], [0.5, 1.0]])) <= 0.1


def test_clt_reference_rejects_bad_covariance():
    with pytest.raises(cl.NotPositiveDefinite):
        cl.clt_reference(2, [[1.0, 2.0], [2.0, 1.0]])   # indefinite
    with pytest.raises(cl.NotPositiveDefinite):
        cl.clt_reference(2, [[1.0, 0.3], [0.0, 1.0]])   # not symmetric
    with pytest.raises(cl.NotPositiveDefinite):
        cl.clt_reference(2, np.eye(3))                  # wrong shape


def test_refining_the_grid_barely_moves_tau():
    drift = cl.discretization_check(HalfSpace([0.0, 1.0]), 1e-3, 10_000, seed=3)
    assert drift <= 0.005


def test_fast_and_generic_samplers_agree():
    # a doubled complement routes the half space through the generic path
    # with the same increment stream
    fast = cl.tau_samples(HALF_LINE, 1.0, 1e-2, 500, seed=6)
    generic = cl.tau_samples(Complement(Complement(HALF_LINE)), 1.0, 1e-2, 500, seed=6)
    assert np.max(np.abs(fast - generic)) <= 1e-12

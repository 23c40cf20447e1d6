"""Brownian-motion reference: paths, cone occupation, analytic oracles.

These samplers are the independent yardstick for the walk statistics:
occupation fractions of cones under Brownian motion obey the Levy
arcsine law (half-spaces, via 1-D projection), are scale invariant in
the horizon, and are strictly positive near 1. Occupation is computed
with the same exact segment-crossing kernels used for walk paths.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .cones import Cone, HalfSpace
from .errors import ConfigInvalid, NotPositiveDefinite

_TAG = 179          # seed-space namespace for Brownian streams


def _rng(seed):
    key = (_TAG,) + (tuple(seed) if isinstance(seed, (tuple, list)) else (seed,))
    return np.random.default_rng(key)


@dataclass
class BrownianPath:
    d: int
    t: float
    h: float
    seed: object
    values: np.ndarray          # (steps+1, d), starts at the origin

    @property
    def steps(self) -> int:
        return len(self.values) - 1


def simulate(d: int, t: float, h: float, seed) -> BrownianPath:
    """Euler path with exact N(0, h I) increments; deterministic per seed."""
    if h <= 0 or t <= 0 or h > t / 100.0:
        raise ConfigInvalid("h", "need 0 < h <= t/100")
    steps = int(round(t / h))
    inc = _rng(seed).standard_normal((steps, d)) * np.sqrt(h)
    values = np.zeros((steps + 1, d))
    np.cumsum(inc, axis=0, out=values[1:])
    return BrownianPath(d, t, h, seed, values)


def tau_brownian(path: BrownianPath, cone: Cone) -> float:
    """Occupation fraction tau_C(t)/t of the piecewise-linear path."""
    V = path.values
    return float(cone.segment_fraction(V[:-1], V[1:]).mean())


def tau_samples(cone: Cone, t: float, h: float, samples: int, seed: int = 0,
                batch: int = 10_000) -> np.ndarray:
    """Occupation fractions across independent paths.

    Half-spaces project the increments onto the normal (projection of a
    Brownian motion is a 1-D Brownian motion), so paths batch into one
    matrix; other cones simulate d-dimensional paths one by one.
    """
    steps = int(round(t / h))
    if isinstance(cone, HalfSpace):
        u = cone.normal / np.linalg.norm(cone.normal)
        out = np.empty(samples)
        done = 0
        bi = 0
        while done < samples:
            m = min(batch, samples - done)
            inc = _rng((seed, bi)).standard_normal((m, steps)) * np.sqrt(h)
            proj = np.cumsum(inc, axis=1)
            a0 = np.concatenate([np.zeros((m, 1)), proj[:, :-1]], axis=1)
            a1 = proj
            pos0 = a0 > 0.0
            pos1 = a1 > 0.0
            den = a0 - a1
            t0 = a0 / np.where(den == 0.0, 1.0, den)
            fr = np.where(pos0 & pos1, 1.0,
                          np.where(~pos0 & ~pos1, 0.0,
                                   np.where(pos0, t0, 1.0 - t0)))
            out[done:done + m] = fr.mean(axis=1)
            done += m
            bi += 1
        return out
    d = cone.d
    # cap segments per kernel call: crossing kernels expand ~10x per segment
    batch = max(1, min(batch, 2_000_000 // steps))
    out = np.empty(samples)
    done = 0
    bi = 0
    while done < samples:
        m = min(batch, samples - done)
        inc = _rng((seed, bi)).standard_normal((m, steps, d)) * np.sqrt(h)
        paths = np.concatenate([np.zeros((m, 1, d)), np.cumsum(inc, axis=1)], axis=1)
        fr = cone.segment_fraction(paths[:, :-1].reshape(-1, d),
                                   paths[:, 1:].reshape(-1, d))
        out[done:done + m] = fr.reshape(m, steps).mean(axis=1)
        done += m
        bi += 1
    return out


def arcsine_cdf(u) -> np.ndarray:
    """Levy arcsine law (2/pi) arcsin sqrt(u) on [0, 1]."""
    return (2.0 / np.pi) * np.arcsin(np.sqrt(np.clip(u, 0.0, 1.0)))


def arcsine_ks(samples: np.ndarray) -> float:
    """KS distance of occupation samples to the arcsine law."""
    return float(stats.kstest(samples, arcsine_cdf).statistic)


def scale_invariance_check(cone: Cone, t1: float, t2: float, samples: int,
                           h: float = 1e-3, seed: int = 0) -> float:
    """Two-sample KS between normalized occupations at two horizons.

    The step count is held fixed across horizons (h scales with t), so
    the comparison isolates scale invariance from discretization bias;
    |KS| at the MC noise floor confirms the property.
    """
    if t1 == t2:
        raise ConfigInvalid("t", "horizons must differ")
    a = tau_samples(cone, t1, h, samples, seed=(seed * 2 + 1))
    b = tau_samples(cone, t2, h * (t2 / t1), samples, seed=(seed * 2 + 2))
    return float(stats.ks_2samp(a, b).statistic)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ConfigInvalid("samples", "need n > 0")
    p = successes / n
    z2 = z * z
    center = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    return center - half, center + half


def positivity_check(cone: Cone, alpha: float, samples: int, seed: int = 0,
                     t: float = 1.0, h: float = 1e-3):
    """Empirical P(tau > 1 - alpha) with a Wilson confidence interval.

    Returns (p_hat, (lo, hi)).
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigInvalid("alpha", "need 0 < alpha < 1")
    taus = tau_samples(cone, t, h, samples, seed=seed)
    k = int((taus > 1.0 - alpha).sum())
    return k / samples, wilson_interval(k, samples)


def clt_reference(d: int, gamma, seed: int = 0):
    """Sampler of centered Gaussians with covariance gamma.

    Raises NotPositiveDefinite unless gamma is symmetric positive
    definite. The returned callable maps a count to an (n, d) array.
    """
    G = np.asarray(gamma, dtype=np.float64)
    if G.shape != (d, d) or not np.allclose(G, G.T, atol=1e-12):
        raise NotPositiveDefinite("covariance must be a symmetric (d, d) matrix")
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("covariance is not positive definite") from None
    rng = _rng((seed, 7))

    def sample(n: int) -> np.ndarray:
        return rng.standard_normal((n, d)) @ L.T

    return sample


def discretization_check(cone: Cone, h: float, samples: int, seed: int = 0,
                         t: float = 1.0) -> float:
    """|mean tau at step h - mean tau at step h/2| on coupled paths.

    The coarse path is the fine path at every second vertex, so the
    difference isolates the discretization bias.
    """
    fine_mean = 0.0
    coarse_mean = 0.0
    for i in range(samples):
        path = simulate(cone.d, t, h / 2.0, (seed, i))
        coarse = BrownianPath(cone.d, t, h, (seed, i), path.values[::2].copy())
        fine_mean += tau_brownian(path, cone)
        coarse_mean += tau_brownian(coarse, cone)
    return abs(fine_mean - coarse_mean) / samples

"""Shared test utilities: independent oracles and stub samplers."""

import numpy as np

from survmatch.estimators import km


def brute_force_product_limit(t, y):
    """Independent KM oracle: direct per-time counting, no shared code with
    the estimator under test."""
    t = list(map(float, t))
    y = list(map(int, y))
    times = sorted(set(t))
    values = []
    prod = 1.0
    for ti in times:
        at_risk = sum(1 for tj in t if tj >= ti)
        events = sum(1 for tj, yj in zip(t, y) if tj == ti and yj == 1)
        prod *= 1.0 - events / at_risk
        values.append(prod)
    return np.array(times), np.array(values)


def random_survival_data(rng, n, tie_fraction=0.5, event_rate=0.6):
    """Random censored sample with deliberate ties (times rounded)."""
    t = rng.exponential(2.0, n)
    ties = rng.random(n) < tie_fraction
    t[ties] = np.round(t[ties], 1)
    y = (rng.random(n) < event_rate).astype(float)
    return t, y


class MarginalKmSampler:
    """Covariate-blind sampler: inverse-CDF draws from the KM marginal.

    The event-masked numerator of the distribution-based recursion makes a
    sampler with identical rows F telescope to ``(1 - F)^p`` (p = event
    fraction), so population calibration under that estimator requires
    drawing from the sharpened marginal ``1 - S_km^(1/p)`` rather than from
    ``1 - S_km`` itself. Mass beyond the last observed time collapses onto
    it, mirroring the KM curve's undefined tail.
    """

    def __init__(self, t, y, sharpened=True):
        curve = km(t, y)
        self.grid = curve.grid
        power = 1.0 / np.mean(y) if sharpened else 1.0
        self.cdf = 1.0 - curve.s**power

    def sample(self, X, s_count, mode="infer", rng=None):
        rng = rng or np.random.default_rng(0)
        u = rng.random((np.asarray(X).shape[0], s_count))
        idx = np.minimum(np.searchsorted(self.cdf, u), self.grid.size - 1)
        return self.grid[idx]


class ScaledSampler:
    """Wraps a sampler, scaling every drawn time by a constant factor."""

    def __init__(self, inner, factor):
        self.inner = inner
        self.factor = factor

    def sample(self, X, s_count, mode="infer", rng=None):
        return self.factor * self.inner.sample(X, s_count, mode=mode, rng=rng)


class FixedSampler:
    """Emits one fixed time vector, repeated for every draw."""

    def __init__(self, times, jitter=0.0):
        self.times = np.asarray(times, dtype=np.float64)
        self.jitter = jitter

    def sample(self, X, s_count, mode="infer", rng=None):
        rng = rng or np.random.default_rng(0)
        base = np.repeat(self.times[:, None], s_count, axis=1)
        if self.jitter:
            base = base + rng.normal(0.0, self.jitter, base.shape)
        return base

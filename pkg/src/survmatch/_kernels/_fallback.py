"""Numpy implementations of the survival-curve kernels.

These are the reference semantics; the compiled backend in ``_speedups.pyx``
must agree with them (see tests/test_kernels.py). All kernels share one
interval bookkeeping: the probability mass a subject contributes to grid
point ``t_i`` is the mass in ``(t_{i-1}, t_i]`` with ``t_0 = -inf``, and the
risk denominator at ``t_i`` is the mass strictly beyond ``t_{i-1}``. Feeding
observed times through the point-estimate kernel then reproduces the classic
product-limit estimator exactly.
"""

import numpy as np

BACKEND = "numpy"

# Risk denominators at or below this are treated as exhausted: the factor is
# frozen at 1 and (for the smooth kernel) contributes no gradient.
DEN_GUARD = 1e-12


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def pkm_sums(t_hat, y, grid):
    """Interval event mass and risk denominators for point predictions.

    Returns ``(num, den)`` with ``num[i] = #{events with t_hat in
    (grid[i-1], grid[i]]}`` and ``den[i] = #{all subjects with t_hat >
    grid[i-1]}`` (``grid[-1]`` read as -inf). Counts are exact small
    integers stored as float64.
    """
    beyond = (t_hat[:, None] > grid[None, :]).astype(np.float64)
    prev = np.concatenate([np.ones((t_hat.shape[0], 1)), beyond[:, :-1]], axis=1)
    ev = y.astype(np.float64)
    num = ev @ (prev - beyond)
    den = prev.sum(axis=0)
    return num, den


def dkm_sums(cdf, y, grid):
    """Interval event mass and risk denominators from per-subject CDF rows.

    ``cdf[n, i]`` is subject ``n``'s CDF at ``grid[i]``; the CDF at the
    virtual point before ``grid[0]`` is 0.
    """
    n = cdf.shape[0]
    prev = np.concatenate([np.zeros((n, 1)), cdf[:, :-1]], axis=1)
    ev = y.astype(np.float64)
    num = ev @ (cdf - prev)
    den = float(n) - prev.sum(axis=0)
    return num, den


def product_limit(num, den):
    """Assemble the survival values from interval sums.

    ``s[i] = prod_{j<=i} (1 - num[j]/den[j])`` with exhausted denominators
    (``den <= DEN_GUARD``) contributing a frozen factor of 1.
    """
    factors = np.ones_like(num)
    live = den > DEN_GUARD
    factors[live] = 1.0 - num[live] / den[live]
    return np.cumprod(factors)


def smooth_pkm_forward(t_hat, y, grid, tau):
    """Smooth product-limit curve with logistic step surrogates.

    The hard interval indicators of ``pkm_sums`` are replaced by
    ``sigmoid((t_hat - t)/tau)``, making the curve differentiable in
    ``t_hat``. Returns ``(s, cache)`` where ``cache`` feeds the backward
    pass.
    """
    n = t_hat.shape[0]
    p = _sigmoid((t_hat[:, None] - grid[None, :]) / tau)
    prev = np.concatenate([np.ones((n, 1)), p[:, :-1]], axis=1)
    ev = y.astype(np.float64)
    num = ev @ (prev - p)
    den = prev.sum(axis=0)
    live = den > DEN_GUARD
    factors = np.ones_like(num)
    factors[live] = 1.0 - num[live] / den[live]
    s = np.cumprod(factors)
    cache = (p, ev, num, den, live, factors, s, tau)
    return s, cache


def smooth_pkm_vjp(cache, g):
    """Backward pass of :func:`smooth_pkm_forward`.

    Given ``g[i] = d(loss)/d(s[i])``, returns ``d(loss)/d(t_hat)``.
    """
    p, ev, num, den, live, factors, s, tau = cache
    m = s.shape[0]
    # c[i] = total sensitivity of the loss to s[i], accumulated right-to-left
    # through s[i+1] = factors[i+1] * s[i].
    c = np.empty(m)
    c[m - 1] = g[m - 1]
    for i in range(m - 2, -1, -1):
        c[i] = g[i] + c[i + 1] * factors[i + 1]
    s_prev = np.concatenate([[1.0], s[:-1]])
    u = np.zeros(m)  # d(loss)/d(num)
    v = np.zeros(m)  # d(loss)/d(den)
    u[live] = -c[live] * s_prev[live] / den[live]
    v[live] = c[live] * s_prev[live] * num[live] / den[live] ** 2
    # p[:, i] enters num[i] with -1 (events), num[i+1] with +1 (events) and
    # den[i+1] with +1 (everyone).
    u_next = np.concatenate([u[1:], [0.0]])
    v_next = np.concatenate([v[1:], [0.0]])
    dp = ev[:, None] * (u_next - u)[None, :] + v_next[None, :]
    return (dp * p * (1.0 - p) / tau).sum(axis=1)

"""Kaplan-Meier family: empirical KM with confidence bands, the
point-estimate variant (PKM), the distribution-based variant (DKM), and a
smooth, differentiable PKM for training.

All four share one convention: curves start at 1 before the first grid
point, event mass at grid point ``t_i`` is the mass in ``(t_{i-1}, t_i]``,
and the risk set at ``t_i`` is everything beyond ``t_{i-1}``. Under that
bookkeeping PKM fed the observed times reproduces KM estimate exactly.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import _kernels as kernels
from .errors import DataError, ShapeError
from .tensor import Node, _stable_sigmoid


@dataclass
class SurvivalCurve:
    """Survival values on a strictly increasing grid of distinct times.

    ``at_risk``/``events`` are populated by :func:`km` only; ``lower``/
    ``upper`` by :func:`greenwood_bands`; ``node`` by :func:`smooth_pkm`
    (the autodiff handle for the values).
    """

    grid: np.ndarray
    s: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None
    at_risk: np.ndarray = None
    events: np.ndarray = None
    node: Node = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.s = np.asarray(self.s, dtype=np.float64)
        if self.grid.ndim != 1 or self.grid.shape != self.s.shape:
            raise ShapeError(
                f"curve grid/values mismatch: {self.grid.shape} vs {self.s.shape}"
            )
        if self.grid.size and np.any(np.diff(self.grid) <= 0):
            raise DataError("curve grid must be strictly increasing")


def _check_times_indicators(t, y):
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y)
    if t.size == 0:
        raise DataError("no observations")
    if t.shape != y.shape or t.ndim != 1:
        raise ShapeError(f"times/indicators mismatch: {t.shape} vs {y.shape}")
    if np.any(t < 0):
        raise DataError("negative time")
    if not np.isin(y, (0, 1)).all():
        raise DataError("censoring indicators must be 0 or 1")
    return t, y.astype(np.float64)


def _check_grid(grid):
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise DataError("empty grid")
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise DataError("grid must be 1-d and strictly increasing")
    return grid


def km(t, y):
    """Product-limit estimator on the distinct observed times.

    Ties between events and censorings at the same time resolve with events
    first: both remain in the risk set at that time.
    """
    t, y = _check_times_indicators(t, y)
    order = np.argsort(t, kind="stable")
    ts, ys = t[order], y[order]
    grid, first_idx = np.unique(ts, return_index=True)
    events = np.add.reduceat(ys, first_idx)
    at_risk = (t.size - first_idx).astype(np.float64)
    s = kernels.product_limit(events, at_risk)
    return SurvivalCurve(grid, s, at_risk=at_risk, events=events)


def greenwood_bands(curve, alpha=0.05):
    """Exponential Greenwood confidence bands ``s ** exp(+-z * sqrt(v))``.

    ``v`` is the cumulative Greenwood sum over ``d / (n (n - d))`` divided by
    ``log(s)^2``. Points where the estimate is 0 or 1 get degenerate bands
    equal to the estimate.
    """
    if curve.at_risk is None or curve.events is None:
        raise DataError("confidence bands need the at-risk/event counts from km")
    if not 0.0 < alpha < 1.0:
        raise DataError(f"alpha must be in (0, 1), got {alpha}")
    s, d, n = curve.s, curve.events, curve.at_risk
    z = ndtri(1.0 - alpha / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gw = np.cumsum(d / (n * (n - d)))
        v = gw / np.log(s) ** 2
        lower = s ** np.exp(z * np.sqrt(v))
        upper = s ** np.exp(-z * np.sqrt(v))
    degenerate = (s <= 0.0) | (s >= 1.0)
    lower[degenerate] = s[degenerate]
    upper[degenerate] = s[degenerate]
    return SurvivalCurve(
        curve.grid, s, lower=lower, upper=upper, at_risk=n, events=d
    )


def pkm(t_hat, y, grid):
    """Product-limit curve over point predictions.

    Predictions play the role of the observed times while the censoring
    indicators stay those of the subjects. Fed the observed times themselves
    this reproduces :func:`km` bitwise.
    """
    t_hat = np.asarray(t_hat, dtype=np.float64)
    grid = _check_grid(grid)
    y = np.asarray(y, dtype=np.float64)
    if t_hat.shape != y.shape or t_hat.ndim != 1:
        raise ShapeError(f"predictions/indicators mismatch: {t_hat.shape} vs {y.shape}")
    num, den = kernels.pkm_sums(t_hat, y, grid)
    return SurvivalCurve(grid, kernels.product_limit(num, den))


def dkm(cdf, y, grid):
    """Distribution-based product-limit curve from per-subject CDF rows.

    ``cdf[n, i]`` is subject ``n``'s predictive CDF at ``grid[i]`` (the CDF
    before the grid is 0). Averages the PKM recursion over the predictive
    distributions instead of evaluating it on summaries.
    """
    cdf = np.asarray(cdf, dtype=np.float64)
    grid = _check_grid(grid)
    y = np.asarray(y, dtype=np.float64)
    if cdf.ndim != 2 or cdf.shape != (y.size, grid.size):
        raise ShapeError(
            f"cdf matrix {cdf.shape} does not match {y.size} subjects x {grid.size} grid points"
        )
    if np.any(cdf < -1e-12) or np.any(cdf > 1.0 + 1e-12):
        raise DataError("cdf values outside [0, 1]")
    if np.any(np.diff(cdf, axis=1) < -1e-12):
        raise DataError("non-monotone cdf row")
    num, den = kernels.dkm_sums(cdf, y, grid)
    return SurvivalCurve(grid, np.clip(kernels.product_limit(num, den), 0.0, 1.0))


def smooth_step(b, tau):
    """Logistic surrogate ``sigmoid(b / tau)`` for the hard step ``1{b > 0}``.

    Matches the half-convention of the exact step at the jump:
    ``smooth_step(0, tau) == 0.5`` for every ``tau``.
    """
    if tau <= 0.0:
        raise DataError(f"tau must be positive, got {tau}")
    return _stable_sigmoid(np.asarray(b, dtype=np.float64) / tau)


def smooth_pkm(t_hat, y, grid, tau):
    """Differentiable PKM: hard interval indicators replaced by logistic
    steps of temperature ``tau``.

    ``t_hat`` is an autodiff Node; the returned curve carries a ``node``
    whose backward pass routes gradients into ``t_hat``. As ``tau -> 0`` the
    curve converges to :func:`pkm` away from grid-coincident predictions.
    """
    if tau <= 0.0:
        raise DataError(f"tau must be positive, got {tau}")
    if not isinstance(t_hat, Node):
        raise ShapeError("smooth_pkm expects predictions as an autodiff Node")
    grid = _check_grid(grid)
    y = np.asarray(y, dtype=np.float64)
    flat = t_hat.value.reshape(-1)
    if flat.size != y.size:
        raise ShapeError(f"predictions/indicators mismatch: {flat.size} vs {y.size}")
    values, cache = kernels.smooth_pkm_forward(flat, y, grid, tau)
    out = Node(values, (t_hat,))

    def bwd():
        t_hat.grad += kernels.smooth_pkm_vjp(cache, out.grad).reshape(t_hat.value.shape)

    out._backward = bwd
    return SurvivalCurve(grid, values.copy(), node=out)


def empirical_cdf_rows(samples, grid):
    """Row-wise empirical CDFs of a samples matrix evaluated on ``grid``."""
    samples = np.sort(np.asarray(samples, dtype=np.float64), axis=1)
    grid = _check_grid(grid)
    n, s_count = samples.shape
    rows = np.empty((n, grid.size))
    for i in range(n):
        rows[i] = np.searchsorted(samples[i], grid, side="right")
    return rows / s_count


def step_cdf_rows(t_hat, grid):
    """Point-mass CDF rows: all of subject ``n``'s mass sits at ``t_hat[n]``."""
    t_hat = np.asarray(t_hat, dtype=np.float64)
    grid = _check_grid(grid)
    return (grid[None, :] >= t_hat[:, None]).astype(np.float64)

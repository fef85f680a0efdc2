"""Training objectives: the survival-curve matching loss, the censored /
uncensored accuracy loss, their weighted sum, and the log-normal baseline's
censored likelihood.

The matching loss compares the smooth model curve against the exact
observed-data curve on the minibatch's own grid of distinct times, so each
minibatch is pushed toward calibration on its own empirical distribution.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .estimators import pkm, smooth_pkm
from .model import ERF_COEFFS, ERF_P
from .tensor import Node, as_node

GRID_POLICIES = ("minibatch-distinct-times",)

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class LossConfig:
    """Trade-off weight, step temperature, and grid policy.

    ``tau=None`` resolves per minibatch to 1% of the largest observed time.
    """

    lam: float = 1.0
    tau: float = None
    grid_policy: str = "minibatch-distinct-times"

    def __post_init__(self):
        if self.lam <= 0:
            raise DataError(f"lambda must be positive, got {self.lam}")
        if self.tau is not None and self.tau <= 0:
            raise DataError(f"tau must be positive, got {self.tau}")
        if self.grid_policy not in GRID_POLICIES:
            raise DataError(f"unknown grid policy {self.grid_policy!r}")

    def resolve_tau(self, t):
        if self.tau is not None:
            return self.tau
        tau = 0.01 * float(np.max(t))
        if tau <= 0.0:
            raise DataError("cannot derive tau from all-zero times; set tau explicitly")
        return tau


def _check_batch(t_hat, t, y):
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if t.size == 0:
        raise DataError("empty minibatch")
    if t_hat.value.size != t.size:
        raise DataError(
            f"one prediction per subject required: {t_hat.value.size} vs {t.size}"
        )
    return t, y


def loss_cal(t_hat, t, y, cfg):
    """Mean absolute gap between the observed and model survival curves.

    Both curves run over the minibatch's distinct observed times. The
    observed side always uses exact indicators (no gradient flows through
    it). Predictions given as an autodiff Node go through the smooth curve,
    which is what training differentiates; a plain array goes through the
    exact recursion (the tau -> 0 limit, with full mass at grid-coincident
    predictions).
    """
    exact = not isinstance(t_hat, Node)
    if exact:
        t_hat = Node(np.asarray(t_hat, dtype=np.float64))
    t, y = _check_batch(t_hat, t, y)
    grid = np.unique(t)
    gt = pkm(t, y, grid)
    if exact:
        model_s = Node(pkm(t_hat.value.reshape(-1), y, grid).s)
    else:
        model_s = smooth_pkm(t_hat.reshape(-1), y, grid, cfg.resolve_tau(t)).node
    return (model_s - Node(gt.s)).abs().mean()


def loss_acc(t_hat, t, y):
    """Hinge penalty for early predictions on censored subjects plus mean
    absolute error on event subjects; an absent group contributes 0."""
    t_hat = as_node(t_hat)
    t, y = _check_batch(t_hat, t, y)
    pred = t_hat.reshape(-1)
    obs = Node(t)
    total = as_node(0.0)
    censored = (y == 0.0).astype(np.float64)
    if censored.any():
        hinge = (obs - pred).relu() * Node(censored)
        total = total + hinge.sum() * (1.0 / censored.sum())
    events = 1.0 - censored
    if events.any():
        err = (obs - pred).abs() * Node(events)
        total = total + err.sum() * (1.0 / events.sum())
    return total


def loss_total(t_hat, t, y, cfg):
    """Calibration term plus ``lam`` times the accuracy term."""
    return loss_cal(t_hat, t, y, cfg) + cfg.lam * loss_acc(t_hat, t, y)


def _erf_tail(a):
    """Graph composite for ``1 - erf(a)``, a >= 0 (rational-tail form).

    Evaluating the tail directly keeps ``log`` of small survival values
    stable; no cancellation against 1.
    """
    u = 1.0 / (1.0 + ERF_P * a)
    c0, c1, c2, c3, c4 = ERF_COEFFS
    poly = u * (c0 + u * (c1 + u * (c2 + u * (c3 + u * c4))))
    return poly * (-(a * a)).exp()


def normal_sf(z):
    """Upper-tail standard normal probability as a graph composite.

    Built from the same erf approximation as :func:`survmatch.model.normal_cdf`
    so the trained likelihood and the evaluation CDFs agree.
    """
    a = (z * (1.0 / np.sqrt(2.0))).abs()
    tail = _erf_tail(a)
    nonneg = (z.value >= 0).astype(np.float64)
    return Node(nonneg) * (0.5 * tail) + Node(1.0 - nonneg) * (1.0 - 0.5 * tail)


def loss_lognormal_nll(mu, log_sigma, t, y):
    """Censored negative log-likelihood of log-normal event times.

    Events contribute ``-log f(t)``, censored subjects ``-log S(t)``;
    the result is the mean over all subjects.
    """
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(t <= 0):
        raise DataError("log-normal likelihood needs strictly positive times")
    mu = mu.reshape(-1)
    log_sigma = log_sigma.reshape(-1)
    log_t = np.log(t)
    z = (Node(log_t) - mu) * (-log_sigma).exp()
    log_f = -log_sigma - (0.5 * (z * z)) - Node(log_t + _HALF_LOG_2PI)
    # 1e-300 floor keeps log finite if a survival value underflows.
    log_s = (normal_sf(z) + 1e-300).log()
    nll = Node(y) * (-log_f) + Node(1.0 - y) * (-log_s)
    return nll.mean()

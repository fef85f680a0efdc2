"""Adam optimization with minibatching, early stopping on validation loss,
and fully seeded, reproducible runs."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ShapeError, TrainingDiverged
from .losses import loss_lognormal_nll, loss_total
from .tensor import backward


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and loop hyperparameters."""

    batch_size: int = 350
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.99
    epsilon: float = 1e-8
    max_epochs: int = 300
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 2:
            raise DataError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.patience < 1:
            raise DataError(f"patience must be >= 1, got {self.patience}")
        if self.max_epochs < 0:
            raise DataError("max_epochs must be nonnegative")


@dataclass
class AdamState:
    """Step count plus first/second moment accumulators, one per parameter."""

    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params, grads, state, cfg):
    """One Adam update with bias correction; parameters change in place."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError("params/grads/state length mismatch")
    state.step += 1
    t = state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m += (1.0 - cfg.beta1) * (g - m)
        v += (1.0 - cfg.beta2) * (g * g - v)
        m_hat = m / (1.0 - cfg.beta1**t)
        v_hat = v / (1.0 - cfg.beta2**t)
        p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return params, state


def _batch_loss(model, X, t, y, loss_cfg, train, eps=None):
    if model.kind == "sfm":
        t_hat = model.forward(X, train=train, eps=eps)
        return loss_total(t_hat, t, y, loss_cfg)
    mu, log_sigma = model.forward(X, train=train)
    return loss_lognormal_nll(mu, log_sigma, t, y)


def train(model, train_ds, valid_ds, loss_cfg, train_cfg):
    """Fit ``model`` by minibatch Adam; returns ``(model, history)``.

    Epochs iterate shuffled minibatches (the final short batch is kept).
    After each epoch the full validation loss is evaluated in inference
    mode with one noise draw per subject frozen for the whole run, so
    epochs are comparable; the parameters with the best validation loss are
    restored at the end. Stops early after ``patience`` epochs without
    improvement. Raises :class:`TrainingDiverged` on a non-finite loss.
    """
    if train_ds.width != valid_ds.width or train_ds.width != model.d:
        raise ShapeError("dataset widths do not match the model input")
    seq = np.random.SeedSequence(train_cfg.seed)
    shuffle_rng, valid_rng = (np.random.default_rng(s) for s in seq.spawn(2))
    valid_eps = None
    if model.kind == "sfm" and model.config.noise_dim > 0:
        valid_eps = model.draw_noise(valid_ds.n, valid_rng)

    params = model.parameters()
    nodes = list(params.values())
    state = AdamState()
    history = []
    best = (np.inf, None, None)  # (valid loss, param copies, bn stats copies)
    stale = 0

    def snapshot():
        values = [node.value.copy() for node in nodes]
        stats = [(m.copy(), v.copy()) for m, v in model.trunk.bn_stats().values()]
        return values, stats

    def restore(values, stats):
        for node, val in zip(nodes, values):
            node.value[...] = val
        for (m, v), (ms, vs) in zip(model.trunk.bn_stats().values(), stats):
            m[...] = ms
            v[...] = vs

    for epoch in range(train_cfg.max_epochs):
        order = shuffle_rng.permutation(train_ds.n)
        batch_losses = []
        for start in range(0, train_ds.n, train_cfg.batch_size):
            rows = order[start : start + train_cfg.batch_size]
            for node in nodes:
                node.grad[...] = 0.0
            loss = _batch_loss(
                model, train_ds.X[rows], train_ds.t[rows], train_ds.y[rows],
                loss_cfg, train=True,
            )
            value = float(loss.value)
            if not np.isfinite(value):
                raise TrainingDiverged(
                    f"non-finite training loss at epoch {epoch}, batch row {start}"
                )
            backward(loss)
            adam_step([n.value for n in nodes], [n.grad for n in nodes], state, train_cfg)
            batch_losses.append(value)

        valid_loss = float(
            _batch_loss(
                model, valid_ds.X, valid_ds.t, valid_ds.y, loss_cfg,
                train=False, eps=valid_eps,
            ).value
        )
        if not np.isfinite(valid_loss):
            raise TrainingDiverged(f"non-finite validation loss at epoch {epoch}")
        history.append((epoch, float(np.mean(batch_losses)), valid_loss))

        if valid_loss < best[0]:
            best = (valid_loss, *snapshot())
            stale = 0
        else:
            stale += 1
            if stale >= train_cfg.patience:
                break

    if best[1] is not None:
        restore(best[1], best[2])
    return model, history

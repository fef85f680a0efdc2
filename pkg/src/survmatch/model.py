"""Event-time generators: the noise-injected MLP (softplus output, so all
sampled times are positive) and a log-normal baseline sharing the same
trunk with location/scale heads.

The generator concatenates one fresh noise vector per subject to the input
and to every hidden activation, so a deterministic network induces an
implicit conditional distribution over event times.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError, ShapeError
from .tensor import Node, batchnorm, concat, dropout

NOISE_KINDS = ("uniform", "normal")

# Rational tail approximation for erf (max abs error 1.5e-7), also used as a
# graph composite in the losses module.
ERF_P = 0.3275911
ERF_COEFFS = (0.254829592, -0.284496736, 1.421413741, -1.453152027, 1.061405429)


@dataclass(frozen=True)
class SfmConfig:
    """Generator architecture knobs."""

    hidden_units: int = 50
    layers: int = 2
    dropout_p: float = 0.2
    noise_dim: int = 10
    noise_kind: str = "uniform"
    batchnorm: bool = True

    def __post_init__(self):
        if self.hidden_units < 1 or self.layers < 1:
            raise DataError("need at least one hidden unit and one layer")
        if not 0.0 <= self.dropout_p < 1.0:
            raise DataError(f"dropout must be in [0, 1), got {self.dropout_p}")
        if self.noise_dim < 0:
            raise DataError("noise_dim must be nonnegative")
        if self.noise_kind not in NOISE_KINDS:
            raise DataError(f"unknown noise kind {self.noise_kind!r}")


def _xavier(rng, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


class _BnState:
    """Per-layer batchnorm parameters plus running statistics."""

    def __init__(self, width):
        self.gamma = Node(np.ones((1, width)))
        self.beta = Node(np.zeros((1, width)))
        self.running_mean = np.zeros(width)
        self.running_var = np.ones(width)


class _Trunk:
    """Stack of Linear -> (BN) -> ReLU -> Dropout hidden layers."""

    def __init__(self, rng, in_width, config, extra_per_layer):
        self.config = config
        self.weights, self.biases, self.bn = [], [], []
        width = in_width
        for _ in range(config.layers):
            self.weights.append(Node(_xavier(rng, width, config.hidden_units)))
            self.biases.append(Node(np.zeros((1, config.hidden_units))))
            self.bn.append(_BnState(config.hidden_units) if config.batchnorm else None)
            width = config.hidden_units + extra_per_layer
        self.out_width = width

    def forward(self, h, train, rng, inject=None):
        for w, b, bn in zip(self.weights, self.biases, self.bn):
            z = h @ w + b
            if bn is not None:
                z = batchnorm(z, bn.gamma, bn.beta, bn.running_mean, bn.running_var, train)
            h = dropout(z.relu(), self.config.dropout_p, rng, train)
            if inject is not None:
                h = concat([h, inject], axis=1)
        return h

    def parameters(self):
        params = {}
        for i, (w, b, bn) in enumerate(zip(self.weights, self.biases, self.bn)):
            params[f"w{i}"] = w
            params[f"b{i}"] = b
            if bn is not None:
                params[f"bn_gamma{i}"] = bn.gamma
                params[f"bn_beta{i}"] = bn.beta
        return params

    def bn_stats(self):
        return {
            f"bn{i}": (bn.running_mean, bn.running_var)
            for i, bn in enumerate(self.bn)
            if bn is not None
        }


class SfmModel:
    """Noise-injected generator of positive event times."""

    kind = "sfm"

    def __init__(self, config, d, seed):
        if d < 1:
            raise DataError(f"need at least one input feature, got d={d}")
        self.config = config
        self.d = d
        self.seed = seed
        rng = np.random.default_rng(seed)
        q = config.noise_dim
        self.trunk = _Trunk(rng, d + q, config, extra_per_layer=q)
        self.w_out = Node(_xavier(rng, self.trunk.out_width, 1))
        self.b_out = Node(np.zeros((1, 1)))
        self.rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])

    def parameters(self):
        params = self.trunk.parameters()
        params["w_out"] = self.w_out
        params["b_out"] = self.b_out
        return params

    def draw_noise(self, n, rng=None):
        rng = rng or self.rng
        q = self.config.noise_dim
        if self.config.noise_kind == "uniform":
            return rng.uniform(-1.0, 1.0, size=(n, q))
        return rng.standard_normal((n, q))

    def forward(self, X, train, eps=None, rng=None):
        """One generator pass; returns the (n, 1) predicted-time node.

        ``eps=None`` draws fresh noise from the model RNG; passing ``eps``
        freezes the stochastic input (dropout still needs ``train=False``
        for a fully deterministic pass).
        """
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ShapeError(f"expected (n, {self.d}) covariates, got {X.shape}")
        rng = rng or self.rng
        if eps is None:
            eps = self.draw_noise(X.shape[0], rng)
        inject = Node(eps) if self.config.noise_dim > 0 else None
        h = concat([Node(X), inject], axis=1) if inject is not None else Node(X)
        h = self.trunk.forward(h, train, rng, inject)
        return (h @ self.w_out + self.b_out).softplus()

    def sample(self, X, s_count, mode="infer", rng=None):
        """(n, s_count) matrix of sampled event times, fresh noise per draw."""
        if s_count < 1:
            raise DataError("need at least one draw")
        train = _parse_mode(mode)
        rng = rng or self.rng
        X = np.asarray(X, dtype=np.float64)
        cols = [self.forward(X, train, rng=rng).value for _ in range(s_count)]
        return np.hstack(cols)


class LognormalModel:
    """Log-normal accelerated-failure baseline: the same MLP trunk with
    location and log-scale heads over log-time."""

    kind = "lognormal"

    def __init__(self, config, d, seed):
        if d < 1:
            raise DataError(f"need at least one input feature, got d={d}")
        self.config = config
        self.d = d
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.trunk = _Trunk(rng, d, config, extra_per_layer=0)
        self.w_mu = Node(_xavier(rng, self.trunk.out_width, 1))
        self.b_mu = Node(np.zeros((1, 1)))
        # Zero-initialized scale head: log_sigma starts at 0, i.e. sigma = 1.
        self.w_ls = Node(np.zeros((self.trunk.out_width, 1)))
        self.b_ls = Node(np.zeros((1, 1)))
        self.rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])

    def parameters(self):
        params = self.trunk.parameters()
        params.update(w_mu=self.w_mu, b_mu=self.b_mu, w_ls=self.w_ls, b_ls=self.b_ls)
        return params

    def forward(self, X, train, rng=None):
        """Per-subject (mu, log_sigma) nodes of the log-time distribution."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ShapeError(f"expected (n, {self.d}) covariates, got {X.shape}")
        rng = rng or self.rng
        h = self.trunk.forward(Node(X), train, rng)
        return h @ self.w_mu + self.b_mu, h @ self.w_ls + self.b_ls

    def sample(self, X, s_count, mode="infer", rng=None):
        if s_count < 1:
            raise DataError("need at least one draw")
        train = _parse_mode(mode)
        rng = rng or self.rng
        mu, log_sigma = self.forward(X, train, rng=rng)
        mu, sigma = mu.value, np.exp(log_sigma.value)
        z = rng.standard_normal((mu.shape[0], s_count))
        return np.exp(mu + sigma * z)

    def cdf(self, t, mu, sigma):
        """Log-normal CDF at times ``t`` (plain arrays; for evaluation)."""
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros(np.broadcast(t, mu).shape)
        pos = np.broadcast_to(t, out.shape) > 0
        z = (np.log(np.where(pos, t, 1.0)) - mu) / sigma
        out[pos] = normal_cdf(z)[pos]
        return out


def _parse_mode(mode):
    if mode not in ("train", "infer"):
        raise DataError(f"mode must be 'train' or 'infer', got {mode!r}")
    return mode == "train"


def erf_approx(x):
    """Rational-tail erf approximation, accurate to 1.5e-7 in abs value."""
    x = np.asarray(x, dtype=np.float64)
    a = np.abs(x)
    u = 1.0 / (1.0 + ERF_P * a)
    poly = u * (ERF_COEFFS[0] + u * (ERF_COEFFS[1] + u * (ERF_COEFFS[2] + u * (
        ERF_COEFFS[3] + u * ERF_COEFFS[4]))))
    return np.sign(x) * (1.0 - poly * np.exp(-a * a))


def normal_cdf(z):
    """Standard normal CDF via :func:`erf_approx`."""
    return 0.5 * (1.0 + erf_approx(np.asarray(z, dtype=np.float64) / np.sqrt(2.0)))


def save_checkpoint(model, path):
    """Write a self-describing JSON checkpoint (params, BN stats, config)."""
    params = {name: node.value.tolist() for name, node in model.parameters().items()}
    stats = {
        name: {"mean": mean.tolist(), "var": var.tolist()}
        for name, (mean, var) in model.trunk.bn_stats().items()
    }
    payload = {
        "format": "survmatch-checkpoint-v1",
        "kind": model.kind,
        "config": asdict(model.config),
        "d": model.d,
        "seed": model.seed,
        "params": params,
        "bn_stats": stats,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def load_checkpoint(path):
    """Rebuild a model from :func:`save_checkpoint` output; inference under
    frozen noise reproduces the saved model exactly."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "survmatch-checkpoint-v1":
        raise DataError(f"{path}: not a survmatch checkpoint")
    config = SfmConfig(**payload["config"])
    cls = {"sfm": SfmModel, "lognormal": LognormalModel}[payload["kind"]]
    model = cls(config, payload["d"], payload["seed"])
    for name, node in model.parameters().items():
        stored = np.asarray(payload["params"][name], dtype=np.float64)
        if stored.shape != node.value.shape:
            raise DataError(f"{path}: parameter {name} has shape {stored.shape}")
        node.value[...] = stored
    for name, entry in payload["bn_stats"].items():
        mean, var = model.trunk.bn_stats()[name]
        mean[...] = entry["mean"]
        var[...] = entry["var"]
    return model

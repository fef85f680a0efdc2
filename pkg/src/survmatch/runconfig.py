"""Run configuration files: plain ``key = value`` lines, ``#`` comments.

One file drives every CLI subcommand; unknown keys are rejected so typos
fail loudly. See README for the full key table.
"""

import os
from dataclasses import dataclass

from .dataset import FeatureSchema, SplitSpec
from .errors import ConfigError
from .losses import LossConfig
from .model import SfmConfig
from .train import TrainConfig


def _parse_bool(raw):
    if raw.lower() in ("true", "yes", "on", "1"):
        return True
    if raw.lower() in ("false", "no", "off", "0"):
        return False
    raise ValueError(raw)


def _parse_list(raw):
    return [item.strip() for item in raw.split(",") if item.strip()]


def _parse_floats(raw):
    return [float(item) for item in _parse_list(raw)]


# key -> (parser, default)
_KEYS = {
    "seed": (int, 0),
    "out": (str, "out"),
    "model": (str, "sfm"),
    "data": (str, None),
    "checkpoint": (str, None),
    # schema
    "time_column": (str, "time"),
    "event_column": (str, "event"),
    "continuous": (_parse_list, []),
    "categorical": (_parse_list, []),
    # split
    "split_fractions": (_parse_floats, [0.8, 0.1, 0.1]),
    "split_seed": (int, None),
    # generator architecture
    "hidden_units": (int, 50),
    "layers": (int, 2),
    "dropout_p": (float, 0.2),
    "noise_dim": (int, 10),
    "noise_kind": (str, "uniform"),
    "batchnorm": (_parse_bool, True),
    # loss
    "lambda": (float, 1.0),
    "tau": (float, None),
    # training
    "batch_size": (int, 350),
    "learning_rate": (float, 3e-4),
    "beta1": (float, 0.9),
    "beta2": (float, 0.99),
    "epsilon": (float, 1e-8),
    "max_epochs": (int, 300),
    "patience": (int, 10),
    # evaluation
    "eval_samples": (int, 200),
    # synthetic data
    "synth_family": (str, "exponential"),
    "synth_n": (int, 2000),
    "synth_weights": (_parse_floats, None),
    "synth_d": (int, 5),
    "synth_shape": (float, 1.0),
    "synth_censoring": (str, "uniform-administrative"),
    "synth_censoring_fraction": (float, 0.3),
}


@dataclass
class RunConfig:
    """Parsed configuration; field names mirror the config keys."""

    values: dict

    def __getattr__(self, name):
        key = "lambda" if name == "lam" else name
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(name) from None

    def require(self, *keys):
        missing = [k for k in keys if self.values.get(k) is None]
        if missing:
            raise ConfigError(f"config is missing required keys: {', '.join(missing)}")

    def schema(self):
        cols = [(c, "continuous") for c in self.continuous]
        cols += [(c, "categorical") for c in self.categorical]
        if not cols:
            raise ConfigError("config declares no covariate columns")
        return FeatureSchema(cols, self.time_column, self.event_column)

    def split_spec(self):
        seed = self.split_seed if self.split_seed is not None else self.seed
        return SplitSpec(tuple(self.split_fractions), seed)

    def sfm_config(self):
        return SfmConfig(
            hidden_units=self.hidden_units,
            layers=self.layers,
            dropout_p=self.dropout_p,
            noise_dim=self.noise_dim,
            noise_kind=self.noise_kind,
            batchnorm=self.batchnorm,
        )

    def loss_config(self):
        return LossConfig(lam=self.lam, tau=self.tau)

    def train_config(self, seed=None):
        if seed is None:
            seed = self.seed
        return TrainConfig(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=seed,
        )


def load_run_config(path, overrides=None):
    """Parse ``path`` and apply CLI/env overrides.

    Precedence: built-in defaults < file < SURVMATCH_OUT < CLI flags.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    values = {key: default for key, (_, default) in _KEYS.items()}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if raw == "":
                continue  # empty value = keep the default
            parser, _ = _KEYS[key]
            try:
                values[key] = parser(raw)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {raw!r}") from None
    env_out = os.environ.get("SURVMATCH_OUT")
    if env_out:
        values["out"] = env_out
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    if values["model"] not in ("sfm", "lognormal"):
        raise ConfigError(f"model must be 'sfm' or 'lognormal', got {values['model']!r}")
    return RunConfig(values)

"""Command-line entry point: simulate | train | evaluate | curves | calibration.

Every command takes ``--config`` (a key=value run configuration) plus
optional ``--seed/--model/--out`` overrides; all randomness flows from the
single run seed. Outputs are byte-reproducible for a fixed seed. Errors
print one machine-parsable line ``error:<category>: <message>`` and exit
with 2 for usage/config problems, 1 otherwise.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import metrics, synth
from .dataset import load_csv, prepare_splits
from .errors import ConfigError, DataError, SurvmatchError
from .estimators import greenwood_bands, km
from .model import LognormalModel, SfmModel, load_checkpoint, save_checkpoint
from .runconfig import load_run_config
from .svgplot import calibration_svg, survival_svg
from .train import train


def _fmt(x):
    return repr(float(x))


def _child_seeds(master, n):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(master).spawn(n)]


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _outdir(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _checkpoint_path(cfg):
    return cfg.checkpoint or os.path.join(cfg.out, "checkpoint.json")


def _oracle_spec(cfg):
    weights = cfg.synth_weights
    if weights is None:
        weights = np.random.default_rng(cfg.seed).normal(0.0, 0.5, cfg.synth_d)
    return synth.OracleSpec(
        family=cfg.synth_family,
        weights=np.asarray(weights, dtype=np.float64),
        shape=cfg.synth_shape,
        censoring=cfg.synth_censoring,
        censoring_fraction=cfg.synth_censoring_fraction,
        seed=cfg.seed,
    )


def cmd_simulate(cfg):
    out = _outdir(cfg)
    ds, resolved = synth.generate(cfg.synth_n, _oracle_spec(cfg))
    data_path = cfg.data or os.path.join(out, "data.csv")
    if os.path.dirname(data_path):
        os.makedirs(os.path.dirname(data_path), exist_ok=True)
    names = [name for name, _ in ds.schema.columns]
    rows = (
        [_fmt(v) for v in ds.X[i]] + [_fmt(ds.t[i]), str(int(ds.y[i]))]
        for i in range(ds.n)
    )
    _write_csv(data_path, names + ["time", "event"], rows)
    _write_json(
        os.path.join(out, "oracle.json"),
        {
            "family": resolved.family,
            "weights": [float(w) for w in resolved.weights],
            "shape": resolved.shape,
            "censoring": resolved.censoring,
            "censoring_fraction": resolved.censoring_fraction,
            "censoring_scale": resolved.censoring_scale,
            "seed": resolved.seed,
            "n": ds.n,
            "realized_event_fraction": float(ds.y.mean()),
        },
    )
    print(f"simulate: wrote {ds.n} subjects to {data_path}")
    return 0


def _load_splits(cfg):
    cfg.require("data")
    raw = load_csv(cfg.data, cfg.schema())
    return prepare_splits(raw, cfg.split_spec())


def cmd_train(cfg):
    out = _outdir(cfg)
    train_ds, valid_ds, _ = _load_splits(cfg)
    model_seed, train_seed = _child_seeds(cfg.seed, 2)
    cls = SfmModel if cfg.model == "sfm" else LognormalModel
    model = cls(cfg.sfm_config(), train_ds.width, model_seed)
    model, history = train(
        model, train_ds, valid_ds, cfg.loss_config(), cfg.train_config(train_seed)
    )
    ckpt = _checkpoint_path(cfg)
    save_checkpoint(model, ckpt)
    _write_csv(
        os.path.join(out, "history.csv"),
        ["epoch", "train_loss", "valid_loss"],
        ([str(e), _fmt(tr), _fmt(va)] for e, tr, va in history),
    )
    best = min(history, key=lambda row: row[2]) if history else None
    print(f"train: {len(history)} epochs, checkpoint at {ckpt}"
          + (f", best valid loss {best[2]:.6f} (epoch {best[0]})" if best else ""))
    return 0


def _load_model(cfg):
    path = _checkpoint_path(cfg)
    if not os.path.exists(path):
        raise DataError(f"checkpoint not found: {path} (run `survmatch train` first)")
    return load_checkpoint(path)


def cmd_evaluate(cfg):
    out = _outdir(cfg)
    _, _, test_ds = _load_splits(cfg)
    model = _load_model(cfg)
    eval_seed = _child_seeds(cfg.seed, 3)[2]
    report = metrics.evaluate(model, test_ds, s_count=cfg.eval_samples, seed=eval_seed)
    path = os.path.join(out, "eval_report.json")
    _write_json(path, report.to_dict())
    print(
        f"evaluate: slope {report.calibration_slope:.4f}, c-index {report.c_index:.4f}, "
        f"mean CoV {report.mean_cov:.4f}, 95% coverage {report.coverage95:.4f} -> {path}"
    )
    return 0


def cmd_curves(cfg, with_svg=False):
    out = _outdir(cfg)
    has_model = os.path.exists(_checkpoint_path(cfg))
    if has_model:
        _, _, ds = _load_splits(cfg)
    else:
        cfg.require("data")
        # degraded mode: no checkpoint, KM of the full dataset only
        from .dataset import encode, impute

        ds = encode(impute(load_csv(cfg.data, cfg.schema())))
    gt = greenwood_bands(km(ds.t, ds.y), alpha=0.05)
    _write_csv(
        os.path.join(out, "km_curve.csv"),
        ["time", "survival", "lower", "upper"],
        ([_fmt(t), _fmt(s), _fmt(lo), _fmt(hi)]
         for t, s, lo, hi in zip(gt.grid, gt.s, gt.lower, gt.upper)),
    )
    curves = [("empirical", gt)]
    if has_model:
        model = _load_model(cfg)
        eval_seed = _child_seeds(cfg.seed, 3)[2]
        dk = metrics.model_survival_curve(model, ds, s_count=cfg.eval_samples, seed=eval_seed)
        _write_csv(
            os.path.join(out, "dkm_curve.csv"),
            ["time", "survival"],
            ([_fmt(t), _fmt(s)] for t, s in zip(dk.grid, dk.s)),
        )
        curves.append((cfg.model, dk))
    if with_svg:
        survival_svg(os.path.join(out, "curves.svg"), curves)
    print(f"curves: wrote {'KM+DKM' if has_model else 'KM-only'} curves to {out}")
    return 0


def cmd_calibration(cfg, with_svg=False):
    out = _outdir(cfg)
    _, _, test_ds = _load_splits(cfg)
    model = _load_model(cfg)
    eval_seed = _child_seeds(cfg.seed, 3)[2]
    report = metrics.evaluate(model, test_ds, s_count=cfg.eval_samples, seed=eval_seed)
    _write_csv(
        os.path.join(out, "calibration_points.csv"),
        ["empirical_risk", "predicted_risk"],
        ([_fmt(x), _fmt(y)] for x, y in report.calibration_points),
    )
    _write_json(
        os.path.join(out, "calibration.json"),
        {"slope": report.calibration_slope},
    )
    if with_svg:
        calibration_svg(
            os.path.join(out, "calibration.svg"),
            report.calibration_points,
            report.calibration_slope,
        )
    print(f"calibration: slope {report.calibration_slope:.4f} -> {out}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="survmatch",
        description="Calibrated time-to-event modeling by survival function matching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "generate a synthetic right-censored dataset plus oracle sidecar"),
        ("train", "fit a model and write checkpoint + history"),
        ("evaluate", "write the evaluation report JSON for the test split"),
        ("curves", "export KM (with bands) and model DKM survival curves"),
        ("calibration", "export calibration points and slope"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--model", choices=("sfm", "lognormal"), default=None)
        p.add_argument("--out", default=None, help="override the output directory")
        if name in ("curves", "calibration"):
            p.add_argument("--svg", action="store_true", help="also write an SVG plot")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "curves": cmd_curves,
    "calibration": cmd_calibration,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_run_config(
            args.config,
            overrides={"seed": args.seed, "model": args.model, "out": args.out},
        )
        if args.command in ("curves", "calibration"):
            return _COMMANDS[args.command](cfg, with_svg=args.svg)
        return _COMMANDS[args.command](cfg)
    except SurvmatchError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())

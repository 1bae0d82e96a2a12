"""Experiment harness: run sweeps from JSON configs, emit plot-ready tables.

Three verbs:

  coldgp run --config cfg.json [--seed N] [--out DIR]
  coldgp plot-data --input results.csv --figure {fig1,fig2a,fig2b,fig3b} [--out PATH]
  coldgp gen-data --config cfg.json [--seed N] [--out DIR]

Every run writes three files into its output directory: ``results.csv``
(fixed column order per experiment), ``resolved_config.json`` (the config
with every default materialized; running it again reproduces the bundle),
and ``run.log`` (wall time plus solver and sampler diagnostics).  With the
config and seed fixed, results.csv is byte-identical across runs; run.log
is where the timing noise lives.

Exit codes: 0 success, 2 config error, 3 computational failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .aleatoric import relabel_prob_zero_temperature, relabel_ratio_curve
from .classification import classification_temperature_sweep
from .config import ExperimentConfig, apply_overrides, load_config
from .data import (
    LabeledDataset,
    gen_cluster_classification,
    gen_rbf_regression,
    input_stats,
    load_cifar10,
    load_dataset,
    normalize_inputs,
    save_dataset,
)
from .exceptions import ColdGPError, ConfigError, SchemaMismatchError
from .records import read_csv, write_csv
from .regression import RegressionModel, regression_temperature_sweep
from .rng import derive_seed

REGRESS_HEADER = ["temperature", "test_nll", "seed", "assumed_noise_std"]
CLASSIFY_HEADER = ["temperature", "test_log_likelihood", "top1_accuracy",
                   "n_train", "n_test", "seed"]
PROBE_HEADER = ["latent_scale", "temperature", "probability", "ratio"]

FIGURES = ("fig1", "fig2a", "fig2b", "fig3b")
_FIGURE_HEADERS = {
    "fig1": CLASSIFY_HEADER,
    "fig2a": PROBE_HEADER,
    "fig2b": PROBE_HEADER,
    "fig3b": REGRESS_HEADER,
}


def _load_classification_data(config: ExperimentConfig):
    d = config.data
    if "generator" in d:
        return gen_cluster_classification(
            n_per_class=d["n_per_class"], class_count=d["class_count"],
            dim=d["dim"], separation=d["separation"], seed=config.seed)
    if d["source"] == "cifar10":
        train, test = load_cifar10(d["dir"], keep_classes=d["classes"],
                                   n_train=d["n_train"], n_test=d["n_test"], seed=config.seed)
    else:
        class_count = d.get("class_count")
        train = load_dataset(d["train_path"], split_tag="train", class_count=class_count)
        test = load_dataset(d["test_path"], split_tag="test",
                            class_count=class_count or train.class_count)
    if d["normalize"] == "global-standardize":
        stats = input_stats(train)
        train = normalize_inputs(train, "global-standardize", stats)
        test = normalize_inputs(test, "global-standardize", stats)
    return train, test


def _run_regress_sweep(config: ExperimentConfig):
    rows, log = [], []
    jitters = set()
    file_based = config.data.get("source") == "file"
    if file_based:
        train = load_dataset(config.data["train_path"], split_tag="train")
        test = load_dataset(config.data["test_path"], split_tag="test")
        if train.is_classification or test.is_classification:
            raise ConfigError("regress-sweep requires regression datasets (target column)")
    for sigma in config.regression["assumed_noise_std"]:
        model = RegressionModel(kernel=config.kernel, noise_std=sigma)
        nll_sum = {}
        for k in range(config.regression["n_seeds"]):
            seed_k = derive_seed(config.seed, k)
            if not file_based:
                d = config.data
                train, test = gen_rbf_regression(
                    n_train=d["n_train"], n_test=d["n_test"], noise_std=d["noise_std"],
                    kernel=config.kernel, seed=seed_k)
            result = regression_temperature_sweep(
                model, train, test, temperatures=config.temperatures, seed=seed_k)
            jitters.add(result.diagnostics["jitter_used"])
            for rec in result.records:
                nll = rec.metrics["test_nll"]
                rows.append((rec.temperature, nll, seed_k, float(sigma)))
                nll_sum[rec.temperature] = nll_sum.get(rec.temperature, 0.0) + nll
        n_seeds = config.regression["n_seeds"]
        t_best = min(nll_sum, key=lambda t: (nll_sum[t], t))
        log.append(f"assumed_noise_std={float(sigma)!r} argmin_temperature={t_best!r} "
                   f"mean_test_nll={nll_sum[t_best] / n_seeds!r}")
    log.append(f"jitter_used={sorted(jitters)!r}")
    return REGRESS_HEADER, rows, log


def _run_classify_sweep(config: ExperimentConfig):
    train, test = _load_classification_data(config)
    result = classification_temperature_sweep(
        config.kernel, train, test, temperatures=config.temperatures,
        config=config.ess, seed=config.seed, draws_per_sample=config.draws_per_sample)
    rows = [(rec.temperature, rec.metrics["test_log_likelihood"],
             rec.metrics["top1_accuracy"], train.n, test.n, rec.seed)
            for rec in result.records]
    log = [f"n_train={train.n} n_test={test.n} class_count={train.class_count}"]
    for rec in result.records:
        stats = result.diagnostics[rec.temperature]
        log.append(
            f"temperature={rec.temperature!r} "
            f"proposals_per_transition={stats['proposals_per_transition']!r} "
            f"prior_jitter={stats['prior_jitter']!r} "
            f"mc_se_log_likelihood={rec.extras['mc_se_log_likelihood']!r} "
            f"mc_se_accuracy={rec.extras['mc_se_accuracy']!r}")
    log.append(f"best_temperature={result.best_temperature!r}")
    return CLASSIFY_HEADER, rows, log


def _run_probe(config: ExperimentConfig):
    p = config.probe
    rows, log = [], []
    for scale in p["latent_scales"]:
        points = relabel_ratio_curve(
            scale, p["temperatures"],
            quadrature_tolerance=p["quadrature_tolerance"],
            integration_half_width_sigmas=p["integration_half_width_sigmas"])
        rows.extend((pt.latent_scale, pt.temperature, pt.probability, pt.ratio)
                    for pt in points)
        log.append(f"latent_scale={float(scale)!r} "
                   f"zero_temperature_limit={relabel_prob_zero_temperature(scale)!r}")
    return PROBE_HEADER, rows, log


def _run_gen_data(config: ExperimentConfig):
    d = config.data
    if d["generator"] == "rbf-regression":
        train, test = gen_rbf_regression(
            n_train=d["n_train"], n_test=d["n_test"], noise_std=d["noise_std"],
            kernel=config.kernel, seed=config.seed)
    else:
        train, test = gen_cluster_classification(
            n_per_class=d["n_per_class"], class_count=d["class_count"],
            dim=d["dim"], separation=d["separation"], seed=config.seed)
    out = config.output_dir
    save_dataset(train, os.path.join(out, "train.csv"))
    save_dataset(test, os.path.join(out, "test.csv"))
    kind = "classification" if train.is_classification else "regression"
    log = [f"kind={kind} n_train={train.n} n_test={test.n} dim={train.d}",
           "wrote train.csv test.csv"]
    return None, None, log


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute one resolved config; returns the paths of the written bundle."""
    started = time.perf_counter()
    os.makedirs(config.output_dir, exist_ok=True)
    runner = {
        "regress-sweep": _run_regress_sweep,
        "classify-sweep": _run_classify_sweep,
        "probe": _run_probe,
        "gen-data": _run_gen_data,
    }[config.experiment]
    header, rows, log = runner(config)
    paths = {}
    if header is not None:
        paths["results"] = os.path.join(config.output_dir, "results.csv")
        write_csv(paths["results"], header, rows)
    paths["config"] = os.path.join(config.output_dir, "resolved_config.json")
    with open(paths["config"], "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["log"] = os.path.join(config.output_dir, "run.log")
    elapsed = time.perf_counter() - started
    with open(paths["log"], "w", encoding="utf-8") as fh:
        fh.write(f"experiment={config.experiment} seed={config.seed}\n")
        for line in log:
            fh.write(line + "\n")
        fh.write(f"wall_time_seconds={elapsed:.3f}\n")
    return paths


def emit_plot_data(results_csv: str, figure: str, out_path: str | None = None) -> str:
    """Reshape a results.csv into long-format (x, y, series) rows.

    The input header must match the named figure's experiment schema exactly;
    an empty or header-only file is a schema mismatch.  fig3b averages
    test_nll over seeds within each (noise setting, temperature) cell.
    """
    if figure not in FIGURES:
        raise ConfigError(f"--figure must be one of {list(FIGURES)}, got {figure!r}")
    header, raw_rows = read_csv(results_csv)
    if header != _FIGURE_HEADERS[figure]:
        raise SchemaMismatchError(
            f"{results_csv}: header {header!r} does not match the {figure} schema "
            f"{_FIGURE_HEADERS[figure]!r}")
    if not raw_rows:
        raise SchemaMismatchError(f"{results_csv}: no data rows")
    col = {name: i for i, name in enumerate(header)}
    out_rows = []
    if figure == "fig1":
        for metric in ("test_log_likelihood", "top1_accuracy"):
            out_rows.extend((float(r[col["temperature"]]), float(r[col[metric]]), metric)
                            for r in raw_rows)
    elif figure in ("fig2a", "fig2b"):
        y_col = "probability" if figure == "fig2a" else "ratio"
        for r in raw_rows:
            out_rows.append((float(r[col["temperature"]]), float(r[col[y_col]]),
                             f"c={r[col['latent_scale']]}"))
    else:
        sums, counts, order = {}, {}, []
        for r in raw_rows:
            key = (r[col["assumed_noise_std"]], float(r[col["temperature"]]))
            if key not in sums:
                order.append(key)
                sums[key] = 0.0
                counts[key] = 0
            sums[key] += float(r[col["test_nll"]])
            counts[key] += 1
        out_rows = [(t, sums[(s, t)] / counts[(s, t)], f"sigma_eps={s}") for s, t in order]
    if out_path is None:
        out_path = os.path.join(os.path.dirname(os.path.abspath(results_csv)),
                                f"plot_{figure}.csv")
    write_csv(out_path, ["x", "y", "series"], out_rows)
    return out_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldgp",
        description="Tempered Gaussian-process experiments: sweeps, probes, data generation.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True, help="path to a JSON experiment config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="override the config output_dir")

    p_plot = sub.add_parser("plot-data", help="reshape results.csv for plotting")
    p_plot.add_argument("--input", required=True, help="path to a results.csv")
    p_plot.add_argument("--figure", required=True, choices=FIGURES)
    p_plot.add_argument("--out", default=None, help="output path (default: plot_<figure>.csv)")

    p_gen = sub.add_parser("gen-data", help="generate and save synthetic datasets")
    p_gen.add_argument("--config", required=True, help="path to a JSON gen-data config")
    p_gen.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_gen.add_argument("--out", default=None, help="override the config output_dir")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb in ("run", "gen-data"):
            config = apply_overrides(load_config(args.config), seed=args.seed,
                                     output_dir=args.out)
            if args.verb == "gen-data" and config.experiment != "gen-data":
                raise ConfigError(
                    f"gen-data verb requires experiment 'gen-data', config says "
                    f"{config.experiment!r}")
            paths = run_experiment(config)
            for name in sorted(paths):
                print(f"wrote {paths[name]}")
        else:
            out = emit_plot_data(args.input, args.figure, args.out)
            print(f"wrote {out}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ColdGPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

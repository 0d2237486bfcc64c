"""
Command-line driver: data generation, training, fine-tuning, convergence
checks, report aggregation and the full multi-seed comparison.

    python cli.py gen-data --kind bn --weight 0.3 --seed 7 --out runs/bn
    python cli.py train --data runs/bn/data.csv --out runs/bn
    python cli.py finetune --model runs/bn/model.mlp --data runs/bn/data.csv --sampler hmc --L 10
    python cli.py verify-theorems --out runs/verify.csv
    python cli.py report runs/bn/report.csv --out runs/bn
    python cli.py run --seeds 20 --workers 4 --out runs/table1

Exit codes: 0 ok, 1 usage or input error, 2 tolerance breach, 3 numeric
divergence.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from data.formats import load_labeled_csv, read_dataset, read_mlp, write_dataset, write_factor_net, write_mlp, write_rows
from data.generator import DataGenerator
from experiments.config import RunConfig, resolve_config
from experiments.report import TABLE_COLUMNS, TIMING_TABLE_COLUMNS, ReportIndex, aggregate_timings
from experiments.runner import (DEFAULT_LS, LOSS_COLUMNS, METHOD_DNN, METHOD_GIBBS, SeedTask, evaluate, finetune,
                                hmc_method, run_experiment, stochastic_predictions, train_mlp)
from experiments.store import ReportStore
from metrics.monitor import RunMonitor
from models.chain import SamplerKind
from models.dataset import Dataset, GenKind, GenSpec
from models.errors import DataFormatError, DivergenceError, InferenceError, StructureError, ToleranceBreach
from network.propagation import predict
from unroll.verify import SUITES, VERIFY_COLUMNS, VerifyConfig, verify_all

logger = logging.getLogger("cli")

EXIT_OK, EXIT_USAGE, EXIT_BREACH, EXIT_DIVERGED = 0, 1, 2, 3

# flag dest -> RunConfig key
_CONFIG_FLAGS = {
    "seed": "seed", "lr": "lr", "sampler": "sampler", "L": "L", "dt": "dt", "leapfrog": "leapfrog",
    "k": "k", "burn_in": "burn_in", "jacobian": "jacobian", "bins": "bins", "optimizer": "optimizer",
    "batch_size": "batch_size", "n_samples": "n_samples", "train_epochs": "train_epochs",
}


def parse_dims(text: str) -> Tuple[int, ...]:
    """'4-4-4-1' -> (4, 4, 4, 1)"""
    try:
        dims = tuple(int(n) for n in text.split("-"))
    except ValueError:
        raise StructureError(f"layer sizes must look like 4-4-1, got '{text}'")
    if any(n < 1 for n in dims):
        raise StructureError(f"layer sizes must be positive, got '{text}'")
    return dims


def _config(args: argparse.Namespace, epochs_key: str = "epochs") -> RunConfig:
    flags: Dict[str, Any] = {key: getattr(args, dest, None) for dest, key in _CONFIG_FLAGS.items()}
    if args.epochs is not None:
        flags[epochs_key] = args.epochs
    return resolve_config(args.config, flags)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_data(args: argparse.Namespace) -> Dataset:
    """Generator CSV by default; any labelled CSV with --label-column."""
    if args.label_column:
        return load_labeled_csv(args.data, args.label_column, args.positive)
    if args.positive is not None:
        raise ValueError("--positive needs --label-column")
    return read_dataset(args.data)


def cmd_gen_data(args: argparse.Namespace, cfg: RunConfig) -> int:
    spec = GenSpec(GenKind(args.kind), parse_dims(args.dims), args.weight, args.n, cfg.seed)
    gen, dataset = DataGenerator.generate(spec)
    out = _out_dir(args)
    write_dataset(dataset, out / "data.csv")
    write_factor_net(gen.net, out / "model.factornet")
    write_mlp(gen.mlp, out / "model.mlp")
    logger.info("wrote %d rows of %s to %s", len(dataset), spec.label, out)
    print(cfg.seed)
    return EXIT_OK


def cmd_train(args: argparse.Namespace, cfg: RunConfig) -> int:
    dataset = _load_data(args)
    train, test = dataset.split(cfg.train_fraction, cfg.seed)
    dims = (dataset.num_features,) + parse_dims(args.hidden) + (1,)
    result = train_mlp(train, test, dims, cfg)
    out = _out_dir(args)
    write_mlp(result.mlp, out / "model.mlp")
    write_rows(out / "losses.csv", LOSS_COLUMNS, result.history)
    logger.info("wrote model and %d loss rows to %s", len(result.history), out)
    return EXIT_OK


def _append_report(path: Path, rows: List[Dict[str, Any]], timings: List[Dict[str, Any]]):
    """Merge rows into an existing report and its timings file, if any."""
    store = ReportStore()
    timings_path = path.with_name("timings.csv")
    if path.exists():
        store.load_report(path)
    if timings_path.exists():
        store.load_timings(timings_path)
    store.add_rows(rows)
    store.add_timings(timings)
    store.export_report(path)
    store.export_timings(timings_path)


def cmd_finetune(args: argparse.Namespace, cfg: RunConfig) -> int:
    mlp = read_mlp(args.model)
    dataset = _load_data(args)
    train, test = dataset.split(cfg.train_fraction, cfg.seed)
    method = METHOD_GIBBS if cfg.sampler is SamplerKind.GIBBS else hmc_method(cfg.L)
    label = args.label or dataset.name
    monitor = RunMonitor(method, label, cfg.seed)
    with monitor.phase("finetune", cfg.epochs):
        result = finetune(mlp, train, cfg)
    predictions = {method: stochastic_predictions(result.mlp, test.X, cfg)}
    if args.with_baseline:
        predictions[METHOD_DNN] = predict(mlp, test.X)

    rows = []
    for name, pred in predictions.items():
        for metric, value in evaluate(pred, test, cfg.bins).items():
            rows.append({"method": name, "dataset": label, "weight_scale": args.weight,
                         "epochs": cfg.train_epochs, "metric": metric, "value": value, "seed": cfg.seed})
    out = _out_dir(args)
    write_mlp(result.mlp, out / f"model-{method}.mlp")
    report = Path(args.report) if args.report else out / "report.csv"
    _append_report(report, rows, monitor.snapshots)
    if result.acceptance is not None:
        logger.info("mean HMC acceptance %.3f", result.acceptance)
    logger.info("appended %d rows to %s", len(rows), report)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, cfg: RunConfig) -> int:
    overrides: Dict[str, Any] = {"seeds": tuple(range(cfg.seed, cfg.seed + args.seeds))}
    if args.dims:
        overrides["dims"] = tuple(parse_dims(text) for text in args.dims)
    if args.prob_exponents:
        overrides["prob_exponents"] = tuple(args.prob_exponents)
    if args.grad_L:
        overrides["grad_L"] = tuple(args.grad_L)
    verify_cfg = dataclasses.replace(VerifyConfig(), **overrides)
    try:
        rows = verify_all(verify_cfg, args.suite or tuple(SUITES))
        status = EXIT_OK
    except ToleranceBreach as breach:
        rows = breach.rows
        for message in breach.breaches:
            logger.error("breach: %s", message)
        status = EXIT_BREACH
    write_rows(args.out, VERIFY_COLUMNS, rows)
    logger.info("wrote %d verification rows to %s", len(rows), args.out)
    return status


def cmd_report(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = ReportStore()
    for path in args.reports:
        store.load_report(path)
    for path in args.timings or []:
        store.load_timings(path)
    index = ReportIndex(args.baseline)
    index.index_all(store.rows)
    out = _out_dir(args)
    write_rows(out / "table.csv", TABLE_COLUMNS, index.aggregate())
    if store.timings:
        write_rows(out / "timings_table.csv", TIMING_TABLE_COLUMNS, aggregate_timings(store.timings))
    logger.info("aggregated %s into %s", store.get_stats(), out)
    return EXIT_OK


def cmd_run(args: argparse.Namespace, cfg: RunConfig) -> int:
    Ls = tuple(float(L) for L in args.Ls) if args.Ls else DEFAULT_LS
    tasks = [SeedTask(GenKind(args.kind), parse_dims(args.dims), args.weight, args.n, seed, cfg, Ls,
                      fix_data=args.fix_data, data_seed=cfg.seed)
             for seed in range(cfg.seed, cfg.seed + args.seeds)]
    rows, timings = run_experiment(tasks, args.workers)
    store = ReportStore()
    store.add_rows(rows)
    store.add_timings(timings)
    out = _out_dir(args)
    store.export_report(out / "report.csv")
    store.export_timings(out / "timings.csv")
    index = ReportIndex()
    index.index_all(store.rows)
    write_rows(out / "table.csv", TABLE_COLUMNS, index.aggregate())
    write_rows(out / "timings_table.csv", TIMING_TABLE_COLUMNS, aggregate_timings(store.timings))
    logger.info("ran %d seeds into %s", len(tasks), out)
    return EXIT_OK


def _run_flags() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; None means 'not given'."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="key=value file, overridden by flags")
    parent.add_argument("--seed", type=int)
    parent.add_argument("--epochs", type=int)
    parent.add_argument("--train-epochs", dest="train_epochs", type=int)
    parent.add_argument("--lr", type=float)
    parent.add_argument("--optimizer", choices=["adam", "sgd"])
    parent.add_argument("--batch-size", dest="batch_size", type=int)
    parent.add_argument("--sampler", choices=["gibbs", "hmc"])
    parent.add_argument("--L", type=float)
    parent.add_argument("--dt", type=float)
    parent.add_argument("--leapfrog", type=int)
    parent.add_argument("--k", type=int)
    parent.add_argument("--burn-in", dest="burn_in", type=int)
    parent.add_argument("--jacobian", choices=["on", "off"])
    parent.add_argument("--n-samples", dest="n_samples", type=int)
    parent.add_argument("--bins", type=int)
    verbosity = parent.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true")
    verbosity.add_argument("--quiet", action="store_true")
    return parent


def _data_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--data", required=True)
    parser.add_argument("--label-column", dest="label_column",
                        help="read a plain labelled CSV, scaling the other columns to [0, 1]")
    parser.add_argument("--positive", help="label value mapped to 1 (default: the larger one)")


def _gen_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--kind", choices=[k.value for k in GenKind], default=GenKind.BN.value)
    parser.add_argument("--dims", default="4-4-4-1", help="generator layer sizes")
    parser.add_argument("--weight", type=float, default=0.3, help="weights ~ U(-w, w)")
    parser.add_argument("--n", type=int, default=1000, help="rows to sample")


def build_parser() -> argparse.ArgumentParser:
    parent = _run_flags()
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", parents=[parent], help="sample a synthetic dataset")
    _gen_flags(gen)
    gen.add_argument("--out", default="data")
    gen.set_defaults(handler=cmd_gen_data, epochs_key="epochs")

    train = commands.add_parser("train", parents=[parent], help="gradient-train a network")
    _data_flags(train)
    train.add_argument("--hidden", default="4-4", help="hidden layer sizes")
    train.add_argument("--out", default="model")
    train.set_defaults(handler=cmd_train, epochs_key="train_epochs")

    tune = commands.add_parser("finetune", parents=[parent], help="CD-k fine-tune with Gibbs or HMC")
    tune.add_argument("--model", required=True)
    _data_flags(tune)
    tune.add_argument("--weight", type=float, default=0.0, help="weight scale recorded in the report")
    tune.add_argument("--label", help="dataset name recorded in the report (default: file stem)")
    tune.add_argument("--report", help="report CSV to append to (default OUT/report.csv)")
    tune.add_argument("--with-baseline", action="store_true", help="also report the input network")
    tune.add_argument("--out", default="model")
    tune.set_defaults(handler=cmd_finetune, epochs_key="epochs")

    verify = commands.add_parser("verify-theorems", parents=[parent], help="finite-L convergence checks")
    verify.add_argument("--suite", action="append", choices=sorted(SUITES))
    verify.add_argument("--seeds", type=int, default=20)
    verify.add_argument("--dims", action="append", help="layer sizes for the theorem suites, repeatable")
    verify.add_argument("--prob-exponents", dest="prob_exponents", nargs="+", type=int,
                        help="probability grid L = 2**k")
    verify.add_argument("--grad-L", dest="grad_L", nargs="+", type=int, help="gradient grid, increasing")
    verify.add_argument("--out", default="verify.csv")
    verify.set_defaults(handler=cmd_verify, epochs_key="epochs")

    report = commands.add_parser("report", parents=[parent], help="aggregate report CSVs")
    report.add_argument("reports", nargs="+")
    report.add_argument("--timings", action="append")
    report.add_argument("--baseline", default=METHOD_DNN)
    report.add_argument("--out", default="report")
    report.set_defaults(handler=cmd_report, epochs_key="epochs")

    run = commands.add_parser("run", parents=[parent], help="multi-seed comparison of all methods")
    _gen_flags(run)
    run.add_argument("--seeds", type=int, default=20)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--Ls", nargs="+", help="HMC variance divisors")
    run.add_argument("--fix-data", dest="fix_data", action="store_true",
                     help="same dataset for every seed; only training randomness varies")
    run.add_argument("--out", default="runs")
    run.set_defaults(handler=cmd_run, epochs_key="epochs")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    cfg: Optional[RunConfig] = None
    try:
        cfg = _config(args, args.epochs_key)
        logger.info("%s started", args.command)
        status = args.handler(args, cfg)
        logger.info("%s finished", args.command)
        return status
    except ToleranceBreach as e:
        logger.error("%s", e)
        return EXIT_BREACH
    except DivergenceError as e:
        logger.error("%s", e)
        if cfg is not None:
            logger.error("configuration:\n%s", cfg.as_text())
        return EXIT_DIVERGED
    except (StructureError, DataFormatError, InferenceError, ValueError, IOError) as e:
        logger.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line front end.

Subcommands: generate, train, eval, compare, sweep, grid.  All take
``--config <json>`` plus a small set of flag overrides; ``--seed`` and
``--out`` are accepted everywhere.  With ``--strict``, any invalid
(aborted) run makes the process exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import configio, data, harness
from .model import load_params, save_params
from .trainer import evaluate, train, write_run_report

def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _experiment(args) -> harness.ExperimentConfig:
    doc = _load_json(args.config)
    config = harness.experiment_from_json(doc)
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    if getattr(args, "n_seeds", None) is not None:
        overrides["n_seeds"] = args.n_seeds
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    return replace(config, **overrides) if overrides else config


def _strict_exit(summaries, strict: bool) -> int:
    bad = {name: seeds for name, seeds in summaries if seeds}
    if bad:
        for name, seeds in bad.items():
            print(f"invalid runs in arm {name!r}: seeds {seeds}", file=sys.stderr)
        if strict:
            return 1
    return 0


def _cmd_generate(args) -> int:
    doc = _load_json(args.config) if args.config else {}
    for flag in ("n", "d", "k", "positive_rate", "negative_modes", "class_separation", "noise_scale"):
        value = getattr(args, flag)
        if value is not None:
            doc[flag] = value
    if args.seed is not None:
        doc["seed"] = args.seed
    config = configio.generator_from_json(doc)
    dataset = data.generate(config)
    data.save(dataset, args.out, args.format)
    print(f"wrote {dataset.n} instances ({dataset.d} features, k={dataset.k}) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = _experiment(args)
    arm = next((a for a in config.arms if a.name == args.arm), None)
    if arm is None:
        print(f"no arm named {args.arm!r} in config", file=sys.stderr)
        return 2
    train_ds, dev_ds, test_ds = harness.load_datasets(config.source)
    spec = harness._build_spec(config.model, train_ds)
    seed = args.seed if args.seed is not None else config.base_seed
    train_config = replace(arm.train, strategy=arm.strategy, seed=seed)
    params, report = train(train_ds, dev_ds, test_ds, spec, train_config)
    report.arm = arm.name
    out = Path(args.out or f"run_{arm.name}_{seed}.json")
    write_run_report(report, out)
    if args.save_model:
        save_params(params, args.save_model)
    status = "ok" if report.valid else f"INVALID ({report.failure})"
    print(
        f"{arm.name} seed={seed}: dev_f={report.best_dev_f:.4f} test_f={report.test_f:.4f} "
        f"[{status}] -> {out}"
    )
    return 0 if report.valid or not args.strict else 1


def _cmd_eval(args) -> int:
    params = load_params(args.model)
    dataset = data.load(args.data, args.format)
    p, r, f = evaluate(params, dataset, args.beta)
    print(f"precision={p:.6f} recall={r:.6f} f_beta={f:.6f} (beta={args.beta:g})")
    if args.out:
        configio.write_json(
            {"precision": p, "recall": r, "f_beta": f, "beta": args.beta}, args.out
        )
    return 0


def _cmd_compare(args) -> int:
    config = _experiment(args)
    report = harness.run_experiment(config)
    for arm in report.arms:
        if arm.mean_test_f is None:
            print(f"{arm.name}: no valid runs")
        else:
            print(
                f"{arm.name}: mean={100 * arm.mean_test_f:.2f} "
                f"var={arm.var_test_f_pct:.2f} best3={100 * arm.best3_test_f:.2f}"
            )
    print(f"reports in {config.output_dir}")
    return _strict_exit([(a.name, a.invalid_seeds) for a in report.arms], args.strict)


def _cmd_sweep(args) -> int:
    config = _experiment(args)
    report = harness.beta_sweep(config)
    invalid = []
    for row in report.rows:
        if row.mean_f1 is None:
            print(f"beta={row.beta:g}: no valid runs")
        else:
            print(
                f"beta={row.beta:g}: precision={row.mean_precision:.4f} "
                f"recall={row.mean_recall:.4f} f1={row.mean_f1:.4f}"
            )
        if row.n_valid < config.n_seeds:
            invalid.append((f"beta={row.beta:g}", config.n_seeds - row.n_valid))
    print(f"reports in {config.output_dir}")
    return _strict_exit(invalid, args.strict)


def _cmd_grid(args) -> int:
    config = _experiment(args)
    arm = next((a for a in config.arms if a.name == args.arm), None)
    if arm is None:
        print(f"no arm named {args.arm!r} in config", file=sys.stderr)
        return 2
    grid = (config.grid or {}).get(args.arm, {})
    result = harness.grid_search(arm, grid, config)
    for cell in result.cells:
        score = "-" if cell.mean_dev_f is None else f"{cell.mean_dev_f:.4f}"
        print(f"{cell.params or '(no parameters)'}: mean_dev_f={score}")
    print(f"best: {result.best_params or '(no parameters)'}")
    invalid = [
        (str(cell.params), config.n_seeds - cell.n_valid)
        for cell in result.cells
        if cell.n_valid < config.n_seeds
    ]
    return _strict_exit(invalid, args.strict)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adascale",
        description="Cost-sensitive training and evaluation for sparse detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset to CSV or JSONL")
    gen.add_argument("--config", help="generator config JSON")
    gen.add_argument("--out", required=True, help="output file (.csv or .jsonl)")
    gen.add_argument("--format", choices=["csv", "jsonl"], default=None)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--d", type=int, default=None)
    gen.add_argument("--k", type=int, default=None)
    gen.add_argument("--positive-rate", dest="positive_rate", type=float, default=None)
    gen.add_argument("--negative-modes", dest="negative_modes", type=int, default=None)
    gen.add_argument("--class-separation", dest="class_separation", type=float, default=None)
    gen.add_argument("--noise-scale", dest="noise_scale", type=float, default=None)
    gen.set_defaults(func=_cmd_generate)

    tr = sub.add_parser("train", help="train one arm for one seed")
    tr.add_argument("--config", required=True, help="experiment config JSON")
    tr.add_argument("--arm", required=True)
    tr.add_argument("--seed", type=int, default=None)
    tr.add_argument("--out", default=None, help="run report path")
    tr.add_argument("--save-model", dest="save_model", default=None, help="checkpoint path")
    tr.add_argument("--strict", action="store_true")
    tr.set_defaults(func=_cmd_train)

    ev = sub.add_parser("eval", help="score a saved model on a dataset file")
    ev.add_argument("--model", required=True, help="checkpoint path")
    ev.add_argument("--data", required=True, help="dataset file")
    ev.add_argument("--format", choices=["csv", "jsonl"], default=None)
    ev.add_argument("--beta", type=float, default=1.0)
    ev.add_argument("--out", default=None, help="metrics JSON path")
    ev.set_defaults(func=_cmd_eval)

    for name, func, extra in (
        ("compare", _cmd_compare, "multi-seed comparison of all arms"),
        ("sweep", _cmd_sweep, "adaptive beta sweep"),
    ):
        cp = sub.add_parser(name, help=extra)
        cp.add_argument("--config", required=True, help="experiment config JSON")
        cp.add_argument("--seed", type=int, default=None, help="override base seed")
        cp.add_argument("--out", default=None, help="override output directory")
        cp.add_argument("--n-seeds", dest="n_seeds", type=int, default=None)
        cp.add_argument("--workers", type=int, default=None)
        cp.add_argument("--strict", action="store_true")
        cp.set_defaults(func=func)

    gr = sub.add_parser("grid", help="grid search one arm's hyper-parameters")
    gr.add_argument("--config", required=True, help="experiment config JSON")
    gr.add_argument("--arm", required=True)
    gr.add_argument("--seed", type=int, default=None, help="override base seed")
    gr.add_argument("--out", default=None, help="override output directory")
    gr.add_argument("--n-seeds", dest="n_seeds", type=int, default=None)
    gr.add_argument("--workers", type=int, default=None)
    gr.add_argument("--strict", action="store_true")
    gr.set_defaults(func=_cmd_grid)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

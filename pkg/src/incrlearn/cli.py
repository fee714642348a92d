"""Command-line entry point.

Subcommands: ``run``, ``sweep``, ``inspect``, ``gen-data`` and ``learn``.
Settings come from a ``key = value`` file (``--config``) and are overridden
by flags.  Every run writes ``config.txt``, a fully resolved config that
reproduces it when passed back through ``--config``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import benchmark as bm
from .baselines import STRATEGIES, strategy_for
from .checkpoint import load_checkpoint, save_checkpoint
from .data import TOY_IBENCH, DelimitedSchema, gen_synthetic, load_delimited, toy_ibench, write_delimited
from .errors import CheckpointError, IncrLearnError, UnknownStrategyError
from .net import NetSpec, TrainConfig, count_parameters
from .svg import heatmap, line_plot
from .trainer import incremental_train, new_state

log = logging.getLogger("incrlearn")


@dataclass
class RunConfig:
    strategy: str = "icarl"
    dataset: str = "toy-ibench"
    test_dataset: str = ""
    data_seed: int = 0
    batch_size: int = 2
    seed: int = 1
    repeats: int = 1
    memory_k: int = 100
    epochs: int = 70
    minibatch_size: int = 128
    learning_rate: float = 2.0
    weight_decay: float = 1e-5
    hidden: str = "64"
    feature_dim: int = 32
    out_dir: str = "results"
    plot: bool = False

    def train_config(self) -> TrainConfig:
        return TrainConfig.with_epochs(self.epochs, minibatch_size=self.minibatch_size,
                                       base_learning_rate=self.learning_rate,
                                       weight_decay=self.weight_decay, shuffle_seed=self.seed)

    def net_spec(self, input_dim: int) -> NetSpec:
        hidden = tuple(int(h) for h in str(self.hidden).split(",") if h.strip())
        return NetSpec(input_dim, hidden, self.feature_dim)

    def dump(self) -> str:
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]
        return "\n".join(lines) + "\n"


def _coerce(kind, raw: str):
    if kind in (bool, "bool"):
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    if kind in (int, "int"):
        return int(raw)
    if kind in (float, "float"):
        return float(raw)
    return str(raw).strip()


def read_config_file(path) -> dict:
    known = {f.name: f.type for f in fields(RunConfig)}
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(known[key], value)
    return out


def resolve_config(args) -> RunConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return RunConfig(**values)


def load_dataset(cfg: RunConfig):
    if cfg.dataset == "toy-ibench":
        return toy_ibench(cfg.data_seed)
    if cfg.dataset == "synthetic":
        return gen_synthetic(seed=cfg.data_seed)
    if cfg.test_dataset:
        return load_delimited(cfg.dataset, cfg.test_dataset)
    return load_delimited(cfg.dataset, schema=DelimitedSchema(split_column=True))


def _add_run_flags(p):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--strategy", help=f"one of: {', '.join(STRATEGIES)}")
    p.add_argument("--dataset", help="'toy-ibench', 'synthetic' or a delimited file path")
    p.add_argument("--test-dataset", dest="test_dataset", help="delimited test file (else a split column is expected)")
    p.add_argument("--data-seed", dest="data_seed", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int, help="classes per incremental batch")
    p.add_argument("--seed", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--memory-k", dest="memory_k", type=int, help="exemplar budget K")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--hidden", help="comma-separated hidden widths")
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--plot", action="store_const", const=True, help="also write SVG figures")


def _run_reports(cfg: RunConfig, strategy: str, memory_k: int, keep_state=False):
    ds = load_dataset(cfg).validate()
    schedule = bm.make_schedule(ds.num_classes, cfg.batch_size, cfg.seed, ds.classes)
    net_spec = cfg.net_spec(ds.input_dim)
    if keep_state:
        reports = [bm.run_once(strategy, ds, bm.repeat_schedule(schedule, r), cfg.train_config(),
                               memory_k, net_spec, keep_state=(r == 0)) for r in range(cfg.repeats)]
        return ds, reports
    return ds, bm.evaluate_incremental(strategy, ds, schedule, cfg.train_config(), cfg.repeats, memory_k, net_spec)


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    strategy_for(cfg.strategy)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.dump())
    ds, reports = _run_reports(cfg, cfg.strategy, cfg.memory_k, keep_state=bool(args.save_checkpoint))
    bm.write_accuracy_csv(reports, out / "accuracy.csv")
    bm.write_timing_csv(reports, out / "timing.csv")
    summary = bm.summarize(reports)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    first = reports[0]
    if first.ok:
        labels = [ds.class_names[c] for c in first.order]
        bm.write_confusion_csv(first.confusion, out / "confusion.csv", labels)
        if cfg.plot:
            xs = first.classes_seen
            line_plot({cfg.strategy: (xs, summary["curve_mean"], summary["curve_std"])}, out / "accuracy.svg",
                      title=f"{cfg.strategy}: multi-class accuracy", xlabel="number of classes", ylabel="accuracy")
            heatmap(first.confusion, out / "confusion.svg", title=f"{cfg.strategy} confusion, log(1+x)")
        if args.save_checkpoint and first.final_state is not None:
            save_checkpoint(first.final_state, args.save_checkpoint)
    for r in reports:
        if not r.ok:
            print(f"repeat seed={r.seed} failed: {r.error}", file=sys.stderr)
    if summary["n"]:
        print(f"{cfg.strategy}: avg incremental accuracy {summary['avg_mean']:.4f} +- {summary['avg_std']:.4f}, "
              f"final {summary['final_mean']:.4f} over {summary['n']} repeat(s); results in {out}")
    return 0 if summary["n"] == len(reports) else 1


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    budgets = [int(k) for k in args.budgets.split(",")]
    names = [s.strip() for s in args.strategies.split(",")]
    for n in names:
        strategy_for(n)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.dump())
    (out / "sweep.txt").write_text(f"budgets = {args.budgets}\nstrategies = {args.strategies}\n")
    ds = load_dataset(cfg).validate()
    schedule = bm.make_schedule(ds.num_classes, cfg.batch_size, cfg.seed, ds.classes)
    sweep = bm.memory_sweep(names, ds, schedule, budgets, cfg.train_config(), cfg.repeats, cfg.net_spec(ds.input_dim))
    series = {}
    for n in names:
        bm.write_sweep_csv(sweep, n, out / f"sweep_{n}.csv")
        acc = sweep.avg_accuracy(n)
        series[n] = (budgets, np.nanmean(acc, axis=1), np.nanstd(acc, axis=1))
        print(n + ": " + ", ".join(f"K={k}: {m:.4f}" for k, m in zip(budgets, series[n][1])))
    if cfg.plot:
        line_plot(series, out / "sweep.svg", title="average incremental accuracy vs memory budget",
                  xlabel="K", ylabel="avg. incremental accuracy")
    return 0


def cmd_inspect(args) -> int:
    try:
        state = load_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        print(f"invalid checkpoint {args.checkpoint}: {exc}", file=sys.stderr)
        return 1
    counts = state.memory.counts()
    nparams = count_parameters(state.params)
    print("format version: 1")
    print(f"strategy: {state.strategy}")
    print(f"step: {state.step_index}")
    print(f"t: {state.t}")
    print(f"K: {state.memory.budget}")
    print(f"net: input {state.net_spec.input_dim}, hidden {list(state.net_spec.hidden)}, features {state.net_spec.feature_dim}")
    print(f"parameters: feature {nparams['feature']}, heads {nparams['heads']}, total {nparams['total']}")
    print(f"exemplars: total {state.memory.total()}")
    for y, n in counts.items():
        print(f"  class {y} (label {state.registry[y]}): {n}")
    return 0


def cmd_gen_data(args) -> int:
    kw = dict(TOY_IBENCH)
    for key in ("num_classes", "dim", "modes_per_class", "n_train", "n_test"):
        if getattr(args, key) is not None:
            kw[key] = getattr(args, key)
    for key in ("separation", "noise"):
        if getattr(args, key) is not None:
            kw[key] = getattr(args, key)
    ds = gen_synthetic(seed=args.seed, **kw)
    write_delimited(ds, args.out)
    print(f"wrote {ds.num_classes} classes, {ds.num_train()} train samples to {args.out}")
    return 0


def cmd_learn(args) -> int:
    """Continue a checkpointed learner on new classes from a dataset."""
    cfg = resolve_config(args)
    ds = load_dataset(cfg).validate()
    path = Path(args.checkpoint)
    if path.exists():
        state = load_checkpoint(path)
    else:
        state = new_state(cfg.net_spec(ds.input_dim), cfg.memory_k, cfg.seed, cfg.strategy)
    names = {n: c for c, n in enumerate(ds.class_names)}
    labels = [names[n.strip()] for n in args.classes.split(",")]
    state = incremental_train(state, {c: ds.train[c] for c in labels}, cfg.train_config())
    save_checkpoint(state, path)
    print(f"learned {len(labels)} classes; t={state.t}; checkpoint {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="incrlearn", description="class-incremental learning benchmarks")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate one strategy on an incremental schedule")
    _add_run_flags(p)
    p.add_argument("--save-checkpoint", dest="save_checkpoint", help="write repeat 0's final state here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="average incremental accuracy over memory budgets")
    _add_run_flags(p)
    p.add_argument("--budgets", default="20,50,100,200,2000")
    p.add_argument("--strategies", default="icarl,hybrid1,ncm")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("inspect", help="validate and summarize a checkpoint")
    p.add_argument("checkpoint")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("gen-data", help="write a synthetic dataset in the delimited format")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-classes", dest="num_classes", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--modes-per-class", dest="modes_per_class", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--n-train", dest="n_train", type=int)
    p.add_argument("--n-test", dest="n_test", type=int)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("learn", help="train a checkpointed learner on further classes")
    _add_run_flags(p)
    p.add_argument("--checkpoint", required=True, help="created if missing, updated in place")
    p.add_argument("--classes", required=True, help="comma-separated class labels of the new batch")
    p.set_defaults(func=cmd_learn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UnknownStrategyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IncrLearnError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

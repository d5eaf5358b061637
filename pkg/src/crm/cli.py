"""Command-line entry point: crm {gen,mine,build,train,eval,explain,repro}."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from typing import Dict, Optional, Sequence

from . import pipeline as pl
from .datagen import format_dataset_file, gen_noisy_target, generate, read_dataset_file
from .explain import evaluate, export_json, most_relevant
from .logic import ParseError, format_facts, parse_facts, parse_term
from .mining import format_mined, mine, parse_mined
from .modes import format_modes
from .network import (ConstructionError, CrmError, ModelFormatError, TrainingDiverged, compute_features,
                      encode_targets, load_model, save_model, train)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise pl.ConfigError(message)


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    S = argparse.SUPPRESS
    spec = {
        "task": dict(choices=pl.TASKS, help="trains, krk or custom (default trains)"),
        "modes": dict(help="mode declaration file"),
        "facts": dict(help="background facts file"),
        "data": dict(help="dataset file (id<TAB>label[<TAB>target])"),
        "model": dict(help="model file"),
        "out": dict(help="output path"),
        "seed": dict(type=int),
        "n": dict(type=int, help="number of generated instances"),
        "n-train": dict(type=int, help="training split size"),
        "flip-rate": dict(type=float, help="noisy-target flip rate"),
        "sample-size": dict(type=int, help="vertices sampled per layer"),
        "depth-rho2": dict(type=int),
        "depth-rho1": dict(type=int),
        "activation": dict(),
        "min-support": dict(type=int),
        "min-precision": dict(type=float),
        "max-body": dict(type=int),
        "lr": dict(type=float),
        "epochs": dict(type=int),
        "ensemble": dict(type=int, help="ensemble size for any-match fidelity"),
        "threads": dict(type=int, help="worker processes (default: all cores)"),
    }
    for name in names:
        p.add_argument(f"--{name}", default=S, **spec[name])
    p.add_argument("--config", default=S, help="key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="crm", description="Compositional relational machines.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    data_flags = ("modes", "facts", "data")
    mining = ("max-body", "min-support", "min-precision")
    crm = ("sample-size", "depth-rho2", "depth-rho1", "activation")

    p = sub.add_parser("gen", help="write a generated benchmark to a directory")
    _common(p, "task", "out", "seed", "n", "n-train", "flip-rate")

    p = sub.add_parser("mine", help="enumerate and filter M-simple clauses")
    _common(p, *data_flags, "out", "threads", *mining)

    p = sub.add_parser("build", help="construct an untrained CRM")
    _common(p, *data_flags, "model", "seed", "threads", *mining, *crm)
    p.add_argument("--clauses", help="mined clause file (mined on the fly when absent)")

    p = sub.add_parser("train", help="train a model file, continuing from its state")
    _common(p, "facts", "data", "model", "out", "seed", "lr", "epochs", "threads")

    p = sub.add_parser("eval", help="fidelity of a model on a dataset")
    _common(p, "task", "facts", "data", "model", "out", "threads")

    p = sub.add_parser("explain", help="explanation graph of one instance")
    _common(p, "facts", "data", "model", "out", "threads")
    p.add_argument("--instance", required=True, help="instance id")
    p.add_argument("--format", choices=("json", "dot"), default="json")

    p = sub.add_parser("repro", help="end-to-end runs on the synthetic benchmarks")
    _common(p, "task", "out", "seed", "n", "n-train", "flip-rate", *mining, *crm,
            "lr", "epochs", "ensemble", "threads")
    p.add_argument("--all", action="store_true", help="run both benchmarks")
    return ap


def config_from(args: argparse.Namespace) -> pl.RunConfig:
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(pl.read_config_file(args.config))
    fields = {f.name for f in dataclasses.fields(pl.RunConfig)}
    for k, v in vars(args).items():
        if k in fields:
            values[k] = v
    return pl.RunConfig(**values)


def _need(cfg, *names):
    for name in names:
        if not getattr(cfg, name):
            raise pl.ConfigError(f"--{name} is required")


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands


def cmd_gen(cfg: pl.RunConfig, args) -> int:
    cfg = dataclasses.replace(cfg, task=cfg.task if cfg.task != "custom" else "trains").resolved()
    _need(cfg, "out")
    os.makedirs(cfg.out, exist_ok=True)
    data = generate(cfg.task, cfg.n, cfg.seed)
    if cfg.flip_rate:
        data = gen_noisy_target(data, cfg.flip_rate, cfg.seed)
    tr, te = data.split(cfg.n_train if cfg.n_train is not None else int(round(0.7 * cfg.n)), cfg.seed)
    files = {"modes.pl": format_modes(data.modes, data.types), "facts.pl": format_facts(data.facts),
             "train.tsv": format_dataset_file(tr.instances), "test.tsv": format_dataset_file(te.instances)}
    for name, text in files.items():
        _write(os.path.join(cfg.out, name), text)
    print(f"wrote {len(tr.instances)} training and {len(te.instances)} test instances to {cfg.out}")
    return EXIT_OK


def cmd_mine(cfg: pl.RunConfig, args) -> int:
    cfg = dataclasses.replace(cfg, task="custom").resolved()
    _need(cfg, "modes", "facts", "data")
    data = pl.load_files(cfg.modes, cfg.facts, cfg.data)
    mined = mine(data.modes, data.types, data.instances, data.facts, cfg.mining())
    _write(cfg.out, format_mined(mined))
    _log(f"{len(mined)} clauses passed the filter")
    return EXIT_OK


def cmd_build(cfg: pl.RunConfig, args) -> int:
    cfg = dataclasses.replace(cfg, task="custom").resolved()
    _need(cfg, "modes", "facts", "data", "model")
    data = pl.load_files(cfg.modes, cfg.facts, cfg.data)
    mined = None
    if args.clauses:
        try:
            mined = parse_mined(pl._read(args.clauses, "--clauses"))
        except ParseError as e:
            raise pl.DataError(f"--clauses {args.clauses}: {e}") from None
    b = pl.build(cfg, data, mined)
    save_model(b.crm, cfg.model)
    print(f"built CRM: {b.crm.n} vertices, {len(b.crm.inputs)} inputs, {len(b.crm.outputs)} outputs,"
          f" {len(b.crm.edges)} edges -> {cfg.model}")
    return EXIT_OK


def _model_and_data(cfg: pl.RunConfig):
    _need(cfg, "model", "facts", "data")
    if not os.path.isfile(cfg.model):
        raise pl.ConfigError(f"--model {cfg.model}: no such file")
    crm = load_model(cfg.model)
    try:
        facts, _ = parse_facts(pl._read(cfg.facts, "--facts"))
        data = read_dataset_file(pl._read(cfg.data, "--data"))
    except pl.ConfigError:
        raise
    except ValueError as e:
        raise pl.DataError(str(e)) from None
    return crm, facts, data


def cmd_train(cfg: pl.RunConfig, args) -> int:
    cfg = dataclasses.replace(cfg, task="custom").resolved()
    crm, facts, data = _model_and_data(cfg)
    F = compute_features(crm, facts, data, cfg.threads)
    y = encode_targets(crm, data)
    start = crm.epochs_done
    losses = train(crm, F, y, cfg.training())
    for k, loss in enumerate(losses, start + 1):
        print(f"epoch {k}\tloss {loss:.6f}")
    save_model(crm, cfg.out or cfg.model)
    return EXIT_OK


def cmd_eval(cfg: pl.RunConfig, args) -> int:
    cfg = cfg.resolved()
    crm, facts, data = _model_and_data(cfg)
    F = compute_features(crm, facts, data, cfg.threads)
    theories = pl.theories_for(cfg.task)
    rep = evaluate(crm, data, F, theories)
    rows = [("Metric", "Value"), ("instances", str(len(data))),
            ("predictive", pl._fmt(rep.predictive)), ("explanatory", pl._fmt(rep.explanatory)),
            ("CP/IP", f"{rep.cp}/{rep.ip}")]
    if theories is not None:
        rows.append(("CE/IE", f"{rep.ce}/{rep.ie}"))
    print("\n".join(pl.align(rows)))
    if cfg.out:
        _write(cfg.out, json.dumps(rep.to_json(), indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_explain(cfg: pl.RunConfig, args) -> int:
    cfg = dataclasses.replace(cfg, task="custom").resolved()
    crm, facts, data = _model_and_data(cfg)
    try:
        wanted = parse_term(args.instance)
    except ParseError as e:
        raise pl.ConfigError(f"--instance: {e}") from None
    match = [a for a in data if a.id == wanted]
    if not match:
        raise pl.DataError(f"--instance {args.instance} is not in {cfg.data}")
    a = match[0]
    f = compute_features(crm, facts, [a], 1)[0]
    pred = crm.classes[crm.predict(f.astype(float))[0]]
    eg = most_relevant(crm, a, f)
    if args.format == "dot":
        text = eg.to_dot() if eg is not None else "digraph explanation {\n}\n"
    else:
        text = export_json(eg, a, pred)
    _write(cfg.out, text)
    return EXIT_OK


def cmd_repro(cfg: pl.RunConfig, args) -> int:
    tasks = ["trains", "krk"] if args.all else [cfg.task if cfg.task != "custom" else "trains"]
    results = []
    for task in tasks:
        run_cfg = dataclasses.replace(cfg, task=task)
        t0 = time.time()
        results.append(pl.run_experiment(run_cfg))
        _log(f"{task}: {time.time() - t0:.1f}s")
    table = pl.fidelity_table(results)
    sys.stdout.write(table)
    if cfg.out:
        _write(cfg.out, pl.report_json(results, cfg))
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "mine": cmd_mine, "build": cmd_build, "train": cmd_train,
            "eval": cmd_eval, "explain": cmd_explain, "repro": cmd_repro}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = config_from(args)
        return COMMANDS[args.command](cfg, args)
    except pl.ConfigError as e:
        print(f"crm: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDiverged as e:
        print(f"crm: training diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except (pl.DataError, ModelFormatError, ConstructionError, CrmError, ParseError, ValueError) as e:
        print(f"crm: data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

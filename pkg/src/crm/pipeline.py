"""End-to-end runs: data, mining, construction, training and fidelity reports."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .datagen import CLASSES, Dataset, acceptable_theories, gen_noisy_target, generate, read_dataset_file
from .explain import FidelityReport, baseline_explainer, evaluate, majority_baseline, predictive_fidelity
from .logic import parse_facts
from .mining import MiningConfig, MinedClause, mine
from .modes import ModeSet, TypeDefs, extend_with_equality, parse_modes, validate_constraints
from .network import (ACTIVATIONS, Crm, FeatureEvaluator, StatsFilter, TrainConfig, compute_features,
                      encode_targets, random_crm, train)

TASKS = ("trains", "krk", "custom")

# Per-task defaults for everything the user leaves unset.
PRESETS: Dict[str, Dict[str, object]] = {
    "trains": dict(n=1000, n_train=700, sample_size=400, depth_rho2=1, depth_rho1=1,
                   activation="identity", epochs=5),
    "krk": dict(n=20000, n_train=10000, sample_size=1000, depth_rho2=3, depth_rho1=0,
                activation="identity", epochs=10),
    "custom": dict(n=None, n_train=None, sample_size=50, depth_rho2=3, depth_rho1=0,
                   activation="relu", epochs=5),
}


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass
class RunConfig:
    task: str = "trains"
    modes: Optional[str] = None
    facts: Optional[str] = None
    data: Optional[str] = None
    model: Optional[str] = None
    out: Optional[str] = None
    seed: int = 0
    n: Optional[int] = None
    n_train: Optional[int] = None
    flip_rate: float = 0.0
    max_body: int = 2
    min_support: int = 10
    min_precision: float = 0.5
    sample_size: Optional[int] = None
    depth_rho2: Optional[int] = None
    depth_rho1: Optional[int] = None
    activation: Optional[str] = None
    lr: float = 0.001
    epochs: Optional[int] = None
    ensemble: int = 1
    threads: Optional[int] = None

    def resolved(self) -> "RunConfig":
        """Copy with task presets filled in and values checked."""
        if self.task not in TASKS:
            raise ConfigError(f"--task must be one of {', '.join(TASKS)}, got {self.task!r}")
        out = dataclasses.replace(self)
        for k, v in PRESETS[self.task].items():
            if getattr(out, k) is None:
                setattr(out, k, v)
        if out.threads is None:
            out.threads = os.cpu_count() or 1
        checks = [
            (out.sample_size is None or out.sample_size >= 1, "--sample-size must be at least 1"),
            (out.depth_rho2 >= 0 and out.depth_rho1 >= 0, "--depth-rho2/--depth-rho1 must be non-negative"),
            (out.epochs >= 0, "--epochs must be non-negative"),
            (out.lr > 0, "--lr must be positive"),
            (out.ensemble >= 1, "--ensemble must be at least 1"),
            (out.threads >= 1, "--threads must be at least 1"),
            (out.max_body >= 0, "--max-body must be non-negative"),
            (out.min_support >= 0, "--min-support must be non-negative"),
            (0 <= out.min_precision <= 1, "--min-precision must lie in [0, 1]"),
            (0 <= out.flip_rate < 0.5, "--flip-rate must lie in [0, 0.5)"),
            (out.activation in ACTIVATIONS, f"--activation must be one of {', '.join(ACTIVATIONS)}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return out

    def mining(self) -> MiningConfig:
        return MiningConfig(self.max_body, self.min_support, self.min_precision)

    def training(self, seed: Optional[int] = None) -> TrainConfig:
        return TrainConfig(self.lr, self.epochs, seed=self.seed if seed is None else seed)


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def coerce(key: str, value: str):
    """Parse a textual config value for field ``key``."""
    name = key.replace("-", "_")
    if name not in FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = FIELD_TYPES[name]
    try:
        if "int" in kind:
            return int(value)
        if "float" in kind:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    return value


def read_config_file(path: str) -> Dict[str, object]:
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"--config {path}: {e.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = coerce(k, v)
    return out


# ---------------------------------------------------------------------------
# Data


def _read(path: str, flag: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise ConfigError(f"{flag} {path}: {e.strerror}") from None


def load_modes(path: str) -> tuple:
    try:
        modes, types = parse_modes(_read(path, "--modes"))
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise DataError(f"--modes {path}: {e}") from None
    report = validate_constraints(modes)
    if not report:
        raise DataError(f"--modes {path}: {report}")
    return modes, types


def load_files(modes_path: str, facts_path: str, data_path: str, task: str = "custom") -> Dataset:
    modes, types = load_modes(modes_path)
    try:
        facts, _ = parse_facts(_read(facts_path, "--facts"))
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise DataError(f"--facts {facts_path}: {e}") from None
    try:
        instances = read_dataset_file(_read(data_path, "--data"))
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise DataError(f"--data {data_path}: {e}") from None
    if not instances:
        raise DataError(f"--data {data_path}: no instances")
    return Dataset(task, instances, facts, modes, types)


def load_dataset(cfg: RunConfig) -> Dataset:
    """Files when all three paths are given, otherwise a generated benchmark."""
    paths = (cfg.modes, cfg.facts, cfg.data)
    if all(paths):
        return load_files(cfg.modes, cfg.facts, cfg.data, cfg.task)
    if cfg.task == "custom":
        raise ConfigError("task custom needs --modes, --facts and --data")
    if any(paths):
        raise ConfigError("give all of --modes, --facts and --data, or none of them")
    return generate(cfg.task, cfg.n, cfg.seed)


def theories_for(task: str):
    return acceptable_theories().get(task)


# ---------------------------------------------------------------------------
# Runs


@dataclass
class Built:
    crm: Crm
    mined: List[MinedClause]
    train_features: np.ndarray


def build(cfg: RunConfig, data: Dataset, mined: Optional[Sequence[MinedClause]] = None,
          seed: Optional[int] = None) -> Built:
    """Mine (unless given) and construct a random CRM from the data's instances."""
    seed = cfg.seed if seed is None else seed
    mcfg = cfg.mining()
    if mined is None:
        mined = mine(data.modes, data.types, data.instances, data.facts, mcfg)
    if not mined:
        raise DataError("no mined clause passes the support/precision filter")
    ev = FeatureEvaluator(data.facts, data.instances, cfg.threads)
    cols: Dict[int, np.ndarray] = {}
    modes = extend_with_equality(data.modes)
    crm = random_crm([m.clause for m in mined], cfg.activation, cfg.sample_size, cfg.depth_rho1,
                     cfg.depth_rho2, seed, StatsFilter(ev, mcfg), modes, data.types,
                     classes=CLASSES, columns=cols)
    crm.modes_hash = data.modes.digest()
    crm.init_weights(seed)
    return Built(crm, list(mined), ev.matrix(crm, cols))


@dataclass
class RunResult:
    task: str
    seed: int
    n_train: int
    n_test: int
    n_mined: int
    n_vertices: int
    n_outputs: int
    losses: List[float]
    crm: FidelityReport
    majority: FidelityReport
    random_feature: Optional[FidelityReport]
    ensemble: List[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "task": self.task, "seed": self.seed, "n_train": self.n_train, "n_test": self.n_test,
            "mined_clauses": self.n_mined, "vertices": self.n_vertices, "outputs": self.n_outputs,
            "losses": [round(x, 6) for x in self.losses],
            "crm": self.crm.to_json(), "majority": self.majority.to_json(),
            "random_feature": self.random_feature.to_json() if self.random_feature else None,
            "ensemble_any_match": [round(x, 6) for x in self.ensemble],
        }


def run_experiment(cfg: RunConfig) -> RunResult:
    """Generate or load, split, mine, construct, train and score one CRM
    (plus ``cfg.ensemble - 1`` more for the any-match protocol)."""
    cfg = cfg.resolved()
    data = load_dataset(cfg)
    if cfg.flip_rate:
        data = gen_noisy_target(data, cfg.flip_rate, cfg.seed)
    n_train = cfg.n_train if cfg.n_train is not None else int(round(0.7 * len(data.instances)))
    if not 0 < n_train < len(data.instances):
        raise ConfigError(f"training size {n_train} leaves no training or no test data")
    tr, te = data.split(n_train, cfg.seed)
    mined = mine(tr.modes, tr.types, tr.instances, tr.facts, cfg.mining())
    theories = theories_for(data.task) if not cfg.flip_rate else None

    members = []
    for j in range(cfg.ensemble):
        b = build(cfg, tr, mined, seed=cfg.seed + j)
        losses = train(b.crm, b.train_features, encode_targets(b.crm, tr.instances), cfg.training(cfg.seed + j))
        Fte = compute_features(b.crm, data.facts, te.instances, cfg.threads)
        members.append((b, losses, Fte))

    b, losses, Fte = members[0]
    report = evaluate(b.crm, te.instances, Fte, theories)
    majority = majority_baseline(tr.instances, te.instances)
    rf = None
    if theories is not None:
        inputs = b.crm.inputs
        rf = baseline_explainer(te.instances, [b.crm.clause(i) for i in inputs], Fte[:, inputs],
                                theories, cfg.seed)
    ens = any_match_curve([m[0].crm for m in members], [m[2] for m in members], te.instances)
    return RunResult(data.task, cfg.seed, len(tr.instances), len(te.instances), len(mined),
                     b.crm.n, len(b.crm.outputs), losses, report, majority, rf,
                     ens if cfg.ensemble > 1 else [])


def any_match_curve(crms: Sequence[Crm], features: Sequence[np.ndarray], data) -> List[float]:
    """Predictive fidelity of the first k members under the any-match rule, k = 1..len."""
    targets = np.array([a.target_class for a in data])
    hit = np.zeros(len(targets), dtype=bool)
    out = []
    for crm, F in zip(crms, features):
        preds = np.array(crm.classes)[crm.predict_batch(F)]
        hit |= preds == targets
        out.append(float(hit.mean()) if len(hit) else 0.0)
    return out


# ---------------------------------------------------------------------------
# Reports


def _fmt(x: Optional[float]) -> str:
    return "-" if x is None else f"{x:.3f}"


def fidelity_table(results: Sequence[RunResult]) -> str:
    """Aligned text table: one row per run, then any-match curves."""
    rows = [("Problem", "Seed", "CRM pred", "CRM expl", "Base pred", "Base expl")]
    for r in results:
        rows.append((r.task.capitalize() if r.task != "krk" else "Chess", str(r.seed),
                     _fmt(r.crm.predictive), _fmt(r.crm.explanatory), _fmt(r.majority.predictive),
                     _fmt(r.random_feature.explanatory if r.random_feature else None)))
    lines = align(rows)
    for r in results:
        if r.ensemble:
            curve = "  ".join(f"k={k}: {x:.3f}" for k, x in enumerate(r.ensemble, 1))
            lines.append(f"any-match ({r.task}, seed {r.seed}): {curve}")
    return "\n".join(lines) + "\n"


def align(rows: Sequence[Sequence[str]]) -> List[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def report_json(results: Sequence[RunResult], cfg: Optional[RunConfig] = None) -> str:
    doc = {"runs": [r.to_json() for r in results]}
    if cfg is not None:
        c = dataclasses.asdict(cfg)
        for k in ("threads", "out"):  # neither affects results
            c.pop(k, None)
        doc["config"] = c
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"

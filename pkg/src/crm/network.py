"""CRM structures, gated forward computation, training and relevance."""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import GIVEN, RHO1, RHO2, EquivalenceIndex, _check_rho1, rho1, rho2
from .logic import FactStore, Instance, OrderedClause, equivalent, evaluate_feature, parse_clause
from .mining import MiningConfig, passes, support_precision
from .modes import ModeSet, TypeDefs

MODEL_VERSION = 1
ONE = "one"  # the constant-pass activation of input vertices


# ---------------------------------------------------------------------------
# Activations

def _relu(x):
    return np.maximum(x, 0.0)


def _relu_grad(x):
    return (x > 0).astype(float)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


ACTIVATIONS: Dict[str, Tuple[Callable, Callable]] = {
    "relu": (_relu, _relu_grad),
    "identity": (lambda x: x, lambda x: np.ones_like(x)),
    "tanh": (np.tanh, lambda x: 1.0 - np.tanh(x) ** 2),
    "sigmoid": (_sigmoid, lambda x: _sigmoid(x) * (1.0 - _sigmoid(x))),
    "leaky_relu": (lambda x: np.where(x > 0, x, 0.01 * x), lambda x: np.where(x > 0, 1.0, 0.01)),
}


class CrmError(ValueError):
    pass


class ConstructionError(CrmError):
    pass


class TrainingDiverged(CrmError):
    pass


class ModelFormatError(CrmError):
    pass


@dataclass
class Vertex:
    clause: OrderedClause
    op: str = GIVEN
    parents: Tuple[int, ...] = ()
    layer: int = 0


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 5
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    loss: str = "cross_entropy"
    seed: int = 0
    early_stop_patience: Optional[int] = None

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class Crm:
    """The 7-tuple (V, I, O, E, φ, ψ, h) with an affine-softmax readout as h."""

    def __init__(self, vertices: Sequence[Vertex], activation: str = "relu",
                 classes: Sequence[str] = ("+", "-"), modes_hash: str = ""):
        if activation not in ACTIVATIONS:
            raise CrmError(f"unknown activation {activation!r}")
        self.vertices = list(vertices)
        self.activation = activation
        self.classes = list(classes)
        self.modes_hash = modes_hash
        self.inputs = [i for i, v in enumerate(self.vertices) if v.op == GIVEN]
        self.edges: List[Tuple[int, int]] = []
        for i, v in enumerate(self.vertices):
            for p in dict.fromkeys(v.parents):  # a rho2 child of (u, u) has one edge from u
                if p >= i:
                    raise CrmError(f"vertex {i} has a later parent {p}")
                self.edges.append((p, i))
        has_out = {u for u, _ in self.edges}
        self.outputs = [i for i in range(len(self.vertices)) if i not in has_out]
        self.weights = np.zeros(len(self.edges))
        self.W = np.zeros((len(self.classes), len(self.outputs)))
        self.b = np.zeros(len(self.classes))
        self.train_config: Optional[TrainConfig] = None
        self.opt_state: Dict[str, object] = {}
        self.epochs_done = 0
        self.loss_history: List[float] = []
        self._plan()

    # structure ---------------------------------------------------------
    def _plan(self):
        n = len(self.vertices)
        self.n = n
        self.is_input = np.array([v.op == GIVEN for v in self.vertices], dtype=bool)
        layers = sorted({v.layer for v in self.vertices if v.op != GIVEN})
        self.layer_plan = []
        edge_idx = {e: k for k, e in enumerate(self.edges)}
        for L in layers:
            verts = np.array([i for i, v in enumerate(self.vertices) if v.layer == L and v.op != GIVEN])
            local = {int(v): k for k, v in enumerate(verts)}
            eids, srcs, dsts = [], [], []
            for v in verts:
                for p in dict.fromkeys(self.vertices[v].parents):
                    eids.append(edge_idx[(p, int(v))])
                    srcs.append(p)
                    dsts.append(local[int(v)])
            self.layer_plan.append((verts, np.array(eids, dtype=int), np.array(srcs, dtype=int),
                                    np.array(dsts, dtype=int)))
        self.out_idx = np.array(self.outputs, dtype=int)

    def init_weights(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        fan_in = np.array([len(set(self.vertices[v].parents)) for _, v in self.edges], dtype=float)
        bound = 1.0 / np.sqrt(np.maximum(fan_in, 1.0))
        self.weights = rng.uniform(-1.0, 1.0, len(self.edges)) * bound
        wb = 1.0 / math.sqrt(max(len(self.outputs), 1))
        self.W = rng.uniform(-wb, wb, (len(self.classes), len(self.outputs)))
        self.b = np.zeros(len(self.classes))
        self.opt_state = {}
        self.epochs_done = 0
        self.loss_history = []

    def clause(self, v: int) -> OrderedClause:
        return self.vertices[v].clause

    def predecessors(self, v: int) -> Tuple[int, ...]:
        return self.vertices[v].parents

    def num_parameters(self) -> int:
        return len(self.weights) + self.W.size + self.b.size

    # computation -------------------------------------------------------
    def forward(self, f: np.ndarray):
        """h values, pre-activations and class probabilities for one instance.

        ``f`` holds the 0/1 feature values of every vertex for the instance.
        """
        g = ACTIVATIONS[self.activation][0]
        h = np.where(self.is_input, f, 0.0).astype(float)
        pre = np.zeros(self.n)
        for verts, eids, srcs, dsts in self.layer_plan:
            s = np.bincount(dsts, weights=self.weights[eids] * h[srcs], minlength=len(verts))
            pre[verts] = s
            h[verts] = f[verts] * g(s)
        z = self.W @ h[self.out_idx] + self.b
        z = z - z.max()
        p = np.exp(z)
        p /= p.sum()
        return h, pre, p

    def forward_batch(self, F: np.ndarray):
        """Vectorised forward pass over the rows of a feature matrix."""
        g = ACTIVATIONS[self.activation][0]
        F = np.asarray(F, dtype=float)
        H = np.where(self.is_input[None, :], F, 0.0)
        for verts, eids, srcs, dsts in self.layer_plan:
            contrib = H[:, srcs] * self.weights[eids][None, :]
            S = np.zeros((F.shape[0], len(verts)))
            np.add.at(S.T, dsts, contrib.T)
            H[:, verts] = F[:, verts] * g(S)
        Z = H[:, self.out_idx] @ self.W.T + self.b
        Z = Z - Z.max(axis=1, keepdims=True)
        P = np.exp(Z)
        P /= P.sum(axis=1, keepdims=True)
        return H, P

    def loss_and_grads(self, f: np.ndarray, y: int):
        h, pre, p = self.forward(f)
        loss = -math.log(max(p[y], 1e-300))
        dz = p.copy()
        dz[y] -= 1.0
        hO = h[self.out_idx]
        dW = np.outer(dz, hO)
        db = dz
        dh = np.zeros(self.n)
        dh[self.out_idx] += self.W.T @ dz
        dw = np.zeros(len(self.weights))
        gprime = ACTIVATIONS[self.activation][1]
        for verts, eids, srcs, dsts in reversed(self.layer_plan):
            dpre = dh[verts] * f[verts] * gprime(pre[verts])
            dd = dpre[dsts]
            dw[eids] = dd * h[srcs]
            dh += np.bincount(srcs, weights=dd * self.weights[eids], minlength=self.n)
        return loss, dw, dW, db

    def predict(self, f: np.ndarray) -> Tuple[int, np.ndarray]:
        _, _, p = self.forward(f)
        return int(np.argmax(p)), p

    def predict_batch(self, F: np.ndarray) -> np.ndarray:
        _, P = self.forward_batch(F)
        return np.argmax(P, axis=1)


def relevance(crm: Crm, h: np.ndarray, f: np.ndarray) -> List[int]:
    """Gated-on outputs by decreasing |h|, ties to the lower index."""
    eligible = [o for o in crm.outputs if f[o]]
    return sorted(eligible, key=lambda o: (-abs(h[o]), o))


# ---------------------------------------------------------------------------
# Feature values


class FeatureEvaluator:
    """Feature columns over a fixed list of instances.

    A ρ2 child is the conjunction of its parents (their bodies share only the
    head variables); a ρ1 child is evaluated only where its parent fires.
    """

    def __init__(self, facts: FactStore, instances: Sequence[Instance], threads: int = 1):
        self.facts = facts
        self.instances = list(instances)
        self.threads = threads

    def direct(self, clause: OrderedClause, mask: Optional[np.ndarray] = None) -> np.ndarray:
        out = np.zeros(len(self.instances), dtype=np.uint8)
        rows = range(len(self.instances)) if mask is None else np.flatnonzero(mask)
        for i in rows:
            out[i] = evaluate_feature(clause, self.facts, self.instances[i])
        return out

    def direct_many(self, clauses: Sequence[OrderedClause]) -> List[np.ndarray]:
        if self.threads > 1 and len(clauses) > 1:
            from concurrent.futures import ProcessPoolExecutor
            import multiprocessing as mp
            global _POOL_EVAL
            _POOL_EVAL = self
            with ProcessPoolExecutor(self.threads, mp_context=mp.get_context("fork")) as ex:
                return list(ex.map(_pool_direct, range(len(clauses)), [clauses] * len(clauses)))
        return [self.direct(c) for c in clauses]

    def child(self, op: str, clause: OrderedClause, parent_cols: Sequence[np.ndarray]) -> np.ndarray:
        if op == RHO2:
            return parent_cols[0] & parent_cols[1]
        if op == RHO1:
            return self.direct(clause, parent_cols[0])
        return self.direct(clause)

    def matrix(self, crm: Crm, known: Optional[Dict[int, np.ndarray]] = None) -> np.ndarray:
        cols: Dict[int, np.ndarray] = dict(known or {})
        missing = [i for i in crm.inputs if i not in cols]
        for i, col in zip(missing, self.direct_many([crm.clause(i) for i in missing])):
            cols[i] = col
        for i, v in enumerate(crm.vertices):
            if i not in cols:
                cols[i] = self.child(v.op, v.clause, [cols[p] for p in v.parents])
        F = np.zeros((len(self.instances), crm.n), dtype=np.uint8)
        for i, col in cols.items():
            F[:, i] = col
        return F


_POOL_EVAL: Optional[FeatureEvaluator] = None


def _pool_direct(k, clauses):
    return _POOL_EVAL.direct(clauses[k])


def compute_features(crm: Crm, facts: FactStore, instances: Sequence[Instance], threads: int = 1) -> np.ndarray:
    return FeatureEvaluator(facts, instances, threads).matrix(crm)


# ---------------------------------------------------------------------------
# Construction


@dataclass
class StatsFilter:
    """Support/precision filter over the training instances of an evaluator."""

    evaluator: FeatureEvaluator
    cfg: MiningConfig

    def __post_init__(self):
        self.classes = [a.target_class for a in self.evaluator.instances]

    def __call__(self, clause: OrderedClause, column: np.ndarray) -> bool:
        support, precision = support_precision(column, self.classes)
        return passes(support, precision, self.cfg)


def construct_crm(phi: Sequence[OrderedClause], g: str, d: int, modes: Optional[ModeSet] = None,
                  types: Optional[TypeDefs] = None, max_vertices: int = 5000,
                  classes: Sequence[str] = ("+", "-")) -> Crm:
    """Exhaustive layered construction.

    Layer j holds every ρ1 child of every existing vertex and every ρ2 child of
    every ordered pair of existing vertices; an (operator, parents) combination
    is expanded only once, and equivalent children within a layer are merged.
    """
    vertices = [Vertex(c) for c in phi]
    done = set()
    for j in range(1, d + 1):
        layer_idx = EquivalenceIndex()
        new: List[Vertex] = []
        existing = list(range(len(vertices)))
        if modes is not None:
            for v in existing:
                for k, ch in enumerate(rho1(vertices[v].clause, modes, types)):
                    key = (RHO1, (v,), k)
                    if key in done:
                        continue
                    done.add(key)
                    if layer_idx.add(ch):
                        new.append(Vertex(ch, RHO1, (v,), j))
        for a in existing:
            for b in existing:
                key = (RHO2, (a, b))
                if key in done:
                    continue
                done.add(key)
                ch = rho2(vertices[a].clause, vertices[b].clause)
                if layer_idx.add(ch):
                    new.append(Vertex(ch, RHO2, (a, b), j))
        if len(vertices) + len(new) > max_vertices:
            raise ConstructionError(f"vertex budget {max_vertices} exceeded at layer {j}")
        vertices.extend(new)
    return Crm(vertices, g, classes, modes.digest() if modes is not None else "")


def random_crm(phi: Sequence[OrderedClause], g: str, s: int, d_rho1: int, d_rho2: int, seed: int,
               filter: Optional[StatsFilter] = None, modes: Optional[ModeSet] = None,
               types: Optional[TypeDefs] = None, max_retries: int = 20,
               classes: Sequence[str] = ("+", "-"),
               columns: Optional[Dict[int, np.ndarray]] = None) -> Crm:
    """Randomised layered construction: ρ2 layers (one parent from the inputs,
    one from the previous layer) followed by ρ1 layers.

    With a filter, each slot is resampled up to ``max_retries`` times until its
    child passes; children equivalent to one already in the layer count as
    failures.  ``columns`` (if given) receives the training feature column of
    every vertex.
    """
    if s < 1:
        raise ValueError("sample size must be at least 1")
    if d_rho1 > 0 and modes is None:
        raise ValueError("rho1 layers need mode declarations")
    rng = random.Random(seed)
    vertices = [Vertex(c) for c in phi]
    inputs = list(range(len(vertices)))
    cols = columns if columns is not None else {}
    ev = filter.evaluator if filter is not None else None
    if ev is not None:
        for i, col in zip(inputs, ev.direct_many(list(phi))):
            cols[i] = col
    prev = inputs
    rho1_cache: Dict[int, List[OrderedClause]] = {}
    tried: Dict[tuple, Optional[np.ndarray]] = {}  # filter outcomes, so resamples are cheap
    for j in range(1, d_rho1 + d_rho2 + 1):
        op = RHO2 if j <= d_rho2 else RHO1
        layer_idx = EquivalenceIndex()
        layer: List[int] = []
        for _ in range(s):
            for _attempt in range(max_retries + 1):
                if op == RHO2:
                    p = (rng.choice(inputs), rng.choice(prev))
                    ch = rho2(vertices[p[0]].clause, vertices[p[1]].clause)
                else:
                    v = rng.choice(prev)
                    if v not in rho1_cache:
                        rho1_cache[v] = rho1(vertices[v].clause, modes, types)
                    opts = rho1_cache[v]
                    if not opts:
                        continue
                    p = (v,)
                    ch = rng.choice(opts)
                if layer_idx.find(ch) is not None:
                    continue
                if ev is not None:
                    key = (op, p, ch)
                    if key not in tried:
                        col = ev.child(op, ch, [cols[q] for q in p])
                        tried[key] = col if filter(ch, col) else None
                    col = tried[key]
                    if col is None:
                        continue
                layer_idx.add(ch)
                idx = len(vertices)
                vertices.append(Vertex(ch, op, p, j))
                layer.append(idx)
                if ev is not None:
                    cols[idx] = col
                break
        if not layer:
            raise ConstructionError(f"layer {j}: no {op} child passed after {max_retries} retries")
        prev = layer
    return Crm(vertices, g, classes, modes.digest() if modes is not None else "")


def check_structure(crm: Crm, modes: Optional[ModeSet] = None, types: Optional[TypeDefs] = None) -> List[str]:
    """Problems with the derivation-graph invariant (empty when valid)."""
    problems = []
    has_out = {u for u, _ in crm.edges}
    for i, v in enumerate(crm.vertices):
        if v.op == GIVEN:
            if v.parents:
                problems.append(f"input vertex {i} has parents")
            continue
        if v.op == RHO2:
            if len(v.parents) != 2 or not equivalent(v.clause, rho2(*(crm.clause(p) for p in v.parents))):
                problems.append(f"vertex {i} is not a rho2 child of {v.parents}")
        elif v.op == RHO1:
            parent = crm.clause(v.parents[0]) if len(v.parents) == 1 else None
            if parent is None or not _check_rho1(v.clause, parent, modes, types):
                problems.append(f"vertex {i} is not a rho1 child of {v.parents}")
        else:
            problems.append(f"vertex {i} has unknown operator {v.op}")
    if sorted(crm.outputs) != [i for i in range(crm.n) if i not in has_out]:
        problems.append("outputs are not the sink vertices")
    if not np.all(np.isfinite(crm.weights)):
        problems.append("non-finite edge weights")
    return problems


# ---------------------------------------------------------------------------
# Training


def encode_targets(crm: Crm, data: Sequence[Instance]) -> np.ndarray:
    idx = {c: k for k, c in enumerate(crm.classes)}
    try:
        return np.array([idx[a.target_class] for a in data], dtype=int)
    except KeyError as e:
        raise CrmError(f"class {e.args[0]!r} is not one of {crm.classes}") from None


def _adam_step(crm: Crm, grads, cfg: TrainConfig):
    params = ("weights", "W", "b")
    st = crm.opt_state
    if cfg.optimizer == "sgd":
        for name, gr in zip(params, grads):
            setattr(crm, name, getattr(crm, name) - cfg.learning_rate * gr)
        return
    if not st:
        st.update(t=0, **{f"m_{n}": np.zeros_like(getattr(crm, n)) for n in params},
                  **{f"v_{n}": np.zeros_like(getattr(crm, n)) for n in params})
    st["t"] += 1
    t = st["t"]
    c1 = 1.0 - cfg.beta1 ** t
    c2 = 1.0 - cfg.beta2 ** t
    for name, gr in zip(params, grads):
        m = st[f"m_{name}"] = cfg.beta1 * st[f"m_{name}"] + (1 - cfg.beta1) * gr
        v = st[f"v_{name}"] = cfg.beta2 * st[f"v_{name}"] + (1 - cfg.beta2) * gr * gr
        step = cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
        setattr(crm, name, getattr(crm, name) - step)


def mean_loss(crm: Crm, F: np.ndarray, y: np.ndarray) -> float:
    _, P = crm.forward_batch(F)
    return float(-np.mean(np.log(np.maximum(P[np.arange(len(y)), y], 1e-300))))


def train(crm: Crm, F: np.ndarray, y: np.ndarray, cfg: TrainConfig,
          val: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> List[float]:
    """Per-instance updates over seeded shuffles, one shuffle per epoch.

    Returns the mean training loss of each epoch.  Epoch numbering continues
    from ``crm.epochs_done`` so a saved model resumes the same trajectory.
    """
    crm.train_config = cfg
    F = np.asarray(F, dtype=float)
    best, bad = math.inf, 0
    history = []
    for _ in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, crm.epochs_done]).permutation(len(y))
        total = 0.0
        for i in order:
            loss, dw, dW, db = crm.loss_and_grads(F[i], int(y[i]))
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {crm.epochs_done + 1}")
            total += loss
            _adam_step(crm, (dw, dW, db), cfg)
        if not (np.all(np.isfinite(crm.weights)) and np.all(np.isfinite(crm.W))):
            raise TrainingDiverged(f"non-finite parameters at epoch {crm.epochs_done + 1}")
        crm.epochs_done += 1
        epoch_loss = total / max(len(y), 1)
        history.append(epoch_loss)
        crm.loss_history.append(epoch_loss)
        if val is not None and cfg.early_stop_patience is not None:
            vl = mean_loss(crm, *val)
            if vl < best - 1e-12:
                best, bad = vl, 0
            else:
                bad += 1
                if bad >= cfg.early_stop_patience:
                    break
    return history


# ---------------------------------------------------------------------------
# Persistence


def to_dict(crm: Crm) -> dict:
    st = crm.opt_state
    opt = None
    if st:
        opt = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in st.items()}
    return {
        "format": "crm-model",
        "version": MODEL_VERSION,
        "modes_hash": crm.modes_hash,
        "classes": crm.classes,
        "activation": crm.activation,
        "clauses": [str(v.clause) for v in crm.vertices],
        "vertices": [{"id": i, "op": v.op, "parents": list(v.parents), "layer": v.layer}
                     for i, v in enumerate(crm.vertices)],
        "inputs": crm.inputs,
        "outputs": crm.outputs,
        "edges": [{"from": u, "to": v, "weight": float(w)} for (u, v), w in zip(crm.edges, crm.weights)],
        "readout": {"W": crm.W.tolist(), "b": crm.b.tolist()},
        "train_config": asdict(crm.train_config) if crm.train_config else None,
        "optimizer_state": opt,
        "epochs_done": crm.epochs_done,
        "loss_history": crm.loss_history,
    }


def from_dict(doc: dict) -> Crm:
    if doc.get("format") != "crm-model":
        raise ModelFormatError("not a CRM model document")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"model version {doc.get('version')} is not supported (expected {MODEL_VERSION})")
    try:
        clauses = [parse_clause(c) for c in doc["clauses"]]
        vs = [Vertex(clauses[v["id"]], v["op"], tuple(v["parents"]), v["layer"]) for v in doc["vertices"]]
        crm = Crm(vs, doc["activation"], doc["classes"], doc.get("modes_hash", ""))
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ModelFormatError(f"malformed structure: {e}") from None
    edge_pos = {e: k for k, e in enumerate(crm.edges)}
    if len(doc["edges"]) != len(crm.edges):
        raise ModelFormatError(f"expected {len(crm.edges)} edges, found {len(doc['edges'])}")
    for k, e in enumerate(doc["edges"]):
        try:
            key = (int(e["from"]), int(e["to"]))
            w = float(e["weight"])
        except (KeyError, TypeError, ValueError):
            raise ModelFormatError(f"edge {k} is malformed: {e!r}") from None
        if key not in edge_pos:
            raise ModelFormatError(f"edge {k} ({key[0]}->{key[1]}) does not follow the vertex parents")
        if not math.isfinite(w):
            raise ModelFormatError(f"edge {k} ({key[0]}->{key[1]}) has a non-finite weight")
        crm.weights[edge_pos[key]] = w
    try:
        crm.W = np.array(doc["readout"]["W"], dtype=float).reshape(len(crm.classes), len(crm.outputs))
        crm.b = np.array(doc["readout"]["b"], dtype=float).reshape(len(crm.classes))
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"malformed readout: {e}") from None
    if doc.get("train_config"):
        crm.train_config = TrainConfig(**doc["train_config"])
    if doc.get("optimizer_state"):
        crm.opt_state = {k: (np.array(v, dtype=float) if isinstance(v, list) else v)
                         for k, v in doc["optimizer_state"].items()}
        for k in ("m_W", "v_W"):
            if k in crm.opt_state:
                crm.opt_state[k] = crm.opt_state[k].reshape(crm.W.shape)
    crm.epochs_done = int(doc.get("epochs_done", 0))
    crm.loss_history = list(doc.get("loss_history", []))
    return crm


def save_model(crm: Crm, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_dict(crm), fh, indent=1)
        fh.write("\n")


def load_model(path) -> Crm:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"{path}: {e}") from None
    return from_dict(doc)


def to_dot(crm: Crm) -> str:
    lines = ["digraph crm {", "  rankdir=LR;", "  node [shape=box, fontsize=10];"]
    outs = set(crm.outputs)
    for i, v in enumerate(crm.vertices):
        style = ", style=bold" if i in outs else ""
        label = str(v.clause).replace('"', '\\"')
        lines.append(f'  v{i} [label="v{i}: {label}"{style}];')
    for (u, v), w in zip(crm.edges, crm.weights):
        lines.append(f'  v{u} -> v{v} [label="{w:.3g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

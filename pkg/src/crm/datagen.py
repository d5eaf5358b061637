"""Synthetic benchmarks: east-west style trains and king-rook-king legality."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .logic import Compound, Const, FactStore, Instance, Literal, OrderedClause, Term, parse_clause, parse_term
from .modes import ModeSet, TypeDefs, parse_modes, validate_constraints

POS, NEG = "+", "-"
CLASSES = (POS, NEG)

SHAPES = ("rectangle", "u_shaped", "bucket", "hexagon")
LOAD_SHAPES = ("circle", "triangle", "square")
WHEELS = (2, 3)
LOAD_COUNTS = (1, 2, 3)

TRAINS_MODES = """\
modeh(p(+train)).
modeb(has_car(+train,-car)).
modeb(short(+car)).
modeb(long(+car)).
modeb(closed(+car)).
modeb(open(+car)).
modeb(shape(+car,#shape)).
modeb(wheels(+car,#count)).
modeb(has_load(+car,#load_shape,#count)).
type(shape,[rectangle,u_shaped,bucket,hexagon]).
type(load_shape,[circle,triangle,square]).
type(count,[1,2,3]).
"""

KRK_MODES = """\
modeh(p(board(+coord,+coord,+coord,+coord,+coord,+coord))).
modeb(adj(+coord,+coord)).
modeb(+coord = +coord).
type(coord,[1,2,3,4,5,6,7,8]).
"""


@dataclass
class Dataset:
    task: str
    instances: List[Instance]
    facts: FactStore
    modes: ModeSet
    types: TypeDefs
    meta: Dict[str, object] = field(default_factory=dict)

    def labels(self) -> List[str]:
        return [a.label for a in self.instances]

    def subset(self, idx: Sequence[int]) -> "Dataset":
        return Dataset(self.task, [self.instances[i] for i in idx], self.facts, self.modes,
                       self.types, dict(self.meta))

    def split(self, n_train: int, seed: int) -> Tuple["Dataset", "Dataset"]:
        """Seeded random split, stratified by label so both parts keep the class mix."""
        if not 0 <= n_train <= len(self.instances):
            raise ValueError("n_train out of range")
        rng = random.Random(seed)
        by_label: Dict[str, List[int]] = {}
        for i, a in enumerate(self.instances):
            by_label.setdefault(a.label, []).append(i)
        train: List[int] = []
        rest: List[Tuple[float, int]] = []
        frac = n_train / len(self.instances) if self.instances else 0.0
        for label in sorted(by_label):
            idx = by_label[label]
            rng.shuffle(idx)
            k = int(len(idx) * frac)
            train += idx[:k]
            rest += [(rng.random(), i) for i in idx[k:]]
        # rounding leftovers are topped up at random
        rest.sort()
        train += [i for _, i in rest[:n_train - len(train)]]
        chosen = set(train)
        test = [i for i in range(len(self.instances)) if i not in chosen]
        return self.subset(sorted(train)), self.subset(test)


def _load_modes(text: str) -> Tuple[ModeSet, TypeDefs]:
    modes, types = parse_modes(text)
    report = validate_constraints(modes)
    if not report:
        raise AssertionError(f"built-in modes violate constraints: {report}")
    return modes, types


# ---------------------------------------------------------------------------
# Trains


@dataclass(frozen=True)
class Car:
    short: bool
    closed: bool
    shape: str
    wheels: int
    load_shape: str
    load_count: int


def _random_car(rng: random.Random) -> Car:
    return Car(rng.random() < 0.5, rng.random() < 0.5, rng.choice(SHAPES), rng.choice(WHEELS),
               rng.choice(LOAD_SHAPES), rng.choice(LOAD_COUNTS))


def train_label(cars: Sequence[Car]) -> str:
    return POS if any(c.short and c.closed for c in cars) else NEG


def add_train(store: FactStore, tid: str, cars: Sequence[Car]) -> None:
    inst = Const(tid)
    for j, car in enumerate(cars, 1):
        cid = Const(f"{tid}_c{j}")
        store.add(Literal("has_car", (inst, cid)), inst)
        store.add(Literal("short" if car.short else "long", (cid,)), inst)
        store.add(Literal("closed" if car.closed else "open", (cid,)), inst)
        store.add(Literal("shape", (cid, Const(car.shape))), inst)
        store.add(Literal("wheels", (cid, Const(str(car.wheels)))), inst)
        store.add(Literal("has_load", (cid, Const(car.load_shape), Const(str(car.load_count)))), inst)


def _declare_trains(store: FactStore) -> None:
    for pred, arity in (("has_car", 2), ("short", 1), ("long", 1), ("closed", 1), ("open", 1),
                        ("shape", 2), ("wheels", 2), ("has_load", 3)):
        store.declare(pred, arity)


def gen_trains(n: int, seed: int) -> Dataset:
    """``n`` trains of 2-4 cars, half of them positive (rejection balanced)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    quota = {POS: (n + 1) // 2, NEG: n // 2}
    store = FactStore()
    _declare_trains(store)
    instances = []
    while len(instances) < n:
        cars = [_random_car(rng) for _ in range(rng.randint(2, 4))]
        label = train_label(cars)
        if quota[label] == 0:
            continue
        quota[label] -= 1
        tid = f"t{len(instances) + 1}"
        add_train(store, tid, cars)
        instances.append(Instance(Const(tid), label))
    modes, types = _load_modes(TRAINS_MODES)
    types.add("train", [a.id for a in instances])
    return Dataset("trains", instances, store, modes, types, {"seed": seed})


def example_trains() -> Dataset:
    """Two trains in the spirit of the introductory example: t1 has a short
    closed car, t2 has a short car and a closed car but not both in one."""
    store = FactStore()
    _declare_trains(store)
    add_train(store, "t1", [Car(False, True, "rectangle", 2, "square", 3),
                            Car(True, True, "rectangle", 2, "circle", 1),
                            Car(True, False, "u_shaped", 2, "triangle", 1)])
    add_train(store, "t2", [Car(True, False, "bucket", 2, "circle", 2),
                            Car(False, True, "hexagon", 3, "square", 1)])
    modes, types = _load_modes(TRAINS_MODES)
    types.add("train", [Const("t1"), Const("t2")])
    return Dataset("trains", [Instance(Const("t1"), POS), Instance(Const("t2"), NEG)],
                   store, modes, types)


# ---------------------------------------------------------------------------
# King-rook-king


def krk_illegal(wkf: int, wkr: int, wrf: int, wrr: int, bkf: int, bkr: int) -> bool:
    """Exact illegality of a KRK position with White to move."""
    wk, wr, bk = (wkf, wkr), (wrf, wrr), (bkf, bkr)
    if wk == wr or wk == bk or wr == bk:
        return True
    if max(abs(wkf - bkf), abs(wkr - bkr)) <= 1:
        return True
    if wrf == bkf:
        lo, hi = sorted((wrr, bkr))
        return not (wkf == wrf and lo < wkr < hi)
    if wrr == bkr:
        lo, hi = sorted((wrf, bkf))
        return not (wkr == wrr and lo < wkf < hi)
    return False


def board_term(pos: Sequence[int]) -> Compound:
    return Compound("board", tuple(Const(str(x)) for x in pos))


def board_coords(t: Term) -> Tuple[int, ...]:
    if not isinstance(t, Compound) or len(t.args) != 6:
        raise ValueError(f"{t} is not a board term")
    return tuple(int(a.name) for a in t.args)


def krk_facts() -> FactStore:
    store = FactStore()
    for a in range(1, 9):
        for b in range(1, 9):
            if abs(a - b) <= 1:
                store.add(Literal("adj", (Const(str(a)), Const(str(b)))))
    return store


def random_positions(n: int, seed: int) -> List[Tuple[int, ...]]:
    rng = random.Random(seed)
    return [tuple(rng.randint(1, 8) for _ in range(6)) for _ in range(n)]


def gen_krk(n: int, seed: int) -> Dataset:
    if n < 1:
        raise ValueError("n must be at least 1")
    instances = [Instance(board_term(p), POS if krk_illegal(*p) else NEG)
                 for p in random_positions(n, seed)]
    modes, types = _load_modes(KRK_MODES)
    return Dataset("krk", instances, krk_facts(), modes, types, {"seed": seed})


# ---------------------------------------------------------------------------
# Theories and noisy targets


def acceptable_theories() -> Dict[str, Dict[str, List[OrderedClause]]]:
    """Per task, the acceptable explanation clauses for each class."""
    return {
        "trains": {
            POS: [parse_clause("p(X) :- has_car(X,Y), short(Y), closed(Y)")],
            NEG: [],
        },
        "krk": {
            POS: [parse_clause("p(board(A,B,C,D,C,E))"),
                  parse_clause("p(board(A,B,C,D,E,D))"),
                  parse_clause("p(board(A,B,A,B,C,D))"),
                  parse_clause("p(board(A,B,C,D,E,F)) :- adj(A,E), adj(B,F)")],
            NEG: [],
        },
    }


def theory_predicts(theory: Sequence[OrderedClause], facts: FactStore, a: Instance) -> bool:
    from .logic import evaluate_feature
    return any(evaluate_feature(c, facts, a) for c in theory)


def gen_noisy_target(data: Dataset, flip_rate: float, seed: int) -> Dataset:
    """Copy of ``data`` whose target predictions are labels flipped independently."""
    if not 0 <= flip_rate < 0.5:
        raise ValueError("flip_rate must be in [0, 0.5)")
    rng = random.Random(seed)
    out = []
    for a in data.instances:
        flip = rng.random() < flip_rate
        target = (NEG if a.label == POS else POS) if flip else a.label
        out.append(Instance(a.id, a.label, target))
    return Dataset(data.task, out, data.facts, data.modes, data.types,
                   dict(data.meta, flip_rate=flip_rate))


def generate(task: str, n: int, seed: int) -> Dataset:
    if task == "trains":
        return gen_trains(n, seed)
    if task == "krk":
        return gen_krk(n, seed)
    raise ValueError(f"unknown task {task!r}")


def read_dataset_file(text: str) -> List[Instance]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected id<TAB>label")
        target = parts[2] if len(parts) == 3 else None
        out.append(Instance(parse_term(parts[0]), parts[1], target))
    return out


def format_dataset_file(instances: Sequence[Instance]) -> str:
    lines = []
    for a in instances:
        cols = [str(a.id), str(a.label)]
        if a.target is not None:
            cols.append(a.target)
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"

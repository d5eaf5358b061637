"""Enumeration of M-simple feature-clauses and support/precision filtering."""

from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import EquivalenceIndex, build_dependency_graph, sources_and_sinks
from .logic import (Compound, Const, FactStore, Instance, Literal, OrderedClause, Term, Var,
                    canonical_rename, evaluate_feature, parse_clause)
from .modes import CONSTANT, INPUT, OUTPUT, ModeDecl, ModeSet, Slot, Structured, TypeDefs


@dataclass
class MiningConfig:
    max_body_literals: int = 2
    min_support: int = 10
    min_precision: float = 0.5
    allow_equality_modes: bool = True

    def __post_init__(self):
        if self.max_body_literals < 0:
            raise ValueError("max_body_literals must be non-negative")
        if self.min_support < 0:
            raise ValueError("min_support must be non-negative")
        if not 0 <= self.min_precision <= 1:
            raise ValueError("min_precision must lie in [0, 1]")


@dataclass
class MinedClause:
    clause: OrderedClause
    support: int
    precision: float


def head_template(m: ModeSet) -> Tuple[Literal, Dict[str, str]]:
    """The most general head for the modeh, one fresh variable per input slot."""
    decl = m.head
    if decl is None:
        raise ValueError("no modeh declaration")
    leaves = decl.leaves()
    names = iter(["X"] if len(leaves) == 1 else [chr(ord("A") + i) for i in range(len(leaves))])
    types: Dict[str, str] = {}

    def build(mt):
        if isinstance(mt, Slot):
            if mt.kind != INPUT:
                raise ValueError("head modes with output or constant slots are not supported")
            v = next(names)
            types[v] = mt.type
            return Var(v)
        return Compound(mt.functor, tuple(build(a) for a in mt.args))

    return Literal(decl.predicate, tuple(build(a) for a in decl.args)), types


def _fill(decl: ModeDecl, inputs: Dict[str, List[str]], fresh, types: TypeDefs) -> Iterable[Tuple[Literal, Dict[str, str]]]:
    """All literals for ``decl`` whose inputs use available variables.

    Output slots take a fresh variable or any existing variable of the type;
    constant slots range over the type extension.
    """
    leaves = decl.leaves()
    choices = []
    for _, slot in leaves:
        if slot.kind == INPUT:
            choices.append([(v, None) for v in inputs.get(slot.type, [])])
        elif slot.kind == OUTPUT:
            choices.append([(None, slot.type)] + [(v, None) for v in inputs.get(slot.type, [])])
        else:
            choices.append([(t, "#") for t in types.ordered(slot.type)])
    for combo in itertools.product(*choices):
        new_types: Dict[str, str] = {}
        terms = []
        for (val, tag), (_, slot) in zip(combo, leaves):
            if tag == "#":
                terms.append(val)
            elif val is None:
                name = fresh(len(new_types))
                new_types[name] = tag
                terms.append(Var(name))
            else:
                terms.append(Var(val))
        it = iter(terms)

        def build(mt):
            if isinstance(mt, Slot):
                return next(it)
            return Compound(mt.functor, tuple(build(a) for a in mt.args))

        yield Literal(decl.predicate, tuple(build(a) for a in decl.args)), new_types


def enumerate_simple_clauses(m: ModeSet, t: TypeDefs, max_body: int,
                             allow_equality: bool = True) -> List[OrderedClause]:
    """All M-simple clauses with at most ``max_body`` body literals, up to equivalence."""
    head, head_types = head_template(m)
    decls = [d for d in m.body_decls() if allow_equality or d.predicate != "="]
    max_inputs = max((sum(1 for _, s in d.leaves() if s.kind == INPUT) for d in decls), default=1)
    index = EquivalenceIndex()
    out: List[OrderedClause] = []
    frontier: List[Tuple[OrderedClause, Dict[str, str]]] = [(OrderedClause(head), dict(head_types))]
    for depth in range(max_body + 1):
        nxt = []
        for clause, vtypes in frontier:
            g = build_dependency_graph(clause, m, t)
            n_sinks = len(sources_and_sinks(g)[1])
            if n_sinks <= 1:
                canon = canonical_rename(clause)
                if index.add(canon):
                    out.append(canon)
            if depth == max_body:
                continue
            remaining = max_body - depth - 1
            by_type: Dict[str, List[str]] = {}
            for v, ty in vtypes.items():
                by_type.setdefault(ty, []).append(v)
            base = len(vtypes)
            for d in decls:
                for lit, new_types in _fill(d, by_type, lambda k: f"V{base + k}", t):
                    if lit.predicate == "=" and lit.args[0] == lit.args[1]:
                        continue
                    child = OrderedClause(clause.head, clause.body + (lit,))
                    cg = build_dependency_graph(child, m, t)
                    sinks = len(sources_and_sinks(cg)[1])
                    if sinks - remaining * max(max_inputs - 1, 0) > 1:
                        continue
                    nxt.append((child, {**vtypes, **new_types}))
        frontier = nxt
    return out


def class_counts(values: Sequence[int], classes: Sequence[str]) -> Counter:
    return Counter(c for v, c in zip(values, classes) if v)


def support_precision(values: Sequence[int], classes: Sequence[str]) -> Tuple[int, Optional[float]]:
    counts = class_counts(values, classes)
    support = sum(counts.values())
    if support == 0:
        return 0, None
    return support, max(counts.values()) / support


def passes(support: int, precision: Optional[float], cfg: MiningConfig) -> bool:
    return precision is not None and support >= cfg.min_support and precision >= cfg.min_precision


def filter_by_stats(clauses: Sequence[OrderedClause], data: Sequence[Instance], facts: FactStore,
                    cfg: MiningConfig) -> List[MinedClause]:
    classes = [a.target_class for a in data]
    if any(c is None for c in classes):
        raise ValueError("filtering needs labelled instances")
    out = []
    for c in clauses:
        values = [evaluate_feature(c, facts, a) for a in data]
        support, precision = support_precision(values, classes)
        if passes(support, precision, cfg):
            out.append(MinedClause(c, support, precision))
    return out


def mine(modes: ModeSet, types: TypeDefs, data: Sequence[Instance], facts: FactStore,
         cfg: MiningConfig) -> List[MinedClause]:
    clauses = enumerate_simple_clauses(modes, types, cfg.max_body_literals, cfg.allow_equality_modes)
    return filter_by_stats(clauses, data, facts, cfg)


_STATS = re.compile(r"%\s*support=(\d+)\s+precision=([0-9.]+)")


def format_mined(mined: Sequence[MinedClause]) -> str:
    return "".join(f"% support={m.support} precision={m.precision!r}\n{m.clause}.\n" for m in mined)


def parse_mined(text: str) -> List[MinedClause]:
    out = []
    pending = (0, 0.0)
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%"):
            m = _STATS.match(line)
            if m:
                pending = (int(m.group(1)), float(m.group(2)))
            continue
        out.append(MinedClause(parse_clause(line), *pending))
        pending = (0, 0.0)
    return out

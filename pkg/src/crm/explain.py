"""Explanation graphs, clause containment, the MUX wrapper and fidelity."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .logic import (FALSE, Instance, OrderedClause, apply_substitution, equivalent_normalized,
                    ground_head, normalize_equalities)
from .network import Crm, relevance


def ancestors(crm: Crm, v: int) -> Set[int]:
    out = {v}
    stack = [v]
    while stack:
        for p in crm.predecessors(stack.pop()):
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def ground_clause(c: OrderedClause, a: Instance) -> Optional[OrderedClause]:
    """``c`` under θ_a, or None when the head cannot be bound to ``a.id``."""
    theta = ground_head(c, a.id)
    if theta is None:
        return None
    return apply_substitution(c, theta)


@dataclass
class ExplanationGraph:
    output: Optional[int]
    instance: Instance
    vertices: List[int] = field(default_factory=list)
    edges: List[Tuple[int, int]] = field(default_factory=list)
    clause_of: Dict[int, OrderedClause] = field(default_factory=dict)
    rank: Optional[int] = None

    @property
    def empty(self) -> bool:
        return not self.vertices

    def __bool__(self):
        return not self.empty

    def _normalized(self):
        if not hasattr(self, "_norm"):
            self._norm = [normalize_equalities(self.clause_of[v]) for v in self.vertices]
        return self._norm

    def to_json(self) -> dict:
        return {
            "instance": str(self.instance.id),
            "output": self.output,
            "relevance_rank": self.rank,
            "vertices": [{"id": v, "clause": str(self.clause_of[v])} for v in self.vertices],
            "edges": [list(e) for e in self.edges],
        }

    def to_dot(self) -> str:
        lines = ["digraph explanation {", "  node [shape=box, fontsize=10];"]
        for v in self.vertices:
            label = str(self.clause_of[v]).replace('"', '\\"')
            style = ", style=bold" if v == self.output else ""
            lines.append(f'  v{v} [label="{label}"{style}];')
        for u, v in self.edges:
            lines.append(f"  v{u} -> v{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


EMPTY = None


def explanation_graph(crm: Crm, o: int, a: Instance, f: np.ndarray, rank: Optional[int] = None) -> ExplanationGraph:
    """Ancestral graph of output ``o`` with clauses grounded for ``a``; empty if f_o(a) = 0."""
    if o not in crm.outputs:
        raise ValueError(f"vertex {o} is not an output")
    eg = ExplanationGraph(o, a, rank=rank)
    if not f[o]:
        return eg
    verts = sorted(ancestors(crm, o))
    for v in verts:
        if not f[v]:
            raise AssertionError(f"vertex {v} is an ancestor of a firing output but does not fire")
        g = ground_clause(crm.clause(v), a)
        if g is None:
            raise AssertionError(f"vertex {v} head does not match instance {a.id}")
        eg.clause_of[v] = g
    eg.vertices = verts
    vs = set(verts)
    eg.edges = [(u, v) for u, v in crm.edges if u in vs and v in vs]
    return eg


def clause_contained(c: OrderedClause, eg: Optional[ExplanationGraph], a: Instance) -> bool:
    if eg is None or eg.empty:
        return False
    g = ground_clause(c, a)
    if g is None:
        return False
    ng = normalize_equalities(g)
    if ng is FALSE:
        return False
    return any(equivalent_normalized(ng, other) for other in eg._normalized())


def most_relevant(crm: Crm, a: Instance, f: np.ndarray, h: Optional[np.ndarray] = None) -> Optional[ExplanationGraph]:
    if h is None:
        h, _, _ = crm.forward(np.asarray(f, dtype=float))
    order = relevance(crm, h, f)
    if not order:
        return None
    return explanation_graph(crm, order[0], a, f, rank=0)


def mux_explain(crm: Crm, a: Instance, target: str, f: np.ndarray) -> Tuple[str, Optional[ExplanationGraph]]:
    """Prediction plus the most-relevant explanation, or None when the CRM
    disagrees with the target or no output fires."""
    h, _, p = crm.forward(np.asarray(f, dtype=float))
    pred = crm.classes[int(np.argmax(p))]
    if pred != target:
        return pred, None
    return pred, most_relevant(crm, a, f, h)


@dataclass
class FidelityReport:
    cp: int = 0
    ip: int = 0
    ce: int = 0
    ie: int = 0

    @property
    def predictive(self) -> Optional[float]:
        n = self.cp + self.ip
        return self.cp / n if n else None

    @property
    def explanatory(self) -> Optional[float]:
        n = self.ce + self.ie
        return self.ce / n if n else None

    def to_json(self) -> dict:
        return {"cp": self.cp, "ip": self.ip, "ce": self.ce, "ie": self.ie,
                "predictive": self.predictive, "explanatory": self.explanatory}


def predictive_fidelity(predictions: Sequence[str], targets: Sequence[str]) -> FidelityReport:
    r = FidelityReport()
    for p, t in zip(predictions, targets):
        if p == t:
            r.cp += 1
        else:
            r.ip += 1
    return r


def consistent(pred: str, target: str, eg: Optional[ExplanationGraph], a: Instance,
               theories: Mapping[str, Sequence[OrderedClause]]) -> bool:
    """Conditions (i)-(iii); with an empty acceptable set for the class,
    (ii) is waived.  An empty explanation is never consistent."""
    if pred != target or eg is None or eg.empty:
        return False
    own = theories.get(target, [])
    if own and not any(clause_contained(c, eg, a) for c in own):
        return False
    for cls, clauses in theories.items():
        if cls != target and any(clause_contained(c, eg, a) for c in clauses):
            return False
    return True


def evaluate(crm: Crm, data: Sequence[Instance], F: np.ndarray,
             theories: Optional[Mapping[str, Sequence[OrderedClause]]] = None) -> FidelityReport:
    """Predictive and (with theories) explanatory fidelity against the targets."""
    H, P = crm.forward_batch(F)
    preds = [crm.classes[k] for k in np.argmax(P, axis=1)]
    targets = [a.target_class for a in data]
    report = predictive_fidelity(preds, targets)
    if theories is not None:
        for i, a in enumerate(data):
            eg = most_relevant(crm, a, F[i], H[i]) if preds[i] == targets[i] else None
            if consistent(preds[i], targets[i], eg, a, theories):
                report.ce += 1
            else:
                report.ie += 1
    return report


def majority_baseline(train: Sequence[Instance], test: Sequence[Instance]) -> FidelityReport:
    counts: Dict[str, int] = {}
    for a in train:
        counts[a.target_class] = counts.get(a.target_class, 0) + 1
    best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    return predictive_fidelity([best] * len(test), [a.target_class for a in test])


def baseline_explainer(data: Sequence[Instance], clauses: Sequence[OrderedClause], values: np.ndarray,
                       theories: Mapping[str, Sequence[OrderedClause]], seed: int) -> FidelityReport:
    """Explanatory fidelity when the explanation is one random firing clause.

    ``values[i, k]`` is the feature value of ``clauses[k]`` on ``data[i]``.  The
    target class stands in for the prediction, so condition (i) always holds.
    """
    rng = random.Random(seed)
    report = FidelityReport()
    for i, a in enumerate(data):
        firing = [k for k in range(len(clauses)) if values[i, k]]
        eg = None
        if firing:
            k = rng.choice(firing)
            eg = ExplanationGraph(None, a, [0], [], {0: ground_clause(clauses[k], a)})
        if consistent(a.target_class, a.target_class, eg, a, theories):
            report.ce += 1
        else:
            report.ie += 1
    return report


def export_json(eg: Optional[ExplanationGraph], a: Instance, prediction: str) -> str:
    doc = {"instance": str(a.id), "prediction": prediction,
           "explanation": eg.to_json() if eg is not None and not eg.empty else None}
    return json.dumps(doc, indent=1) + "\n"

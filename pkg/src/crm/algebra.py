"""Dependency graphs, basis decomposition, the ρ1/ρ2 operators and derivations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .logic import (EQ, FALSE, Literal, OrderedClause, Var, equivalent, equivalent_normalized,
                    is_variant, normalize_equalities, predicate_signature, rename_apart_from,
                    rename_vars, _fresh_name)
from .modes import ModeSet, TypeDefs, in_mode_language


class NotInLanguage(ValueError):
    pass


@dataclass
class DependencyGraph:
    """Vertex 0 is the head; vertex i > 0 is body literal i (1-based in text)."""

    literals: List[Literal]
    edges: Set[Tuple[int, int]]
    inputs: List[List[str]] = field(default_factory=list)
    outputs: List[List[str]] = field(default_factory=list)
    var_types: Dict[str, str] = field(default_factory=dict)

    @property
    def vertices(self) -> List[int]:
        return list(range(len(self.literals)))

    def successors(self, v: int) -> List[int]:
        return sorted(j for i, j in self.edges if i == v)

    def predecessors(self, v: int) -> List[int]:
        return sorted(i for i, j in self.edges if j == v)


def build_dependency_graph(c: OrderedClause, m: ModeSet, t: Optional[TypeDefs] = None) -> DependencyGraph:
    mem = in_mode_language(c, m, t)
    if not mem:
        raise NotInLanguage(f"{c}: {mem.reason}")
    lits = list(c.literals())
    edges = set()
    head_in = set(mem.inputs[0])
    for j in range(1, len(lits)):
        need = set(mem.inputs[j])
        if need & head_in:
            edges.add((0, j))
        for i in range(1, j):
            if need & set(mem.outputs[i]):
                edges.add((i, j))
    return DependencyGraph(lits, edges, mem.inputs, mem.outputs, mem.var_types)


def sources_and_sinks(g: DependencyGraph) -> Tuple[List[int], List[int]]:
    has_in = {j for _, j in g.edges}
    has_out = {i for i, _ in g.edges}
    sources = [v for v in g.vertices if v not in has_in]
    sinks = [v for v in g.vertices if v not in has_out]
    return sources, sinks


def is_m_simple(c: OrderedClause, m: ModeSet, t: Optional[TypeDefs] = None) -> bool:
    return len(sources_and_sinks(build_dependency_graph(c, m, t))[1]) <= 1


def _ancestors(g: DependencyGraph, v: int) -> Set[int]:
    anc = {v}
    stack = [v]
    while stack:
        for i in g.predecessors(stack.pop()):
            if i not in anc:
                anc.add(i)
                stack.append(i)
    return anc


def dag_to(g: DependencyGraph, v: int) -> DependencyGraph:
    """Union of all paths from the head vertex to ``v``.

    Under MC1-MC3 every vertex is reachable from the head, so this is the
    ancestor set of ``v``.
    """
    keep = sorted(_ancestors(g, v))
    idx = {old: new for new, old in enumerate(keep)}
    edges = {(idx[i], idx[j]) for i, j in g.edges if i in idx and j in idx}
    return DependencyGraph([g.literals[i] for i in keep], edges,
                           [g.inputs[i] for i in keep] if g.inputs else [],
                           [g.outputs[i] for i in keep] if g.outputs else [], g.var_types)


def _subclause(c: OrderedClause, body_idx: Iterable[int]) -> OrderedClause:
    keep = sorted(body_idx)
    return OrderedClause(c.head, tuple(c.body[i - 1] for i in keep))


def basis(c: OrderedClause, m: ModeSet, t: Optional[TypeDefs] = None) -> List[OrderedClause]:
    """One maximal M-simple subclause per sink, in sink order."""
    g = build_dependency_graph(c, m, t)
    out = []
    for s in sources_and_sinks(g)[1]:
        out.append(_subclause(c, (i for i in _ancestors(g, s) if i > 0)))
    return out


# ---------------------------------------------------------------------------
# Operators


def output_variables(c: OrderedClause, m: ModeSet, t: Optional[TypeDefs] = None) -> List[Tuple[str, str]]:
    """(variable, type) for each distinct body output variable, first-occurrence order."""
    mem = in_mode_language(c, m, t)
    if not mem:
        raise NotInLanguage(f"{c}: {mem.reason}")
    seen: Dict[str, str] = {}
    for lo in mem.outputs[1:]:
        for v in lo:
            seen.setdefault(v, mem.var_types[v])
    return list(seen.items())


def _equality_classes(c: OrderedClause) -> Dict[str, str]:
    parent: Dict[str, str] = {}

    def find(v):
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    for l in c.body:
        if l.predicate == EQ and l.arity == 2 and all(isinstance(a, Var) for a in l.args):
            a, b = find(l.args[0].name), find(l.args[1].name)
            if a != b:
                parent[b] = a
    return {v: find(v) for v in parent}


def rho1_pairs(c: OrderedClause, m: ModeSet, t: Optional[TypeDefs] = None,
               skip_linked: bool = True) -> List[Tuple[str, str]]:
    outs = output_variables(c, m, t)
    cls = _equality_classes(c) if skip_linked else {}
    pairs = []
    for i in range(len(outs)):
        for j in range(i + 1, len(outs)):
            (a, ta), (b, tb) = outs[i], outs[j]
            if ta != tb:
                continue
            if skip_linked and cls.get(a, a) == cls.get(b, b):
                continue
            pairs.append((a, b))
    return pairs


def rho1(c: OrderedClause, m: ModeSet, t: Optional[TypeDefs] = None,
         skip_linked: bool = True) -> List[OrderedClause]:
    """All clauses ``c, Y1=Y2`` for same-type output variables Y1, Y2."""
    return [OrderedClause(c.head, c.body + (Literal(EQ, (Var(a), Var(b))),))
            for a, b in rho1_pairs(c, m, t, skip_linked)]


class HeadMismatch(ValueError):
    pass


def align_head(c2: OrderedClause, c1: OrderedClause) -> OrderedClause:
    """Rename ``c2`` so its head is syntactically ``c1``'s head."""
    if c2.head == c1.head:
        return c2
    ren = is_variant(OrderedClause(c2.head), OrderedClause(c1.head))
    if ren is None:
        raise HeadMismatch(f"heads {c1.head} and {c2.head} differ")
    # move c2's body variables out of the way of c1's head names first
    hv1 = set(c1.head_variables())
    body_only = [v for v in c2.variables() if v not in set(c2.head_variables())]
    taken = set(c2.variables()) | set(c1.variables())
    mapping = dict(ren)
    counter = 0
    for v in body_only:
        if v in hv1:
            name, counter = _fresh_name(v, counter, taken)
            taken.add(name)
            mapping[v] = name
    return rename_vars(c2, mapping)


def rho2(c1: OrderedClause, c2: OrderedClause) -> OrderedClause:
    """``p(X) :- Body1, Body2`` with c2 renamed apart from c1 where needed."""
    c2 = align_head(c2, c1)
    c2 = rename_apart_from(c2, c1)
    return OrderedClause(c1.head, c1.body + c2.body)


# ---------------------------------------------------------------------------
# Derivations

GIVEN, RHO1, RHO2 = "given", "rho1", "rho2"


@dataclass(frozen=True)
class DerivationStep:
    clause: OrderedClause
    op: str = GIVEN
    parents: Tuple[int, ...] = ()
    pair: Optional[Tuple[str, str]] = None

    def justification(self) -> str:
        if self.op == GIVEN:
            return "Given"
        if self.op == RHO1:
            extra = f", {self.pair[0]}, {self.pair[1]}" if self.pair else ""
            return f"{self.parents[0] + 1}, rho1{extra}"
        return f"{self.parents[0] + 1}, {self.parents[1] + 1}, rho2"


def format_derivation(steps: Sequence[DerivationStep]) -> str:
    width = max((len(str(s.clause)) for s in steps), default=0)
    return "".join(f"{i:>3}  {str(s.clause):<{width}}  {s.justification()}\n"
                   for i, s in enumerate(steps, 1))


def _nonhead_vars(c: OrderedClause) -> Set[str]:
    hv = set(c.head_variables())
    return {v for v in c.variables() if v not in hv}


def _check_given(step: OrderedClause, phi: Sequence[OrderedClause], earlier: Set[str]) -> bool:
    if _nonhead_vars(step) & earlier:
        return False
    for f in phi:
        if is_variant(f, step) is not None:
            return True
    return False


def _check_rho2(child: OrderedClause, p1: OrderedClause, p2: OrderedClause) -> bool:
    if child.head != p1.head or len(child.body) != len(p1.body) + len(p2.body):
        return False
    if child.body[:len(p1.body)] != p1.body:
        return False
    tail = OrderedClause(child.head, child.body[len(p1.body):])
    try:
        p2a = align_head(p2, p1)
    except HeadMismatch:
        return False
    if tail == p2a:
        shared = _nonhead_vars(p1) & _nonhead_vars(p2a)
        return not shared or p1 == p2a
    ren = is_variant(p2a, tail, fixed=p1.head_variables())
    if ren is None:
        return False
    return not (_nonhead_vars(tail) & _nonhead_vars(p1))


def _check_rho1(child: OrderedClause, parent: OrderedClause, m: Optional[ModeSet],
                t: Optional[TypeDefs]) -> bool:
    if child.head != parent.head or child.body[:-1] != parent.body or len(child.body) != len(parent.body) + 1:
        return False
    eq = child.body[-1]
    if eq.predicate != EQ or eq.arity != 2 or not all(isinstance(a, Var) for a in eq.args):
        return False
    a, b = eq.args[0].name, eq.args[1].name
    if a == b:
        return False
    if m is None:
        return True
    try:
        outs = dict(output_variables(parent, m, t))
    except NotInLanguage:
        return False
    return a in outs and b in outs and outs[a] == outs[b]


def verify_derivation(steps: Sequence[DerivationStep], phi: Sequence[OrderedClause],
                      omega: Iterable[str] = (RHO1, RHO2), modes: Optional[ModeSet] = None,
                      types: Optional[TypeDefs] = None) -> bool:
    omega = set(omega)
    seen_vars: Set[str] = set()
    for i, s in enumerate(steps):
        if any(p >= i or p < 0 for p in s.parents):
            return False
        if s.op == GIVEN:
            ok = _check_given(s.clause, phi, seen_vars)
        elif s.op == RHO1:
            ok = RHO1 in omega and len(s.parents) == 1 and \
                _check_rho1(s.clause, steps[s.parents[0]].clause, modes, types)
        elif s.op == RHO2:
            ok = RHO2 in omega and len(s.parents) == 2 and \
                _check_rho2(s.clause, steps[s.parents[0]].clause, steps[s.parents[1]].clause)
        else:
            ok = False
        if not ok:
            return False
        seen_vars |= _nonhead_vars(s.clause)
    return bool(steps)


def is_linear(steps: Sequence[DerivationStep]) -> bool:
    """Givens and a ρ2 chain (each link adds one Given), then only ρ1 steps."""
    phase = 0  # 0: givens/rho2, 1: rho1
    last_chain: Optional[int] = None
    for i, s in enumerate(steps):
        if s.op == RHO1:
            phase = 1
            if s.parents != (i - 1,):
                return False
            continue
        if phase == 1:
            return False
        if s.op == GIVEN:
            continue
        a, b = s.parents
        if steps[b].op != GIVEN:
            return False
        if last_chain is None:
            if steps[a].op != GIVEN:
                return False
        elif a != last_chain:
            return False
        last_chain = i
    return bool(steps)


def _cover_basis(c, s, theta, modes, types) -> Optional[List[OrderedClause]]:
    """Members of ``s`` whose θ-images are exactly the basis clauses of ``c``."""
    from .logic import apply_substitution
    try:
        b = basis(c, modes, types) if modes is not None else [c]
    except NotInLanguage:
        return None
    targets = [frozenset(x.literals()) for x in b]
    chosen: List[OrderedClause] = []
    covered: Set[int] = set()
    for si in s:
        img = frozenset(apply_substitution(si, theta).literals())
        for k, tset in enumerate(targets):
            if k not in covered and img == tset:
                chosen.append(si)
                covered.add(k)
                break
    return chosen if len(covered) == len(targets) else None


def reconstruct_from_basis(c: OrderedClause, s: Sequence[OrderedClause], theta: Dict[str, "object"],
                           modes: Optional[ModeSet] = None,
                           types: Optional[TypeDefs] = None) -> List[DerivationStep]:
    """Build a {ρ1,ρ2}-derivation from ``s`` of a clause equivalent to ``c``.

    The members of ``s`` whose θ-image is a basis clause of ``c`` are chained
    with ρ2, then each variable is equated to the representative of its
    θ-class with ρ1.
    """
    from .logic import apply_substitution
    chosen = _cover_basis(c, s, theta, modes, types)
    if chosen is None and any(l.predicate == EQ for l in c.body):
        # fall back to the equality-normal form (an equivalent clause)
        n = normalize_equalities(c)
        if n is not FALSE:
            chosen = _cover_basis(n, s, theta, modes, types)
    if chosen is None:
        raise ValueError("basis of the clause is not covered by the substituted set")
    steps = [DerivationStep(si) for si in chosen]
    if len(chosen) > 1:
        cur = OrderedClause(chosen[0].head, chosen[0].body + chosen[1].body)
        steps.append(DerivationStep(cur, RHO2, (0, 1)))
        for k in range(2, len(chosen)):
            cur = OrderedClause(cur.head, cur.body + chosen[k].body)
            steps.append(DerivationStep(cur, RHO2, (len(steps) - 1, k)))
    cur = steps[-1].clause
    head_vars = set(cur.head_variables())
    rep: Dict[object, str] = {}
    for v in cur.variables():
        if v in head_vars:
            continue
        image = theta.get(v, Var(v))
        if isinstance(image, Var) and image.name in head_vars:
            raise ValueError(f"variable {v} is mapped onto head variable {image}")
        r = rep.setdefault(image, v)
        if r != v:
            cur = OrderedClause(cur.head, cur.body + (Literal(EQ, (Var(v), Var(r))),))
            steps.append(DerivationStep(cur, RHO1, (len(steps) - 1,), (v, r)))
    return steps


def linearize(steps: Sequence[DerivationStep], phi: Sequence[OrderedClause]) -> List[DerivationStep]:
    """An equivalent derivation with all ρ2 steps (a linear chain) before all ρ1 steps.

    Every literal of the final clause is traced back to the Given step (under a
    renaming) or the ρ1 step that introduced it; the Givens are replayed in
    order and the equalities appended afterwards.
    """
    from .logic import substitute_literal
    # segments: ('g', given step index, renaming) or ('e', equality literal)
    segs: List[List[tuple]] = []
    for s in steps:
        if s.op == GIVEN:
            segs.append([("g", len(segs), {})])
        elif s.op == RHO1:
            segs.append(segs[s.parents[0]] + [("e", s.clause.body[-1])])
        else:
            p1, p2 = steps[s.parents[0]].clause, steps[s.parents[1]].clause
            tail = OrderedClause(s.clause.head, s.clause.body[len(p1.body):])
            ren = is_variant(p2, tail)
            if ren is None:
                raise ValueError("not a verified derivation")
            moved = []
            for seg in segs[s.parents[1]]:
                if seg[0] == "g":
                    src = steps[seg[1]].clause
                    m = {v: ren.get(seg[2].get(v, v), seg[2].get(v, v)) for v in src.variables()}
                    moved.append(("g", seg[1], {k: v for k, v in m.items() if k != v}))
                else:
                    moved.append(("e", substitute_literal(seg[1], {k: Var(v) for k, v in ren.items()})))
            segs.append(segs[s.parents[0]] + moved)
    givens: List[OrderedClause] = []
    eqs: List[Literal] = []
    seen = set()
    for seg in segs[-1]:
        if seg[0] == "e":
            eqs.append(seg[1])
            continue
        clause = rename_vars(steps[seg[1]].clause, seg[2])
        if clause not in seen:
            seen.add(clause)
            givens.append(clause)
    out = [DerivationStep(g) for g in givens]
    cur = givens[0]
    if len(givens) > 1:
        cur = OrderedClause(cur.head, cur.body + givens[1].body)
        out.append(DerivationStep(cur, RHO2, (0, 1)))
        for k in range(2, len(givens)):
            cur = OrderedClause(cur.head, cur.body + givens[k].body)
            out.append(DerivationStep(cur, RHO2, (len(out) - 1, k)))
    for eq in eqs:
        cur = OrderedClause(cur.head, cur.body + (eq,))
        out.append(DerivationStep(cur, RHO1, (len(out) - 1,), (eq.args[0].name, eq.args[1].name)))
    return out


# ---------------------------------------------------------------------------
# Closure


class EquivalenceIndex:
    """Deduplicates clauses by equivalence using a predicate-set prefilter."""

    def __init__(self):
        self._buckets: Dict[tuple, List[object]] = {}

    def _key(self, norm):
        if norm is FALSE:
            return ("<false>",)
        return (norm.head.key, predicate_signature(norm))

    def find(self, c: OrderedClause):
        norm = normalize_equalities(c)
        for other in self._buckets.get(self._key(norm), ()):
            if equivalent_normalized(norm, other[0]):
                return other[1]
        return None

    def add(self, c: OrderedClause, value=None) -> bool:
        """Insert ``c``; False if an equivalent clause is already present."""
        norm = normalize_equalities(c)
        bucket = self._buckets.setdefault(self._key(norm), [])
        for other in bucket:
            if equivalent_normalized(norm, other[0]):
                return False
        bucket.append((norm, c if value is None else value))
        return True


def bounded_closure(phi: Sequence[OrderedClause], omega: Iterable[str], depth: int,
                    filter: Optional[Callable[[OrderedClause], bool]] = None,
                    modes: Optional[ModeSet] = None, types: Optional[TypeDefs] = None) -> List[OrderedClause]:
    omega = set(omega)
    if depth < 0:
        raise ValueError("depth must be non-negative")
    idx = EquivalenceIndex()
    out: List[OrderedClause] = []
    for c in phi:
        if idx.add(c):
            out.append(c)
    for _ in range(depth):
        new: List[OrderedClause] = []
        cands: List[OrderedClause] = []
        if RHO1 in omega:
            if modes is None:
                raise ValueError("rho1 needs mode declarations")
            for c in out:
                cands.extend(rho1(c, modes, types))
        if RHO2 in omega:
            for a in out:
                for b in out:
                    cands.append(rho2(a, b))
        for c in cands:
            if filter is not None and not filter(c):
                continue
            if idx.add(c):
                new.append(c)
        if not new:
            break
        out.extend(new)
    return out

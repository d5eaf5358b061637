"""Terms, literals, ordered clauses, substitutions and ground-fact evaluation.

Syntax follows the usual logic-programming conventions: variables start with
an upper-case letter or underscore, constants and predicate symbols with a
lower-case letter (digits are constants too).  ``(A,B,C)`` is a tuple term,
stored as a compound with an empty functor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

EQ = "="
TUPLE = ""


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("compound terms need at least one argument")

    def __str__(self) -> str:
        inner = ",".join(str(a) for a in self.args)
        return f"{self.functor}({inner})"


Term = Union[Var, Const, Compound]


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Compound):
        return all(is_ground(a) for a in t.args)
    return True


def term_vars(t: Term, out: Optional[List[str]] = None) -> List[str]:
    """Variable names of ``t`` in first-occurrence order (with repeats removed)."""
    if out is None:
        out = []
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    elif isinstance(t, Compound):
        for a in t.args:
            term_vars(a, out)
    return out


@dataclass(frozen=True, slots=True)
class Literal:
    predicate: str
    args: Tuple[Term, ...]
    positive: bool = True

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> Tuple[str, int]:
        return (self.predicate, len(self.args))

    def variables(self) -> List[str]:
        out: List[str] = []
        for a in self.args:
            term_vars(a, out)
        return out

    def is_ground(self) -> bool:
        return all(is_ground(a) for a in self.args)

    def __str__(self) -> str:
        if self.predicate == EQ and len(self.args) == 2:
            s = f"{self.args[0]}={self.args[1]}"
        elif self.args:
            s = f"{self.predicate}({','.join(str(a) for a in self.args)})"
        else:
            s = self.predicate
        return s if self.positive else f"\\+{s}"


@dataclass(frozen=True, slots=True)
class OrderedClause:
    """A feature-clause ``head :- body``.  Body order is significant."""

    head: Literal
    body: Tuple[Literal, ...] = ()

    def literals(self) -> Tuple[Literal, ...]:
        return (self.head,) + self.body

    def literal_set(self) -> frozenset:
        return frozenset(self.literals())

    def variables(self) -> List[str]:
        out: List[str] = []
        for lit in self.literals():
            for a in lit.args:
                term_vars(a, out)
        return out

    def head_variables(self) -> List[str]:
        return self.head.variables()

    def __str__(self) -> str:
        if not self.body:
            return str(self.head)
        return f"{self.head} :- {', '.join(str(l) for l in self.body)}"


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}" + (f": {text!r}" if text else ""))


class FeatureClauseError(ValueError):
    """Raised when a clause body mentions the head predicate."""


_TOKEN = re.compile(
    r"\s*(?:(?P<neck>:-|<-|←)|(?P<var>[A-Z_][A-Za-z0-9_]*)|(?P<atom>[a-z][A-Za-z0-9_]*)"
    r"|(?P<num>\d+(?:\.\d+)?)|(?P<quoted>'(?:[^'\\]|\\.)*')|(?P<punct>[(),\[\].=+\-#]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        if text[pos] == "%":  # comment to end of line
            nl = text.find("\n", pos)
            pos = n if nl < 0 else nl
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        value = m.group(kind)
        start = m.start(kind)
        if kind == "quoted":
            kind, value = "atom", value[1:-1]
        elif kind == "num":
            kind = "atom"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, value: Optional[str] = None) -> bool:
        kind, v, _ = self.toks[self.i]
        if value is None:
            return kind != "eof"
        return v == value and kind in ("punct", "neck")

    def next(self) -> Tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, v, pos = self.next()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", self.text, pos)

    def error(self, message: str):
        raise ParseError(message, self.text, self.toks[self.i][2])

    def term(self) -> Term:
        kind, v, pos = self.next()
        if kind == "var":
            return Var(v)
        if kind == "atom":
            if self.peek("("):
                self.next()
                return Compound(v, tuple(self.arglist(")")))
            return Const(v)
        if kind == "punct" and v == "(":
            args = self.arglist(")")
            return args[0] if len(args) == 1 else Compound(TUPLE, tuple(args))
        if kind == "punct" and v == "[":
            if self.peek("]"):
                self.next()
                return Const("[]")
            items = self.arglist("]")
            out: Term = Const("[]")
            for it in reversed(items):
                out = Compound(".", (it, out))
            return out
        raise ParseError(f"unexpected token {v or 'end of input'!r}", self.text, pos)

    def arglist(self, close: str) -> List[Term]:
        args = [self.term()]
        while self.peek(","):
            self.next()
            args.append(self.term())
        self.expect(close)
        return args

    def literal(self) -> Literal:
        start = self.toks[self.i][2]
        t = self.term()
        if self.peek("="):
            self.next()
            rhs = self.term()
            return Literal(EQ, (t, rhs))
        if isinstance(t, Const):
            return Literal(t.name, ())
        if isinstance(t, Compound) and t.functor != TUPLE:
            return Literal(t.functor, t.args)
        raise ParseError("expected an atom", self.text, start)

    def clause(self) -> Tuple[Literal, List[Literal]]:
        head = self.literal()
        body: List[Literal] = []
        if self.peek(":-") or self.peek("<-") or self.peek("←"):
            self.next()
            body.append(self.literal())
            while self.peek(","):
                self.next()
                body.append(self.literal())
        if self.peek("."):
            self.next()
        if self.peek():
            self.error("trailing input")
        body = [l for l in body if not (l.predicate == "true" and l.arity == 0)]
        return head, body


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.peek("."):
        p.next()
    if p.peek():
        p.error("trailing input")
    return t


def parse_literal(text: str) -> Literal:
    p = _Parser(text)
    lit = p.literal()
    if p.peek("."):
        p.next()
    if p.peek():
        p.error("trailing input")
    return lit


def parse_clause(text: str, feature: bool = True) -> OrderedClause:
    """Parse ``head :- b1, b2, ...`` (or a bare atom) into an ordered clause."""
    head, body = _Parser(text).clause()
    if feature:
        for lit in body:
            if lit.predicate == head.predicate:
                raise FeatureClauseError(
                    f"body literal {lit} uses the head predicate {head.predicate}")
    return OrderedClause(head, tuple(body))


def parse_clauses(text: str) -> List[OrderedClause]:
    """One clause per line; blank lines and ``%`` comments are skipped."""
    out = []
    for line in text.splitlines():
        line = line.split("%", 1)[0].strip()
        if line:
            out.append(parse_clause(line))
    return out


def format_clauses(clauses: Iterable[OrderedClause]) -> str:
    return "".join(f"{c}.\n" for c in clauses)


# ---------------------------------------------------------------------------
# Substitutions

Substitution = Dict[str, Term]


def substitute(t: Term, theta: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return theta.get(t.name, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(substitute(a, theta) for a in t.args))
    return t


def substitute_literal(lit: Literal, theta: Mapping[str, Term]) -> Literal:
    if not theta:
        return lit
    return Literal(lit.predicate, tuple(substitute(a, theta) for a in lit.args), lit.positive)


def apply_substitution(c: OrderedClause, theta: Mapping[str, Term]) -> OrderedClause:
    if not theta:
        return c
    return OrderedClause(substitute_literal(c.head, theta),
                         tuple(substitute_literal(l, theta) for l in c.body))


def normalize_substitution(theta: Mapping[str, Term]) -> Substitution:
    """Drop identity bindings and resolve chains so application is idempotent."""
    out = {k: v for k, v in theta.items() if v != Var(k)}
    for _ in range(len(out) + 1):
        changed = False
        for k, v in list(out.items()):
            nv = substitute(v, out)
            if nv != v:
                out[k] = nv
                changed = True
        if not changed:
            break
    return {k: v for k, v in out.items() if v != Var(k)}


def compose(theta1: Mapping[str, Term], theta2: Mapping[str, Term]) -> Substitution:
    """The substitution equal to applying ``theta1`` then ``theta2``."""
    out = {k: substitute(v, theta2) for k, v in theta1.items()}
    for k, v in theta2.items():
        if k not in out:
            out[k] = v
    return {k: v for k, v in out.items() if v != Var(k)}


def rename_vars(c: OrderedClause, mapping: Mapping[str, str]) -> OrderedClause:
    return apply_substitution(c, {k: Var(v) for k, v in mapping.items() if k != v})


_BASE = re.compile(r"^(.*?)(\d*)$")


def _fresh_name(base: str, counter: int, taken: set) -> Tuple[str, int]:
    stem = _BASE.match(base).group(1) or "V"
    while True:
        name = f"{stem}{counter}"
        counter += 1
        if name not in taken:
            return name, counter


def standardize_apart(clauses: Sequence[OrderedClause]) -> List[OrderedClause]:
    """Rename every non-head variable so the clauses share only head variables.

    Fresh names are the variable's stem plus a counter that runs across the
    whole call, so the result is deterministic.
    """
    head_vars = set()
    for c in clauses:
        head_vars.update(c.head_variables())
    counter = 0
    out = []
    for c in clauses:
        hv = set(c.head_variables())
        mapping = {}
        for v in c.variables():
            if v in hv:
                continue
            mapping[v], counter = _fresh_name(v, counter, head_vars)
        out.append(rename_vars(c, mapping))
    return out


def rename_apart_from(c: OrderedClause, other: OrderedClause) -> OrderedClause:
    """Rename the non-head variables of ``c`` that clash with variables of ``other``."""
    taken = set(other.variables()) | set(c.variables())
    hv = set(c.head_variables())
    mapping = {}
    counter = 0
    for v in c.variables():
        if v in hv or v not in taken - hv or v not in set(other.variables()):
            continue
        name, counter = _fresh_name(v, counter, taken)
        taken.add(name)
        mapping[v] = name
    return rename_vars(c, mapping)


def canonical_rename(c: OrderedClause, prefix: str = "Y") -> OrderedClause:
    """Number non-head variables by first occurrence: ``Y1, Y2, ...``."""
    hv = set(c.head_variables())
    mapping = {}
    n = 0
    for v in c.variables():
        if v in hv:
            continue
        n += 1
        name = f"{prefix}{n}"
        while name in hv:
            n += 1
            name = f"{prefix}{n}"
        mapping[v] = name
    return rename_vars(c, mapping)


# ---------------------------------------------------------------------------
# Matching and subsumption


def match(pattern: Term, target: Term, theta: Dict[str, Term]) -> bool:
    """One-way matching: extend ``theta`` so that pattern·theta == target.

    Only variables of ``pattern`` are bound; ``target`` is treated as rigid.
    On failure ``theta`` may contain partial bindings; callers copy first.
    """
    if isinstance(pattern, Var):
        bound = theta.get(pattern.name)
        if bound is None:
            theta[pattern.name] = target
            return True
        return bound == target
    if isinstance(pattern, Const):
        return pattern == target
    if not isinstance(target, Compound) or target.functor != pattern.functor \
            or len(target.args) != len(pattern.args):
        return False
    for p, t in zip(pattern.args, target.args):
        if not match(p, t, theta):
            return False
    return True


def match_literal(pattern: Literal, target: Literal, theta: Dict[str, Term]) -> Optional[Dict[str, Term]]:
    if pattern.predicate != target.predicate or pattern.arity != target.arity \
            or pattern.positive != target.positive:
        return None
    trial = dict(theta)
    for p, t in zip(pattern.args, target.args):
        if not match(p, t, trial):
            return None
    return trial


def _subsumes_body(body: Sequence[Literal], targets: Sequence[Literal],
                   theta: Dict[str, Term]) -> Optional[Dict[str, Term]]:
    if not body:
        return theta
    by_pred: Dict[Tuple[str, int], List[Literal]] = {}
    for t in targets:
        by_pred.setdefault(t.key, []).append(t)
    # most constrained literal first
    order = sorted(body, key=lambda l: len(by_pred.get(l.key, ())))

    def search(i: int, th: Dict[str, Term]) -> Optional[Dict[str, Term]]:
        if i == len(order):
            return th
        lit = order[i]
        for cand in by_pred.get(lit.key, ()):
            nxt = match_literal(lit, cand, th)
            if nxt is not None:
                res = search(i + 1, nxt)
                if res is not None:
                    return res
        return None

    return search(0, theta)


def subsumption_witness(c: OrderedClause, d: OrderedClause) -> Optional[Substitution]:
    """A substitution θ with Set(c)θ ⊆ Set(d), or None."""
    theta = match_literal(c.head, d.head, {})
    if theta is None:
        return None
    return _subsumes_body(c.body, d.body, theta)


def theta_subsumes(c: OrderedClause, d: OrderedClause) -> bool:
    return subsumption_witness(c, d) is not None


class _FalseBody:
    """Marker for a clause whose equalities are unsatisfiable."""

    def __repr__(self):
        return "FALSE"


FALSE = _FalseBody()


def normalize_equalities(c: OrderedClause) -> Union[OrderedClause, _FalseBody]:
    """Resolve ``=/2`` body literals by unification.

    Variables linked by equalities are replaced by one representative (a head
    variable when the class has one, otherwise the earliest variable), ground
    sides bind the class to that term, and satisfied equalities are dropped.
    Duplicate literals are removed.  Returns ``FALSE`` when two distinct ground
    terms are equated.
    """
    eqs = [l for l in c.body if l.predicate == EQ and l.arity == 2]
    if not eqs:
        if len(set(c.body)) == len(c.body):
            return c
        return OrderedClause(c.head, tuple(dict.fromkeys(c.body)))
    order = {v: i for i, v in enumerate(c.variables())}
    head_vars = set(c.head_variables())
    parent: Dict[str, str] = {}
    value: Dict[str, Term] = {}

    def find(v: str) -> str:
        while parent.get(v, v) != v:
            parent[v] = parent.get(parent[v], parent[v])
            v = parent[v]
        return v

    def rank(v: str):
        return (0 if v in head_vars else 1, order.get(v, len(order)))

    def bind(root: str, t: Term) -> bool:
        old = value.get(root)
        if old is None:
            value[root] = t
            return True
        return old == t

    for eq in eqs:
        a, b = eq.args
        if isinstance(a, Var) and isinstance(b, Var):
            ra, rb = find(a.name), find(b.name)
            if ra == rb:
                continue
            keep, drop = (ra, rb) if rank(ra) <= rank(rb) else (rb, ra)
            parent[drop] = keep
            if drop in value:
                if not bind(keep, value.pop(drop)):
                    return FALSE
        elif isinstance(a, Var) or isinstance(b, Var):
            v, t = (a, b) if isinstance(a, Var) else (b, a)
            if not is_ground(t):
                continue
            if not bind(find(v.name), t):
                return FALSE
        else:
            if a != b:
                if is_ground(a) and is_ground(b):
                    return FALSE
    theta: Dict[str, Term] = {}
    for v in order:
        r = find(v)
        target = value.get(r, Var(r))
        if target != Var(v):
            theta[v] = target
    head = substitute_literal(c.head, theta)
    body = []
    for l in c.body:
        nl = substitute_literal(l, theta)
        if nl.predicate == EQ and nl.arity == 2:
            x, y = nl.args
            if x == y:
                continue
            if is_ground(x) and is_ground(y):
                return FALSE
            if not (isinstance(l.args[0], Var) or isinstance(l.args[1], Var)):
                body.append(nl)
                continue
            continue
        body.append(nl)
    return OrderedClause(head, tuple(dict.fromkeys(body)))


def predicate_signature(c: Union[OrderedClause, _FalseBody]) -> frozenset:
    """Cheap invariant of equivalence: the set of body predicate symbols."""
    if c is FALSE:
        return frozenset({"<false>"})
    return frozenset(l.key for l in c.body)


def equivalent(c: OrderedClause, d: OrderedClause) -> bool:
    """Equivalence under equality logic for clauses built from ρ1/ρ2."""
    nc, nd = normalize_equalities(c), normalize_equalities(d)
    return equivalent_normalized(nc, nd)


def equivalent_normalized(nc, nd) -> bool:
    if nc is FALSE or nd is FALSE:
        return nc is nd
    if nc.head.key != nd.head.key:
        return False
    if predicate_signature(nc) != predicate_signature(nd):
        return False
    return theta_subsumes(nc, nd) and theta_subsumes(nd, nc)


def is_variant(c: OrderedClause, d: OrderedClause, fixed: Iterable[str] = ()) -> Optional[Dict[str, str]]:
    """Literal-by-literal renaming from ``c`` onto ``d`` (order preserved).

    Variables in ``fixed`` must map to themselves.  Returns the renaming or None.
    """
    if len(c.body) != len(d.body):
        return None
    fwd: Dict[str, str] = {v: v for v in fixed}
    bwd: Dict[str, str] = {v: v for v in fixed}

    def walk(a: Term, b: Term) -> bool:
        if isinstance(a, Var):
            if not isinstance(b, Var):
                return False
            if fwd.get(a.name, b.name) != b.name or bwd.get(b.name, a.name) != a.name:
                return False
            fwd[a.name] = b.name
            bwd[b.name] = a.name
            return True
        if isinstance(a, Const):
            return a == b
        if not isinstance(b, Compound) or a.functor != b.functor or len(a.args) != len(b.args):
            return False
        return all(walk(x, y) for x, y in zip(a.args, b.args))

    for la, lb in zip(c.literals(), d.literals()):
        if la.key != lb.key or la.positive != lb.positive:
            return None
        if not all(walk(x, y) for x, y in zip(la.args, lb.args)):
            return None
    return fwd


# ---------------------------------------------------------------------------
# Ground facts and feature evaluation


class UnknownPredicateError(KeyError):
    pass


class _Table:
    """Ground tuples for one predicate with per-argument hash indexes."""

    __slots__ = ("rows", "index")

    def __init__(self, arity: int):
        self.rows: List[Tuple[Term, ...]] = []
        self.index: List[Dict[Term, List[Tuple[Term, ...]]]] = [dict() for _ in range(arity)]

    def add(self, row: Tuple[Term, ...]) -> None:
        self.rows.append(row)
        for i, t in enumerate(row):
            self.index[i].setdefault(t, []).append(row)

    def candidates(self, pattern: Sequence[Optional[Term]]) -> Sequence[Tuple[Term, ...]]:
        best = self.rows
        for i, t in enumerate(pattern):
            if t is not None:
                rows = self.index[i].get(t)
                if rows is None:
                    return ()
                if len(rows) < len(best):
                    best = rows
        return best


@dataclass(frozen=True)
class Instance:
    id: Term
    label: Optional[str] = None
    target: Optional[str] = None

    @property
    def key(self) -> str:
        return str(self.id)

    @property
    def target_class(self) -> Optional[str]:
        return self.target if self.target is not None else self.label


class FactStore:
    """Global ground facts plus facts local to individual instances.

    ``=/2`` is never stored; it is decided structurally during evaluation.
    """

    def __init__(self):
        self._global: Dict[Tuple[str, int], _Table] = {}
        self._local: Dict[str, Dict[Tuple[str, int], _Table]] = {}
        self._known: set = set()
        self._seen: set = set()

    def declare(self, predicate: str, arity: int) -> None:
        self._known.add((predicate, arity))

    def add(self, lit: Literal, instance: Optional[Term] = None) -> None:
        if lit.predicate == EQ:
            raise ValueError("=/2 is built in and cannot be stored")
        if not lit.is_ground():
            raise ValueError(f"fact {lit} is not ground")
        key = lit.key
        self._known.add(key)
        scope = self._global if instance is None else self._local.setdefault(str(instance), {})
        dedup = (str(instance) if instance is not None else None, lit)
        if dedup in self._seen:
            return
        self._seen.add(dedup)
        table = scope.get(key)
        if table is None:
            table = scope[key] = _Table(lit.arity)
        table.add(lit.args)

    def knows(self, key: Tuple[str, int]) -> bool:
        return key == (EQ, 2) or key in self._known

    def instances(self) -> List[str]:
        return list(self._local)

    def facts(self, instance: Optional[str] = None) -> Iterator[Literal]:
        scope = self._global if instance is None else self._local.get(instance, {})
        for (pred, _), table in scope.items():
            for row in table.rows:
                yield Literal(pred, row)

    def lookup(self, key: Tuple[str, int], pattern: Sequence[Optional[Term]],
               instance: Optional[str]) -> Iterator[Tuple[Term, ...]]:
        t = self._global.get(key)
        if t is not None:
            yield from t.candidates(pattern)
        if instance is not None:
            scope = self._local.get(instance)
            if scope is not None:
                t = scope.get(key)
                if t is not None:
                    yield from t.candidates(pattern)

    def __len__(self) -> int:
        return len(self._seen)


def _resolve(t: Term, b: Mapping[str, Term]) -> Optional[Term]:
    """Ground value of ``t`` under bindings ``b`` or None if it has free variables."""
    if isinstance(t, Var):
        return b.get(t.name)
    if isinstance(t, Compound):
        args = []
        for a in t.args:
            r = _resolve(a, b)
            if r is None:
                return None
            args.append(r)
        return Compound(t.functor, tuple(args))
    return t


def ground_head(c: OrderedClause, instance_id: Term) -> Optional[Dict[str, Term]]:
    """θ_a: the bindings that make the head argument equal the instance id."""
    if c.head.arity != 1:
        raise ValueError(f"feature-clause head {c.head} must be unary")
    theta: Dict[str, Term] = {}
    if not match(c.head.args[0], instance_id, theta):
        return None
    return theta


def solve(body: Sequence[Literal], facts: FactStore, bindings: Dict[str, Term],
          instance: Optional[str]) -> Iterator[Dict[str, Term]]:
    """Depth-first conjunctive matching of ``body`` in literal order."""
    if not body:
        yield bindings
        return
    lit, rest = body[0], body[1:]
    if lit.predicate == EQ and lit.arity == 2:
        a = _resolve(lit.args[0], bindings)
        b = _resolve(lit.args[1], bindings)
        if a is not None and b is not None:
            if a == b:
                yield from solve(rest, facts, bindings, instance)
            return
        if a is None and b is None:
            # neither side is ground yet: wait for a later literal to bind one
            if any(not _unbound_eq(l, bindings) for l in rest):
                yield from solve(tuple(rest) + (lit,), facts, bindings, instance)
            elif _unifiable([(l.args[0], l.args[1]) for l in body], bindings):
                yield bindings
            return
        free, val = (lit.args[0], b) if a is None else (lit.args[1], a)
        nb = dict(bindings)
        if match(free, val, nb):
            yield from solve(rest, facts, nb, instance)
        return
    key = lit.key
    if not facts.knows(key):
        raise UnknownPredicateError(f"{key[0]}/{key[1]}")
    pattern = [_resolve(a, bindings) for a in lit.args]
    for row in facts.lookup(key, pattern, instance):
        nb = dict(bindings)
        ok = True
        for arg, val, t in zip(lit.args, pattern, row):
            if val is not None:
                if val != t:
                    ok = False
                    break
            elif not match(arg, t, nb):
                ok = False
                break
        if ok:
            yield from solve(rest, facts, nb, instance)


def _unbound_eq(lit: Literal, b: Mapping[str, Term]) -> bool:
    return (lit.predicate == EQ and lit.arity == 2
            and _resolve(lit.args[0], b) is None and _resolve(lit.args[1], b) is None)


def _unifiable(pairs: Sequence[Tuple[Term, Term]], bindings: Mapping[str, Term]) -> bool:
    """Syntactic unification with occurs check; free variables range over
    the (non-empty) universe, so a unifier is a witness."""
    sub: Dict[str, Term] = dict(bindings)

    def walk(t):
        while isinstance(t, Var) and t.name in sub:
            t = sub[t.name]
        return t

    def occurs(v, t):
        t = walk(t)
        if isinstance(t, Var):
            return t.name == v
        return isinstance(t, Compound) and any(occurs(v, x) for x in t.args)

    todo = list(pairs)
    while todo:
        x, y = (walk(t) for t in todo.pop())
        if x == y:
            continue
        if isinstance(x, Var) or isinstance(y, Var):
            v, t = (x, y) if isinstance(x, Var) else (y, x)
            if occurs(v.name, t):
                return False
            sub[v.name] = t
        elif isinstance(x, Compound) and isinstance(y, Compound) and x.functor == y.functor \
                and len(x.args) == len(y.args):
            todo.extend(zip(x.args, y.args))
        else:
            return False
    return True


def evaluate_feature(c: OrderedClause, facts: FactStore, a: Instance) -> int:
    """1 iff the body is satisfiable with the head bound to ``a.id``."""
    theta = ground_head(c, a.id)
    if theta is None:
        return 0
    for _ in solve(c.body, facts, theta, a.key):
        return 1
    return 0


# ---------------------------------------------------------------------------
# File formats


def parse_facts(text: str) -> Tuple[FactStore, List[Term]]:
    """Facts file: global facts, then ``#instance <id>`` sections."""
    store = FactStore()
    current: Optional[Term] = None
    order: List[Term] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("#instance"):
            current = parse_term(line[len("#instance"):].strip())
            order.append(current)
            store._local.setdefault(str(current), {})
            continue
        try:
            lit = parse_literal(line)
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}", line, e.pos) from None
        store.add(lit, current)
    return store, order


def format_facts(store: FactStore) -> str:
    lines = [f"{lit}." for lit in store.facts()]
    for inst in store.instances():
        lines.append(f"#instance {inst}")
        lines.extend(f"{lit}." for lit in store.facts(inst))
    return "\n".join(lines) + "\n"

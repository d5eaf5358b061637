"""Mode declarations, type definitions and mode-language membership."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .logic import (EQ, TUPLE, Compound, Const, Literal, OrderedClause, ParseError, Term, Var,
                    _Parser, _tokenize, is_ground, parse_term)

INPUT, OUTPUT, CONSTANT = "input", "output", "constant"
_SIGILS = {"+": INPUT, "-": OUTPUT, "#": CONSTANT}
_SIGIL_OF = {v: k for k, v in _SIGILS.items()}


@dataclass(frozen=True)
class Slot:
    """A leaf mode-term: ``+type``, ``-type`` or ``#type``."""

    kind: str
    type: str

    def __str__(self):
        return f"{_SIGIL_OF[self.kind]}{self.type}"


@dataclass(frozen=True)
class Structured:
    functor: str
    args: Tuple["ModeTerm", ...]

    def __str__(self):
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


ModeTerm = Union[Slot, Structured]


@dataclass(frozen=True)
class ModeDecl:
    kind: str  # "modeh" or "modeb"
    predicate: str
    args: Tuple[ModeTerm, ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> Tuple[str, int]:
        return (self.predicate, len(self.args))

    def leaves(self) -> List[Tuple[Tuple[int, ...], Slot]]:
        out: List[Tuple[Tuple[int, ...], Slot]] = []

        def walk(mt, place):
            if isinstance(mt, Slot):
                out.append((place, mt))
            else:
                for i, a in enumerate(mt.args, 1):
                    walk(a, place + (i,))

        for i, a in enumerate(self.args, 1):
            walk(a, (i,))
        return out

    def __str__(self):
        if self.predicate == EQ and self.arity == 2:
            inner = f"{self.args[0]} = {self.args[1]}"
        else:
            inner = f"{self.predicate}({','.join(str(a) for a in self.args)})"
        return f"{self.kind}({inner})"


class ModeError(ValueError):
    """Configuration problem in the modes (missing type extension, bad structure)."""


class ModeMismatch(ValueError):
    """A literal does not have the shape its mode declaration requires."""


class TypeDefs(dict):
    """Type name -> frozenset of ground terms."""

    def members(self, name: str) -> FrozenSet[Term]:
        if name not in self:
            raise ModeError(f"no type definition for {name!r}")
        return self[name]

    def add(self, name: str, members: Iterable[Term]) -> None:
        members = list(members)
        for m in members:
            if not is_ground(m):
                raise ModeError(f"type {name} member {m} is not ground")
        self[name] = frozenset(self.get(name, frozenset()) | frozenset(members))

    def ordered(self, name: str) -> List[Term]:
        """Members in a stable order (numbers numerically, then by text)."""
        def key(t):
            s = str(t)
            return (0, float(s), s) if _is_number(s) else (1, 0.0, s)
        return sorted(self.members(name), key=key)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class Violation:
    constraint: str
    decl: Optional[ModeDecl]
    message: str

    def __str__(self):
        return f"{self.constraint}: {self.message}"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "; ".join(str(v) for v in self.violations)


class ModeSet:
    def __init__(self, decls: Iterable[ModeDecl] = ()):
        self.decls: List[ModeDecl] = []
        self._by_key: Dict[Tuple[str, int], List[ModeDecl]] = {}
        self.constrained = False
        for d in decls:
            self.add(d)

    def add(self, d: ModeDecl) -> None:
        if d in self.decls:
            return
        self.decls.append(d)
        self._by_key.setdefault(d.key, []).append(d)
        self.constrained = False

    def __iter__(self):
        return iter(self.decls)

    def __len__(self):
        return len(self.decls)

    @property
    def head(self) -> Optional[ModeDecl]:
        heads = [d for d in self.decls if d.kind == "modeh"]
        return heads[0] if heads else None

    def body_decls(self) -> List[ModeDecl]:
        return [d for d in self.decls if d.kind == "modeb"]

    def modes_for(self, key: Tuple[str, int], kind: str = "modeb") -> List[ModeDecl]:
        return [d for d in self._by_key.get(key, ()) if d.kind == kind]

    def equality_types(self) -> List[str]:
        out = []
        for d in self.modes_for((EQ, 2)):
            leaves = d.leaves()
            if len(leaves) == 2 and leaves[0][1].type == leaves[1][1].type:
                out.append(leaves[0][1].type)
        return out

    def types(self) -> List[str]:
        seen: Dict[str, None] = {}
        for d in self.decls:
            for _, slot in d.leaves():
                seen.setdefault(slot.type)
        return list(seen)

    def variable_types(self) -> List[str]:
        seen: Dict[str, None] = {}
        for d in self.decls:
            for _, slot in d.leaves():
                if slot.kind != CONSTANT:
                    seen.setdefault(slot.type)
        return list(seen)

    def text(self) -> str:
        return "".join(f"{d}.\n" for d in self.decls)

    def digest(self) -> str:
        return hashlib.sha256(self.text().encode()).hexdigest()[:16]

    def copy(self) -> "ModeSet":
        m = ModeSet(self.decls)
        m.constrained = self.constrained
        return m


# ---------------------------------------------------------------------------
# Parsing


class _ModeParser(_Parser):
    def mode_term(self) -> ModeTerm:
        kind, v, pos = self.next()
        if kind == "punct" and v in _SIGILS:
            k2, name, p2 = self.next()
            if k2 != "atom":
                raise ParseError("expected a type name", self.text, p2)
            return Slot(_SIGILS[v], name)
        if kind == "atom" and self.peek("("):
            self.next()
            return Structured(v, tuple(self.mode_args(")")))
        if kind == "punct" and v == "(":
            args = self.mode_args(")")
            return args[0] if len(args) == 1 else Structured(TUPLE, tuple(args))
        raise ParseError(f"expected a mode-term, found {v!r}", self.text, pos)

    def mode_args(self, close: str) -> List[ModeTerm]:
        args = [self.mode_term()]
        while self.peek(","):
            self.next()
            args.append(self.mode_term())
        self.expect(close)
        return args

    def mode_atom(self, kind: str) -> ModeDecl:
        start = self.i
        k, v, pos = self.toks[self.i]
        if k == "atom" and self.toks[self.i + 1][1] == "(":
            self.next()
            self.next()
            args = self.mode_args(")")
            if not self.peek("="):
                return ModeDecl(kind, v, tuple(args))
            self.i = start
        lhs = self.mode_term()
        self.expect("=")
        rhs = self.mode_term()
        return ModeDecl(kind, EQ, (lhs, rhs))


def parse_mode_decl(text: str) -> ModeDecl:
    p = _ModeParser(text)
    kind, v, pos = p.next()
    if v not in ("modeh", "modeb"):
        raise ParseError("expected modeh or modeb", text, pos)
    p.expect("(")
    decl = p.mode_atom(v)
    p.expect(")")
    if p.peek("."):
        p.next()
    if p.peek():
        p.error("trailing input")
    return decl


def _parse_type(text: str) -> Tuple[str, List[Term]]:
    p = _Parser(text)
    kind, v, pos = p.next()
    if v != "type":
        raise ParseError("expected type(...)", text, pos)
    p.expect("(")
    k, name, pos = p.next()
    if k != "atom":
        raise ParseError("expected a type name", text, pos)
    p.expect(",")
    lst = p.term()
    p.expect(")")
    if p.peek("."):
        p.next()
    if p.peek():
        p.error("trailing input")
    members = []
    while isinstance(lst, Compound) and lst.functor == "." and len(lst.args) == 2:
        members.append(lst.args[0])
        lst = lst.args[1]
    if lst != Const("[]"):
        raise ParseError("type members must be a list", text, 0)
    return name, members


def parse_modes(text: str) -> Tuple[ModeSet, TypeDefs]:
    modes = ModeSet()
    types = TypeDefs()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("type"):
                name, members = _parse_type(line)
                types.add(name, members)
            else:
                modes.add(parse_mode_decl(line))
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}", line, e.pos) from None
    return modes, types


def format_modes(modes: ModeSet, types: TypeDefs) -> str:
    lines = [f"{d}." for d in modes]
    for name in types:
        lines.append(f"type({name},[{','.join(str(t) for t in types.ordered(name))}]).")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Constraints


def validate_constraints(m: ModeSet) -> ValidationReport:
    """Check MC1 (one mode per predicate), MC2 (body modes have an input) and
    MC3 (a single unary head predicate without body modes).

    ``=/2`` may carry one mode per type; every other predicate gets exactly one.
    """
    report = ValidationReport()
    for key, decls in m._by_key.items():
        if key == (EQ, 2):
            types = [d.leaves()[0][1].type for d in decls if d.kind == "modeb"]
            dup = {t for t in types if types.count(t) > 1}
            for t in sorted(dup):
                report.violations.append(Violation("MC1", None, f"several equality modes for type {t}"))
            continue
        if len(decls) > 1:
            report.violations.append(Violation(
                "MC1", decls[1], f"{len(decls)} mode declarations for {key[0]}/{key[1]}"))
    for d in m.body_decls():
        if not any(s.kind == INPUT for _, s in d.leaves()):
            report.violations.append(Violation("MC2", d, f"{d} has no input argument"))
    heads = [d for d in m if d.kind == "modeh"]
    if len({d.key for d in heads}) > 1:
        report.violations.append(Violation("MC3", heads[1], "more than one head predicate"))
    for d in heads:
        if d.arity != 1:
            report.violations.append(Violation("MC3", d, f"head predicate {d.predicate} is not unary"))
        if m.modes_for(d.key, "modeb"):
            report.violations.append(Violation("MC3", d, f"head predicate {d.predicate} has a modeb"))
    m.constrained = report.ok
    return report


def extend_with_equality(m: ModeSet, types: Optional[Iterable[str]] = None) -> ModeSet:
    """M′: M plus ``modeb(+γ = +γ)`` for every type γ (skipping existing ones)."""
    out = m.copy()
    have = set(m.equality_types())
    for t in (m.types() if types is None else types):
        if t not in have:
            out.add(ModeDecl("modeb", EQ, (Slot(INPUT, t), Slot(INPUT, t))))
    validate_constraints(out)
    return out


# ---------------------------------------------------------------------------
# Places and membership


def term_places(lit: Literal, mode: ModeDecl) -> List[Tuple[Tuple[int, ...], str, str, Term]]:
    """Pair every leaf slot of ``mode`` with the literal's term at that place."""
    if lit.key != mode.key:
        raise ModeMismatch(f"{lit} does not match {mode}")
    out = []

    def walk(mt, t, place):
        if isinstance(mt, Slot):
            out.append((place, mt.kind, mt.type, t))
            return
        if not isinstance(t, Compound) or t.functor != mt.functor or len(t.args) != len(mt.args):
            raise ModeMismatch(f"{lit}: expected {mt} at place {place}, found {t}")
        for i, (a, ta) in enumerate(zip(mt.args, t.args), 1):
            walk(a, ta, place + (i,))

    for i, (mt, t) in enumerate(zip(mode.args, lit.args), 1):
        walk(mt, t, (i,))
    return out


@dataclass
class Membership:
    ok: bool
    reason: str = ""
    sequence: List[Tuple[Literal, ModeDecl]] = field(default_factory=list)
    var_types: Dict[str, str] = field(default_factory=dict)
    inputs: List[List[str]] = field(default_factory=list)
    outputs: List[List[str]] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _pick_mode(lit: Literal, m: ModeSet, kind: str, var_types: Mapping[str, str]) -> Optional[ModeDecl]:
    cands = m.modes_for(lit.key, kind)
    if len(cands) <= 1:
        return cands[0] if cands else None
    # only =/2 has several modes; its type comes from an already-typed argument
    for a in lit.args:
        if isinstance(a, Var) and a.name in var_types:
            for d in cands:
                if d.leaves()[0][1].type == var_types[a.name]:
                    return d
            return None
    return None


def in_mode_language(c: OrderedClause, m: ModeSet, t: Optional[TypeDefs] = None) -> Membership:
    """Decide membership by building the λμ-sequence in one pass."""
    var_types: Dict[str, str] = {}
    seq: List[Tuple[Literal, ModeDecl]] = []
    ins: List[List[str]] = []
    outs: List[List[str]] = []

    def fail(msg):
        return Membership(False, msg, seq, var_types, ins, outs)

    available: set = set()
    head_outputs: List[str] = []
    for idx, lit in enumerate(c.literals()):
        kind = "modeh" if idx == 0 else "modeb"
        if idx > 0 and not lit.positive:
            return fail(f"negative literal {lit}")
        mode = _pick_mode(lit, m, kind, var_types)
        if mode is None:
            return fail(f"Match: no {kind} for {lit}")
        try:
            places = term_places(lit, mode)
        except ModeMismatch as e:
            return fail(f"Match: {e}")
        li, lo = [], []
        for place, mk, ty, term in places:
            if mk == CONSTANT:
                if not is_ground(term):
                    return fail(f"Terms: {term} at {place} of {lit} must be ground")
                if t is None:
                    raise ModeError(f"type definitions needed for constant slot #{ty}")
                if term not in t.members(ty):
                    return fail(f"Types: {term} is not of type {ty}")
                continue
            if not isinstance(term, Var):
                return fail(f"Terms: {term} at {place} of {lit} must be a variable")
            prev = var_types.setdefault(term.name, ty)
            if prev != ty:
                return fail(f"Types: {term} used as {prev} and {ty}")
            (li if mk == INPUT else lo).append(term.name)
        if idx == 0:
            available.update(li)
            head_outputs = lo
        else:
            for v in li:
                if v not in available:
                    return fail(f"Ordering: input {v} of {lit} is not introduced earlier")
            available.update(lo)
        seq.append((lit, mode))
        ins.append(li)
        outs.append(lo)
    body_outputs = {v for lo in outs[1:] for v in lo}
    for v in head_outputs:
        if v not in body_outputs:
            return fail(f"Ordering: head output {v} never produced")
    return Membership(True, "", seq, var_types, ins, outs)

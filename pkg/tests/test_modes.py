import random

import pytest
from hypothesis import given, strategies as st

from crm.datagen import KRK_MODES, TRAINS_MODES
from crm.logic import Const, ParseError, Var, parse_clause, parse_literal, rename_vars
from crm.modes import (CONSTANT, INPUT, OUTPUT, ModeMismatch, Slot, Structured, extend_with_equality,
                       format_modes, in_mode_language, parse_mode_decl, parse_modes, term_places,
                       validate_constraints)

from clausegen import random_clause

C = parse_clause
EXAMPLE2 = """\
modeh(p(+train)).
modeb(has_car(+train,-car)).
modeb(short(+car)).
modeb(closed(+car)).
"""


def test_parse_body_mode():
    d = parse_mode_decl("modeb(has_car(+train,-car)).")
    assert d.kind == "modeb" and d.predicate == "has_car"
    assert d.args == (Slot(INPUT, "train"), Slot(OUTPUT, "car"))


def test_parse_structured_head():
    d = parse_mode_decl("modeh(p(board(+file,+rank,+file,+rank,+file,+rank))).")
    (arg,) = d.args
    assert isinstance(arg, Structured) and arg.functor == "board" and len(arg.args) == 6
    assert [s.type for _, s in d.leaves()] == ["file", "rank"] * 3


def test_parse_empty():
    m, t = parse_modes("")
    assert len(m) == 0 and len(t) == 0


def test_parse_types_and_round_trip():
    m, t = parse_modes(TRAINS_MODES)
    assert t["count"] == frozenset({Const("1"), Const("2"), Const("3")})
    m2, t2 = parse_modes(format_modes(m, t))
    assert m2.text() == m.text() and t2 == t


def test_parse_error_names_line():
    with pytest.raises(ParseError, match="line 2"):
        parse_modes("modeh(p(+t)).\nmodeb(q(+t,).\n")


def test_validation_examples():
    m, _ = parse_modes("modeh(p(+train)).\nmodeb(short(+car)).\n")
    assert validate_constraints(m) and m.constrained
    m, _ = parse_modes("modeh(p(+train)).\nmodeb(short(+car)).\nmodeb(short(+train)).\n")
    rep = validate_constraints(m)
    assert not rep and [v.constraint for v in rep.violations] == ["MC1"] and not m.constrained
    m, _ = parse_modes("modeh(p(+train)).\nmodeb(zero_inputs(-car)).\n")
    assert [v.constraint for v in validate_constraints(m).violations] == ["MC2"]


def test_mc3_violations():
    m, _ = parse_modes("modeh(p(+a,+b)).\n")
    assert [v.constraint for v in validate_constraints(m).violations] == ["MC3"]
    m, _ = parse_modes("modeh(p(+a)).\nmodeb(p(+a)).\n")
    assert "MC3" in [v.constraint for v in validate_constraints(m).violations]


def test_equality_modes_one_per_type():
    m, _ = parse_modes("modeh(p(+t)).\nmodeb(+a = +a).\nmodeb(+b = +b).\n")
    assert validate_constraints(m)


def test_term_places_examples():
    d = parse_mode_decl("modeb(has_car(+train,-car))")
    assert term_places(parse_literal("has_car(X,Y)"), d) == [
        ((1,), INPUT, "train", Var("X")), ((2,), OUTPUT, "car", Var("Y"))]
    h = parse_mode_decl("modeh(p(t(+file,+rank)))")
    assert term_places(parse_literal("p(t(A,B))"), h) == [
        ((1, 1), INPUT, "file", Var("A")), ((1, 2), INPUT, "rank", Var("B"))]
    s = parse_mode_decl("modeb(short(+car))")
    [(_, kind, _, term)] = term_places(parse_literal("short(c1_1)"), s)
    assert kind == INPUT and term == Const("c1_1")
    with pytest.raises(ModeMismatch):
        term_places(parse_literal("p(A)"), h)


def test_membership_examples():
    m, t = parse_modes(EXAMPLE2)
    validate_constraints(m)
    assert in_mode_language(C("p(X) :- has_car(X,Y), has_car(X,Z), short(Y), closed(Z)"), m, t)
    r = in_mode_language(C("p(X) :- short(Y)"), m, t)
    assert not r and r.reason.startswith("Ordering")
    assert not in_mode_language(C("p(X) :- has_car(X,Y), has_car(X,Z), Y=Z"), m, t)
    m2 = extend_with_equality(m)
    assert in_mode_language(C("p(X) :- has_car(X,Y), has_car(X,Z), Y=Z"), m2, t)
    assert not in_mode_language(C("p(X) :- has_car(X,Y), Y=Z"), m2, t)


def test_membership_failure_kinds():
    m, t = parse_modes(TRAINS_MODES)
    validate_constraints(m)
    assert in_mode_language(C("p(X) :- has_car(X,Y), shape(Y,bucket)"), m, t)
    assert in_mode_language(C("p(X) :- has_car(X,Y), shape(Y,circle)"), m, t).reason.startswith("Types")
    assert in_mode_language(C("p(X) :- has_car(X,Y), shape(Y,Z)"), m, t).reason.startswith("Terms")
    assert in_mode_language(C("p(X) :- short(c1)"), m, t).reason.startswith("Terms")
    assert in_mode_language(C("p(X) :- has_car(X,Y), has_car(Y,Z)"), m, t).reason.startswith("Types")
    assert in_mode_language(C("p(X) :- nope(X)"), m, t).reason.startswith("Match")


def test_krk_modes_membership():
    m, t = parse_modes(KRK_MODES)
    assert validate_constraints(m)
    assert in_mode_language(C("p(board(A,B,C,D,E,F)) :- adj(A,E), adj(B,F)"), m, t)
    assert in_mode_language(C("p(board(A,B,C,D,E,F)) :- C=E"), m, t)
    assert not in_mode_language(C("p(X) :- adj(X,X)"), m, t)


def test_extend_with_equality_deduplicates():
    m, _ = parse_modes(KRK_MODES)
    m2 = extend_with_equality(m)
    assert len(m2) == len(m)
    assert extend_with_equality(m2).text() == m2.text()


def _langs():
    out = []
    for text in (TRAINS_MODES, KRK_MODES):
        m, t = parse_modes(text)
        validate_constraints(m)
        if text is TRAINS_MODES:
            t.add("train", [Const("t1")])
        out.append((m, t))
    return out


LANGS = _langs()


@given(st.integers(0, 10 ** 6), st.sampled_from([0, 1]))
def test_membership_invariant_under_renaming(seed, which):
    m, t = LANGS[which]
    c = random_clause(random.Random(seed), m, t)
    assert in_mode_language(c, m, t)
    mapping = {v: f"R{i}" for i, v in enumerate(c.variables())}
    assert in_mode_language(rename_vars(c, mapping), m, t)


@given(st.integers(0, 10 ** 6), st.sampled_from([0, 1]))
def test_equality_extension_is_monotone(seed, which):
    m, t = LANGS[which]
    c = random_clause(random.Random(seed), m, t)
    assert in_mode_language(c, extend_with_equality(m), t)

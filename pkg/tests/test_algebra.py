import random

import pytest
from hypothesis import given, strategies as st

from crm.algebra import (GIVEN, RHO1, RHO2, DerivationStep, EquivalenceIndex, HeadMismatch, NotInLanguage,
                         basis, bounded_closure, build_dependency_graph, dag_to, format_derivation,
                         is_linear, is_m_simple, linearize, reconstruct_from_basis, rho1, rho2,
                         sources_and_sinks, verify_derivation)
from crm.datagen import KRK_MODES, TRAINS_MODES
from crm.logic import Const, equivalent, normalize_equalities, parse_clause, standardize_apart, theta_subsumes
from crm.modes import extend_with_equality, in_mode_language, parse_modes, validate_constraints

from clausegen import basis_setup, random_clause, random_derivation

C = parse_clause

EX_MODES = """\
modeh(p(+train)).
modeb(has_car(+train,-car)).
modeb(short(+car)).
modeb(closed(+car)).
modeb(smaller(+car,+car)).
modeb(has_load(+car,-load)).
"""


def _modes(text):
    m, t = parse_modes(text)
    assert validate_constraints(m)
    return m, t


M, T = _modes(EX_MODES)
M1 = extend_with_equality(M)
EX2 = C("p(X) :- has_car(X,Y), has_car(X,Z), short(Y), closed(Z)")


# ---------------------------------------------------------------------------
# dependency graphs


def test_dependency_graph_example():
    g = build_dependency_graph(EX2, M, T)
    # vertex 0 is the head (v1 in 1-based numbering)
    assert g.edges == {(0, 1), (0, 2), (1, 3), (2, 4)}
    assert sources_and_sinks(g) == ([0], [3, 4])


def test_dependency_graph_trivial_cases():
    g = build_dependency_graph(C("p(X)"), M, T)
    assert g.edges == set() and sources_and_sinks(g) == ([0], [0])
    g = build_dependency_graph(C("p(X) :- has_car(X,Y), short(Y)"), M, T)
    assert g.edges == {(0, 1), (1, 2)} and sources_and_sinks(g) == ([0], [2])


def test_dependency_graph_needs_language():
    with pytest.raises(NotInLanguage):
        build_dependency_graph(C("p(X) :- short(Y)"), M, T)


def test_m_simple_examples():
    assert is_m_simple(C("p(X) :- has_car(X,Y), short(Y)"), M, T)
    assert not is_m_simple(C("p(X) :- has_car(X,Y), short(Y), closed(Y)"), M, T)
    assert is_m_simple(C("p(X)"), M, T)


def test_dag_to_examples():
    g = build_dependency_graph(EX2, M, T)
    d = dag_to(g, 3)
    assert [str(l) for l in d.literals] == ["p(X)", "has_car(X,Y)", "short(Y)"]
    assert d.edges == {(0, 1), (1, 2)}
    assert dag_to(g, 0).literals == [EX2.head] and dag_to(g, 0).edges == set()
    chain = build_dependency_graph(C("p(X) :- has_car(X,Y), has_load(Y,L)"), M, T)
    assert dag_to(chain, 2).edges == chain.edges


def test_basis_examples():
    assert basis(EX2, M, T) == [C("p(X) :- has_car(X,Y), short(Y)"), C("p(X) :- has_car(X,Z), closed(Z)")]
    simple = C("p(X) :- has_car(X,Y), short(Y)")
    assert basis(simple, M, T) == [simple]
    assert basis(C("p(X) :- has_car(X,Y), short(Y), closed(Y)"), M, T) == [
        C("p(X) :- has_car(X,Y), short(Y)"), C("p(X) :- has_car(X,Y), closed(Y)")]


# ---------------------------------------------------------------------------
# operators


def test_rho1_examples():
    c = C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V)")
    assert C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), U=V") in rho1(c, M, T)
    assert rho1(C("p(X) :- has_car(X,U), short(U)"), M, T) == []
    typed = C("p(X) :- has_car(X,U), has_car(X,V), has_load(U,W)")
    assert rho1(typed, M, T) == [C("p(X) :- has_car(X,U), has_car(X,V), has_load(U,W), U=V")]


def test_rho1_skips_linked_pairs():
    c = C("p(X) :- has_car(X,U), has_car(X,V), U=V")
    assert rho1(c, M1, T) == []


def test_rho2_examples():
    step2 = C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), U=V")
    step3 = C("p(X) :- has_car(X,Y), short(Y)")
    assert rho2(step2, step3) == C(
        "p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), U=V, has_car(X,Y), short(Y)")
    assert rho2(step3, C("p(X)")) == step3
    r = rho2(step3, C("p(X) :- has_car(X,Y), closed(Y)"))
    assert equivalent(r, C("p(X) :- has_car(X,Y), short(Y), has_car(X,Z), closed(Z)"))
    assert in_mode_language(r, M1, T)
    with pytest.raises(HeadMismatch):
        rho2(step3, C("q(X) :- has_car(X,Y)", feature=False))


def test_rho2_aligns_head_variable_names():
    r = rho2(C("p(X) :- has_car(X,Y)"), C("p(A) :- has_car(A,B), short(B)"))
    assert r.head == C("p(X)").head and equivalent(r, C("p(X) :- has_car(X,Y), has_car(X,B), short(B)"))


# ---------------------------------------------------------------------------
# derivations (the worked example)

PHI = [C("p(X) :- has_car(X,Y), short(Y)"), C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V)")]
S1 = C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V)")
S2 = C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), U=V")
S3 = C("p(X) :- has_car(X,Y), short(Y)")
S4 = C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), U=V, has_car(X,Y), short(Y)")
S5 = C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), U=V, has_car(X,Y), short(Y), U=Y")
EXAMPLE = [DerivationStep(S1), DerivationStep(S2, RHO1, (0,), ("U", "V")), DerivationStep(S3),
           DerivationStep(S4, RHO2, (1, 2)), DerivationStep(S5, RHO1, (3,), ("U", "Y"))]
LINEAR = [DerivationStep(S1), DerivationStep(S3),
          DerivationStep(C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), has_car(X,Y), short(Y)"),
                         RHO2, (0, 1)),
          DerivationStep(C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), has_car(X,Y), short(Y), U=V"),
                         RHO1, (2,), ("U", "V")),
          DerivationStep(C("p(X) :- has_car(X,U), has_car(X,V), smaller(U,V), has_car(X,Y), short(Y), "
                           "U=V, U=Y"), RHO1, (3,), ("U", "Y"))]


def test_example_derivation_verifies():
    assert verify_derivation(EXAMPLE, PHI, (RHO1, RHO2), M1, T)
    assert not is_linear(EXAMPLE)
    assert verify_derivation(LINEAR, PHI, (RHO1, RHO2), M1, T) and is_linear(LINEAR)


def test_example_derivation_needs_both_operators():
    assert not verify_derivation(EXAMPLE, PHI, (RHO2,), M1, T)
    assert not verify_derivation(EXAMPLE, PHI, (RHO1,), M1, T)


def test_given_outside_phi_rejected():
    assert not verify_derivation([DerivationStep(C("p(X) :- closed(X)"))], PHI)


def test_given_must_use_fresh_variables():
    steps = [DerivationStep(S3), DerivationStep(C("p(X) :- has_car(X,Y), short(Y)"))]
    assert not verify_derivation(steps, PHI)


def test_rho1_step_with_mixed_types_rejected():
    parent = C("p(X) :- has_car(X,U), has_load(U,W)")
    steps = [DerivationStep(parent), DerivationStep(C("p(X) :- has_car(X,U), has_load(U,W), U=W"),
                                                    RHO1, (0,), ("U", "W"))]
    assert not verify_derivation(steps, [parent], (RHO1, RHO2), M1, T)


def test_linearize_example():
    lin = linearize(EXAMPLE, PHI)
    assert [s.op for s in lin] == [GIVEN, GIVEN, RHO2, RHO1, RHO1]
    assert verify_derivation(lin, PHI, (RHO1, RHO2), M1, T) and is_linear(lin)
    assert lin[-1].clause == LINEAR[-1].clause
    assert equivalent(lin[-1].clause, S5)


def test_linearize_linear_is_unchanged():
    lin = linearize(LINEAR, PHI)
    assert [s.clause for s in lin] == [s.clause for s in LINEAR]


def test_format_derivation_transcript():
    text = format_derivation(EXAMPLE)
    lines = text.splitlines()
    assert len(lines) == 5
    assert lines[1].endswith("1, rho1, U, V") and lines[3].endswith("2, 3, rho2")


def test_reconstruct_examples():
    c = C("p(X) :- has_car(X,A), short(A), closed(A)")
    s = [C("p(X) :- has_car(X,Y), short(Y)"), C("p(X) :- has_car(X,Z), closed(Z)")]
    steps = reconstruct_from_basis(c, s, {"Y": C("p(A)").head.args[0], "Z": C("p(A)").head.args[0]}, M, T)
    assert len(steps) == 4 and [s.op for s in steps] == [GIVEN, GIVEN, RHO2, RHO1]
    assert verify_derivation(steps, s, (RHO1, RHO2), M1, T)
    assert equivalent(steps[-1].clause, c)
    simple = C("p(X) :- has_car(X,Y), short(Y)")
    s, theta = basis_setup(simple, M, T)
    steps = reconstruct_from_basis(simple, s, theta, M, T)
    assert len(steps) == 1 and steps[0].op == GIVEN


def test_reconstruct_worked_example():
    s = standardize_apart(PHI)
    target = S5
    # U, V and Y collapse to U; θ maps every member of s onto that normal form
    steps = reconstruct_from_basis(target, s, _theta_onto(s, normalize_equalities(target)), M1, T)
    assert verify_derivation(steps, s, (RHO1, RHO2), M1, T)
    assert equivalent(steps[-1].clause, target)


def _theta_onto(s, target):
    from crm.logic import subsumption_witness
    theta = {}
    for si in s:
        w = subsumption_witness(si, target)
        theta.update({k: v for k, v in w.items() if k not in si.head_variables()})
    return theta


def test_reconstruct_rejects_uncovered_basis():
    with pytest.raises(ValueError):
        reconstruct_from_basis(EX2, [C("p(X) :- has_car(X,Y), short(Y)")], {}, M, T)


# ---------------------------------------------------------------------------
# closure


def test_closure_examples():
    assert bounded_closure(PHI, (RHO1, RHO2), 0) == PHI
    out = bounded_closure(PHI, (RHO2,), 1)
    # self-compositions are equivalent to their parent and the two orders agree
    assert len(out) == 3
    assert any(equivalent(c, rho2(PHI[0], PHI[1])) for c in out)
    assert bounded_closure(PHI, (RHO1, RHO2), 2, filter=lambda c: False, modes=M1, types=T) == PHI


def test_closure_deduplicates_by_equivalence():
    idx = EquivalenceIndex()
    assert idx.add(C("p(X) :- has_car(X,Y), short(Y)"))
    assert not idx.add(C("p(X) :- has_car(X,Z), short(Z), has_car(X,W)"))


# ---------------------------------------------------------------------------
# properties


def _lang(text, head_type=None):
    m, t = _modes(text)
    if head_type:
        t.add(head_type, [Const("t1")])
    return m, t


LANGS = [_lang(TRAINS_MODES, "train"), _lang(KRK_MODES), (M, T)]


@given(st.integers(0, 10 ** 6), st.sampled_from([0, 1, 2]))
def test_basis_lemma(seed, which):
    m, t = LANGS[which]
    c = random_clause(random.Random(seed), m, t)
    b = basis(c, m, t)
    sinks = sources_and_sinks(build_dependency_graph(c, m, t))[1]
    assert len(b) == len(sinks)
    assert frozenset().union(*(x.literal_set() for x in b)) == c.literal_set()
    assert all(is_m_simple(x, m, t) for x in b)


@given(st.integers(0, 10 ** 6), st.sampled_from([0, 1, 2]))
def test_derivation_lemma_round_trip(seed, which):
    m, t = LANGS[which]
    c = random_clause(random.Random(seed), m, t)
    s, theta = basis_setup(c, m, t)
    steps = reconstruct_from_basis(c, s, theta, m, t)
    assert verify_derivation(steps, s, (RHO1, RHO2), extend_with_equality(m), t)
    assert equivalent(steps[-1].clause, c)


@given(st.integers(0, 10 ** 6), st.sampled_from([0, 2]))
def test_linearization_property(seed, which):
    rng = random.Random(seed)
    m, t = LANGS[which]
    m1 = extend_with_equality(m)
    phi = [b for _ in range(3) for b in basis(random_clause(rng, m, t, max_body=4), m, t)]
    steps = random_derivation(rng, phi, m1, t, rng.randint(1, 7))
    assert verify_derivation(steps, phi, (RHO1, RHO2), m1, t)
    lin = linearize(steps, phi)
    assert verify_derivation(lin, phi, (RHO1, RHO2), m1, t)
    assert is_linear(lin)
    assert equivalent(lin[-1].clause, steps[-1].clause)


@given(st.integers(0, 10 ** 6))
def test_derivations_grow_monotonically(seed):
    rng = random.Random(seed)
    m1 = extend_with_equality(M)
    phi = [b for _ in range(2) for b in basis(random_clause(rng, M, T, max_body=3), M, T)]
    steps = random_derivation(rng, phi, m1, T, 6)
    for i, s in enumerate(steps):
        for p in s.parents:
            assert theta_subsumes(steps[p].clause, s.clause)
        if s.parents:
            first = steps[s.parents[0]].clause
            assert s.clause.body[:len(first.body)] == first.body


@given(st.integers(0, 10 ** 6))
def test_rho_operators_preserve_equivalence(seed):
    rng = random.Random(seed)
    c = random_clause(rng, M, T, max_body=4)
    d = random_clause(rng, M, T, max_body=3)
    (c2,) = standardize_apart([c])
    assert equivalent(rho2(c, d), rho2(c2, d))
    r1, r2 = rho1(c, M, T), rho1(c2, M, T)
    assert len(r1) == len(r2)
    for x in r1:
        assert any(equivalent(x, y) for y in r2)

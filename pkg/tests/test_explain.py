import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crm.algebra import RHO1, RHO2, is_m_simple, rho2
from crm.datagen import acceptable_theories, example_trains, gen_trains
from crm.explain import (ExplanationGraph, ancestors, baseline_explainer, clause_contained, consistent,
                         evaluate, explanation_graph, export_json, majority_baseline, most_relevant, mux_explain,
                         predictive_fidelity)
from crm.logic import Const, Instance, Literal, OrderedClause, parse_clause, parse_term, standardize_apart
from crm.mining import MiningConfig, mine
from crm.network import Crm, FeatureEvaluator, Vertex, random_crm

C = parse_clause
T_POS = C("p(X) :- has_car(X,Y), short(Y), closed(Y)")


def _example_crm():
    """Leaves C3, C4, their composition C2 and the refinement C1 = C2 + (A=B)."""
    c3 = C("p(X) :- has_car(X,A), short(A)")
    c4 = C("p(X) :- has_car(X,B), closed(B)")
    c2 = rho2(c3, c4)
    a, b = c2.body[0].args[1], c2.body[2].args[1]
    c1 = OrderedClause(c2.head, c2.body + (Literal("=", (a, b)),))
    crm = Crm([Vertex(c3), Vertex(c4), Vertex(c2, RHO2, (0, 1), 1), Vertex(c1, RHO1, (2,), 2)], "identity")
    crm.weights[:] = 1.0
    crm.W[:] = [[1.0], [-1.0]]
    crm.b[:] = [0.0, 0.5]  # a gated-off output predicts "-"
    return crm


def _features(crm, d):
    return FeatureEvaluator(d.facts, d.instances).matrix(crm)


# ---------------------------------------------------------------------------
# ancestors


def test_ancestors():
    crm = _example_crm()
    assert ancestors(crm, 0) == {0}
    assert ancestors(crm, 2) == {0, 1, 2}
    # diamond: both children of v0 feed one vertex
    a = C("p(X) :- short(X)")
    b = rho2(a, a)
    d = Crm([Vertex(a), Vertex(b, RHO2, (0, 0), 1), Vertex(rho2(a, b), RHO2, (0, 1), 2)])
    assert ancestors(d, 2) == {0, 1, 2}


# ---------------------------------------------------------------------------
# explanation graphs


def test_example_explanation_graph():
    d = example_trains()
    crm = _example_crm()
    F = _features(crm, d)
    t1, t2 = d.instances
    eg = explanation_graph(crm, 3, t1, F[0])
    assert eg.vertices == [0, 1, 2, 3]
    assert eg.edges == [(0, 2), (1, 2), (2, 3)]
    assert str(eg.clause_of[2].head) == "p(t1)"
    assert str(eg.clause_of[2]).startswith("p(t1) :- has_car(t1,")
    for v in (0, 1):
        assert is_m_simple(crm.clause(v), d.modes, d.types)
    # every vertex clause of the graph fires on the instance
    assert all(F[0, v] for v in eg.vertices)
    # t2 has no short closed car: the refined output is gated off
    assert F[1, 3] == 0
    assert explanation_graph(crm, 3, t2, F[1]).empty


def test_explanation_requires_output():
    crm = _example_crm()
    with pytest.raises(ValueError):
        explanation_graph(crm, 0, example_trains().instances[0], np.ones(4))


def test_containment_example():
    d = example_trains()
    crm = _example_crm()
    F = _features(crm, d)
    t1 = d.instances[0]
    eg = explanation_graph(crm, 3, t1, F[0])
    assert clause_contained(T_POS, eg, t1)
    # renaming either side keeps containment
    assert clause_contained(C("p(Q) :- has_car(Q,W), short(W), closed(W)"), eg, t1)
    assert clause_contained(C("p(X) :- has_car(X,K), short(K)"), eg, t1)
    assert not clause_contained(C("p(X) :- has_car(X,K), long(K)"), eg, t1)
    assert not clause_contained(T_POS, None, t1)
    assert not clause_contained(T_POS, ExplanationGraph(None, t1), t1)


def test_chess_containment_normalizes_head_tuples():
    a = Instance(parse_term("board(1,1,3,5,3,2)"))
    eg = ExplanationGraph(0, a, [0], [], {0: C("p(board(1,1,3,5,3,2)) :- 3=3", feature=False)})
    assert clause_contained(C("p(board(A,B,C,D,C,E))"), eg, a)
    eq = C("p(board(A,B,C,D,E,F)) :- C=E")
    assert clause_contained(eq, eg, a)


def test_mux():
    d = example_trains()
    crm = _example_crm()
    F = _features(crm, d)
    t1, t2 = d.instances
    pred, eg = mux_explain(crm, t1, "+", F[0])
    assert pred == "+" and eg is not None and eg.output == 3
    pred, eg = mux_explain(crm, t1, "-", F[0])
    assert pred == "+" and eg is None
    # t2: prediction matches the target "-" but the only output is gated off
    pred, eg = mux_explain(crm, t2, "-", F[1])
    assert pred == "-" and eg is None


def test_most_relevant_picks_largest_output():
    d = example_trains()
    c = [C("p(X) :- has_car(X,Y)"), C("p(X) :- has_car(X,Y), short(Y)")]
    crm = Crm([Vertex(x) for x in c])
    f = np.array([1, 1])
    eg = most_relevant(crm, d.instances[0], f, np.array([0.2, -0.7]))
    assert eg.output == 1 and eg.rank == 0


# ---------------------------------------------------------------------------
# fidelity


def test_predictive_fidelity():
    assert predictive_fidelity(list("+++-"), list("++--")).predictive == 0.75
    assert predictive_fidelity(list("+-"), list("+-")).predictive == 1.0
    assert predictive_fidelity([], []).predictive is None
    assert predictive_fidelity([], []).to_json()["predictive"] is None


def test_consistency_rules():
    d = example_trains()
    crm = _example_crm()
    F = _features(crm, d)
    t1, t2 = d.instances
    th = acceptable_theories()["trains"]
    eg = explanation_graph(crm, 3, t1, F[0])
    assert consistent("+", "+", eg, t1, th)
    assert not consistent("-", "+", eg, t1, th)
    # class with no acceptable clauses: consistent iff no other theory clause is contained
    assert not consistent("-", "-", eg, t1, th)
    leaf = explanation_graph(Crm([Vertex(crm.clause(0))]), 0, t2, np.array([1]))
    assert consistent("-", "-", leaf, t2, th)
    assert not consistent("-", "-", None, t2, th)


def test_evaluate_example():
    d = example_trains()
    crm = _example_crm()
    F = _features(crm, d)
    rep = evaluate(crm, d.instances, F, acceptable_theories()["trains"])
    assert (rep.cp, rep.ip) == (2, 0)
    # t2 is predicted correctly but its explanation is empty
    assert (rep.ce, rep.ie) == (1, 1)
    assert evaluate(crm, d.instances, F).explanatory is None


def test_majority_baseline():
    tr = [Instance(Const(f"a{i}"), "+" if i < 3 else "-") for i in range(5)]
    te = [Instance(Const("b1"), "-"), Instance(Const("b2"), "+")]
    assert majority_baseline(tr, te).predictive == 0.5
    tie = [Instance(Const("c1"), "-"), Instance(Const("c2"), "+")]
    assert majority_baseline(tie, te).cp == 1


def test_baseline_explainer():
    d = gen_trains(120, 5)
    phi = [m.clause for m in mine(d.modes, d.types, d.instances, d.facts, MiningConfig())]
    values = np.stack(FeatureEvaluator(d.facts, d.instances).direct_many(phi), axis=1)
    th = acceptable_theories()["trains"]
    a = baseline_explainer(d.instances, phi, values, th, 3)
    b = baseline_explainer(d.instances, phi, values, th, 3)
    assert a == b and a.ce + a.ie == 120
    none = baseline_explainer(d.instances[:2], phi, np.zeros((2, len(phi))), th, 0)
    assert (none.ce, none.ie) == (0, 2)


def test_export_formats():
    d = example_trains()
    crm = _example_crm()
    F = _features(crm, d)
    t1 = d.instances[0]
    eg = explanation_graph(crm, 3, t1, F[0], rank=0)
    doc = json.loads(export_json(eg, t1, "+"))
    assert doc["prediction"] == "+" and doc["explanation"]["output"] == 3
    assert len(doc["explanation"]["vertices"]) == 4 and doc["explanation"]["relevance_rank"] == 0
    assert json.loads(export_json(None, t1, "-"))["explanation"] is None
    dot = eg.to_dot()
    assert dot.startswith("digraph explanation {") and "v2 -> v3;" in dot


# ---------------------------------------------------------------------------
# properties on random trained-free CRMs

_D = gen_trains(60, 11)
_PHI = [m.clause for m in mine(_D.modes, _D.types, _D.instances, _D.facts, MiningConfig())]


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6))
def test_explanations_fire_and_are_ancestral(seed):
    crm = random_crm(_PHI, "relu", 8, 1, 2, seed, modes=_D.modes, types=_D.types)
    crm.init_weights(seed)
    F = _features(crm, _D)
    i = seed % len(_D.instances)
    a = _D.instances[i]
    for o in crm.outputs:
        eg = explanation_graph(crm, o, a, F[i])
        assert eg.empty == (F[i, o] == 0)
        if not eg.empty:
            assert set(eg.vertices) == ancestors(crm, o)
            assert all(F[i, v] for v in eg.vertices)
            # every source of the graph is an input clause, hence M-simple
            sources = {v for v in eg.vertices if not crm.predecessors(v)}
            assert all(is_m_simple(crm.clause(v), _D.modes, _D.types) for v in sources)
            # each vertex clause is contained in the graph, also after renaming
            for v in eg.vertices:
                (r,) = standardize_apart([crm.clause(v)])
                assert clause_contained(r, eg, a)

"""Brute-force reference implementations used only by the tests."""

import itertools

from crm.logic import Compound, Const, Literal, OrderedClause, Var, apply_substitution


def clause_vars(c):
    seen = []
    for lit in (c.head,) + tuple(c.body):
        for t in lit.args:
            _collect(t, seen)
    return seen


def _collect(t, out):
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    elif isinstance(t, Compound):
        for a in t.args:
            _collect(a, out)


def clause_terms(c):
    out = []
    for lit in (c.head,) + tuple(c.body):
        for t in lit.args:
            for s in _subterms(t):
                if s not in out:
                    out.append(s)
    return out


def _subterms(t):
    yield t
    if isinstance(t, Compound):
        for a in t.args:
            yield from _subterms(a)


def brute_subsumes(c, d):
    """Try every map from c's variables to terms of d."""
    vs = clause_vars(c)
    targets = clause_terms(d)
    dset = set(d.body)
    for combo in itertools.product(targets, repeat=len(vs)):
        theta = {v: t for v, t in zip(vs, combo) if t != Var(v)}
        ci = apply_substitution(c, theta)
        if ci.head == d.head and set(ci.body) <= dset:
            return True
    return False


def brute_evaluate(c, facts, instance_id, domain):
    """1 iff some assignment of body variables over ``domain`` satisfies the body."""
    head_arg = c.head.args[0]
    theta = {}
    if not _bind(head_arg, instance_id, theta):
        return 0
    body_vars = [v for v in clause_vars(c) if v not in theta]
    for combo in itertools.product(domain, repeat=len(body_vars)):
        full = dict(theta)
        full.update(zip(body_vars, combo))
        g = apply_substitution(c, full)
        if all(_holds(lit, facts) for lit in g.body):
            return 1
    return 0


def _bind(pattern, value, theta):
    if isinstance(pattern, Var):
        if pattern.name in theta:
            return theta[pattern.name] == value
        theta[pattern.name] = value
        return True
    if isinstance(pattern, Compound):
        return (isinstance(value, Compound) and value.functor == pattern.functor
                and len(value.args) == len(pattern.args)
                and all(_bind(p, v, theta) for p, v in zip(pattern.args, value.args)))
    return pattern == value


def _holds(lit, facts):
    if lit.predicate == "=":
        return lit.args[0] == lit.args[1]
    return lit in facts


def all_fact_sets(preds, consts):
    """Every subset of the ground atoms over ``preds`` (name, arity) and ``consts``."""
    atoms = [Literal(p, tuple(Const(c) for c in args))
             for p, k in preds for args in itertools.product(consts, repeat=k)]
    for mask in range(1 << len(atoms)):
        yield {a for i, a in enumerate(atoms) if mask >> i & 1}

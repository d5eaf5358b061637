"""Compositional relational machines: feature-clauses, their composition
operators, gated CRM networks and explanation fidelity."""

from .logic import (Compound, Const, FactStore, Instance, Literal, OrderedClause, Var, equivalent,
                    evaluate_feature, parse_clause, parse_literal, parse_term, theta_subsumes)
from .modes import ModeSet, TypeDefs, in_mode_language, parse_modes, validate_constraints
from .algebra import basis, build_dependency_graph, is_m_simple, linearize, rho1, rho2, verify_derivation
from .network import Crm, TrainConfig, construct_crm, random_crm, train
from .explain import FidelityReport, evaluate, explanation_graph, mux_explain

__version__ = "0.1.0"

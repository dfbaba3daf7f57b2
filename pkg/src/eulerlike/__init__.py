"""Numerical normal forms around transversals: Euler-like vector fields and their
tubular embeddings, Lie algebroid, Dirac, Poisson and generalized complex splittings."""

from .errors import (ConvergenceError, DomainGuardError, EulerLikeError, FlowError, FlowEscapeError,
                     JetOrderError, NotEulerLikeError, ParseError, PreconditionError, StepUnderflowError,
                     TransversalityError)
from .expr import Expr, derivative, eval_jet, parse
from .jet import Jet, JetValue
from .chart import (AffineChart, Bivector, Chart, MatrixField, OneForm, ScalarField, Section, SmoothMap,
                    ThreeForm, Transversal, TwoForm, VectorField, exterior_derivative, interior_product,
                    jacobiator, lie_bracket, lie_derivative, pullback_form, sharp)
from .flow import FlowConfig, flow, flow_map, lambda_t
from .euler import TubularEmbedding, is_euler_like, linearize, psi_inverse, psi_inverse_flow
from .algebroid import (AnchoredBundle, LieAlgebroid, algebroid_normal_form, anchor_lift_connection,
                        bracket_lift, check_transversal, euler_section)
from .dirac import (CourantSection, DiracFrame, GCSData, TwistedCourant, courant_bracket,
                    gcs_eigenbundle, gcs_induced_poisson, graph_of_bivector, graph_of_twoform,
                    subspace_distance)
from .normalform import (QuadratureConfig, alpha_for_cosymplectic, cosymplectic_check, dirac_normal_form,
                         gcs_normal_form, omega_quadrature, weinstein_split)
from .report import Check, SplittingReport
from .scenarios import BUILTINS, Scenario, ScenarioError, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DomainGuardError", "EulerLikeError", "FlowError", "FlowEscapeError",
    "JetOrderError", "NotEulerLikeError", "ParseError", "PreconditionError", "StepUnderflowError",
    "TransversalityError", "Expr", "derivative", "eval_jet", "parse", "Jet", "JetValue",
    "AffineChart", "Bivector", "Chart", "MatrixField", "OneForm", "ScalarField", "Section",
    "SmoothMap", "ThreeForm", "Transversal", "TwoForm", "VectorField", "exterior_derivative",
    "interior_product", "jacobiator", "lie_bracket", "lie_derivative", "pullback_form", "sharp",
    "FlowConfig", "flow", "flow_map", "lambda_t", "TubularEmbedding", "is_euler_like", "linearize",
    "psi_inverse", "psi_inverse_flow", "AnchoredBundle", "LieAlgebroid", "algebroid_normal_form",
    "anchor_lift_connection", "bracket_lift", "check_transversal", "euler_section",
    "CourantSection", "DiracFrame", "GCSData", "TwistedCourant", "courant_bracket",
    "gcs_eigenbundle", "gcs_induced_poisson", "graph_of_bivector", "graph_of_twoform",
    "subspace_distance", "QuadratureConfig", "alpha_for_cosymplectic", "cosymplectic_check",
    "dirac_normal_form", "gcs_normal_form", "omega_quadrature", "weinstein_split", "Check",
    "SplittingReport", "BUILTINS", "Scenario", "ScenarioError", "run_scenario",
]

"""Symbolic calculus of variations on graded (even/odd) jet bundles."""
from .model import (
    EVEN, ODD, BidegreeError, Field, GvbError, JetVariable, ModelMismatch,
    ModelSpec, MultiIndex, OrderCapExceeded, ParityError,
)
from .algebra import GradedForm, GradedFunction, grading, normalize, swap_sign, wedge
from .jet import (
    ContactDerivation, contact_decompose, exterior_d, h_k, h_m, horizontal_d,
    interior_product, iterated_total_derivative, lie_derivative, prolong,
    total_derivative, vertical_d,
)
from .variational import (
    DensityVariation, Lagrangian, LepageanTail, euler_lagrange,
    first_variational_check, lepagean, lepagean_residual, rho, rho_bar,
    variational_delta,
)
from .lang import DslError, SourceDocument, parse_expression, parse_model, render

__version__ = "0.1.0"

from .coupling import (
    Coupling,
    TriplePlan,
    check_marginals,
    diagonal_coupling,
    glue,
    map_coupling,
    product_coupling,
    quadratic_cost,
)
from .lp import DualMembership, dual_membership, moment_residual, phase1
from .ot import squared_distances, transport_simplex, w2

__all__ = [
    "Coupling",
    "DualMembership",
    "TriplePlan",
    "check_marginals",
    "diagonal_coupling",
    "dual_membership",
    "glue",
    "map_coupling",
    "moment_residual",
    "phase1",
    "product_coupling",
    "quadratic_cost",
    "squared_distances",
    "transport_simplex",
    "w2",
]

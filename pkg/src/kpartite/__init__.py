"""k-producibility and k-separability criteria for multipartite density operators."""

from .criteria import (
    Conclusion,
    CriterionVerdict,
    ElementFiducial,
    swap_producibility,
    element_producibility,
    pairwise_separability,
    swap_separability,
    element_separability,
)
from .qstate import (
    DenseState,
    FamilySpec,
    MixtureState,
    PureStateSparse,
    StateError,
    family_ghz_mix,
    family_w_qutrit_mix,
    make_pure_sparse,
    matrix_element,
)
from .sweep import CriterionSpec, grid_sweep, threshold_bisect, threshold_curve
from .twocopy import SwapFiducial, partial_swap_expectation, swap_expectation

__version__ = "0.1.0"

__all__ = [
    "Conclusion",
    "CriterionSpec",
    "CriterionVerdict",
    "DenseState",
    "ElementFiducial",
    "FamilySpec",
    "MixtureState",
    "PureStateSparse",
    "StateError",
    "SwapFiducial",
    "family_ghz_mix",
    "family_w_qutrit_mix",
    "grid_sweep",
    "make_pure_sparse",
    "matrix_element",
    "partial_swap_expectation",
    "swap_expectation",
    "swap_producibility",
    "element_producibility",
    "pairwise_separability",
    "swap_separability",
    "element_separability",
    "threshold_bisect",
    "threshold_curve",
]

"""Effective degree of functions along interpolation paths.

Thin Python layer over the C++ extension ``edeg._edeg``.
"""

from ._edeg import (
    ConfigError,
    FeedForwardNet,
    IoError,
    MultiPoly,
    NonFiniteLossError,
    NumericalError,
    ParseError,
    PathProjection,
    SingularSystemError,
    __version__,
    basis_eval,
    chebyshev_nodes,
    classification_accuracy,
    condition_number,
    degree_drop_predicate,
    design_matrix,
    ed_estimate,
    ed_gradient,
    effective_degree,
    fit,
    gradcheck,
    leading_part,
    parse_polynomial,
    pca_project,
    pnn_target,
    randomized_cosine,
    restrict,
    train,
    two_moons,
    uniform_nodes,
    verify_order_preservation,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

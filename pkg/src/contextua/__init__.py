"""Exact tools for contextuality analysis of operational fragments."""

__version__ = "0.1.0"

from .core_model import (  # noqa: F401
    EmpiricalModel,
    GptFragment,
    OnticRepresentation,
    OperationalEquivalence,
    find_equivalences,
    probability,
    validate_fragment,
    verify_ontic,
)
from .vorobyev import CompatibilityHypergraph, graham_reduce, is_acyclic  # noqa: F401

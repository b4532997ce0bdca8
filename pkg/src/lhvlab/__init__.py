"""Bell locality and EPR steering decisions with explicit certificates.

The package decides, for a fixed finite measurement scenario, whether a
bipartite state admits a local hidden variable model (Bell locality) or a
local hidden state model (unsteerability).  Every verdict comes with a
certificate that can be checked independently: mixing weights over
deterministic strategies for the local case, a separating functional with
an exhaustively computed bound otherwise.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConvergenceError,
    DimensionError,
    DomainError,
    IndeterminateError,
    LhvLabError,
    NonUnitaryError,
    NormalizationError,
    NotEntangledError,
    SolverError,
)
from .quantum import (
    Assemblage,
    Basis,
    CorrelationTensor,
    DensityMatrix,
    MeasurementAssemblage,
    Povm,
    apply_local_unitary,
    assemblage_of,
    conjugate_assemblage,
    correlations_of,
    fourier_basis,
    is_disjoint,
    maximally_entangled,
    product_state,
    pure_from_schmidt,
    smear_parent_povm,
    swap_parties,
)
from .strategies import DeterministicStrategy, StrategySpace, enumerate_strategies
from .bell import BellVerdict, BellWitness, decide_bell_local, local_vertices
from .steering import (
    LhsModel,
    SteeringVerdict,
    SteeringWitness,
    criterion_disjoint_bases,
    decide_unsteerable,
    nearest_lhs_model,
    steering_measurements_for_pure,
)

__all__ = [
    "__version__",
    "CapacityError",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "IndeterminateError",
    "LhvLabError",
    "NonUnitaryError",
    "NormalizationError",
    "NotEntangledError",
    "SolverError",
    "Assemblage",
    "Basis",
    "CorrelationTensor",
    "DensityMatrix",
    "MeasurementAssemblage",
    "Povm",
    "apply_local_unitary",
    "assemblage_of",
    "conjugate_assemblage",
    "correlations_of",
    "fourier_basis",
    "is_disjoint",
    "maximally_entangled",
    "product_state",
    "pure_from_schmidt",
    "smear_parent_povm",
    "swap_parties",
    "LhsModel",
    "SteeringVerdict",
    "SteeringWitness",
    "criterion_disjoint_bases",
    "decide_unsteerable",
    "nearest_lhs_model",
    "steering_measurements_for_pure",
    "DeterministicStrategy",
    "StrategySpace",
    "enumerate_strategies",
    "BellVerdict",
    "BellWitness",
    "decide_bell_local",
    "local_vertices",
]

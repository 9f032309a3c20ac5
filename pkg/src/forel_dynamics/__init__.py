"""FoReL learning dynamics in two-strategy linear congestion games."""

__version__ = "0.1.0"

from .regularizers import (  # noqa: E402
    CATALOG,
    Regularizer,
    ValidationReport,
    hct,
    logbarrier,
    parse_regularizer,
    perturbed,
    psi,
    psi_derivative,
    psi_inverse,
    renyi,
    shannon,
    validate_regularizer,
)
from .dynamics import (  # noqa: E402
    GameParams,
    MapParams,
    Orbit,
    cesaro_average,
    invariant_interval,
    iterate,
    step,
    step_dual,
    to_map_params,
)

__all__ = [
    "CATALOG",
    "Regularizer",
    "ValidationReport",
    "hct",
    "logbarrier",
    "parse_regularizer",
    "perturbed",
    "psi",
    "psi_derivative",
    "psi_inverse",
    "renyi",
    "shannon",
    "validate_regularizer",
    "GameParams",
    "MapParams",
    "Orbit",
    "cesaro_average",
    "invariant_interval",
    "iterate",
    "step",
    "step_dual",
    "to_map_params",
]

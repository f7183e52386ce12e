"""Learning maximal ancestral graphs from Gaussian data with CCHM."""

from .graphs import (
    ARROW,
    CIRCLE,
    TAIL,
    Mark,
    MixedGraph,
    c_components,
    latent_project,
    m_separated,
    mag_to_pag,
    markov_equivalent,
    unshielded_triples,
    validate_mag,
)
from .search import CchmConfig, CchmResult, cchm

__all__ = [
    "ARROW",
    "CIRCLE",
    "TAIL",
    "Mark",
    "MixedGraph",
    "CchmConfig",
    "CchmResult",
    "cchm",
    "c_components",
    "latent_project",
    "m_separated",
    "mag_to_pag",
    "markov_equivalent",
    "unshielded_triples",
    "validate_mag",
]

__version__ = "0.1.0"

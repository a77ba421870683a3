"""Hyperdimensional classification with differentially private release,
query obfuscation, an encoding-inversion attack and an approximate-hardware
encoder model."""

from .encoding import DimensionMask, QuantScheme, Scheme
from .errors import (
    ConfigError,
    ContractError,
    DimensionError,
    HDError,
    InputError,
    ParseError,
    UndefinedSimilarityError,
)
from .hdcore import Codebook
from .model import EncodingConfig, Model

__version__ = "0.1.0"

__all__ = [
    "Codebook", "ConfigError", "ContractError", "DimensionError", "DimensionMask",
    "EncodingConfig", "HDError", "InputError", "Model", "ParseError", "QuantScheme",
    "Scheme", "UndefinedSimilarityError",
]

"""Exact and certified computations for isometric isomorphisms of Lebesgue spaces."""

from .exact import DyadicInterval
from .lebesgue import Kind, LpSpace, LpVector, norm, parse_vector
from .signature import BANACH, METRIC, FiniteMetricPresentation, StandardPresentation
from .disintegration import standard_disintegration, validate_disintegration, partition_chains
from .synthesis import random_scramble, synthesize_isometry, verify_isometry
from .pi01 import IsometryTable, TermMaps, check_conditions, search_tables
from .graphs import Graph, encode

__version__ = "0.1.0"

__all__ = [
    "DyadicInterval",
    "Kind",
    "LpSpace",
    "LpVector",
    "norm",
    "parse_vector",
    "BANACH",
    "METRIC",
    "FiniteMetricPresentation",
    "StandardPresentation",
    "standard_disintegration",
    "validate_disintegration",
    "partition_chains",
    "random_scramble",
    "synthesize_isometry",
    "verify_isometry",
    "IsometryTable",
    "TermMaps",
    "check_conditions",
    "search_tables",
    "Graph",
    "encode",
]

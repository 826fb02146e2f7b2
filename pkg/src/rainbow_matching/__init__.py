"""Rainbow matchings in edge-coloured graphs."""

from .finder import Found, HypothesisViolated, find_rainbow_matching, order_bound, replay_trace
from .graph import (
    ColourRelabelling,
    EdgeColouredGraph,
    GraphError,
    RainbowMatching,
    colour_degree,
    is_rainbow_matching,
    min_colour_degree,
    relabel_colours,
    validate,
)
from .oracle import greedy_rainbow_matching, has_rainbow_matching_of_size, max_rainbow_matching

__all__ = [
    "ColourRelabelling",
    "EdgeColouredGraph",
    "Found",
    "GraphError",
    "HypothesisViolated",
    "RainbowMatching",
    "colour_degree",
    "find_rainbow_matching",
    "greedy_rainbow_matching",
    "has_rainbow_matching_of_size",
    "is_rainbow_matching",
    "max_rainbow_matching",
    "min_colour_degree",
    "order_bound",
    "relabel_colours",
    "replay_trace",
    "validate",
]

"""Flat De Bruijn data-center fabrics: topology, TCAM flow compilation,
packet-walk emulation and flow-level throughput comparison."""
from .errors import (ConfigurationError, FabricError, ForwardingLoopError, GenerationFailureError,
                     IncompatibleLabelsError, InvalidDigitError, MalformedInputError, MisdeliveryError,
                     MisplacementError, NoPathError, UnknownDestinationError)
from .fabric import Fabric, build_debruijn_fabric, build_leaf_spine, build_random_flat
from .labels import (FORWARD, REVERSE, GraphDirection, Label, all_labels, debruijn_distance, forward_neighbor,
                     longest_overlap, reverse_neighbor)
from .routing import Route, best_route, ecmp_paths, ecmp_select, greedy_route

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "FabricError", "ForwardingLoopError", "GenerationFailureError",
    "IncompatibleLabelsError", "InvalidDigitError", "MalformedInputError", "MisdeliveryError",
    "MisplacementError", "NoPathError", "UnknownDestinationError",
    "Fabric", "build_debruijn_fabric", "build_leaf_spine", "build_random_flat",
    "FORWARD", "REVERSE", "GraphDirection", "Label", "all_labels", "debruijn_distance",
    "forward_neighbor", "longest_overlap", "reverse_neighbor",
    "Route", "best_route", "ecmp_paths", "ecmp_select", "greedy_route",
]

"""Exact and certified Lipschitz constants of feed-forward ReLU networks."""

from .bab import BabConfig, BabResult, BabStatus, lip_bab, lipschitz_upper
from .feasibility import FeasibilityConfig, feasible, ffilter
from .network import (
    ActivationPattern,
    Network,
    NeuronState,
    activation_at,
    forward,
    jacobian_of_pattern,
    load_network,
    load_network_file,
    random_network,
)
from .numerics import Interval, IntervalMatrix, NormKind, op_norm
from .oracle import enumerate_regions, sample_lower_bound
from .subproblem import Mode
from .symprop import naive_ibp, sym_prop

__all__ = [
    "ActivationPattern", "BabConfig", "BabResult", "BabStatus", "FeasibilityConfig",
    "Interval", "IntervalMatrix", "Mode", "Network", "NeuronState", "NormKind",
    "activation_at", "enumerate_regions", "feasible", "ffilter", "forward",
    "jacobian_of_pattern", "lip_bab", "lipschitz_upper", "load_network",
    "load_network_file", "naive_ibp", "op_norm", "random_network",
    "sample_lower_bound", "sym_prop",
]

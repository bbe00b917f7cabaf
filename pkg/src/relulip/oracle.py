"""Ground truth for small networks: exhaustive linear-region enumeration and sampling.

The enumeration splits every neuron both ways without any bounding, so its
maximum Jacobian norm is the exact Lipschitz constant the search must reach.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .feasibility import FeasibilityConfig, degenerate_state, side_feasibility
from .network import ActivationPattern, Network, activation_at, jacobian_of_pattern
from .numerics import Interval, NormKind, op_norm
from .subproblem import ConstraintSet, HalfSpace, Sense, SubProblem, lin_prop
from .symprop import check_box

MAX_ORACLE_NEURONS = 20


class OracleSizeError(ValueError):
    """The network is too large for exhaustive enumeration."""


@dataclass(frozen=True, eq=False)
class Region:
    pattern: ActivationPattern
    witness: np.ndarray | None
    jacobian: np.ndarray
    jac_norm: float


@dataclass(frozen=True)
class RegionCatalog:
    regions: tuple[Region, ...]
    p: NormKind

    def __len__(self):
        return len(self.regions)

    def __iter__(self):
        return iter(self.regions)

    @property
    def patterns(self) -> set[ActivationPattern]:
        return {r.pattern for r in self.regions}

    def max_norm(self, p: NormKind | str | None = None, seed: int = 0) -> float:
        """Largest Jacobian norm over all regions, optionally for another norm."""
        if not self.regions:
            return 0.0
        if p is None or NormKind.parse(p) is self.p:
            return max(r.jac_norm for r in self.regions)
        return max(op_norm(r.jacobian, p, seed) for r in self.regions)


def enumerate_regions(net: Network, box: Sequence[Interval] | None,
                      cfg: FeasibilityConfig | None = None, p: NormKind | str = NormKind.TWO,
                      max_neurons: int = MAX_ORACLE_NEURONS, seed: int = 0) -> RegionCatalog:
    """Every activation pattern realised with margin inside the box.

    ``box=None`` enumerates over ``[-big_m, big_m]^n``. Each hidden neuron gets
    an explicit half-space on the side of its state, so every witness meets
    all sign constraints.
    """
    cfg = cfg or FeasibilityConfig()
    p = NormKind.parse(p)
    if net.num_hidden > max_neurons:
        raise OracleSizeError(f"{net.num_hidden} hidden neurons exceeds the limit of {max_neurons}")
    if box is None:
        cs = ConstraintSet(net.input_dim)
        start = np.zeros(net.input_dim)
    else:
        box = tuple(check_box(net, box))
        cs = ConstraintSet(net.input_dim, box)
        start = np.array([(iv.lo + iv.hi) / 2 for iv in box])

    regions: list[Region] = []
    stack = [SubProblem(cs, ActivationPattern.all_star(net), witness=start)]
    while stack:
        node = lin_prop(stack.pop(), net)
        if node.pattern.is_decided:
            J = jacobian_of_pattern(net, node.pattern)
            regions.append(Region(node.pattern, node.witness, J, op_norm(J, p, seed)))
            continue
        layer, neuron = next(node.pattern.star_neurons())
        form = node.zle[layer][neuron]
        children = []
        for sense in (Sense.NEG, Sense.POS):
            half = HalfSpace(form, sense)
            result = side_feasibility(node.constraints, half, cfg, node.witness)
            if result:
                children.append(node.child(layer, neuron, half, 0, result.witness))
        if not children:
            state = degenerate_state(form, node.witness)
            children.append(SubProblem(node.constraints, node.pattern.with_state(layer, neuron, state),
                                       node.zle[:layer + 1], layer, witness=node.witness))
        # reversed so the Inactive side is explored first
        stack.extend(reversed(children))
    return RegionCatalog(tuple(regions), p)


def sample_lower_bound(net: Network, box: Sequence[Interval], n: int, p: NormKind | str,
                       seed: int = 0) -> float:
    """Largest Jacobian norm over ``n`` uniform samples from the box.

    Non-differentiable samples are skipped.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    box = check_box(net, box)
    lo = np.array([iv.lo for iv in box])
    hi = np.array([iv.hi for iv in box])
    rng = np.random.default_rng(seed)
    norms: dict[ActivationPattern, float] = {}
    best = 0.0
    for x in rng.uniform(lo, hi, size=(n, net.input_dim)):
        pattern, differentiable = activation_at(net, x)
        if not differentiable:
            continue
        if pattern not in norms:
            norms[pattern] = op_norm(jacobian_of_pattern(net, pattern), p)
        best = max(best, norms[pattern])
    return best

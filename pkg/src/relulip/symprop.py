"""Symbolic bound propagation over an input box, plus plain interval propagation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .affine import ZERO, AffineForm, VarId, affine_bounds, affine_combine, input_bounds
from .network import ActivationPattern, Network, NeuronState
from .numerics import DimensionMismatchError, Interval


@dataclass(frozen=True)
class SymPropResult:
    pattern: ActivationPattern
    pre_activation_bounds: tuple[tuple[Interval, ...], ...]
    output_bounds: tuple[Interval, ...]
    star_var_bounds: dict[VarId, Interval]


def check_box(net: Network, box: Sequence[Interval]) -> list[Interval]:
    box = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in box]
    if len(box) != net.input_dim:
        raise DimensionMismatchError(f"box has {len(box)} intervals, network expects {net.input_dim}")
    return box


def classify(bounds: Interval) -> NeuronState:
    # Touching zero counts as undecided.
    if bounds.lo > 0:
        return NeuronState.ACTIVE
    if bounds.hi < 0:
        return NeuronState.INACTIVE
    return NeuronState.STAR


def sym_prop(net: Network, box: Sequence[Interval]) -> SymPropResult:
    """Propagate one affine expression per neuron through the network.

    Active neurons pass their expression on, inactive ones contribute zero, and
    each Star neuron is replaced by a fresh variable ranging over ``[0, hi]``.
    """
    box = check_box(net, box)
    bounds = input_bounds(box)
    star_bounds: dict[VarId, Interval] = {}
    xe: list[AffineForm] = AffineForm.inputs(net.input_dim)
    pattern, pre = [], []
    for l in range(net.num_layers - 1):
        W, b = net.weights[l], net.biases[l]
        states, layer_bounds, next_xe = [], [], []
        for i in range(W.shape[0]):
            ze = affine_combine(W[i], xe, b[i])
            iv = affine_bounds(ze, bounds)
            state = classify(iv)
            if state is NeuronState.ACTIVE:
                next_xe.append(ze)
            elif state is NeuronState.INACTIVE:
                next_xe.append(ZERO)
            else:
                var = VarId.star(l, i)
                star_iv = Interval(0.0, iv.hi)
                bounds[var] = star_iv
                star_bounds[var] = star_iv
                next_xe.append(AffineForm.var(var))
            states.append(state)
            layer_bounds.append(iv)
        pattern.append(states)
        pre.append(tuple(layer_bounds))
        xe = next_xe
    W, b = net.weights[-1], net.biases[-1]
    out = tuple(affine_bounds(affine_combine(W[i], xe, b[i]), bounds) for i in range(W.shape[0]))
    return SymPropResult(ActivationPattern(pattern), tuple(pre), out, star_bounds)


def naive_ibp(net: Network, box: Sequence[Interval]
              ) -> tuple[tuple[tuple[Interval, ...], ...], tuple[Interval, ...]]:
    """Layer-by-layer interval propagation; returns hidden pre-activation and output bounds."""
    box = check_box(net, box)
    lo = np.array([iv.lo for iv in box])
    hi = np.array([iv.hi for iv in box])
    pre = []
    for W, b in zip(net.weights, net.biases):
        pos, neg = np.maximum(W, 0.0), np.minimum(W, 0.0)
        z_lo = pos @ lo + neg @ hi + b
        z_hi = pos @ hi + neg @ lo + b
        pre.append(tuple(Interval(float(a), float(c)) for a, c in zip(z_lo, z_hi)))
        lo, hi = np.maximum(z_lo, 0.0), np.maximum(z_hi, 0.0)
    return tuple(pre[:-1]), pre[-1]

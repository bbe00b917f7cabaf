"""Branch-and-bound nodes: half-space constraint sets, patterns and input-affine forms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .affine import ZERO, AffineForm, affine_combine
from .network import ActivationPattern, Network, NeuronState
from .numerics import Interval
from .symprop import SymPropResult, check_box, sym_prop


class Mode(str, enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"


class Sense(enum.Enum):
    NEG = "<0"
    POS = ">0"

    @property
    def state(self) -> NeuronState:
        return NeuronState.ACTIVE if self is Sense.POS else NeuronState.INACTIVE


@dataclass(frozen=True)
class HalfSpace:
    """Open half-space ``form < 0`` or ``form > 0`` over the input variables."""

    form: AffineForm
    sense: Sense

    def __post_init__(self):
        if not self.form.is_input_only:
            raise ValueError("half-space constraints may only mention input variables")

    def satisfied_by(self, x, margin: float = 0.0) -> bool:
        value = self.form.evaluate(x)
        return value <= -margin if self.sense is Sense.NEG else value >= margin


@dataclass(frozen=True)
class ConstraintSet:
    """Input box (``None`` in global mode) intersected with open half-spaces."""

    dim: int
    box: tuple[Interval, ...] | None = None
    halves: tuple[HalfSpace, ...] = ()

    def __post_init__(self):
        if self.box is not None and len(self.box) != self.dim:
            raise ValueError(f"box has {len(self.box)} intervals for {self.dim} inputs")

    def with_half(self, half: HalfSpace) -> ConstraintSet:
        return ConstraintSet(self.dim, self.box, self.halves + (half,))

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if self.box is not None and not all(iv.lo <= xi <= iv.hi for iv, xi in zip(self.box, x)):
            return False
        return all(h.satisfied_by(x, margin) for h in self.halves)


@dataclass(frozen=True, eq=False)
class SubProblem:
    """A node of the search tree.

    ``zle[l]`` holds the input-affine pre-activation forms of layer ``l`` and is
    filled for layers ``0..frontier``; ``frontier`` is the first hidden layer
    with a Star neuron, or the output layer when every neuron is decided.
    """

    constraints: ConstraintSet
    pattern: ActivationPattern
    zle: tuple[tuple[AffineForm, ...], ...] = ()
    frontier: int = -1
    lip_ub: float = math.inf
    branch_hint: tuple[int, int] | None = None
    creation_seq: int = 0
    # A point of the constraint set, and points on either side of the hinted neuron.
    witness: np.ndarray | None = field(default=None, repr=False)
    hint_witnesses: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def has_star(self) -> bool:
        return not self.pattern.is_decided

    def child(self, layer: int, neuron: int, half: HalfSpace, seq: int,
              witness: np.ndarray | None = None) -> SubProblem:
        """Add ``half`` and fix neuron ``(layer, neuron)`` to the matching state.

        Cached forms for layers up to ``layer`` stay valid and are shared.
        """
        zle = self.zle[:layer + 1]
        return SubProblem(
            constraints=self.constraints.with_half(half),
            pattern=self.pattern.with_state(layer, neuron, half.sense.state),
            zle=zle,
            frontier=len(zle) - 1,
            lip_ub=self.lip_ub,
            creation_seq=seq,
            witness=witness,
        )


def lin_prop(sp: SubProblem, net: Network) -> SubProblem:
    """Extend the cached input-affine forms through every fully decided layer.

    The forms of the first layer holding a Star neuron are still computed,
    since they depend only on earlier layers; propagation stops after it.
    """
    sp.pattern.check_shape(net)
    zle = list(sp.zle)
    if not zle:
        x = AffineForm.inputs(net.input_dim)
        W, b = net.weights[0], net.biases[0]
        zle.append(tuple(affine_combine(W[i], x, b[i]) for i in range(W.shape[0])))
    while len(zle) < net.num_layers:
        prev = len(zle) - 1
        if sp.pattern.layer_has_star(prev):
            break
        xle = [form if state is NeuronState.ACTIVE else ZERO
               for form, state in zip(zle[prev], sp.pattern.states[prev])]
        W, b = net.weights[prev + 1], net.biases[prev + 1]
        zle.append(tuple(affine_combine(W[i], xle, b[i]) for i in range(W.shape[0])))
    zle = tuple(zle)
    frontier = len(zle) - 1
    if len(zle) == len(sp.zle) and frontier == sp.frontier:
        return sp
    return replace(sp, zle=zle, frontier=frontier)


def make_root(net: Network, box: Sequence[Interval] | None, mode: Mode | str = Mode.LOCAL,
              sym: SymPropResult | None = None) -> SubProblem:
    """Root node: SymProp pattern over the box (local) or all neurons Star (global)."""
    mode = Mode(mode)
    if mode is Mode.GLOBAL:
        root = SubProblem(ConstraintSet(net.input_dim), ActivationPattern.all_star(net),
                          witness=np.zeros(net.input_dim))
    else:
        if box is None:
            raise ValueError("local mode needs an input box")
        box = tuple(check_box(net, box))
        if sym is None:
            sym = sym_prop(net, box)
        center = np.array([(iv.lo + iv.hi) / 2 for iv in box])
        root = SubProblem(ConstraintSet(net.input_dim, box), sym.pattern, witness=center)
    return lin_prop(root, net)

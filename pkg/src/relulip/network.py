"""Feed-forward ReLU networks: ingestion, evaluation and activation patterns."""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .numerics import TAU_NUM, DimensionMismatchError


class NetworkFormatError(ValueError):
    """The serialized network does not follow the expected JSON layout."""


class StarNeuronError(ValueError):
    """A point Jacobian was requested for a pattern with undecided neurons."""


class Network:
    """A ReLU multilayer perceptron ``f(x) = W_L relu(... relu(W_1 x + b_1) ...) + b_L``.

    ``weights[l]`` has shape ``(n_l, n_{l-1})``. The last layer is linear.
    """

    def __init__(self, weights: Sequence, biases: Sequence):
        if len(weights) == 0:
            raise DimensionMismatchError("a network needs at least one layer")
        if len(weights) != len(biases):
            raise DimensionMismatchError(f"{len(weights)} weight matrices but {len(biases)} bias vectors")
        ws, bs = [], []
        for l, (W, b) in enumerate(zip(weights, biases)):
            W = np.array(W, dtype=float)
            b = np.array(b, dtype=float)
            if W.ndim != 2 or W.shape[0] == 0 or W.shape[1] == 0:
                raise DimensionMismatchError(f"layer {l}: weights must be a nonempty 2-D matrix")
            if b.shape != (W.shape[0],):
                raise DimensionMismatchError(
                    f"layer {l}: bias has length {b.size}, expected {W.shape[0]}")
            if ws and W.shape[1] != ws[-1].shape[0]:
                raise DimensionMismatchError(
                    f"layer {l}: weights have {W.shape[1]} columns but layer {l - 1} "
                    f"has {ws[-1].shape[0]} neurons")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise NetworkFormatError(f"layer {l}: non-finite parameter")
            W.setflags(write=False)
            b.setflags(write=False)
            ws.append(W)
            bs.append(b)
        self.weights: tuple[np.ndarray, ...] = tuple(ws)
        self.biases: tuple[np.ndarray, ...] = tuple(bs)

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(W.shape[0] for W in self.weights[:-1])

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.input_dim,) + tuple(W.shape[0] for W in self.weights)

    @property
    def num_hidden(self) -> int:
        return sum(self.hidden_sizes)

    def to_dict(self) -> dict:
        return {"layers": [{"weights": W.tolist(), "bias": b.tolist()}
                           for W, b in zip(self.weights, self.biases)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __repr__(self):
        return f"Network(shape={self.shape})"


def load_network(data: bytes | str) -> Network:
    """Parse a network from its JSON text.

    Expected layout: ``{"layers": [{"weights": [[...], ...], "bias": [...]}, ...]}``
    with row ``i``, column ``j`` of ``weights`` connecting neuron ``j`` of the
    previous layer to neuron ``i`` of this one.
    """
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise NetworkFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("layers"), list):
        raise NetworkFormatError('expected an object with a "layers" list')
    weights, biases = [], []
    for l, layer in enumerate(doc["layers"]):
        if not isinstance(layer, dict) or "weights" not in layer or "bias" not in layer:
            raise NetworkFormatError(f'layer {l}: expected "weights" and "bias"')
        W, b = layer["weights"], layer["bias"]
        if (not isinstance(W, list) or not all(isinstance(row, list) for row in W)
                or not isinstance(b, list)):
            raise NetworkFormatError(f"layer {l}: weights must be a list of rows, bias a list")
        if len({len(row) for row in W}) > 1:
            raise DimensionMismatchError(f"layer {l}: ragged weight rows")
        try:
            weights.append(np.array(W, dtype=float).reshape(len(W), len(W[0]) if W else 0))
            biases.append(np.array(b, dtype=float))
        except (TypeError, ValueError) as exc:
            raise NetworkFormatError(f"layer {l}: non-numeric entry ({exc})") from exc
    return Network(weights, biases)


def load_network_file(path: str | os.PathLike) -> Network:
    with open(path, "rb") as fh:
        return load_network(fh.read())


def random_network(shape: Sequence[int], rng: np.random.Generator | int | None = None,
                   bias_scale: float = 0.5) -> Network:
    """Gaussian weights scaled by ``1/sqrt(fan_in)``; handy for tests and benchmarks."""
    rng = np.random.default_rng(rng)
    weights, biases = [], []
    for fan_in, fan_out in zip(shape[:-1], shape[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) / np.sqrt(fan_in))
        biases.append(bias_scale * rng.standard_normal(fan_out))
    return Network(weights, biases)


class NeuronState(enum.Enum):
    ACTIVE = "A"
    INACTIVE = "I"
    STAR = "*"

    def __repr__(self):
        return self.value


_LAMBDA = {
    NeuronState.ACTIVE: (1.0, 1.0),
    NeuronState.INACTIVE: (0.0, 0.0),
    NeuronState.STAR: (0.0, 1.0),
}


class ActivationPattern:
    """Per-hidden-layer neuron states; hashable and immutable.

    Layer and neuron indices are 0-based; hidden layer ``l`` is the output of
    ``net.weights[l]``.
    """

    __slots__ = ("states", "_hash")

    def __init__(self, states: Sequence[Sequence[NeuronState]]):
        self.states: tuple[tuple[NeuronState, ...], ...] = tuple(tuple(layer) for layer in states)
        self._hash = hash(self.states)

    @classmethod
    def all_star(cls, net: Network) -> ActivationPattern:
        return cls([[NeuronState.STAR] * n for n in net.hidden_sizes])

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self.states)

    def check_shape(self, net: Network) -> None:
        if self.shape != net.hidden_sizes:
            raise DimensionMismatchError(
                f"pattern shape {self.shape} does not match hidden layers {net.hidden_sizes}")

    def __getitem__(self, index: tuple[int, int]) -> NeuronState:
        layer, neuron = index
        return self.states[layer][neuron]

    def __eq__(self, other):
        if not isinstance(other, ActivationPattern):
            return NotImplemented
        return self.states == other.states

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = " | ".join("".join(s.value for s in layer) for layer in self.states)
        return f"ActivationPattern({body})"

    def with_state(self, layer: int, neuron: int, state: NeuronState) -> ActivationPattern:
        states = list(self.states)
        row = list(states[layer])
        row[neuron] = state
        states[layer] = tuple(row)
        return ActivationPattern(states)

    def star_neurons(self) -> Iterator[tuple[int, int]]:
        """Star neurons in layer-major, neuron-minor order."""
        for l, layer in enumerate(self.states):
            for i, s in enumerate(layer):
                if s is NeuronState.STAR:
                    yield l, i

    def num_star(self) -> int:
        return sum(s is NeuronState.STAR for layer in self.states for s in layer)

    def layer_has_star(self, layer: int) -> bool:
        return NeuronState.STAR in self.states[layer]

    def first_star_layer(self) -> int | None:
        for l, layer in enumerate(self.states):
            if NeuronState.STAR in layer:
                return l
        return None

    @property
    def is_decided(self) -> bool:
        return self.first_star_layer() is None

    def lambda_bounds(self, layer: int) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal of the interval matrix encoding ``layer``: [1,1], [0,0] or [0,1]."""
        pairs = [_LAMBDA[s] for s in self.states[layer]]
        lo = np.array([p[0] for p in pairs])
        hi = np.array([p[1] for p in pairs])
        return lo, hi


def _check_input(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.input_dim,):
        raise DimensionMismatchError(f"input has shape {x.shape}, expected ({net.input_dim},)")
    return x


def pre_activations(net: Network, x) -> list[np.ndarray]:
    """Pre-activation vectors of every layer, output layer last."""
    h = _check_input(net, x)
    zs = []
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = W @ h + b
        zs.append(z)
        if l < net.num_layers - 1:
            h = np.maximum(z, 0.0)
    return zs


def forward(net: Network, x) -> np.ndarray:
    return pre_activations(net, x)[-1]


def activation_at(net: Network, x, tol: float = TAU_NUM) -> tuple[ActivationPattern, bool]:
    """Activation pattern at ``x`` and whether ``f`` is differentiable there.

    A pre-activation within ``tol`` of zero is reported as Star and marks the
    point non-differentiable.
    """
    zs = pre_activations(net, x)[:-1]
    states = []
    differentiable = True
    for z in zs:
        row = []
        for value in z:
            if abs(value) <= tol:
                row.append(NeuronState.STAR)
                differentiable = False
            elif value > 0:
                row.append(NeuronState.ACTIVE)
            else:
                row.append(NeuronState.INACTIVE)
        states.append(row)
    return ActivationPattern(states), differentiable


def jacobian_of_pattern(net: Network, pattern: ActivationPattern) -> np.ndarray:
    """``W_L diag(a_{L-1}) W_{L-1} ... diag(a_1) W_1`` for a fully decided pattern."""
    pattern.check_shape(net)
    if not pattern.is_decided:
        raise StarNeuronError("pattern contains Star neurons")
    J = net.weights[0]
    for l in range(1, net.num_layers):
        active = np.array([s is NeuronState.ACTIVE for s in pattern.states[l - 1]], dtype=float)
        J = net.weights[l] @ (active[:, None] * J)
    return np.array(J)

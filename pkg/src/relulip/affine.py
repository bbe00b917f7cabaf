"""Sparse affine expressions over input and auxiliary (Star) variables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .numerics import Interval

PRUNE_TOL = 1e-12

INPUT = 0
STAR = 1


class MissingVariableError(KeyError):
    """A form mentions a variable that has no bounds."""


@dataclass(frozen=True, order=True)
class VarId:
    """Variable identity; orders inputs by index, then Star variables by (layer, neuron)."""

    kind: int
    layer: int
    neuron: int

    @classmethod
    def input(cls, index: int) -> VarId:
        return cls(INPUT, 0, index)

    @classmethod
    def star(cls, layer: int, neuron: int) -> VarId:
        return cls(STAR, layer, neuron)

    @property
    def is_input(self) -> bool:
        return self.kind == INPUT

    def __repr__(self):
        if self.kind == INPUT:
            return f"x{self.neuron}"
        return f"v{self.layer}_{self.neuron}"


VarBounds = Mapping[VarId, Interval]


class AffineForm:
    """``constant + sum(coeff * var)`` with no stored zero coefficients.

    Treat instances as immutable; ``coeffs`` is exposed read-only by convention.
    """

    __slots__ = ("coeffs", "constant", "_dense")

    def __init__(self, coeffs: Mapping[VarId, float] | None = None, constant: float = 0.0):
        items = coeffs.items() if coeffs else ()
        self.coeffs: dict[VarId, float] = {
            v: float(c) for v, c in sorted(items) if abs(c) >= PRUNE_TOL}
        self.constant = float(constant)
        self._dense = None

    @classmethod
    def const(cls, value: float) -> AffineForm:
        return cls(None, value)

    @classmethod
    def var(cls, var: VarId) -> AffineForm:
        return cls({var: 1.0})

    @classmethod
    def inputs(cls, n: int) -> list[AffineForm]:
        return [cls.var(VarId.input(i)) for i in range(n)]

    @classmethod
    def from_dense(cls, coeffs: Sequence[float], constant: float = 0.0) -> AffineForm:
        return cls({VarId.input(i): c for i, c in enumerate(coeffs)}, constant)

    @property
    def variables(self) -> Iterable[VarId]:
        return self.coeffs.keys()

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    @property
    def is_input_only(self) -> bool:
        return all(v.kind == INPUT for v in self.coeffs)

    def coeff(self, var: VarId) -> float:
        return self.coeffs.get(var, 0.0)

    def dense(self, n: int) -> np.ndarray:
        """Coefficients of ``x0..x{n-1}``; the form must be input-only."""
        if self._dense is None or self._dense.shape[0] != n:
            out = np.zeros(n)
            for v, c in self.coeffs.items():
                if v.kind != INPUT or v.neuron >= n:
                    raise ValueError(f"{v!r} is not one of {n} input variables")
                out[v.neuron] = c
            out.setflags(write=False)
            self._dense = out
        return self._dense

    def evaluate(self, values: Mapping[VarId, float] | Sequence[float]) -> float:
        """Value at a point; a sequence is read as the input vector."""
        if isinstance(values, Mapping):
            return self.constant + sum(c * values[v] for v, c in self.coeffs.items())
        total = self.constant
        for v, c in self.coeffs.items():
            if v.kind != INPUT:
                raise MissingVariableError(v)
            total += c * values[v.neuron]
        return total

    def __add__(self, other: AffineForm) -> AffineForm:
        return affine_combine([1.0, 1.0], [self, other], 0.0)

    def __mul__(self, scalar: float) -> AffineForm:
        return affine_combine([scalar], [self], 0.0)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, AffineForm):
            return NotImplemented
        return self.constant == other.constant and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.constant, tuple(self.coeffs.items())))

    def __repr__(self):
        terms = [f"{c:+g}*{v!r}" for v, c in self.coeffs.items()]
        return f"AffineForm({' '.join(terms + [f'{self.constant:+g}'])})"


ZERO = AffineForm()


def affine_combine(weights: Sequence[float], forms: Sequence[AffineForm], bias: float) -> AffineForm:
    """``sum(weights[k] * forms[k]) + bias`` with merged, zero-pruned coefficients."""
    if len(weights) != len(forms):
        raise ValueError(f"{len(weights)} weights for {len(forms)} forms")
    acc: dict[VarId, float] = {}
    constant = float(bias)
    for w, form in zip(weights, forms):
        if w == 0.0:
            continue
        constant += w * form.constant
        for v, c in form.coeffs.items():
            acc[v] = acc.get(v, 0.0) + w * c
    return AffineForm(acc, constant)


def affine_bounds(form: AffineForm, bounds: VarBounds) -> Interval:
    """Exact range of ``form`` when each variable ranges independently over its bounds."""
    lo = hi = form.constant
    for v, c in form.coeffs.items():
        try:
            b = bounds[v]
        except KeyError:
            raise MissingVariableError(v) from None
        if c > 0:
            lo += c * b.lo
            hi += c * b.hi
        else:
            lo += c * b.hi
            hi += c * b.lo
    return Interval(lo, hi)


def input_bounds(box: Sequence[Interval]) -> dict[VarId, Interval]:
    return {VarId.input(i): iv for i, iv in enumerate(box)}

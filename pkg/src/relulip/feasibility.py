"""LP feasibility of open half-space systems and the state-fixing filter.

Strict inequalities are tightened to a margin: ``form < 0`` becomes
``form <= -eps_strict`` and ``form > 0`` becomes ``form >= eps_strict``.
Feasibility is decided by a phase-1 simplex with Bland's rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .affine import AffineForm
from .network import Network, NeuronState
from .subproblem import ConstraintSet, HalfSpace, Sense, SubProblem, lin_prop

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeasibilityConfig:
    eps_strict: float = 1e-7
    lp_tol: float = 1e-9
    max_pivots: int = 10_000
    big_m: float = 1e6

    def __post_init__(self):
        if not self.eps_strict > 0:
            raise ValueError("eps_strict must be positive")
        if not self.lp_tol > 0:
            raise ValueError("lp_tol must be positive")
        if self.max_pivots < 1:
            raise ValueError("max_pivots must be at least 1")
        if not self.big_m > 0:
            raise ValueError("big_m must be positive")


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: np.ndarray | None = None
    pivots: int = 0
    pivot_limit_hit: bool = False
    # Global mode only: the witness sits on the artificial big-M box.
    touches_big_m: bool = False

    def __bool__(self):
        return self.feasible


def _box_arrays(cs: ConstraintSet, cfg: FeasibilityConfig) -> tuple[np.ndarray, np.ndarray]:
    if cs.box is None:
        return np.zeros(cs.dim), np.full(cs.dim, cfg.big_m)
    lo = np.array([iv.lo for iv in cs.box])
    hi = np.array([iv.hi for iv in cs.box])
    return (lo + hi) / 2, (hi - lo) / 2


def _rows(cs: ConstraintSet, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Half-spaces as ``G x <= h`` with each row scaled to unit max-norm."""
    n = cs.dim
    G = np.zeros((len(cs.halves), n))
    h = np.zeros(len(cs.halves))
    for k, half in enumerate(cs.halves):
        a, c = half.form.dense(n), half.form.constant
        if half.sense is Sense.NEG:
            g, rhs = a, -eps - c
        else:
            g, rhs = -a, c - eps
        scale = np.abs(g).max() if n else 0.0
        if scale > 0:
            g, rhs = g / scale, rhs / scale
        G[k], h[k] = g, rhs
    return G, h


def _phase_one(A: np.ndarray, b: np.ndarray, tol: float, max_pivots: int):
    """Find ``z >= 0`` with ``A z <= b``.

    Returns ``(status, z, pivots)`` with status ``"feasible"``, ``"infeasible"``
    or ``"limit"``.
    """
    m, nz = A.shape
    flip = b < 0
    n_art = int(flip.sum())
    if n_art == 0:
        return "feasible", np.zeros(nz), 0
    ncols = nz + m + n_art
    T = np.zeros((m + 1, ncols + 1))
    sign = np.where(flip, -1.0, 1.0)
    T[:m, :nz] = A * sign[:, None]
    T[:m, nz:nz + m] = np.diag(sign)
    T[:m, -1] = b * sign
    basis = np.empty(m, dtype=int)
    art_rows = np.flatnonzero(flip)
    basis[~flip] = nz + np.flatnonzero(~flip)
    art_cols = nz + m + np.arange(n_art)
    T[art_rows, art_cols] = 1.0
    basis[art_rows] = art_cols
    # reduced costs of min sum(artificials) on the starting basis
    T[m, :] = -T[art_rows].sum(axis=0)
    T[m, art_cols] = 0.0

    pivots = 0
    while True:
        entering = np.flatnonzero(T[m, :ncols] < -tol)
        if entering.size == 0:
            break
        if pivots >= max_pivots:
            return "limit", None, pivots
        j = int(entering[0])
        col = T[:m, j]
        candidates = np.flatnonzero(col > tol)
        if candidates.size == 0:
            # numerically flat column; skip it
            T[m, j] = 0.0
            continue
        ratios = T[candidates, -1] / col[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + tol * max(1.0, abs(best))]
        r = int(ties[np.argmin(basis[ties])])
        T[r] /= T[r, j]
        factors = T[:, j].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r])
        basis[r] = j
        pivots += 1

    infeasibility = -T[m, -1]
    if infeasibility > tol:
        return "infeasible", None, pivots
    z = np.zeros(ncols)
    z[basis] = np.maximum(T[:m, -1], 0.0)
    return "feasible", z[:nz], pivots


def solve_feasibility(cs: ConstraintSet, cfg: FeasibilityConfig | None = None) -> FeasibilityResult:
    """Decide whether some ``x`` in the box meets every half-space with margin ``eps_strict``.

    Global constraint sets use the box ``[-big_m, big_m]^n``. Hitting the pivot
    limit reports the set as feasible, so a region is never pruned by accident.
    """
    cfg = cfg or FeasibilityConfig()
    n = cs.dim
    center, radius = _box_arrays(cs, cfg)
    G, h = _rows(cs, cfg.eps_strict)
    # x = center + y_plus - y_minus with 0 <= y_plus, y_minus <= radius
    A = np.vstack([np.hstack([G, -G]), np.eye(2 * n)])
    b = np.concatenate([h - G @ center, radius, radius])
    status, z, pivots = _phase_one(A, b, cfg.lp_tol, cfg.max_pivots)
    if status == "limit":
        log.warning("pivot limit %d reached; treating constraint set as feasible", cfg.max_pivots)
        return FeasibilityResult(True, None, pivots, pivot_limit_hit=True)
    if status == "infeasible":
        return FeasibilityResult(False, None, pivots)
    x = center + z[:n] - z[n:]
    if cs.box is not None:
        lo = np.array([iv.lo for iv in cs.box])
        hi = np.array([iv.hi for iv in cs.box])
        x = np.clip(x, lo, hi)
    touches = cs.box is None and bool(np.any(np.abs(x) >= cfg.big_m * (1 - 1e-9)))
    return FeasibilityResult(True, x, pivots, touches_big_m=touches)


def feasible(cs: ConstraintSet, cfg: FeasibilityConfig | None = None) -> bool:
    return solve_feasibility(cs, cfg).feasible


def side_feasibility(cs: ConstraintSet, half: HalfSpace, cfg: FeasibilityConfig,
                     witness: np.ndarray | None = None) -> FeasibilityResult:
    """Feasibility of ``cs`` plus one half-space, skipping the LP when the
    known point ``witness`` of ``cs`` already satisfies it."""
    if witness is not None and half.satisfied_by(witness, cfg.eps_strict):
        return FeasibilityResult(True, witness)
    return solve_feasibility(cs.with_half(half), cfg)


def degenerate_state(form: AffineForm, witness: np.ndarray | None) -> NeuronState:
    """State for a neuron whose pre-activation stays within the margin on both sides.

    Such a neuron is either constant (where its state does not change the
    Jacobian) or varies over a band thinner than the solver margin.
    """
    if form.is_constant or witness is None:
        return NeuronState.ACTIVE if form.constant > 0 else NeuronState.INACTIVE
    return NeuronState.ACTIVE if form.evaluate(witness) > 0 else NeuronState.INACTIVE


def ffilter(sp: SubProblem, net: Network, cfg: FeasibilityConfig | None = None) -> SubProblem:
    """Fix every Star neuron whose sign is decided by the constraints.

    Scans Star neurons layer by layer, and stops at the first one with both
    sides feasible, recording it as ``branch_hint``.
    """
    cfg = cfg or FeasibilityConfig()
    sp = lin_prop(sp, net)
    cs, witness = sp.constraints, sp.witness
    while True:
        layer = sp.pattern.first_star_layer()
        if layer is None:
            return replace(sp, branch_hint=None, hint_witnesses=None)
        pattern = sp.pattern
        for layer_, neuron in list(pattern.star_neurons()):
            if layer_ != layer:
                break
            form = sp.zle[layer][neuron]
            neg = side_feasibility(cs, HalfSpace(form, Sense.NEG), cfg, witness)
            pos = side_feasibility(cs, HalfSpace(form, Sense.POS), cfg, witness)
            if neg and pos:
                return replace(sp, pattern=pattern, branch_hint=(layer, neuron),
                               hint_witnesses=(neg.witness, pos.witness))
            if pos:
                state = NeuronState.ACTIVE
            elif neg:
                state = NeuronState.INACTIVE
            else:
                state = degenerate_state(form, witness)
                log.debug("neuron %s undecidable at margin %g; fixed %s",
                          (layer, neuron), cfg.eps_strict, state)
            pattern = pattern.with_state(layer, neuron, state)
        sp = lin_prop(replace(sp, pattern=pattern), net)

"""Best-first branch and bound over activation-pattern partitions of the input domain."""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .feasibility import (
    FeasibilityConfig,
    FeasibilityResult,
    degenerate_state,
    ffilter,
    side_feasibility,
)
from .network import Network, jacobian_of_pattern
from .numerics import (
    TAU_NUM,
    Interval,
    IntervalMatrix,
    NormKind,
    abs_upper,
    imat_mul_diag_left,
    imat_mul_real_left,
    op_norm,
)
from .subproblem import HalfSpace, Mode, Sense, SubProblem, lin_prop, make_root
from .symprop import check_box, sym_prop

log = logging.getLogger(__name__)


class BabStatus(str, enum.Enum):
    EXACT = "exact"
    KAPPROX = "k_approx"
    ITER_LIMIT = "iter_limit"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class BabConfig:
    p: NormKind = NormKind.TWO
    k: float = 1.0
    mode: Mode = Mode.LOCAL
    max_iterations: int = 1_000_000
    time_limit: float = 300.0
    feas: FeasibilityConfig = field(default_factory=FeasibilityConfig)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p", NormKind.parse(self.p))
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.k >= 1:
            raise ValueError(f"approximation factor k must be >= 1, got {self.k}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")


class Progress(NamedTuple):
    iteration: int
    gub: float
    glb: float
    queue_size: int


@dataclass(frozen=True)
class BabResult:
    gub: float
    glb: float
    status: BabStatus
    iterations: int
    subproblems_created: int
    subproblems_remaining: int
    output_bounds: tuple[Interval, ...] | None
    elapsed: float
    trace: tuple[Progress, ...] = ()
    notes: tuple[str, ...] = ()


class BabQueue:
    """Max-heap on ``lip_ub``; equal bounds pop in creation order."""

    def __init__(self):
        self._heap: list[tuple[float, int, SubProblem]] = []
        self._seq = itertools.count()
        self.pushed = 0

    def next_seq(self) -> int:
        return next(self._seq)

    def push(self, sp: SubProblem) -> None:
        heapq.heappush(self._heap, (-sp.lip_ub, sp.creation_seq, sp))
        self.pushed += 1

    def peek(self) -> SubProblem:
        return self._heap[0][2]

    def pop(self) -> SubProblem:
        return heapq.heappop(self._heap)[2]

    def __len__(self):
        return len(self._heap)

    def __iter__(self):
        return (entry[2] for entry in self._heap)


def lipschitz_upper(sp: SubProblem, net: Network, p: NormKind | str, seed: int = 0) -> float:
    """Upper bound on the Lipschitz constant over the node's region.

    Exact Jacobian norm when the pattern is fully decided; otherwise the norm
    of the entrywise magnitude bound of the interval Jacobian, with Star
    neurons contributing ``[0, 1]``.
    """
    sp.pattern.check_shape(net)
    if sp.pattern.is_decided:
        return op_norm(jacobian_of_pattern(net, sp.pattern), p, seed)
    J = IntervalMatrix(net.weights[0])
    for l in range(1, net.num_layers):
        lam_lo, lam_hi = sp.pattern.lambda_bounds(l - 1)
        J = imat_mul_real_left(net.weights[l], imat_mul_diag_left(lam_lo, lam_hi, J))
    return op_norm(abs_upper(J), p, seed)


def _select_neuron(sp: SubProblem, net: Network) -> tuple[SubProblem, int, int]:
    if sp.branch_hint is not None:
        return sp, *sp.branch_hint
    sp = lin_prop(sp, net)
    layer, neuron = next(sp.pattern.star_neurons())
    return sp, layer, neuron


def branch(sp: SubProblem, net: Network, cfg: BabConfig, queue: BabQueue, glb: float) -> float:
    """Split ``sp`` on one Star neuron, push the feasible children, return the updated glb.

    The caller has already removed ``sp`` from the queue.
    """
    if not sp.has_star:
        raise ValueError("cannot branch a node without Star neurons")
    sp, layer, neuron = _select_neuron(sp, net)
    form = sp.zle[layer][neuron]
    children = []
    for idx, sense in enumerate((Sense.NEG, Sense.POS)):
        half = HalfSpace(form, sense)
        if sp.branch_hint is not None and sp.hint_witnesses is not None:
            result = FeasibilityResult(True, sp.hint_witnesses[idx])
        else:
            result = side_feasibility(sp.constraints, half, cfg.feas, sp.witness)
        if result:
            children.append(sp.child(layer, neuron, half, queue.next_seq(), result.witness))
    if not children:
        # Neither side clears the margin: keep the region with the neuron fixed.
        state = degenerate_state(form, sp.witness)
        log.debug("neuron %s undecidable at margin; fixed %s", (layer, neuron), state)
        children.append(replace(sp, pattern=sp.pattern.with_state(layer, neuron, state),
                                zle=sp.zle[:layer + 1], frontier=layer, branch_hint=None,
                                hint_witnesses=None, creation_seq=queue.next_seq()))
    for child in children:
        child = ffilter(child, net, cfg.feas)
        # Both bounds cover the child's region; the minimum keeps the sequence monotone.
        ub = min(lipschitz_upper(child, net, cfg.p, cfg.seed), sp.lip_ub)
        child = replace(child, lip_ub=ub)
        queue.push(child)
        if not child.has_star:
            glb = max(glb, ub)
    return glb


def _converged(top: SubProblem, gub: float, glb: float, k: float) -> BabStatus | None:
    if not top.has_star or gub <= glb + TAU_NUM:
        return BabStatus.EXACT
    if k > 1 and gub <= k * glb:
        return BabStatus.KAPPROX
    return None


def lip_bab(net: Network, box: Sequence[Interval] | None, cfg: BabConfig | None = None,
            callback: Callable[[Progress], None] | None = None) -> BabResult:
    """Certified upper and lower bounds on the ``p``-norm Lipschitz constant of ``net``.

    With ``k == 1`` and no limit hit, ``gub`` is the exact constant (up to the
    LP margin). When a limit stops the search, ``gub`` is still a valid upper
    bound. ``callback`` sees the bounds each time the heap top is read.
    """
    cfg = cfg or BabConfig()
    start = time.perf_counter()
    notes: list[str] = []
    output_bounds = None
    if cfg.mode is Mode.LOCAL:
        if box is None:
            raise ValueError("local mode needs an input box")
        box = tuple(check_box(net, box))
        sym = sym_prop(net, box)
        output_bounds = sym.output_bounds
        root = make_root(net, box, Mode.LOCAL, sym)
    else:
        root = make_root(net, None, Mode.GLOBAL)

    queue = BabQueue()
    root = ffilter(root, net, cfg.feas)
    root = replace(root, lip_ub=lipschitz_upper(root, net, cfg.p, cfg.seed),
                   creation_seq=queue.next_seq())
    queue.push(root)
    glb = 0.0 if root.has_star else root.lip_ub

    trace: list[Progress] = []
    iterations = 0
    gub = math.inf
    while True:
        top = queue.peek()
        gub = top.lip_ub
        iterations += 1
        progress = Progress(iterations, gub, glb, len(queue))
        trace.append(progress)
        if callback is not None:
            callback(progress)
        status = _converged(top, gub, glb, cfg.k)
        if status is not None:
            break
        if iterations >= cfg.max_iterations:
            status = BabStatus.ITER_LIMIT
            break
        if time.perf_counter() - start >= cfg.time_limit:
            status = BabStatus.TIME_LIMIT
            break
        queue.pop()
        glb = branch(top, net, cfg, queue, glb)

    if cfg.mode is Mode.GLOBAL:
        edge = cfg.feas.big_m * (1 - 1e-9)
        if any(sp.witness is not None and np.any(np.abs(sp.witness) >= edge) for sp in queue):
            notes.append(f"a region witness lies on the artificial box [-{cfg.feas.big_m:g}, "
                         f"{cfg.feas.big_m:g}]^n; regions beyond it are not explored")
    return BabResult(
        gub=gub,
        glb=glb,
        status=status,
        iterations=iterations,
        subproblems_created=queue.pushed,
        subproblems_remaining=len(queue),
        output_bounds=output_bounds,
        elapsed=time.perf_counter() - start,
        trace=tuple(trace),
        notes=tuple(notes),
    )

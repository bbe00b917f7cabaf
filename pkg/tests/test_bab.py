import math

import numpy as np
import pytest

from conftest import net_from, random_box, sample_box, unit_box
from relulip.bab import (
    BabConfig,
    BabQueue,
    BabStatus,
    branch,
    lip_bab,
    lipschitz_upper,
)
from relulip.feasibility import ffilter
from relulip.network import (
    ActivationPattern,
    NeuronState,
    activation_at,
    jacobian_of_pattern,
    random_network,
)
from relulip.numerics import Interval, NormKind, op_norm
from relulip.oracle import enumerate_regions
from relulip.subproblem import ConstraintSet, Mode, SubProblem, make_root

A, I, S = NeuronState.ACTIVE, NeuronState.INACTIVE, NeuronState.STAR
NORMS = (NormKind.ONE, NormKind.TWO, NormKind.INF)


def _root(net, box, cfg):
    queue = BabQueue()
    root = ffilter(make_root(net, box), net, cfg.feas)
    root = SubProblem(root.constraints, root.pattern, root.zle, root.frontier,
                      lipschitz_upper(root, net, cfg.p), root.branch_hint, queue.next_seq(),
                      root.witness, root.hint_witnesses)
    return root, queue


class TestLipschitzUpper:
    def test_abs_star(self, abs_net):
        sp = SubProblem(ConstraintSet(1), ActivationPattern([[S, S]]))
        assert lipschitz_upper(sp, abs_net, NormKind.INF) == 1.0

    @pytest.mark.parametrize("p", list(NormKind))
    def test_abs_decided(self, abs_net, p):
        sp = SubProblem(ConstraintSet(1), ActivationPattern([[A, I]]))
        assert lipschitz_upper(sp, abs_net, p) == pytest.approx(1.0)

    def test_linear(self, linear_net):
        assert lipschitz_upper(SubProblem(ConstraintSet(2), ActivationPattern([])),
                               linear_net, NormKind.ONE) == 6.0

    def test_dominates_every_completion(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            net = random_network((3, 4, 3, 2), rng)
            states = [[(A, I, S)[rng.integers(3)] for _ in range(n)] for n in net.hidden_sizes]
            pattern = ActivationPattern(states)
            sp = SubProblem(ConstraintSet(3), pattern)
            for p in NORMS:
                ub = lipschitz_upper(sp, net, p)
                for _ in range(5):
                    completion = ActivationPattern(
                        [[s if s is not S else (A, I)[rng.integers(2)] for s in layer]
                         for layer in states])
                    J = jacobian_of_pattern(net, completion)
                    assert op_norm(J, p) <= ub * (1 + 1e-9) + 1e-12


class TestBranch:
    def test_relu_root(self, relu_net):
        cfg = BabConfig(p=NormKind.INF)
        root, queue = _root(relu_net, [Interval(-1, 1)], cfg)
        glb = branch(root, relu_net, cfg, queue, 0.0)
        children = sorted(queue, key=lambda sp: sp.lip_ub)
        assert [c.pattern.states for c in children] == [((I,),), ((A,),)]
        assert [c.lip_ub for c in children] == [0.0, 1.0]
        assert glb == 1.0

    def test_hint_gives_two_children(self):
        rng = np.random.default_rng(1)
        cfg = BabConfig()
        seen = 0
        for _ in range(30):
            net = random_network((2, 5, 4, 1), rng)
            root, queue = _root(net, random_box(rng, 2), cfg)
            if root.branch_hint is None:
                continue
            branch(root, net, cfg, queue, 0.0)
            assert len(queue) == 2
            seen += 1
        assert seen > 10

    def test_children_bounded_by_parent(self):
        rng = np.random.default_rng(2)
        count = 0
        while count < 1000:
            net = random_network((2, 4, 4, 2), rng)
            cfg = BabConfig(p=NORMS[count % 3])
            root, queue = _root(net, random_box(rng, 2), cfg)
            frontier = [root] if root.has_star else []
            while frontier and count < 1000:
                parent = frontier.pop()
                before = set(map(id, queue))
                branch(parent, net, cfg, queue, 0.0)
                for child in (c for c in queue if id(c) not in before):
                    assert child.lip_ub <= parent.lip_ub
                    assert child.pattern.num_star() < parent.pattern.num_star()
                    count += 1
                    if child.has_star:
                        frontier.append(child)

    def test_rejects_decided_node(self, abs_net):
        sp = SubProblem(ConstraintSet(1), ActivationPattern([[A, I]]))
        with pytest.raises(ValueError):
            branch(sp, abs_net, BabConfig(), BabQueue(), 0.0)


class TestQueue:
    def test_order(self):
        q = BabQueue()
        pattern = ActivationPattern([])
        for ub in (1.0, 3.0, 3.0, 2.0):
            q.push(SubProblem(ConstraintSet(1), pattern, lip_ub=ub, creation_seq=q.next_seq()))
        popped = [(sp.lip_ub, sp.creation_seq) for sp in (q.pop() for _ in range(4))]
        assert popped == [(3.0, 1), (3.0, 2), (2.0, 3), (1.0, 0)]


class TestLipBab:
    def test_linear(self, linear_net):
        res = lip_bab(linear_net, unit_box(2), BabConfig(p=NormKind.ONE))
        assert (res.gub, res.glb, res.status, res.iterations) == (6.0, 6.0, BabStatus.EXACT, 1)

    def test_relu(self, relu_net):
        res = lip_bab(relu_net, [Interval(-1, 1)], BabConfig(p=NormKind.TWO))
        assert res.gub == pytest.approx(1.0) and res.status is BabStatus.EXACT
        assert res.output_bounds == (Interval(0.0, 1.0),)

    def test_global_relu(self, relu_net):
        res = lip_bab(relu_net, None, BabConfig(p=NormKind.INF, mode=Mode.GLOBAL))
        assert res.gub == 1.0 and res.status is BabStatus.EXACT and res.output_bounds is None

    def test_matches_oracle(self):
        rng = np.random.default_rng(3)
        for t in range(9):
            net = random_network((2, 8, 8, 2), rng)
            p = NORMS[t % 3]
            res = lip_bab(net, unit_box(2), BabConfig(p=p))
            truth = enumerate_regions(net, unit_box(2), p=p).max_norm()
            assert res.status is BabStatus.EXACT
            assert res.gub == pytest.approx(truth, rel=1e-6)

    def test_anytime_sound_and_monotone(self):
        rng = np.random.default_rng(4)
        for t in range(6):
            net = random_network((3, 6, 5, 2), rng)
            box = random_box(rng, 3)
            p = NORMS[t % 3]
            sampled = 0.0
            for x in sample_box(rng, box, 1000):
                pattern, diff = activation_at(net, x)
                if diff:
                    sampled = max(sampled, op_norm(jacobian_of_pattern(net, pattern), p))
            res = lip_bab(net, box, BabConfig(p=p))
            gubs = [r.gub for r in res.trace]
            glbs = [r.glb for r in res.trace]
            assert all(g + 1e-9 >= sampled for g in gubs)
            assert all(a >= b for a, b in zip(gubs, gubs[1:]))
            assert all(a <= b for a, b in zip(glbs, glbs[1:]))
            assert all(lo <= hi + 1e-9 for lo, hi in zip(glbs, gubs))

    @pytest.mark.parametrize("k", [1.5, 2.0])
    def test_k_approx(self, k):
        rng = np.random.default_rng(5)
        for _ in range(5):
            net = random_network((3, 8, 8, 2), rng)
            res = lip_bab(net, unit_box(3), BabConfig(k=k))
            assert res.status in (BabStatus.KAPPROX, BabStatus.EXACT)
            assert res.gub <= k * res.glb + 1e-9
            exact = lip_bab(net, unit_box(3))
            assert res.gub >= exact.gub - 1e-9 and res.iterations <= exact.iterations

    def test_iteration_limit_keeps_upper_bound(self):
        net = random_network((3, 8, 8, 2), 6)
        exact = lip_bab(net, unit_box(3))
        assert exact.iterations > 2
        res = lip_bab(net, unit_box(3), BabConfig(max_iterations=2))
        assert res.status is BabStatus.ITER_LIMIT and res.iterations == 2
        assert res.gub >= exact.gub and res.subproblems_remaining >= 1

    def test_time_limit(self):
        net = random_network((3, 8, 8, 2), 6)
        res = lip_bab(net, unit_box(3), BabConfig(time_limit=1e-9))
        assert res.status is BabStatus.TIME_LIMIT and math.isfinite(res.gub)

    def test_depth_bounded_by_neurons(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            net = random_network((2, 5, 5, 1), rng)
            cfg = BabConfig()
            root, queue = _root(net, unit_box(2), cfg)
            stack = [root]
            while stack:
                node = stack.pop()
                # one half-space per branching step
                assert len(node.constraints.halves) <= net.num_hidden
                if node.has_star:
                    before = set(map(id, queue))
                    branch(node, net, cfg, queue, 0.0)
                    stack.extend(c for c in queue if id(c) not in before)

    def test_global_at_least_local(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            net = random_network((2, 4, 4, 1), rng)
            box = random_box(rng, 2)
            local = lip_bab(net, box).gub
            glob = lip_bab(net, None, BabConfig(mode=Mode.GLOBAL)).gub
            assert glob >= local - 1e-9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BabConfig(k=0.5)
        with pytest.raises(ValueError):
            lip_bab(net_from(([[1.0]], [0.0])), None)

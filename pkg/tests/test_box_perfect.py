import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pareto_search import box_perfect as bp
from pareto_search.core import InstanceError, make_instance, subset_totals
from pareto_search.matrix_game import consistency_robustness

TWO_BOX = make_instance([1, 1], 1.0, [0])

times_st = st.lists(st.floats(0.1, 10), min_size=2, max_size=7)


def instance_st(times):
    return st.sets(st.integers(0, len(times) - 1), min_size=1, max_size=len(times) - 1).map(
        lambda h: make_instance(times, 1.0, h))


instances = times_st.flatmap(instance_st)


def test_two_box_values():
    assert bp.value_perfect([1]) == 1.0
    assert bp.value_perfect([1, 1]) == 1.5
    assert bp.alpha_star(TWO_BOX) == 0.5
    seg = bp.frontier_segment(TWO_BOX)
    assert (seg.c_min, seg.c_max, seg.rhs) == (1.0, 1.5, 3.0)
    assert bp.expected_times_sstar(TWO_BOX, 1.0) == (1.0, 2.0)
    assert bp.expected_times_sstar(TWO_BOX, 0.0) == (2.0, 1.0)


def test_value_closed_form_examples():
    assert bp.value_perfect([1, 2, 3]) == pytest.approx((14 + 36) / 12)
    assert bp.value_perfect([2.0]) == 2.0
    with pytest.raises(ValueError):
        bp.value_perfect([])


def test_search_cost():
    assert bp.search_cost((2, 0, 1), 0, [1, 2, 3]) == 4
    with pytest.raises(IndexError):
        bp.search_cost((0, 1), 3, [1, 1])
    with pytest.raises(ValueError):
        bp.search_cost((0,), 1, [1, 1])


@given(instances)
def test_value_split_identity(inst):
    t_h, t_hc, t_y, _ = subset_totals(inst)
    lhs = t_y * bp.value_perfect(inst.times)
    rhs = (t_h * bp.value_perfect(inst.times_of(inst.prediction))
           + t_hc * bp.value_perfect(inst.times_of(inst.complement)) + t_h * t_hc)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_proportional_hider_indifference(n):
    times = np.random.default_rng(n).uniform(0.5, 3, n).tolist()
    h = bp.hider_proportional(times).probs
    v = bp.value_perfect(times)
    for perm in itertools.permutations(range(n)):
        assert sum(h[j] * bp.search_cost(perm, j, times) for j in range(n)) == pytest.approx(v, abs=1e-12)


def test_hider_on_subset():
    h = bp.hider_proportional([1, 2, 3], [0, 2])
    assert h.probs == pytest.approx((0.25, 0.0, 0.75))


@given(instances, st.floats(0, 1))
def test_sstar_on_lower_bound_line(inst, alpha):
    c, r_hc = bp.expected_times_sstar(inst, alpha)
    if alpha >= bp.alpha_star(inst):
        # consistency side of alpha*: R is attained in H^c
        assert bp.lowerbound_gap_perfect(inst, c, r_hc) == pytest.approx(0, abs=1e-9 * (1 + c + r_hc) ** 2)


@settings(max_examples=30)
@given(instances)
def test_alpha_star_equalizes(inst):
    u_h, u_hc = bp.expected_times_sstar(inst, bp.alpha_star(inst))
    assert u_h == pytest.approx(u_hc, rel=1e-12)
    assert u_h == pytest.approx(bp.value_perfect(inst.times), rel=1e-12)
    assert 0 <= bp.alpha_star(inst) <= 1


def test_frontier_perfect_two_box():
    curve, seg = bp.frontier_perfect(TWO_BOX, 11)
    assert len(curve) == 11
    assert (curve[0].consistency, curve[0].robustness) == (1.0, 2.0)
    assert (curve[-1].consistency, curve[-1].robustness) == (1.5, 1.5)
    for p in curve:
        assert p.consistency + p.robustness == pytest.approx(3.0, abs=1e-12)
        u_h, u_hc = bp.expected_times_sstar(TWO_BOX, p.params.alpha)
        assert (u_h, max(u_h, u_hc)) == pytest.approx((p.consistency, p.robustness), abs=1e-12)
    with pytest.raises(ValueError):
        bp.frontier_perfect(TWO_BOX, 1)


def test_segment_geometry():
    seg = bp.frontier_segment(TWO_BOX)
    assert seg.robustness_at(1.2) == pytest.approx(1.8)
    assert seg.residual(1.2, 1.8) == pytest.approx(0)
    assert seg.distance(1.0, 2.0) == pytest.approx(0)
    assert seg.distance(0.0, 2.0) == pytest.approx(1.0)


def test_sample_sZ_first_box_distribution():
    rng = np.random.default_rng(5)
    firsts = Counter(bp.sample_sZ([1, 3], [0, 1], rng)[0] for _ in range(20000))
    assert firsts[1] / 20000 == pytest.approx(0.75, abs=0.015)
    assert sorted(bp.sample_sZ([1, 2, 3], [0, 1, 2], 0)) == [0, 1, 2]


def test_permutation_game_and_strategy_payoffs():
    inst = make_instance([1, 2, 3], 1.0, [1])
    pg = bp.permutation_game(inst)
    assert pg.game.shape == (6, 3)
    # s*(alpha) as an explicit mixture over orders reproduces the closed form
    alpha = 0.3
    rows = pg.game.row_labels
    w = np.zeros(len(rows))
    for r, label in enumerate(rows):
        order = [int(ch) for ch in label]
        h_first = order[0] == 1
        first_hc = order[1] if h_first else order[0]
        p_hc = inst.times[first_hc] / 4.0
        w[r] = (alpha if h_first else 0.0) * p_hc + ((1 - alpha) if order[2] == 1 else 0.0) * p_hc
    c, r_ = consistency_robustness(pg, w)
    u_h, u_hc = bp.expected_times_sstar(inst, alpha)
    assert c == pytest.approx(u_h)
    assert r_ == pytest.approx(max(u_h, u_hc))


def test_guards():
    with pytest.raises(InstanceError, match="n <= 8"):
        bp.permutation_game(make_instance([1] * 9, 1.0, [0]))
    with pytest.raises(InstanceError):
        bp.alpha_star(make_instance([1, 1], 0.5, [0]))
    with pytest.raises(ValueError):
        bp.sstar_sampler(TWO_BOX, 1.5)

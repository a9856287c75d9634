import numpy as np
import pytest

from pareto_search import box_imperfect as bi
from pareto_search import box_perfect as bp
from pareto_search.core import make_instance
from pareto_search.montecarlo import (
    BATCH, SimEstimate, StarvationError, batch_streams, default_step_cap, detection_times,
    estimate_CR_box, fixed_order, mixture, simulate_box,
)

TWO_BOX = make_instance([1, 1], 1.0, [0])
TWO_BOX_Q = make_instance([1, 1], 0.5, [0])


def test_batch_partition():
    sizes = [s for s, _, _ in batch_streams(1, 2 * BATCH + 5)]
    assert sizes == [BATCH, BATCH, 5]
    assert [s for s, _, _ in batch_streams(1, 3)] == [3]


def test_fixed_order_is_deterministic():
    x = detection_times(fixed_order([0, 1]), [0, 1], [1, 2], 1.0, 10, 0)
    assert np.all(x[:, 0] == 1) and np.all(x[:, 1] == 3)
    est = simulate_box(fixed_order([1, 0]), 0, [1, 2], 1.0, 5, 0)
    assert est.mean == 3 and est.stderr == 0


def test_reproducible_and_seed_sensitive():
    s = bp.sstar_sampler(TWO_BOX, 0.3)
    a = estimate_CR_box(s, TWO_BOX, 5000, 42)
    b = estimate_CR_box(s, TWO_BOX, 5000, 42)
    c = estimate_CR_box(s, TWO_BOX, 5000, 43)
    assert a == b
    assert a.consistency.mean != c.consistency.mean


def test_common_random_numbers_keep_order_constraint():
    # each trial opens both boxes exactly once, so the two times sum to 3
    x = detection_times(bp.sstar_sampler(TWO_BOX, 0.4), [0, 1], TWO_BOX.times, 1.0, 2000, 3)
    assert np.allclose(x.sum(axis=1), 3.0)


def test_geometric_detection_mean():
    # one box searched repeatedly: mean 1/q
    est = simulate_box(fixed_order([0]), 0, [1.0], 0.25, 40000, 9)
    assert est.within(4.0)


def test_sstar_estimates_match_closed_form():
    for alpha in (0.2, 0.7):
        e = estimate_CR_box(bp.sstar_sampler(TWO_BOX, alpha), TWO_BOX, 20000, 1)
        u_h, u_hc = bp.expected_times_sstar(TWO_BOX, alpha)
        assert e.per_box[0].within(u_h)
        assert e.per_box[1].within(u_hc)


def test_sk_estimates_match_closed_form():
    e = estimate_CR_box(bi.sk_sampler(TWO_BOX_Q, 1, 0.0), TWO_BOX_Q, 20000, 2)
    assert e.per_box[0].within(3.0)
    assert e.per_box[1].within(4.0)


def test_starvation():
    with pytest.raises(StarvationError):
        detection_times(fixed_order([0]), [0, 1], [1, 1], 1.0, 1, 0)
    with pytest.raises(StarvationError):
        detection_times(lambda rng: iter([0]), [0, 1], [1, 1], 1.0, 1, 0)
    assert default_step_cap(2, 0.5) == 256


def test_mixture_weights():
    s = mixture([fixed_order([0, 1]), fixed_order([1, 0])], [3, 1])
    est = simulate_box(s, 0, [1, 1], 1.0, 40000, 5)
    assert est.within(1.25)


def test_estimate_helpers():
    e = SimEstimate.from_samples(np.array([1.0, 3.0]), 0)
    assert e.mean == 2 and e.stderr == pytest.approx(1.0)
    assert e.within(4.9) and not e.within(5.1)
    assert e.within(5.5, extra_se=1.0)
    with pytest.raises(ValueError):
        detection_times(fixed_order([0]), [0], [1], 1.5, 1, 0)
    with pytest.raises(ValueError):
        detection_times(fixed_order([0]), [0], [1], 1.0, 0, 0)

import json

import pytest
from hypothesis import given, strategies as st

from pareto_search.core import (
    CycleParams, DiscreteHiderDistribution, GeometricParams, InstanceError, MixParams,
    OracleParams, ParetoCurve, ParetoPoint, load_instance, make_instance, params_from_dict,
    save_instance, subset_totals,
)


def test_make_instance_basic():
    inst = make_instance([1, 2, 3], 1.0, [1])
    assert inst.n == 3
    assert inst.h_indices == [1]
    assert inst.hc_indices == [0, 2]
    assert inst.perfect
    assert subset_totals(inst) == (2.0, 4.0, 6.0, 14.0)


@pytest.mark.parametrize("times, q, pred, msg", [
    ([1, 0], 1.0, [0], "nonpositive time"),
    ([1, -2], 1.0, [0], "nonpositive time"),
    ([1, 1], 1.0, [0, 1], "proper subset"),
    ([1, 1], 1.0, [], "nonempty"),
    ([1, 1], 1.0, [5], "out of range"),
    ([1, 1], 0.0, [0], "outside"),
    ([1, 1], 1.5, [0], "outside"),
    ([1], 1.0, [0], "two boxes"),
])
def test_invalid_instances(times, q, pred, msg):
    with pytest.raises(InstanceError, match=msg):
        make_instance(times, q, pred)


def test_instance_round_trip(tmp_path):
    inst = make_instance([0.5, 2.5, 1.0], 0.4, [0, 2])
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    assert json.loads(path.read_text()) == {"times": [0.5, 2.5, 1.0], "q": 0.4, "prediction": [0, 2]}
    assert load_instance(path) == inst


def test_load_instance_missing_field(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"times": [1, 2]}')
    with pytest.raises(InstanceError, match="prediction"):
        load_instance(path)


def test_point_rejects_c_above_r():
    with pytest.raises(ValueError):
        ParetoPoint(2.0, 1.0)
    ParetoPoint(1.5, 1.5)


def test_curve_ordering_enforced():
    with pytest.raises(ValueError):
        ParetoCurve((ParetoPoint(1, 2), ParetoPoint(1, 1.5)))
    with pytest.raises(ValueError):
        ParetoCurve((ParetoPoint(1, 2), ParetoPoint(1.5, 2)))


def test_from_points_filters_and_merges():
    pts = [ParetoPoint(1.5, 1.5), ParetoPoint(1, 2), ParetoPoint(1.2, 1.9),
           ParetoPoint(1.2, 2.5), ParetoPoint(1 + 1e-12, 2 + 1e-12)]
    curve = ParetoCurve.from_points(pts)
    assert curve.consistencies == [1, 1.2, 1.5]
    assert curve.robustnesses == [2, 1.9, 1.5]


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=1, max_size=30))
def test_from_points_is_pareto(pairs):
    pts = [ParetoPoint(min(a, b), max(a, b)) for a, b in pairs]
    curve = ParetoCurve.from_points(pts)
    assert len(curve) >= 1
    for p in pts:
        # every input point is weakly dominated by some kept point
        assert any(k.consistency <= p.consistency + 1e-9 and k.robustness <= p.robustness + 1e-9
                   for k in curve)


def test_hider_distribution_sum():
    DiscreteHiderDistribution((0.25, 0.75))
    with pytest.raises(ValueError):
        DiscreteHiderDistribution((0.5, 0.6))
    with pytest.raises(ValueError):
        DiscreteHiderDistribution((1.5, -0.5))


@pytest.mark.parametrize("p", [MixParams(0.3), CycleParams(2, 0.5), GeometricParams(3.0, 0.5),
                               OracleParams((0.5, 0.5), (1.0, 2.0))])
def test_params_round_trip(p):
    assert params_from_dict(p.to_dict()) == p
    assert params_from_dict(json.loads(json.dumps(p.to_dict()))) == p

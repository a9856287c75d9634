import json

import numpy as np
import pytest
from scipy.optimize import linprog

from pareto_search.box_perfect import frontier_segment, permutation_game
from pareto_search.core import make_instance
from pareto_search.matrix_game import (
    MatrixGame, PredictedMatrixGame, SolverError, SolverWarning, auxiliary_game,
    consistency_robustness, game_from_dict, game_to_dict, load_game, save_game, solve,
    trace_frontier,
)


def lp_value(a):
    """Row player minimizes: min v s.t. x^T A <= v, sum x = 1."""
    m, k = a.shape
    c = np.r_[np.zeros(m), 1.0]
    a_ub = np.c_[a.T, -np.ones(k)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(k), A_eq=np.r_[np.ones(m), 0.0][None],
                  b_eq=[1.0], bounds=[(0, None)] * m + [(None, None)])
    return res.fun


def test_matching_pennies():
    sol = solve(MatrixGame([[1, -1], [-1, 1]]))
    assert sol.value == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(sol.row_mix, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(sol.col_mix, [0.5, 0.5], atol=1e-12)


def test_rock_paper_scissors():
    a = np.array([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])
    sol = solve(MatrixGame(a))
    assert sol.value == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(sol.row_mix, [1 / 3] * 3, atol=1e-12)


def test_dominated_row_ignored():
    sol = solve(MatrixGame([[1, 2], [3, 4]]))
    assert sol.value == pytest.approx(2)
    np.testing.assert_allclose(sol.row_mix, [1, 0], atol=1e-12)


def test_single_row_and_constant_game():
    assert solve(MatrixGame([[3, 1, 2]])).value == pytest.approx(3)
    assert solve(MatrixGame([[2, 2], [2, 2]])).value == pytest.approx(2)


def test_matches_scipy_on_random_games():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a = rng.normal(size=(rng.integers(1, 8), rng.integers(1, 8))) * rng.uniform(0.1, 100)
        sol = solve(MatrixGame(a))
        assert sol.value == pytest.approx(lp_value(a), abs=1e-7 * max(1, np.abs(a).max()))
        assert sol.duality_gap <= 1e-9 * max(1, np.abs(a).max())


def test_rejects_bad_payoff():
    with pytest.raises(ValueError):
        MatrixGame([[1, np.nan]])
    with pytest.raises(ValueError):
        MatrixGame(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        solve(MatrixGame([[1]]), tol=0)


def test_iteration_cap_raises():
    rng = np.random.default_rng(0)
    with pytest.raises(SolverError):
        solve(MatrixGame(rng.normal(size=(6, 6))), max_iter=1)


def test_auxiliary_game_shape_and_labels():
    pg = PredictedMatrixGame(MatrixGame([[1, 2, 3], [3, 2, 1]], col_labels=("a", "b", "c")), (0, 2))
    aux = auxiliary_game(pg, 1.0, 2.0)
    assert aux.shape == (2, 6)
    assert aux.col_labels[1] == "(a,b)"
    np.testing.assert_allclose(aux.payoff[:, 1], [1 + 4, 3 + 4])
    with pytest.raises(ValueError):
        auxiliary_game(pg, 0, 0)


def test_scalarized_value_identity():
    inst = make_instance([1, 2, 3], 1.0, [1])
    pg = permutation_game(inst)
    for lam in (0.1, 1.0, 10.0):
        sol = solve(auxiliary_game(pg, 1.0, lam))
        c, r = consistency_robustness(pg, sol.row_mix)
        assert c + lam * r == pytest.approx(sol.value, abs=1e-9)


def test_trace_frontier_two_box():
    pg = permutation_game(make_instance([1, 1], 1.0, [0]))
    curve = trace_frontier(pg, np.geomspace(1e-3, 1e3, 9))
    assert curve[0].consistency == pytest.approx(1.0, abs=1e-9)
    assert curve[0].robustness == pytest.approx(2.0, abs=1e-9)
    assert curve[-1].consistency == pytest.approx(1.5, abs=1e-9)
    for p in curve:
        assert p.consistency + p.robustness == pytest.approx(3.0, abs=1e-9)


def test_trace_frontier_on_segment():
    inst = make_instance([1, 2, 3], 1.0, [1])
    seg = frontier_segment(inst)
    curve = trace_frontier(permutation_game(inst), np.geomspace(1e-3, 1e3, 25))
    assert max(seg.distance(p.consistency, p.robustness) for p in curve) < 1e-9


def test_trace_frontier_warns_and_skips(monkeypatch):
    import pareto_search.matrix_game as mg

    real = mg.solve

    def flaky(game, tol=1e-9, max_iter=None):
        if game.payoff.max() > 100:
            raise SolverError("forced")
        return real(game, tol, max_iter)

    pg = permutation_game(make_instance([1, 1], 1.0, [0]))
    monkeypatch.setattr(mg, "solve", flaky)
    with pytest.warns(SolverWarning, match="forced"):
        curve = trace_frontier(pg, [0.01, 1000.0])
    assert len(curve) == 2


def test_game_json_round_trip(tmp_path):
    pg = permutation_game(make_instance([1, 2], 1.0, [0]))
    save_game(pg, tmp_path / "g.json")
    back = load_game(tmp_path / "g.json")
    np.testing.assert_array_equal(back.game.payoff, pg.game.payoff)
    assert back.h_columns == pg.h_columns
    d = json.loads(json.dumps(game_to_dict(pg.game)))
    assert isinstance(game_from_dict(d), MatrixGame)

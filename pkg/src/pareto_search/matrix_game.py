"""Finite zero-sum matrix games and frontier tracing by scalarization.

Rows belong to the minimizing player, columns to the maximizer.  Games are
solved exactly enough for oracle duty with a small dense simplex method;
the consistency/robustness frontier of a game with a predicted column set
is traced by solving the weighted-pair games over a grid of weights.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import OracleParams, ParetoCurve, ParetoPoint

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


class SolverError(RuntimeError):
    """The simplex iteration did not reach a certified optimum."""


class SolverWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MatrixGame:
    payoff: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        a = np.array(self.payoff, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("payoff must be a nonempty 2-D matrix")
        if not np.all(np.isfinite(a)):
            raise ValueError("payoff entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "payoff", a)
        rows = tuple(self.row_labels) or tuple(str(i) for i in range(a.shape[0]))
        cols = tuple(self.col_labels) or tuple(str(j) for j in range(a.shape[1]))
        if len(rows) != a.shape[0] or len(cols) != a.shape[1]:
            raise ValueError("label count does not match payoff shape")
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.payoff.shape


@dataclass(frozen=True)
class PredictedMatrixGame:
    game: MatrixGame
    h_columns: tuple[int, ...]

    def __post_init__(self):
        cols = tuple(sorted(set(int(j) for j in self.h_columns)))
        ncol = self.game.shape[1]
        if not cols:
            raise ValueError("prediction must be nonempty")
        if any(j < 0 or j >= ncol for j in cols):
            raise ValueError("prediction column out of range")
        if len(cols) == ncol:
            raise ValueError("prediction must be a proper subset of the columns")
        object.__setattr__(self, "h_columns", cols)


@dataclass(frozen=True)
class GameSolution:
    value: float
    row_mix: np.ndarray
    col_mix: np.ndarray
    duality_gap: float
    upper: float
    lower: float


# ---------------------------------------------------------------------------
# simplex
# ---------------------------------------------------------------------------

def _simplex_max(a: np.ndarray, max_iter: int, eps: float = 1e-12):
    """Maximize sum(p) subject to a.T @ p <= 1, p >= 0, for a > 0.

    Returns (p, duals).  The right-hand side is all ones, so the slack basis
    is feasible and a single phase suffices.  Bland's rule prevents cycling.
    """
    m, k = a.shape
    tab = np.zeros((k + 1, m + k + 1))
    tab[:k, :m] = a.T
    tab[:k, m:m + k] = np.eye(k)
    tab[:k, -1] = 1.0
    tab[k, :m] = -1.0
    basis = list(range(m, m + k))

    for _ in range(max_iter):
        obj = tab[k, :-1]
        entering = np.flatnonzero(obj < -eps)
        if entering.size == 0:
            break
        j = int(entering[0])
        col = tab[:k, j]
        rows = np.flatnonzero(col > eps)
        if rows.size == 0:
            raise SolverError("unbounded LP (payoff matrix not positive after shift)")
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + eps * max(1.0, abs(best))]
        i = int(min(ties, key=lambda r: basis[r]))
        tab[i] /= tab[i, j]
        others = np.arange(k + 1) != i
        tab[others] -= np.outer(tab[others, j], tab[i])
        basis[i] = j
    else:
        raise SolverError(f"simplex did not converge in {max_iter} iterations")

    p = np.zeros(m)
    for r, var in enumerate(basis):
        if var < m:
            p[var] = tab[r, -1]
    duals = tab[k, m:m + k].copy()
    return p, duals


def _normalize(v: np.ndarray) -> np.ndarray:
    v = np.clip(v, 0.0, None)
    s = v.sum()
    if s <= 0:
        raise SolverError("degenerate mixed strategy")
    return v / s


def solve(game: MatrixGame, tol: float = DEFAULT_TOL, max_iter: int | None = None) -> GameSolution:
    """Minimax solution of ``game`` (rows minimize)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = game.payoff
    m, k = a.shape
    span = float(a.max() - a.min()) or 1.0
    shifted = (a - a.min()) / span + 1.0  # entries in [1, 2]; optimal mixes are unchanged
    if max_iter is None:
        max_iter = 50 * (m + k) + 1000
    p, duals = _simplex_max(shifted, max_iter)
    row_mix = _normalize(p)
    col_mix = _normalize(duals)
    upper = float((row_mix @ a).max())
    lower = float((a @ col_mix).min())
    gap = upper - lower
    if gap > tol:
        raise SolverError(f"duality gap {gap:.3e} exceeds tolerance {tol:.1e}")
    return GameSolution(0.5 * (upper + lower), row_mix, col_mix, max(gap, 0.0), upper, lower)


# ---------------------------------------------------------------------------
# scalarization
# ---------------------------------------------------------------------------

def auxiliary_game(pg: PredictedMatrixGame, lambda1: float, lambda2: float) -> MatrixGame:
    """Game over pairs (y1 in H, y2 in Y) paying lambda1*u(x,y1) + lambda2*u(x,y2)."""
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("weights must be nonnegative")
    if lambda1 == 0 and lambda2 == 0:
        raise ValueError("weights must not both be zero")
    a = pg.game.payoff
    labels = pg.game.col_labels
    cols, names = [], []
    for y1 in pg.h_columns:
        for y2 in range(a.shape[1]):
            cols.append(lambda1 * a[:, y1] + lambda2 * a[:, y2])
            names.append(f"({labels[y1]},{labels[y2]})")
    return MatrixGame(np.column_stack(cols), pg.game.row_labels, tuple(names))


def consistency_robustness(pg: PredictedMatrixGame, row_mix: Sequence[float]) -> tuple[float, float]:
    x = np.asarray(row_mix, dtype=float)
    if x.shape != (pg.game.shape[0],) or np.any(x < -1e-12) or abs(x.sum() - 1.0) > 1e-9:
        raise ValueError("row_mix must be a distribution over the rows")
    expected = x @ pg.game.payoff
    return float(expected[list(pg.h_columns)].max()), float(expected.max())


def trace_frontier(pg: PredictedMatrixGame, lambda_grid: Sequence[float],
                   tol: float = DEFAULT_TOL) -> ParetoCurve:
    """Pareto frontier from optimal strategies of the weighted games.

    Weights (0, 1) are always included; each grid value ``lam`` adds the
    weights (1, lam).  A grid point whose game cannot be solved is skipped
    with a :class:`SolverWarning`.
    """
    weights = [(0.0, 1.0)] + [(1.0, float(lam)) for lam in lambda_grid]
    points = []
    for l1, l2 in weights:
        if l2 < 0:
            raise ValueError("lambda grid values must be nonnegative")
        try:
            sol = solve(auxiliary_game(pg, l1, l2), tol)
        except SolverError as exc:
            warnings.warn(f"lambda=({l1}, {l2}) skipped: {exc}", SolverWarning, stacklevel=2)
            continue
        c, r = consistency_robustness(pg, sol.row_mix)
        log.debug("lambda=(%g, %g): value %.12g, C=%.12g, R=%.12g", l1, l2, sol.value, c, r)
        points.append(ParetoPoint(c, r, OracleParams(tuple(sol.row_mix.tolist()), (l1, l2))))
    return ParetoCurve.from_points(points)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def game_to_dict(pg: PredictedMatrixGame | MatrixGame) -> dict:
    game = pg.game if isinstance(pg, PredictedMatrixGame) else pg
    d = {
        "payoff": game.payoff.tolist(),
        "rowLabels": list(game.row_labels),
        "colLabels": list(game.col_labels),
    }
    if isinstance(pg, PredictedMatrixGame):
        d["hColumns"] = list(pg.h_columns)
    return d


def game_from_dict(d: dict) -> PredictedMatrixGame | MatrixGame:
    game = MatrixGame(np.array(d["payoff"], dtype=float),
                      tuple(d.get("rowLabels", ())), tuple(d.get("colLabels", ())))
    if d.get("hColumns") is not None:
        return PredictedMatrixGame(game, tuple(d["hColumns"]))
    return game


def load_game(path: str | Path) -> PredictedMatrixGame | MatrixGame:
    with open(path) as fh:
        return game_from_dict(json.load(fh))


def save_game(pg: PredictedMatrixGame | MatrixGame, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(game_to_dict(pg), fh)

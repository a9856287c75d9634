"""Box search with perfect detection.

A searcher opens boxes one at a time; opening box j costs t_j and always
reveals the hider if it is there.  With a predicted set H the
Pareto-optimal strategies mix two orders: an optimal search of H followed
by one of its complement, or the reverse.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import (
    BoxInstance,
    DiscreteHiderDistribution,
    InstanceError,
    MixParams,
    ParetoCurve,
    ParetoPoint,
    subset_totals,
)
from .matrix_game import MatrixGame, PredictedMatrixGame


@dataclass(frozen=True)
class PerfectFrontierSegment:
    """The line t(H) c + t(H^c) r = t(Y) V(Y) for c in [V(H), V(Y)]."""

    t_h: float
    t_hc: float
    rhs: float
    c_min: float
    c_max: float

    def robustness_at(self, c: float) -> float:
        return (self.rhs - self.t_h * c) / self.t_hc

    def residual(self, c: float, r: float) -> float:
        return self.t_h * c + self.t_hc * r - self.rhs

    def distance(self, c: float, r: float) -> float:
        """Euclidean distance from (c, r) to the segment."""
        p = np.array([c, r])
        a = np.array([self.c_min, self.robustness_at(self.c_min)])
        b = np.array([self.c_max, self.robustness_at(self.c_max)])
        d = b - a
        s = np.clip((p - a) @ d / (d @ d), 0.0, 1.0)
        return float(np.linalg.norm(p - (a + s * d)))


def _require_perfect(inst: BoxInstance) -> None:
    if inst.q != 1.0:
        raise InstanceError("perfect-detection formulas need q = 1")


def search_cost(perm: Sequence[int], j: int, times: Sequence[float]) -> float:
    """Time at which ``perm`` opens box ``j``, including box j itself."""
    if not 0 <= j < len(times):
        raise IndexError(f"box {j} out of range")
    total = 0.0
    for box in perm:
        total += times[box]
        if box == j:
            return total
    raise ValueError(f"box {j} is not in the search order")


def value_perfect(times: Sequence[float]) -> float:
    """Value of the perfect-detection game on the given boxes."""
    if len(times) == 0:
        raise ValueError("empty box set")
    s = math.fsum(times)
    s2 = math.fsum(t * t for t in times)
    return (s2 + s * s) / (2.0 * s)


def hider_proportional(times: Sequence[float], subset: Iterable[int] | None = None) -> DiscreteHiderDistribution:
    """Hide in box j of ``subset`` with probability proportional to t_j."""
    idx = range(len(times)) if subset is None else sorted(set(subset))
    if not idx:
        raise ValueError("empty box set")
    total = math.fsum(times[j] for j in idx)
    probs = [0.0] * len(times)
    for j in idx:
        probs[j] = times[j] / total
    # absorb rounding so the sum check holds
    last = idx[-1]
    probs[last] = 1.0 - math.fsum(p for i, p in enumerate(probs) if i != last)
    return DiscreteHiderDistribution(tuple(probs))


def sample_sZ(times: Sequence[float], subset: Iterable[int], rng: np.random.Generator | int) -> list[int]:
    """One draw of the optimal search of ``subset``: the first box with
    probability proportional to its time, the rest in uniform random order."""
    rng = np.random.default_rng(rng)
    boxes = sorted(set(subset))
    if not boxes:
        raise ValueError("empty box set")
    if len(boxes) == 1:
        return boxes
    w = np.array([times[j] for j in boxes])
    first = int(rng.choice(len(boxes), p=w / w.sum()))
    rest = boxes[:first] + boxes[first + 1:]
    return [boxes[first]] + [rest[i] for i in rng.permutation(len(rest))]


def sstar_sampler(inst: BoxInstance, alpha: float):
    """Sampler factory for s*(alpha): with probability alpha search H first."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    h, hc = inst.h_indices, inst.hc_indices

    def draw(rng: np.random.Generator) -> Iterator[int]:
        first, second = (h, hc) if rng.random() < alpha else (hc, h)
        yield from sample_sZ(inst.times, first, rng)
        yield from sample_sZ(inst.times, second, rng)

    return draw


def alpha_star(inst: BoxInstance) -> float:
    _require_perfect(inst)
    _, t_hc, _, _ = subset_totals(inst)
    v_y = value_perfect(inst.times)
    v_h = value_perfect(inst.times_of(inst.prediction))
    return 1.0 - (v_y - v_h) / t_hc


def expected_times_sstar(inst: BoxInstance, alpha: float) -> tuple[float, float]:
    """Expected search times of s*(alpha) for a hider in H and in H^c."""
    _require_perfect(inst)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    t_h, t_hc, _, _ = subset_totals(inst)
    v_h = value_perfect(inst.times_of(inst.prediction))
    v_hc = value_perfect(inst.times_of(inst.complement))
    return v_h + (1.0 - alpha) * t_hc, v_hc + alpha * t_h


def frontier_segment(inst: BoxInstance) -> PerfectFrontierSegment:
    _require_perfect(inst)
    t_h, t_hc, t_y, _ = subset_totals(inst)
    v_y = value_perfect(inst.times)
    return PerfectFrontierSegment(t_h, t_hc, t_y * v_y,
                                  value_perfect(inst.times_of(inst.prediction)), v_y)


def frontier_perfect(inst: BoxInstance, n_points: int = 11) -> tuple[ParetoCurve, PerfectFrontierSegment]:
    """Points evenly spaced in consistency along the frontier segment."""
    if n_points < 2:
        raise ValueError("need at least two points")
    seg = frontier_segment(inst)
    points = []
    for c in np.linspace(seg.c_min, seg.c_max, n_points):
        c = float(c)
        alpha = min(1.0, max(0.0, 1.0 - (c - seg.c_min) / seg.t_hc))
        points.append(ParetoPoint(c, seg.robustness_at(c), MixParams(alpha)))
    return ParetoCurve(tuple(points)), seg


def lowerbound_gap_perfect(inst: BoxInstance, c: float, r: float) -> float:
    """t(H) C + t(H^c) R - t(Y) V(Y); nonnegative for every strategy."""
    return frontier_segment(inst).residual(c, r)


def permutation_game(inst: BoxInstance, max_boxes: int = 8) -> PredictedMatrixGame:
    """The game with one row per search order and one column per box."""
    if inst.n > max_boxes:
        raise InstanceError(f"exhaustive oracle limited to n <= {max_boxes}")
    perms = list(itertools.permutations(range(inst.n)))
    payoff = np.empty((len(perms), inst.n))
    for r, perm in enumerate(perms):
        clock = np.cumsum([inst.times[b] for b in perm])
        payoff[r, list(perm)] = clock
    game = MatrixGame(payoff, tuple("".join(map(str, p)) for p in perms),
                      tuple(str(j) for j in range(inst.n)))
    return PredictedMatrixGame(game, tuple(inst.h_indices))

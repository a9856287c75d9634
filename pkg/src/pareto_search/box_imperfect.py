"""Box search with imperfect detection.

Each look into the hider's box finds it independently with probability q,
so a search is an infinite box sequence.  The Pareto-optimal strategies
s^k(beta) search H some number of times before alternating between the
complement and H; the matching lower bounds come from the hider family h^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .box_perfect import hider_proportional, sample_sZ, value_perfect
from .core import (
    BoxInstance,
    CycleParams,
    DiscreteHiderDistribution,
    InstanceError,
    ParetoCurve,
    ParetoPoint,
    subset_totals,
)

IDENTITY_TOL = 1e-9


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise InstanceError(
            f"imperfect detection needs 0 < q < 1 (got q={q}); use the box-perfect game for q = 1")


def value_imperfect(times: Sequence[float], q: float) -> float:
    """Game value V_q on the given boxes.

    Evaluated from the pairwise-product form and checked against
    V_1 + (1 - q) t / q.
    """
    _check_q(q)
    if len(times) == 0:
        raise ValueError("empty box set")
    t = math.fsum(times)
    pairs = math.fsum(times[i] * times[j] for i in range(len(times)) for j in range(i + 1, len(times)))
    direct = t / q - pairs / t
    via_perfect = value_perfect(times) + (1.0 - q) * t / q
    if abs(direct - via_perfect) > IDENTITY_TOL * max(1.0, abs(direct)):
        raise ArithmeticError(f"value forms disagree: {direct} vs {via_perfect}")
    return direct


@dataclass(frozen=True)
class _Consts:
    t_h: float
    t_hc: float
    t_y: float
    v_h: float
    v_hc: float
    v_y: float
    q: float


def _consts(inst: BoxInstance) -> _Consts:
    _check_q(inst.q)
    t_h, t_hc, t_y, _ = subset_totals(inst)
    return _Consts(t_h, t_hc, t_y,
                   value_imperfect(inst.times_of(inst.prediction), inst.q),
                   value_imperfect(inst.times_of(inst.complement), inst.q),
                   value_imperfect(inst.times, inst.q), inst.q)


def beta_star(inst: BoxInstance) -> float:
    c = _consts(inst)
    return 1.0 / c.q - (c.v_y - c.v_h) / c.t_hc


def breakpoint(inst: BoxInstance, k: int) -> float:
    """Consistency v_k at which the frontier switches from line k to k-1."""
    c = _consts(inst)
    return c.v_h + (1.0 - c.q) ** k / c.q * c.t_hc


def expected_times_sk(inst: BoxInstance, k: int, beta: float) -> tuple[float, float]:
    """Expected detection times of s^k(beta) for a hider in H and in H^c."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    c = _consts(inst)
    u_h = c.v_h + (1.0 / c.q - beta) * (1.0 - c.q) ** k * c.t_hc
    u_hc = c.v_hc + (beta + k + (1.0 - c.q) / c.q) * c.t_h
    return u_h, u_hc


def line_rhs(inst: BoxInstance, k: int) -> float:
    """Right-hand side of the k-th consistency/robustness line."""
    c = _consts(inst)
    d = (1.0 - c.q) ** k
    return c.t_y * c.v_y + (1.0 - d) / d * c.t_h * c.v_h + k * c.t_h * c.t_hc


def tradeoff_lower_gap(inst: BoxInstance, k: int, c_val: float, r_val: float) -> float:
    """Slack of (C, R) in the k-th linear lower bound; >= 0 for any strategy."""
    c = _consts(inst)
    return c.t_h / (1.0 - c.q) ** k * c_val + c.t_hc * r_val - line_rhs(inst, k)


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------

def sk_sampler(inst: BoxInstance, k: int, beta: float):
    """Sampler factory for s^k(beta).

    The returned callable takes a numpy Generator and yields boxes forever:
    k (or, with probability beta, k + 1) independent optimal searches of H,
    then alternating optimal searches of H^c and H.
    """
    _check_q(inst.q)
    if k < 0 or not 0.0 <= beta <= 1.0:
        raise ValueError("need k >= 0 and beta in [0, 1]")
    h, hc = inst.h_indices, inst.hc_indices

    def draw(rng: np.random.Generator) -> Iterator[int]:
        rounds = k + 1 if rng.random() < beta else k
        for _ in range(rounds):
            yield from sample_sZ(inst.times, h, rng)
        while True:
            yield from sample_sZ(inst.times, hc, rng)
            yield from sample_sZ(inst.times, h, rng)

    return draw


def expected_times_periodic(prefix: Sequence[int], cycle: Sequence[int],
                            times: Sequence[float], q: float) -> np.ndarray:
    """Exact expected detection time of every box for the pure search that
    opens ``prefix`` once and then repeats ``cycle`` forever."""
    n = len(times)
    if set(range(n)) - set(cycle):
        raise ValueError("cycle must visit every box")
    miss = 1.0 - q
    out = np.zeros(n)
    t_cycle = math.fsum(times[b] for b in cycle)
    for j in range(n):
        total, surv, clock = 0.0, 1.0, 0.0
        for b in prefix:
            clock += times[b]
            if b == j:
                total += surv * q * clock
                surv *= miss
        # visits to j inside one cycle, at offsets d_1 < d_2 < ...
        offs, acc = [], 0.0
        for b in cycle:
            acc += times[b]
            if b == j:
                offs.append(acc)
        m = len(offs)
        per = miss ** m
        # sum over cycles c >= 0 of per^c * sum_i surv*miss^i*q*(clock + c*T + d_i)
        g0 = 1.0 / (1.0 - per)
        g1 = per / (1.0 - per) ** 2
        for i, d in enumerate(offs):
            w = surv * miss ** i * q
            total += w * ((clock + d) * g0 + t_cycle * g1)
        out[j] = total
    return out


# ---------------------------------------------------------------------------
# frontier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrontierSegment:
    k: int
    coeff_c: float
    coeff_r: float
    rhs: float
    c_lo: float
    c_hi: float

    def robustness_at(self, c: float) -> float:
        return (self.rhs - self.coeff_c * c) / self.coeff_r


@dataclass(frozen=True)
class ImperfectFrontier:
    segments: tuple[FrontierSegment, ...]
    k_max: int
    uncovered: tuple[float, float]


def frontier_imperfect(inst: BoxInstance, k_max: int = 10,
                       points_per_segment: int = 9) -> tuple[ImperfectFrontier, ParetoCurve]:
    """Piecewise-linear frontier truncated after segment ``k_max``.

    Consistency values below v_{k_max + 1} (down to V_q(H), where the
    robustness diverges) are not covered and are reported in ``uncovered``.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    if points_per_segment < 2:
        raise ValueError("need at least two points per segment")
    c = _consts(inst)
    segs, points = [], []
    for k in range(k_max + 1):
        d = (1.0 - c.q) ** k
        c_lo = breakpoint(inst, k + 1)
        c_hi = c.v_y if k == 0 else breakpoint(inst, k)
        seg = FrontierSegment(k, c.t_h / d, c.t_hc, line_rhs(inst, k), c_lo, c_hi)
        segs.append(seg)
        for cv in np.linspace(c_lo, c_hi, points_per_segment):
            cv = float(cv)
            beta = 1.0 / c.q - (cv - c.v_h) / (d * c.t_hc)
            beta = min(1.0, max(0.0, beta))
            points.append(ParetoPoint(cv, seg.robustness_at(cv), CycleParams(k, beta)))
    frontier = ImperfectFrontier(tuple(segs), k_max, (c.v_h, breakpoint(inst, k_max + 1)))
    return frontier, ParetoCurve.from_points(points)


# ---------------------------------------------------------------------------
# adversarial hiders and best responses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HiderHk:
    k: int
    probs: DiscreteHiderDistribution
    lambda_k: float


def hider_hk(inst: BoxInstance, k: int) -> HiderHk:
    """Proportional hider with the mass on H inflated by (1 - q)^-k."""
    _check_q(inst.q)
    if k < 0:
        raise ValueError("k must be nonnegative")
    t_h, t_hc, _, _ = subset_totals(inst)
    d = (1.0 - inst.q) ** k
    lam = 1.0 / (t_h / d + t_hc)
    raw = [lam * t / d if j in inst.prediction else lam * t for j, t in enumerate(inst.times)]
    raw[-1] = 1.0 - math.fsum(raw[:-1])
    return HiderHk(k, DiscreteHiderDistribution(tuple(raw)), lam)


def _best_response_value(inst: BoxInstance, k: int, sign: float) -> float:
    c = _consts(inst)
    d = (1.0 - c.q) ** k
    lam = 1.0 / (c.t_h / d + c.t_hc)
    return lam * ((1.0 - d) / d * c.t_h * c.v_h + sign * k * c.t_h * c.t_hc + c.t_y * c.v_y)


def best_response_value_hk(inst: BoxInstance, k: int) -> float:
    """Minimum expected search time against h^k.

    The k t(H) t(H^c) term enters with a plus sign; this is the form that
    agrees with the greedy best response and with the tradeoff lines.
    """
    return _best_response_value(inst, k, +1.0)


@dataclass(frozen=True)
class GreedyResult:
    sequence: tuple[int, ...]
    expected_time: float
    tail_bound: float


def best_response_greedy(times: Sequence[float], q: float, h: DiscreteHiderDistribution | Sequence[float],
                         horizon: int | None = None, tail_tol: float = 1e-9) -> GreedyResult:
    """Optimal search against a known hiding distribution.

    Always opens a box maximising surviving mass / t_j, multiplying that
    box's mass by (1 - q) after the look.  The returned time counts every
    undetected path at the current clock, so it is a lower bound on the
    policy's expected time; the true value exceeds it by at most
    ``tail_bound`` = residual mass * t(Y) / q (the cost of cycling through
    all boxes until detection).
    """
    _check_q(q)
    mass = np.array(h.probs if isinstance(h, DiscreteHiderDistribution) else h, dtype=float)
    t = np.asarray(times, dtype=float)
    if mass.shape != t.shape:
        raise ValueError("distribution and times differ in length")
    if horizon is None and tail_tol <= 0:
        raise ValueError("need a horizon or a positive tail tolerance")
    cycle = t.sum() / q
    seq, found, clock, steps = [], 0.0, 0.0, 0
    while True:
        residual = mass.sum()
        if residual * cycle < tail_tol or (horizon is not None and steps >= horizon):
            break
        j = int(np.argmax(mass / t))
        clock += t[j]
        found += clock * q * mass[j]
        mass[j] *= 1.0 - q
        seq.append(j)
        steps += 1
    residual = mass.sum()
    return GreedyResult(tuple(seq), found + residual * clock, residual * cycle)


def geometric_weighted_sum(q: float, k: int) -> tuple[float, float]:
    """Both sides of sum_{j=1}^{k-1} q (1-q)^j j = (1-(1-q)^k)(1-q)/q - k (1-q)^k."""
    lhs = math.fsum(q * (1.0 - q) ** j * j for j in range(1, k))
    rhs = (1.0 - (1.0 - q) ** k) * (1.0 - q) / q - k * (1.0 - q) ** k
    return lhs, rhs


def conditional_split(inst: BoxInstance, k: int, per_box: Sequence[float]) -> tuple[float, float]:
    """u(s, h^k) computed directly and via the conditional hiders on H and H^c.

    ``per_box`` holds the expected detection time of some strategy s for each
    box.  Returns (direct, decomposed).
    """
    hk = hider_hk(inst, k)
    u = np.asarray(per_box, dtype=float)
    direct = float(np.dot(hk.probs.probs, u))
    t_h, t_hc, _, _ = subset_totals(inst)
    d = (1.0 - inst.q) ** k
    on_h = float(np.dot(hider_proportional(inst.times, inst.prediction).probs, u))
    on_hc = float(np.dot(hider_proportional(inst.times, inst.complement).probs, u))
    return direct, hk.lambda_k * t_h / d * on_h + hk.lambda_k * t_hc * on_hc

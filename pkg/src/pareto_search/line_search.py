"""Linear search on the real line with a directional prediction.

The searcher starts at the origin and alternately explores the two
half-lines to growing distances; the payoff against a hider at y is the
total distance travelled until y is reached, divided by |y|.  The
prediction says the hider lies on the positive half-line.

Strategies on the upper side of the tradeoff are biased geometric
searches; the lower side is certified by pairs of log-uniform hider
densities (with an atom at the far end) integrated against arbitrary
finite turn sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .core import GeometricParams, ParetoCurve, ParetoPoint
from .montecarlo import SimEstimate, batch_streams
from .quadrature import adaptive_simpson

RIGHT, LEFT = 1, -1


# ---------------------------------------------------------------------------
# strategies and hiders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BiasedGeometricStrategy:
    """Turn distances alpha^(i+u) on the predicted side (even i) and
    mu * alpha^(i+u) on the other side (odd i), with u ~ U[0, 2]."""

    alpha_base: float
    mu: float = 1.0
    predicted_side: int = RIGHT

    def __post_init__(self):
        if not self.alpha_base > 1.0:
            raise ValueError("alpha must exceed 1")
        if not 0.0 < self.mu <= 1.0:
            raise ValueError("mu must lie in (0, 1]")
        if self.predicted_side not in (RIGHT, LEFT):
            raise ValueError("predicted_side must be +1 or -1")


@dataclass(frozen=True)
class PureLineStrategy:
    """Finite list of (distance, side) turns with alternating sides."""

    turns: tuple[tuple[float, int], ...]

    def __post_init__(self):
        turns = tuple((float(d), int(s)) for d, s in self.turns)
        object.__setattr__(self, "turns", turns)
        if not turns:
            raise ValueError("need at least one turn")
        last = {}
        for i, (d, s) in enumerate(turns):
            if s not in (RIGHT, LEFT):
                raise ValueError("side must be +1 or -1")
            if not d > 0:
                raise ValueError("turn distances must be positive")
            if i and s == turns[i - 1][1]:
                raise ValueError("turn sides must alternate")
            if s in last and not d > last[s]:
                raise ValueError("distances on one side must strictly increase")
            last[s] = d

    @classmethod
    def alternating(cls, distances: Sequence[float], start: int = RIGHT) -> "PureLineStrategy":
        return cls(tuple((d, start if i % 2 == 0 else -start) for i, d in enumerate(distances)))

    @property
    def start(self) -> int:
        return self.turns[0][1]

    @property
    def distances(self) -> list[float]:
        return [d for d, _ in self.turns]

    def reach(self, side: int) -> float:
        return max((d for d, s in self.turns if s == side), default=0.0)


@dataclass(frozen=True)
class LineHiderDensity:
    """Density eps/|x| on [|a|, |a| R] plus an atom eps at |a| R, on the
    side of sign(a), where R = exp((1 - eps)/eps)."""

    anchor: float
    epsilon: float

    def __post_init__(self):
        if self.anchor == 0:
            raise ValueError("anchor must be nonzero")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if abs(self.epsilon * self.log_r + self.epsilon - 1.0) > 1e-12:
            raise ArithmeticError("hider density does not have unit mass")

    @property
    def log_r(self) -> float:
        return (1.0 - self.epsilon) / self.epsilon

    @property
    def r(self) -> float:
        return math.exp(self.log_r)

    @property
    def side(self) -> int:
        return RIGHT if self.anchor > 0 else LEFT

    @property
    def lo(self) -> float:
        return abs(self.anchor)

    @property
    def hi(self) -> float:
        return abs(self.anchor) * self.r

    def tail_integral(self, y: float, tol: float = 1e-12) -> float:
        """Integral of 1/x dh over [y, hi] (atom included), by quadrature."""
        if not self.lo <= y <= self.hi:
            raise ValueError("y outside the support")
        eps = self.epsilon
        body = adaptive_simpson(lambda s: eps * math.exp(-s), math.log(y), math.log(self.hi), tol)
        return body + eps / self.hi


# ---------------------------------------------------------------------------
# payoffs
# ---------------------------------------------------------------------------

def _covering(strategy: PureLineStrategy, y: float) -> tuple[int, float]:
    """Index of the turn that first reaches y and the distance walked before it."""
    side = RIGHT if y > 0 else LEFT
    before = 0.0
    for i, (d, s) in enumerate(strategy.turns):
        if s == side and d >= abs(y):
            return i, before
        before += d
    raise ValueError(f"strategy never reaches y={y}")


def normalized_cost(strategy: PureLineStrategy, y: float) -> float:
    """(|y| + 2 * distance of all earlier turns) / |y|."""
    if y == 0:
        raise ValueError("hider must not sit at the origin")
    _, before = _covering(strategy, y)
    return (abs(y) + 2.0 * before) / abs(y)


def payoff_vs_density(strategy: PureLineStrategy, hider: LineHiderDensity,
                      quad_tol: float = 1e-8) -> float:
    """Expected normalized cost of ``strategy`` against ``hider``.

    The cost is 1 + 2K/x between consecutive thresholds of the hider's
    side (K the distance walked before the covering turn), so each piece
    is integrated separately in log-coordinates.
    """
    side, lo, hi, eps = hider.side, hider.lo, hider.hi, hider.epsilon
    reach = hi * (1.0 - 1e-12)
    pieces = []
    prev, before = 0.0, 0.0
    for d, s in strategy.turns:
        if s == side:
            a, b = max(prev, lo), min(d, hi)
            if b > a:
                pieces.append((a, b, before))
            prev = d
            if d >= reach:
                break
        before += d
    else:
        raise ValueError("strategy does not cover the hider's support")
    per_tol = quad_tol / (2 * len(pieces) + 1)
    total = 0.0
    for a, b, k in pieces:
        total += adaptive_simpson(lambda s, k=k: eps * (1.0 + 2.0 * k * math.exp(-s)),
                                  math.log(a), math.log(b), per_tol)
    # the atom at the far end is found by the turn of the last piece
    return total + eps * (1.0 + 2.0 * pieces[-1][2] / hi)


# ---------------------------------------------------------------------------
# closed forms for the biased geometric family
# ---------------------------------------------------------------------------

def upper_bounds(alpha_base: float, mu: float) -> tuple[float, float]:
    """Consistency and robustness guarantees of the biased geometric strategy."""
    if not alpha_base > 1.0:
        raise ValueError("alpha must exceed 1")
    if not 0.0 < mu <= 1.0:
        raise ValueError("mu must lie in (0, 1]")
    la = math.log(alpha_base)
    return 1.0 + (1.0 + mu * alpha_base) / la, 1.0 + (1.0 + alpha_base / mu) / la


def scalarized_bound(lam: float, alpha_base: float) -> float:
    """Weighted payoff bound 1 + lam + (1 + lam + 2 sqrt(lam) alpha) / ln alpha."""
    return 1.0 + lam + (1.0 + lam + 2.0 * math.sqrt(lam) * alpha_base) / math.log(alpha_base)


def optimal_alpha(lam: float) -> float:
    """Minimizer of :func:`scalarized_bound` over alpha > 1.

    The derivative vanishes where 2 sqrt(lam) alpha ln alpha = 1 + lam +
    2 sqrt(lam) alpha; the left side minus the right is strictly increasing
    in alpha, so the root is unique and bracketed.
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    rl = math.sqrt(lam)

    def stationarity(a: float) -> float:
        return 2.0 * rl * a * math.log(a) - (1.0 + lam + 2.0 * rl * a)

    hi = 2.0
    while stationarity(hi) <= 0:
        hi *= 2.0
    return brentq(stationarity, 1.0 + 1e-12, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def rho_star() -> tuple[float, float]:
    """Base and value of the optimal randomized competitive ratio (no prediction)."""
    a = brentq(lambda x: math.log(x) - 1.0 - 1.0 / x, 1.5, 10.0, xtol=1e-14, rtol=1e-15)
    return a, 1.0 + (1.0 + a) / math.log(a)


def frontier_line(lambda_grid: Sequence[float]) -> ParetoCurve:
    points = []
    for lam in lambda_grid:
        if not 0.0 < lam < 1.0:
            raise ValueError("lambda grid values must lie strictly inside (0, 1)")
        mu = math.sqrt(lam)
        a = optimal_alpha(lam)
        c, r = upper_bounds(a, mu)
        points.append(ParetoPoint(c, r, GeometricParams(a, mu)))
    return ParetoCurve.from_points(points)


def lower_bound_value(lam: float, epsilon: float) -> float:
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    return (1.0 - epsilon) * scalarized_bound(lam, optimal_alpha(lam))


# ---------------------------------------------------------------------------
# simulation of the biased geometric strategy
# ---------------------------------------------------------------------------

def _window(strategy: BiasedGeometricStrategy, y: float) -> np.ndarray:
    """Turn indices long enough to reach |y| for any offset, starting far
    enough below that the truncated prefix is below double precision."""
    la = math.log(strategy.alpha_base)
    level = math.log(abs(y)) / la
    lo = math.floor(level - 37.0 * math.log(10.0) / la) - 2
    hi = math.ceil(level - math.log(strategy.mu) / la) + 4
    return np.arange(lo, hi + 1)


def biased_turns(strategy: BiasedGeometricStrategy, u: float, y: float) -> PureLineStrategy:
    """The pure strategy for offset ``u``, over the window used for ``y``."""
    idx = _window(strategy, y)
    dist = strategy.alpha_base ** (idx + u) * np.where(idx % 2 == 0, 1.0, strategy.mu)
    side = np.where(idx % 2 == 0, strategy.predicted_side, -strategy.predicted_side)
    return PureLineStrategy(tuple(zip(dist.tolist(), side.tolist())))


def expected_ratio_biased(strategy: BiasedGeometricStrategy, y: float, trials: int,
                          seed: int) -> SimEstimate:
    """Monte-Carlo estimate of the expected normalized cost at ``y``."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if y == 0:
        raise ValueError("hider must not sit at the origin")
    idx = _window(strategy, y)
    even = idx % 2 == 0
    scale = np.where(even, 1.0, strategy.mu)
    on_side = even if (y > 0) == (strategy.predicted_side > 0) else ~even
    ay = abs(y)
    samples = []
    for size, rng, _ in batch_streams(seed, trials):
        u = rng.uniform(0.0, 2.0, size)
        dist = strategy.alpha_base ** (idx[None, :] + u[:, None]) * scale
        covers = on_side & (dist >= ay)
        first = covers.argmax(axis=1)
        before = np.cumsum(dist, axis=1) - dist
        samples.append((ay + 2.0 * before[np.arange(size), first]) / ay)
    return SimEstimate.from_samples(np.concatenate(samples), seed)


# ---------------------------------------------------------------------------
# lower bound: hiders, case shapes and the adversarial gauntlet
# ---------------------------------------------------------------------------

def hider_pair(lam: float, epsilon: float) -> tuple[LineHiderDensity, LineHiderDensity]:
    """Hider on the predicted side anchored at 1/sqrt(lam) and on the other
    side anchored at sqrt(lam)."""
    rl = math.sqrt(lam)
    return LineHiderDensity(1.0 / rl, epsilon), LineHiderDensity(-rl, epsilon)


def combined_payoff(strategy: PureLineStrategy, lam: float, epsilon: float,
                    quad_tol: float = 1e-8) -> float:
    h1, h2 = hider_pair(lam, epsilon)
    return payoff_vs_density(strategy, h1, quad_tol / 2) + lam * payoff_vs_density(strategy, h2, quad_tol / 2)


def case_of(strategy: PureLineStrategy) -> int:
    """Case 1..4: (n even, start right), (n even, start left), (n odd, right), (n odd, left)."""
    n = len(strategy.turns) - 1
    right = strategy.start == RIGHT
    if n % 2 == 0:
        return 1 if right else 2
    return 3 if right else 4


def _pre_turns(case: int, lam: float) -> tuple[float, float]:
    """(x_{-1}, x_{-2}) for the case."""
    rl = math.sqrt(lam)
    return (rl, 1.0 / rl) if case in (1, 3) else (1.0 / rl, rl)


def case_closed_form(strategy: PureLineStrategy, lam: float, epsilon: float) -> tuple[float, float]:
    """Exact payoffs against the predicted-side and other-side hiders for a
    strategy of one of the four boundary shapes."""
    case = case_of(strategy)
    n = len(strategy.turns) - 1
    x_m1, _ = _pre_turns(case, lam)
    x = strategy.distances
    ratio = [x[0] / x_m1] + [x[i] / x[i - 1] for i in range(1, n + 1)]
    odd = lambda top: math.fsum(ratio[i] for i in range(1, top + 1, 2))
    even = lambda top: math.fsum(ratio[i] for i in range(0, top + 1, 2))
    e = epsilon
    if case == 1:
        u1 = 1 + e * n + 2 * e * odd(n - 1)
        u2 = 1 + e * (n - 2) + 2 * e * even(n - 2)
    elif case == 2:
        u2 = 1 + e * n + 2 * e * odd(n - 1)
        u1 = 1 + e * (n - 2) + 2 * e * even(n - 2)
    elif case == 3:
        u1 = 1 + e * (n - 1) + 2 * e * odd(n - 2)
        u2 = 1 + e * (n - 1) + 2 * e * even(n - 1)
    else:
        u2 = 1 + e * (n - 1) + 2 * e * odd(n - 2)
        u1 = 1 + e * (n - 1) + 2 * e * even(n - 1)
    return u1, u2


def case_floor(case: int, n: int, lam: float, epsilon: float) -> float:
    """Smallest combined payoff of any case-``case`` strategy with n + 1 turns
    (the arithmetic-geometric mean bound on the ratio sums, with the
    telescoped product)."""
    e = epsilon
    log_r = (1.0 - e) / e
    rn = math.exp(log_r / n)
    rl = math.sqrt(lam)
    if case == 1:
        return (1 + lam) * (1 + e * n) - 2 * e * lam + 2 * e * n * rl * rn
    if case == 2:
        return (1 + lam) * (1 + e * n) - 2 * e + 2 * e * n * rl * rn
    if case == 3:
        return (1 + lam) * (1 + e * n - e) + 2 * e * n * rl * lam ** (-1.0 / (2 * n)) * rn
    if case == 4:
        return (1 + lam) * (1 + e * n - e) + 2 * e * n * rl * lam ** (1.0 / (2 * n)) * rn
    raise ValueError("case must be 1..4")


def _valid_n(case: int, n: int) -> bool:
    return n >= (2 if case in (1, 2) else 1) and (n % 2 == 0) == (case in (1, 2))


def boundary(case: int, lam: float, log_r: float) -> dict[int, float]:
    """Anchor (first admissible distance) and far boundary per side, in logs."""
    rl = math.log(math.sqrt(lam))
    return {RIGHT: (-rl, log_r - rl), LEFT: (rl, log_r + rl)}


def case_strategy(case: int, log_x: Sequence[float], lam: float) -> PureLineStrategy:
    """Strategy of the given shape from log-distances of its turns."""
    start = RIGHT if case in (1, 3) else LEFT
    return PureLineStrategy.alternating([math.exp(v) for v in log_x], start)


def random_case_strategy(case: int, lam: float, epsilon: float, rng: np.random.Generator,
                         n_max: int = 40) -> PureLineStrategy:
    """Random admissible strategy of one case shape.

    Each side gets sorted log-uniform distances between its hider anchor and
    its far boundary, the last turn on each side sitting on the boundary.
    """
    log_r = (1.0 - epsilon) / epsilon
    choices = [n for n in range(1, n_max + 1) if _valid_n(case, n)]
    n = int(rng.choice(choices))
    start = RIGHT if case in (1, 3) else LEFT
    sides = [start if i % 2 == 0 else -start for i in range(n + 1)]
    bounds = boundary(case, lam, log_r)
    logs = [0.0] * (n + 1)
    for side in (RIGHT, LEFT):
        pos = [i for i, s in enumerate(sides) if s == side]
        lo, hi = bounds[side]
        vals = np.sort(rng.uniform(lo, hi, len(pos) - 1))
        for i, v in zip(pos, list(vals) + [hi]):
            logs[i] = float(v)
    return case_strategy(case, logs, lam)


def equalizing_strategy(case: int, n: int, lam: float, epsilon: float) -> PureLineStrategy | None:
    """Case strategy with n + 1 turns whose weighted ratios are all equal,
    attaining :func:`case_floor`; None if that violates admissibility."""
    if not _valid_n(case, n):
        raise ValueError(f"n={n} impossible for case {case}")
    log_r = (1.0 - epsilon) / epsilon
    x_m1, _ = _pre_turns(case, lam)
    # weight of ratio i is 1 on the predicted hider's sum, lam on the other one;
    # ratio i is counted for the predicted hider iff turn i-1 is on the right
    start = RIGHT if case in (1, 3) else LEFT
    sides = [start if i % 2 == 0 else -start for i in range(n + 1)]
    prev_side = [-start] + sides[:-1]
    w = [1.0 if s == RIGHT else lam for s in prev_side[:n]]
    # product of ratios 0..n-1 telescopes to x_{n-1} / x_{-1}
    bounds = boundary(case, lam, log_r)
    log_last = bounds[sides[n - 1]][1]
    log_prod = log_last - math.log(x_m1)
    log_g = (sum(math.log(v) for v in w) + log_prod) / n
    logs, cur = [], math.log(x_m1)
    for i in range(n):
        cur += log_g - math.log(w[i])
        logs.append(cur)
    logs.append(bounds[sides[n]][1])
    logs[n - 1] = log_last
    try:
        s = case_strategy(case, logs, lam)
    except ValueError:
        return None
    for (d, side) in s.turns[:2]:
        if math.log(d) < bounds[side][0] - 1e-12:
            return None
    return s


def geometric_case_strategy(lam: float, epsilon: float, alpha_base: float, u: float) -> PureLineStrategy:
    """Biased geometric turns with base ``alpha_base`` and bias sqrt(lam),
    offset ``u``, closed with the boundary turns of case 1."""
    log_r = (1.0 - epsilon) / epsilon
    bounds = boundary(1, lam, log_r)
    la = math.log(alpha_base)
    logs, i = [], 0
    while True:
        side = RIGHT if i % 2 == 0 else LEFT
        # right turns alpha^(i+u) / sqrt(lam), left turns alpha^(i+u)
        v = (i + u) * la + (bounds[RIGHT][0] if side == RIGHT else 0.0)
        if v >= bounds[side][1]:
            break
        logs.append(v)
        i += 1
    if len(logs) % 2 == 1:
        logs += [bounds[LEFT][1], bounds[RIGHT][1]]
    else:
        logs[-1] = bounds[LEFT][1]
        logs.append(bounds[RIGHT][1])
    return case_strategy(1, logs, lam)


@dataclass(frozen=True)
class SlackParams:
    eta: float
    delta: float
    n_big: int
    log_r: float
    epsilon: float


def slack_parameters(lam: float, eta: float) -> SlackParams:
    """Derive (delta, N, R, epsilon) from a target slack ``eta``.

    delta = eta/2; N is the least integer with lam^(1/(2N)) >= 1 - delta;
    R >= max(e, exp((1-delta)/delta)) is the least value with
    (1 + lam + 2 lam R^(1/N)) / ln R^(1/N) >= the optimal scalarized term;
    epsilon = 1/(ln R + 1).
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    delta = eta / 2.0
    n_big = max(1, math.ceil(math.log(lam) / (2.0 * math.log(1.0 - delta)) - 1e-12))
    a_bar = optimal_alpha(lam)
    target = (1.0 + lam + 2.0 * math.sqrt(lam) * a_bar) / math.log(a_bar)

    def g(log_a: float) -> float:
        return (1.0 + lam + 2.0 * lam * math.exp(log_a)) / log_a - target

    # g is convex in log a with a single minimum; take the root on the rising branch
    def dg(log_a: float) -> float:
        a = math.exp(log_a)
        return 2.0 * lam * a * log_a - (1.0 + lam + 2.0 * lam * a)

    hi = 1.0
    while dg(hi) <= 0:
        hi *= 2.0
    log_a_min = brentq(dg, 1e-9, hi)
    top = max(log_a_min, 1.0)
    while g(top) < 0:
        top *= 2.0
    log_a = log_a_min if g(log_a_min) >= 0 else brentq(g, log_a_min, top, xtol=1e-14)
    log_r = max(1.0, (1.0 - delta) / delta, n_big * log_a)
    return SlackParams(eta, delta, n_big, log_r, 1.0 / (log_r + 1.0))


@dataclass(frozen=True)
class GauntletReport:
    lam: float
    epsilon: float
    eta: float
    bound: float
    minimum: float
    per_case: dict
    floor_per_case: dict
    evaluated: int


def adversary_gauntlet(lam: float, epsilon: float | None = None, eta: float | None = None,
                       case_shapes: Sequence[int] = (1, 2, 3, 4), random_trials: int = 1000,
                       seed: int = 0, quad_tol: float = 1e-8, n_max: int = 40) -> GauntletReport:
    """Combined payoff of many strategies against the hider pair.

    Give ``epsilon`` directly (slack defaults to eta = 2 epsilon, the slack
    the four-case argument needs) or give ``eta`` and derive epsilon from
    it.  Besides ``random_trials`` random strategies per case, the
    equalizing strategy of every admissible length is evaluated, so the
    reported minimum approaches the true best response.
    """
    if epsilon is None and eta is None:
        raise ValueError("give epsilon or eta")
    if epsilon is None:
        epsilon = slack_parameters(lam, eta).epsilon
    elif eta is None:
        eta = 2.0 * epsilon
    bound = lower_bound_value(lam, eta)
    rng = np.random.default_rng(seed)
    per_case, floors, count = {}, {}, 0
    for case in case_shapes:
        best = math.inf
        for _ in range(random_trials):
            s = random_case_strategy(case, lam, epsilon, rng, n_max)
            best = min(best, combined_payoff(s, lam, epsilon, quad_tol))
            count += 1
        floor = math.inf
        for n in range(1, n_max + 1):
            if not _valid_n(case, n):
                continue
            floor = min(floor, case_floor(case, n, lam, epsilon))
            s = equalizing_strategy(case, n, lam, epsilon)
            if s is not None:
                best = min(best, combined_payoff(s, lam, epsilon, quad_tol))
                count += 1
        per_case[case] = best
        floors[case] = floor
    return GauntletReport(lam, epsilon, eta, bound, min(per_case.values()), per_case, floors, count)

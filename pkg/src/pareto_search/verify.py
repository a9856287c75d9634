"""Numerical self-checks for every module, grouped by scope.

Each check measures a residual and compares it with a tolerance; the CLI
``verify`` command runs them and exits nonzero on any failure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import box_imperfect as bi
from . import box_perfect as bp
from . import line_search as ls
from .core import BoxInstance, ParetoCurve, make_instance, subset_totals
from .matrix_game import MatrixGame, auxiliary_game, consistency_robustness, solve, trace_frontier
from .montecarlo import estimate_CR_box

SCOPES = ("core", "matrix-game", "box-perfect", "box-imperfect", "line", "montecarlo")


@dataclass(frozen=True)
class CheckResult:
    scope: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {"scope": self.scope, "name": self.name, "residual": self.residual,
                "tolerance": self.tolerance, "passed": self.passed}


def random_instance(rng: np.random.Generator, n_range=(2, 5), q: float = 1.0,
                    t_range=(0.5, 3.0)) -> BoxInstance:
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    times = rng.uniform(*t_range, n)
    k = int(rng.integers(1, n))
    pred = rng.choice(n, size=k, replace=False)
    return make_instance(times.tolist(), q, pred.tolist())


def _curve_ok(curve: ParetoCurve) -> float:
    cs, rs = np.array(curve.consistencies), np.array(curve.robustnesses)
    bad = np.sum(np.diff(cs) <= 0) + np.sum(np.diff(rs) >= 0) + np.sum(cs > rs + 1e-9)
    return float(bad)


# ---------------------------------------------------------------------------

def check_core(rng, **_):
    inst = random_instance(rng)
    curve, _ = bp.frontier_perfect(inst, 9)
    yield "perfect frontier is a Pareto curve", _curve_ok(curve), 0.0
    inst = random_instance(rng, q=0.5)
    _, curve = bi.frontier_imperfect(inst, 6, 5)
    yield "imperfect frontier is a Pareto curve", _curve_ok(curve), 0.0
    yield "line frontier is a Pareto curve", _curve_ok(ls.frontier_line(np.linspace(0.05, 0.95, 19))), 0.0


def check_matrix_game(rng, tol=1e-9, **_):
    gap = 0.0
    scal = 0.0
    for _ in range(20):
        a = rng.normal(size=(int(rng.integers(1, 7)), int(rng.integers(2, 7))))
        gap = max(gap, solve(MatrixGame(a), tol).duality_gap)
    yield "solver duality gap", gap, tol
    for _ in range(5):
        inst = random_instance(rng, (2, 4))
        pg = bp.permutation_game(inst)
        for lam in (0.3, 1.0, 3.0):
            sol = solve(auxiliary_game(pg, 1.0, lam), tol)
            c, r = consistency_robustness(pg, sol.row_mix)
            scal = max(scal, abs(c + lam * r - sol.value))
    yield "scalarized objective equals auxiliary value", scal, 2 * tol
    dev = 0.0
    for _ in range(5):
        inst = random_instance(rng, (2, 4))
        seg = bp.frontier_segment(inst)
        curve = trace_frontier(bp.permutation_game(inst), np.geomspace(1e-3, 1e3, 13))
        dev = max(dev, max(seg.distance(p.consistency, p.robustness) for p in curve))
        dev = max(dev, abs(curve[0].consistency - seg.c_min), abs(curve[-1].consistency - seg.c_max))
    yield "LP frontier matches closed-form segment", dev, 1e-6


def check_box_perfect(rng, **_):
    ident = 0.0
    for _ in range(100):
        inst = random_instance(rng, (2, 8))
        t_h, t_hc, t_y, _ = subset_totals(inst)
        v = bp.value_perfect
        ident = max(ident, abs(t_y * v(inst.times) - t_h * v(inst.times_of(inst.prediction))
                               - t_hc * v(inst.times_of(inst.complement)) - t_h * t_hc))
    yield "value split identity", ident, 1e-9
    indiff = 0.0
    for n in range(2, 7):
        times = rng.uniform(0.5, 3.0, n).tolist()
        h = bp.hider_proportional(times).probs
        v = bp.value_perfect(times)
        for perm in itertools.permutations(range(n)):
            u = sum(h[j] * bp.search_cost(perm, j, times) for j in range(n))
            indiff = max(indiff, abs(u - v))
    yield "proportional hider makes every order cost V", indiff, 1e-9
    eq, mono = 0.0, 0.0
    for _ in range(20):
        inst = random_instance(rng)
        a = bp.alpha_star(inst)
        u_h, u_hc = bp.expected_times_sstar(inst, a)
        eq = max(eq, abs(u_h - u_hc), abs(u_h - bp.value_perfect(inst.times)))
        vals = np.array([bp.expected_times_sstar(inst, x) for x in np.linspace(0, 1, 11)])
        mono += float(np.sum(np.diff(vals[:, 0]) >= 0) + np.sum(np.diff(vals[:, 1]) <= 0))
    yield "alpha* equalizes at V(Y)", eq, 1e-9
    yield "s*(alpha) monotone in alpha", mono, 0.0


def check_box_imperfect(rng, inject_sign_flip=False, **_):
    ident = 0.0
    for _ in range(100):
        q = float(rng.uniform(0.05, 0.95))
        inst = random_instance(rng, (2, 8), q)
        t_h, t_hc, t_y, _ = subset_totals(inst)
        v = lambda ts: bi.value_imperfect(ts, q)
        ident = max(ident, abs(t_y * v(inst.times) - t_h * v(inst.times_of(inst.prediction))
                               - t_hc * v(inst.times_of(inst.complement)) - (2 - q) / q * t_h * t_hc))
    yield "imperfect value split identity", ident, 1e-9
    geo = 0.0
    for q in np.linspace(0.05, 0.95, 19):
        for k in range(0, 21):
            lhs, rhs = bi.geometric_weighted_sum(float(q), k)
            geo = max(geo, abs(lhs - rhs))
    yield "weighted geometric sum identity", geo, 1e-12
    dec = 0.0
    for _ in range(50):
        inst = random_instance(rng, (2, 5), float(rng.uniform(0.2, 0.9)))
        prefix = rng.integers(0, inst.n, int(rng.integers(0, 6))).tolist()
        cycle = rng.permutation(inst.n).tolist() + rng.integers(0, inst.n, 2).tolist()
        per_box = bi.expected_times_periodic(prefix, cycle, inst.times, inst.q)
        for k in range(4):
            direct, split = bi.conditional_split(inst, k, per_box)
            dec = max(dec, abs(direct - split))
    yield "h^k conditional decomposition", dec, 1e-9
    worst = 0.0
    value = bi._best_response_value if inject_sign_flip else None
    for _ in range(5):
        inst = random_instance(rng, (2, 4), float(rng.choice([0.3, 0.5, 0.8])))
        for k in range(4):
            g = bi.best_response_greedy(inst.times, inst.q, bi.hider_hk(inst, k).probs)
            target = value(inst, k, -1.0) if value else bi.best_response_value_hk(inst, k)
            worst = max(worst, abs(g.expected_time - target) - g.tail_bound)
    yield "greedy best response matches h^k value", max(worst, 0.0), 1e-6
    ex2 = make_instance((1, 1), 0.5, (0,))
    g = bi.best_response_greedy(ex2.times, ex2.q, bi.hider_hk(ex2, 1).probs)
    target = value(ex2, 1, -1.0) if value else bi.best_response_value_hk(ex2, 1)
    yield "greedy best response on the two-box example, k = 1", \
        max(abs(g.expected_time - target) - g.tail_bound, 0.0), 1e-6
    cont, mono, join = 0.0, 0.0, 0.0
    for _ in range(10):
        inst = random_instance(rng, (2, 5), float(rng.uniform(0.1, 0.9)))
        fr, _ = bi.frontier_imperfect(inst, 8, 3)
        for a, b in zip(fr.segments, fr.segments[1:]):
            ra, rb = a.robustness_at(a.c_lo), b.robustness_at(b.c_hi)
            cont = max(cont, abs(a.c_lo - b.c_hi), abs(ra - rb) / max(1.0, abs(ra)))
        for k in range(5):
            vals = np.array([bi.expected_times_sk(inst, k, b) for b in np.linspace(0, 1, 9)])
            mono += float(np.sum(np.diff(vals[:, 0]) >= 0) + np.sum(np.diff(vals[:, 1]) <= 0))
            join = max(join, *np.abs(np.subtract(bi.expected_times_sk(inst, k, 1.0),
                                                 bi.expected_times_sk(inst, k + 1, 0.0))))
    yield "frontier segments join continuously (relative)", cont, 1e-8
    yield "s^k(beta) monotone in beta", mono, 0.0
    yield "s^k(1) equals s^(k+1)(0)", join, 1e-9


def check_line(rng, **_):
    a, r = ls.rho_star()
    yield "alpha* near 3.59", abs(a - 3.59), 0.01
    yield "rho* near 4.59", abs(r - 4.59), 0.01
    p = ls.frontier_line([1 - 1e-9])[0]
    yield "frontier collapses to (rho*, rho*) as lambda -> 1", max(abs(p.consistency - r), abs(p.robustness - r)), 1e-3
    mono = 0.0
    for alpha in (1.5, 2.0, 4.0, 9.0):
        vals = np.array([ls.upper_bounds(alpha, m) for m in np.linspace(0.05, 1, 20)])
        mono += float(np.sum(np.diff(vals[:, 0]) <= 0) + np.sum(np.diff(vals[:, 1]) >= 0))
    yield "upper bounds monotone in mu", mono, 0.0
    stat = 0.0
    for lam in np.linspace(0.05, 1.0, 20):
        ab = ls.optimal_alpha(float(lam))
        rl = math.sqrt(lam)
        stat = max(stat, abs(2 * rl * math.log(ab) * ab - (1 + lam + 2 * rl * ab)))
    yield "optimal alpha is stationary", stat, 1e-6
    mass = 0.0
    for eps in (0.02, 0.05, 0.1, 0.3):
        h = ls.LineHiderDensity(1.0, eps)
        mass = max(mass, abs(eps * h.log_r + eps - 1.0))
        for y in (h.lo, 2 * h.lo, h.hi / 2):
            mass = max(mass, abs(h.tail_integral(y) - eps / y))
    yield "hider density mass and tail integral", mass, 1e-8
    scale = 0.0
    for _ in range(20):
        d = np.cumprod(rng.uniform(1.2, 3.0, 12))
        s = ls.PureLineStrategy.alternating(d.tolist(), int(rng.choice([1, -1])))
        c = float(rng.uniform(0.1, 10))
        s2 = ls.PureLineStrategy.alternating((d * c).tolist(), s.start)
        for y in rng.uniform(0.5, d[-3], 5) * rng.choice([1, -1], 5):
            scale = max(scale, abs(ls.normalized_cost(s, y) - ls.normalized_cost(s2, y * c)))
    yield "normalized cost is scale invariant", scale, 1e-12
    quad = 0.0
    for case in (1, 2, 3, 4):
        for _ in range(5):
            lam, eps = float(rng.uniform(0.1, 0.9)), 0.1
            s = ls.random_case_strategy(case, lam, eps, rng, 12)
            h1, h2 = ls.hider_pair(lam, eps)
            u1, u2 = ls.case_closed_form(s, lam, eps)
            quad = max(quad, abs(ls.payoff_vs_density(s, h1) - u1), abs(ls.payoff_vs_density(s, h2) - u2))
    yield "quadrature matches case closed forms", quad, 1e-6


def check_montecarlo(rng, trials=20000, **_):
    seed = int(rng.integers(2**31))
    ex1 = make_instance((1, 1), 1.0, (0,))
    a = estimate_CR_box(bp.sstar_sampler(ex1, 0.3), ex1, 2000, seed)
    b = estimate_CR_box(bp.sstar_sampler(ex1, 0.3), ex1, 2000, seed)
    yield "reproducible estimates", float(a != b), 0.0
    worst = 0.0
    for alpha in (0.5, 0.8):
        e = estimate_CR_box(bp.sstar_sampler(ex1, alpha), ex1, trials, seed)
        u_h, u_hc = bp.expected_times_sstar(ex1, alpha)
        for est, tgt in ((e.per_box[0], u_h), (e.per_box[1], u_hc)):
            worst = max(worst, abs(est.mean - tgt) / max(est.stderr, 1e-12))
    ex2 = make_instance((1, 1), 0.5, (0,))
    for k, beta in ((0, 0.75), (1, 0.5)):
        e = estimate_CR_box(bi.sk_sampler(ex2, k, beta), ex2, trials, seed)
        u_h, u_hc = bi.expected_times_sk(ex2, k, beta)
        for est, tgt in ((e.per_box[0], u_h), (e.per_box[1], u_hc)):
            worst = max(worst, abs(est.mean - tgt) / max(est.stderr, 1e-12))
    yield "simulated box times within standard errors (z-score)", worst, 4.0


CHECKS: dict[str, Callable] = {
    "core": check_core,
    "matrix-game": check_matrix_game,
    "box-perfect": check_box_perfect,
    "box-imperfect": check_box_imperfect,
    "line": check_line,
    "montecarlo": check_montecarlo,
}


def run_checks(scopes=SCOPES, seed: int = 0, inject_sign_flip: bool = False) -> list[CheckResult]:
    results = []
    for scope in scopes:
        if scope not in CHECKS:
            raise ValueError(f"unknown scope {scope!r}")
        rng = np.random.default_rng([seed, SCOPES.index(scope)])
        for name, residual, tol in CHECKS[scope](rng, inject_sign_flip=inject_sign_flip):
            results.append(CheckResult(scope, name, float(residual), float(tol)))
    return results

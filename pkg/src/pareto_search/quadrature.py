"""Adaptive Simpson quadrature for smooth integrands."""

from __future__ import annotations

import math
from typing import Callable

_EPS = 2.220446049250313e-16


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                     max_depth: int = 48) -> float:
    """Integrate ``f`` over [a, b] to absolute accuracy ``tol``.

    Uses the usual Richardson-corrected refinement, iteratively with an
    explicit stack.  The tolerance is floored at a few ulps of the running
    panel value so wide-range integrands terminate.
    """
    if b == a:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s, eps, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = (m0 - a0) * (fa0 + 4.0 * flm + fm0) / 6.0
        right = (b0 - m0) * (fm0 + 4.0 * frm + fb0) / 6.0
        delta = left + right - s
        floor = 64.0 * _EPS * (abs(left) + abs(right))
        if depth >= max_depth or abs(delta) <= max(15.0 * eps, floor):
            total += left + right + delta / 15.0
        else:
            half = 0.5 * eps
            stack.append((a0, m0, fa0, flm, fm0, left, half, depth + 1))
            stack.append((m0, b0, fm0, frm, fb0, right, half, depth + 1))
    return total


def log_simpson(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Integrate g(x) dx over [lo, hi] (0 < lo) in the variable s = ln x."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    return adaptive_simpson(lambda s: g(math.exp(s)) * math.exp(s), math.log(lo), math.log(hi), tol)

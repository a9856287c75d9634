import math

import pytest
from hypothesis import given, strategies as st

from pareto_search.quadrature import adaptive_simpson, log_simpson


def test_polynomials_exact():
    assert adaptive_simpson(lambda x: x ** 3 - 2 * x, 0, 2) == pytest.approx(0.0, abs=1e-13)
    assert adaptive_simpson(lambda x: 1.0, 3, 3) == 0.0


def test_reversed_limits():
    assert adaptive_simpson(math.exp, 1, 0) == pytest.approx(-(math.e - 1), abs=1e-10)


@given(st.floats(0.1, 5), st.floats(0.1, 5))
def test_sine(a, w):
    got = adaptive_simpson(lambda x: math.sin(w * x), 0, a, 1e-11)
    assert got == pytest.approx((1 - math.cos(w * a)) / w, abs=1e-9)


def test_log_simpson_wide_range():
    # int_1^R dx / x^2 = 1 - 1/R over twenty decades
    assert log_simpson(lambda x: x ** -2, 1.0, 1e20) == pytest.approx(1 - 1e-20, abs=1e-10)
    assert log_simpson(lambda x: 1 / x, 1e-3, 1e3) == pytest.approx(math.log(1e6), abs=1e-9)
    with pytest.raises(ValueError):
        log_simpson(lambda x: x, 0.0, 1.0)


def test_sharp_peak_terminates():
    f = lambda x: 1.0 / (1e-4 + x * x)
    assert adaptive_simpson(f, -1, 1, 1e-8) == pytest.approx(2 * math.atan(1 / 1e-2) / 1e-2, rel=1e-8)

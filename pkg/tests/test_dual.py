import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnot_ineq.dual import Dual, derivative, real, second_derivative

xs = st.floats(0.1, 3.0)


@given(xs)
def test_elementary_derivatives(x):
    cases = [
        (lambda t: t * t * t, 3 * x * x, 6 * x),
        (np.exp, math.exp(x), math.exp(x)),
        (np.log, 1 / x, -1 / x**2),
        (np.sqrt, 0.5 / math.sqrt(x), -0.25 * x**-1.5),
        (np.sin, math.cos(x), -math.sin(x)),
        (np.cosh, math.sinh(x), math.cosh(x)),
        (lambda t: 1.0 / (1.0 + t), -1 / (1 + x) ** 2, 2 / (1 + x) ** 3),
        (lambda t: t**2.5, 2.5 * x**1.5, 3.75 * x**0.5),
        (np.log1p, 1 / (1 + x), -1 / (1 + x) ** 2),
    ]
    for f, d1, d2 in cases:
        assert derivative(f, x) == pytest.approx(d1, rel=1e-12)
        assert second_derivative(f, x) == pytest.approx(d2, rel=1e-12)


def test_object_arrays_dispatch():
    v = np.array([Dual(1.0, 1.0), Dual(2.0, 0.0)], dtype=object)
    out = np.exp(v)
    assert real(out[0]) == pytest.approx(math.e)
    assert out[0].b == pytest.approx(math.e)
    assert out[1].b == 0.0


def test_nested_mixed_derivative():
    # d^2/ds dt of (s t + s^2) at 0 is 1
    s = Dual(Dual(0.0, 0.0), Dual(1.0, 0.0))
    t = Dual(Dual(0.0, 1.0), Dual(0.0, 0.0))
    v = s * t + s * s
    assert v.b.b == 1.0

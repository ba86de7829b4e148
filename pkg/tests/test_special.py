import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmrelay.special import (erfc, log_erfc, log_regularized_lower_gamma,
                             log_regularized_upper_gamma, log_upper_incomplete_gamma,
                             logdiffexp, upper_incomplete_gamma)

mpmath.mp.dps = 40


def test_gamma_trivial():
    x = np.linspace(0, 20, 11)
    np.testing.assert_allclose(upper_incomplete_gamma(1, x), np.exp(-x), rtol=1e-14)
    for s in range(1, 8):
        assert upper_incomplete_gamma(s, 0.0) == pytest.approx(math.factorial(s - 1), rel=1e-14)


@pytest.mark.parametrize("s", [1, 2, 5, 13, 30])
@pytest.mark.parametrize("x", [1e-8, 0.3, 4.0, 29.0, 150.0, 900.0])
def test_gamma_against_mpmath(s, x):
    ref = mpmath.log(mpmath.gammainc(s, x))
    assert log_upper_incomplete_gamma(s, x) == pytest.approx(float(ref), rel=1e-12, abs=1e-12)


def test_gamma_large_x_asymptote():
    n = 6
    ratios = [math.exp(log_upper_incomplete_gamma(n + 1, x) - (n * math.log(x) - x))
              for x in (50.0, 500.0, 5000.0)]
    assert abs(ratios[2] - 1) < abs(ratios[1] - 1) < abs(ratios[0] - 1) < 0.2
    assert ratios[2] == pytest.approx(1.0, abs=2e-3)


@given(st.integers(1, 40), st.floats(0.0, 200.0))
def test_gamma_recurrence(s, x):
    lhs = upper_incomplete_gamma(s + 1, x)
    rhs = s * upper_incomplete_gamma(s, x) + x**s * math.exp(-x)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(st.integers(1, 40), st.floats(0.0, 300.0))
def test_lower_upper_complement(s, x):
    lp = log_regularized_lower_gamma(s, x)
    lq = log_regularized_upper_gamma(s, x)
    assert math.exp(lp) + math.exp(lq) == pytest.approx(1.0, abs=1e-13)


def test_lower_gamma_small_x_accuracy():
    # P(10, 1e-3) ~ 1e-37, far below what 1 - Q could resolve
    ref = float(mpmath.log(mpmath.gammainc(10, 0, 1e-3, regularized=True)))
    assert log_regularized_lower_gamma(10, 1e-3) == pytest.approx(ref, rel=1e-12)


def test_gamma_rejects_bad_shape():
    for s in (0, -1, 1.5):
        with pytest.raises(ValueError):
            upper_incomplete_gamma(s, 1.0)
    with pytest.raises(ValueError):
        upper_incomplete_gamma(2, -1.0)


def test_erfc_values():
    assert erfc(0.0) == 1.0
    # independent value, 40-digit arithmetic
    assert erfc(1.0) == pytest.approx(0.15729920705, abs=1e-10)
    assert erfc(1.0) == pytest.approx(float(mpmath.erfc(1)), abs=1e-15)


def test_erfc_accuracy_grid():
    x = np.linspace(0, 30, 301)
    ref = np.array([float(mpmath.erfc(v)) for v in x])
    assert np.max(np.abs(erfc(x) - ref)) < 1e-12


@given(st.floats(-6, 6))
def test_erfc_symmetry(x):
    assert erfc(-x) == pytest.approx(2 - erfc(x), abs=1e-15)


@pytest.mark.parametrize("x", [0.5, 2.0])
def test_erfc_as_half_gamma(x):
    ref = mpmath.gammainc(0.5, x * x) / mpmath.sqrt(mpmath.pi)
    assert erfc(x) == pytest.approx(float(ref), rel=1e-13)


def test_log_erfc_tail():
    for x in (5.0, 30.0, 100.0):
        assert log_erfc(x) == pytest.approx(float(mpmath.log(mpmath.erfc(x))), rel=1e-10)


def test_logdiffexp():
    assert logdiffexp(math.log(3), math.log(1)) == pytest.approx(math.log(2))
    assert logdiffexp(-1000.0, -1000.0 - 1e-3) == pytest.approx(-1000 + math.log1p(-math.exp(-1e-3)))

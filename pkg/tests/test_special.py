"""Special-function kernels against independent high-precision references."""

import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st

from bsqrng.special import (
    erf,
    erfc,
    gammainc_lower,
    gammainc_upper,
    normal_cdf,
    poisson_cdf,
)

# 20 points spanning the series branch, the continued-fraction branch and the
# negative axis.
ERFC_POINTS = [
    -6.0, -4.5, -3.0, -2.2, -1.5, -1.0, -0.5, -0.1, 0.0, 0.3,
    0.7, 1.1, 1.6, 1.9, 2.0, 2.5, 3.5, 5.0, 7.0, 9.0,
]

# 20 (shape, argument) pairs on both sides of the series/fraction switch.
GAMMA_POINTS = [
    (0.5, 0.1), (0.5, 2.0), (1.0, 0.5), (1.0, 4.0), (1.5, 0.5),
    (1.5, 2.4413026130629994), (2.0, 0.8), (2.0, 6.0), (3.0, 1.0),
    (4.0, 1.9095425048844384), (4.0, 12.0), (8.0, 3.0), (8.0, 20.0),
    (16.0, 10.0), (16.0, 30.0), (50.0, 35.0), (50.0, 80.0), (100.0, 90.0),
    (0.25, 0.01), (390.5, 400.0),
]


@pytest.mark.parametrize("x", ERFC_POINTS)
def test_erfc_against_reference(x):
    reference = float(scipy.special.erfc(x))
    assert erfc(x) == pytest.approx(reference, rel=1e-10)


@pytest.mark.parametrize("a,x", GAMMA_POINTS)
def test_incomplete_gamma_against_reference(a, x):
    assert gammainc_upper(a, x) == pytest.approx(
        float(scipy.special.gammaincc(a, x)), rel=1e-10
    )
    assert gammainc_lower(a, x) == pytest.approx(
        float(scipy.special.gammainc(a, x)), rel=1e-10
    )


def test_erfc_special_values():
    assert erfc(0.0) == 1.0
    assert erf(0.0) == 0.0
    assert erfc(30.0) == 0.0


@given(st.floats(min_value=-8.0, max_value=8.0))
def test_erfc_reflection(x):
    assert erfc(-x) + erfc(x) == pytest.approx(2.0, abs=1e-12)


@given(
    st.floats(min_value=0.05, max_value=60.0),
    st.floats(min_value=0.0, max_value=120.0),
)
def test_gamma_complement(a, x):
    assert gammainc_lower(a, x) + gammainc_upper(a, x) == pytest.approx(1.0, abs=1e-12)


def test_gamma_domain_errors():
    with pytest.raises(ValueError):
        gammainc_upper(0.0, 1.0)
    with pytest.raises(ValueError):
        gammainc_lower(1.0, -0.5)


def test_normal_cdf_against_reference():
    for x in np.linspace(-7.0, 7.0, 29):
        assert normal_cdf(float(x)) == pytest.approx(
            float(scipy.special.ndtr(x)), rel=1e-10, abs=1e-300
        )


@pytest.mark.parametrize("mu", [0.01, 0.5, 1.0, 2.1, 8.0, 20.0])
def test_poisson_cdf_against_direct_summation(mu):
    # independent oracle: accumulate the pmf term by term
    term = math.exp(-mu)
    cumulative = term
    for k in range(0, 60):
        assert poisson_cdf(k, mu) == pytest.approx(cumulative, rel=1e-10)
        term *= mu / (k + 1)
        cumulative += term


def test_poisson_cdf_against_scipy():
    for mu in (0.3, 1.0, 5.0, 17.0):
        for k in (0, 1, 3, 10, 40):
            assert poisson_cdf(k, mu) == pytest.approx(
                float(scipy.stats.poisson.cdf(k, mu)), rel=1e-10
            )


def test_poisson_cdf_domain():
    with pytest.raises(ValueError):
        poisson_cdf(3, 0.0)
    assert poisson_cdf(-1, 1.0) == 0.0

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saddlenode.quadrature import integrate, integrate_halfline
from saddlenode.special import (DomainError, GammaEval, beta_check, digamma, empirical_constant,
                                gamma_ratio, inequality_quotients, log_gamma)

from oracles import EULER_GAMMA, LOG_SQRT_PI


def test_log_gamma_examples():
    assert log_gamma(1.0) == 0.0
    assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-15)
    assert log_gamma(0.5) == pytest.approx(LOG_SQRT_PI, rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.5])
def test_log_gamma_domain(x):
    with pytest.raises(DomainError):
        log_gamma(x)


@given(st.floats(0.1, 300.0))
def test_log_gamma_recurrence(x):
    assert abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) <= 1e-12


def test_gamma_ratio():
    assert gamma_ratio(3.0, 1.0) == pytest.approx(3.0, rel=1e-15)
    assert gamma_ratio(10.0, 0.0) == 1.0
    assert gamma_ratio(1e8, 2.5) == pytest.approx(1e20, rel=1e-6)
    assert gamma_ratio(1e6, -0.5) == pytest.approx(1e-3, rel=1e-5)
    with pytest.raises(DomainError):
        gamma_ratio(1.0, -1.0)


def test_stirling_quotient_tends_to_one():
    xs = [10.0 ** k for k in range(2, 9)]
    devs = [abs(gamma_ratio(x, 1.5) / x ** 1.5 - 1) for x in xs]
    # the log-gamma difference carries rounding of order eps * log Gamma(x)
    noise = [8 * np.finfo(float).eps * log_gamma(x) for x in xs]
    assert all(d1 <= d0 + n1 for d0, d1, n1 in zip(devs, devs[1:], noise[1:]))
    assert devs[-1] < 1e-6


def test_digamma():
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, rel=1e-12)
    assert digamma(2.0) == pytest.approx(1 - EULER_GAMMA, rel=1e-12)
    assert digamma(3.0) > digamma(2.0)
    with pytest.raises(DomainError):
        digamma(0.0)


def test_gamma_eval():
    g = GammaEval.at(4.0, with_digamma=True)
    assert g.log_gamma == pytest.approx(math.log(6.0))
    assert g.digamma == pytest.approx(11 / 6 - EULER_GAMMA, rel=1e-12)


@pytest.mark.parametrize("x,y,val", [(1.0, 1.0, 1.0), (1.0, 2.0, 0.5), (0.5, 0.5, math.pi)])
def test_beta_examples(x, y, val):
    lhs, rhs = beta_check(x, y)
    assert rhs == pytest.approx(val, rel=1e-14)
    assert lhs == pytest.approx(val, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_beta_random(x, y):
    lhs, rhs = beta_check(x, y)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_beta_domain():
    with pytest.raises(DomainError):
        beta_check(0.0, 1.0)


def brute_conv(b, n):
    return sum(math.gamma(k + b) * math.gamma(n - k + b) for k in range(2, n - 1)) / math.gamma(n - 2 + b)


def test_conv_quotients_against_brute_force():
    q = inequality_quotients("conv", 0.0, 1.0, 40)
    for n in (4, 10, 25, 40):
        assert q[n - 4] == pytest.approx(brute_conv(0.0, n), rel=1e-12)
    tail = q[20:]
    assert np.all(np.diff(tail) <= 1e-12)


def test_single_term_sums():
    assert inequality_quotients("rho", 0.0, 0.5, 4)[0] == pytest.approx(1.0, rel=1e-15)
    assert inequality_quotients("xi", 1.0, 0.1, 4)[0] == pytest.approx(1.0, rel=1e-15)


def test_quotient_domain():
    with pytest.raises(DomainError):
        inequality_quotients("conv", -2.0, 1.0, 10)
    with pytest.raises(ValueError):
        inequality_quotients("bogus", 0.0, 1.0, 10)


@pytest.mark.parametrize("b", [-1.5, 0.0, 2.0])
def test_empirical_constant_stabilizes(b):
    assert empirical_constant("conv", b, n_max=400) == empirical_constant("conv", b, n_max=200)


def test_quadrature_rules():
    assert integrate(lambda x: x ** 5, 0.0, 2.0, nodes=8) == pytest.approx(64 / 6, rel=1e-14)
    assert integrate_halfline(lambda s: s / (1 + s ** 4)) == pytest.approx(math.pi / 4, abs=1e-10)
    assert integrate_halfline(lambda s: np.exp(-s)) == pytest.approx(1.0, abs=1e-12)

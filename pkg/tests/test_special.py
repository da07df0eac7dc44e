import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meroindex.special import (DomainError, bernoulli_number, bernoulli_poly, c_q, clausen2,
                               euler_beta, expansion_gq, g_q, log_c_q_expansion, log_expansion_gq, log_gamma,
                               lobachevsky, polylog_nonpos, qdilog, qpochhammer)

mpmath.mp.dps = 30


def polar(r, phi):
    return r * cmath.exp(1j * phi)


radius = st.floats(0.1, 0.9)
phase = st.floats(-math.pi, math.pi)


def test_bernoulli_numbers():
    assert [bernoulli_number(n) for n in range(5)] == [1, Fraction(-1, 2), Fraction(1, 6), 0, Fraction(-1, 30)]
    for n in range(2, 30):
        assert float(bernoulli_number(n)) == pytest.approx(float(mpmath.bernoulli(n)), rel=1e-15)


@pytest.mark.parametrize("k", range(0, 8))
@pytest.mark.parametrize("a", [-0.3, 0.0, 0.25, 0.5, 1.7])
def test_bernoulli_poly_matches_mpmath(k, a):
    assert bernoulli_poly(k, a) == pytest.approx(float(mpmath.bernpoly(k, a)), rel=1e-12, abs=1e-12)


def test_bernoulli_poly_symmetry():
    for k in range(1, 9):
        for a in (0.1, 0.3, 0.45):
            assert bernoulli_poly(k, 1 - a) == pytest.approx((-1) ** k * bernoulli_poly(k, a), abs=1e-12)


@pytest.mark.parametrize("k", [0, -1, -2, -3, -5])
def test_polylog_nonpositive(k):
    for z in (0.3, -0.7 + 0.2j, polar(1, 2.0), polar(1, -0.4)):
        want = complex(mpmath.polylog(k, z))
        assert abs(polylog_nonpos(k, z) - want) <= 1e-11 * max(1, abs(want))


def test_polylog_pole():
    with pytest.raises(DomainError):
        polylog_nonpos(-1, 1.0)


def test_clausen_matches_mpmath():
    for x in np.linspace(-7, 7, 57):
        assert clausen2(x) == pytest.approx(float(mpmath.clsin(2, x)), abs=1e-14)


def test_lobachevsky_values():
    assert lobachevsky(0.0) == 0.0
    assert lobachevsky(math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert 6 * lobachevsky(math.pi / 3) == pytest.approx(2.029883212819307, abs=1e-14)
    # odd and pi-periodic
    for t in (0.3, 1.1, 2.5):
        assert lobachevsky(-t) == pytest.approx(-lobachevsky(t), abs=1e-15)
        assert lobachevsky(t + math.pi) == pytest.approx(lobachevsky(t), abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 60), st.floats(-400, 400))
def test_log_gamma_matches_mpmath(x, y):
    z = complex(x, y)
    want = complex(mpmath.loggamma(z))
    got = complex(log_gamma(z))
    assert abs(got - want) <= 1e-13 * max(1.0, abs(want))


def test_log_gamma_domain():
    with pytest.raises(DomainError):
        log_gamma(-0.5 + 1j)


def test_euler_beta():
    assert euler_beta(0.5, 0.5) == pytest.approx(math.pi)
    assert euler_beta(2.0, 3.0) == pytest.approx(1 / 12)


@settings(max_examples=100, deadline=None)
@given(radius, phase, radius, phase)
def test_qpochhammer_matches_mpmath(rq, pq, rz, pz):
    q, z = polar(rq, pq), polar(rz, pz)
    want = complex(mpmath.qp(z, q))
    assert abs(qpochhammer(z, q) - want) <= 1e-12 * max(1, abs(want))


def test_q_domain():
    with pytest.raises(DomainError):
        qpochhammer(0.5, 1.0)
    with pytest.raises(DomainError):
        g_q(0.0, 0.5)
    with pytest.raises(DomainError):
        g_q(1.0, 0.5)


@settings(max_examples=1000, deadline=None)
@given(radius, phase, radius, phase)
def test_gq_inversion(rq, pq, rz, pz):
    q, z = polar(rq, pq), polar(rz, pz)
    assert abs(g_q(z, q) * g_q(-q / z, q) - 1) < 1e-12


@settings(max_examples=1000, deadline=None)
@given(radius, phase, radius, phase)
def test_exp_qdilog_is_pochhammer(rq, pq, rz, pz):
    q, z = polar(rq, pq), polar(rz, pz)
    lhs = np.exp(-qdilog(z, q))
    rhs = qpochhammer(z, q)
    assert abs(lhs - rhs) <= 1e-12 * max(1, abs(rhs))


def test_c_q_expansion():
    for kappa in (20.0, 40.0):
        h = -1 / kappa
        got = cmath.log(c_q(math.exp(h)))
        assert abs(got - log_c_q_expansion(h)) < 1e-9


def _ratio(omega, a, m, h=-0.02):
    """Error at 2 hbar over error at hbar, both as relative errors of G_q."""

    def err(hh):
        qq = cmath.exp(hh)
        return abs(g_q(omega * qq ** a, qq) / expansion_gq(omega, a, hh, m) - 1)

    return err(2 * h) / err(h)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_expansion_order_general_branch(m):
    omega = cmath.exp(1.1j)
    r = _ratio(omega, 0.3, m, h=-0.01)
    assert 0.75 * 2 ** (m + 1) <= r <= 1.25 * 2 ** (m + 1)


@pytest.mark.parametrize("omega", [1, -1])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_expansion_order_real_branches(omega, m):
    # the series for omega = +-1 only has even powers of hbar
    r = _ratio(omega, 0.3, m, h=-0.05 * 2 ** (m - 1))
    assert 0.75 * 4 ** (m + 1) <= r <= 1.25 * 4 ** (m + 1)


def test_expansion_leading_term_general():
    h = -1 / 30
    omega = cmath.exp(2.2j)
    q = cmath.exp(h)
    exact = g_q(omega * q ** 0.4, q)
    approx = expansion_gq(omega, 0.4, h, 0)
    assert abs(exact / approx - 1) < 0.05


def test_expansion_domain():
    with pytest.raises(DomainError):
        log_expansion_gq(1, 0.3, 0.1, 1)
    with pytest.raises(DomainError):
        log_expansion_gq(1, -0.3, -0.1, 1)
    with pytest.raises(DomainError):
        log_expansion_gq(-1, 1.3, -0.1, 1)

"""Scalar special functions used throughout the package.

Everything here accepts numpy arrays where that is cheap, so that the
quadrature modules can evaluate whole grids at once.
"""

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

# Truncation threshold for q-series, relative to (1 - |q|).
QSERIES_EPS = 1e-17

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


class DomainError(ValueError):
    """Raised when a function is called outside its holomorphic domain."""


# ---------------------------------------------------------------- Bernoulli


@lru_cache(maxsize=None)
def bernoulli_number(n):
    """Exact Bernoulli number B_n as a Fraction, with B_1 = -1/2."""
    if n < 0:
        raise ValueError("n must be non-negative")
    b = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(math.comb(m + 1, j) * b[j] for j in range(m))
        b.append(-s / (m + 1))
    return b[n]


@lru_cache(maxsize=None)
def _bernoulli_coeffs(k):
    # B_k(x) = sum_j C(k, j) B_j x^(k-j); returned highest power first.
    return tuple(float(math.comb(k, j) * bernoulli_number(j)) for j in range(k + 1))


def bernoulli_poly(k, a):
    """Bernoulli polynomial B_k(a) by Horner evaluation."""
    if k < 0:
        raise ValueError("k must be non-negative")
    acc = 0.0
    for c in _bernoulli_coeffs(k):
        acc = acc * a + c
    return acc


# ------------------------------------------------------------- polylogs


@lru_cache(maxsize=None)
def _stirling2(n, k):
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def polylog_nonpos(k, z):
    """Li_k(z) for integer k <= 0.

    Uses Li_{-n}(z) = sum_{j=0}^n j! S(n+1, j+1) w^(j+1) with w = z/(1-z),
    which is the closed form of iterating z d/dz on Li_0(z) = z/(1-z).
    """
    if k > 0:
        raise ValueError("k must be <= 0")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 1):
        raise DomainError("Li_k has a pole at z = 1")
    n = -k
    w = z / (1 - z)
    acc = np.zeros_like(w)
    for j in range(n, -1, -1):
        acc = (acc + math.factorial(j) * _stirling2(n + 1, j + 1)) * w
    return acc[()] if acc.ndim == 0 else acc


# ---------------------------------------------------------- Lobachevsky

_CLAUSEN_TERMS = 40
_CLAUSEN_COEFFS = np.array(
    [abs(float(bernoulli_number(2 * k))) / (2 * k * math.factorial(2 * k + 1))
     for k in range(1, _CLAUSEN_TERMS + 1)]
)


def clausen2(x):
    """Clausen function Cl_2(x) = sum sin(n x)/n^2."""
    x = np.asarray(x, dtype=float)
    # reduce to [-pi, pi)
    y = x - 2 * np.pi * np.floor((x + np.pi) / (2 * np.pi))
    ay = np.abs(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.where(ay > 0, y - y * np.log(np.where(ay > 0, ay, 1.0)), 0.0)
    y2 = y * y
    tail = np.zeros_like(y)
    for c in _CLAUSEN_COEFFS[::-1]:
        tail = (tail + c) * y2
    out = head + tail * y
    return out[()] if out.ndim == 0 else out


def lobachevsky(theta):
    """Lobachevsky function L(theta) = -int_0^theta log|2 sin x| dx."""
    return 0.5 * clausen2(2 * np.asarray(theta, dtype=float))


def lobachevsky_omega(omega):
    """L evaluated at the principal argument of a unit complex number."""
    return lobachevsky(np.angle(omega))


# -------------------------------------------------------------- log gamma

_STIRLING_TERMS = 12
_STIRLING_COEFFS = [
    float(bernoulli_number(2 * k)) / (2 * k * (2 * k - 1))
    for k in range(1, _STIRLING_TERMS + 1)
]
_SHIFT = 10


def _stirling(w):
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for c in reversed(_STIRLING_COEFFS):
        series = series * inv2 + c
    return (w - 0.5) * np.log(w) - w + LOG_SQRT_2PI + series * inv


def log_gamma(z):
    """Complex log-gamma for Re z > 0.

    Arguments with |z| < 10 are shifted by 10 with the recurrence, then the
    Stirling series is applied. The branch is continuous in the right
    half-plane and real on the positive axis.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise DomainError("log_gamma requires Re z > 0")
    out = np.empty_like(z)
    small = np.abs(z) < _SHIFT
    big = ~small
    if np.any(big):
        out[big] = _stirling(z[big])
    if np.any(small):
        zs = z[small]
        shift = np.zeros_like(zs)
        for j in range(_SHIFT):
            shift += np.log(zs + j)
        out[small] = _stirling(zs + _SHIFT) - shift
    return out[()] if out.ndim == 0 else out


def log_beta(x, y):
    return log_gamma(x) + log_gamma(y) - log_gamma(np.asarray(x) + np.asarray(y))


def euler_beta(x, y):
    """Euler beta B(x, y) for Re x, Re y > 0."""
    return np.exp(log_beta(x, y))


# ---------------------------------------------------------------- q-series


def _check_q(q):
    q = complex(q)
    if not 0 < abs(q) < 1:
        raise DomainError("need 0 < |q| < 1")
    return q


def _qterms(zmax, q):
    """Number of factors n = 0..M-1 needed before |q^n z| < eps (1 - |q|)."""
    aq = abs(q)
    if zmax == 0:
        return 1
    bound = QSERIES_EPS * (1 - aq)
    if zmax < bound:
        return 1
    return int(math.ceil(math.log(bound / zmax) / math.log(aq))) + 1


def qpochhammer(z, q):
    """(z; q)_infinity = prod_{n>=0} (1 - q^n z)."""
    q = _check_q(q)
    z = np.asarray(z, dtype=complex)
    m = _qterms(float(np.max(np.abs(z))) if z.size else 0.0, q)
    out = np.ones_like(z)
    qn = 1.0 + 0j
    for _ in range(m):
        out = out * (1 - qn * z)
        qn *= q
    return out[()] if out.ndim == 0 else out


def qdilog(z, q):
    """Li_2(z; q) = sum_{n>=1} z^n / (n (1 - q^n)) for |z| < 1."""
    q = _check_q(q)
    z = np.asarray(z, dtype=complex)
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if zmax >= 1:
        raise DomainError("qdilog requires |z| < 1")
    acc = np.zeros_like(z)
    zn = np.ones_like(z)
    qn = 1.0 + 0j
    n = 0
    bound = QSERIES_EPS * (1 - abs(q))
    while True:
        n += 1
        zn = zn * z
        qn *= q
        term_size = zmax ** n / (n * abs(1 - qn)) if zmax > 0 else 0.0
        acc = acc + zn / (n * (1 - qn))
        if term_size < bound:
            break
    return acc[()] if acc.ndim == 0 else acc


def g_q(z, q):
    """G_q(z) = (-q/z; q) / (z; q)."""
    q = _check_q(q)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("G_q has an essential singularity at 0")
    den = qpochhammer(z, q)
    if np.any(den == 0):
        raise DomainError("G_q has a pole: z is a non-positive power of q")
    return qpochhammer(-q / z, q) / den


def c_q(q):
    """Normalisation constant (q; q)^2 / (q^2; q^2)."""
    q = _check_q(q)
    return complex(qpochhammer(q, q) ** 2 / qpochhammer(q * q, q * q))


# ------------------------------------------------- asymptotic expansions


def log_c_q_expansion(hbar):
    """Leading asymptotics of log c_q at q = exp(hbar), hbar < 0."""
    hbar = float(hbar)
    return math.pi ** 2 / (4 * hbar) - 0.5 * math.log(-hbar) + 0.5 * math.log(4 * math.pi)


def _even_series(a, hbar, m):
    s = 0.0
    for k in range(1, m + 1):
        c = float(bernoulli_number(2 * k)) * 4 ** k / (2 * k * math.factorial(2 * k + 1))
        s = s + c * bernoulli_poly(2 * k + 1, a) * hbar ** (2 * k)
    return s


def log_expansion_gq(omega, a, hbar, m):
    """Truncated asymptotic expansion of log G_q(omega q^a), q = exp(hbar).

    omega is a unit complex number and hbar < 0. The branch is chosen by
    omega = 1, omega = -1 or omega non-real. For omega = +-1 the series is
    in even powers of hbar and the truncation error is O(hbar^(2m+2)); for
    non-real omega it is O(hbar^(m+1)).
    """
    hbar = float(hbar)
    if hbar >= 0:
        raise DomainError("hbar must be negative")
    if m < 0:
        raise ValueError("order must be non-negative")
    omega = complex(omega)
    lh = math.log(-hbar)
    if abs(omega - 1) < 1e-6 and abs(omega.imag) < 1e-12:
        if np.real(a) <= 0:
            raise DomainError("omega = 1 branch requires Re a > 0")
        return (-math.pi ** 2 / (4 * hbar) + (a - 0.5) * lh
                + log_gamma(a) - LOG_SQRT_2PI + (a - 0.5) * math.log(2)
                + _even_series(a, hbar, m))
    if abs(omega + 1) < 1e-6 and abs(omega.imag) < 1e-12:
        if np.real(1 - a) <= 0:
            raise DomainError("omega = -1 branch requires Re a < 1")
        return (math.pi ** 2 / (4 * hbar) + (a - 0.5) * lh
                - log_gamma(1 - a) + LOG_SQRT_2PI + (a - 0.5) * math.log(2)
                + _even_series(a, hbar, m))
    if abs(omega - 1) < 1e-6:
        raise DomainError("expansion is not uniform as omega -> 1")
    arg = cmath.phase(omega)
    im = omega.imag
    lead = (math.pi / 2 * abs(arg) - math.pi ** 2 / 4 - 1j * float(lobachevsky(arg))) / hbar
    out = lead + (a - 0.5) * (math.log(abs(2 * im)) - 0.5j * math.pi * math.copysign(1.0, im))
    if m >= 1:
        out = out + bernoulli_poly(2, a) * omega.real / (2j * im) * hbar
    w2 = omega * omega
    for k in range(2, m + 1):
        out = out - (2 ** k * bernoulli_poly(k + 1, a) / math.factorial(k + 1)
                     * polylog_nonpos(1 - k, w2) * hbar ** k)
    return out


def expansion_gq(omega, a, hbar, m):
    """exp of log_expansion_gq."""
    return np.exp(log_expansion_gq(omega, a, hbar, m))

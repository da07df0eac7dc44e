"""Circle-valued angle structures, Z2-taut enumeration and component tests."""

import itertools
import math
from fractions import Fraction

import numpy as np

from .special import lobachevsky
from .trimesh import InputError, smith_decomposition

UNIT_TOL = 1e-12
MEMBERSHIP_TOL = 1e-8


class AmbiguityError(ArithmeticError):
    """A floating-point lattice test landed too close to its decision boundary."""


def omega_at(tri, a, t):
    """omega(q) = exp(i pi a(q) + i (t . L_*)(q)) for t in R^(N-1)."""
    t = np.asarray(t, dtype=float)
    return np.exp(1j * (np.pi * np.asarray(a) + t @ tri.Lstar))


def check_circle_structure(tri, omega, tol=UNIT_TOL):
    """Raise InputError unless omega is an S^1-valued angle structure."""
    omega = np.asarray(omega, dtype=complex)
    N = tri.N
    if np.max(np.abs(np.abs(omega) - 1)) > tol:
        raise InputError("omega entries must have modulus 1")
    for t in range(N):
        p = omega[t] * omega[N + t] * omega[2 * N + t]
        if abs(p + 1) > tol:
            raise InputError(f"omega product on tetrahedron {t} is {p}, expected -1")
    if tri.G is not None:
        for j, row in enumerate(tri.G):
            h = np.prod(omega ** row)
            if abs(h - 1) > tol:
                raise InputError(f"omega holonomy around edge {j} is {h}, expected 1")


def angle_holonomy(omega, Gp):
    """Multiplicative angle holonomies (hol mu, hol lambda)."""
    omega = np.asarray(omega, dtype=complex)
    return tuple(complex(np.prod(omega ** row)) for row in np.asarray(Gp))


def volume(omega):
    """Sum of Lobachevsky functions of the arguments of omega."""
    return float(np.sum(lobachevsky(np.angle(omega))))


# ----------------------------------------------------------- suppression


def classify_suppressing(tri, omega, tol=1e-12):
    """Per-tetrahedron suppression flags and total defect.

    A tetrahedron is non-suppressing when one of its quads has omega = 1 or
    when the imaginary parts share a strict sign. The defect
    sum(|Arg w| + |Arg w'| + |Arg w''| - pi) vanishes exactly on
    non-suppressing tetrahedra.
    """
    omega = np.asarray(omega, dtype=complex)
    N = tri.N
    flags = []
    defect = 0.0
    for t in range(N):
        w = omega[[t, N + t, 2 * N + t]]
        im = w.imag
        nonsup = bool(np.any(np.abs(w - 1) < tol) or np.all(im > tol) or np.all(im < -tol))
        flags.append(not nonsup)
        defect += float(np.sum(np.abs(np.angle(w))) - np.pi)
    return flags, defect


# ---------------------------------------------------- component membership


def _rational_kernel(L):
    """Integer basis (rows) of {v : L v = 0} by exact elimination over Q."""
    L = [[Fraction(int(x)) for x in row] for row in np.asarray(L).tolist()]
    m, n = len(L), len(L[0])
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if L[i][c] != 0), None)
        if p is None:
            continue
        L[r], L[p] = L[p], L[r]
        inv = 1 / L[r][c]
        L[r] = [x * inv for x in L[r]]
        for i in range(m):
            if i != r and L[i][c] != 0:
                f = L[i][c]
                L[i] = [x - f * y for x, y in zip(L[i], L[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -L[i][fc]
        den = math.lcm(*(x.denominator for x in v))
        basis.append([int(x * den) for x in v])
    return np.array(basis, dtype=np.int64).reshape(len(basis), n)


def _frac_dist(x):
    return abs(x - round(x))


def component_membership(tri, omega_target, a):
    """True iff omega_target lies in the component of exp(i pi a).

    Tests whether theta - pi a is in the real span of the rows of L plus
    2 pi Z^(3N), where theta is the argument of omega_target lifted to
    [0, 2 pi). With K an integer basis of the annihilator of the rows of
    L, this is the lattice condition K x in K Z^(3N).
    """
    omega_target = np.asarray(omega_target, dtype=complex)
    theta = np.mod(np.angle(omega_target), 2 * np.pi)
    x = (theta - np.pi * np.asarray(a)) / (2 * np.pi)
    K = _rational_kernel(tri.L)
    if K.shape[0] == 0:
        return True
    U, D, _ = smith_decomposition(K)
    y = np.array(U, dtype=float) @ (K @ x)
    for i in range(len(y)):
        d = D[i][i] if i < len(D[0]) else 0
        r = y[i] / d if d else y[i]
        dist = _frac_dist(r) if d else abs(r)
        if dist > MEMBERSHIP_TOL:
            if dist < 1e3 * MEMBERSHIP_TOL:
                raise AmbiguityError(f"lattice residual {dist:.3g} is too close to the tolerance")
            return False
    return True


# --------------------------------------------------------- taut structures


def taut_signs(N, minus):
    """Sign vector with -1 at quad type minus[t] of tetrahedron t."""
    s = np.ones(3 * N, dtype=int)
    for t, q in enumerate(minus):
        s[q * N + t] = -1
    return s


def is_taut_admissible(tri, signs):
    neg = (np.asarray(signs) < 0).astype(np.int64)
    if tri.G is None:
        raise InputError("taut parity needs the gluing matrix")
    if np.any((tri.G @ neg) % 2) or np.any((tri.Gp @ neg) % 2):
        return False
    return True


def enumerate_taut_in_component(tri, a):
    """All Z2-taut structures in the component of exp(i pi a), lexicographic.

    Patterns are ordered by which quad type carries the -1 in tetrahedron
    1, then 2, and so on. Edge parity is pruned tetrahedron by tetrahedron.
    """
    tri.require_gluing()
    N = tri.N
    G = np.vstack([tri.G, tri.Gp])
    out = []

    def rec(t, parity, minus):
        if t == N:
            if not np.any(parity % 2):
                signs = taut_signs(N, minus)
                if component_membership(tri, signs.astype(complex), a):
                    out.append(signs)
            return
        # columns of tetrahedra >= t + 1 that still can fix a row's parity
        rest = G[:, [q * N + u for q in range(3) for u in range(t + 1, N)]]
        free = np.any(rest != 0, axis=1)
        for q in range(3):
            p = parity + G[:, q * N + t]
            if np.any((p % 2 == 1) & ~free):
                continue
            rec(t + 1, p, minus + [q])

    rec(0, np.zeros(G.shape[0], dtype=np.int64), [])
    return out


def all_taut_patterns(tri):
    """Every admissible taut pattern, ignoring components (for diagnostics)."""
    N = tri.N
    out = []
    for minus in itertools.product(range(3), repeat=N):
        s = taut_signs(N, minus)
        if is_taut_admissible(tri, s):
            out.append(s)
    return out

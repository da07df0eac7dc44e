"""The tau invariant, the 1-loop invariant and oscillatory contributions."""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import NumericalError, gluing_derivative, hessian, zeta_factors
from .trimesh import InputError, solve_integer_system


@dataclass(frozen=True)
class TauReport:
    tau: float
    tau1: float
    tau2: float
    volume: float
    signature: int
    n_plus: int
    n_minus: int

    @property
    def n_combined(self):
        return self.n_plus - self.n_minus + self.signature


def angle_system(tri):
    """Integer matrix of the angle equations: tetrahedron sums, edges, cusp."""
    tri.require_gluing()
    N = tri.N
    tet = np.zeros((N, 3 * N), dtype=np.int64)
    for t in range(N):
        tet[t, [t, N + t, 2 * N + t]] = 1
    return np.vstack([tet, tri.G, tri.Gp])


def find_integer_angle_structure(tri):
    """Peripherally trivial integer angle structure f (sums 1, edges 2, cusp 0)."""
    tri.require_one_cusp()
    A = angle_system(tri)
    N = tri.N
    b = [1] * N + [2] * N + [0] * tri.Gp.shape[0]
    f = solve_integer_system(A, b)
    if f is None:
        raise InputError("no integer-valued angle structure exists")
    return np.array(f, dtype=np.int64)


def lifted_angles(tri, omega):
    """Real angle structure beta congruent to Arg omega modulo 2 pi.

    beta = Arg omega + 2 pi m with an integer vector m chosen so that beta
    satisfies the angle equations (sum pi per tetrahedron, 2 pi per edge,
    0 along the cusp). Then exp(i beta) = omega, so beta lies in the
    component of omega.
    """
    alpha = np.angle(np.asarray(omega, dtype=complex))
    A = angle_system(tri)
    N = tri.N
    target = np.concatenate([np.pi * np.ones(N), 2 * np.pi * np.ones(N), np.zeros(tri.Gp.shape[0])])
    rhs = (target - A @ alpha) / (2 * np.pi)
    rint = np.rint(rhs)
    if np.max(np.abs(rhs - rint)) > 1e-6:
        raise NumericalError("omega does not satisfy the angle equations modulo 2 pi")
    m = solve_integer_system(A, [int(x) for x in rint])
    if m is None:
        raise NumericalError("no integer lift of the angles")
    return alpha + 2 * np.pi * np.array(m, dtype=float)


def tau(tri, sol, beta=None):
    """tau(z, beta) = prod |sin alpha|^(beta/pi - 1/2) / sqrt|det L_* diag(cot alpha) L_*^T|.

    sol is a ShapeSolution (or a circle-valued omega array). beta defaults
    to the lift of the pseudo-angles of the solution itself.
    """
    omega = sol.omega if hasattr(sol, "omega") else np.asarray(sol, dtype=complex)
    rep = hessian(tri, omega)
    if rep.degenerate:
        raise NumericalError("degenerate critical point: singular Hessian")
    if beta is None:
        beta = lifted_angles(tri, omega)
    beta = np.asarray(beta, dtype=float)
    logsin = np.log(np.abs(np.imag(omega)))
    det = abs(np.linalg.det(rep.hessian))
    tau1 = 1.0 / det
    log_tau2 = float(np.sum((2 * beta / np.pi - 1) * logsin))
    tau2 = math.exp(log_tau2)
    value = math.exp(0.5 * (log_tau2 - math.log(det)))
    return TauReport(value, tau1, tau2, rep.volume, rep.signature, rep.n_plus, rep.n_minus)


def one_loop(tri, sol, f=None, gamma=0):
    """1-loop invariant (up to sign) with the last edge replaced by a cusp curve.

    gamma selects the peripheral row (0 = meridian) or may be an explicit
    integer row of length 3N.
    """
    N = tri.N
    if f is None:
        f = find_integer_angle_structure(tri)
    f = np.asarray(f)
    grow = tri.Gp[gamma] if np.isscalar(gamma) else np.asarray(gamma)
    Ghat = np.vstack([tri.G[: N - 1], grow])
    z1 = sol.z[:N]
    if np.min(np.abs(z1)) < 1e-14 or np.min(np.abs(1 - z1)) < 1e-14:
        raise NumericalError("degenerate shapes")
    det = np.linalg.det(gluing_derivative(Ghat, z1))
    ze, zp, zpp = zeta_factors(z1)
    mono = np.prod(ze ** f[:N] * zp ** f[N:2 * N] * zpp ** f[2 * N:])
    return complex(det / (2 * mono))


def contribution(tau_value, volume, d_T, n_combined, kappa):
    """Combined conjugate-pair term 2 d_T tau sqrt(2 pi kappa) cos(kappa Vol + pi n / 4)."""
    kappa = np.asarray(kappa, dtype=float)
    return 2 * d_T * tau_value * np.sqrt(2 * np.pi * kappa) * np.cos(kappa * volume + np.pi * n_combined / 4)


def amplitude(tau_value, d_T=1):
    """Coefficient of sqrt(kappa) in the combined contribution."""
    return 2 * d_T * tau_value * math.sqrt(2 * math.pi)

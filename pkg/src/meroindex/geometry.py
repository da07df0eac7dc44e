"""Shape solutions of the gluing equations, shears, Hessians and cusp shape."""

from dataclasses import dataclass

import numpy as np

from .angles import volume
from .trimesh import InputError, is_peripherally_trivial

FLAT_TOL = 1e-14
DEGENERATE_REL = 1e-9


class NumericalError(ArithmeticError):
    """Iteration failed to converge or hit a singular configuration."""


@dataclass(frozen=True)
class ShapeSolution:
    z: np.ndarray  # 3N shapes (z, z', z'') in quad order
    Z: np.ndarray  # 3N logarithms, Z + Z' + Z'' = i pi per tetrahedron
    residual: float
    iterations: int = 0

    @property
    def omega(self):
        return self.z / np.abs(self.z)

    def conjugate(self):
        Zc = np.conj(self.Z)
        N = len(self.z) // 3
        Zc[2 * N:] += 2j * np.pi  # restore the i pi tetrahedron sums
        return ShapeSolution(np.conj(self.z), Zc, self.residual, self.iterations)


@dataclass(frozen=True)
class CriticalPointReport:
    omega: np.ndarray
    hessian: np.ndarray
    signature: int
    n_plus: int
    n_minus: int
    volume: float
    degenerate: bool

    @property
    def n_combined(self):
        return self.n_plus - self.n_minus + self.signature


def _check_flat(omega):
    if np.min(np.abs(np.imag(omega))) < FLAT_TOL:
        raise NumericalError("flat angle: some omega is real")


def shear(tri, omega):
    """Shearing displacements S_j = -sum_q l_j(q) ln|sin Arg omega(q)|, j = 1..N."""
    omega = np.asarray(omega, dtype=complex)
    _check_flat(omega)
    return -tri.L @ np.log(np.abs(np.imag(omega)))


def shear_jacobian(tri, omega):
    """-L_* diag(cot Arg omega) L_*^T, the t-derivative of the reduced shear."""
    cot = np.real(omega) / np.imag(omega)
    return -(tri.Lstar * cot) @ tri.Lstar.T


def hessian(tri, omega):
    """Hessian report of the volume at omega (Hessian equals the shear Jacobian)."""
    omega = np.asarray(omega, dtype=complex)
    _check_flat(omega)
    H = shear_jacobian(tri, omega)
    H = 0.5 * (H + H.T)
    ev = np.linalg.eigvalsh(H)
    thr = DEGENERATE_REL * max(np.max(np.abs(ev)), 1e-300)
    degenerate = bool(np.any(np.abs(ev) <= thr))
    sig = int(np.sum(ev > thr) - np.sum(ev < -thr))
    N = tri.N
    orient = np.sign(np.imag(omega[:N]))
    return CriticalPointReport(
        omega=omega, hessian=H, signature=sig,
        n_plus=int(np.sum(orient > 0)), n_minus=int(np.sum(orient < 0)),
        volume=volume(omega), degenerate=degenerate)


def shapes_from_omega(tri, omega):
    """z(q) = |Im omega(q') / Im omega(q'')| omega(q) with (q, q', q'') cyclic."""
    N = tri.N
    w = np.asarray(omega, dtype=complex).reshape(3, N)
    im = np.abs(w.imag)
    z = np.empty_like(w)
    for k in range(3):
        z[k] = im[(k + 1) % 3] / im[(k + 2) % 3] * w[k]
    return z.reshape(-1)


def complete_shapes(z1):
    """All 3N shapes from the N shapes z(q_t)."""
    z1 = np.asarray(z1, dtype=complex)
    return np.concatenate([z1, 1 / (1 - z1), 1 - 1 / z1])


def log_shapes(z1):
    """Log-branches with Z + Z' + Z'' = i pi in every tetrahedron."""
    Z = np.log(z1)
    Zp = -np.log(1 - z1)
    return np.concatenate([Z, Zp, 1j * np.pi - Z - Zp])


def _wrap(x):
    """Reduce imaginary parts to (-pi, pi]."""
    im = np.imag(x)
    return np.real(x) + 1j * (im - 2 * np.pi * np.ceil((im - np.pi) / (2 * np.pi)))


def gluing_residual(tri, Z, edge_target=None, cusp_target=None, wrap=True):
    """Max defect of the logarithmic edge and completeness equations."""
    N = tri.N
    edge_target = 2j * np.pi * np.ones(N) if edge_target is None else edge_target
    cusp_target = np.zeros(tri.Gp.shape[0]) if cusp_target is None else cusp_target
    e = tri.G @ Z - edge_target
    c = tri.Gp @ Z - cusp_target
    r = np.concatenate([e, c])
    if wrap:
        r = _wrap(r)
    return float(np.max(np.abs(r)))


def zeta_factors(z1):
    """(zeta, zeta', zeta'') = (1/z, 1/(1-z), 1/(z(z-1)))."""
    z1 = np.asarray(z1, dtype=complex)
    return 1 / z1, 1 / (1 - z1), 1 / (z1 * (z1 - 1))


def gluing_derivative(rows, z1):
    """d(rows . Z)/dz = G diag(zeta) + G' diag(zeta') + G'' diag(zeta'')."""
    N = len(z1)
    rows = np.asarray(rows)
    ze, zp, zpp = zeta_factors(z1)
    return rows[:, :N] * ze + rows[:, N:2 * N] * zp + rows[:, 2 * N:] * zpp


def _solution_from_z1(tri, z1, iterations=0, wrap=True):
    Z = log_shapes(z1)
    return ShapeSolution(complete_shapes(z1), Z, gluing_residual(tri, Z, wrap=wrap), iterations)


def solve_geometric(tri, a0, max_iter=100, tol=1e-13):
    """Maximise the volume over strict angle structures by damped Newton.

    Works in the coordinates t of omega = exp(i(pi a0 + t L_*)) and solves
    shear(t) = 0 with Armijo backtracking on |shear|^2, keeping all angles
    inside (0, pi). Returns (ShapeSolution, CriticalPointReport).
    """
    tri.require_gluing()
    tri.require_one_cusp()
    if not is_peripherally_trivial(tri, a0):
        raise InputError("initial angle structure must be peripherally trivial")
    theta0 = np.pi * np.asarray(a0, dtype=float)
    if np.any(theta0 <= 0) or np.any(theta0 >= np.pi):
        raise InputError("initial angle structure must be strict")
    Ls = tri.Lstar.astype(float)

    def reduced(theta):
        return (-Ls @ np.log(np.sin(theta)))

    t = np.zeros(tri.N - 1)
    theta = theta0.copy()
    S = reduced(theta)
    it = 0
    while np.max(np.abs(S)) > tol:
        if it >= max_iter:
            raise NumericalError(f"geometric solve did not converge in {max_iter} steps")
        J = -(Ls / np.tan(theta)) @ Ls.T
        try:
            step = np.linalg.solve(J, -S)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular shear Jacobian") from exc
        f0 = S @ S
        alpha = 1.0
        while True:
            th = theta0 + (t + alpha * step) @ Ls
            if np.all(th > 0) and np.all(th < np.pi):
                S1 = reduced(th)
                if S1 @ S1 <= (1 - 1e-4 * alpha) * f0 or alpha < 1e-12:
                    break
            alpha *= 0.5
            if alpha < 1e-14:
                raise NumericalError("line search failed: angles leave (0, pi)")
        t = t + alpha * step
        theta = theta0 + t @ Ls
        S = reduced(theta)
        it += 1
    omega = np.exp(1j * theta)
    z = shapes_from_omega(tri, omega)
    N = tri.N
    zc = complete_shapes(z[:N])
    if np.max(np.abs(zc - z)) > 1e-10:
        raise NumericalError("not a shape solution: z-relations fail")
    sol = _solution_from_z1(tri, z[:N], it)
    return sol, hessian(tri, omega)


def newton_gluing(tri, z0, edge_target=None, cusp_target=None, max_iter=100, tol=1e-12):
    """Damped Newton for the edge and completeness equations in the shapes z.

    z0 holds the N shapes z(q_t) (or all 3N). The system uses edges
    1..N-1 and the meridian; the remaining equations are checked at the
    end. Logarithmic equations are taken modulo 2 pi i, so any branch of
    the product equations is accepted.
    """
    tri.require_gluing()
    tri.require_one_cusp()
    N = tri.N
    z = np.asarray(z0, dtype=complex)[:N].copy()
    rows = np.vstack([tri.G[: N - 1], tri.Gp[:1]])
    et = 2j * np.pi * np.ones(N) if edge_target is None else np.asarray(edge_target)
    ct = np.zeros(2) if cusp_target is None else np.asarray(cusp_target)
    target = np.concatenate([et[: N - 1], ct[:1]])

    def F(z):
        return _wrap(rows @ log_shapes(z) - target)

    f = F(z)
    it = 0
    while np.max(np.abs(f)) > tol:
        if it >= max_iter:
            raise NumericalError(f"Newton did not converge in {max_iter} iterations")
        J = gluing_derivative(rows, z)
        try:
            dz = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular gluing Jacobian") from exc
        n0 = np.linalg.norm(f)
        alpha = 1.0
        while True:
            zn = z + alpha * dz
            if np.min(np.abs(zn)) > 1e-8 and np.min(np.abs(1 - zn)) > 1e-8:
                fn = F(zn)
                if np.linalg.norm(fn) < (1 - 1e-4 * alpha) * n0:
                    break
            alpha *= 0.5
            if alpha < 1e-10:
                raise NumericalError("Newton step failed to reduce the residual")
        z, f = zn, fn
        it += 1
        if np.max(np.abs(z)) > 1e8:
            raise NumericalError("iteration diverged")
    if np.min(np.abs(z)) < 1e-6 or np.min(np.abs(1 - z)) < 1e-6:
        raise NumericalError("shape collapsed to 0 or 1")
    Z = log_shapes(z)
    res = gluing_residual(tri, Z, et, ct)
    if res > 1e3 * tol:
        raise NumericalError(f"remaining gluing equations fail (residual {res:.3g})")
    return ShapeSolution(complete_shapes(z), Z, res, it)


def cusp_shape(tri, sol):
    """Relative modulus sigma(lambda, mu) = dv/du at the complete structure."""
    tri.require_one_cusp()
    N = tri.N
    z1 = sol.z[:N]
    rows = np.vstack([tri.G[: N - 1], tri.Gp[:1]])
    J = gluing_derivative(rows, z1)
    rhs = np.zeros(N, dtype=complex)
    rhs[-1] = 1.0
    try:
        dz = np.linalg.solve(J, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular linearisation at the cusp") from exc
    sigma = complex((gluing_derivative(tri.Gp[1:2], z1) @ dz)[0])
    if abs(sigma.imag) < 1e-12:
        raise NumericalError("cusp shape is real")
    return sigma


def critical_point(tri, sol):
    """Hessian report for the circle-valued structure of a shape solution."""
    return hessian(tri, sol.omega)

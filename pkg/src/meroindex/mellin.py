"""Mellin-Barnes integrals of beta Boltzmann weights and the beta invariant.

For a Z2-taut structure with +1 quads (q, q') in each tetrahedron the
integrand on the imaginary contour s = i x is

    prod_T B(a(q) + i x . l(q), a(q') + i x . l(q')),   x in R^(N-1),

and the integral is (2 pi)^-(N-1) times the principal value over balls
|x| <= R. The tails along the cones where no tetrahedron is exponentially
damped decay only polynomially and oscillate, so truncations are averaged
over the radius. The default window averages the ball truncations over
radii in [R/2, R] with a raised-cosine density; the plain Cesaro mean over
[0, R] leaves a bias of order 1/R.

Near the lines where one linear form vanishes the gamma factors have poles
at distance a(q) from the contour, so the cells are large (side 1) but
carry many Gauss-Legendre nodes (24 per axis).

In three or more dimensions that rule is too costly at radius 200. There
the averaged truncations behave like v + c / R, so a short schedule with
16 nodes per axis is used and each consecutive pair of estimates is
extrapolated to R = infinity before taking the mean and spread.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .angles import enumerate_taut_in_component
from .special import log_gamma

DEFAULT_RADII = (25.0, 50.0, 100.0, 200.0)
# tolerance for the spread diagnostic (window of the last three radii)
DEFAULT_TOL = 5e-3
DEFAULT_H = 1.0
DEFAULT_P = 24
DEFAULT_RADII_3D = (15.0, 20.0, 25.0, 30.0)
DEFAULT_P_3D = 16
LOG_CUTOFF = math.log(1e-17)


@dataclass(frozen=True)
class MBIntegrand:
    """Affine forms a + x . L per tetrahedron; x has N-1 components."""
    a1: np.ndarray  # N constants (first +1 quad)
    a2: np.ndarray  # N constants (second +1 quad)
    l1: np.ndarray  # (N-1) x N
    l2: np.ndarray  # (N-1) x N
    power: np.ndarray = None  # exponent of each beta factor (default 1)

    @property
    def dim(self):
        return self.l1.shape[0]

    def log_values(self, x):
        """log of the integrand at points x (shape (..., dim))."""
        x = np.asarray(x, dtype=float)
        u = x @ self.l1
        v = x @ self.l2
        A = self.a1 + 1j * u
        B = self.a2 + 1j * v
        lb = log_gamma(A) + log_gamma(B) - log_gamma(A + B)
        p = np.ones(self.a1.shape) if self.power is None else self.power
        return lb @ p

    def __call__(self, x):
        return np.exp(self.log_values(x))

    def log_bound(self, x):
        """Asymptotic log-magnitude used to discard negligible cells."""
        x = np.asarray(x, dtype=float)
        u = x @ self.l1
        v = x @ self.l2
        a, b = self.a1, self.a2
        m = (-0.5 * np.pi * (np.abs(u) + np.abs(v) - np.abs(u + v))
             + (a - 0.5) * np.log1p(np.abs(u)) + (b - 0.5) * np.log1p(np.abs(v))
             - (a + b - 0.5) * np.log1p(np.abs(u + v)))
        p = np.ones(self.a1.shape) if self.power is None else self.power
        return m @ p

    def cell_bound(self, centre, half):
        """Upper bound of log_bound over the boxes centre +- half (power part at the centre).

        The exponential part is -pi sum_T min(|u|, |v|) over tetrahedra
        whose two forms have opposite signs. Over a box each form ranges in
        an interval, and the minimum is bounded using those intervals.
        """
        centre = np.asarray(centre, dtype=float)
        u = centre @ self.l1
        v = centre @ self.l2
        ru = half * np.abs(self.l1).sum(axis=0)
        rv = half * np.abs(self.l2).sum(axis=0)
        # smallest |u| and |v| over the box when the sign is fixed, else 0
        ulo = np.maximum(np.abs(u) - ru, 0.0)
        vlo = np.maximum(np.abs(v) - rv, 0.0)
        opposite = (u * v < 0) & (ulo > 0) & (vlo > 0)
        expo = -np.pi * np.where(opposite, np.minimum(ulo, vlo), 0.0)
        a, b = self.a1, self.a2
        power = ((a - 0.5) * np.log1p(np.abs(u)) + (b - 0.5) * np.log1p(np.abs(v))
                 - (a + b - 0.5) * np.log1p(np.abs(u + v)))
        p = np.ones(self.a1.shape) if self.power is None else self.power
        return (expo + power) @ p


def build_integrand(tri, signs, a):
    """MB integrand of a taut sign vector for the strict angle structure a."""
    N = tri.N
    signs = np.asarray(signs)
    a = np.asarray(a, dtype=float)
    q1, q2 = [], []
    for t in range(N):
        plus = [k * N + t for k in range(3) if signs[k * N + t] > 0]
        if len(plus) != 2:
            raise ValueError(f"tetrahedron {t} must have exactly one -1")
        q1.append(plus[0])
        q2.append(plus[1])
    Ls = tri.Lstar.astype(float)
    return MBIntegrand(a[q1], a[q2], Ls[:, q1], Ls[:, q2])


def integrand_from_forms(forms, dim):
    """Integrand from explicit beta factors [(c1, v1, c2, v2, power), ...].

    Each factor is B(c1 + v1 . s, c2 + v2 . s)^power with s = i x.
    """
    a1 = np.array([f[0] for f in forms], dtype=float)
    a2 = np.array([f[2] for f in forms], dtype=float)
    l1 = np.array([f[1] for f in forms], dtype=float).T.reshape(dim, len(forms))
    l2 = np.array([f[3] for f in forms], dtype=float).T.reshape(dim, len(forms))
    p = np.array([f[4] if len(f) > 4 else 1 for f in forms], dtype=float)
    return MBIntegrand(a1, a2, l1, l2, p)


@dataclass
class MBResult:
    value: float
    spread: float
    converged: bool
    radii: tuple
    estimates: tuple
    nodes: int
    imag: float = 0.0
    extra: dict = field(default_factory=dict)


def _gauss(p):
    x, w = np.polynomial.legendre.leggauss(p)
    return 0.5 * (x + 1), 0.5 * w


def window(r, R, kind):
    """Weight on |x| = r whose integral equals an average of ball truncations.

    "cesaro" averages the truncations over radii in [0, R], "tail" over
    [R/2, R] and "smooth" over [R/2, R] with a raised-cosine density.
    """
    if kind == "cesaro":
        return np.clip(1 - r / R, 0, None)
    s = np.clip(2 * (1 - r / R), 0, 1)  # 1 at r <= R/2, 0 at r >= R
    if kind == "tail":
        return s
    if kind == "smooth":
        return s - np.sin(2 * np.pi * s) / (2 * np.pi)
    raise ValueError(f"unknown window {kind!r}")


def default_schedule(d):
    """(radii, nodes per axis) used when none are given for dimension d."""
    if d >= 3:
        return DEFAULT_RADII_3D, DEFAULT_P_3D
    return DEFAULT_RADII, DEFAULT_P


def extrapolate_pairs(radii, estimates):
    """Limits of v + c / R through consecutive pairs (R_j-1, E_j-1), (R_j, E_j)."""
    R = np.asarray(radii, dtype=float)
    E = np.asarray(estimates, dtype=float)
    return (R[1:] * E[1:] - R[:-1] * E[:-1]) / (R[1:] - R[:-1])


def mb_integral(f, radii=None, h=DEFAULT_H, p=None, tol=DEFAULT_TOL,
                batch=400000, kind="smooth", half=True, extrapolate=None):
    """Radius-averaged principal value of (2 pi)^-d int f(x) dx.

    The cube [-R, R]^d (R = max radius) is cut into cells of side h, each
    carrying a p^d Gauss-Legendre rule. Cells whose asymptotic magnitude is
    below 1e-17 of the peak are skipped. For every radius R_j the radial
    weight window(|x|, R_j, kind) is applied, which equals an average of the
    ball truncations. The value is the mean of the last three estimates and
    the spread is their range.

    Since f(-x) is the conjugate of f(x) and the grid is symmetric about 0,
    by default only the half-space x_1 > 0 is evaluated. With half=False
    the whole cube is used and the largest imaginary part of the last three
    estimates is reported, which checks that symmetry.

    With extrapolate=True the value and spread are taken over the two
    pairwise 1/R extrapolations of the last three estimates instead.
    radii and p default to default_schedule(f.dim), and extrapolation is
    on by default in three or more dimensions.
    """
    d = f.dim
    if radii is None:
        radii = default_schedule(d)[0]
    if p is None:
        p = default_schedule(d)[1]
    if extrapolate is None:
        extrapolate = d >= 3
    radii = tuple(float(r) for r in radii)
    if len(radii) < 3 or list(radii) != sorted(radii):
        raise ValueError("need at least three increasing radii")
    Rmax = radii[-1]
    half_n = int(math.ceil(Rmax / h))
    n = 2 * half_n
    edges = h * (np.arange(n + 1) - half_n)
    g, w = _gauss(p)
    mesh = np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1).reshape(-1, d) * h
    wloc = np.prod(np.stack(np.meshgrid(*([w] * d), indexing="ij"), axis=-1).reshape(-1, d), axis=1) * h ** d
    margin = 5.0  # slack for the power part, which is taken at the cell centre
    peak = float(f.log_bound(np.zeros(d)))
    sums = np.zeros(len(radii), dtype=complex)
    nodes = 0
    other = (np.stack(np.meshgrid(*([np.arange(n)] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
             if d > 1 else np.zeros((1, 0), dtype=int))
    pending = []
    pending_n = 0

    def flush():
        nonlocal nodes
        if not pending:
            return
        cells = np.concatenate(pending)
        step = max(1, batch // len(wloc))
        for k in range(0, len(cells), step):
            lo = cells[k:k + step]
            pts = (lo[:, None, :] + mesh[None, :, :]).reshape(-1, d)
            ww = np.tile(wloc, len(lo))
            r = np.linalg.norm(pts, axis=1)
            vals = f(pts) * ww
            for j, R in enumerate(radii):
                sums[j] += np.sum(vals * window(r, R, kind))
            nodes += len(pts)
        pending.clear()

    for i0 in range(half_n if half else 0, n):
        lo = edges[np.hstack([np.full((len(other), 1), i0), other])]
        centre = lo + 0.5 * h
        keep = np.linalg.norm(centre, axis=1) <= Rmax + 0.5 * h * math.sqrt(d)
        lo, centre = lo[keep], centre[keep]
        if not len(lo):
            continue
        keep = f.cell_bound(centre, 0.5 * h) + margin > peak + LOG_CUTOFF
        lo = lo[keep]
        if len(lo):
            pending.append(lo)
            pending_n += len(lo) * len(wloc)
        if pending_n >= batch:
            flush()
            pending_n = 0
    flush()
    full = (2 * sums.real if half else sums) * (2 * math.pi) ** (-d)
    est = full.real
    last = extrapolate_pairs(radii[-3:], est[-3:]) if extrapolate else est[-3:]
    value = float(np.mean(last))
    spread = float(np.max(last) - np.min(last))
    imag = 0.0 if half else float(np.max(np.abs(full[-3:].imag)))
    return MBResult(value, spread, spread <= tol, radii, tuple(float(e) for e in est),
                    2 * nodes if half else nodes, imag)


@dataclass
class BetaResult:
    total: float | None
    terms: list
    defined: bool


def mb_for_taut(tri, a, signs, **kw):
    return mb_integral(build_integrand(tri, signs, a), **kw)


def beta_invariant(tri, a, **kw):
    """Sum of MB integrals over the taut structures in the geometric component."""
    terms = []
    for s in enumerate_taut_in_component(tri, a):
        res = mb_for_taut(tri, a, s, **kw)
        terms.append((s, res))
    defined = all(r.converged for _, r in terms)
    total = sum(r.value for _, r in terms) if defined else None
    return BetaResult(total, terms, defined)


# ------------------------------------------------------ pentagon identities


def _line_integral(logf, centres=(0.0,), width=1.0, ratio=2 ** 0.25, reach=64.0, tail_panels=32):
    """(1/2 pi) int_R exp(logf(x)) dx for integrands decaying at least like x^-2.

    Panels are graded geometrically away from each centre (the points
    where a gamma argument comes closest to its poles), starting at
    width/1000, so peaks as narrow as the smallest real part are resolved.
    Beyond |x| = X the map x = X / t makes an x^-2 tail smooth in t. Every
    panel carries 8 Gauss-Legendre nodes.
    """
    g, w = np.polynomial.legendre.leggauss(8)
    centres = np.asarray(centres, dtype=float)
    X = reach + float(np.max(np.abs(centres)))
    x0 = min(width, 1.0) * 1e-3
    k = int(math.ceil(math.log(2 * X / x0) / math.log(ratio)))
    offs = np.concatenate([[0.0], x0 * ratio ** np.arange(k + 1)])
    brk = np.concatenate([c + sgn * offs for c in centres for sgn in (-1, 1)] + [[-X, X]])
    brk = np.unique(brk[(brk >= -X) & (brk <= X)])
    lo, hi = brk[:-1], brk[1:]
    x = (0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * g).reshape(-1)
    wx = (0.5 * (hi - lo)[:, None] * w).reshape(-1)
    t_edges = np.linspace(0.0, 1.0, tail_panels + 1)
    tl, th = t_edges[:-1], t_edges[1:]
    t = (0.5 * (tl + th)[:, None] + 0.5 * (th - tl)[:, None] * g).reshape(-1)
    wt = (0.5 * (th - tl)[:, None] * w).reshape(-1) * X / t ** 2
    pts = np.concatenate([x, X / t, -X / t])
    wts = np.concatenate([wx, wt, wt])
    return complex(np.sum(np.exp(logf(pts)) * wts)) / (2 * np.pi)


def _lg(z):
    return log_gamma(np.asarray(z, dtype=complex))


def _width(*params):
    return min(complex(p).real for p in params)


def _centres(plus, minus):
    # A + i x is closest to its poles at x = -Im A, B - i x at x = Im B
    return [-complex(p).imag for p in plus] + [complex(m).imag for m in minus]


def _positive(*params):
    if any(complex(p).real <= 0 for p in params):
        raise ValueError("all parameters need positive real part")


def barnes_pentagon_lhs(A1, A2, A3, B1, B2):
    """(1/2 pi i) int B(A1+s, B1-s) B(A2+s, B2-s) B(A3+s, A1+A2+B1+B2) ds over s = i x."""
    _positive(A1, A2, A3, B1, B2)
    C = A1 + A2 + B1 + B2

    def logf(x):
        s = 1j * x
        return (_lg(A1 + s) + _lg(B1 - s) - _lg(A1 + B1)
                + _lg(A2 + s) + _lg(B2 - s) - _lg(A2 + B2)
                + _lg(A3 + s) + _lg(C) - _lg(A3 + s + C))

    cs = _centres([A1, A2, A3, A3 + C], [B1, B2])
    return _line_integral(logf, cs, _width(A1, A2, A3, B1, B2))


def barnes_pentagon_rhs(A1, A2, A3, B1, B2):
    return complex(np.exp(_lg(A2 + B1) + _lg(A3 + B2) - _lg(A2 + B1 + A3 + B2)
                          + _lg(A1 + B2) + _lg(A3 + B1) - _lg(A1 + B2 + A3 + B1)))


def barnes_pentagon_check(A1, A2, A3, B1, B2):
    """|LHS - RHS| of the Barnes pentagon identity."""
    return abs(barnes_pentagon_lhs(A1, A2, A3, B1, B2) - barnes_pentagon_rhs(A1, A2, A3, B1, B2))


def bifurcated_integrals(A1, A2, A3, B1, B2, B3):
    """The two line integrals I1, I2 of the bifurcated pentagon identity."""
    _positive(A1, A2, A3, B1, B2, B3)

    def log1(x):
        s = 1j * x
        return (_lg(A1 + s) + _lg(B2 - s) + _lg(B3 - s)
                - _lg(1 - B1 + s) - _lg(1 - A2 - s) - _lg(1 - A3 - s))

    def log2(x):
        s = 1j * x
        return (_lg(B1 - s) + _lg(A2 + s) + _lg(A3 + s)
                - _lg(1 - A1 - s) - _lg(1 - B2 + s) - _lg(1 - B3 + s))

    wd = _width(A1, A2, A3, B1, B2, B3)
    c1 = _centres([A1, 1 - B1], [B2, B3, 1 - A2, 1 - A3])
    c2 = _centres([A2, A3, 1 - B2, 1 - B3], [B1, 1 - A1])
    return _line_integral(log1, c1, wd), _line_integral(log2, c2, wd)


def bifurcated_pentagon_check(A1, A2, A3, B1, B2, B3, tol=1e-12):
    """|Gamma(1-A1-B1)(I1 + I2) - RHS| of the bifurcated pentagon identity.

    The parameters must have positive real parts and sum to 1.
    """
    if abs(A1 + A2 + A3 + B1 + B2 + B3 - 1) > tol:
        raise ValueError("parameters must sum to 1")
    I1, I2 = bifurcated_integrals(A1, A2, A3, B1, B2, B3)
    lhs = np.exp(_lg(1 - A1 - B1)) * (I1 + I2)
    rhs = np.exp(_lg(A1 + B2) + _lg(A1 + B3) + _lg(A2 + B1) + _lg(A3 + B1)
                 - _lg(1 - A2 - B2) - _lg(1 - A2 - B3) - _lg(1 - A3 - B2) - _lg(1 - A3 - B3))
    return abs(complex(lhs - rhs))

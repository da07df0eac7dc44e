"""Angled ideal triangulations: JSON loading, derived matrices, Smith form.

Columns are ordered by quad type first and tetrahedron second,
i.e. (q_1..q_N, q'_1..q'_N, q''_1..q''_N).
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

ANGLE_TOL = 1e-9


class InputError(ValueError):
    """Malformed or inconsistent triangulation data."""


@dataclass(frozen=True)
class Triangulation:
    name: str
    N: int
    k: int
    G: np.ndarray | None  # N x 3N edge rows
    Gp: np.ndarray | None  # 2k x 3N peripheral rows
    L: np.ndarray
    Lp: np.ndarray
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def Lstar(self):
        return self.L[: self.N - 1]

    @property
    def has_gluing(self):
        return self.G is not None

    def require_gluing(self):
        if self.G is None:
            raise InputError(f"{self.name}: operation needs the gluing matrix G")

    def require_one_cusp(self):
        if self.k != 1:
            raise InputError(f"{self.name}: only one-cusped triangulations are supported")

    def tet_columns(self, t):
        return (t, self.N + t, 2 * self.N + t)


@dataclass(frozen=True)
class NormalForm:
    diag: tuple
    rank: int

    @property
    def pned(self):
        p = 1
        for d in self.diag:
            if d:
                p *= d
        return p


def derive_leading_trailing(G):
    """L = [G'' - G' | G - G'' | G' - G] for a matrix with blocks [G|G'|G'']."""
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[1] % 3:
        raise InputError("gluing matrix must have 3N columns")
    n = G.shape[1] // 3
    g0, g1, g2 = G[:, :n], G[:, n:2 * n], G[:, 2 * n:]
    return np.hstack([g2 - g1, g0 - g2, g1 - g0])


def _int_matrix(rows, what):
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InputError(f"{what}: must be a list of rows")
    if len({len(r) for r in rows}) > 1:
        raise InputError(f"{what}: rows have different lengths")
    for r in rows:
        for x in r:
            if isinstance(x, bool) or not isinstance(x, int):
                raise InputError(f"{what}: entries must be integers")
    return np.array(rows, dtype=np.int64).reshape(len(rows), -1)


def _seeds(raw, N):
    """Shape seeds given as lists of N [re, im] pairs."""
    out = []
    try:
        for seed in raw:
            z = np.array([complex(float(re), float(im)) for re, im in seed])
            if z.shape != (N,):
                raise InputError(f"each seed needs {N} shapes")
            out.append(z)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError("seeds must be lists of [re, im] pairs") from exc
    return out


def triangulation_from_dict(data):
    """Build and validate (Triangulation, a) from a parsed JSON object."""
    for key in ("name", "N", "a"):
        if key not in data:
            raise InputError(f"missing required key '{key}'")
    if "G" not in data and "L" not in data:
        raise InputError("one of 'G' or 'L' is required")
    name = str(data["name"])
    N = data["N"]
    k = data.get("k", 1)
    if not isinstance(N, int) or N < 2:
        raise InputError("N must be an integer >= 2")
    if not isinstance(k, int) or k < 1:
        raise InputError("k must be an integer >= 1")
    nrows = N + 2 * k

    def split(mat, what):
        mat = _int_matrix(mat, what)
        if mat.shape != (nrows, 3 * N):
            raise InputError(f"{what}: expected {nrows}x{3 * N}, got {mat.shape[0]}x{mat.shape[1]}")
        return mat[:N], mat[N:]

    G = Gp = None
    if "G" in data:
        G, Gp = split(data["G"], "G")
        bad = np.argwhere((G < 0) | (G > 2))
        if len(bad):
            j, c = bad[0]
            raise InputError(f"G entry ({j},{c}) on edge {j} is not in {{0,1,2}}")
        colsum = G.sum(axis=0)
        for c in range(3 * N):
            if colsum[c] != 2:
                raise InputError(f"G column {c} (tetrahedron {c % N}) has edge total {colsum[c]}, expected 2")
        L, Lp = derive_leading_trailing(G), derive_leading_trailing(Gp)
        if "L" in data:
            L2, Lp2 = split(data["L"], "L")
            if np.any(L2 != L) or np.any(Lp2 != Lp):
                raise InputError("supplied L disagrees with the one derived from G")
    else:
        L, Lp = split(data["L"], "L")

    for t in range(N):
        cols = [t, N + t, 2 * N + t]
        if np.any(L[:, cols].sum(axis=1)) or np.any(Lp[:, cols].sum(axis=1)):
            raise InputError(f"L rows do not vanish on tetrahedron {t}")
    if np.any(L.sum(axis=0)):
        raise InputError("rows of L do not sum to zero")

    extra = {}
    if "seeds" in data:
        extra["seeds"] = _seeds(data["seeds"], N)
    tri = Triangulation(name, N, k, G, Gp, L, Lp, extra)
    a = np.asarray(data["a"], dtype=float)
    if a.shape != (3 * N,):
        raise InputError(f"'a' must have {3 * N} entries")
    validate_angles(tri, a)
    return tri, a


def validate_angles(tri, a, strict=True):
    """Check the angle structure equations; raises InputError naming the failure."""
    N = tri.N
    for t in range(N):
        s = a[t] + a[N + t] + a[2 * N + t]
        if abs(s - 1) > ANGLE_TOL:
            raise InputError(f"angles of tetrahedron {t} sum to {s}, expected 1")
    if strict:
        for i, x in enumerate(a):
            if not 0 < x < 1:
                raise InputError(f"angle {i} (tetrahedron {i % N}) = {x} is not in (0,1)")
    if tri.G is not None:
        edge = tri.G @ a
        for j, e in enumerate(edge):
            if abs(e - 2) > ANGLE_TOL:
                raise InputError(f"angle sum around edge {j} is {e}, expected 2")


def peripheral_holonomy(tri, a):
    """(A_mu, A_lambda)/pi of an angle assignment; zero when peripherally trivial."""
    if tri.Gp is None:
        return None
    return tri.Gp @ a


def is_peripherally_trivial(tri, a, tol=ANGLE_TOL):
    h = peripheral_holonomy(tri, a)
    return h is not None and bool(np.all(np.abs(h) < tol))


def load_triangulation(path):
    """Load (Triangulation, a) from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    return triangulation_from_dict(data)


def fixture_path(name):
    """Path of a bundled example triangulation, e.g. fixture_path('4_1')."""
    return Path(str(resources.files("meroindex") / "data" / f"{name}.json"))


def load_fixture(name):
    return load_triangulation(fixture_path(name))


# ------------------------------------------------------- Smith normal form


def smith_decomposition(A):
    """Exact Smith decomposition U A V = D of an integer matrix.

    Returns (U, D, V) as lists of lists of Python integers; U and V are
    unimodular and D is diagonal with d_1 | d_2 | ... (zeros last).
    """
    M = [[int(x) for x in row] for row in np.asarray(A, dtype=object).tolist()]
    m = len(M)
    n = len(M[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):
        # row_dst += f * row_src
        M[dst] = [x + f * y for x, y in zip(M[dst], M[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for row in M:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    for r in range(min(m, n)):
        while True:
            piv = None
            for i in range(r, m):
                for j in range(r, n):
                    if M[i][j] and (piv is None or abs(M[i][j]) < abs(M[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                return U, M, V
            swap_rows(r, piv[0])
            swap_cols(r, piv[1])
            p = M[r][r]
            clean = True
            for i in range(r + 1, m):
                if M[i][r]:
                    add_row(i, r, -(M[i][r] // p))
                    clean = clean and M[i][r] == 0
            for j in range(r + 1, n):
                if M[r][j]:
                    add_col(j, r, -(M[r][j] // p))
                    clean = clean and M[r][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(r + 1, m) for j in range(r + 1, n) if M[i][j] % p), None)
            if bad is None:
                break
            add_row(r, bad, 1)
        if M[r][r] < 0:
            M[r] = [-x for x in M[r]]
            U[r] = [-x for x in U[r]]
    return U, M, V


def smith_normal_form(A):
    """Elementary divisors of an integer matrix, exact (Python integers)."""
    A = np.asarray(A, dtype=object)
    if A.size == 0:
        return NormalForm((), 0)
    _, D, _ = smith_decomposition(A)
    diag = tuple(D[i][i] for i in range(min(len(D), len(D[0]))) if D[i][i])
    return NormalForm(diag, len(diag))


def solve_integer_system(A, b):
    """One integer solution x of A x = b, or None when there is none."""
    A = np.asarray(A, dtype=object)
    U, D, V = smith_decomposition(A)
    m, n = A.shape
    c = [sum(U[i][j] * int(b[j]) for j in range(m)) for i in range(m)]
    y = [0] * n
    for i in range(m):
        d = D[i][i] if i < n else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d:
                return None
            y[i] = c[i] // d
    return [sum(V[i][j] * y[j] for j in range(n)) for i in range(n)]


def homology_order(tri):
    """Covering degree d_T = product of nonzero elementary divisors of L^T."""
    return smith_normal_form(tri.L.T).pned


def homology_report(tri):
    d = homology_order(tri)
    odd = d
    while odd % 2 == 0:
        odd //= 2
    return {"d_T": d, "odd_factor": odd != 1}

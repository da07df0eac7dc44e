"""Offline fixture generator: decode a Regina isomorphism signature and build
the gluing matrix of the ideal triangulation it describes.

Not part of the installed package. The census fixtures under
``src/meroindex/data`` were produced with this script; the library itself
never parses signatures.

Usage: fixturegen.py NAME SIG OUT [TET FACE]  (optional 2-3 move first)
"""
from __future__ import annotations

import itertools
import json
import sys
from fractions import Fraction

import numpy as np

_ALPHABET = (
    "abcdefghijklmnopqrstuvwxyz"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "0123456789+-"
)
_S4 = list(itertools.permutations(range(4)))  # lexicographic, as Regina's orderedS4


def _val(ch: str) -> int:
    return _ALPHABET.index(ch)


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def decode_isosig(sig: str):
    """Return (n, gluings) with gluings[t][f] = (dest, perm) or None."""
    pos = 0
    first = _val(sig[pos])
    pos += 1
    if first < 63:
        n, nchars = first, 1
    else:
        nchars = _val(sig[pos])
        pos += 1
        n = 0
        for i in range(nchars):
            n |= _val(sig[pos + i]) << (6 * i)
        pos += nchars

    actions = []
    nfacets = 0
    njoins = 0
    while nfacets < 4 * n:
        v = _val(sig[pos])
        pos += 1
        for j in range(3):
            trit = (v >> (2 * j)) & 3
            if nfacets == 4 * n:
                continue
            actions.append(trit)
            if trit == 0:
                nfacets += 1
            else:
                nfacets += 2
                njoins += 1

    dests = []
    for act in actions:
        if act == 2:
            d = 0
            for i in range(nchars):
                d |= _val(sig[pos + i]) << (6 * i)
            pos += nchars
            dests.append(d)
    # joins to a fresh simplex use the identity; only joins back to a
    # previously seen simplex carry an explicit permutation
    perms = []
    for act in actions:
        if act == 2:
            perms.append(_S4[_val(sig[pos])])
            pos += 1
    if pos != len(sig):
        raise ValueError("trailing characters in signature")

    glu = [[None] * 4 for _ in range(n)]
    next_unused = 0
    ia = idst = 0
    for t in range(n):
        for f in range(4):
            if glu[t][f] is not None:
                continue
            act = actions[ia]
            ia += 1
            if act == 0:
                continue
            if act == 1:
                next_unused += 1
                dest = next_unused
                p = (0, 1, 2, 3)
            else:
                dest = dests[idst]
                p = perms[idst]
                idst += 1
            glu[t][f] = (dest, p)
            inv = [0] * 4
            for i in range(4):
                inv[p[i]] = i
            glu[dest][p[f]] = (t, tuple(inv))
    return n, glu


_QUAD_OF_EDGE = {
    frozenset((0, 1)): 0, frozenset((2, 3)): 0,
    frozenset((0, 2)): 1, frozenset((1, 3)): 1,
    frozenset((0, 3)): 2, frozenset((1, 2)): 2,
}


def orientations(n, glu):
    orient = [0] * n
    orient[0] = 1
    stack = [0]
    while stack:
        t = stack.pop()
        for f in range(4):
            if glu[t][f] is None:
                continue
            d, p = glu[t][f]
            want = -_perm_sign(p) * orient[t]
            if orient[d] == 0:
                orient[d] = want
                stack.append(d)
            elif orient[d] != want:
                raise ValueError("non-orientable triangulation")
    return orient


def quad_column(n, orient, t, q):
    """Block-ordered column of tetrahedron t, local quad q."""
    # local quads 0,1,2 sit on edges {01,23}, {02,13}, {03,12}; a negatively
    # labelled tetrahedron swaps the roles of the last two
    slot = q if orient[t] > 0 else (0, 2, 1)[q]
    return slot * n + t


def edge_classes(n, glu):
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in range(n):
        for f in range(4):
            if glu[t][f] is None:
                continue
            d, p = glu[t][f]
            others = [v for v in range(4) if v != f]
            for i, j in itertools.combinations(others, 2):
                a = find((t, frozenset((i, j))))
                b = find((d, frozenset((p[i], p[j]))))
                parent[a] = b
    classes = {}
    for t in range(n):
        for e in itertools.combinations(range(4), 2):
            classes.setdefault(find((t, frozenset(e))), []).append((t, frozenset(e)))
    return list(classes.values())


def gluing_rows(n, glu, orient):
    rows = []
    for members in edge_classes(n, glu):
        row = [0] * (3 * n)
        for t, e in members:
            row[quad_column(n, orient, t, _QUAD_OF_EDGE[e])] += 1
        rows.append(row)
    return rows


def _cusp_cycles(n, glu, orient):
    """Closed normal curves on the vertex link, one per non-tree dual edge."""
    tris = [(t, v) for t in range(n) for v in range(4)]
    # side of triangle (t, v) lying in face w of t
    adj = {}
    for t, v in tris:
        for w in range(4):
            if w == v:
                continue
            d, p = glu[t][w]
            adj[(t, v, w)] = (d, p[v], p[w])
    # BFS spanning tree of the dual graph
    root = tris[0]
    parent = {root: None}
    order = [root]
    for tri in order:
        t, v = tri
        for w in range(4):
            if w == v:
                continue
            d, dv, dw = adj[(t, v, w)]
            if (d, dv) not in parent:
                parent[(d, dv)] = (t, v, w)
                order.append((d, dv))

    def path_to_root(tri):
        # list of crossings (t, v, w_exit) from root to tri
        steps = []
        while parent[tri] is not None:
            t, v, w = parent[tri]
            steps.append((t, v, w))
            tri = (t, v)
        return steps[::-1]

    seen = set()
    cycles = []
    for t, v in tris:
        for w in range(4):
            if w == v:
                continue
            d, dv, dw = adj[(t, v, w)]
            if parent.get((d, dv)) == (t, v, w) or parent.get((t, v)) == (d, dv, dw):
                continue
            key = frozenset([(t, v, w), (d, dv, dw)])
            if key in seen:
                continue
            seen.add(key)
            up = path_to_root((t, v))
            down = path_to_root((d, dv))
            while up and down and up[0] == down[0]:
                up.pop(0)
                down.pop(0)
            # loop: root -> (t,v) -> cross face w -> (d,dv) -> back to root
            seq = list(up) + [(t, v, w)]
            back = []
            for s in reversed(down):
                st, sv, sw = s
                back.append(adj[(st, sv, sw)])
            seq += back
            cycles.append(seq)
    return cycles, adj


def _curve_row(n, orient, seq, adj):
    """Signed corner-turning coefficients of a closed curve."""
    row = [0] * (3 * n)
    m = len(seq)
    for i in range(m):
        t, v, w_out = seq[i]
        pt, pv, pw = seq[i - 1]
        dt, dv, w_in = adj[(pt, pv, pw)]
        assert (dt, dv) == (t, v)
        if w_in == w_out:
            raise ValueError("curve backtracks")
        w_c = ({0, 1, 2, 3} - {v, w_in, w_out}).pop()
        ccw = _perm_sign((v, w_in, w_out, w_c)) * orient[t]
        sign = -1 if ccw > 0 else 1
        q = _QUAD_OF_EDGE[frozenset((v, w_c))]
        row[quad_column(n, orient, t, q)] += sign
    return row


def nz_form(n, r1, r2):
    r1 = np.asarray(r1)
    r2 = np.asarray(r2)
    u1 = r1[:n] - r1[2 * n:]
    v1 = r1[n:2 * n] - r1[2 * n:]
    u2 = r2[:n] - r2[2 * n:]
    v2 = r2[n:2 * n] - r2[2 * n:]
    return int(u1 @ v2 - v1 @ u2)


def peripheral_basis(n, glu, orient):
    cycles, adj = _cusp_cycles(n, glu, orient)
    rows = [_curve_row(n, orient, seq, adj) for seq in cycles]
    # pick a reference pair with non-zero pairing, then reduce the lattice of
    # coordinate vectors to an integral basis
    ref = None
    for i, j in itertools.combinations(range(len(rows)), 2):
        if nz_form(n, rows[i], rows[j]) != 0:
            ref = (i, j)
            break
    if ref is None:
        raise ValueError("no independent peripheral curves found")
    a, b = rows[ref[0]], rows[ref[1]]
    coords = [(nz_form(n, r, b), nz_form(n, a, r)) for r in rows]
    # extended gcd reduction on the 2-column coordinate lattice
    vecs = [(np.array(c, dtype=object), np.array(r, dtype=object)) for c, r in zip(coords, rows)]
    basis = _lattice_basis(vecs)
    mu, lam = basis
    form = nz_form(n, mu[1], lam[1])
    if abs(form) != 2:
        raise ValueError(f"peripheral pairing {form}, expected +-2")
    if form < 0:
        lam = (-lam[0], -lam[1])
    return [list(map(int, mu[1])), list(map(int, lam[1]))]


def _lattice_basis(vecs):
    """Hermite-style reduction of (coord, payload) pairs to a 2-element basis."""
    vecs = [v for v in vecs]
    out = []
    for col in range(2):
        while True:
            nz = [v for v in vecs if v[0][col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda v: abs(v[0][col]))
            piv = nz[0]
            new = [piv]
            for v in vecs:
                if v is piv:
                    continue
                if v[0][col] != 0:
                    k = v[0][col] // piv[0][col]
                    v = (v[0] - k * piv[0], v[1] - k * piv[1])
                new.append(v)
            vecs = new
        nz = [v for v in vecs if v[0][col] != 0]
        if not nz:
            raise ValueError("rank deficient")
        out.append(nz[0])
        vecs = [v for v in vecs if v is not nz[0]]
    return out


def pachner_23(n, glu, t, f):
    """Replace tetrahedra t and its neighbour across face f by three."""
    d, p = glu[t][f]
    if d == t:
        raise ValueError("face glued to its own tetrahedron")
    xs = [v for v in range(4) if v != f]
    keep = [s for s in range(n) if s not in (t, d)]
    index = {s: i for i, s in enumerate(keep)}
    base = len(keep)

    # (old tet, old face) -> (new tet, vertex relabelling of the old tet)
    relabel = {}
    for i in range(3):
        xi, xj, xk = xs[i], xs[(i + 1) % 3], xs[(i + 2) % 3]
        phi_t = [0] * 4
        phi_t[f], phi_t[xj], phi_t[xk], phi_t[xi] = 0, 2, 3, 1
        relabel[(t, xi)] = (base + i, tuple(phi_t))
        phi_d = [0] * 4
        phi_d[p[f]], phi_d[p[xj]], phi_d[p[xk]], phi_d[p[xi]] = 1, 2, 3, 0
        relabel[(d, p[xi])] = (base + i, tuple(phi_d))

    def target(tet, face):
        if (tet, face) in relabel:
            return relabel[(tet, face)]
        return index[tet], (0, 1, 2, 3)

    new = [[None] * 4 for _ in range(base + 3)]
    for a in range(n):
        for face in range(4):
            if glu[a][face] is None:
                continue
            if (a, face) in ((t, f), (d, p[f])):
                continue
            b, q = glu[a][face]
            na, pa = target(a, face)
            nb, pb = target(b, q[face])
            inv_a = [0] * 4
            for v in range(4):
                inv_a[pa[v]] = v
            perm = tuple(pb[q[inv_a[v]]] for v in range(4))
            new[na][pa[face]] = (nb, perm)
    for i in range(3):
        j = (i + 2) % 3
        new[base + i][3] = (base + j, (0, 1, 3, 2))
        new[base + j][2] = (base + i, (0, 1, 3, 2))
    return base + 3, new


def build(sig: str, move=None):
    n, glu = decode_isosig(sig)
    if move is not None:
        n, glu = pachner_23(n, glu, *move)
    orient = orientations(n, glu)
    G = gluing_rows(n, glu, orient)
    if len(G) != n:
        raise ValueError(f"{len(G)} edge classes for {n} tetrahedra")
    Gp = peripheral_basis(n, glu, orient)
    return n, G, Gp


def strict_angles(n, G, Gp):
    """A strict, peripherally trivial angle structure maximising the minimum angle."""
    from scipy.optimize import linprog

    m = 3 * n
    # variables: a (3N), s ; maximise s subject to a >= s
    A_eq, b_eq = [], []
    for row in G:
        A_eq.append(list(row) + [0])
        b_eq.append(2)
    for row in Gp:
        A_eq.append(list(row) + [0])
        b_eq.append(0)
    for t in range(n):
        r = [0] * (m + 1)
        r[t] = r[n + t] = r[2 * n + t] = 1
        A_eq.append(r)
        b_eq.append(1)
    A_ub = []
    for i in range(m):
        r = [0] * (m + 1)
        r[i] = -1
        r[m] = 1
        A_ub.append(r)
    c = [0] * m + [-1]
    res = linprog(c, A_ub=A_ub, b_ub=[0] * m, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, 1)] * m + [(0, 1)], method="highs")
    if not res.success or res.x[m] <= 1e-9:
        raise ValueError("no strict angle structure")
    # snap to rationals with small denominators and re-verify exactly
    for den in range(1, 400):
        fr = [Fraction(round(x * den), den) for x in res.x[:m]]
        if all(0 < f < 1 for f in fr) and _exact_ok(n, G, Gp, fr):
            return [float(f) for f in fr]
    return [float(x) for x in res.x[:m]]


def _exact_ok(n, G, Gp, fr):
    for row in G:
        if sum(c * f for c, f in zip(row, fr)) != 2:
            return False
    for row in Gp:
        if sum(c * f for c, f in zip(row, fr)) != 0:
            return False
    return all(fr[t] + fr[n + t] + fr[2 * n + t] == 1 for t in range(n))


def main(argv):
    name, sig, out = argv[1], argv[2], argv[3]
    move = (int(argv[4]), int(argv[5])) if len(argv) > 5 else None
    n, G, Gp = build(sig, move)
    a = strict_angles(n, G, Gp)
    data = {"name": name, "N": n, "k": 1, "G": G + Gp, "a": a}
    with open(out, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main(sys.argv)

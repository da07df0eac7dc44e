import math

import numpy as np
import pytest

from meroindex.geometry import NumericalError, cusp_shape, newton_gluing
from meroindex.tau import (amplitude, angle_system, contribution, find_integer_angle_structure,
                           lifted_angles, one_loop, tau)

GEOMETRIC_TAU = {
    "4_1": 3 ** -0.75,
    "5_2": 0.3527963427,
    "m011": 0.188233922367388,
    "6_1": 0.2445989349486,
    "7_2": 0.16264170908787,
}
SEEDS = {
    "6_1": ([-0.54742379 - 1.12087349j, -0.92795816 + 0.41332694j,
             0.39512338 + 0.5068439j, 0.39512338 + 0.5068439j], 0.143746443341),
    "7_2": ([0.4412363 + 0.64570276j, 0.76632315 + 0.88555676j,
             0.4412363 + 0.64570276j, 0.54732943 - 0.32996099j], 0.176853150149),
}


@pytest.mark.parametrize("name", sorted(GEOMETRIC_TAU))
def test_geometric_tau(name, fixtures, geometric):
    tri, _ = fixtures[name]
    sol, _ = geometric[name]
    tol = 1e-12 if name == "4_1" else 1e-8
    assert tau(tri, sol).tau == pytest.approx(GEOMETRIC_TAU[name], abs=tol)


@pytest.mark.parametrize("name", sorted(SEEDS))
def test_non_geometric_tau(name, fixtures):
    tri, _ = fixtures[name]
    seed, want = SEEDS[name]
    sol = newton_gluing(tri, seed)
    assert tau(tri, sol).tau == pytest.approx(want, abs=1e-8)


def test_fig8_closed_form(fixtures, geometric):
    tri, _ = fixtures["4_1"]
    rep = tau(tri, geometric["4_1"][0])
    # det of the 1x1 Hessian is 4 cot(pi/3) = 4/sqrt 3 and all sines are equal
    assert rep.tau1 == pytest.approx(math.sqrt(3) / 12, rel=1e-13)
    assert rep.tau == pytest.approx(math.sqrt(rep.tau1 * rep.tau2), rel=1e-13)


@pytest.mark.parametrize("name", sorted(GEOMETRIC_TAU))
def test_gauge_invariance(name, fixtures, geometric, rng):
    tri, _ = fixtures[name]
    sol, _ = geometric[name]
    beta = lifted_angles(tri, sol.omega)
    base = tau(tri, sol, beta).tau
    for _ in range(100):
        t = rng.normal(scale=2.0, size=tri.N - 1)
        shifted = beta + t @ tri.Lstar
        assert tau(tri, sol, shifted).tau == pytest.approx(base, rel=1e-12)


def test_gauge_invariance_non_geometric(fixtures, rng):
    tri, _ = fixtures["7_2"]
    sol = newton_gluing(tri, SEEDS["7_2"][0])
    beta = lifted_angles(tri, sol.omega)
    base = tau(tri, sol, beta).tau
    for _ in range(20):
        t = rng.normal(size=tri.N - 1)
        assert tau(tri, sol, beta + t @ tri.Lstar).tau == pytest.approx(base, rel=1e-10)


def test_lifted_angles_solve_angle_equations(fixtures, geometric):
    for name, (tri, _) in fixtures.items():
        sol, _ = geometric[name]
        beta = lifted_angles(tri, sol.omega)
        assert np.allclose(np.exp(1j * beta), sol.omega)
        N = tri.N
        want = np.concatenate([np.pi * np.ones(N), 2 * np.pi * np.ones(N), np.zeros(2)])
        assert np.allclose(angle_system(tri) @ beta, want)


def test_pachner_invariance(fixtures, geometric):
    two = tau(fixtures["4_1"][0], geometric["4_1"][0]).tau
    three = tau(fixtures["4_1_3tet"][0], geometric["4_1_3tet"][0]).tau
    assert three == pytest.approx(two, abs=1e-9)


def test_integer_angle_structure(fixtures):
    for tri, _ in fixtures.values():
        f = find_integer_angle_structure(tri)
        N = tri.N
        assert np.array_equal(angle_system(tri) @ f, [1] * N + [2] * N + [0, 0])


@pytest.mark.parametrize("name", sorted(GEOMETRIC_TAU) + ["4_1_3tet"])
def test_tau_one_loop_relation(name, fixtures, geometric):
    tri, _ = fixtures[name]
    sol, _ = geometric[name]
    sigma = cusp_shape(tri, sol)
    lhs = tau(tri, sol).tau
    rhs = 1 / (math.sqrt(2 * abs(sigma.imag)) * abs(one_loop(tri, sol)))
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_one_loop_fig8(fixtures, geometric):
    tri, _ = fixtures["4_1"]
    assert abs(one_loop(tri, geometric["4_1"][0])) == pytest.approx(math.sqrt(3) / 2, rel=1e-12)


def test_one_loop_relabel_invariance(fixtures, geometric):
    from meroindex.trimesh import triangulation_from_dict
    tri, a = fixtures["5_2"]
    sol, _ = geometric["5_2"]
    N = tri.N
    perm = [2, 0, 1]
    cols = [q * N + perm[t] for q in range(3) for t in range(N)]
    data = {"name": "perm", "N": N, "k": 1,
            "G": np.vstack([tri.G, tri.Gp])[:, cols].tolist(), "a": a[cols].tolist()}
    tri2, _ = triangulation_from_dict(data)
    sol2 = newton_gluing(tri2, sol.z[cols][:N])
    assert abs(one_loop(tri2, sol2)) == pytest.approx(abs(one_loop(tri, sol)), rel=1e-10)


def test_real_shapes_rejected(fixtures):
    tri, _ = fixtures["7_2"]
    sol = newton_gluing(tri, [-0.713161, 0.583716, -0.713161, 0.788279])
    with pytest.raises(NumericalError):
        tau(tri, sol)


def test_contribution_and_amplitude():
    t = 3 ** -0.75
    assert amplitude(t) == pytest.approx(2 * math.sqrt(2 * math.pi) / 27 ** 0.25)
    k = np.array([10.0, 20.0])
    c = contribution(t, 2.0298832128193, 1, 1, k)
    assert np.allclose(c, amplitude(t) * np.sqrt(k) * np.cos(k * 2.0298832128193 + np.pi / 4))

import itertools
import json

import numpy as np
import pytest

from meroindex.stateint import (THREADS_ENV, ResourceError, default_threads, dumps17, emit_result,
                                integrand, integrate, tabulate)


def direct_sum(tri, a, hbar, S):
    """Plain Riemann sum of the integrand over the grid t_j = 2 pi n_j / S."""
    from meroindex.special import c_q
    N = tri.N
    acc = 0j
    for n in itertools.product(range(1, S + 1), repeat=N - 1):
        acc += integrand(tri, a, hbar, 2 * np.pi * np.array(n) / S)
    return c_q(np.exp(hbar)) ** N * acc / S ** (N - 1)


@pytest.mark.parametrize("name, S", [("4_1", 64), ("5_2", 24), ("m011", 20)])
def test_matches_direct_sum(name, S, fixtures):
    tri, a = fixtures[name]
    hbar = -0.4 + 0.05j
    got = integrate(tri, a, hbar, S).value
    want = direct_sum(tri, a, hbar, S)
    assert abs(got - want) <= 1e-12 * max(1, abs(want))


def test_fig8_reference_value(fixtures):
    tri, a = fixtures["4_1"]
    res = integrate(tri, a, -0.25, 20000)
    assert res.value.real == pytest.approx(-3.620796017083117, abs=1e-8)
    assert abs(res.value.imag) < 1e-10


def test_grid_convergence(fixtures):
    tri, a = fixtures["4_1"]
    v1 = integrate(tri, a, -0.5, 2000).value
    v2 = integrate(tri, a, -0.5, 4000).value
    assert abs(v1 - v2) < 1e-12


def test_threads_bitwise_identical(fixtures):
    tri, a = fixtures["m011"]
    tab = tabulate(tri, a, -0.3, 1500)
    one = integrate(tri, a, -0.3, 1500, threads=1, tab=tab).value
    four = integrate(tri, a, -0.3, 1500, threads=4, tab=tab).value
    assert one == four


def test_eval_cap(fixtures):
    tri, a = fixtures["5_2"]
    with pytest.raises(ResourceError):
        integrate(tri, a, -0.3, 1000, eval_cap=10 ** 5)


def test_rejects_bad_hbar(fixtures):
    tri, a = fixtures["4_1"]
    with pytest.raises(ValueError):
        integrate(tri, a, 0.1, 100)


def test_threads_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.setenv(THREADS_ENV, "junk")
    assert default_threads() == 1


def test_json_seventeen_digits(fixtures):
    tri, a = fixtures["4_1"]
    res = integrate(tri, a, -0.25, 500)
    text = emit_result(res, {"file": "4_1.json"})
    data = json.loads(text)
    assert set(data) == {"input", "output", "statistics"}
    assert set(data["statistics"]) == {"tabulation_seconds", "integration_seconds", "total_seconds", "samples"}
    assert data["output"]["real"] == res.value.real
    assert format(res.value.real, ".17g") in text


def test_dumps17_roundtrip():
    x = 0.1 + 0.2
    out = dumps17({"x": x, "n": 3, "s": "a", "l": [1.5, None], "nan": float("nan")})
    back = json.loads(out)
    assert back["x"] == x and back["n"] == 3 and back["l"] == [1.5, None] and back["nan"] is None
    assert "0.30000000000000004" in out

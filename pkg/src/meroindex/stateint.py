"""Riemann-sum evaluation of the meromorphic 3D-index state integral.

The integral over [0, 2 pi]^(N-1) is sampled at t_j = 2 pi n_j / S. Because
the leading-trailing vectors are integral, every G_q factor is evaluated at
exp((hbar + i pi) a) times an S-th root of unity, so each quad is tabulated
once and the sum only does table lookups.
"""

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .special import c_q, g_q

CHUNK = 4096
BLOCK_CHUNKS = 256
DEFAULT_EVAL_CAP = 10 ** 9
THREADS_ENV = "MEROINDEX_THREADS"


class ResourceError(RuntimeError):
    """Requested grid exceeds the configured evaluation cap."""


@dataclass(frozen=True)
class Tabulation:
    values: np.ndarray  # 3N x S
    q: complex
    cq: complex
    S: int


@dataclass(frozen=True)
class IndexResult:
    value: complex
    samples: int
    hbar: complex
    tabulation_seconds: float
    integration_seconds: float

    @property
    def total_seconds(self):
        return self.tabulation_seconds + self.integration_seconds


def default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def tabulate(tri, a, hbar, S):
    """G_q(exp((hbar + i pi) a(q)) zeta_S^n) for every quad and n = 0..S-1."""
    hbar = complex(hbar)
    if hbar.real >= 0:
        raise ValueError("Re hbar must be negative")
    if S < 1:
        raise ValueError("S must be positive")
    q = np.exp(hbar)
    roots = np.exp(2j * np.pi * np.arange(S) / S)
    base = np.exp((hbar + 1j * np.pi) * np.asarray(a, dtype=float))
    values = np.empty((len(base), S), dtype=complex)
    for i, b in enumerate(base):
        values[i] = g_q(b * roots, q)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("non-finite tabulated value")
    return Tabulation(values, complex(q), c_q(q), S)


def _merged_tables(Lstar, tab):
    """Multiply together tables of quads that share a column of L_* up to sign."""
    S = tab.S
    cols = {}
    const = 1.0 + 0j
    neg = (-np.arange(S)) % S
    for i in range(Lstar.shape[1]):
        c = tuple(int(x) for x in Lstar[:, i])
        if not any(c):
            const *= tab.values[i][S % S]
            continue
        mc = tuple(-x for x in c)
        if mc in cols:
            cols[mc] = cols[mc] * tab.values[i][neg]
        elif c in cols:
            cols[c] = cols[c] * tab.values[i]
        else:
            cols[c] = tab.values[i].copy()
    vecs = np.array(list(cols.keys()), dtype=np.int64).reshape(len(cols), Lstar.shape[0])
    return vecs, list(cols.values()), const


def _block_sums(start, stop, S, dims, vecs, tables):
    """Per-chunk sums of the integrand over flat grid indices [start, stop)."""
    flat = np.arange(start, stop, dtype=np.int64)
    digits = []
    rem = flat
    for _ in range(dims):
        rem, d = np.divmod(rem, S)
        digits.append(d + 1)  # n_j in 1..S; last axis varies fastest
    digits = digits[::-1]
    prod = None
    for v, table in zip(vecs, tables):
        idx = np.zeros_like(flat)
        for j in range(dims):
            if v[j]:
                idx += v[j] * digits[j]
        vals = table[idx % S]
        prod = vals if prod is None else prod * vals
    if prod is None:
        prod = np.ones(len(flat), dtype=complex)
    nfull = len(prod) // CHUNK
    out = []
    if nfull:
        out.extend(prod[: nfull * CHUNK].reshape(nfull, CHUNK).sum(axis=1))
    if len(prod) > nfull * CHUNK:
        out.append(prod[nfull * CHUNK:].sum())
    return out


def integrate(tri, a, hbar, S, threads=None, eval_cap=DEFAULT_EVAL_CAP, tab=None):
    """Riemann-sum value of the state integral with S samples per axis."""
    N = tri.N
    dims = N - 1
    total = S ** dims
    if total > eval_cap:
        raise ResourceError(f"S^(N-1) = {total} exceeds the evaluation cap {eval_cap}")
    threads = default_threads() if threads is None else max(1, int(threads))
    t0 = time.perf_counter()
    if tab is None:
        tab = tabulate(tri, a, hbar, S)
    t1 = time.perf_counter()
    vecs, tables, const = _merged_tables(tri.Lstar, tab)
    block = CHUNK * BLOCK_CHUNKS
    ranges = [(s, min(s + block, total)) for s in range(0, total, block)]

    def work(r):
        return _block_sums(r[0], r[1], S, dims, vecs, tables)

    if threads == 1 or len(ranges) == 1:
        parts = [work(r) for r in ranges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, ranges))
    partial = [x for p in parts for x in p]
    # fsum is exactly rounded, hence independent of chunk order and thread count
    acc = complex(math.fsum(x.real for x in partial), math.fsum(x.imag for x in partial))
    value = tab.cq ** N * const * acc / S ** dims
    t2 = time.perf_counter()
    return IndexResult(complex(value), S, complex(hbar), t1 - t0, t2 - t1)


def integrand(tri, a, hbar, t):
    """Direct evaluation of the state-integral integrand at a point t."""
    q = np.exp(complex(hbar))
    z = np.exp((complex(hbar) + 1j * np.pi) * np.asarray(a) + 1j * (np.asarray(t) @ tri.Lstar))
    return complex(np.prod(g_q(z, q)))


def _fmt(x):
    return format(float(x), ".17g")


def dumps17(obj, indent=1, _level=0):
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int, np.integer)):
        return json.dumps(obj if not isinstance(obj, np.integer) else int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return json.dumps(None)
        return _fmt(obj)
    if isinstance(obj, dict):
        items = [f"{pad}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}" if items else "{}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dumps17(v, indent, _level + 1) for v in obj]
        return "[" + ", ".join(items) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit_result(result, input_echo):
    """JSON text with input, output and statistics objects."""
    return dumps17({
        "input": input_echo,
        "output": {"real": result.value.real, "imag": result.value.imag},
        "statistics": {
            "tabulation_seconds": result.tabulation_seconds,
            "integration_seconds": result.integration_seconds,
            "total_seconds": result.total_seconds,
            "samples": result.samples,
        },
    })

"""Predicted large-kappa behaviour of the index and comparison with the integral.

A prediction is d_T times a linear term beta kappa plus one oscillatory term
sqrt(8 pi) tau sqrt(kappa) cos(kappa Vol + pi n / 4) per conjugate pair of
boundary-parabolic representations.
"""

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import critical_point, newton_gluing, solve_geometric
from .stateint import integrate
from .tau import tau as tau_invariant
from .trimesh import InputError, homology_order

SQRT_8PI = math.sqrt(8 * math.pi)


@dataclass(frozen=True)
class AsymptoticTerm:
    kind: str  # "linear" or "oscillatory"
    slope: float = 0.0
    amplitude: float = 0.0
    volume: float = 0.0
    n: int = 0
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("linear", "oscillatory"):
            raise InputError(f"unknown term kind {self.kind!r}")
        if self.kind == "oscillatory" and not self.amplitude > 0:
            raise InputError("oscillatory terms need a positive amplitude")

    def value(self, kappa):
        kappa = np.asarray(kappa, dtype=float)
        if self.kind == "linear":
            return self.slope * kappa
        return self.amplitude * np.sqrt(kappa) * np.cos(kappa * self.volume + np.pi * self.n / 4)

    def to_dict(self):
        if self.kind == "linear":
            return {"kind": "linear", "slope": self.slope}
        return {"kind": "oscillatory", "amplitude": self.amplitude,
                "volume": self.volume, "n": self.n}


def oscillatory_term(tau_value, volume, n, label=""):
    """Term of a conjugate pair with invariant tau and volume |Vol|."""
    return AsymptoticTerm("oscillatory", amplitude=SQRT_8PI * tau_value,
                          volume=abs(volume), n=int(n), label=label)


def linear_term(beta, label="beta"):
    return AsymptoticTerm("linear", slope=float(beta), label=label)


def predict(terms, d_T, kappa):
    """d_T (beta kappa + sqrt(8 pi) sum tau sqrt(kappa) cos(kappa Vol + pi n / 4))."""
    kappa = np.asarray(kappa, dtype=float)
    out = np.zeros_like(kappa)
    for t in terms:
        out = out + t.value(kappa)
    out = d_T * out
    return float(out) if out.ndim == 0 else out


def envelope(terms, d_T, kappa):
    """Sum of the oscillatory amplitudes at kappa, used to normalise residuals."""
    amp = sum(t.amplitude for t in terms if t.kind == "oscillatory")
    return d_T * amp * math.sqrt(kappa)


def load_terms(path):
    """Read a terms.json list of {kind, slope | amplitude, volume, n}."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    return terms_from_list(raw)


def terms_from_list(raw):
    if not isinstance(raw, list):
        raise InputError("terms must be a list")
    terms = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "kind" not in item:
            raise InputError(f"term {i} must be an object with a 'kind'")
        try:
            if item["kind"] == "linear":
                terms.append(linear_term(float(item["slope"])))
            elif item["kind"] == "oscillatory":
                terms.append(AsymptoticTerm("oscillatory", amplitude=float(item["amplitude"]),
                                            volume=float(item["volume"]), n=int(item["n"])))
            else:
                raise InputError(f"term {i}: unknown kind {item['kind']!r}")
        except KeyError as exc:
            raise InputError(f"term {i}: missing field {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"term {i}: bad value") from exc
    return terms


def representation_terms(tri, a, seeds=None):
    """Oscillatory terms of the geometric solution and of each shape seed.

    Seeds default to those stored with the triangulation. Solutions that
    repeat a volume and tau already seen (for instance a conjugate) are
    dropped, as are seeds that converge to real shapes.
    """
    sol, rep = solve_geometric(tri, a)
    terms = [oscillatory_term(tau_invariant(tri, sol).tau, rep.volume, rep.n_combined, "geometric")]
    seen = [(abs(rep.volume), terms[0].amplitude)]
    seeds = tri.extra.get("seeds", []) if seeds is None else seeds
    for i, z0 in enumerate(seeds):
        s = newton_gluing(tri, z0)
        if np.min(np.abs(s.z.imag)) < 1e-10:
            continue
        cp = critical_point(tri, s)
        t = oscillatory_term(tau_invariant(tri, s).tau, cp.volume, cp.n_combined, f"seed {i}")
        key = (abs(cp.volume), t.amplitude)
        if any(abs(key[0] - v) < 1e-8 and abs(key[1] - w) < 1e-8 for v, w in seen):
            continue
        seen.append(key)
        terms.append(t)
    return terms


@dataclass(frozen=True)
class ComparisonRow:
    kappa: float
    index: float
    prediction: float

    @property
    def residual(self):
        return self.index - self.prediction


def kappa_grid(kmin, kmax, step):
    """Inclusive grid kmin, kmin + step, ... <= kmax (empty when kmax < kmin)."""
    if step <= 0:
        raise InputError("kappa step must be positive")
    if kmax < kmin:
        return []
    n = int(math.floor((kmax - kmin) / step + 1e-9))
    return [kmin + i * step for i in range(n + 1)]


def compare(tri, a, terms, kappas, samples, d_T=None, threads=None, eval_cap=None):
    """Index values at hbar = -1/kappa against the prediction, one row per kappa."""
    if d_T is None:
        d_T = homology_order(tri)
    rows = []
    for kappa in sorted(kappas):
        if kappa <= 0:
            raise InputError("kappa must be positive")
        kw = {} if eval_cap is None else {"eval_cap": eval_cap}
        res = integrate(tri, a, -1.0 / kappa, samples, threads=threads, **kw)
        rows.append(ComparisonRow(float(kappa), res.value.real, predict(terms, d_T, kappa)))
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kappa", "index", "prediction", "residual"])
    for r in rows:
        w.writerow([format(x, ".17g") for x in (r.kappa, r.index, r.prediction, r.residual)])
    return buf.getvalue()


def max_envelope_ratio(rows, terms, d_T):
    """max over rows of |residual| / (amplitude sqrt(kappa))."""
    return max(abs(r.residual) / envelope(terms, d_T, r.kappa) for r in rows)

"""Command line front end: meroindex <subcommand> ...

Exit codes: 0 on success, 1 on bad input (including requests above the
evaluation cap), 2 on numerical failure. Errors
are written to stderr as a JSON object.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .angles import AmbiguityError, enumerate_taut_in_component
from .asymptotics import (compare, kappa_grid, linear_term, load_terms, predict,
                          representation_terms, rows_to_csv)
from .geometry import NumericalError, cusp_shape, solve_geometric
from .mellin import DEFAULT_H, DEFAULT_TOL, beta_invariant, mb_for_taut
from .special import DomainError
from .stateint import DEFAULT_EVAL_CAP, THREADS_ENV, ResourceError, default_threads, dumps17, emit_result, integrate
from .tau import one_loop, tau
from .trimesh import InputError, homology_report, is_peripherally_trivial, load_triangulation

log = logging.getLogger("meroindex")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message)}) + "\n")
    return code


def _out(text):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _complex_list(z):
    return [[float(x.real), float(x.imag)] for x in np.asarray(z)]


def _mb_kwargs(args):
    radii = None if args.radii is None else tuple(args.radii)
    return {"radii": radii, "h": args.cell, "p": args.nodes, "tol": args.tol}


def _mb_json(res):
    return {"value": res.value, "spread": res.spread, "converged": res.converged,
            "radii": list(res.radii), "estimates": list(res.estimates), "nodes": res.nodes}


def cmd_info(args):
    tri, a = load_triangulation(args.file)
    info = {"name": tri.name, "N": tri.N, "cusps": tri.k,
            "has_gluing": tri.has_gluing,
            "peripherally_trivial": is_peripherally_trivial(tri, a)}
    info.update(homology_report(tri))
    if tri.has_gluing:
        info["taut_structures"] = len(enumerate_taut_in_component(tri, a))
    info["seeds"] = len(tri.extra.get("seeds", []))
    _out(dumps17(info))


def cmd_integrate(args):
    tri, a = load_triangulation(args.file)
    hbar = complex(args.re_hbar, args.im_hbar)
    if hbar.real >= 0:
        raise InputError("Re hbar must be negative")
    if args.samples < 1:
        raise InputError("samples must be positive")
    res = integrate(tri, a, hbar, args.samples, threads=args.threads, eval_cap=args.eval_cap)
    echo = {"file": args.file, "hbar": {"real": hbar.real, "imag": hbar.imag},
            "samples": args.samples, "threads": args.threads}
    _out(emit_result(res, echo))


def cmd_solve(args):
    tri, a = load_triangulation(args.file)
    sol, rep = solve_geometric(tri, a)
    sigma = cusp_shape(tri, sol)
    _out(dumps17({"shapes": _complex_list(sol.z[:tri.N]),
                  "angles": [float(x) for x in np.angle(sol.omega) / np.pi],
                  "volume": rep.volume, "signature": rep.signature,
                  "n_combined": rep.n_combined, "residual": sol.residual,
                  "cusp_shape": [sigma.real, sigma.imag]}))


def cmd_tau(args):
    tri, a = load_triangulation(args.file)
    sol, _ = solve_geometric(tri, a)
    rep = tau(tri, sol)
    _out(dumps17({"tau": rep.tau, "tau1": rep.tau1, "tau2": rep.tau2, "volume": rep.volume,
                  "signature": rep.signature, "n_combined": rep.n_combined,
                  "one_loop_abs": abs(one_loop(tri, sol))}))


def cmd_taut(args):
    tri, a = load_triangulation(args.file)
    found = enumerate_taut_in_component(tri, a)
    _out(dumps17({"count": len(found), "structures": [[int(x) for x in s] for s in found]}))


def cmd_mb(args):
    tri, a = load_triangulation(args.file)
    found = enumerate_taut_in_component(tri, a)
    if args.taut is not None:
        if not 0 <= args.taut < len(found):
            raise InputError(f"taut index {args.taut} out of range (0..{len(found) - 1})")
        picks = [args.taut]
    else:
        picks = range(len(found))
    items = []
    for i in picks:
        res = mb_for_taut(tri, a, found[i], **_mb_kwargs(args))
        log.info("taut %d: %.10g (spread %.3g)", i, res.value, res.spread)
        items.append({"index": i, "structure": [int(x) for x in found[i]], **_mb_json(res)})
    _out(dumps17({"integrals": items}))
    if not all(it["converged"] for it in items):
        return _fail("NonConvergence", "spread exceeds tolerance", 2)
    return 0


def _beta(tri, a, args):
    res = beta_invariant(tri, a, **_mb_kwargs(args))
    return res, {"total": res.total, "defined": res.defined,
                 "terms": [{"structure": [int(x) for x in s], **_mb_json(r)} for s, r in res.terms]}


def cmd_beta(args):
    tri, a = load_triangulation(args.file)
    res, payload = _beta(tri, a, args)
    _out(dumps17(payload))
    if not res.defined:
        return _fail("NonConvergence", "beta invariant undefined: a summand did not converge", 2)
    return 0


def _terms(tri, a, args):
    if args.terms:
        return load_terms(args.terms)
    terms = representation_terms(tri, a)
    if args.beta is not None:
        beta = args.beta
    else:
        res, _ = _beta(tri, a, args)
        if not res.defined:
            raise NumericalError("beta invariant undefined: a summand did not converge")
        beta = res.total
    return [linear_term(beta)] + terms


def cmd_predict(args):
    tri, a = load_triangulation(args.file)
    d_T = homology_report(tri)["d_T"]
    terms = _terms(tri, a, args)
    payload = {"d_T": d_T, "terms": [t.to_dict() for t in terms]}
    if args.kappa is not None:
        payload["kappa"] = args.kappa
        payload["prediction"] = predict(terms, d_T, args.kappa)
    _out(dumps17(payload))


def cmd_compare(args):
    tri, a = load_triangulation(args.file)
    d_T = homology_report(tri)["d_T"]
    terms = _terms(tri, a, args)
    grid = kappa_grid(args.kappa_min, args.kappa_max, args.kappa_step)
    rows = compare(tri, a, terms, grid, args.samples, d_T=d_T,
                   threads=args.threads, eval_cap=args.eval_cap)
    _out(rows_to_csv(rows))


def _add_mb_options(p):
    p.add_argument("--radii", type=float, nargs="+",
                   help="increasing radius schedule, at least three values "
                        "(default 25 50 100 200, or 10 15 20 25 in three or more dimensions)")
    p.add_argument("--cell", type=float, default=DEFAULT_H, help="quadrature cell side")
    p.add_argument("--nodes", type=int,
                   help="Gauss-Legendre nodes per axis and cell (default 24, or 12 in three or more dimensions)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="spread tolerance")


def _add_term_options(p):
    p.add_argument("--terms", help="terms.json overriding the computed terms")
    p.add_argument("--beta", type=float, help="slope of the linear term (computed when omitted)")
    _add_mb_options(p)


def build_parser():
    # global options are accepted before or after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")
    common.add_argument("--eval-cap", type=int, default=argparse.SUPPRESS,
                        help=f"maximum number of state-integral grid points (default {DEFAULT_EVAL_CAP})")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="log progress to stderr")
    p = _Parser(prog="meroindex", description="Meromorphic 3D-index toolkit.", parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    p.set_defaults(threads=None, eval_cap=DEFAULT_EVAL_CAP, verbose=False)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    _sub = sub.add_parser

    def add(name, **kw):
        return _sub(name, parents=[common], **kw)

    sub.add_parser = add

    s = sub.add_parser("info", help="triangulation summary and covering degree")
    s.add_argument("file")
    s.set_defaults(func=cmd_info)

    s = sub.add_parser("integrate", help="state integral at a value of hbar")
    s.add_argument("file")
    s.add_argument("re_hbar", type=float)
    s.add_argument("im_hbar", type=float)
    s.add_argument("samples", type=int)
    s.set_defaults(func=cmd_integrate)

    s = sub.add_parser("solve", help="geometric shapes by volume maximisation")
    s.add_argument("file")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("tau", help="tau invariant of the geometric solution")
    s.add_argument("file")
    s.set_defaults(func=cmd_tau)

    s = sub.add_parser("taut", help="Z2-taut structures in the geometric component")
    s.add_argument("file")
    s.set_defaults(func=cmd_taut)

    s = sub.add_parser("mb", help="Mellin-Barnes integrals of taut structures")
    s.add_argument("file")
    s.add_argument("--taut", type=int, help="index into the taut list (default: all)")
    _add_mb_options(s)
    s.set_defaults(func=cmd_mb)

    s = sub.add_parser("beta", help="beta invariant")
    s.add_argument("file")
    _add_mb_options(s)
    s.set_defaults(func=cmd_beta)

    s = sub.add_parser("predict", help="terms of the predicted asymptotics")
    s.add_argument("file")
    s.add_argument("--kappa", type=float, help="also evaluate the prediction at this kappa")
    _add_term_options(s)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("compare", help="CSV of index against prediction on a kappa grid")
    s.add_argument("file")
    s.add_argument("--kappa-min", type=float, required=True)
    s.add_argument("--kappa-max", type=float, required=True)
    s.add_argument("--kappa-step", type=float, required=True)
    s.add_argument("--samples", type=int, required=True)
    _add_term_options(s)
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", exc, 1)
    if args.command is None:
        sys.stderr.write(parser.format_usage())
        return _fail("UsageError", "missing subcommand", 1)
    if args.threads is None:
        args.threads = default_threads()
    elif args.threads < 1:
        return _fail("UsageError", "--threads must be >= 1", 1)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        code = args.func(args)
    except (InputError, ResourceError) as exc:
        return _fail(type(exc).__name__, exc, 1)
    except (NumericalError, AmbiguityError, DomainError, ArithmeticError) as exc:
        return _fail(type(exc).__name__, exc, 2)
    return code or 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 2 invalid input or violated precondition, 3 numerical
failure (including a verification check that misses its tolerance).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import characterize, forward, io, products
from .asymptotics import HClass, asymptotic_spectrum
from .config import load_config
from .errors import AdmissibilityError, NumericalError, ValidationError
from .inverse_easy import reconstruct_method2, reconstruct_sums_degenerate
from .inverse_riesz import reconstruct_method1
from .model import CosineSeries, GraphProblem, Spectrum, relative_l2

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class CheckFailed(NumericalError):
    """A verification command exceeded its tolerance."""


def _emit(doc: dict, out: str | None = None) -> None:
    text = io.dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def random_problem(rng: np.random.Generator, h, modes: int) -> GraphProblem:
    """Densities with ``modes`` cosine coefficients drawn uniformly from the unit disk."""
    p = []
    for _ in h:
        r = np.sqrt(rng.uniform(0, 1, modes))
        t = rng.uniform(0, 2 * np.pi, modes)
        p.append(CosineSeries(r * np.exp(1j * t)))
    return GraphProblem.create(h, p)


def _parse_h(text: str):
    try:
        return [complex(v.replace(" ", "")) for v in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse coefficients {text!r}") from exc


def _check(value: float, tol: float, doc: dict) -> int:
    doc["tolerance"] = tol
    doc["passed"] = bool(value <= tol)
    return EXIT_OK if value <= tol else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# commands


def cmd_forward(args, cfg) -> int:
    problem, info = io.read_problem(args.problem)
    if args.require_star and problem.hconf.hclass is not HClass.STAR:
        print(f"warning: coefficients are {problem.hconf.hclass.value}, not star class", file=sys.stderr)
    spec = forward.eigenvalues(problem, args.shells, n_low=cfg.n_low, box_height=cfg.box_height)
    prov = {"generator": "starspec forward", "shells": args.shells, "n_low": cfg.n_low,
            "box_height": cfg.box_height, "h_class": problem.hconf.hclass.value}
    prov.update(info)
    io.write_spectrum(args.out, spec, prov) if args.out else _emit(io.spectrum_to_dict(spec, prov))
    return EXIT_OK


def _inverse(spec: Spectrum, problem: GraphProblem, args, cfg):
    hconf = problem.hconf
    N = args.shells or spec.n_shells
    if hconf.hclass is HClass.BULLET:
        if not args.sums:
            raise AdmissibilityError(
                "repeated Robin coefficients: the spectrum determines only the sums of densities on "
                "edges with equal coefficients; rerun with --sums"
            )
        _, lam_part = characterize.degenerate_split(spec.truncated(N).flat(), hconf)
        sums, report = reconstruct_sums_degenerate(lam_part, hconf, None, args.k_out or cfg.k_out,
                                                   n_direct=args.n_direct, n_tail=args.n_tail)
        return "sums", sums, report.as_dict()
    hconf.require(HClass.STAR)
    spec = spec.truncated(N)
    doc = {}
    result = None
    if args.method in ("easy", "both"):
        result, rep = reconstruct_method2(spec, hconf, N, args.k_out or cfg.k_out,
                                          n_direct=args.n_direct, n_tail=args.n_tail)
        doc["easy"] = rep.as_dict()
    if args.method in ("riesz", "both"):
        r1, rep1 = reconstruct_method1(spec, hconf, N, args.k_dict or cfg.k_dict)
        doc["riesz"] = rep1.as_dict()
        if result is None:
            result = r1
        else:
            doc["cross_method_l2"] = [relative_l2(a, b) for a, b in zip(r1, result)]
    return "densities", result, doc


def cmd_inverse(args, cfg) -> int:
    spec = io.read_spectrum(args.spectrum)
    problem, _ = io.read_problem(args.problem)
    kind, series, report = _inverse(spec, problem, args, cfg)
    if kind == "sums":
        doc = {"groups": [list(g) for g in problem.hconf.groups],
               "sums": [[io._pair(c) for c in q.coef] for q in series], "report": report}
        _emit(doc, args.out)
        return EXIT_OK
    rec = GraphProblem(problem.hconf, tuple(series))
    if args.out:
        io.write_problem(args.out, rec, {"report": io.jsonable(report)})
    else:
        _emit(io.problem_to_dict(rec, {"report": io.jsonable(report)}))
    return EXIT_OK


def cmd_characterize(args, cfg) -> int:
    spec = io.read_spectrum(args.spectrum)
    problem, _ = io.read_problem(args.problem)
    report = characterize.check_admissible(spec.flat(), problem.hconf)
    _emit(report.as_dict(), args.out)
    return EXIT_OK


def cmd_adjoint_check(args, cfg) -> int:
    problem, _ = io.read_problem(args.problem)
    tol = args.tol_adjoint if args.tol_adjoint is not None else cfg.tol_adjoint
    a = forward.eigenvalues(problem, args.shells, n_low=cfg.n_low, box_height=cfg.box_height)
    b = forward.lstar_eigenvalues(problem, args.shells, n_low=cfg.n_low, box_height=cfg.box_height)
    dev = float(np.max(np.abs(b.table() - np.conj(a.table()))))
    doc = {"shells": args.shells, "max_conjugacy_deviation": dev}
    code = _check(dev, tol, doc)
    _emit(doc, args.out)
    return code


def _probes(rng, count):
    return rng.uniform(-10, 50, count) + 1j * rng.uniform(-5, 5, count)


def cmd_products_check(args, cfg) -> int:
    rng = np.random.default_rng(args.seed)
    lam = _probes(rng, args.probes)
    if args.euler:
        N = args.n_direct or 2000
        n = np.arange(N)
        rho = np.sqrt(lam)
        s = products.branch_factor(lam, n**2.0, "sine", 0.0, args.n_tail or 10 * N)
        c = products.branch_factor(lam, (n + 0.5) ** 2, "cosine", 0.0, args.n_tail or 10 * N)
        err = max(float(np.max(np.abs(s / (-rho * np.sin(np.pi * rho)) - 1))),
                  float(np.max(np.abs(c / np.cos(np.pi * rho) - 1))))
        tol = args.tol_products if args.tol_products is not None else cfg.tol_euler
        doc = {"mode": "euler", "n_direct": N, "max_relative_error": err}
        code = _check(err, tol, doc)
        _emit(doc, args.out)
        return code
    problem, _ = io.read_problem(args.problem)
    if args.spectrum:
        spec = io.read_spectrum(args.spectrum)
    else:
        spec = forward.eigenvalues(problem, args.shells, n_low=cfg.n_low, box_height=cfg.box_height)
    n_tail = args.n_tail or (cfg.n_tail_factor * (args.n_direct or spec.n_shells))
    pcf = products.product_charfn(spec, problem.hconf, args.n_direct, n_tail)
    exact = forward.delta(problem, lam)
    err = float(np.max(np.abs(pcf(lam) - exact) / np.abs(exact)))
    tol = args.tol_products if args.tol_products is not None else cfg.tol_products
    doc = {"mode": "forward", "n_direct": pcf.n_direct, "n_tail": pcf.n_tail, "max_relative_error": err}
    code = _check(err, tol, doc)
    _emit(doc, args.out)
    return code


def cmd_roundtrip(args, cfg) -> int:
    rng = np.random.default_rng(args.seed)
    if args.problem:
        problem, _ = io.read_problem(args.problem)
    else:
        h = _parse_h(args.h) if args.h else list(range(args.m))
        problem = random_problem(rng, h, args.modes)
    spec = forward.eigenvalues(problem, args.shells, n_low=cfg.n_low, box_height=cfg.box_height)
    args.sums = problem.hconf.hclass is HClass.BULLET
    kind, series, report = _inverse(spec, problem, args, cfg)
    if kind == "sums":
        truth = []
        for g in problem.hconf.groups:
            acc = CosineSeries.zeros()
            for j in g:
                acc = acc + problem.p[j]
            truth.append(acc)
    else:
        truth = list(problem.p)
    errors = [relative_l2(a, b) for a, b in zip(series, truth)]
    doc = {"seed": args.seed, "shells": args.shells, "method": args.method,
           "h": [io._pair(v) for v in problem.h], "relative_l2": errors, "report": report}
    tol = args.tol_roundtrip if args.tol_roundtrip is not None else cfg.tol_roundtrip
    code = _check(max(errors), tol, doc)
    _emit(doc, args.out)
    return code


def cmd_emit_plot(args, cfg) -> int:
    if args.kind == "delta":
        problem, _ = io.read_problem(args.problem)
        lam = np.linspace(args.lam_min, args.lam_max, args.points or cfg.plot_points)
        d = forward.delta(problem, lam)
        rows = [(x, abs(v), v.real, v.imag) for x, v in zip(lam, d)]
        io.write_csv(args.out, ["lambda", "abs_delta", "re_delta", "im_delta"], rows)
    elif args.kind == "spectrum":
        spec = io.read_spectrum(args.spectrum)
        rows = [(n, k, lam.real, lam.imag, mult) for n, k, lam, mult in spec.entries()]
        io.write_csv(args.out, ["n", "k", "re_lambda", "im_lambda", "multiplicity"], rows)
    else:
        problem, _ = io.read_problem(args.problem)
        x = np.linspace(0.0, np.pi, args.points or cfg.plot_points)
        header = ["x"]
        cols = [x]
        for j, q in enumerate(problem.p, start=1):
            v = q(x)
            header += [f"re_p{j}", f"im_p{j}"]
            cols += [v.real, v.imag]
        io.write_csv(args.out, header, zip(*cols))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, shells=None):
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        if shells is not None:
            p.add_argument("--shells", type=int, default=shells)

    def truncation(p):
        p.add_argument("--n-direct", type=int)
        p.add_argument("--n-tail", type=int)

    p = sub.add_parser("forward", help="eigenvalues of a problem file")
    p.add_argument("problem")
    p.add_argument("--require-star", action="store_true", help="warn unless the coefficients are star class")
    common(p, shells=50)
    p.set_defaults(func=cmd_forward)

    def inverse_opts(p):
        p.add_argument("--method", choices=["easy", "riesz", "both"], default="easy")
        p.add_argument("--k-dict", type=int)
        p.add_argument("--k-out", type=int)
        truncation(p)

    p = sub.add_parser("inverse", help="recover densities from a spectrum file")
    p.add_argument("spectrum")
    p.add_argument("--problem", required=True, help="problem file supplying the Robin coefficients")
    p.add_argument("--sums", action="store_true", help="recover group sums for repeated coefficients")
    inverse_opts(p)
    common(p, shells=None)
    p.add_argument("--shells", type=int)
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("characterize", help="admissibility verdict for a spectrum file")
    p.add_argument("spectrum")
    p.add_argument("--problem", required=True)
    common(p)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("adjoint-check", help="conjugacy of the problem and adjoint spectra")
    p.add_argument("problem")
    p.add_argument("--tol-adjoint", type=float)
    common(p, shells=50)
    p.set_defaults(func=cmd_adjoint_check)

    p = sub.add_parser("products-check", help="product form against the direct characteristic function")
    p.add_argument("problem", nargs="?")
    p.add_argument("--spectrum")
    p.add_argument("--euler", action="store_true", help="check the classical product identities instead")
    p.add_argument("--probes", type=int, default=20)
    p.add_argument("--tol-products", type=float)
    truncation(p)
    common(p, shells=300)
    p.set_defaults(func=cmd_products_check)

    p = sub.add_parser("roundtrip", help="forward solve followed by reconstruction")
    p.add_argument("problem", nargs="?")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--h", help="comma-separated Robin coefficients for a random problem")
    p.add_argument("--modes", type=int, default=5)
    p.add_argument("--tol-roundtrip", type=float)
    inverse_opts(p)
    common(p, shells=300)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("emit-plot", help="CSV tables for plotting")
    p.add_argument("kind", choices=["delta", "spectrum", "density"])
    p.add_argument("--problem")
    p.add_argument("--spectrum")
    p.add_argument("--lam-min", type=float, default=-5.0)
    p.add_argument("--lam-max", type=float, default=30.0)
    p.add_argument("--points", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config()
        if args.command == "emit-plot":
            need = "spectrum" if args.kind == "spectrum" else "problem"
            if getattr(args, need) is None:
                raise ValidationError(f"emit-plot {args.kind} needs --{need}")
        if args.command == "products-check" and not args.euler and not args.problem:
            raise ValidationError("products-check needs a problem file unless --euler is given")
        return args.func(args, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

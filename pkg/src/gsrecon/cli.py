"""Command-line front end.

Exit codes: 0 success, 1 failed check (``verify``, ``table --check``, SSR cap),
2 invalid arguments or parameters, 3 unreadable or malformed input file.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from . import experiments as ex
from .engine import IllPosedError, assemble, evaluate_expansion, solve
from .io import (
    MalformedFileError,
    dump_matrix,
    number_to_json,
    parse_number,
    provenance,
    read_samples,
    solution_to_json,
    write_csv,
    write_csv_stream,
    write_json,
    write_samples,
)
from .sampling import (
    SamplingScheme,
    SchemeError,
    SupportError,
    WaveletCombo,
    add_noise,
    fourier_partial_sum,
    synthesize_samples,
)
from .ssr import SsrCapError, blowup_experiment, fit_blowup, ssr_curve
from .verify import format_report, parse_perturbation, perturb, run_checks
from .wavelets import FAMILY_NAMES, UnknownFamilyError, make_family, n_r

log = logging.getLogger("gsrecon")

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_FILE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _scheme(family, epsilon):
    eps = None if epsilon is None else parse_number(epsilon)
    return SamplingScheme.for_family(family, eps)


def _emit(args, command, config, columns, rows):
    """Write ``rows`` as CSV (or JSON records) to ``--out``, or CSV to stdout."""
    header = provenance(command, config)
    if args.format == "json":
        obj = {**header, "columns": columns,
               "rows": [dict(zip(columns, (_jsonable(v) for v in r))) for r in rows]}
        if args.out:
            write_json(args.out, obj)
        else:
            print(json.dumps(obj, indent=1, sort_keys=True))
        return
    if args.out:
        write_csv(args.out, header, columns, rows)
    else:
        write_csv_stream(sys.stdout, header, columns, rows)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, Fraction):
        return number_to_json(v)
    return v


# ---------------------------------------------------------------------------
# commands


def cmd_ssr(args) -> int:
    fam = make_family(args.family)
    scheme = _scheme(fam, args.epsilon)
    theta = float(parse_number(args.theta))
    if args.N:
        N_list = [int(n) for n in args.N.split(",")]
    else:
        if args.rmin > args.rmax:
            raise UsageError("--rmin must not exceed --rmax")
        N_list = [n_r(fam, R) for R in range(args.rmin, args.rmax + 1)]
    curve = ssr_curve(fam, scheme, theta, N_list, args.search_cap)
    rows = [(p.N, theta, p.M_star, p.sigma_min, p.M_star / p.N) for p in curve.points]
    config = {"family": fam.name, "epsilon": scheme.epsilon, "theta": theta, "N": N_list,
              "search_cap": args.search_cap}
    _emit(args, "ssr", config, ["N", "theta", "M_star", "sigma_min_at_M_star", "ratio"], rows)
    return EXIT_OK


TABLE_COLUMNS = ["M", "N", "alpha", "err_fourier", "err_gs", "conv_exponent", "noise", "family",
                 "label", "convention", "variant"]


def cmd_table(args) -> int:
    results = ex.run_table(args.table, args.convention, args.seed)
    rows = []
    for item in results:
        r = item["row"]
        rows.append((r.M, r.N, r.alpha, r.err_fourier, r.err_gs, r.conv_exponent, r.noise, r.family,
                     item["label"], r.convention, item["variant"]))
    config = {"table": args.table, "convention": args.convention, "seed": args.seed}
    _emit(args, "table", config, TABLE_COLUMNS, rows)
    if not args.check:
        return EXIT_OK
    ok = True
    print(f"# check against reference values (factor {args.factor:g}, exponent +-{args.exp_tol:g})",
          file=sys.stderr)
    for item in results:
        r = item["row"]
        tag = f"({r.M},{r.N},{r.alpha:g}) {item['label']}{'/' + item['variant'] if item['variant'] else ''}" \
              f" -> {r.family} [{r.convention}]"
        for key, measured in (("err_fourier", r.err_fourier), ("err_gs", r.err_gs),
                              ("conv_exponent", r.conv_exponent)):
            expected = item["reference"][key]
            if expected is None:
                continue
            if key == "conv_exponent":
                good = abs(measured - expected) <= args.exp_tol
            else:
                good = expected / args.factor <= measured <= expected * args.factor
            ok &= good
            dev = ex.deviation(measured, expected)
            print(f"{'PASS' if good else 'FAIL'}  {tag:<40} {key:<13} measured={measured:.3e} "
                  f"reference={expected:.3e} rel_dev={dev:+.3f}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _grid_rows(x, f, f_M, f_gs):
    for i in range(len(x)):
        fv = complex(f[i]) if f is not None else complex("nan")
        yield (x[i], fv.real, fv.imag, f_M[i].real, f_M[i].imag, f_gs[i].real, f_gs[i].imag)


GRID_COLUMNS = ["x", "f_re", "f_im", "f_M_re", "f_M_im", "f_gs_re", "f_gs_im"]


def cmd_reconstruct(args) -> int:
    if args.demo:
        res = ex.box_spikes_demo() if args.demo == "box-spikes" else ex.bandlimited_demo()
        fam = make_family(res.family)
        scheme = SamplingScheme.for_family(fam, res.epsilon)
        problem, sol = res.problem, res.solution
        grid = (res.x, res.f, res.f_M, res.f_gs)
        extra = {"demo": res.name, **res.extra}
    else:
        if not args.samples or not args.N:
            raise UsageError("reconstruct needs --samples FILE and --N, or --demo NAME")
        samples = read_samples(args.samples)
        fam = make_family(args.family)
        scheme = samples.scheme
        problem = assemble(fam, scheme, args.N, samples.M)
        sol = solve(problem, samples, allow_ill_posed=args.allow_ill_posed)
        lo, hi = -float(scheme.T1), float(scheme.T2)
        x = np.linspace(lo, hi, args.grid_points)
        grid = (x, None, fourier_partial_sum(samples, x), evaluate_expansion(fam, sol.alpha, x))
        extra = {"samples": str(args.samples)}
    config = {"family": fam.name, "N": problem.N, "M": problem.M, "epsilon": scheme.epsilon, **extra}
    obj = {**provenance("reconstruct", config), **solution_to_json(problem, sol)}
    if args.out:
        write_json(args.out, obj)
    else:
        print(json.dumps(obj, sort_keys=True))
    if args.grid_out:
        write_csv(args.grid_out, provenance("reconstruct", config), GRID_COLUMNS, _grid_rows(*grid))
    if args.dump_matrix:
        dump_matrix(args.dump_matrix, problem)
    for k, v in extra.items():
        if isinstance(v, float):
            print(f"# {k} = {v:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_samples(args) -> int:
    if args.demo == "box-spikes":
        fam = make_family("haar")
        scheme = _scheme(fam, args.epsilon or "1/2")
        model = ex.box_spikes_model()
    else:
        fam = make_family(args.family)
        scheme = _scheme(fam, args.epsilon)
        model = WaveletCombo(fam, ex.decaying_coefficients(args.alpha, args.n_terms))
    v = synthesize_samples(scheme, model, args.M)
    if args.noise > 0:
        v = add_noise(v, args.noise, args.seed)
    config = {"family": fam.name, "epsilon": scheme.epsilon, "M": args.M, "alpha": args.alpha,
              "n_terms": args.n_terms, "noise": args.noise, "seed": args.seed, "demo": args.demo}
    write_samples(args.out, v, provenance("samples", config))
    return EXIT_OK


def cmd_verify(args) -> int:
    families = [make_family(n) for n in ("haar", "db4", "db6", "db8")]
    for spec in args.perturb_tap or []:
        name, idx, delta = parse_perturbation(spec)
        target = make_family(name)
        if not 0 <= idx < len(target.taps):
            raise UsageError(f"tap index {idx} out of range for {name}")
        families = [perturb(f, idx, delta) if f.name == target.canonical else f for f in families]
    checks = run_checks(families, quick=args.quick)
    sys.stdout.write(format_report(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_blowup(args) -> int:
    fam = make_family(args.family)
    scheme = _scheme(fam, args.epsilon)
    c = float(parse_number(args.c))
    rows = blowup_experiment(fam, scheme, c, range(args.rmin, args.rmax + 1))
    fit = fit_blowup(rows)
    config = {"family": fam.name, "epsilon": scheme.epsilon, "c": c, "rmin": args.rmin, "rmax": args.rmax}
    _emit(args, "blowup", config, ["R", "N_R", "M", "sigma_min", "log10_kappa"],
          [(r.R, r.N_R, r.M, r.sigma_min, r.log10_kappa) for r in rows])
    print(f"# fit ln(kappa) ~ 2^R over top 4: slope={fit.slope:.4g} r2={fit.r_squared:.4g} "
          f"top_growth={fit.top_growth:.4g} exponential={fit.exponential}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsrecon", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gsrecon {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def out_opts(sp):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    fam_help = f"wavelet family ({', '.join(FAMILY_NAMES)})"
    eps_help = "sampling density, e.g. 1/13 (default: the Nyquist limit for the family)"

    sp = sub.add_parser("ssr", help="stable sampling rate curve")
    sp.add_argument("--family", required=True, help=fam_help)
    sp.add_argument("--epsilon", help=eps_help)
    sp.add_argument("--theta", required=True, help="threshold theta > 1 (accepts pi/2, 1/0.684)")
    sp.add_argument("--rmin", type=int, default=2)
    sp.add_argument("--rmax", type=int, default=6)
    sp.add_argument("--N", help="comma separated N values instead of N_R for R in [rmin, rmax]")
    sp.add_argument("--search-cap", type=int, default=0, help="largest M tried (default 16 N)")
    out_opts(sp)
    sp.set_defaults(func=cmd_ssr)

    sp = sub.add_parser("table", help="replicate a reference reconstruction table")
    sp.add_argument("--table", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--convention", choices=ex.CONVENTIONS, default="auto",
                    help="how 'DB k' labels map to filters")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--check", action="store_true", help="compare with the embedded reference values")
    sp.add_argument("--factor", type=float, default=2.0)
    sp.add_argument("--exp-tol", type=float, default=0.1)
    out_opts(sp)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("reconstruct", help="generalized-sampling reconstruction")
    sp.add_argument("--samples", help="sample CSV written by 'gsrecon samples'")
    sp.add_argument("--demo", choices=("box-spikes", "bandlimited"))
    sp.add_argument("--family", default="haar", help=fam_help)
    sp.add_argument("--N", type=int)
    sp.add_argument("--allow-ill-posed", action="store_true")
    sp.add_argument("--grid-points", type=int, default=2**14 + 1)
    sp.add_argument("--out", help="coefficient JSON (default: stdout)")
    sp.add_argument("--grid-out", help="CSV of f, f_M and the reconstruction on a dense grid")
    sp.add_argument("--dump-matrix", help="CSV dump of the matrix U")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("samples", help="synthesize Fourier samples")
    sp.add_argument("--family", default="haar", help=fam_help)
    sp.add_argument("--epsilon", help=eps_help)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=3.0, help="coefficient decay beta_j = j^-alpha")
    sp.add_argument("--n-terms", type=int, default=ex.N_TERMS)
    sp.add_argument("--noise", type=float, default=0.0, help="Euclidean norm of the added noise")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--demo", choices=("box-spikes",))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_samples)

    sp = sub.add_parser("verify", help="run oracle cross-checks")
    sp.add_argument("--perturb-tap", action="append", metavar="FAMILY:INDEX:DELTA",
                    help="fault injection: add DELTA to one filter tap")
    sp.add_argument("--quick", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("blowup", help="sigma_min below the critical sampling ratio")
    sp.add_argument("--family", required=True, help=fam_help)
    sp.add_argument("--epsilon", help=eps_help)
    sp.add_argument("--c", required=True, help="M = floor(c 2^R), 0 < c < 1/eps")
    sp.add_argument("--rmin", type=int, default=4)
    sp.add_argument("--rmax", type=int, default=8)
    out_opts(sp)
    sp.set_defaults(func=cmd_blowup)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MalformedFileError as exc:
        print(f"gsrecon: malformed input: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"gsrecon: cannot read input: {exc}", file=sys.stderr)
        return EXIT_FILE
    except SsrCapError as exc:
        print(f"gsrecon: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except IllPosedError as exc:
        print(f"gsrecon: {exc}; pass --allow-ill-posed to solve anyway", file=sys.stderr)
        return EXIT_INVALID
    except (SchemeError, SupportError, UnknownFamilyError, UsageError, ValueError) as exc:
        print(f"gsrecon: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

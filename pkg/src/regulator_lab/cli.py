"""Command line entry point: ``regulator-lab <group> <command> [options]``.

Exit status is 0 when every check passes, 1 when any check fails and 2 for
usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from .polyfam import ParseError, as_rational, parse_poly

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CONFIG_KEYS = {"k", "k_grid", "tol", "precision", "jobs", "out", "csv", "max_evals"}


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _grid(text: str) -> tuple[Fraction, ...]:
    return tuple(_rational(part) for part in text.split(",") if part.strip())


def read_config(path: str | Path) -> dict[str, str]:
    """Line-oriented ``key = value`` file; ``#`` starts a comment."""
    from .verify import UsageError

    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=_rational, help="single parameter value")
    p.add_argument("--k-grid", type=_grid, help="comma separated parameter values")
    p.add_argument("--tol", type=float, help="override every check's tolerance")
    p.add_argument("--precision", type=int, help="working decimal digits for elliptic computations")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--csv", help="also write a CSV flattening")
    p.add_argument("--config", help="key = value file; command line flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regulator-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    mahler = groups.add_parser("mahler", help="Mahler measures").add_subparsers(dest="command", required=True)
    ev = mahler.add_parser("eval", help="evaluate m(p) for a polynomial in x, y")
    ev.add_argument("--poly", required=True)
    ev.add_argument("--k", type=_rational, help="value bound to the parameter k")
    ev.add_argument("--tol", type=float, default=1e-10)
    ev.add_argument("--var", choices=("x", "y"), default="y", help="variable eliminated by Jensen's formula")
    ev.add_argument("--out")

    verify = groups.add_parser("verify", help="run checks").add_subparsers(dest="command", required=True)
    for name, text in (
        ("theorem", "shifted Mahler measure identity"),
        ("regulator", "integer multipliers and dilogarithm identities"),
        ("paths", "Deninger path closure and branch-value geometry"),
        ("periods", "period integral ratios and the assembled identity"),
        ("corollary", "Mahler measures as L'(E, 0) multiples"),
    ):
        _add_common(verify.add_parser(name, help=text))

    cur = groups.add_parser("curve", help="elliptic curves").add_subparsers(dest="command", required=True)
    info = cur.add_parser("info", help="model, invariants, conductor and torsion points")
    info.add_argument("--kind", choices=("Ek", "Uk", "Fk"), default="Ek")
    info.add_argument("--k", type=_rational, required=True)
    info.add_argument("--precision", type=int, default=30)

    dl = groups.add_parser("dilog", help="Bloch-Wigner or elliptic dilogarithm")
    dl.add_argument("--z", type=complex, help="Bloch-Wigner D(z)")
    dl.add_argument("--k", type=_rational, help="elliptic: parameter of the curve")
    dl.add_argument("--kind", choices=("Ek", "Uk"), default="Ek")
    dl.add_argument("--point", choices=("S", "P", "T", "U"), default="S")
    dl.add_argument("--precision", type=int, default=30)
    return parser


def _run_config(args):
    from .verify import RunConfig, UsageError

    values: dict = {}
    if args.config:
        raw = read_config(args.config)
        try:
            if "k_grid" in raw:
                values["k_grid"] = _grid(raw["k_grid"])
            if "k" in raw:
                values["k_grid"] = (_rational(raw["k"]),)
            for key, cast in (("tol", float), ("precision", int), ("jobs", int), ("max_evals", int)):
                if key in raw:
                    values[key] = cast(raw[key])
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{args.config}: {exc}") from exc
        for key in ("out", "csv"):
            if key in raw:
                values[key] = raw[key]
    if args.k_grid is not None:
        values["k_grid"] = args.k_grid
    if args.k is not None:
        values["k_grid"] = (args.k,)
    for key in ("tol", "precision", "jobs", "out", "csv"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    return RunConfig(**values)


def _verify(args) -> int:
    from . import verify
    from .report import summary_line, write_csv, write_json

    cfg = _run_config(args)
    runner = {
        "theorem": verify.verify_theorem,
        "regulator": verify.verify_regulator,
        "paths": verify.verify_paths,
        "periods": verify.verify_periods,
        "corollary": verify.verify_corollary,
    }[args.command]
    reports = runner(cfg)
    for r in reports:
        print(summary_line(r))
    if cfg.out:
        write_json(cfg.out, cfg, reports)
    if cfg.csv:
        write_csv(cfg.csv, reports)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _mahler_eval(args) -> int:
    from .mahler import mahler_2d

    bindings = {"k": args.k} if args.k is not None else {}
    p = parse_poly(args.poly, bindings=bindings)
    res = mahler_2d(p, tol=args.tol, var=args.var)
    print(f"m({p}) = {res.value:.15g}  (error estimate {res.error:.1e}, {res.n_evals} evaluations)")
    if args.out:
        Path(args.out).write_text(json.dumps({
            "version": __version__, "poly": str(p), "value": res.value, "error": res.error,
            "breakpoints": list(res.breakpoints), "nEvals": res.n_evals,
        }, indent=2) + "\n")
    return EXIT_OK


def _curve_info(args) -> int:
    from .ecurve import curve, periods, point_P, point_S, torsion_order
    from .lseries import lseries_data

    with mpmath.workdps(args.precision):
        E = curve(args.kind, args.k)
        print(f"model         {E}")
        print(f"discriminant  {E.discriminant}")
        print(f"j-invariant   {E.j_invariant}")
        L = periods(E, args.precision)
        print(f"omega1        {mpmath.nstr(L.omega1, 20)}")
        print(f"omega2        {mpmath.nstr(L.omega2, 20)}")
        print(f"tau           {mpmath.nstr(L.tau, 20)}")
        pts = {"Ek": ("S", point_S), "Uk": ("P", point_P)}.get(args.kind)
        if pts:
            name, fn = pts
            print(f"order of {name}    {torsion_order(E, fn(args.k))}")
        data = lseries_data(E)
        print(f"minimal model {data.curve}")
        print(f"conductor     {data.conductor}")
        print("local data    " + ", ".join(f"{d.p}:{d.kodaira}(f={d.conductor_exponent})" for d in data.local))
        print(f"root number   {data.root_number}")
    return EXIT_OK


def _dilog(args) -> int:
    from .elldilog import bloch_wigner, elliptic_dilog_detail

    if args.z is not None:
        print(f"D({args.z}) = {bloch_wigner(args.z):.15g}")
        return EXIT_OK
    if args.k is None:
        raise _usage("dilog needs --z or --k")
    from .ecurve import curve, elliptic_log, periods, point_P, point_S, point_T, point_U

    with mpmath.workdps(args.precision):
        E = curve(args.kind, args.k)
        L = periods(E, args.precision)
        pt = {"S": point_S, "P": point_P, "T": point_T, "U": point_U}[args.point](args.k)
        u = elliptic_log(pt, L)
        d = elliptic_dilog_detail(u, L)
        print(f"u/omega1 = {mpmath.nstr(u / L.omega1, 15)}")
        print(f"D^E({args.point}) = {d.value:.15g}  (tail bound {d.tail_bound:.1e}, {d.terms} terms)")
    return EXIT_OK


def _usage(msg: str):
    from .verify import UsageError

    return UsageError(msg)


def _attach_values(argv: list[str]) -> list[str]:
    # "--k-grid -2,-5" would otherwise read "-2,-5" as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--k", "--k-grid"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    from .ecurve import SingularCurveError
    from .verify import UsageError

    parser = build_parser()
    argv = _attach_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if args.group == "verify":
            return _verify(args)
        if args.group == "mahler":
            return _mahler_eval(args)
        if args.group == "curve":
            return _curve_info(args)
        return _dilog(args)
    except (UsageError, ParseError, SingularCurveError, OSError) as exc:
        print(f"regulator-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Examples::

    gmorrey norm --field '{"kind": "interval", "a": 0, "b": 1}' --p 2
    gmorrey maximal --field '{"kind": "interval", "a": -1, "b": 1}' --out mf.csv
    gmorrey check-condition A --w1 '{"beta": 0}' --w2 '{"beta": 0}' --theta1 2 --theta2 2
    gmorrey verify eq28 --family ball-indicators,8,0 --alpha 0.25 --format csv --out eq28.csv

Exit codes: 0 pass or finite, 2 divergent or failed check, 1 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import conditions, harness, morrey, operators
from .fieldio import read_field_csv, sample_exponent, sample_order, sample_scalar, write_field_csv
from .fields import Domain, Grid
from .radial import RadialExponent, RadialFunction, RadiusGrid
from .report import emit_report
from .vlebesgue import REL_TOL, luxemburg_norm

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
DEFAULT_POINTS = {1: 1024, 2: 96}
DEFAULT_K = {1: 64, 2: 32}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(text):
    """JSON literal, a number, or a path to a JSON file."""
    if text is None:
        return None
    path = Path(text)
    if path.suffix == ".json" and path.exists():
        return json.loads(path.read_text())
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse {text!r}: {exc}") from None


def _grid(args) -> Grid:
    n = args.dim
    N = args.grid or DEFAULT_POINTS[n]
    return Grid(Domain.whole_space(n, args.box), N)


def _radius_grid(args, grid: Grid) -> RadiusGrid:
    K = args.radii or DEFAULT_K[grid.n]
    r_min = args.rmin if args.rmin is not None else grid.h
    return RadiusGrid.log_spaced(r_min, args.rmax, K)


def _field(args, grid):
    if args.field is None:
        raise UsageError("--field is required")
    if args.field.endswith(".csv"):
        return read_field_csv(args.field, grid)
    return sample_scalar(_load(args.field), grid)


def _meta(args, grid=None, rg=None, **extra) -> dict:
    meta = {"tol": args.tol, "command": args.command}
    if grid is not None:
        meta["grid"] = {"n": grid.n, "points_per_axis": grid.points_per_axis, "box": [list(b) for b in grid.domain.box]}
    if rg is not None:
        meta["truncation"] = [rg.r_min, rg.r_max]
        meta["radii"] = rg.K
    meta.update(extra)
    return meta


def _write(args, report, meta) -> None:
    text = emit_report(report, args.format, args.out, meta)
    if args.out is None:
        sys.stdout.write(text)


def _exponent(args, grid):
    return sample_exponent(_load(args.p) if args.p is not None else 2.0, grid)


# ---------------------------------------------------------------------------
# subcommands


def cmd_norm(args) -> int:
    grid = _grid(args)
    f = _field(args, grid)
    p = _exponent(args, grid)
    out = {"luxemburg": luxemburg_norm(f, p, rel_tol=args.tol).norm}
    if args.lam is not None:
        rg = _radius_grid(args, grid)
        out["morrey_lambda"] = morrey.variable_morrey_lambda_norm(f, p, args.lam, rg)
    _write(args, out, _meta(args, grid))
    return EXIT_OK


def cmd_operator(args) -> int:
    grid = _grid(args)
    f = _field(args, grid)
    if args.command == "maximal":
        g = operators.maximal(f, _radius_grid(args, grid))
    else:
        alpha = sample_order(_load(args.alpha) if args.alpha is not None else 0.25, grid)
        if args.command == "fracmax":
            g = operators.fractional_maximal(f, alpha, _radius_grid(args, grid))
        else:
            g = operators.riesz_potential(f, alpha)
    if args.out is None:
        sys.stdout.write("".join(f"{x!r},{v!r}\n" for x, v in zip(grid.centers[:, 0], g.values)))
    else:
        write_field_csv(args.out, g, args.command)
    return EXIT_OK


def _spec(path) -> morrey.MorreySpaceSpec:
    if path is None:
        raise UsageError("--spec is required")
    return morrey.MorreySpaceSpec.from_dict(_load(path))


def cmd_gm_norm(args) -> int:
    spec = _spec(args.spec)
    f = _field(args, spec.grid)
    value = morrey.gm_norm(f, spec)
    _write(args, {"gm_norm": value}, _meta(args, spec.grid, spec.radius_grid))
    return EXIT_OK


def _theta(text, rg):
    return RadialExponent.from_dict(_load(text) if text is not None else 2.0, rg)


def cmd_check(args) -> int:
    grid = _grid(args)
    rg = _radius_grid(args, grid)
    th1, th2 = _theta(args.theta1, rg), _theta(args.theta2, rg)
    w1 = morrey.RadialWeight.from_dict(_load(args.w1) or {"kind": "power"}, radius_grid=rg)
    w2 = morrey.RadialWeight.from_dict(_load(args.w2) or {"kind": "power"}, radius_grid=rg)
    which = args.which
    if which == "A":
        rep = conditions.condition_A(w1, w2, th1, th2, radius_grid=rg)
    elif which == "T":
        alpha = float(_load(args.alpha) if args.alpha is not None else 0.25)
        rep = conditions.condition_T(w1, w2, th1, th2, alpha, radius_grid=rg)
    elif which == "G":
        u = RadialFunction(rg, w1.values([0], rg.nodes)[0])
        v = RadialFunction(rg, w2.values([0], rg.nodes)[0])
        rep = conditions.condition_G(u, v, th1, th2)
    elif which == "spanne":
        p = _exponent(args, grid)
        centers = grid.sample_centers()
        if args.alpha is None:
            rep = conditions.spanne_condition_maximal(w1, w2, p, centers, rg)
        else:
            q = conditions.sobolev_exponent(p, sample_order(_load(args.alpha), grid))
            rep = conditions.spanne_condition_potential(w1, w2, p, q, centers, rg)
    else:
        rep = conditions.singular_condition(w1, w2, th1, th2, radius_grid=rg)
    _write(args, rep, _meta(args, grid, rg))
    return EXIT_OK if rep.finite else EXIT_FAIL


def cmd_verify(args) -> int:
    which = args.which
    if which == "opnorm":
        return _verify_opnorm(args)
    points = args.grid or DEFAULT_POINTS[args.dim]
    setup = harness.VerifySetup(args.dim, points, args.box, args.radii or DEFAULT_K[args.dim], args.rmin, args.rmax)
    p = _load(args.p) if args.p is not None else 2.0
    p0 = sample_exponent(p, setup.grid())
    family = harness.TestFamily.parse(args.family, p_plus=p0.p_plus, n=args.dim)
    fs = family.descriptors()
    if which == "lemma21":
        rep = harness.verify_local_embedding(fs, p, setup)
    elif which in ("thm24", "eq27"):
        sup_form, int_form = harness.verify_maximal_local(fs, p, setup)
        rep = sup_form if which == "thm24" else int_form
    elif which == "eq28":
        rep = harness.verify_riesz_local(fs, p, float(_load(args.alpha) if args.alpha else 0.25), setup)
    else:
        alpha = _load(args.alpha) if args.alpha else {"kind": "sin-profile", "base": 0.25, "amplitude": 0.1}
        rep = harness.verify_weighted_riesz_local(fs, p, alpha, setup)
    meta = _meta(args, setup.grid(), setup.radius_grid(), seed=family.seed, family=family.to_dict())
    _write(args, rep, meta)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _verify_opnorm(args) -> int:
    src = _spec(args.spec)
    dst = morrey.MorreySpaceSpec.from_dict(_load(args.dst_spec)) if args.dst_spec else src
    family = harness.TestFamily.parse(args.family, p_plus=src.p.p_plus, n=src.grid.n)
    alpha = _load(args.alpha) if args.alpha is not None else None
    rep = harness.estimate_operator_norm(args.op, src, dst, family, alpha)
    _write(args, rep, _meta(args, src.grid, src.radius_grid, seed=family.seed))
    return EXIT_OK if rep.finite else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, help="cells per axis (default 1024 in 1-D, 96 in 2-D)")
    common.add_argument("--dim", type=int, choices=(1, 2), default=1)
    common.add_argument("--box", type=float, default=4.0, help="half-width R of the box [-R, R]^n")
    common.add_argument("--radii", type=int, help="number of radius nodes K")
    common.add_argument("--rmin", type=float, help="smallest radius (default h)")
    common.add_argument("--rmax", type=float, default=8.0, help="largest radius")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, default=REL_TOL, help="relative tolerance of the norm solver")
    common.add_argument("--field", help="field descriptor (JSON literal or .json file) or a .csv of samples")
    common.add_argument("--p", help="exponent descriptor or number")
    common.add_argument("--alpha", help="order descriptor or number")
    common.add_argument("--spec", help="space spec JSON file")

    parser = _Parser(prog="gmorrey", description="Morrey-type norms, operators and condition checks on grids.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("norm", parents=[common], help="Luxemburg (and optional Morrey lambda) norm")
    s.add_argument("--lambda", dest="lam", type=float, help="Morrey parameter lambda")
    s.set_defaults(run=cmd_norm)
    for name, desc in (("maximal", "maximal function"), ("fracmax", "fractional maximal function"), ("riesz", "Riesz potential")):
        s = sub.add_parser(name, parents=[common], help=f"evaluate the {desc} to CSV")
        s.set_defaults(run=cmd_operator)
    s = sub.add_parser("gm-norm", parents=[common], help="global Morrey-type norm of a field")
    s.set_defaults(run=cmd_gm_norm)
    s = sub.add_parser("check-condition", parents=[common], help="weight conditions")
    s.add_argument("which", choices=("A", "T", "G", "spanne", "singular"))
    s.add_argument("--w1", help="weight descriptor (u for G)")
    s.add_argument("--w2", help="weight descriptor (v for G)")
    s.add_argument("--theta1")
    s.add_argument("--theta2")
    s.set_defaults(run=cmd_check)
    s = sub.add_parser("verify", parents=[common], help="local inequalities and operator norm ratios")
    s.add_argument("which", choices=("lemma21", "thm24", "eq27", "eq28", "eq29", "opnorm"))
    s.add_argument("--family", default="ball-indicators,8,0", help="kind,count,seed")
    s.add_argument("--op", default="M", choices=harness.OPERATORS)
    s.add_argument("--dst-spec", help="target space spec (default: same as --spec)")
    s.set_defaults(run=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return int(exc.code or 0)
    try:
        return args.run(args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"gmorrey: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:  # output piped into e.g. head
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end writing CSV tables.

Every table starts with ``# casimir-scatter <version> <subcommand> <params>``.
Exit status: 0 on success, 2 on bad arguments, 3 when a solver fails to
converge (rows computed so far are kept and a ``# INCOMPLETE`` line is
appended), 1 when ``selftest`` reports a failing criterion.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, asymptotics, geometries, stability
from .engine import QuadratureSpec
from .errors import CasimirError, ConvergenceError, DomainError
from .model import (
    PERFECT_CONDUCTOR,
    Constant,
    Medium,
    load_material_table,
    rotation,
    spheroid_polarizability,
)

EXIT_USAGE = 2
EXIT_NONCONVERGED = 3


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------

def _sweep_values(args, default):
    """Values of the swept parameter (a single default when not sweeping)."""
    if args.sweep == "none":
        return [default]
    if args.start is None or args.stop is None:
        raise UsageError("--sweep needs --start and --stop")
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise UsageError("--log needs positive --start and --stop")
        return list(np.geomspace(args.start, args.stop, args.points))
    return list(np.linspace(args.start, args.stop, args.points))


def _medium(text):
    if text in (None, "vacuum"):
        return Medium()
    try:
        parts = [float(x) for x in text.split(":")]
    except ValueError:
        raise UsageError(f"medium must be 'vacuum' or 'eps[:mu]', got {text!r}") from None
    if len(parts) not in (1, 2):
        raise UsageError("medium must be 'vacuum' or 'eps[:mu]'")
    return Medium(Constant(*parts))


def _material(eps, mu, table):
    if table:
        return load_material_table(table, extrapolate=True)
    if eps is None or (isinstance(eps, str) and eps.lower() in ("pc", "perfect", "inf")):
        return PERFECT_CONDUCTOR
    try:
        return Constant(float(eps), mu)
    except ValueError:
        raise UsageError(f"permittivity must be a number or 'pc', got {eps!r}") from None


def _opts(args, **extra):
    quad = None
    if getattr(args, "nodes", None):
        quad = QuadratureSpec(nodes=args.nodes, scale=extra.pop("scale"), tol=args.quad_tol)
    else:
        extra.pop("scale", None)
    return geometries.SolveOptions(
        nmax=args.nmax,
        trunc_tol=args.trunc_tol,
        quad=quad,
        polarization=args.pol,
        temperature=args.temperature,
        medium=_medium(args.medium),
        **extra,
    )


def _num(x):
    return repr(float(x))


def _result_row(x, res, *more):
    return [_num(x), _num(res.value), _num(res.quadrature_error), _num(res.truncation_error),
            str(res.truncation_order), *[_num(m) for m in more]]


# --------------------------------------------------------------------------
# Subcommands; each yields the column names and then rows
# --------------------------------------------------------------------------

def run_cyl_cyl(args):
    """Two cylinders; energy in units of hbar c L / R^2 vs axis distance d/R."""
    yield ["d", "energy", "quadrature_error", "truncation_error", "truncation_order", "ratio_to_pfa"]
    for d in _sweep_values(args, args.d):
        res = geometries.two_cylinders_energy(args.R, d, _opts(args, scale=1.0 / (d - 2 * args.R)))
        scaled = res.scaled(args.R ** 2)
        yield _result_row(d, scaled, res.value / asymptotics.cyl_pair_pfa_energy(args.R, d))


def run_cyl_plate(args):
    """Cylinder above a plate; energy in units of hbar c L / R^2 vs H/R.

    ``--mode phi-e`` instead tabulates the dielectric-plate factor against
    ``1/eps_plate`` at fixed ``mu_plate``.
    """
    if args.mode == "phi-e":
        yield ["inv_eps_plate", "phi_e"]
        for inv in _sweep_values(args, 0.5):
            eps = PERFECT_CONDUCTOR if inv == 0 else 1.0 / inv
            yield [_num(inv), _num(asymptotics.phi_e(eps, args.mu_plate))]
        return
    plate = _material(args.eps_plate, args.mu_plate, args.plate_table)
    yield ["H", "energy", "quadrature_error", "truncation_error", "truncation_order", "ratio_to_pfa"]
    for H in _sweep_values(args, args.H):
        res = geometries.cylinder_plate_energy(args.R, H, _opts(args, scale=1.0 / (H - args.R), plate=plate))
        yield _result_row(H, res.scaled(args.R ** 2), res.value / asymptotics.parabola_pfa(args.R, H - args.R))


def run_parabola_plate(args):
    """Parabolic cylinder and plate; energy E H^2/(hbar c L).

    Sweeping ``theta`` adds ``c = cos(theta) C(theta)`` with ``C = -E H^2``.
    """
    cols = ["H", "energy_H2", "quadrature_error", "truncation_error", "truncation_order"]
    sweep_theta = args.sweep == "theta"
    if sweep_theta:
        cols = ["theta"] + cols[1:] + ["c_theta"]
    elif args.R > 0:
        cols.append("ratio_to_pfa")
    yield cols
    values = _sweep_values(args, args.theta if sweep_theta else args.H)
    for v in values:
        H, theta = (args.H, v) if sweep_theta else (v, args.theta)
        opts = _opts(args, scale=1.0 / (H + 0.5 * args.R))
        if opts.nmax is None:
            opts = replace(opts, nmax=40)
        res = geometries.parabola_plate_energy(args.R, H + 0.5 * args.R, theta, opts)
        scaled = res.scaled(H * H)
        if sweep_theta:
            yield _result_row(theta, scaled, -math.cos(theta) * scaled.value)
        elif args.R > 0:
            yield _result_row(H, scaled, res.value / asymptotics.parabola_pfa(args.R, H))
        else:
            yield _result_row(H, scaled)


def run_cp(args):
    """Two compact objects near a mirror; energy E/(hbar c) vs d or H."""
    yield ["d", "H", "energy"]
    pol = (args.alpha_z, args.alpha_par, args.beta_z, args.beta_par)
    if args.sweep == "H":
        pts = [(args.d, h) for h in _sweep_values(args, args.H)]
    else:
        pts = [(d, args.H) for d in _sweep_values(args, args.d)]
    for d, H in pts:
        if H is None or H <= 0:
            e = asymptotics.cp_isotropic(args.alpha_par, args.alpha_z, args.beta_par, args.beta_z, d)
            H = math.inf
        else:
            e = asymptotics.cp_with_wall(*pol, d, H, large_h=args.large_h)
        yield [_num(d), _num(H), _num(e)]


def run_spheroid(args):
    """Two perfect spheroids at large distance; energy E/(hbar c).

    ``--grid N`` tabulates an N x N grid over (theta1, theta2) in [0, pi].
    ``--model tensor`` evaluates the general dipole formula with spheroid
    polarizabilities instead of the needle/pancake limits.
    """
    yield ["theta1", "theta2", "psi", "energy"]
    if args.grid:
        angles = [(t1, t2) for t1 in np.linspace(0, math.pi, args.grid) for t2 in np.linspace(0, math.pi, args.grid)]
    else:
        angles = [(t1, args.theta2) for t1 in _sweep_values(args, args.theta1)]
    for t1, t2 in angles:
        if args.model == "tensor":
            eps = PERFECT_CONDUCTOR if args.eps is None else args.eps
            base = spheroid_polarizability(args.R, args.L, eps, args.mu)
            p1 = base.rotated(rotation(t1, args.psi))
            p2 = base.rotated(rotation(t2, 0.0))
            e = asymptotics.cp_two_objects(p1, p2, args.d)
        elif args.shape == "prolate":
            e = asymptotics.prolate_pair_energy(t1, t2, args.psi, args.L, args.R, args.d)
        else:
            e = asymptotics.oblate_pair_energy(t1, t2, args.psi, args.R, args.d)
        yield [_num(t1), _num(t2), _num(args.psi), _num(e)]


def run_pfa(args):
    """Proximity-force forms; sweep ``--sweep x`` for the curvature corrections."""
    yield ["x", "value"]
    params = {k: getattr(args, k) for k in ("R", "H", "r", "d") if getattr(args, k) is not None}
    for x in _sweep_values(args, args.x):
        p = dict(params)
        if x is not None:
            p["x"] = x
        yield [_num(x) if x is not None else "", _num(asymptotics.pfa_suite(args.kind, **p))]


def run_stability(args):
    """Classify two objects against the medium and report the verdict."""
    medium = _medium(args.medium)
    ks = stability.kappa_samples(args.separation)
    a = _material(args.eps_a, args.mu_a, args.table_a)
    b = _material(args.eps_b, args.mu_b, args.table_b)
    ca = stability.classify_detail(a, medium, ks)
    cb = stability.classify_detail(b, medium, ks)
    yield ["object", "class", "violating_kappa_min", "violating_kappa_max"]
    for name, c in (("a", ca), ("b", cb)):
        lo = _num(min(c.violations)) if c.violations else ""
        hi = _num(max(c.violations)) if c.violations else ""
        yield [name, c.label.value, lo, hi]
    yield ["verdict", stability.verdict([ca.label, cb.label]).value, "", ""]


def run_selftest(args):
    """Run the acceptance criteria and print one line per criterion."""
    from . import acceptance

    yield ["criterion", "status", "detail"]
    for res in acceptance.run_all(quick=args.quick):
        yield [res.key, "PASS" if res.passed else "FAIL", res.detail]


COMMANDS = {
    "cyl-cyl": run_cyl_cyl,
    "cyl-plate": run_cyl_plate,
    "parabola-plate": run_parabola_plate,
    "cp": run_cp,
    "spheroid": run_spheroid,
    "pfa": run_pfa,
    "stability": run_stability,
    "selftest": run_selftest,
}


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _add_sweep(p, choices):
    p.add_argument("--sweep", choices=("none",) + choices, default="none")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--log", action="store_true", help="log-spaced sweep")


def _add_solver(p):
    p.add_argument("--nmax", type=int, help="truncation order (default: automatic)")
    p.add_argument("--trunc-tol", type=float, default=1e-4)
    p.add_argument("--nodes", type=int, help="outer quadrature nodes (default: automatic)")
    p.add_argument("--quad-tol", type=float, default=1e-6)
    p.add_argument("--pol", choices=geometries.POLARIZATIONS, default="total")
    p.add_argument("--temperature", type=float, default=0.0, help="kT in inverse length units")
    p.add_argument("--medium", default="vacuum", help="'vacuum' or 'eps[:mu]'")


def build_parser():
    parser = argparse.ArgumentParser(prog="casimir-scatter", description="Casimir energies as CSV tables.")
    parser.add_argument("--version", action="version", version=f"casimir-scatter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=COMMANDS[name].__doc__)
        p.add_argument("--config", help="key=value file; flags take precedence")
        p.add_argument("-o", "--output", default="-", help="CSV path ('-' for stdout)")
        return p

    p = add("cyl-cyl", "two perfect cylinders")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--d", type=float, default=4.0, help="axis-to-axis distance")
    _add_sweep(p, ("d",))
    _add_solver(p)

    p = add("cyl-plate", "cylinder above a plate")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--H", type=float, default=2.0, help="axis-to-plate distance")
    p.add_argument("--eps-plate", default=None, help="plate permittivity (default: perfect conductor)")
    p.add_argument("--mu-plate", type=float, default=1.0)
    p.add_argument("--plate-table", help="material table 'kappa eps [mu]'")
    p.add_argument("--mode", choices=("full", "phi-e"), default="full")
    _add_sweep(p, ("H", "inv-eps"))
    _add_solver(p)

    p = add("parabola-plate", "parabolic cylinder and plate")
    p.add_argument("--R", type=float, default=0.0)
    p.add_argument("--H", type=float, default=1.0, help="closest surface distance at theta = 0")
    p.add_argument("--theta", type=float, default=0.0, help="tilt in radians")
    _add_sweep(p, ("H", "theta"))
    _add_solver(p)

    p = add("cp", "dipole-level energy of two objects beside a mirror")
    for name in ("alpha-z", "alpha-par", "beta-z", "beta-par"):
        p.add_argument(f"--{name}", type=float, default=0.0)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--H", type=float, default=None, help="distance to the mirror (omit: no mirror)")
    p.add_argument("--large-h", action="store_true", help="use the large-H expansion")
    _add_sweep(p, ("d", "H"))

    p = add("spheroid", "orientation dependence of two spheroids")
    p.add_argument("--shape", choices=("prolate", "oblate"), default="prolate")
    p.add_argument("--model", choices=("limit", "tensor"), default="limit")
    p.add_argument("--L", type=float, default=100.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--d", type=float, default=1000.0)
    p.add_argument("--eps", type=float, default=None, help="static permittivity (tensor model; default perfect)")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--theta1", type=float, default=0.0)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--psi", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=0)
    _add_sweep(p, ("theta1",))

    p = add("pfa", "proximity-force formulas")
    p.add_argument("--kind", choices=asymptotics.PFA_KINDS, required=True)
    for name in ("x", "R", "H", "r", "d"):
        p.add_argument(f"--{name}", type=float)
    _add_sweep(p, ("x",))

    p = add("stability", "material classes and the levitation verdict")
    for obj in ("a", "b"):
        p.add_argument(f"--eps-{obj}", default=None, help="permittivity ('pc' for a perfect conductor)")
        p.add_argument(f"--mu-{obj}", type=float, default=1.0)
        p.add_argument(f"--table-{obj}", help="material table")
    p.add_argument("--medium", default="vacuum")
    p.add_argument("--separation", type=float, default=1.0, help="sets the sampled kappa range")

    p = add("selftest", "run the acceptance criteria")
    p.add_argument("--quick", action="store_true", help="skip the slow numerical criteria")
    return parser, sub


def _read_config(path):
    cfg = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


def parse_args(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _read_config(args.config)
        subparser = sub.choices[args.command]
        known = {a.dest: a for a in subparser._actions}
        defaults = {}
        for k, v in cfg.items():
            if k not in known or k in ("config", "help"):
                raise UsageError(f"unknown config key {k!r}")
            action = known[k]
            if action.type is not None:
                try:
                    v = action.type(v)
                except ValueError:
                    raise UsageError(f"bad value for {k!r}: {v!r}") from None
            elif action.const is True:
                v = v.lower() in ("1", "true", "yes", "on")
            defaults[k] = v
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return parser, args


def _header(args):
    skip = {"command", "config", "output"}
    params = " ".join(f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip)
    return f"# casimir-scatter {__version__} {args.command} {params}"


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser, args = parse_args(argv)
    except UsageError as exc:
        build_parser()[0].print_usage(sys.stderr)
        print(f"casimir-scatter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    status = 0
    try:
        out.write(_header(args) + "\n")
        writer = csv.writer(out, lineterminator="\n")
        try:
            for row in COMMANDS[args.command](args):
                writer.writerow(row)
                out.flush()
                if args.command == "selftest" and row[1] == "FAIL":
                    status = 1
        except ConvergenceError as exc:
            out.write(f"# INCOMPLETE {exc}\n")
            print(f"casimir-scatter: {exc}", file=sys.stderr)
            return EXIT_NONCONVERGED
        except (UsageError, DomainError) as exc:
            parser.print_usage(sys.stderr)
            print(f"casimir-scatter: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except CasimirError as exc:
            print(f"casimir-scatter: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    finally:
        if out is not sys.stdout:
            out.close()
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

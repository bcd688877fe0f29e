"""Command-line front end.

Usage::

    discspaces construct --steps 6 --nu-schedule 1/k --out w.json
    discspaces verify --witness w.json --csv margins.csv
    discspaces norm --space dirichlet --p 3 --alpha 2 --coeffs 1,2,0.5j
    discspaces kernel-bound --nu -0.5 --gap 0.5
    discspaces cr-bound --p 3 --gap 0.5
    discspaces radial-profile --witness w.json --step 3 --grid 4096 --csv prof.csv
    discspaces membership --witness w.json --nu 1 --nu 1/2 --nu 1/3
    discspaces baire-a --witness w.json --nu -0.5 --grid 8192
    discspaces baire-h --witness wphi.json --p 3 --k-range 1,2,3
    discspaces dump --witness w.json --out copy.json
    discspaces load --witness w.json

Reports go to stdout as JSON, summaries to stderr. Exit status: 0 success,
2 invalid usage, 3 infeasible / failed verification / unmet precondition.
Radii are always entered as gaps ``1 - r``. ``--config file.json`` supplies
defaults for any flag (keys use underscores); explicit flags win. The default
precision comes from ``DISCSPACES_PRECISION`` when set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import mpmath

from . import baire, bounds, construction, series, spaces
from .errors import DiscSpacesError

log = logging.getLogger("discspaces")

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 2, 3
PRECISION_ENV = "DISCSPACES_PRECISION"


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _say(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _gap(text: str) -> Decimal:
    try:
        g = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a decimal gap: {text!r}") from None
    if not 0 < g <= 1:
        raise argparse.ArgumentTypeError("gap must lie in (0, 1]")
    return g


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _coeffs(text: str) -> tuple:
    try:
        return tuple(complex(part.strip().replace(" ", "")) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse coefficients {text!r}") from None


def _int_list(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def _read_witness(path: str) -> construction.LacunaryWitness:
    try:
        with open(path) as fh:
            return construction.load_witness(fh.read())
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read witness {path}: {exc}") from None


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _default_precision() -> int:
    env = os.environ.get(PRECISION_ENV)
    if env is None:
        return series.DEFAULT_PRECISION
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {env!r}") from None


# --- commands -------------------------------------------------------------------

def cmd_construct(args) -> int:
    phi = construction.WeightFunction.parse(args.phi) if args.phi else None
    cfg = construction.BuildConfig(
        steps=args.steps, nu_schedule=args.nu_schedule, nu=args.nu,
        gap_resolution=args.resolution, precision=args.precision, phi=phi)
    w = construction.build(cfg)
    text = construction.dump_witness(w)
    for k, s in enumerate(w.steps, start=1):
        _say(f"step {k}: c={s.c} n~{mpmath.nstr(mpmath.mpf(s.n), 4)} "
             f"({s.n.bit_length()} bits) gap={s.gap} nu={s.nu}")
    if args.out:
        _write(args.out, text)
        _emit({"out": args.out, "steps": len(w.steps),
               "max_exponent": str(w.steps[-1].n), "min_gap": str(w.steps[-1].gap)})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    w = _read_witness(args.witness)
    report = construction.verify(w, args.precision)
    _emit(report.to_json())
    if args.csv:
        digits = series.csv_digits(args.precision)
        rows = ["k,inequality,margin"]
        for m in report.margins:
            rows.append(f"{m.step},{m.inequality},{mpmath.nstr(m.value, digits)}")
        _write(args.csv, "\n".join(rows) + "\n")
    if report.passed:
        _say(f"verified {len(w.steps)} steps at {args.precision} and {2 * args.precision} bits")
        return EXIT_OK
    for m in report.failures:
        _say(f"FAILED step {m.step} {m.inequality}: {mpmath.nstr(m.value, 12)}")
    for k, msg in report.structure:
        _say(f"FAILED step {k}: {msg}")
    return EXIT_FAILED


def _space(args) -> spaces.SpaceSpec:
    kind = args.space
    if kind == "s-nu":
        if args.nu is None:
            raise UsageError("--space s-nu needs --nu")
        return spaces.SpaceSpec.weighted_hardy(float(args.nu))
    if args.p is None:
        raise UsageError(f"--space {kind} needs --p")
    if kind == "hardy":
        return spaces.SpaceSpec.hardy(args.p)
    alpha = args.alpha if args.alpha is not None else (args.p - 1 if kind == "dirichlet" else 0.0)
    return spaces.SpaceSpec(kind, p=args.p, alpha=alpha)


def cmd_norm(args) -> int:
    f = series.PowerSeries(args.coeffs, args.precision)
    space = _space(args)
    q = spaces.QuadratureConfig(tolerance=args.tolerance)
    if space.kind == "hardy" and args.gap is None:
        raise UsageError("Hardy norms need an explicit --gap")
    rep = spaces.norm_report(f, space, q, gap=args.gap, grid=args.grid)
    out = rep.to_json()
    if space.kind == "weighted-hardy":
        out["value"] = mpmath.nstr(spaces.s_nu_norm(f, space.nu), series.csv_digits(args.precision))
    _emit(out)
    return EXIT_OK


def cmd_kernel_bound(args) -> int:
    b = bounds.kernel_bound(float(args.nu), args.gap, args.tolerance)
    _emit(b.to_json())
    return EXIT_OK


def cmd_cr_bound(args) -> int:
    if args.gap is None and args.r is None:
        raise UsageError("cr-bound needs --gap (or --r)")
    gap = args.gap if args.gap is not None else Decimal(1) - args.r
    if not 0 < gap <= 1:
        raise UsageError("radius must lie in [0, 1)")
    b = bounds.l1_bound(args.p, gap, args.precision)
    out = b.to_json()
    out["normalized"] = mpmath.nstr(bounds.c_of_r_normalized(args.p, gap, args.precision), 30)
    _emit(out)
    return EXIT_OK


def cmd_radial_profile(args) -> int:
    if args.witness:
        w = _read_witness(args.witness)
        f = w.series()
    elif args.coeffs:
        w, f = None, series.PowerSeries(args.coeffs, args.precision)
    else:
        raise UsageError("radial-profile needs --witness or --coeffs")
    if args.step is not None:
        if w is None or not 1 <= args.step <= len(w.steps):
            raise UsageError("--step needs a witness and a valid step index")
        gap = w.steps[args.step - 1].gap
    elif args.gap is not None:
        gap = args.gap
    else:
        raise UsageError("radial-profile needs --gap or --step")
    prof = series.circle_profile(f, gap, args.grid, args.precision)
    digits = series.csv_digits(args.precision)
    out = {"gap": str(gap), "grid": args.grid,
           "min": mpmath.nstr(min(prof), digits), "max": mpmath.nstr(max(prof), digits)}
    if args.step is not None:
        out["step"] = args.step
        out["lower_bound"] = mpmath.nstr(
            construction.min_modulus_lower_bound(w, args.step, args.precision), digits)
    if args.csv:
        _write(args.csv, series.profile_csv(prof, args.precision))
    if args.min_csv:
        if w is None:
            raise UsageError("--min-csv needs a witness")
        rows = ["r_gap,min_modulus"]
        for s in w.steps:
            m = min(series.circle_profile(f, s.gap, args.grid, args.precision))
            rows.append(f"{s.gap},{mpmath.nstr(m, digits)}")
        _write(args.min_csv, "\n".join(rows) + "\n")
    _emit(out)
    return EXIT_OK


def cmd_membership(args) -> int:
    w = _read_witness(args.witness)
    out = []
    lac = w.series()
    for nu in args.nu or [Fraction(1)]:
        t = construction.membership_tail(w, nu, args.precision)
        rec = t.to_json()
        rec["stored_norm_squared"] = mpmath.nstr(
            spaces.s_nu_norm_lacunary(lac, -nu, args.precision) ** 2, 30)
        out.append(rec)
    _emit({"membership": out})
    return EXIT_OK


def _descriptor(args, mode: str) -> dict:
    desc = {}
    if args.descriptor:
        try:
            with open(args.descriptor) as fh:
                desc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read descriptor: {exc}") from None
    desc.setdefault("mode", mode)
    if args.witness:
        desc["witness"] = args.witness
    if "witness" not in desc:
        raise UsageError("experiment needs a witness file")
    if args.n_range is not None:
        desc["n_range"] = args.n_range
    if args.k_range is not None:
        desc["k_range"] = args.k_range
    for key in ("grid", "seed", "samples"):
        if getattr(args, key) is not None:
            desc[key] = getattr(args, key)
    if mode == "kernel":
        if args.nu is not None:
            desc["space"] = {"kind": "weighted-hardy", "nu": float(args.nu)}
        desc.setdefault("space", {"kind": "weighted-hardy", "nu": -0.5})
    else:
        if args.p is not None:
            desc["space"] = {"kind": "dirichlet", "p": args.p, "alpha": args.p - 1}
        desc.setdefault("space", {"kind": "dirichlet", "p": 3.0, "alpha": 2.0})
        if args.phi:
            desc["phi"] = args.phi
    return desc


def _run_baire(args, mode: str) -> int:
    desc = _descriptor(args, mode)
    w = _read_witness(desc["witness"])
    result = baire.run_experiment(desc, w)
    result["witness"] = desc["witness"]
    _emit(result)
    for c in result["cells"]:
        _say(f"cell n={c['n']} k={c['k']} M={c['M']}: {'pass' if c['passed'] else 'FAIL'}")
    return EXIT_OK if result["passed"] else EXIT_FAILED


def cmd_baire_a(args) -> int:
    return _run_baire(args, "kernel")


def cmd_baire_h(args) -> int:
    return _run_baire(args, "l1-average")


def cmd_dump(args) -> int:
    w = _read_witness(args.witness)
    text = construction.dump_witness(w)
    if args.out:
        _write(args.out, text)
        _emit({"out": args.out, "steps": len(w.steps)})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_load(args) -> int:
    w = _read_witness(args.witness)
    sys.stdout.write(construction.dump_witness(w))
    _say(f"loaded {len(w.steps)} steps ({w.mode}"
         f"{', weighted' if w.phi else ''}) from {args.witness}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------

def build_parser(precision: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discspaces", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="JSON file with flag defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--precision", type=int, default=precision)
        p.set_defaults(func=fn)
        return p

    p = add("construct", cmd_construct, "build a certified blow-up witness")
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--nu-schedule", default="1/k")
    p.add_argument("--nu", type=_fraction, help="single exponent for every step")
    p.add_argument("--phi", help="growth weight: log or power:<s>")
    p.add_argument("--resolution", type=int, default=32, help="gap candidates per decade")
    p.add_argument("--out")

    p = add("verify", cmd_verify, "certify all inequalities of a witness")
    p.add_argument("--witness", required=True)
    p.add_argument("--csv", help="write k,inequality,margin rows")

    p = add("norm", cmd_norm, "norm of a polynomial")
    p.add_argument("--space", choices=["s-nu", "hardy", "bergman", "dirichlet"], required=True)
    p.add_argument("--coeffs", type=_coeffs, required=True)
    p.add_argument("--nu", type=_fraction)
    p.add_argument("--p", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gap", type=_gap)
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--tolerance", type=float, default=1e-10)

    p = add("kernel-bound", cmd_kernel_bound, "norm of point evaluation on S_nu")
    p.add_argument("--nu", type=_fraction, required=True)
    p.add_argument("--gap", type=_gap, required=True)
    p.add_argument("--tolerance", type=float, default=1e-12)

    p = add("cr-bound", cmd_cr_bound, "circle-average constant C(r) on D^p_{p-1}")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--gap", type=_gap)
    p.add_argument("--r", type=Decimal, help="radius (convenience; prefer --gap)")

    p = add("radial-profile", cmd_radial_profile, "moduli on a circle")
    p.add_argument("--witness")
    p.add_argument("--coeffs", type=_coeffs)
    p.add_argument("--gap", type=_gap)
    p.add_argument("--step", type=int)
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--csv", help="write theta,modulus rows")
    p.add_argument("--min-csv", help="write r_gap,min_modulus rows over all witness steps")

    p = add("membership", cmd_membership, "certified S_{-nu} tail bounds")
    p.add_argument("--witness", required=True)
    p.add_argument("--nu", type=_fraction, action="append")

    for name, fn in (("baire-a", cmd_baire_a), ("baire-h", cmd_baire_h)):
        p = add(name, fn, "grid measure experiment over ball cells")
        p.add_argument("--descriptor", help="experiment descriptor JSON")
        p.add_argument("--witness")
        p.add_argument("--n-range", type=_int_list)
        p.add_argument("--k-range", type=_int_list)
        p.add_argument("--grid", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        if name == "baire-a":
            p.add_argument("--nu", type=_fraction, help="space S_nu for the kernel constant")
        else:
            p.add_argument("--p", type=float, help="space D^p_{p-1}")
            p.add_argument("--phi", help="growth weight: log or power:<s>")

    p = add("dump", cmd_dump, "re-serialize a witness canonically")
    p.add_argument("--witness", required=True)
    p.add_argument("--out")

    p = add("load", cmd_load, "load a witness and echo it")
    p.add_argument("--witness", required=True)
    return parser


def _apply_config(parser, argv):
    """Re-parse with ``--config`` values as defaults for the chosen subcommand."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            conf = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config: {exc}")
    if not isinstance(conf, dict):
        parser.error("config must be a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(conf) - known)
    if unknown:
        parser.error(f"unknown config keys for {args.command}: {', '.join(unknown)}")
    converted = {}
    for action in subparser._actions:
        if action.dest in conf:
            value = conf[action.dest]
            if action.type is not None and isinstance(value, str):
                value = action.type(value)
            converted[action.dest] = value
    subparser.set_defaults(**converted)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser = build_parser(_default_precision())
    except UsageError as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "precision", 256) < 2:
        _say("error: precision must be at least 2 bits")
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, argparse.ArgumentTypeError) as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE
    except DiscSpacesError as exc:
        _say(f"failed: {exc}")
        _emit({"error": type(exc).__name__, "message": str(exc),
               **({"step": exc.step, "inequality": exc.inequality}
                  if hasattr(exc, "inequality") else {})})
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

"""``stabrad`` command-line front end.

Every subcommand prints a short human-readable summary and, with ``--out``,
writes its artifacts (traces, Matrix Market perturbations, CSV grids, JSON
reports) into that directory. Library errors map to distinct exit codes;
run timestamps go to ``meta.json`` so the other outputs are reproducible
byte for byte.
"""

from __future__ import annotations

import argparse
import datetime
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as sio
from .bounds import contour_bound, exp_norms, verify_l2_bound
from .errors import ParseError, SizeGuard, StabradError
from .inner import InnerOptions
from .outer import OuterConfig, check_hurwitz, solve_radius
from .pseudospectra import (
    GridSpec,
    axis_sweep,
    default_grid,
    enclosing_grid,
    joint_pseudospectrum_sample,
    level_contours,
    resolvent_field,
)
from .structures import StructureSpace

log = logging.getLogger("stabrad")

SIZE_LIMIT = 1500
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_BAD_INPUT = 4


# ----------------------------------------------------------------------------
# input assembly


def load_matrix(args):
    """The input matrix and its stored pattern (None for generators)."""
    if args.matrix and args.generator:
        raise ValueError("give either --matrix or --generator, not both")
    pattern = None
    if args.matrix:
        mm = sio.read_matrix_market(args.matrix)
        A, pattern = mm.matrix, mm.pattern
    elif args.generator:
        name, _, arg = args.generator.partition(":")
        if name != "grcar":
            raise ValueError(f"unknown generator {name!r} (available: grcar:N)")
        try:
            n = int(arg)
        except ValueError:
            raise ValueError("generator spec must look like grcar:N") from None
        A = sio.grcar(n, args.shift)
    else:
        raise ValueError("one of --matrix or --generator is required")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape[0]}x{A.shape[1]}")
    if A.shape[0] > SIZE_LIMIT and not args.allow_large:
        raise SizeGuard(f"n = {A.shape[0]} exceeds {SIZE_LIMIT}; pass --allow-large to proceed")
    if np.iscomplexobj(A) and not np.any(A.imag):
        A = A.real.copy()
    return A, pattern


def parse_structure(spec, A, pattern_file=None, stored=None):
    """Structure from a CLI spec; ``:self`` uses the stored pattern when known."""
    if spec is None:
        return None
    n = A.shape[0]
    kind, _, arg = spec.partition(":")
    if kind in ("full-real", "full-complex"):
        return StructureSpace(kind, n)
    if kind in ("sparsity-real", "sparsity-complex"):
        real = kind == "sparsity-real"
        if pattern_file:
            return StructureSpace.sparsity(sio.read_pattern(pattern_file), n, real=real)
        if arg == "self":
            if stored is not None:
                return StructureSpace.sparsity(stored, n, real=real)
            return StructureSpace.sparsity_of(A, real=real)
        raise ValueError(f"{kind} needs ':self' or --pattern-file")
    if kind == "toeplitz-real":
        try:
            p, q = (int(t) for t in arg.split(","))
        except ValueError:
            raise ValueError("toeplitz structure must look like toeplitz-real:p,q") from None
        return StructureSpace.toeplitz_band(n, p, q)
    raise ValueError(f"unknown structure {spec!r}")


def inner_options(args):
    return InnerOptions(
        try_both_signs=args.both_signs,
        restarts=args.restarts,
        integrator=args.integrator,
        seed=args.seed,
        max_steps=args.max_steps,
    )


def load_perturbation(path, n):
    D = sio.read_matrix_market(path).matrix
    if D.shape != (n, n):
        raise ValueError(f"perturbation is {D.shape[0]}x{D.shape[1]}, matrix is {n}x{n}")
    return D


def out_dir(args):
    if not args.out:
        return None
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_meta(path, args, command):
    sio.write_json(
        path / "meta.json",
        {
            "schema": sio.SCHEMA,
            "command": command,
            "argv": sys.argv[1:],
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "version": __version__,
        },
    )


def grid_from_args(args, A, level=None):
    window = (args.re_min, args.re_max, args.im_min, args.im_max)
    if all(v is not None for v in window):
        return GridSpec(*window, args.nx, args.ny)
    if any(v is not None for v in window):
        raise ValueError("give all of --re-min/--re-max/--im-min/--im-max or none")
    if level is not None:
        return enclosing_grid(A, level, args.nx, args.ny)
    return default_grid(A, args.nx, args.ny)


# ----------------------------------------------------------------------------
# subcommands


def _radius(args, mode):
    A, stored = load_matrix(args)
    S = parse_structure(args.structure, A, args.pattern_file, stored)
    if S is None:
        raise ValueError("--structure is required")
    config = OuterConfig(
        mode=mode,
        eps=args.eps if mode == "delta" else None,
        delta=args.delta if mode == "eps" else None,
        tol0=args.tol0,
        k_max=args.kmax,
        start=args.start,
        inner=inner_options(args),
    )
    trace = solve_radius(A, S, config)
    table = sio.format_trace_table(trace)
    name = "delta" if mode == "delta" else "eps"
    print(table)
    print(f"{name} = {trace.final:.14e}  ({trace.status}, {trace.iterations} iterations)")

    res = trace.result
    eps = args.eps if mode == "delta" else trace.final
    delta = trace.final if mode == "delta" else args.delta
    extra = {"eps": eps, "delta": delta, "resolvent_bound": 1.0 / eps, "n": A.shape[0]}
    path = out_dir(args)
    if path:
        (path / "trace.txt").write_text(table + "\n")
        sio.write_json(path / "trace.json", sio.trace_to_dict(trace, S.spec(), extra))
        sio.write_matrix_market(path / "E.mtx", res.E)
        # Delta = delta * eta P(E) is evaluated at the last inner solve
        sio.write_matrix_market(path / "Delta.mtx", res.state.sign * delta * res.ES, pattern=_pattern_of(S))
        sio.write_matrix_market(path / "Theta.mtx", eps * res.E)
        write_meta(path, args, f"radius-{mode}")
    return 0


def _pattern_of(S):
    if S.kind.startswith("sparsity"):
        return list(S.pattern)
    return None


def cmd_radius_delta(args):
    if args.eps is None or args.eps <= 0:
        raise ValueError("radius-delta needs --eps > 0")
    return _radius(args, "delta")


def cmd_radius_eps(args):
    if args.delta is None or args.delta < 0:
        raise ValueError("radius-eps needs --delta >= 0")
    return _radius(args, "eps")


def cmd_stability_radius(args):
    A, _ = load_matrix(args)
    config = OuterConfig(mode="eps", delta=0.0, tol0=args.tol0, k_max=args.kmax, inner=inner_options(args))
    trace = solve_radius(A, None, config)
    omega, sigma = axis_sweep(A)
    table = sio.format_trace_table(trace)
    print(table)
    print(f"eps* = {trace.final:.14e}  (axis sweep: {sigma:.14e} at omega = {omega:.10g})")
    path = out_dir(args)
    if path:
        (path / "trace.txt").write_text(table + "\n")
        extra = {"axis_sweep": {"omega": omega, "sigma_min": sigma}, "n": A.shape[0]}
        sio.write_json(path / "trace.json", sio.trace_to_dict(trace, None, extra))
        write_meta(path, args, "stability-radius")
    return 0


def cmd_pseudospectrum(args):
    A, _ = load_matrix(args)
    levels = args.levels or ([args.eps] if args.eps else None)
    if not levels:
        raise ValueError("pseudospectrum needs --levels (or --eps)")
    M = A + load_perturbation(args.perturbation, A.shape[0]) if args.perturbation else A
    grid = grid_from_args(args, M)
    field = resolvent_field(M, grid)
    contours = {lv: level_contours(field, lv) for lv in levels}
    for lv, curves in contours.items():
        right = max((c.real.max() for c in curves), default=float("nan"))
        print(f"level {lv:g}: {len(curves)} curve(s), rightmost Re = {right:.10g}")
    path = out_dir(args)
    if path:
        sio.write_field_csv(path / "field.csv", field)
        sio.write_contours_csv(path / "contours.csv", contours)
        write_meta(path, args, "pseudospectrum")
    return 0


def cmd_verify_bounds(args):
    A, stored = load_matrix(args)
    check_hurwitz(A)
    S = parse_structure(args.structure, A, args.pattern_file, stored)
    if S is None:
        raise ValueError("--structure is required")
    if args.eps is None or args.eps <= 0:
        raise ValueError("verify-bounds needs --eps > 0")
    eps = args.eps
    extremal = None
    if args.perturbation:
        extremal = load_perturbation(args.perturbation, A.shape[0])
    if args.delta is None:
        trace = solve_radius(A, S, OuterConfig(mode="delta", eps=eps, k_max=args.kmax, inner=inner_options(args)))
        delta = trace.final
        if extremal is None:
            extremal = trace.result.state.sign * delta * trace.result.ES
    else:
        delta = args.delta
    print(f"eps = {eps:.14e}, delta = {delta:.14e}")

    grid = grid_from_args(args, A, level=eps + delta)
    cb = contour_bound(A, S, eps, delta, resolvent_field(A, grid))
    print(f"contour bound |Gamma|/(2 pi eps) = {cb.bound:.10g}  (|Gamma| = {cb.gamma_length:.10g})")
    exp_check = None
    if extremal is not None:
        ts = np.geomspace(1e-2, args.T, 20)
        norms = exp_norms(A + extremal, ts)
        exp_check = {"t": ts.tolist(), "norms": norms.tolist(), "dominated": bool(np.all(norms <= cb.bound))}
        print(f"max ||exp(t(A+Delta))||_2 over 20 t = {norms.max():.10g}")

    report = verify_l2_bound(
        A, S, eps, delta,
        n_perturbations=args.samples,
        forcing=args.forcing,
        T=args.T,
        n_steps=args.n_steps,
        rng_seed=args.seed,
        extremal=extremal,
        omega=args.omega,
    )
    print(f"L2 ratio: max {report.max_ratio:.10g} vs 1/eps = {report.bound:.10g}, "
          f"{len(report.violations)} violation(s) in {report.n_samples} samples (sampled certification)")
    path = out_dir(args)
    if path:
        out = report.to_dict()
        out["schema"] = sio.SCHEMA
        out["contour"] = {"gamma_length": cb.gamma_length, "bound": cb.bound, "components": len(cb.contours)}
        if exp_check:
            out["exp_check"] = exp_check
        sio.write_json(path / "bounds.json", out)
        write_meta(path, args, "verify-bounds")
    return 0 if report.ok and (exp_check is None or exp_check["dominated"]) else 1


def cmd_sample_joint(args):
    A, stored = load_matrix(args)
    S = parse_structure(args.structure, A, args.pattern_file, stored)
    eps = args.eps or 0.0
    delta = args.delta or 0.0
    if eps < 0 or delta < 0:
        raise ValueError("--eps and --delta must be nonnegative")
    if delta > 0 and S is None:
        raise ValueError("--structure is required when --delta > 0")
    clouds = joint_pseudospectrum_sample(
        A, S, eps, delta, args.samples, rng_seed=args.seed, fixed_radius=args.fixed_radius
    )
    pts = np.concatenate(clouds)
    print(f"{len(clouds)} samples, {pts.size} points, max Re = {pts.real.max():.10g}")
    path = out_dir(args)
    if path:
        sio.write_clouds_csv(path / "clouds.csv", clouds)
        write_meta(path, args, "sample-joint")
    return 0


# ----------------------------------------------------------------------------
# parser


def _common(p):
    src = p.add_argument_group("matrix")
    src.add_argument("--matrix", help="Matrix Market file")
    src.add_argument("--generator", help="built-in matrix, e.g. grcar:10")
    src.add_argument("--shift", type=float, default=1.0, help="shift for grcar (default 1)")
    src.add_argument("--allow-large", action="store_true", help=f"lift the n <= {SIZE_LIMIT} guard")
    p.add_argument("--out", help="directory for output artifacts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="count", default=0)


def _structure(p):
    p.add_argument(
        "--structure",
        help="sparsity-real:self | sparsity-complex:self | toeplitz-real:p,q | full-real | full-complex",
    )
    p.add_argument("--pattern-file", help="'i j' pairs (1-based) for a sparsity structure")


def _solver(p):
    g = p.add_argument_group("solver")
    g.add_argument("--kmax", type=int, default=20, help="outer iteration budget")
    g.add_argument("--tol0", type=float, help="initial outer tolerance")
    g.add_argument("--start", type=float, help="initial delta (or eps)")
    g.add_argument("--both-signs", action="store_true", help="scan both sign branches")
    g.add_argument("--restarts", type=int, default=1)
    g.add_argument("--integrator", choices=("splitting", "full-euler"), default="splitting")
    g.add_argument("--max-steps", type=int, default=5000, help="inner step budget")


def _grid(p, nx=101):
    g = p.add_argument_group("grid")
    for name in ("--re-min", "--re-max", "--im-min", "--im-max"):
        g.add_argument(name, type=float)
    g.add_argument("--nx", type=int, default=nx)
    g.add_argument("--ny", type=int, default=nx)


def build_parser():
    parser = argparse.ArgumentParser(prog="stabrad", description="Structured stability radii of Hurwitz matrices.")
    parser.add_argument("--version", action="version", version=f"stabrad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radius-delta", help="structured eps-stability radius at fixed eps")
    _common(p)
    _structure(p)
    _solver(p)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_radius_delta, delta=None)

    p = sub.add_parser("radius-eps", help="eps for which a given delta is the structured radius")
    _common(p)
    _structure(p)
    _solver(p)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_radius_eps, eps=None)

    p = sub.add_parser("stability-radius", help="unstructured stability radius eps*")
    _common(p)
    _solver(p)
    p.set_defaults(func=cmd_stability_radius)

    p = sub.add_parser("pseudospectrum", help="resolvent-norm grid and level sets")
    _common(p)
    _grid(p)
    p.add_argument("--levels", type=float, nargs="+", help="pseudospectrum levels")
    p.add_argument("--eps", type=float, help="single level (alias of --levels)")
    p.add_argument("--perturbation", help="Matrix Market Delta; the grid is computed for A + Delta")
    p.set_defaults(func=cmd_pseudospectrum)

    p = sub.add_parser("verify-bounds", help="sampled certification of the transient bounds")
    _common(p)
    _structure(p)
    _solver(p)
    _grid(p, nx=201)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, help="default: the computed structured radius")
    p.add_argument("--perturbation", help="extremal Delta (Matrix Market); default: from the solver")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--forcing", choices=("noise", "harmonic"), default="noise")
    p.add_argument("--omega", type=float, help="frequency for harmonic forcing")
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--n-steps", type=int, default=10000)
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("sample-joint", help="random points of the joint pseudospectrum")
    _common(p)
    _structure(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--fixed-radius", action="store_true", help="sample on the spheres instead of the balls")
    p.set_defaults(func=cmd_sample_joint)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"stabrad: parse error: {exc}", file=sys.stderr)
        return exc.exit_code
    except StabradError as exc:
        print(f"stabrad: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"stabrad: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"stabrad: invalid input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # last resort: report instead of a traceback
        log.debug("unexpected failure", exc_info=True)
        print(f"stabrad: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

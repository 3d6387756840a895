"""Command line interface: mesh generation, single solves, studies, checks.

Exit codes: 0 ok, 2 argument error, 3 numerical failure, 4 io error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, geometry as geo
from .assembly import assemble
from .degrees import assign_hp, assign_uniform
from .eigensolve import CoverageError, SolverConfig, SolverError, cluster_values, solve_generalized
from .local import DRECIPE, EXPLICIT
from .polyspace import ConditioningError

STABS = {"drecipe": DRECIPE, "explicit": EXPLICIT}


def _add_common(parser):
    parser.add_argument("--case", default="tc1_square_laplace", choices=bench.CASES)
    parser.add_argument("--regime", default="h", choices=["h", "p", "hp"])
    parser.add_argument("--p", type=int, default=1, help="uniform degree (h-regime)")
    parser.add_argument("--pmax", type=int, default=8, help="largest degree (p-regime)")
    parser.add_argument("--mu", type=int, default=1, help="hp degree slope")
    parser.add_argument("--sigma", type=float, default=0.5, help="hp grading parameter")
    parser.add_argument("--layers", type=int, default=6, help="hp refinement depth n")
    parser.add_argument("--stab", default="drecipe", choices=sorted(STABS))
    parser.add_argument("--eps", type=float, default=2.0, help="checkerboard contrast")
    parser.add_argument("--neigs", type=int, default=0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--ref-file", default=None, help="reference spectrum file")
    parser.add_argument("--config", default=None, help="key=value file mirroring flags")


def _apply_config_file(args, path):
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if not hasattr(args, key):
            raise ValueError(f"unknown config key: {key!r}")
        current = getattr(args, key)
        if isinstance(current, bool):
            value = value.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        setattr(args, key, value)
    return args


def _study_config(args):
    return bench.StudyConfig(
        case=args.case, regime=args.regime, p=args.p,
        pmax=args.pmax, mu=args.mu, sigma=args.sigma, n_max=args.layers,
        eps=args.eps, stab=STABS[args.stab], n_eigs=args.neigs,
        rng_seed=args.seed, ref_file=args.ref_file)


def cmd_mesh(args):
    config = _study_config(args)
    case = bench.get_test_case(args.case, eps=args.eps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for run, value in enumerate(bench._run_values(config)):
        mesh, dm, _ = bench._mesh_for_run(case, config, value)
        layers = None
        if config.regime == "hp":
            kind = "Lshape" if args.case == "tc3_lshape" else "square_checkerboard"
            layers = geo.generate_graded(kind, int(value), config.sigma).layer_of_cell
        path = out / f"{args.case}_{config.regime}_{run:02d}.poly"
        geo.write_mesh(path, mesh, layers=layers, degrees=dm.cell_degrees)
        written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_solve(args):
    """Solve one configuration: h uses --layers as the mesh resolution,
    p uses the fixed study mesh at degree --pmax, hp the graded depth --layers."""
    case = bench.get_test_case(args.case, eps=args.eps)
    config = _study_config(args)
    if args.regime == "hp":
        kind = "Lshape" if args.case == "tc3_lshape" else "square_checkerboard"
        layered = geo.generate_graded(kind, args.layers, args.sigma)
        mesh, dm = layered.mesh, assign_hp(layered, args.mu)
    elif args.regime == "p":
        mesh, dm, _ = bench._mesh_for_run(case, config, args.pmax)
    else:
        mesh, dm, _ = bench._mesh_for_run(case, config, max(1, args.layers))
    system = assemble(mesh, dm, case.coeffs, STABS[args.stab], case.bc)
    n_eigs = args.neigs or 8
    result = solve_generalized(system.a, system.m,
                               SolverConfig(n_eigs=n_eigs,
                                            drop_zero_mode=not case.bc.is_dirichlet,
                                            rng_seed=args.seed))
    print(f"# case={args.case} regime={args.regime} dofs={system.n}")
    if result.zero_mode is not None:
        print(f"# zero mode: {result.zero_mode!r}")
    for cl in cluster_values(result.eigenvalues, 1e-6):
        print(f"{float(np.mean(cl))!r} {len(cl)}")
    return 0


def cmd_study(args):
    config = _study_config(args)
    out = Path(args.out)
    basename = f"{args.case}_{args.regime}"
    if config.regime == "h":
        basename += f"_p{config.p}"
    try:
        records = bench.run_study_with_config(config)
    except bench.StudyError as exc:
        if exc.records:
            bench.emit_report(exc.records, [], fmt="csv", out_dir=out, basename=basename)
        print(f"study aborted: {exc}", file=sys.stderr)
        return 3
    try:
        fits = bench.fit_rates(records, model=config.fit_model)
    except bench.FitError:
        fits = []
    paths = bench.emit_report(records, fits, fmt="both", out_dir=out, basename=basename)
    for path in paths:
        print(path)
    return 0


def cmd_check(args):
    """Quick property audit printing one PASS/FAIL line per check."""
    from .local import LocalSpace, dofs_of_function

    failures = 0

    def report(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}")
        failures += 0 if ok else 1

    mesh = geo.generate_voronoi(12, (0, 1, 0, 1), lloyd_iterations=2, rng_seed=args.seed)
    report("voronoi partition of unity",
           abs(mesh.cell_areas().sum() - 1.0) < 1e-10)
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    space = LocalSpace(sq, 3)
    mats = space.local_matrices(None, STABS[args.stab])
    dq = dofs_of_function(space, lambda x, y: x)
    report("patch test q = x", abs(dq @ mats.a @ dq - 1.0) < 1e-10)
    m2 = geo.generate_cartesian(3, 3, (0, 1, 0, 1))
    from .assembly import BoundaryCondition, NEUMANN, constant_vector
    s = assemble(m2, assign_uniform(m2, 3), None, STABS[args.stab],
                 BoundaryCondition(NEUMANN))
    c = constant_vector(s.dof_map)
    report("constants in stiffness kernel", abs(s.a @ c).max() < 1e-11 * abs(s.a).max())
    r = solve_generalized(s.a, s.m, SolverConfig(n_eigs=3, drop_zero_mode=True))
    report("solver residual certificates", bool((r.residuals < 1e-10).all()))
    lay = geo.generate_graded("Lshape", 2, 0.5)
    report("graded mesh layer recompute",
           np.array_equal(geo.compute_layers(lay.mesh, [[0, 0]], 3).layer_of_cell,
                          lay.layer_of_cell))
    return 0 if failures == 0 else 3


def build_parser():
    parser = argparse.ArgumentParser(prog="hpvem",
                                     description="hp virtual element eigenvalue benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("mesh", cmd_mesh), ("solve", cmd_solve),
                     ("study", cmd_study), ("check", cmd_check)):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    try:
        import threadpoolctl

        # element-local dense algebra is tiny; threaded BLAS only thrashes
        threadpoolctl.threadpool_limits(1)
    except ImportError:
        pass
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            _apply_config_file(args, args.config)
        return args.fn(args)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code) if exc.code is not None else 0
    except FileNotFoundError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    except (SolverError, CoverageError, ConditioningError, geo.GeometryError,
            geo.MeshError, bench.FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

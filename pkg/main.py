import argparse
import sys
from typing import Optional

import numpy as np
from dotenv import load_dotenv

from adq.CliIo.FileFormats import FileFormats
from adq.CliIo.FileFormatsModels import Provenance
from adq.CliIo.MeshExporter import MeshExporter
from adq.CliIo.Verifier import Verifier
from adq.CliIo.VerifierModels import VerifySuite
from adq.Config import Budgets
from adq.ConvexCore.ConvexCoreModels import BallBody
from adq.Errors import AdqError, BadDims, ConcentrationFail, InadmissibleMeasure, NoConvergence
from adq.Functionals.Functionals import Functionals
from adq.Grassmann.SphereLattice import circle_points, fibonacci_sphere
from adq.Logger import Logger
from adq.Solver.MinkowskiSolver import MinkowskiSolver
from adq.Solver.SolverModels import DiscreteMeasure, SolveConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Affine dual quermassintegrals, their Lp curvature measures and Minkowski solvers",
    )
    budgets = argparse.ArgumentParser(add_help=False)
    budgets.add_argument("--seed", type=int)
    budgets.add_argument("--budget-sphere", type=int)
    budgets.add_argument("--budget-grassmann", type=int)
    budgets.add_argument("--budget-sub", type=int)

    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", parents=[budgets], help="solve the Lp Minkowski problem")
    solve.add_argument("--measure", required=True)
    solve.add_argument("--p", type=float, required=True)
    solve.add_argument("--m", type=int, required=True)
    solve.add_argument("--symmetric", action="store_true")
    solve.add_argument("--resolution", type=int, help="atomize onto this many sphere cells first")
    solve.add_argument("--tol", type=float, default=1e-3)
    solve.add_argument("--max-iters", type=int, default=500)
    solve.add_argument("--force", action="store_true", help="proceed past concentration/guarantee warnings")
    solve.add_argument("--out", default="body.json")
    solve.add_argument("--report", default="report.json")

    evaluate = commands.add_parser("eval", parents=[budgets], help="evaluate functionals of a body")
    evaluate.add_argument("quantity", choices=["psi", "atoms", "vq", "ibody", "bidual", "profile"])
    evaluate.add_argument("--body", required=True)
    evaluate.add_argument("--m", type=int, default=1)
    evaluate.add_argument("--p", type=float, default=0.0)
    evaluate.add_argument("--q", type=float)
    evaluate.add_argument("--directions", type=int, default=64, help="grid size for ibody/bidual/profile")
    evaluate.add_argument("--out", help="CSV table (ibody, bidual, profile) or measure file (atoms)")

    verify = commands.add_parser("verify", parents=[budgets], help="run the invariant suites")
    verify.add_argument("--filter", nargs="*", choices=VerifySuite.names(), default=None)

    export = commands.add_parser("export", parents=[budgets], help="export a body for external viewing")
    export.add_argument("--body", required=True)
    export.add_argument("--out", required=True)
    export.add_argument("--csv", action="store_true", help="vertex CSV for polygons")
    return parser


def resolve_budgets(args: argparse.Namespace) -> Budgets:
    """Built-in defaults < ADQ_* environment < command-line flags."""
    budgets = Budgets.from_env()
    overrides = {
        "seed": args.seed,
        "sphere": args.budget_sphere,
        "grassmann": args.budget_grassmann,
        "sub": args.budget_sub,
    }
    return budgets.model_copy(update={k: v for k, v in overrides.items() if v is not None})


def command_line(args: argparse.Namespace) -> str:
    """Canonical, order-independent rendering of the parsed command."""
    options = [
        f"--{key.replace('_', '-')}={value}"
        for key, value in sorted(vars(args).items())
        if key != "command" and value not in (None, False)
    ]
    return " ".join([args.command] + options)


def direction_grid(n: int, count: int) -> np.ndarray:
    return circle_points(count) if n == 2 else fibonacci_sphere(count)


def cmd_solve(args: argparse.Namespace, budgets: Budgets, logger: Logger) -> int:
    files = FileFormats(logger)
    measure = files.load_measure(args.measure)
    config = SolveConfig(
        p=args.p, m=args.m, max_iters=args.max_iters, tol=args.tol, budgets=budgets, force=args.force
    )
    solver = MinkowskiSolver(Functionals(budgets=budgets, logger=logger), logger)
    provenance = Provenance(command=command_line(args), seed=budgets.seed, budgets=budgets)
    try:
        if args.symmetric:
            report = solver.solve_symmetric(measure, config)
        elif args.resolution:
            report = solver.solve_general(measure, args.resolution, config)
        else:
            report = solver.solve_discrete_lp(measure, config)
    except InadmissibleMeasure as error:
        logger.log_warning(f"{error.message}; witness w = {error.witness}")
        return error.exit_code
    except ConcentrationFail as error:
        logger.log_warning(f"{error.message}; subspace {error.subspace} (use --force to proceed)")
        return error.exit_code
    except NoConvergence as error:
        if error.report is not None:
            files.save_report(args.report, error.report, provenance)
        logger.log_warning(error.message)
        return error.exit_code

    files.save_body(args.out, report.polytope, provenance)
    files.save_report(args.report, report, provenance)
    return 0


def cmd_eval(args: argparse.Namespace, budgets: Budgets, logger: Logger) -> int:
    files = FileFormats(logger)
    body = files.load_body(args.body)
    functionals = Functionals(budgets=budgets)
    transforms = functionals.transforms
    n = body.dim
    logger.log_value("seed", budgets.seed, f"budgets {budgets.model_dump()}")

    if args.quantity == "psi":
        rule = functionals.body_rule(body, args.m)
        logger.log_value(f"Psi_{args.m} (Grassmannian)", functionals.psi_grassmann(body, args.m, rule))
        logger.log_value(f"Psi_{args.m} (spherical)", functionals.psi_spherical(body, args.m))
        logger.log_value(f"Phi_{n - args.m}", functionals.affine_dual_quermassintegral(body, args.m, rule))
        return 0
    if args.quantity == "vq":
        q = args.q if args.q is not None else float(n)
        logger.log_value(f"V~_{q:g}", functionals.dual_intrinsic_volume(body, q))
        return 0
    if args.quantity == "atoms":
        atoms = functionals.curvature_atoms(body, args.p, args.m)
        header = [f"u{axis}" for axis in "xyz"[:n]] + ["mass"]
        logger.log_table(header, np.column_stack([atoms.normals, atoms.masses]).tolist())
        logger.log_value("total", atoms.total)
        if args.out:
            positive = atoms.positive()
            files.save_measure(
                args.out,
                DiscreteMeasure(n=n, atoms=atoms.normals[positive], weights=atoms.masses[positive]),
            )
        return 0

    directions = direction_grid(n, args.directions)
    if args.quantity == "ibody":
        values = transforms.intersection_body_radials(body, directions)
    elif args.quantity == "bidual":
        values = transforms.bidual_intersection_radials(body, directions, args.m, budgets.sub)
    else:
        values = transforms.dual_radon_many(transforms.section_profile(body), directions, budgets.sub, args.m)
    header = [f"u{axis}" for axis in "xyz"[:n]] + ["value"]
    rows = np.column_stack([directions, values])
    if args.out:
        MeshExporter(logger).export_table(args.out, header, rows)
    else:
        logger.log_table(header, rows.tolist())
    return 0


def cmd_verify(args: argparse.Namespace, budgets: Budgets, logger: Logger) -> int:
    selected = [VerifySuite(name) for name in args.filter] if args.filter else None
    results = Verifier(budgets, logger).run(selected)
    failed = [check for check in results if not check.passed]
    logger.log_value("checks passed", len(results) - len(failed), f"of {len(results)}")
    for check in failed:
        logger.log_warning(f"failed invariant: {check.suite} / {check.name}")
    return 1 if failed else 0


def cmd_export(args: argparse.Namespace, budgets: Budgets, logger: Logger) -> int:
    body = FileFormats(logger).load_body(args.body)
    if isinstance(body, BallBody):
        raise BadDims("the analytic ball has no mesh")
    exporter = MeshExporter(logger)
    if body.dim == 2:
        if not args.csv:
            raise BadDims("n = 2 bodies export as CSV polygons, pass --csv")
        exporter.export_polygon_csv(body, args.out)
    else:
        exporter.export_mesh(body, args.out)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv: Optional[list[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)

    # Initialize logger
    logger = Logger()
    try:
        budgets = resolve_budgets(args)
        exit_code = COMMANDS[args.command](args, budgets, logger)
    except AdqError as error:
        print(f"error: {error.message}", file=sys.stderr)
        exit_code = error.exit_code
    except ValueError as error:
        print(f"error: {error}", file=sys.stderr)
        exit_code = 1

    # Print final stats
    logger.print_final_stats()
    return exit_code


if __name__ == "__main__":
    sys.exit(main())

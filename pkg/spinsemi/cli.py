# © spinsemi developers
#
# License: BSD (3-clause)

"""Command line interface: propagators, trajectories, verification runs and sweeps."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from typing import Any, Callable, NamedTuple, Optional

import numpy as np
from tqdm import tqdm

from spinsemi import __version__
from spinsemi.analytic import lz_ab
from spinsemi.config import get_config
from spinsemi.errors import InputError, NumericalError, ParameterError
from spinsemi.exact import (
    IntegratorConfig,
    integrate_ab,
    label_trajectory,
    matrix_element,
)
from spinsemi.field import (
    ConstantField,
    FieldSpec,
    FourierField,
    LandauZenerField,
    TabulatedField,
    parse_field,
)
from spinsemi.semiclassical import (
    propagator_action_route,
    propagator_endpoint_route,
    solve_trajectory,
)
from spinsemi.sphere import SphereAngles
from spinsemi.utils import _parallel

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

FAMILIES = ("const", "fourier", "table-random", "lz")
OBSERVABLES = ("prob_up_up", "prob_up_down", "element_re", "element_im")
SWEEP_PARAMETERS = {"lz": ("omega", "gamma", "window"), "const": ("delta", "eps", "t")}
TRAJECTORY_HEADER = ("s", "re_zeta", "im_zeta", "re_eta", "im_eta")

_NORTH = SphereAngles(0.0, 0.0)
_SOUTH = SphereAngles(np.pi, 0.0)
_ROUTES: dict[str, Callable[..., Any]] = {
    "endpoint": propagator_endpoint_route,
    "action": propagator_action_route,
}


def _angles(text: str) -> SphereAngles:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'theta,phi', got {text!r}")
    return SphereAngles(float(parts[0]), float(parts[1]))


def _number(x: float) -> str:
    return f"{x:.17g}"


def _complex(z: complex) -> dict[str, float]:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _emit(record: dict[str, Any]) -> None:
    print(json.dumps(record))


def _writer() -> Any:
    return csv.writer(sys.stdout, lineterminator="\n")


def _integrator(args: argparse.Namespace) -> IntegratorConfig:
    return IntegratorConfig.from_config(
        rel_tol=args.rel_tol, abs_tol=args.abs_tol, method=args.method
    )


def _point_inputs(args: argparse.Namespace, cfg: IntegratorConfig) -> dict[str, Any]:
    return {
        "field": args.field,
        "t": args.t,
        "from": [args.initial.theta, args.initial.phi],
        "to": [args.final.theta, args.final.phi],
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
        "method": cfg.method,
    }


def cmd_exact(args: argparse.Namespace) -> int:
    """Print the exact matrix element `<to|U(t)|from>` as JSON."""
    cfg = _integrator(args)
    u = integrate_ab(parse_field(args.field), args.t, cfg)
    element = matrix_element(u, args.final, args.initial)
    _emit(
        {
            "command": "exact",
            "inputs": _point_inputs(args, cfg),
            "result": _complex(element),
            "prob": abs(element) ** 2,
            "diagnostics": {"n_steps": u.n_steps, "unitarity_defect": u.unitarity_defect},
        }
    )
    return EXIT_OK


def cmd_semiclassical(args: argparse.Namespace) -> int:
    """Print the semiclassical propagator of the selected route as JSON."""
    cfg = _integrator(args)
    result = _ROUTES[args.route](
        parse_field(args.field), args.initial, args.final, args.t, cfg, full_output=True
    )
    inputs = _point_inputs(args, cfg)
    inputs["route"] = args.route
    _emit(
        {
            "command": "semiclassical",
            "inputs": inputs,
            "result": _complex(result.value),
            "prob": abs(result.value) ** 2,
            "diagnostics": {
                "n_steps": result.n_steps,
                "n_chart_switches": result.n_chart_switches,
                "n_branch_intervals": result.n_branch_intervals,
            },
        }
    )
    return EXIT_OK


def cmd_traj(args: argparse.Namespace) -> int:
    """Print the classical path, sampled on an equidistant grid, as CSV."""
    cfg = _integrator(args)
    f = parse_field(args.field)
    trajectory = solve_trajectory(f, args.initial, args.final, args.t, cfg)
    s, zeta, eta = trajectory.sample(args.samples)
    columns = [s, zeta.real, zeta.imag, eta.real, eta.imag]
    header = list(TRAJECTORY_HEADER)
    if args.labels:
        labels = label_trajectory(f, args.initial, args.t, args.samples, cfg)
        columns += [labels[:, 1], labels[:, 2]]
        header += ["theta", "phi"]
    writer = _writer()
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow([_number(x) for x in row])
    return EXIT_OK


class _Case(NamedTuple):
    field: FieldSpec
    initial: SphereAngles
    final: SphereAngles
    t: float


class _LzCase(NamedTuple):
    omega: float
    gamma: float
    t: float


def _random_label(rng: np.random.Generator) -> SphereAngles:
    theta = rng.uniform(0.1 * np.pi, 0.9 * np.pi)
    # uniform in (-pi, pi]
    phi = -rng.uniform(-np.pi, np.pi)
    return SphereAngles(theta, phi)


def _random_case(family: str, rng: np.random.Generator) -> Any:
    if family == "lz":
        omega, gamma = rng.uniform(0.2, 3, size=2)
        t = rng.uniform(0, np.sqrt(40) / gamma)
        return _LzCase(float(omega), float(gamma), float(t))
    t = float(rng.uniform(0.1, 5))
    f: FieldSpec
    if family == "const":
        f = ConstantField(*(float(x) for x in rng.uniform(-5, 5, size=3)))
    elif family == "fourier":
        f = FourierField(
            tuple(
                np.column_stack(
                    [rng.uniform(0.5, 3, size=3), rng.uniform(-2, 2, size=(3, 2))]
                )
                for _ in range(3)
            )
        )
    else:
        f = TabulatedField(np.linspace(0, t, 17), rng.uniform(-2.5, 2.5, size=(17, 3)))
    return _Case(f, _random_label(rng), _random_label(rng), t)


def _verify_case(case: Any, route: str, cfg: IntegratorConfig) -> tuple[float, int, int]:
    if isinstance(case, _LzCase):
        closed = lz_ab(case.omega, case.gamma, case.t)
        u = integrate_ab(LandauZenerField(case.omega, case.gamma), case.t, cfg)
        error = max(abs(closed.a - u.a), abs(closed.b - u.b))
        return float(error), u.n_steps, 0
    exact = matrix_element(integrate_ab(case.field, case.t, cfg), case.final, case.initial)
    result = _ROUTES[route](
        case.field, case.initial, case.final, case.t, cfg, full_output=True
    )
    return float(abs(result.value - exact)), result.n_steps, result.n_branch_intervals


def cmd_verify(args: argparse.Namespace) -> int:
    """Compare semiclassical and exact propagators on a random ensemble."""
    if args.n < 1:
        raise ParameterError(f"Ensemble size must be positive, got {args.n!r}")
    cfg = _integrator(args)
    rng = np.random.default_rng(args.seed)
    cases = [_random_case(args.family, rng) for _ in range(args.n)]
    outcomes = _parallel(
        args.n_jobs,
        _verify_case,
        tqdm(cases, desc="verify", disable=not args.progress),
        args.route,
        cfg,
    )
    errors = np.array([error for error, _, _ in outcomes])
    passed = bool(np.max(errors) <= args.tol)
    _emit(
        {
            "command": "verify",
            "inputs": {
                "n": args.n,
                "seed": args.seed,
                "family": args.family,
                "route": args.route,
                "tol": args.tol,
                "rel_tol": cfg.rel_tol,
                "abs_tol": cfg.abs_tol,
                "method": cfg.method,
            },
            "result": {
                "max_error": float(np.max(errors)),
                "mean_error": float(np.mean(errors)),
                "passed": passed,
            },
            "diagnostics": {
                "n_steps": int(sum(n for _, n, _ in outcomes)),
                "max_branch_intervals": int(max(n for _, _, n in outcomes)),
            },
        }
    )
    if not passed:
        logger.warning("verification failed: max error %.3g > %.3g", errors.max(), args.tol)
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


def _sweep_point(value: float, args: dict[str, Any], cfg: IntegratorConfig) -> float:
    parameters = {**args["parameters"], args["param"]: value}
    if args["family"] == "lz":
        window = parameters["window"]
        f: FieldSpec = LandauZenerField(parameters["omega"], parameters["gamma"], -window)
        horizon = 2 * window
    else:
        f = ConstantField(parameters["delta"], 0.0, parameters["eps"])
        horizon = parameters["t"]

    if args["engine"] == "exact":
        u = integrate_ab(f, horizon, cfg)
        element, down = u.a, -np.conj(u.b)
    else:
        element = propagator_endpoint_route(f, _NORTH, _NORTH, horizon, cfg)
        down = propagator_endpoint_route(f, _NORTH, _SOUTH, horizon, cfg)

    observable = args["observable"]
    if observable == "prob_up_up":
        return float(abs(element) ** 2)
    if observable == "prob_up_down":
        return float(abs(down) ** 2)
    if observable == "element_re":
        return float(np.real(element))
    return float(np.imag(element))


def cmd_sweep(args: argparse.Namespace) -> int:
    """Print an observable over a range of one field parameter as CSV."""
    names = SWEEP_PARAMETERS[args.family]
    if args.param not in names:
        raise ParameterError(
            f"Invalid parameter for family {args.family!r}: {args.param!r}. "
            f"Possible options are: {names}."
        )
    if args.steps < 1:
        raise ParameterError(f"Number of sweep steps must be positive, got {args.steps!r}")
    cfg = _integrator(args)
    settings = {
        "family": args.family,
        "param": args.param,
        "engine": args.engine,
        "observable": args.observable,
        "parameters": {name: getattr(args, name) for name in names},
    }
    values = np.linspace(args.start, args.stop, args.steps)
    results = _parallel(
        args.n_jobs,
        _sweep_point,
        tqdm(values, desc="sweep", disable=not args.progress),
        settings,
        cfg,
    )
    writer = _writer()
    writer.writerow(["param", "value"])
    for value, result in zip(values, results):
        writer.writerow([_number(value), _number(result)])
    return EXIT_OK


def _add_integrator_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rel-tol", type=float, help="Relative ODE tolerance.")
    parser.add_argument("--abs-tol", type=float, help="Absolute ODE tolerance.")
    parser.add_argument(
        "--method", choices=("RK45", "DOP853", "RK23"), help="Runge-Kutta pair to use."
    )


def _add_point_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--field",
        required=True,
        help="const:bx,by,bz, lz:omega,gamma[,t_offset], table:PATH or fourier:PATH.",
    )
    parser.add_argument("--t", type=float, required=True, help="Elapsed time.")
    parser.add_argument(
        "--from", dest="initial", type=_angles, required=True, help="Initial theta,phi."
    )
    parser.add_argument(
        "--to", dest="final", type=_angles, required=True, help="Final theta,phi."
    )
    _add_integrator_options(parser)


def _add_ensemble_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--n-jobs",
        type=int,
        default=int(get_config("n_jobs")),
        help="Parallel jobs (-1 uses all processors).",
    )
    parser.add_argument("--progress", action="store_true", help="Show a progress bar.")
    _add_integrator_options(parser)


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        prog="spinsemi",
        description="Exact and semiclassical spin-1/2 propagators in coherent states.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log to standard error (repeat for debug output).",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    exact = commands.add_parser("exact", help="Exact coherent-state matrix element.")
    _add_point_options(exact)
    exact.set_defaults(handler=cmd_exact)

    semiclassical = commands.add_parser("semiclassical", help="Semiclassical propagator.")
    _add_point_options(semiclassical)
    semiclassical.add_argument("--route", choices=tuple(_ROUTES), default="endpoint")
    semiclassical.set_defaults(handler=cmd_semiclassical)

    traj = commands.add_parser("traj", help="Classical path as CSV.")
    _add_point_options(traj)
    traj.add_argument("--samples", type=int, default=101, help="Number of grid points.")
    traj.add_argument(
        "--labels", action="store_true", help="Add the real label trajectory (theta, phi)."
    )
    traj.set_defaults(handler=cmd_traj)

    verify = commands.add_parser("verify", help="Compare with exact results.")
    verify.add_argument("--n", type=int, default=100, help="Ensemble size.")
    verify.add_argument("--seed", type=int, default=0, help="Seed of the random generator.")
    verify.add_argument("--family", choices=FAMILIES, default="const")
    verify.add_argument("--tol", type=float, default=1e-8, help="Largest accepted error.")
    verify.add_argument("--route", choices=tuple(_ROUTES), default="endpoint")
    _add_ensemble_options(verify)
    verify.set_defaults(handler=cmd_verify)

    sweep = commands.add_parser("sweep", help="Observable over a parameter range as CSV.")
    sweep.add_argument("--family", choices=tuple(SWEEP_PARAMETERS), default="lz")
    sweep.add_argument("--param", required=True, help="Swept parameter.")
    sweep.add_argument("--start", type=float, required=True)
    sweep.add_argument("--stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, default=11)
    sweep.add_argument("--observable", choices=OBSERVABLES, default="prob_up_down")
    sweep.add_argument("--engine", choices=("exact", "semiclassical"), default="exact")
    sweep.add_argument("--omega", type=float, default=1.0, help="lz: transverse coupling.")
    sweep.add_argument("--gamma", type=float, default=1.0, help="lz: sqrt of sweep rate.")
    sweep.add_argument(
        "--window", type=float, default=30.0, help="lz: half width T of the window [-T, T]."
    )
    sweep.add_argument("--delta", type=float, default=1.0, help="const: transverse field.")
    sweep.add_argument("--eps", type=float, default=0.0, help="const: longitudinal field.")
    sweep.add_argument("--t", type=float, default=1.0, help="const: elapsed time.")
    _add_ensemble_options(sweep)
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )
    logging.getLogger("spinsemi").setLevel(level)


def main(argv: Optional[list[str]] = None) -> int:
    """
    Run the command line interface.

    Parameters
    ----------
    argv : list[str], optional
        Arguments without the program name. If `None` (default), `sys.argv[1:]`.

    Returns
    -------
    int
        Exit code: `0` on success, `1` if a verification failed, `2` for invalid input and
        `3` for a numerical failure.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT_ERROR
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except NumericalError as e:
        print(f"spinsemi: numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    except (InputError, ValueError, OSError) as e:
        print(f"spinsemi: invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

# © spinsemi developers
#
# License: BSD (3-clause)

"""Semiclassical spin propagator from classical paths in stereographic coordinates."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional

import numpy as np
import scipy.integrate

from spinsemi.config import get_config
from spinsemi.errors import (
    ConvergenceError,
    InputError,
    OutOfRangeError,
    ParameterError,
    PoleError,
)
from spinsemi.exact import IntegratorConfig
from spinsemi.field import FieldSample, FieldSpec, RotatedField, hamiltonian_stereo
from spinsemi.sphere import (
    SphereAngles,
    StereoPair,
    label_from_spinor,
    overlap,
    quarter_root,
    spinor,
    to_stereo,
)
from spinsemi.utils import _continued_log, _continuous_sqrt, _evaluate_pieces, _OdeSegment

logger = logging.getLogger(__name__)

# |zeta| above which the linear (projective) chart takes over, and below which it is left
CHART_SWITCH_OUT = 1e3
CHART_SWITCH_BACK = 1e2

# boundary layers of width 1/nu must fit into the horizon this many times
MIN_LAYER_WIDTHS = 10.0

_BRANCHES = ("zeta", "eta")
_POLE_EPS = 1e-14
_LOG_SAMPLES = 513
_ROTATION_ANGLES = (np.pi, np.pi / 2, -np.pi / 2)
# |<final|initial>| below which the final state is expanded over two other bras
_ORTHOGONAL_OVERLAP = 1e-2


def _coefficients(b: FieldSample, which: str) -> tuple[complex, complex, complex]:
    """Coefficients `(p, q, r)` of the Riccati equation `dz/ds = p + q z + r z**2`."""
    bx, by, bz = b
    if which == "zeta":
        return complex(0.5 * by, -0.5 * bx), complex(0, bz), complex(0.5 * by, 0.5 * bx)
    return complex(0.5 * by, 0.5 * bx), complex(0, -bz), complex(0.5 * by, -0.5 * bx)


def riccati_rhs(f: FieldSpec, z: complex, t: float, which: str = "zeta") -> complex:
    """
    Right-hand side of the classical equations of motion in stereographic coordinates.

    The two coordinates decouple into Riccati equations,
    `dzeta/ds = -i bx (1 - zeta**2) / 2 + by (1 + zeta**2) / 2 + i bz zeta` and
    `deta/ds = i bx (1 - eta**2) / 2 + by (1 + eta**2) / 2 - i bz eta`.

    Parameters
    ----------
    f : FieldSpec
        The field.
    z : complex
        Current value of the coordinate.
    t : float
        Time.
    which : {'zeta', 'eta'}
        Which of the two equations to evaluate, by default `'zeta'`.

    Returns
    -------
    complex
        The time derivative.
    """
    if which not in _BRANCHES:
        raise InputError(
            f"Invalid coordinate: {which!r}. Possible options are: {_BRANCHES}."
        )
    p, q, r = _coefficients(f.sample(t), which)
    return complex(p + q * z + r * z * z)


class _ChartPiece(NamedTuple):
    segment: _OdeSegment
    projective: bool


def _leave_affine(s: float, y: np.ndarray) -> bool:
    return bool(abs(y[0]) > CHART_SWITCH_OUT)


def _leave_projective(s: float, y: np.ndarray) -> bool:
    return bool(abs(y[0]) < CHART_SWITCH_BACK * abs(y[1]))


def _forward_rhs(f: FieldSpec, eta_end: complex, projective: bool) -> Callable:
    # state: zeta = u/v, Hamiltonian integral, action integral, eta fundamental matrix
    def rhs(s: float, y: np.ndarray) -> np.ndarray:
        b = f.sample(s)
        bx, by, bz = b
        u, v = y[0], y[1]
        p, q, r = _coefficients(b, "zeta")
        if projective:
            du, dv, da = 0.5 * q * u + p * v, -r * u - 0.5 * q * v, 0j
        else:
            du, dv, da = p + q * u + r * u * u, 0j, (bx - 1j * by) * u + bz
        denominator = v + eta_end * u
        if abs(denominator) <= _POLE_EPS * (abs(v) + abs(eta_end * u)):
            raise PoleError(f"1 + zeta(s) eta'' vanishes at s={s!r}")
        dh = 0.5 * (
            bx * (u + eta_end * v) - 1j * by * (u - eta_end * v) + bz * (v - eta_end * u)
        ) / denominator
        pe, qe, re = _coefficients(b, "eta")
        generator = np.array([[0.5 * qe, pe], [-re, -0.5 * qe]])
        dw = generator @ y[4:].reshape(2, 2)
        return np.concatenate(([du, dv, dh, da], dw.ravel()))

    return rhs


def _backward_rhs(f: FieldSpec, horizon: float, projective: bool) -> Callable:
    # eta in reversed time sigma = horizon - s; state: eta = u/v, action integral
    def rhs(sigma: float, y: np.ndarray) -> np.ndarray:
        b = f.sample(horizon - sigma)
        bx, by, bz = b
        u, v = y[0], y[1]
        p, q, r = _coefficients(b, "eta")
        if projective:
            return np.array([-(0.5 * q * u + p * v), r * u + 0.5 * q * v, 0j])
        return np.array([-(p + q * u + r * u * u), 0j, (bx + 1j * by) * u + bz])

    return rhs


def _piece_log_v(piece: _ChartPiece) -> complex:
    """Continued change of `log(v)` across a projective piece."""
    segment = piece.segment
    if segment.solution is None:
        return 0j
    ts = segment.ts
    grid = np.concatenate(
        [np.linspace(a, b, 5)[:-1] for a, b in zip(ts[:-1], ts[1:])] + [ts[-1:]]
    )
    return _continued_log(segment(grid)[1])


def _integrate_charts(
    make_rhs: Callable[[bool], Callable],
    y0: np.ndarray,
    horizon: float,
    cfg: IntegratorConfig,
    action_index: int,
) -> tuple[tuple[_ChartPiece, ...], complex, int]:
    """
    Integrate a Riccati coordinate, switching between the affine and projective charts.

    In the affine chart the state holds `(z, 1, ...)` and the action integrand is
    integrated directly. In the projective chart `(u, v)` follows the linear system and
    the action integral stays frozen; on leaving the chart, `2i` times the continued change
    of `log(v)` is added, which is the integral of the same (there singular) integrand.
    With `a` the action state, `exp(-i a / 2) (u, v)` is the solution of the linear system
    started at `(z(0), 1)` in either chart.
    """
    pieces = []
    y = np.array(y0, dtype=complex)
    start = 0.0
    projective = abs(y[0]) > CHART_SWITCH_OUT
    max_step = cfg.step_bound(horizon)
    n_steps = 0
    while True:
        segment = cfg.integrate(
            make_rhs(projective),
            start,
            y,
            horizon,
            max_step=max_step,
            max_steps=cfg.max_steps - n_steps,
            stop=_leave_projective if projective else _leave_affine,
        )
        piece = _ChartPiece(segment, projective)
        pieces.append(piece)
        n_steps += segment.n_steps
        if not segment.stopped:
            break
        y = segment.ys[-1].copy()
        start = float(segment.ts[-1])
        if projective:
            y[action_index] += 2j * _piece_log_v(piece)
            y[0] /= y[1]
            y[1] = 1
        logger.debug(
            "switching to the %s chart at %r",
            "affine" if projective else "projective",
            start,
        )
        projective = not projective

    last = pieces[-1]
    action = last.segment.ys[-1][action_index]
    if last.projective:
        action += 2j * _piece_log_v(last)
    return tuple(pieces), complex(action), n_steps


@dataclass(frozen=True, eq=False)
class ClassicalTrajectory:
    """
    Classical path of the complexified spin connecting two coherent states.

    `zeta` starts at `zeta' = tan(theta'/2) exp(i phi')` and `eta` ends at
    `eta'' = tan(theta''/2) exp(-i phi'')`; the free ends `eta(0)` and `zeta(horizon)` are
    determined by the dynamics. Use `at` and `sample` to evaluate the path.

    Attributes
    ----------
    horizon : float
        Elapsed time `t`.
    zeta_start : complex
        `zeta(0)`.
    eta_end : complex
        `eta(horizon)`.
    h_integral : complex
        `int_0^t H(zeta(s), eta'', s) ds`.
    action_integral : complex
        `int_0^t [bx (zeta + eta) - i by (zeta - eta) + 2 bz] ds`, continued through the
        point at infinity.
    n_steps : int
        Accepted integrator steps of both solves.
    n_chart_switches : int
        Number of changes between the affine and the projective chart.
    """

    horizon: float
    zeta_start: complex
    eta_end: complex
    h_integral: complex
    action_integral: complex
    n_steps: int
    n_chart_switches: int
    forward: tuple[_ChartPiece, ...] = field(repr=False)
    backward: tuple[_ChartPiece, ...] = field(repr=False)

    @property
    def action_exponent(self) -> complex:
        """`-i/4` times `action_integral`."""
        return -0.25j * self.action_integral

    @property
    def samples(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The path `(s, zeta, eta)` at the accepted steps of both integrations."""
        s = np.unique(
            np.concatenate(
                [p.segment.ts for p in self.forward]
                + [self.horizon - p.segment.ts for p in self.backward]
            ).clip(0, self.horizon)
        )
        return (s, *self._pairs(s))

    def _pairs(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        forward = _evaluate_pieces([p.segment for p in self.forward], s)
        backward = _evaluate_pieces([p.segment for p in self.backward], self.horizon - s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return forward[:, 0] / forward[:, 1], backward[:, 0] / backward[:, 1]

    def _linear_states(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """`zeta` as `U/V` with `(U, V)` linear from `(zeta', 1)`, and the `eta` matrix."""
        states = _evaluate_pieces([p.segment for p in self.forward], s)
        scale = np.exp(-0.5j * states[:, 3])
        return scale * states[:, 0], scale * states[:, 1], states[:, 4:].reshape(-1, 2, 2)

    def at(self, s: float) -> StereoPair:
        """
        Evaluate the path at time `s`.

        Parameters
        ----------
        s : float
            Time in `[0, horizon]`.

        Returns
        -------
        StereoPair
            `(zeta(s), eta(s))`; a coordinate at the point at infinity is returned as an
            infinite complex number.
        """
        if not -1e-12 <= s <= self.horizon * (1 + 1e-12) + 1e-12:
            raise OutOfRangeError(f"Time {s!r} outside of [0, {self.horizon!r}]")
        zeta, eta = self._pairs(np.array([min(max(s, 0.0), self.horizon)]))
        return StereoPair(complex(zeta[0]), complex(eta[0]))

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Evaluate the path on `n` equidistant times including both ends.

        Parameters
        ----------
        n : int
            Number of samples, at least 2.

        Returns
        -------
        s, zeta, eta : np.ndarray
            Times and path values.
        """
        if n < 2:
            raise InputError(f"Number of samples must be at least 2, got {n!r}")
        s = np.linspace(0, self.horizon, n)
        return (s, *self._pairs(s))


def _check_horizon(t: float) -> None:
    if not t >= 0:
        raise InputError(f"Elapsed time must be non-negative, got {t!r}")


def _integrate_forward(
    f: FieldSpec, zeta_start: complex, eta_end: complex, t: float, cfg: IntegratorConfig
) -> tuple[tuple[_ChartPiece, ...], complex, int]:
    y0 = np.array([zeta_start, 1, 0, 0, 1, 0, 0, 1], dtype=complex)
    return _integrate_charts(
        lambda projective: _forward_rhs(f, eta_end, projective), y0, t, cfg, 3
    )


def solve_trajectory(
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    cfg: Optional[IntegratorConfig] = None,
) -> ClassicalTrajectory:
    """
    Solve the classical boundary value problem between two coherent states.

    In stereographic coordinates the boundary conditions `zeta(0) = zeta'` and
    `eta(t) = eta''` decouple, so `zeta` is integrated forward from `s = 0` and `eta`
    backward from `s = t` (as a forward integration in reversed time). The integral of the
    Hamiltonian along `(zeta(s), eta'')` and the action integral are carried as additional
    states of the same adaptive solves. Whenever `|zeta|` (or `|eta|`) exceeds `1e3`, the
    coordinate is continued through the linear system of its Moebius representation
    `z = u/v` until it falls below `1e2`, so paths through the point at infinity stay
    integrable.

    Parameters
    ----------
    f : FieldSpec
        The field.
    initial : SphereAngles
        Initial coherent state, `theta < pi`.
    final : SphereAngles
        Final coherent state, `theta < pi`.
    t : float
        Elapsed time, `t >= 0`.
    cfg : IntegratorConfig, optional
        Integrator settings. If `None` (default), `IntegratorConfig.from_config()`.

    Returns
    -------
    ClassicalTrajectory
        The path and its integrals.
    """
    _check_horizon(t)
    zeta_start = to_stereo(initial).zeta
    eta_end = to_stereo(final).eta
    cfg = IntegratorConfig.from_config() if cfg is None else cfg

    forward, action_zeta, forward_steps = _integrate_forward(f, zeta_start, eta_end, t, cfg)
    backward, action_eta, backward_steps = _integrate_charts(
        lambda projective: _backward_rhs(f, t, projective),
        np.array([eta_end, 1, 0], dtype=complex),
        t,
        cfg,
        2,
    )
    trajectory = ClassicalTrajectory(
        horizon=float(t),
        zeta_start=zeta_start,
        eta_end=eta_end,
        h_integral=complex(forward[-1].segment.ys[-1][2]),
        action_integral=action_zeta + action_eta,
        n_steps=forward_steps + backward_steps,
        n_chart_switches=len(forward) + len(backward) - 2,
        forward=forward,
        backward=backward,
    )
    logger.debug(
        "solve_trajectory: t=%r, steps=%d, chart switches=%d",
        t,
        trajectory.n_steps,
        trajectory.n_chart_switches,
    )
    return trajectory


class SemiclassicalResult(NamedTuple):
    """
    A semiclassical propagator with diagnostics.

    Attributes
    ----------
    value : complex
        The propagator `<final|U(t)|initial>`.
    n_steps : int
        Accepted integrator steps.
    n_chart_switches : int
        Number of chart changes of the Riccati coordinates.
    n_branch_intervals : int
        Grid intervals needed to continue the square root in the horizon (`0` if no
        continuation was needed).
    """

    value: complex
    n_steps: int
    n_chart_switches: int
    n_branch_intervals: int


def _y_rotation(angle: float) -> tuple[np.ndarray, np.ndarray]:
    """SU(2) matrix and SO(3) matrix of a rotation by `angle` about the y-axis."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    su2 = np.array([[c, -s], [s, c]], dtype=complex)
    so3 = np.array(
        [[np.cos(angle), 0, np.sin(angle)], [0, 1, 0], [-np.sin(angle), 0, np.cos(angle)]]
    )
    return su2, so3


def _rotated_endpoint_route(
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    cfg: Optional[IntegratorConfig],
) -> SemiclassicalResult:
    # <final|U|initial> = exp(i (chi' - chi'')) <R final|R U R^-1|R initial>
    for angle in _ROTATION_ANGLES:
        su2, so3 = _y_rotation(angle)
        new_initial, chi_initial = label_from_spinor(su2 @ spinor(initial))
        new_final, chi_final = label_from_spinor(su2 @ spinor(final))
        if not (new_initial.is_south_pole or new_final.is_south_pole):
            break
    logger.debug("south pole endpoint, rotating by %r about y", angle)
    result = propagator_endpoint_route(
        RotatedField(f, so3), new_initial, new_final, t, cfg, full_output=True
    )
    phase = np.exp(1j * (chi_initial - chi_final))
    return result._replace(value=complex(phase * result.value))


def _superposed_route(
    route: Callable[..., SemiclassicalResult],
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    cfg: Optional[IntegratorConfig],
) -> SemiclassicalResult:
    # |final> = c1 |initial> + c2 |middle>, so <final|U|initial> is linear in the two bras
    psi_initial, psi_final = spinor(initial), spinor(final)
    middle, _ = label_from_spinor(psi_initial + psi_final)
    basis = np.column_stack([psi_initial, spinor(middle)])
    coefficients = np.linalg.solve(basis, psi_final)
    logger.debug("nearly orthogonal endpoints, expanding %r over %r", final, middle)
    parts = [route(f, initial, bra, t, cfg, full_output=True) for bra in (initial, middle)]
    value = sum(np.conj(c) * part.value for c, part in zip(coefficients, parts))
    return SemiclassicalResult(
        complex(value),
        sum(part.n_steps for part in parts),
        max(part.n_chart_switches for part in parts),
        max(part.n_branch_intervals for part in parts),
    )


def propagator_endpoint_route(
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    cfg: Optional[IntegratorConfig] = None,
    full_output: bool = False,
) -> Any:
    """
    Semiclassical propagator from the Hamiltonian integral along the forward path.

    The propagator equals `exp(-i int_0^t H(zeta(s), eta'', s) ds) <final|initial>`, where
    `zeta(s)` follows the classical equation of motion from `zeta'`. Endpoints at the south
    pole (no finite stereographic coordinates) are handled by rotating the problem by a
    fixed rotation about the y-axis. For (nearly) orthogonal endpoints `1 + zeta' eta''`
    vanishes and the Hamiltonian integral diverges at `s = 0`; the final state is then
    written as a superposition of the initial state and a state on the great circle
    between both, and the propagator follows from linearity in the bra.

    Parameters
    ----------
    f : FieldSpec
        The field.
    initial : SphereAngles
        Initial coherent state.
    final : SphereAngles
        Final coherent state.
    t : float
        Elapsed time, `t >= 0`.
    cfg : IntegratorConfig, optional
        Integrator settings. If `None` (default), `IntegratorConfig.from_config()`.
    full_output : bool
        If `True`, return a `SemiclassicalResult` with diagnostics instead of the value, by
        default `False`.

    Returns
    -------
    complex or SemiclassicalResult
        The propagator `<final|U(t)|initial>`.

    Examples
    --------
    >>> from spinsemi import ConstantField, SphereAngles
    >>> north = SphereAngles(0, 0)
    >>> k = propagator_endpoint_route(ConstantField(0, 0, 1), north, north, 1.0)
    >>> np.isclose(k, np.exp(-0.5j))
    True
    """
    _check_horizon(t)
    if t > 0 and abs(overlap(final, initial)) < _ORTHOGONAL_OVERLAP:
        result = _superposed_route(propagator_endpoint_route, f, initial, final, t, cfg)
    elif initial.is_south_pole or final.is_south_pole:
        result = _rotated_endpoint_route(f, initial, final, t, cfg)
    elif t == 0:
        result = SemiclassicalResult(overlap(final, initial), 0, 0, 0)
    else:
        zeta_start = to_stereo(initial).zeta
        eta_end = to_stereo(final).eta
        cfg = IntegratorConfig.from_config() if cfg is None else cfg
        forward, _, n_steps = _integrate_forward(f, zeta_start, eta_end, t, cfg)
        h_integral = forward[-1].segment.ys[-1][2]
        result = SemiclassicalResult(
            complex(np.exp(-1j * h_integral) * overlap(final, initial)),
            n_steps,
            len(forward) - 1,
            0,
        )
    return result if full_output else result.value


def propagator_action_route(
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    cfg: Optional[IntegratorConfig] = None,
    full_output: bool = False,
) -> Any:
    """
    Semiclassical propagator from the classical action of the complex path.

    The propagator is

        sqrt((1 + zeta' eta(0)) (1 + zeta(t) eta'') / ((1 + zeta' eta') (1 + zeta'' eta'')))
        * (zeta'' eta' / (zeta' eta''))**(1/4)
        * exp(-i/4 int_0^t [bx (zeta + eta) - i by (zeta - eta) + 2 bz] ds).

    The square root is continued in the horizon from `t = 0`, where the propagator is the
    overlap `<final|initial>`: the fundamental matrix of the `eta` equation, integrated
    together with `zeta`, gives the path for every intermediate horizon from the same solve.
    In linear coordinates the radicand is a product of two factors that vanish together
    with the propagator, so the root is the first factor times the continued square root of
    their ratio, which stays away from zero. The continuation grid starts with
    `branch_grid_initial` intervals and doubles up to `branch_grid_max` intervals. Nearly
    orthogonal endpoints are handled by linearity in the bra, as in
    `propagator_endpoint_route`.

    Parameters
    ----------
    f : FieldSpec
        The field.
    initial : SphereAngles
        Initial coherent state, `0 < theta < pi`.
    final : SphereAngles
        Final coherent state, `0 < theta < pi`.
    t : float
        Elapsed time, `t >= 0`.
    cfg : IntegratorConfig, optional
        Integrator settings. If `None` (default), `IntegratorConfig.from_config()`.
    full_output : bool
        If `True`, return a `SemiclassicalResult` with diagnostics instead of the value, by
        default `False`.

    Returns
    -------
    complex or SemiclassicalResult
        The propagator `<final|U(t)|initial>`.

    Raises
    ------
    BranchTrackingError
        If the square root cannot be continued on the finest grid.
    """
    _check_horizon(t)
    for p in (initial, final):
        if p.is_north_pole or p.is_south_pole:
            raise PoleError(f"The action route needs 0 < theta < pi, got {p!r}")
    if t == 0:
        result = SemiclassicalResult(overlap(final, initial), 0, 0, 0)
        return result if full_output else result.value
    if abs(overlap(final, initial)) < _ORTHOGONAL_OVERLAP:
        result = _superposed_route(propagator_action_route, f, initial, final, t, cfg)
        return result if full_output else result.value

    trajectory = solve_trajectory(f, initial, final, t, cfg)
    zeta_i, eta_i = to_stereo(initial)
    zeta_f, eta_f = to_stereo(final)

    def factors(tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u, v, w = trajectory._linear_states(np.atleast_1d(tau))
        # (u, v) of eta at s = 0 for the path ending at eta'' at horizon tau
        eta_u = w[:, 1, 1] * eta_f - w[:, 0, 1]
        eta_v = w[:, 0, 0] - w[:, 1, 0] * eta_f
        return v + eta_f * u, eta_v + zeta_i * eta_u

    def ratio(tau: np.ndarray) -> np.ndarray:
        # both factors vanish with the propagator, their ratio does not
        forward, backward = factors(tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            return backward / forward

    config = get_config()
    ratio_root, n_intervals = _continuous_sqrt(
        ratio,
        t,
        1.0,
        n_initial=int(config["branch_grid_initial"]),
        n_max=int(config["branch_grid_max"]),
    )
    root = complex(factors(np.array([t]))[0][0]) * ratio_root
    zeta_end = trajectory.at(t).zeta
    eta_start = trajectory.at(0).eta
    with np.errstate(all="ignore"):
        direct = np.sqrt((1 + zeta_i * eta_start) * (1 + zeta_end * eta_f)) * np.exp(
            trajectory.action_exponent
        )
    if np.isfinite(direct) and direct != 0:
        root = direct if abs(direct - root) <= abs(direct + root) else -direct
    norm = np.sqrt((1 + (zeta_i * eta_i).real) * (1 + (zeta_f * eta_f).real))
    value = complex(quarter_root(final, initial) * root / norm)
    logger.debug("propagator_action_route: branch grid of %d intervals", n_intervals)
    result = SemiclassicalResult(
        value, trajectory.n_steps, trajectory.n_chart_switches, n_intervals
    )
    return result if full_output else result.value


@dataclass(frozen=True)
class JumpData:
    """
    The jumps between the physical endpoints and the complex classical path.

    The classical path starts at the complex point `(zeta', eta(0))` instead of the initial
    state and ends at `(zeta(t), eta'')` instead of the final state; the overlap factors
    account for both jumps.

    Attributes
    ----------
    zeta_bar_start : complex
        `zeta` at the start of the path, equal to `zeta'`.
    eta_bar_end : complex
        `eta` at the end of the path, equal to `eta''`.
    start_overlap_factor : complex
        `sqrt((1 + zeta' eta(0)) / (1 + zeta' eta')) (eta' / eta(0))**(1/4)`.
    end_overlap_factor : complex
        `sqrt((1 + zeta(t) eta'') / (1 + zeta'' eta'')) (zeta'' / zeta(t))**(1/4)`.
    """

    zeta_bar_start: complex
    eta_bar_end: complex
    start_overlap_factor: complex
    end_overlap_factor: complex

    def assemble(self, classical_factor: complex) -> complex:
        """Multiply the overlap factors with the exponential of the classical action."""
        product = self.end_overlap_factor * classical_factor * self.start_overlap_factor
        return complex(product)


def _nonzero_finite(value: complex, name: str) -> complex:
    if value == 0 or not np.isfinite(value):
        raise PoleError(f"{name} is {value!r}, the jump factors are undefined")
    return value


def jump_data(
    initial: SphereAngles, final: SphereAngles, trajectory: ClassicalTrajectory
) -> JumpData:
    """
    Compute the jump factors of a classical path.

    The factors are given on their principal branches; the product of both with
    `classical_factor` equals the propagator up to a fourth root of unity.

    Parameters
    ----------
    initial : SphereAngles
        Initial coherent state, `0 < theta < pi`.
    final : SphereAngles
        Final coherent state, `0 < theta < pi`.
    trajectory : ClassicalTrajectory
        The path solved for these endpoints.

    Returns
    -------
    JumpData
        The jump data.
    """
    zeta_i, eta_i = to_stereo(initial)
    zeta_f, eta_f = to_stereo(final)
    if not (
        np.isclose(trajectory.zeta_start, zeta_i, rtol=1e-12, atol=1e-14)
        and np.isclose(trajectory.eta_end, eta_f, rtol=1e-12, atol=1e-14)
    ):
        raise InputError("The trajectory was solved for different endpoints")
    eta_start = _nonzero_finite(trajectory.at(0).eta, "eta(0)")
    zeta_end = _nonzero_finite(trajectory.at(trajectory.horizon).zeta, "zeta(t)")
    _nonzero_finite(zeta_i * eta_f, "zeta' eta''")
    start = np.sqrt((1 + zeta_i * eta_start) / (1 + zeta_i * eta_i))
    start *= (eta_i / eta_start) ** 0.25
    end = np.sqrt((1 + zeta_end * eta_f) / (1 + zeta_f * eta_f))
    end *= (zeta_f / zeta_end) ** 0.25
    return JumpData(zeta_i, eta_f, complex(start), complex(end))


def classical_factor(
    f: FieldSpec, trajectory: ClassicalTrajectory, tol: float = 1e-10
) -> complex:
    """
    Exponential of the action along the complex classical path.

    The action is `int_0^t [(1 - zeta eta)(zeta' eta - zeta eta') / (4 zeta eta (1 + zeta
    eta)) - i H(zeta, eta, s)] ds`, with primes denoting time derivatives, integrated with
    `scipy.integrate.quad_vec` over the dense path.

    Parameters
    ----------
    f : FieldSpec
        The field the path was solved for.
    trajectory : ClassicalTrajectory
        The path; it must avoid `zeta eta = 0` and `zeta eta = -1`.
    tol : float
        Relative tolerance of the quadrature, by default `1e-10`.

    Returns
    -------
    complex
        The factor.
    """

    def integrand(s: float) -> np.ndarray:
        zeta, eta = trajectory.at(s)
        product = zeta * eta
        if product == 0 or not np.isfinite(product):
            raise PoleError(f"zeta eta is {product!r} at s={s!r}")
        dzeta = riccati_rhs(f, zeta, s, "zeta")
        deta = riccati_rhs(f, eta, s, "eta")
        kinetic = (
            (1 - product) * (dzeta * eta - zeta * deta) / (4 * product * (1 + product))
        )
        value = kinetic - 1j * hamiltonian_stereo(f, StereoPair(zeta, eta), s)
        return np.array([value.real, value.imag])

    action, _, info = scipy.integrate.quad_vec(
        integrand, 0, trajectory.horizon, epsabs=1e-14, epsrel=tol, full_output=True
    )
    if info.status != 0:
        raise ConvergenceError(f"Action quadrature failed: {info.message}")
    return complex(np.exp(complex(action[0], action[1])))


@dataclass(frozen=True)
class RegularizationConfig:
    """
    Diffusion constant of the Wiener regularization of the path integral.

    Attributes
    ----------
    nu : float
        The diffusion constant `nu > 0`; the boundary layers have a width of `1 / nu`.
    """

    nu: float

    def __post_init__(self) -> None:
        if not self.nu > 0:
            raise ParameterError(f"nu must be positive, got {self.nu!r}")

    def check_horizon(self, t: float) -> None:
        """Raise `ParameterError` unless `nu * t >= 10`."""
        if not self.nu * t >= MIN_LAYER_WIDTHS:
            raise ParameterError(
                f"nu * t must be at least {MIN_LAYER_WIDTHS}, got nu={self.nu!r}, t={t!r}"
            )


class LayerPoint(NamedTuple):
    """Complex polar angles of the regularized path, as `cos(theta)` and `phi`."""

    cos_theta: complex
    phi: complex


def _cos_from_stereo(zeta: complex, eta: complex) -> complex:
    product = zeta * eta
    if not np.isfinite(product) or abs(1 + product) <= _POLE_EPS * (1 + abs(product)):
        raise PoleError(f"cos(theta) undefined at zeta={zeta!r}, eta={eta!r}")
    return (1 - product) / (1 + product)


def _phi_bar_change(trajectory: ClassicalTrajectory, s0: float, s1: float) -> complex:
    """Change of the complex azimuth `-i/2 log(zeta/eta)` along the classical path."""
    if s0 == s1:
        return 0j
    zeta, eta = trajectory._pairs(np.linspace(s0, s1, _LOG_SAMPLES))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = zeta / eta
    return -0.5j * _continued_log(ratio)


def _layer_log_change(c_edge: complex, jump: complex, decay: float) -> complex:
    """Change of `log((1 + c + jump x) / (1 - c - jump x))` for `x` from 1 to `decay`."""
    if jump == 0:
        return 0j
    x = np.linspace(1, decay, _LOG_SAMPLES)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = (1 + c_edge + jump * x) / (1 - c_edge - jump * x)
    return _continued_log(values)


def _layer_point(
    trajectory: ClassicalTrajectory,
    initial: SphereAngles,
    final: SphereAngles,
    nu: float,
    s: float,
    start_side: bool,
) -> LayerPoint:
    t = trajectory.horizon
    c_bar = _cos_from_stereo(*trajectory.at(s))
    if start_side:
        c_edge = _cos_from_stereo(trajectory.zeta_start, trajectory.at(0).eta)
        jump = np.cos(initial.theta) - c_edge
        decay = np.exp(-nu * s)
        phi = (
            initial.phi
            + _phi_bar_change(trajectory, 0, s)
            - 0.5j * _layer_log_change(c_edge, jump, decay)
        )
    else:
        c_edge = _cos_from_stereo(trajectory.at(t).zeta, trajectory.eta_end)
        jump = np.cos(final.theta) - c_edge
        decay = np.exp(-nu * (t - s))
        phi = (
            final.phi
            - _phi_bar_change(trajectory, s, t)
            + 0.5j * _layer_log_change(c_edge, jump, decay)
        )
    return LayerPoint(complex(c_bar + jump * decay), complex(phi))


def _check_layer_input(
    initial: SphereAngles, final: SphereAngles, t: float, reg: RegularizationConfig
) -> None:
    reg.check_horizon(t)
    for p in (initial, final):
        if p.is_north_pole or p.is_south_pole:
            raise PoleError(f"Boundary layers need 0 < theta < pi, got {p!r}")


def boundary_layer_path(
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    reg: RegularizationConfig,
    s: float,
    cfg: Optional[IntegratorConfig] = None,
    trajectory: Optional[ClassicalTrajectory] = None,
) -> LayerPoint:
    """
    Evaluate the stationary path of the Wiener-regularized path integral.

    At finite `nu` the path starts at the initial state and relaxes to the complex
    classical path within a time of order `1 / nu`; before the end it leaves the classical
    path towards the final state. For `s <= t/2`,
    `cos(theta(s)) = c(s) + (cos(theta') - c(0)) exp(-nu s)` with `c` the classical value of
    `cos(theta)`, and the azimuth follows the classical one corrected by the logarithm of
    `(1 + cos(theta)) / (1 - cos(theta))` along the layer; for `s > t/2` the mirrored form
    anchored at the final state is used.

    Parameters
    ----------
    f : FieldSpec
        The field.
    initial : SphereAngles
        Initial coherent state, `0 < theta < pi`.
    final : SphereAngles
        Final coherent state, `0 < theta < pi`.
    t : float
        Elapsed time.
    reg : RegularizationConfig
        The regularization, with `nu * t >= 10`.
    s : float
        Time in `[0, t]`.
    cfg : IntegratorConfig, optional
        Integrator settings for the classical path.
    trajectory : ClassicalTrajectory, optional
        The classical path, if already solved.

    Returns
    -------
    LayerPoint
        `cos(theta(s))` and `phi(s)`.
    """
    _check_layer_input(initial, final, t, reg)
    if not 0 <= s <= t:
        raise OutOfRangeError(f"Time {s!r} outside of [0, {t!r}]")
    if trajectory is None:
        trajectory = solve_trajectory(f, initial, final, t, cfg)
    return _layer_point(trajectory, initial, final, reg.nu, s, s <= t / 2)


def euler_lagrange_residual(
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    reg: RegularizationConfig,
    s: float,
    cfg: Optional[IntegratorConfig] = None,
    trajectory: Optional[ClassicalTrajectory] = None,
) -> tuple[complex, complex]:
    """
    Residuals of the regularized equations of motion along `boundary_layer_path`.

    The equations are
    `sin(theta) phi' / 2 + dH/dtheta + i/(2 nu) (theta'' - sin(theta) cos(theta) phi'**2)
    = 0` and
    `sin(theta) theta' / 2 - dH/dphi - i/(2 nu) (sin(theta)**2 phi'' + 2 sin(theta)
    cos(theta) theta' phi') = 0`, with derivatives taken by central differences of step
    `min(1e-4, 0.01 / nu)`.

    Parameters
    ----------
    f : FieldSpec
        The field.
    initial, final : SphereAngles
        The coherent states, `0 < theta < pi`.
    t : float
        Elapsed time.
    reg : RegularizationConfig
        The regularization, with `nu * t >= 10`.
    s : float
        Time inside `(0, t)`, at least one difference step away from both ends.
    cfg : IntegratorConfig, optional
        Integrator settings for the classical path.
    trajectory : ClassicalTrajectory, optional
        The classical path, if already solved.

    Returns
    -------
    r1, r2 : complex
        The left-hand sides of both equations.
    """
    _check_layer_input(initial, final, t, reg)
    nu = reg.nu
    h = min(1e-4, 0.01 / nu)
    if not h < s < t - h:
        raise OutOfRangeError(f"Time {s!r} not inside ({h!r}, {t - h!r})")
    if trajectory is None:
        trajectory = solve_trajectory(f, initial, final, t, cfg)

    # one layer form for the whole stencil
    start_side = s <= t / 2
    below, center, above = (
        _layer_point(trajectory, initial, final, nu, x, start_side)
        for x in (s - h, s, s + h)
    )
    dc = (above.cos_theta - below.cos_theta) / (2 * h)
    ddc = (above.cos_theta - 2 * center.cos_theta + below.cos_theta) / h**2
    dphi = (above.phi - below.phi) / (2 * h)
    ddphi = (above.phi - 2 * center.phi + below.phi) / h**2

    cos_theta = center.cos_theta
    sin_theta = np.sqrt(1 - cos_theta**2 + 0j)
    dtheta = -dc / sin_theta
    ddtheta = -(ddc + cos_theta * dtheta**2) / sin_theta

    bx, by, bz = f.sample(s)
    cos_phi, sin_phi = np.cos(center.phi), np.sin(center.phi)
    dh_dtheta = 0.5 * (cos_theta * (bx * cos_phi + by * sin_phi) - bz * sin_theta)
    dh_dphi = 0.5 * sin_theta * (-bx * sin_phi + by * cos_phi)

    r1 = (
        0.5 * sin_theta * dphi
        + dh_dtheta
        + 0.5j / nu * (ddtheta - sin_theta * cos_theta * dphi**2)
    )
    r2 = (
        0.5 * sin_theta * dtheta
        - dh_dphi
        - 0.5j / nu * (sin_theta**2 * ddphi + 2 * sin_theta * cos_theta * dtheta * dphi)
    )
    return complex(r1), complex(r2)

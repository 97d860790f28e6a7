# © spinsemi developers
#
# License: BSD (3-clause)

"""Utility functions."""

import logging
import warnings
from typing import Any, Callable, Iterable, NamedTuple, Optional, TypeVar

import numpy as np
import scipy.integrate

from spinsemi.errors import BranchTrackingError, PoleError, StepLimitError

logger = logging.getLogger(__name__)

# required to propagate the return type annotation through _parallel
_Returnable = TypeVar("_Returnable")

_ode_methods = {
    "RK45": scipy.integrate.RK45,
    "DOP853": scipy.integrate.DOP853,
    "RK23": scipy.integrate.RK23,
}


def _parallel(
    n_jobs: int,
    function: Callable[..., _Returnable],
    iterable: Iterable,
    *args: Any,
    **kwargs: Any,
) -> list[_Returnable]:
    """
    Apply a function to each element in an iterable in parallel.

    This uses joblib for parallelism. If the package is not available, it falls back to a
    pure Python loop. Results are always returned in the order of `iterable`.

    Parameters
    ----------
    n_jobs : int
        The number of jobs to run in parallel. If `1` (default), no parallelism is used.
        `-1` means using all processors.
    function : Callable
        The function to call.
    iterable : Iterable
        `function` will be applied to every element in this iterable.
    *args
        Positional arguments to be passed to `function`.
    **kwargs
        Keyword arguments to be passed to `function`.

    Returns
    -------
    list
        A list containing the return values of `function`.

    Warnings
    --------
    Note that in case the `function` is very simple, the cost for spawning workers will make
    the parallel execution slower than the standard execution.
    """
    if n_jobs == 1:
        return [function(x, *args, **kwargs) for x in iterable]
    try:
        from joblib import Parallel, delayed
    except ImportError:
        warnings.warn("joblib not installed, cannot run in parallel.", RuntimeWarning)
        return [function(x, *args, **kwargs) for x in iterable]

    return Parallel(n_jobs=n_jobs)(delayed(function)(x, *args, **kwargs) for x in iterable)


class _OdeSegment(NamedTuple):
    """
    A piece of an adaptive ODE solution.

    Attributes
    ----------
    ts : np.ndarray
        Accepted step boundaries, starting with the initial time.
    ys : np.ndarray
        States at `ts`, shape `(len(ts), n_states)`.
    solution : scipy.integrate.OdeSolution or None
        Dense interpolant over the segment, `None` if no step was taken.
    stopped : bool
        `True` if the segment ended because the stop condition fired.
    n_steps : int
        Number of accepted steps.
    """

    ts: np.ndarray
    ys: np.ndarray
    solution: Optional[scipy.integrate.OdeSolution]
    stopped: bool
    n_steps: int

    def __call__(self, t: Any) -> np.ndarray:
        if self.solution is None:
            return self.ys[0] if np.ndim(t) == 0 else np.outer(self.ys[0], np.ones(len(t)))
        return self.solution(t)


def _check_ode_method(method: str) -> None:
    if method not in _ode_methods:
        raise ValueError(
            f"Invalid ODE method: {method!r}. Possible options are: {tuple(_ode_methods)}."
        )


def _integrate_segment(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_bound: float,
    *,
    rel_tol: float,
    abs_tol: float,
    max_step: float,
    max_steps: int,
    method: str = "RK45",
    stop: Optional[Callable[[float, np.ndarray], bool]] = None,
) -> _OdeSegment:
    """
    Integrate an ODE with an embedded Runge-Kutta pair, one accepted step at a time.

    Stepping by hand (instead of calling `scipy.integrate.solve_ivp`) lets the caller cap
    the number of steps and leave the integration as soon as `stop(t, y)` becomes true
    after an accepted step, e.g. to change coordinate charts.

    Parameters
    ----------
    fun : Callable
        Right-hand side `fun(t, y)`.
    t0 : float
        Initial time.
    y0 : np.ndarray
        Initial (possibly complex) state.
    t_bound : float
        Final time.
    rel_tol, abs_tol : float
        Relative and absolute local error tolerances.
    max_step : float
        Largest admissible step size.
    max_steps : int
        Largest admissible number of accepted steps in this segment.
    method : {'RK45', 'DOP853', 'RK23'}
        Which `scipy.integrate` Runge-Kutta pair to use, by default `'RK45'`.
    stop : Callable, optional
        Predicate evaluated after every accepted step.

    Returns
    -------
    _OdeSegment
        The integrated segment including its dense output.
    """
    _check_ode_method(method)
    y0 = np.asarray(y0)
    if t_bound == t0:
        return _OdeSegment(np.array([t0]), y0[np.newaxis, :], None, False, 0)

    solver = _ode_methods[method](
        fun, t0, y0, t_bound, rtol=rel_tol, atol=abs_tol, max_step=max_step
    )
    ts = [t0]
    ys = [y0.copy()]
    interpolants = []
    stopped = False
    while solver.status == "running":
        if len(interpolants) >= max_steps:
            raise StepLimitError(
                f"ODE integration exceeded max_steps={max_steps} at t={solver.t!r} "
                f"(target {t_bound!r})"
            )
        message = solver.step()
        if solver.status == "failed":
            raise StepLimitError(f"ODE integration failed at t={solver.t!r}: {message}")
        ts.append(solver.t)
        ys.append(solver.y.copy())
        interpolants.append(solver.dense_output())
        if stop is not None and solver.status == "running" and stop(solver.t, solver.y):
            stopped = True
            break

    logger.debug("integrated %d steps on [%r, %r]", len(interpolants), t0, ts[-1])
    return _OdeSegment(
        np.array(ts),
        np.array(ys),
        scipy.integrate.OdeSolution(ts, interpolants),
        stopped,
        len(interpolants),
    )


def _track_sqrt(values: np.ndarray, root0: complex) -> tuple[np.ndarray, bool]:
    """
    Follow a square root continuously along a sequence of values.

    Parameters
    ----------
    values : np.ndarray
        Complex values `g_0, g_1, ...` sampled along a path.
    root0 : complex
        The root chosen at the start, `root0**2 == g_0`.

    Returns
    -------
    roots : np.ndarray
        Roots with the sign of each chosen closest to its predecessor.
    unambiguous : bool
        `True` if every step changes the root by a magnitude ratio of at most 2 and a phase
        of at most `pi/4`, i.e. the sampling resolves the branch.
    """
    roots = np.sqrt(np.asarray(values, dtype=complex))
    roots[0] = root0
    for k in range(1, len(roots)):
        if abs(roots[k] - roots[k - 1]) > abs(roots[k] + roots[k - 1]):
            roots[k] = -roots[k]
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = roots[1:] / roots[:-1]
        unambiguous = bool(
            np.all(np.isfinite(steps))
            and np.all(np.abs(steps) <= 2)
            and np.all(np.abs(steps) >= 0.5)
            and np.all(np.abs(np.angle(steps)) <= np.pi / 4)
        )
    return roots, unambiguous


def _continuous_sqrt(
    function: Callable[[np.ndarray], np.ndarray],
    t: float,
    root0: complex,
    n_initial: int = 16,
    n_max: int = 1024,
) -> tuple[complex, int]:
    """
    Continue a square root of `function(tau)` from `tau = 0` to `tau = t`.

    The path is sampled on an equidistant grid that doubles until `_track_sqrt` reports an
    unambiguous continuation.

    Parameters
    ----------
    function : Callable
        Vectorized function of the path parameter.
    t : float
        End of the path.
    root0 : complex
        Root at `tau = 0`.
    n_initial : int
        Number of grid intervals to start with, by default `16`.
    n_max : int
        Largest number of grid intervals, by default `1024`.

    Returns
    -------
    root : complex
        The continued root at `tau = t`.
    n_intervals : int
        The number of grid intervals that was needed.
    """
    n = max(1, n_initial)
    while True:
        grid = np.linspace(0, t, n + 1)
        roots, unambiguous = _track_sqrt(function(grid), root0)
        if unambiguous:
            return complex(roots[-1]), n
        if n >= n_max:
            raise BranchTrackingError(
                f"Square-root branch not resolved on {n} grid intervals over [0, {t!r}]"
            )
        logger.debug("refining branch grid to %d intervals", 2 * n)
        n *= 2


def _continued_log(values: np.ndarray) -> complex:
    """
    Change of the logarithm along a sampled path, continued through the samples.

    The imaginary part is the principal angle of `values[-1] / values[0]` plus the multiple
    of `2 pi` counted by the winding of the samples, so the accuracy is that of a single
    logarithm while the branch follows the path.

    Parameters
    ----------
    values : np.ndarray
        Nonzero complex samples along the path; successive samples must differ in phase by
        less than `pi`.

    Returns
    -------
    complex
        `log(values[-1]) - log(values[0])` on the continued branch.
    """
    values = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(values)) or np.any(values == 0):
        raise PoleError("Logarithm continued through zero or infinity")
    winding = np.sum(np.angle(values[1:] / values[:-1]))
    ratio = values[-1] / values[0]
    principal = np.angle(ratio)
    turns = np.round((winding - principal) / (2 * np.pi))
    return complex(np.log(abs(ratio)), principal + 2 * np.pi * turns)


def _evaluate_pieces(segments: list[_OdeSegment], x: np.ndarray) -> np.ndarray:
    """
    Evaluate consecutive ODE segments at the points `x`.

    Each point is assigned to the last segment starting at or before it. The result has
    shape `(len(x), n_states)`.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    starts = np.array([segment.ts[0] for segment in segments])
    index = np.clip(np.searchsorted(starts, x, side="right") - 1, 0, len(segments) - 1)
    values = np.empty((len(x), len(segments[0].ys[0])), dtype=complex)
    for k in np.unique(index):
        mask = index == k
        values[mask] = np.asarray(segments[k](x[mask])).T
    return values

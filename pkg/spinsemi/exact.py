# © spinsemi developers
#
# License: BSD (3-clause)

"""Exact spin-1/2 propagator, coherent-state matrix elements and label evolution."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Any, NamedTuple, Optional

import numpy as np

from spinsemi.config import get_config
from spinsemi.errors import DegenerateLabelError, InputError
from spinsemi.field import FieldSpec, classical_rhs, hamiltonian_angles
from spinsemi.sphere import SphereAngles, label_from_spinor, spinor
from spinsemi.utils import _check_ode_method, _integrate_segment, _OdeSegment

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Settings of the adaptive Runge-Kutta integration.

    Attributes
    ----------
    rel_tol : float
        Relative local error tolerance, by default `1e-12`.
    abs_tol : float
        Absolute local error tolerance, by default `1e-14`.
    max_step : float, optional
        Largest step size. If `None` (default), `max_step_fraction` times the horizon.
    max_steps : int
        Largest number of accepted steps per integration, by default `10**7`.
    method : {'RK45', 'DOP853', 'RK23'}
        The embedded Runge-Kutta pair, by default `'RK45'` (Dormand-Prince 5(4)).
    max_step_fraction : float
        Largest step as a fraction of the horizon when `max_step` is `None`, by default
        `0.01`.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: Optional[float] = None
    max_steps: int = 10_000_000
    method: str = "RK45"
    max_step_fraction: float = 0.01

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "max_steps", "max_step_fraction"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.max_step is not None and not self.max_step > 0:
            raise InputError(f"max_step must be positive, got {self.max_step!r}")
        _check_ode_method(self.method)

    @classmethod
    def from_config(cls, **overrides: Any) -> IntegratorConfig:
        """
        Create a configuration from the spinsemi settings.

        Values are read with `get_config()` (so `SPINSEMI_TOL` overrides `rel_tol`); keyword
        arguments that are not `None` take precedence.

        Parameters
        ----------
        **overrides : dict, optional
            Attribute values replacing the configured ones.

        Returns
        -------
        IntegratorConfig
            The configuration.
        """
        config = get_config()
        cfg = cls(
            rel_tol=float(config["rel_tol"]),
            abs_tol=float(config["abs_tol"]),
            max_steps=int(config["max_steps"]),
            method=str(config["ode_method"]),
            max_step_fraction=float(config["max_step_fraction"]),
        )
        return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})

    def step_bound(self, horizon: float) -> float:
        """Largest step size for an integration over `horizon`."""
        if self.max_step is not None:
            return self.max_step
        return self.max_step_fraction * abs(horizon) if horizon else np.inf

    def integrate(
        self, fun: Any, t0: float, y0: np.ndarray, t1: float, **kwargs: Any
    ) -> _OdeSegment:
        """Run `utils._integrate_segment` with these settings over `[t0, t1]`."""
        return _integrate_segment(
            fun,
            t0,
            y0,
            t1,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_step=kwargs.pop("max_step", self.step_bound(t1 - t0)),
            max_steps=kwargs.pop("max_steps", self.max_steps),
            method=self.method,
            **kwargs,
        )


def _resolve(cfg: Optional[IntegratorConfig]) -> IntegratorConfig:
    return IntegratorConfig.from_config() if cfg is None else cfg


class Su2Propagator(NamedTuple):
    """
    The evolution operator `U = [[a, b], [-b*, a*]]` of a spin-1/2.

    Attributes
    ----------
    a, b : complex
        The Cayley-Klein coefficients, `|a|**2 + |b|**2 = 1`.
    t : float
        Elapsed time.
    n_steps : int
        Number of integrator steps used to compute the coefficients (`0` for closed forms).
    """

    a: complex
    b: complex
    t: float
    n_steps: int = 0

    @property
    def unitarity_defect(self) -> float:
        """Deviation of `|a|**2 + |b|**2` from one."""
        return abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1)


class LabelEvolution(NamedTuple):
    """A coherent state mapped by a propagator, `U |p> = exp(i phase) |label>`."""

    label: SphereAngles
    phase: float


IDENTITY = Su2Propagator(1 + 0j, 0j, 0.0)


def propagator_matrix(u: Su2Propagator) -> np.ndarray:
    """Return the 2x2 unitary matrix of a propagator."""
    return np.array([[u.a, u.b], [-np.conj(u.b), np.conj(u.a)]], dtype=complex)


def compose(later: Su2Propagator, earlier: Su2Propagator) -> Su2Propagator:
    """
    Compose two propagators, first `earlier` then `later`.

    Parameters
    ----------
    later : Su2Propagator
        Evolution over the second time interval.
    earlier : Su2Propagator
        Evolution over the first time interval.

    Returns
    -------
    Su2Propagator
        The propagator of the product `U_later U_earlier`.
    """
    a = later.a * earlier.a - later.b * np.conj(earlier.b)
    b = later.a * earlier.b + later.b * np.conj(earlier.a)
    return Su2Propagator(
        complex(a), complex(b), later.t + earlier.t, later.n_steps + earlier.n_steps
    )


def _ab_rhs(f: FieldSpec) -> Any:
    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        bx, by, bz = f.sample(t)
        a, b = y
        coupling = 0.5 * (1j * bx + by)
        return np.array(
            [-0.5j * bz * a + coupling * np.conj(b), -0.5j * bz * b - coupling * np.conj(a)]
        )

    return rhs


def integrate_ab(
    f: FieldSpec, t: float, cfg: Optional[IntegratorConfig] = None
) -> Su2Propagator:
    """
    Compute the exact propagator by integrating the Cayley-Klein equations.

    The coefficients obey `a' = -i bz a / 2 + (i bx + by) b* / 2` and
    `b' = -i bz b / 2 - (i bx + by) a* / 2` with `a(0) = 1`, `b(0) = 0`; the time
    ordering of the evolution operator is realized by forward integration.

    Parameters
    ----------
    f : FieldSpec
        The field, evaluable on `[0, t]`.
    t : float
        Elapsed time, `t >= 0`.
    cfg : IntegratorConfig, optional
        Integrator settings. If `None` (default), `IntegratorConfig.from_config()`.

    Returns
    -------
    Su2Propagator
        The propagator.

    Examples
    --------
    A field along x flips the spin after half a period:

    >>> from spinsemi import ConstantField
    >>> u = integrate_ab(ConstantField(1, 0, 0), np.pi)
    >>> np.round(u.b, 9)
    -1j
    """
    if not t >= 0:
        raise InputError(f"Elapsed time must be non-negative, got {t!r}")
    if t == 0:
        return IDENTITY
    cfg = _resolve(cfg)
    segment = cfg.integrate(_ab_rhs(f), 0.0, np.array([1 + 0j, 0j]), t)
    a, b = segment.ys[-1]
    u = Su2Propagator(complex(a), complex(b), float(t), segment.n_steps)
    logger.debug(
        "integrate_ab: t=%r, steps=%d, defect=%.3g", t, u.n_steps, u.unitarity_defect
    )
    return u


def matrix_element(u: Su2Propagator, final: SphereAngles, initial: SphereAngles) -> complex:
    """
    Compute the coherent-state matrix element `<final|U|initial>`.

    Parameters
    ----------
    u : Su2Propagator
        The propagator.
    final : SphereAngles
        Label of the bra.
    initial : SphereAngles
        Label of the ket.

    Returns
    -------
    complex
        The matrix element.
    """
    return complex(np.vdot(spinor(final), propagator_matrix(u) @ spinor(initial)))


def transition_probability(
    u: Su2Propagator, final: SphereAngles, initial: SphereAngles
) -> float:
    """Return `|<final|U|initial>|**2`."""
    return abs(matrix_element(u, final, initial)) ** 2


def exact_propagator(
    f: FieldSpec,
    initial: SphereAngles,
    final: SphereAngles,
    t: float,
    cfg: Optional[IntegratorConfig] = None,
) -> complex:
    """Integrate the propagator of `f` over `[0, t]` and return `<final|U|initial>`."""
    return matrix_element(integrate_ab(f, t, cfg), final, initial)


def evolve_label(u: Su2Propagator, p: SphereAngles, strict: bool = False) -> LabelEvolution:
    """
    Map a coherent state by a propagator.

    A propagator maps coherent states onto coherent states, `U |p> = exp(i phase) |p(t)>`.
    The new label and the phase are read off the evolved spinor.

    Parameters
    ----------
    u : Su2Propagator
        The propagator.
    p : SphereAngles
        The initial label.
    strict : bool
        If `True`, raise `DegenerateLabelError` when the new label lies within `1e-12` of a
        pole (where its azimuth is undefined). Otherwise (default) the azimuth is set to
        `0`.

    Returns
    -------
    LabelEvolution
        The evolved label and the phase.
    """
    label, phase = label_from_spinor(propagator_matrix(u) @ spinor(p))
    if strict and (label.is_north_pole or label.is_south_pole):
        raise DegenerateLabelError(
            f"Evolved label of {p!r} is a pole, its azimuth is undefined"
        )
    return LabelEvolution(label, phase)


def _label_rhs(f: FieldSpec) -> Any:
    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        theta, phi = y[0], y[1]
        if not 0 <= theta <= np.pi:
            raise DegenerateLabelError(
                f"Classical label left the sphere at theta={theta!r}"
            )
        dtheta, dphi = classical_rhs(f, theta, phi, t)
        energy = hamiltonian_angles(f, SphereAngles(theta, phi), t)
        return np.array([dtheta, dphi, 0.5 * np.cos(theta) * dphi - energy])

    return rhs


def _integrate_label(
    f: FieldSpec, p: SphereAngles, t: float, cfg: Optional[IntegratorConfig]
) -> _OdeSegment:
    if not t >= 0:
        raise InputError(f"Elapsed time must be non-negative, got {t!r}")
    return _resolve(cfg).integrate(_label_rhs(f), 0.0, np.array([p.theta, p.phi, 0.0]), t)


def accumulated_phase(
    f: FieldSpec, p: SphereAngles, t: float, cfg: Optional[IntegratorConfig] = None
) -> float:
    """
    Integrate the classical action along the classically evolved label.

    The label follows the classical equations of motion and the action
    `int_0^t [cos(theta) dphi/ds / 2 - H(theta, phi, s)] ds` is integrated as an additional
    state of the same adaptive solve. The result is the continuous (unwrapped) phase of
    `U |p> = exp(i phase) |p(t)>` where `p(t)` carries the unreduced azimuth; compared with
    `evolve_label`, which reduces the azimuth, it therefore agrees modulo `pi` in general
    and modulo `2 pi` as long as the azimuth does not wrap.

    Parameters
    ----------
    f : FieldSpec
        The field.
    p : SphereAngles
        The initial label.
    t : float
        Elapsed time, `t >= 0`.
    cfg : IntegratorConfig, optional
        Integrator settings. If `None` (default), `IntegratorConfig.from_config()`.

    Returns
    -------
    float
        The accumulated phase.
    """
    if t == 0:
        return 0.0
    return float(_integrate_label(f, p, t, cfg).ys[-1, 2])


def label_trajectory(
    f: FieldSpec,
    p: SphereAngles,
    t: float,
    samples: int,
    cfg: Optional[IntegratorConfig] = None,
) -> np.ndarray:
    """
    Sample the classically evolved label on an equidistant grid.

    Parameters
    ----------
    f : FieldSpec
        The field.
    p : SphereAngles
        The initial label.
    t : float
        Elapsed time, `t >= 0`.
    samples : int
        Number of grid points including both ends, at least 2.
    cfg : IntegratorConfig, optional
        Integrator settings. If `None` (default), `IntegratorConfig.from_config()`.

    Returns
    -------
    np.ndarray
        Array of shape `(samples, 4)` with columns `s, theta, phi, phase`; `phi` is
        continuous (not reduced).
    """
    if samples < 2:
        raise InputError(f"Number of samples must be at least 2, got {samples!r}")
    s = np.linspace(0, t, samples)
    segment = _integrate_label(f, p, t, cfg)
    return np.column_stack([s, segment(s).T])

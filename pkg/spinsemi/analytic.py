# © spinsemi developers
#
# License: BSD (3-clause)

"""Closed-form propagators of a constant field and of the Landau-Zener sweep."""

from __future__ import annotations

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from spinsemi.config import get_config
from spinsemi.errors import ConvergenceError, ParameterError, PoleError
from spinsemi.exact import Su2Propagator
from spinsemi.sphere import SphereAngles, quarter_root, to_stereo
from spinsemi.utils import _continuous_sqrt

logger = logging.getLogger(__name__)

# largest |z| for which the Kummer series is supported
KUMMER_Z_MAX = 50.0

# cancellation factor max|term|/|sum| above which double precision is not sufficient
_CANCELLATION_LIMIT = 1e5


class KummerParams(NamedTuple):
    """Arguments of the Kummer function `Phi(alpha, beta, z)`, as in `kummer_phi(*p)`."""

    alpha: complex
    beta: complex
    z: complex


class LzBasis(NamedTuple):
    """
    The four Kummer-function solutions of the Landau-Zener problem at time `s`.

    `zeta(s) = (D zeta' + C)/(B zeta' + A)` and `a = exp(i gamma**2 s**2 / 4) A`,
    `b = exp(i gamma**2 s**2 / 4) B`.
    """

    A: complex
    B: complex
    C: complex
    D: complex


def _check_beta(beta: complex) -> None:
    if beta.imag == 0 and beta.real <= 0 and beta.real == np.round(beta.real):
        raise ParameterError(
            f"beta must not be a non-positive integer, got {beta!r} "
            "(the Kummer series has a vanishing denominator)"
        )


def _series_double(
    alpha: complex, beta: complex, z: complex, max_terms: int
) -> tuple[complex, float]:
    term = 1 + 0j
    running = 1 + 0j
    real_parts, imag_parts = [1.0], [0.0]
    largest = 1.0
    for n in range(max_terms):
        factor = (alpha + n) * z / ((beta + n) * (n + 1))
        term *= factor
        real_parts.append(term.real)
        imag_parts.append(term.imag)
        running += term
        largest = max(largest, abs(term))
        if term == 0 or (abs(factor) < 1 and abs(term) <= 1e-16 * abs(running)):
            total = complex(math.fsum(real_parts), math.fsum(imag_parts))
            return total, largest
    raise ConvergenceError(
        f"Kummer series for alpha={alpha!r}, beta={beta!r}, z={z!r} did not converge "
        f"within {max_terms} terms"
    )


def _series_extended(
    alpha: complex, beta: complex, z: complex, max_terms: int, bits: int
) -> complex:
    import mpmath

    with mpmath.workprec(bits):
        a, b, x = mpmath.mpc(alpha), mpmath.mpc(beta), mpmath.mpc(z)
        tolerance = mpmath.mpf(2) ** (-bits + 8)
        term = mpmath.mpc(1)
        total = mpmath.mpc(1)
        for n in range(max_terms):
            factor = (a + n) * x / ((b + n) * (n + 1))
            term *= factor
            total += term
            if term == 0 or (abs(factor) < 1 and abs(term) <= tolerance * abs(total)):
                return complex(total)
    raise ConvergenceError(
        f"Kummer series for alpha={alpha!r}, beta={beta!r}, z={z!r} did not converge "
        f"within {max_terms} terms"
    )


def kummer_phi(
    alpha: complex, beta: complex, z: complex, max_terms: Optional[int] = None
) -> complex:
    """
    Evaluate the confluent hypergeometric (Kummer) function `Phi(alpha, beta, z)`.

    The power series `sum_n (alpha)_n / (beta)_n z**n / n!` is summed with the term
    recurrence `t_{n+1} = t_n (alpha + n) z / ((beta + n)(n + 1))` and compensated
    summation, until a term drops below `1e-16` of the partial sum. For imaginary `z` the
    terms grow large before they decay and cancel; if the largest term exceeds the result
    by more than a factor `1e5`, the same recurrence is repeated at a working precision
    raised by the number of cancelled bits (using mpmath), so that the result keeps a
    relative accuracy of about `1e-12`.

    Parameters
    ----------
    alpha, beta : complex
        Parameters; `beta` must not be a non-positive integer.
    z : complex
        Argument with `|z| <= 50`.
    max_terms : int, optional
        Largest number of series terms. If `None` (default), the `kummer_max_terms`
        setting.

    Returns
    -------
    complex
        The function value.

    Examples
    --------
    >>> abs(kummer_phi(1, 1, 0.5) - np.exp(0.5)) < 1e-14
    True
    """
    alpha, beta, z = complex(alpha), complex(beta), complex(z)
    _check_beta(beta)
    if abs(z) > KUMMER_Z_MAX:
        raise ParameterError(f"|z| must not exceed {KUMMER_Z_MAX}, got {abs(z)!r}")
    if max_terms is None:
        max_terms = int(get_config("kummer_max_terms"))
    if z == 0:
        return 1 + 0j

    total, largest = _series_double(alpha, beta, z, max_terms)
    cancellation = largest / abs(total) if total != 0 else np.inf
    if cancellation <= _CANCELLATION_LIMIT:
        return total
    lost_bits = 64 if not np.isfinite(cancellation) else int(np.ceil(np.log2(cancellation)))
    bits = 53 + lost_bits + 32
    logger.debug(
        "Kummer series cancels by %.3g for alpha=%r, z=%r, summing with %d bits",
        cancellation,
        alpha,
        z,
        bits,
    )
    return _series_extended(alpha, beta, z, max_terms, bits)


def _sin_over(omega: float, t: float) -> float:
    """Return `sin(omega t / 2) / omega`, continued to `t / 2` at `omega = 0`."""
    return 0.5 * t * float(np.sinc(omega * t / (2 * np.pi)))


def constant_field_ab(delta: float, eps: float, t: float) -> Su2Propagator:
    """
    Closed-form propagator of the field `(delta, 0, eps)`.

    Parameters
    ----------
    delta : float
        Transverse field component.
    eps : float
        Longitudinal field component.
    t : float
        Elapsed time.

    Returns
    -------
    Su2Propagator
        `a = cos(w t/2) - i eps/w sin(w t/2)` and `b = -i delta/w sin(w t/2)` with
        `w = sqrt(delta**2 + eps**2)`; the limit `w -> 0` is the identity.
    """
    omega = float(np.hypot(delta, eps))
    sin_over = _sin_over(omega, t)
    a = complex(np.cos(omega * t / 2), -eps * sin_over)
    b = complex(0, -delta * sin_over)
    return Su2Propagator(a, b, float(t))


def _mobius_constant(
    delta: float, eps: float, value: complex, duration: float
) -> tuple[complex, complex]:
    """Numerator and denominator of the constant-field Riccati flow over `duration`."""
    omega = float(np.hypot(delta, eps))
    cos_half = np.cos(omega * duration / 2)
    sin_over = _sin_over(omega, duration)
    numerator = value * cos_half + 1j * (eps * value - delta) * sin_over
    denominator = cos_half - 1j * (delta * value + eps) * sin_over
    return complex(numerator), complex(denominator)


def _divide(numerator: complex, denominator: complex, what: str) -> complex:
    if abs(denominator) < 1e-14 * (1 + abs(numerator)):
        raise PoleError(f"{what} passes through infinity (tangent singularity)")
    return numerator / denominator


def constant_field_paths(
    delta: float, eps: float, zeta0: complex, eta_t: complex, t: float, s: float
) -> tuple[complex, complex]:
    """
    Closed-form classical paths of the field `(delta, 0, eps)`.

    `zeta` starts at `zeta(0) = zeta0` and `eta` ends at `eta(t) = eta_t`; both evolve by
    Moebius maps, e.g.
    `zeta(s) = (w zeta0 cos(w s/2) + i (eps zeta0 - delta) sin(w s/2)) /
    (w cos(w s/2) - i (delta zeta0 + eps) sin(w s/2))`.

    Parameters
    ----------
    delta, eps : float
        Field components.
    zeta0 : complex
        Initial value of `zeta`.
    eta_t : complex
        Final value of `eta`.
    t : float
        Horizon.
    s : float
        Time at which the paths are evaluated.

    Returns
    -------
    zeta, eta : complex
        The path values at `s`.
    """
    zeta = _divide(*_mobius_constant(delta, eps, zeta0, s), "zeta(s)")
    eta = _divide(*_mobius_constant(delta, eps, eta_t, t - s), "eta(s)")
    return zeta, eta


def constant_field_exponent(
    delta: float, eps: float, zeta0: complex, eta_t: complex, t: float
) -> complex:
    """
    Closed form of the action exponential of the field `(delta, 0, eps)`.

    The factor `exp(-i/2 int_0^t [delta (zeta + eta)/2 + eps] ds)` along the classical paths
    equals the product of the square roots of the two Moebius denominators,
    `[cos(w t/2) - i (delta zeta0 + eps) sin(w t/2)/w]**(1/2)
    [cos(w t/2) - i (delta eta_t + eps) sin(w t/2)/w]**(1/2)`, with the branch continued
    from `t = 0`, where the factor is one.

    Parameters
    ----------
    delta, eps : float
        Field components.
    zeta0 : complex
        Initial value of `zeta`.
    eta_t : complex
        Final value of `eta`.
    t : float
        Horizon.

    Returns
    -------
    complex
        The factor.
    """

    def product(tau: np.ndarray) -> np.ndarray:
        return np.array(
            [
                _mobius_constant(delta, eps, zeta0, x)[1]
                * _mobius_constant(delta, eps, eta_t, x)[1]
                for x in tau
            ]
        )

    root, _ = _continuous_sqrt(product, t, 1 + 0j, n_initial=64, n_max=4096)
    return root


def constant_field_semiclassical(
    delta: float, eps: float, initial: SphereAngles, final: SphereAngles, t: float
) -> complex:
    """
    Closed-form semiclassical propagator of the field `(delta, 0, eps)`.

    Parameters
    ----------
    delta, eps : float
        Field components.
    initial : SphereAngles
        Initial coherent state (`theta < pi`).
    final : SphereAngles
        Final coherent state (`theta < pi`).
    t : float
        Horizon.

    Returns
    -------
    complex
        `Q [(1 + zeta' eta'') cos(w t/2) - i (eps - eps zeta' eta'' + delta zeta' +
        delta eta'') sin(w t/2)/w] / sqrt((1 + zeta' eta')(1 + zeta'' eta''))`, where `Q`
        is `quarter_root(final, initial)`.
    """
    zeta_i, eta_i = to_stereo(initial)
    zeta_f, eta_f = to_stereo(final)
    omega = float(np.hypot(delta, eps))
    product = zeta_i * eta_f
    bracket = (1 + product) * np.cos(omega * t / 2) - 1j * (
        eps - eps * product + delta * (zeta_i + eta_f)
    ) * _sin_over(omega, t)
    norm = np.sqrt((1 + (zeta_i * eta_i).real) * (1 + (zeta_f * eta_f).real))
    return complex(quarter_root(final, initial) * bracket / norm)


def lz_basis(omega: float, gamma: float, s: float) -> LzBasis:
    """
    Evaluate the Kummer-function basis of the Landau-Zener problem.

    With `kappa = omega**2 / (8 gamma**2)` and `z = -i gamma**2 s**2 / 2`,
    `A = Phi(-i kappa, 1/2, z)`, `B = -i omega s / 2 Phi(-i kappa + 1/2, 3/2, z)`,
    `C = -i omega s / 2 Phi(-i kappa + 1, 3/2, z)` and `D = Phi(-i kappa + 1/2, 1/2, z)`.
    They obey `A' = -i omega C / 2`, `B' = -i omega D / 2`,
    `C' = -i omega A / 2 - i gamma**2 s C` and `D' = -i omega B / 2 - i gamma**2 s D`.

    Parameters
    ----------
    omega : float
        Transverse coupling.
    gamma : float
        Square root of the sweep rate, with `gamma**2 s**2 / 2 <= 50`.
    s : float
        Time.

    Returns
    -------
    LzBasis
        The four functions at `s`.
    """
    if gamma == 0:
        # without sweep the field is constant along x
        cos_half = np.cos(omega * s / 2)
        sin_half = -1j * np.sin(omega * s / 2)
        cos_half, sin_half = complex(cos_half), complex(sin_half)
        return LzBasis(cos_half, sin_half, sin_half, cos_half)
    z = -0.5j * gamma**2 * s**2
    if abs(z) > KUMMER_Z_MAX:
        raise ParameterError(
            f"gamma**2 s**2 / 2 must not exceed {KUMMER_Z_MAX}, got {abs(z)!r}"
        )
    kappa = omega**2 / (8 * gamma**2)
    prefactor = -0.5j * omega * s
    return LzBasis(
        kummer_phi(-1j * kappa, 0.5, z),
        prefactor * kummer_phi(-1j * kappa + 0.5, 1.5, z) if omega else 0j,
        prefactor * kummer_phi(-1j * kappa + 1, 1.5, z) if omega else 0j,
        kummer_phi(-1j * kappa + 0.5, 0.5, z),
    )


def lz_ab(omega: float, gamma: float, t: float) -> Su2Propagator:
    """
    Closed-form propagator of the Landau-Zener field `(omega, 0, -gamma**2 t)`.

    Parameters
    ----------
    omega : float
        Transverse coupling.
    gamma : float
        Square root of the sweep rate.
    t : float
        Elapsed time, with `gamma**2 t**2 / 2 <= 50`.

    Returns
    -------
    Su2Propagator
        `a = exp(i gamma**2 t**2 / 4) A(t)` and `b = exp(i gamma**2 t**2 / 4) B(t)`.
    """
    basis = lz_basis(omega, gamma, t)
    phase = np.exp(0.25j * gamma**2 * t**2)
    return Su2Propagator(complex(phase * basis.A), complex(phase * basis.B), float(t))


def lz_paths(
    omega: float, gamma: float, zeta0: complex, eta_t: complex, t: float, s: float
) -> tuple[complex, complex]:
    """
    Closed-form classical paths of the Landau-Zener field.

    `zeta(s) = (D_s zeta0 + C_s)/(B_s zeta0 + A_s)` and, composing the Moebius maps of the
    backward flow from `t`, `eta(s) = ((A_s D_t - B_s C_t) eta_t + A_s B_t - B_s A_t) /
    ((D_s C_t - C_s D_t) eta_t + D_s A_t - C_s B_t)`, so that `eta(t) = eta_t` and
    `eta(0) = (D_t eta_t + B_t)/(C_t eta_t + A_t)`.

    Parameters
    ----------
    omega, gamma : float
        Field parameters.
    zeta0 : complex
        Initial value of `zeta`.
    eta_t : complex
        Final value of `eta`.
    t : float
        Horizon.
    s : float
        Time at which the paths are evaluated.

    Returns
    -------
    zeta, eta : complex
        The path values at `s`.
    """
    A_s, B_s, C_s, D_s = lz_basis(omega, gamma, s)
    A_t, B_t, C_t, D_t = lz_basis(omega, gamma, t)
    zeta = _divide(D_s * zeta0 + C_s, B_s * zeta0 + A_s, "zeta(s)")
    eta = _divide(
        (A_s * D_t - B_s * C_t) * eta_t + A_s * B_t - B_s * A_t,
        (D_s * C_t - C_s * D_t) * eta_t + D_s * A_t - C_s * B_t,
        "eta(s)",
    )
    return zeta, eta


def lz_asymptote(omega: float, gamma: float) -> float:
    """
    Asymptotic probability `exp(-pi omega**2 / (2 gamma**2))` to stay in the spin-up state.

    This is the limit of `|a|**2` for a sweep through the crossing from `-T` to `T` as
    `T -> inf`; the spin-flip probability tends to one minus this value.
    """
    if gamma == 0:
        return 0.0 if omega else 1.0
    return float(np.exp(-np.pi * omega**2 / (2 * gamma**2)))

# © spinsemi developers
#
# License: BSD (3-clause)

"""Spin-1/2 coherent states: labels, stereographic coordinates and matrix elements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from spinsemi.errors import InputError, NotRealPointError, PoleError

# snapping distance of theta to the poles and of degenerate labels
ANGLE_EPS = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _reduce_phi(phi: float) -> float:
    """Map an azimuth onto (-pi, pi]."""
    reduced = np.pi - np.mod(np.pi - phi, 2 * np.pi)
    return float(reduced)


@dataclass(frozen=True)
class SphereAngles:
    """
    A real point on the unit sphere labelling a spin coherent state.

    The polar angle is clamped to `[0, pi]` when it lies within `1e-12` of that interval and
    the azimuth is reduced to `(-pi, pi]`. Note that the spinor of a coherent state carries
    half-angle phases, so `phi` and `phi + 2 pi` label the same ray up to a sign.

    Attributes
    ----------
    theta : float
        Polar angle in radians.
    phi : float
        Azimuthal angle in radians.
    """

    theta: float
    phi: float

    def __post_init__(self) -> None:
        theta = float(self.theta)
        phi = float(self.phi)
        if not (np.isfinite(theta) and np.isfinite(phi)):
            raise InputError(f"Angles must be finite, got theta={theta!r}, phi={phi!r}")
        if -ANGLE_EPS <= theta < 0:
            theta = 0.0
        elif np.pi < theta <= np.pi + ANGLE_EPS:
            theta = np.pi
        if not 0 <= theta <= np.pi:
            raise InputError(f"theta must lie in [0, pi], got {theta!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", _reduce_phi(phi))

    @property
    def is_north_pole(self) -> bool:
        """Whether the point is the north pole (theta = 0)."""
        return self.theta == 0

    @property
    def is_south_pole(self) -> bool:
        """Whether the point is the south pole (theta = pi)."""
        return self.theta == np.pi


class StereoPair(NamedTuple):
    """
    Stereographic coordinates of a point of the complexified sphere.

    For a real point, `eta` is the complex conjugate of `zeta`.
    """

    zeta: complex
    eta: complex


class SpinMatrixElements(NamedTuple):
    """Matrix elements `<final|S_i|initial>` and the overlap `<final|initial>`."""

    sx: complex
    sy: complex
    sz: complex
    overlap: complex


def spinor(p: SphereAngles) -> np.ndarray:
    """
    Return the coherent-state spinor of a sphere point.

    Parameters
    ----------
    p : SphereAngles
        The coherent-state label.

    Returns
    -------
    np.ndarray
        Complex amplitudes `(cos(theta/2) exp(-i phi/2), sin(theta/2) exp(i phi/2))` of the
        spin-up and spin-down states.
    """
    half_phase = np.exp(0.5j * p.phi)
    return np.array(
        [np.cos(p.theta / 2) / half_phase, np.sin(p.theta / 2) * half_phase], dtype=complex
    )


def label_from_spinor(psi: np.ndarray) -> tuple[SphereAngles, float]:
    """
    Find the coherent state and global phase of a spinor.

    Every normalized spinor can be written as `exp(i phase) |theta, phi>`. If the spinor
    points within `1e-12` of a pole, the azimuth is undefined and set to `0`.

    Parameters
    ----------
    psi : np.ndarray
        A spinor with two complex components (normalization is not required).

    Returns
    -------
    label : SphereAngles
        The coherent-state label with azimuth reduced to `(-pi, pi]`.
    phase : float
        The global phase in `(-pi, pi]` (up to rounding at the boundary).
    """
    up, down = complex(psi[0]), complex(psi[1])
    norm = np.hypot(abs(up), abs(down))
    if norm == 0:
        raise InputError("Cannot find the coherent state of a zero spinor")
    theta = 2 * np.arctan2(abs(down), abs(up))
    if theta < ANGLE_EPS:
        return SphereAngles(0.0, 0.0), float(np.angle(up))
    if np.pi - theta < ANGLE_EPS:
        return SphereAngles(np.pi, 0.0), float(np.angle(down))
    label = SphereAngles(theta, np.angle(down) - np.angle(up))
    phase = _reduce_phi(np.angle(up) + label.phi / 2)
    return label, phase


def overlap(final: SphereAngles, initial: SphereAngles) -> complex:
    """
    Compute the overlap `<final|initial>` of two coherent states.

    Parameters
    ----------
    final : SphereAngles
        Label of the bra.
    initial : SphereAngles
        Label of the ket.

    Returns
    -------
    complex
        `cos(t''/2) cos(t'/2) exp(i (p''-p')/2) + sin(t''/2) sin(t'/2) exp(-i (p''-p')/2)`,
        where `(t', p')` and `(t'', p'')` are the initial and final angles.

    Examples
    --------
    >>> overlap(SphereAngles(np.pi / 2, 0), SphereAngles(0, 0))
    (0.7071067811865476+0j)
    """
    half_delta = np.exp(0.5j * (final.phi - initial.phi))
    return complex(
        np.cos(final.theta / 2) * np.cos(initial.theta / 2) * half_delta
        + np.sin(final.theta / 2) * np.sin(initial.theta / 2) / half_delta
    )


def quarter_root(final: SphereAngles, initial: SphereAngles) -> complex:
    """
    Return the quarter power `(zeta'' eta' / (zeta' eta''))**(1/4)` of two real points.

    The base equals `exp(2 i (phi'' - phi'))`; the root `exp(i (phi'' - phi') / 2)`
    is the one for which the semiclassical propagator reduces to the overlap at zero
    elapsed time.
    """
    return complex(np.exp(0.5j * (final.phi - initial.phi)))


def to_stereo(p: SphereAngles) -> StereoPair:
    """
    Project a sphere point stereographically from the south pole.

    Parameters
    ----------
    p : SphereAngles
        A point with `theta < pi`.

    Returns
    -------
    StereoPair
        `zeta = tan(theta/2) exp(i phi)` and `eta = tan(theta/2) exp(-i phi)`.
    """
    if p.is_south_pole:
        raise PoleError("The south pole has no finite stereographic coordinates")
    radius = np.tan(p.theta / 2)
    zeta = complex(radius * np.exp(1j * p.phi))
    return StereoPair(zeta, zeta.conjugate())


def from_stereo(p: StereoPair) -> SphereAngles:
    """
    Invert the stereographic projection for a real point of the sphere.

    Complex points (with `eta` different from the conjugate of `zeta`) are rejected, since
    their angles are not uniquely defined.

    Parameters
    ----------
    p : StereoPair
        Coordinates with `eta == conjugate(zeta)` up to `1e-12 (1 + |zeta|)`.

    Returns
    -------
    SphereAngles
        The angles `theta = arccos((1 - zeta eta)/(1 + zeta eta))` and `phi = arg(zeta)`.
    """
    zeta, eta = complex(p.zeta), complex(p.eta)
    if abs(eta - zeta.conjugate()) > 1e-12 * (1 + abs(zeta)):
        raise NotRealPointError(
            f"Stereographic pair ({zeta!r}, {eta!r}) is not a real point of the sphere"
        )
    # atan2 form of arccos((1 - |z|^2)/(1 + |z|^2)), accurate near both poles
    theta = 2 * np.arctan(abs(zeta))
    phi = np.angle(zeta) if zeta != 0 else 0.0
    return SphereAngles(theta, phi)


def spin_ratios_stereo(zeta: complex, eta: complex) -> np.ndarray:
    """
    Ratios `<final|S_i|initial> / <final|initial>` in stereographic form.

    With `zeta` taken from the initial and `eta` from the final state, the ratios are
    `((zeta + eta)/2, -i (zeta - eta)/2, (1 - zeta eta)/2) / (1 + zeta eta)`. The same
    expression, with independent complex `zeta` and `eta`, defines the spin vector on the
    complexified sphere.

    Parameters
    ----------
    zeta, eta : complex
        Stereographic coordinates.

    Returns
    -------
    np.ndarray
        The three complex ratios.
    """
    denominator = 1 + zeta * eta
    if abs(denominator) < 1e-14 * (1 + abs(zeta * eta)):
        raise PoleError(f"1 + zeta*eta vanishes for zeta={zeta!r}, eta={eta!r}")
    return (
        np.array([zeta + eta, -1j * (zeta - eta), 1 - zeta * eta], dtype=complex)
        / (2 * denominator)
    )


def spin_matrix_elements(final: SphereAngles, initial: SphereAngles) -> SpinMatrixElements:
    """
    Compute the spin-operator matrix elements between two coherent states.

    Parameters
    ----------
    final : SphereAngles
        Label of the bra.
    initial : SphereAngles
        Label of the ket.

    Returns
    -------
    SpinMatrixElements
        `<final|S_x|initial>`, `<final|S_y|initial>`, `<final|S_z|initial>` and
        `<final|initial>`.
    """
    bra = spinor(final)
    ket = spinor(initial)
    sx, sy, sz = (complex(np.vdot(bra, pauli @ ket)) / 2 for pauli in PAULI)
    return SpinMatrixElements(sx, sy, sz, complex(np.vdot(bra, ket)))


def expectation(p: SphereAngles) -> np.ndarray:
    """Return the spin expectation values `<p|S_i|p>`, i.e. half the unit vector of `p`."""
    return 0.5 * np.array(
        [
            np.sin(p.theta) * np.cos(p.phi),
            np.sin(p.theta) * np.sin(p.phi),
            np.cos(p.theta),
        ]
    )


def identity_resolution_defect(n_theta: int, n_phi: int) -> float:
    """
    Check the resolution of the identity by coherent states numerically.

    The integral `1/(2 pi) int dcos(theta) dphi |theta, phi><theta, phi|` is evaluated as a
    2x2 matrix with Gauss-Legendre nodes in `cos(theta)` and the trapezoidal rule on a
    uniform periodic grid in `phi`. Both rules are exact for the integrand (linear in
    `cos(theta)`, harmonics up to first order in `phi`), so the defect is rounding only.

    Parameters
    ----------
    n_theta : int
        Number of Gauss-Legendre nodes, at least 2.
    n_phi : int
        Number of azimuthal nodes, at least 2.

    Returns
    -------
    float
        The largest absolute deviation of a matrix entry from the identity.
    """
    if n_theta < 2 or n_phi < 2:
        raise InputError(
            f"Quadrature orders must be at least 2, got n_theta={n_theta!r}, "
            f"n_phi={n_phi!r}"
        )
    nodes, weights = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    cos_half = np.sqrt((1 + nodes) / 2)
    sin_half = np.sqrt((1 - nodes) / 2)
    half_phase = np.exp(0.5j * phi)
    # spinors on the grid, shape (n_theta, n_phi, 2)
    psi = np.stack(
        [
            cos_half[:, np.newaxis] / half_phase[np.newaxis, :],
            sin_half[:, np.newaxis] * half_phase[np.newaxis, :],
        ],
        axis=-1,
    )
    projectors = np.einsum("tpi,tpj->tpij", psi, psi.conj())
    integral = np.einsum("t,tpij->ij", weights, projectors) * (2 * np.pi / n_phi)
    resolution = integral / (2 * np.pi)
    return float(np.max(np.abs(resolution - np.eye(2))))

# © spinsemi developers
#
# License: BSD (3-clause)

"""Tests for coherent-state labels, stereographic coordinates and matrix elements."""

import numpy as np
import pytest

from spinsemi import (
    InputError,
    NotRealPointError,
    PoleError,
    SphereAngles,
    StereoPair,
    expectation,
    from_stereo,
    identity_resolution_defect,
    label_from_spinor,
    overlap,
    spin_matrix_elements,
    spin_ratios_stereo,
    spinor,
    to_stereo,
)

rng = np.random.default_rng(seed=42)
RANDOM_POINTS = [
    SphereAngles(theta, phi)
    for theta, phi in zip(rng.uniform(0.05, np.pi - 0.05, 8), rng.uniform(-np.pi, np.pi, 8))
]


def test_angles_are_normalized():
    """Test clamping of the polar angle and reduction of the azimuth."""
    p = SphereAngles(-1e-13, 3 * np.pi)
    assert p.theta == 0
    assert p.is_north_pole
    assert np.isclose(p.phi, np.pi)
    q = SphereAngles(np.pi + 5e-13, -np.pi)
    assert q.is_south_pole
    assert q.phi == np.pi


@pytest.mark.parametrize(
    "theta,phi", [(-0.1, 0.0), (np.pi + 1e-6, 0.0), (np.nan, 0.0), (1.0, np.inf)]
)
def test_invalid_angles(theta, phi):
    """Test that angles outside the sphere are rejected."""
    with pytest.raises(InputError):
        SphereAngles(theta, phi)


def test_angles_are_frozen():
    """Test that labels cannot be modified."""
    p = SphereAngles(1.0, 0.5)
    with pytest.raises(AttributeError):
        p.theta = 0.3


@pytest.mark.parametrize("p", RANDOM_POINTS)
def test_spinor_is_normalized(p):
    """Test the norm of coherent-state spinors."""
    assert np.isclose(np.linalg.norm(spinor(p)), 1, atol=1e-15)


@pytest.mark.parametrize("p", RANDOM_POINTS)
def test_label_from_spinor(p):
    """Test recovering label and phase from a rephased spinor."""
    label, phase = label_from_spinor(np.exp(0.7j) * spinor(p))
    assert np.isclose(label.theta, p.theta, atol=1e-12)
    assert np.isclose(np.exp(1j * label.phi), np.exp(1j * p.phi), atol=1e-12)
    assert np.allclose(np.exp(1j * phase) * spinor(label), np.exp(0.7j) * spinor(p))


def test_label_from_spinor_at_poles():
    """Test that labels at the poles get a zero azimuth."""
    label, phase = label_from_spinor(np.array([0, 1j]))
    assert label.is_south_pole
    assert label.phi == 0
    assert np.isclose(phase, np.pi / 2)
    label, phase = label_from_spinor(np.array([-1, 0]))
    assert label.is_north_pole
    assert np.isclose(abs(phase), np.pi)
    with pytest.raises(InputError):
        label_from_spinor(np.zeros(2))


def test_overlap_values():
    """Test overlaps of special states."""
    north = SphereAngles(0, 0)
    south = SphereAngles(np.pi, 0)
    assert overlap(north, north) == 1
    assert abs(overlap(south, north)) < 1e-16
    assert np.isclose(overlap(SphereAngles(np.pi / 2, 0), north), np.sqrt(0.5))


@pytest.mark.parametrize("p", RANDOM_POINTS[:4])
@pytest.mark.parametrize("q", RANDOM_POINTS[4:])
def test_overlap_against_spinors(p, q):
    """Test the closed-form overlap against the spinor inner product."""
    assert np.isclose(overlap(q, p), np.vdot(spinor(q), spinor(p)), atol=1e-14)
    assert np.isclose(overlap(p, q), np.conj(overlap(q, p)), atol=1e-14)
    cos_angle = 2 * expectation(p) @ (2 * expectation(q))
    assert np.isclose(abs(overlap(q, p)) ** 2, (1 + cos_angle) / 2)


@pytest.mark.parametrize("p", RANDOM_POINTS)
def test_stereo_roundtrip(p):
    """Test stereographic projection and its inverse."""
    zeta, eta = to_stereo(p)
    assert eta == np.conj(zeta)
    assert np.isclose(abs(zeta), np.tan(p.theta / 2))
    q = from_stereo(StereoPair(zeta, eta))
    assert np.isclose(q.theta, p.theta, atol=1e-12)
    assert np.isclose(q.phi, p.phi, atol=1e-12)


def test_stereo_poles():
    """Test the stereographic coordinates at the poles."""
    assert to_stereo(SphereAngles(0, 1.0)) == StereoPair(0, 0)
    with pytest.raises(PoleError):
        to_stereo(SphereAngles(np.pi, 0))
    assert from_stereo(StereoPair(1e20, 1e20)).theta == pytest.approx(np.pi)


def test_from_stereo_rejects_complex_points():
    """Test that complex points of the sphere have no angles."""
    with pytest.raises(NotRealPointError):
        from_stereo(StereoPair(1 + 1j, 1 + 1j))


@pytest.mark.parametrize("p", RANDOM_POINTS[:4])
@pytest.mark.parametrize("q", RANDOM_POINTS[4:])
def test_spin_matrix_elements(p, q):
    """Test spin matrix elements against their stereographic form."""
    elements = spin_matrix_elements(q, p)
    ratios = spin_ratios_stereo(to_stereo(p).zeta, to_stereo(q).eta)
    assert np.isclose(elements.overlap, overlap(q, p), atol=1e-14)
    assert np.allclose(
        np.array(elements[:3]) / elements.overlap, ratios, rtol=1e-10, atol=1e-12
    )


@pytest.mark.parametrize("p", RANDOM_POINTS)
def test_diagonal_matrix_elements(p):
    """Test that diagonal matrix elements are the expectation values."""
    elements = spin_matrix_elements(p, p)
    assert np.allclose(np.real(elements[:3]), expectation(p), atol=1e-14)
    assert np.allclose(np.imag(elements[:3]), 0, atol=1e-14)
    assert np.isclose(np.linalg.norm(expectation(p)), 0.5)


def test_spin_ratios_pole():
    """Test that the ratios are undefined for orthogonal stereographic arguments."""
    with pytest.raises(PoleError):
        spin_ratios_stereo(1j, 1j)


@pytest.mark.parametrize("n_theta,n_phi", [(2, 2), (3, 4), (8, 16)])
def test_identity_resolution(n_theta, n_phi):
    """Test the resolution of the identity by coherent states."""
    assert identity_resolution_defect(n_theta, n_phi) < 1e-14


def test_identity_resolution_high_order():
    """Test the quadrature defect at the orders used for acceptance."""
    assert identity_resolution_defect(64, 64) <= 1e-12


def test_identity_resolution_invalid_order():
    """Test that too small quadrature orders are rejected."""
    with pytest.raises(InputError, match="at least 2"):
        identity_resolution_defect(1, 8)

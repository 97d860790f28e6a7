# © spinsemi developers
#
# License: BSD (3-clause)

"""Tests for the Kummer function and the closed-form propagators."""

import logging

import mpmath
import numpy as np
import pytest
import scipy.integrate

from spinsemi import (
    ConstantField,
    ConvergenceError,
    IntegratorConfig,
    KummerParams,
    LandauZenerField,
    ParameterError,
    SphereAngles,
    constant_field_ab,
    constant_field_exponent,
    constant_field_paths,
    constant_field_semiclassical,
    exact_propagator,
    integrate_ab,
    kummer_phi,
    lz_ab,
    lz_asymptote,
    lz_basis,
    lz_paths,
    riccati_rhs,
    solve_trajectory,
    to_stereo,
)

CFG = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


@pytest.mark.parametrize(
    "alpha,beta,z",
    [
        (0.5, 1.5, 2.0),
        (-2.0, 0.5, 3.0),
        (1 - 2j, 1.5, -4.0),
        (-0.3j, 0.5, -2j),
        (-1.2j + 0.5, 1.5, -10j),
        (-0.7j + 1, 1.5, -20j),
    ],
)
def test_kummer_phi(alpha, beta, z):
    """Test the Kummer function against mpmath."""
    expected = complex(mpmath.hyp1f1(alpha, beta, z))
    assert abs(kummer_phi(alpha, beta, z) - expected) <= 1e-11 * max(1, abs(expected))


def test_kummer_phi_special_values():
    """Test the exponential and polynomial cases of the Kummer function."""
    assert kummer_phi(0.7, 1.1, 0) == 1
    params = KummerParams(alpha=1.5, beta=1.5, z=-2j)
    assert np.isclose(kummer_phi(*params), np.exp(-2j), rtol=1e-14)
    assert np.isclose(kummer_phi(2.5, 2.5, 1.5 - 0.5j), np.exp(1.5 - 0.5j), rtol=1e-14)
    # Laguerre polynomial L_2^(-1/2)(z) up to normalization
    z = 1.7
    assert np.isclose(kummer_phi(-2, 0.5, z), 1 - 4 * z + 4 * z**2 / 3, rtol=1e-14)


def test_kummer_phi_extended_precision(caplog):
    """Test that strongly cancelling series are summed with extended precision."""
    alpha, beta, z = -3j, 0.5, -40j
    with caplog.at_level(logging.DEBUG, logger="spinsemi.analytic"):
        value = kummer_phi(alpha, beta, z)
    assert "Kummer series cancels" in caplog.text
    expected = complex(mpmath.hyp1f1(alpha, beta, z))
    assert abs(value - expected) <= 1e-10 * abs(expected)


def test_kummer_phi_invalid_arguments():
    """Test the admissible parameter range of the Kummer function."""
    with pytest.raises(ParameterError, match="non-positive integer"):
        kummer_phi(1, 0, 0.5)
    with pytest.raises(ParameterError, match="non-positive integer"):
        kummer_phi(1, -2, 0.5)
    with pytest.raises(ParameterError, match="must not exceed"):
        kummer_phi(1, 0.5, 51j)
    with pytest.raises(ConvergenceError):
        kummer_phi(0.5, 1.5, 5.0, max_terms=3)


@pytest.mark.parametrize("delta,eps,t", [(1.0, 0.0, np.pi), (0.7, -1.1, 2.3), (0, 0, 1.0)])
def test_constant_field_ab(delta, eps, t):
    """Test the closed-form constant-field propagator."""
    u = constant_field_ab(delta, eps, t)
    assert u.unitarity_defect < 1e-14
    exact = integrate_ab(ConstantField(delta, 0, eps), t, CFG)
    assert abs(u.a - exact.a) < 1e-9
    assert abs(u.b - exact.b) < 1e-9


def test_constant_field_paths():
    """Test that the closed-form paths solve the classical equations of motion."""
    delta, eps, t = 0.8, 0.5, 1.5
    zeta0, eta_t = 0.3 + 0.2j, 0.5 - 0.1j
    f = ConstantField(delta, 0, eps)
    zeta, eta = constant_field_paths(delta, eps, zeta0, eta_t, t, 0.0)
    assert np.isclose(zeta, zeta0)
    assert np.isclose(constant_field_paths(delta, eps, zeta0, eta_t, t, t)[1], eta_t)
    h = 1e-5
    for s in (0.4, 1.1):
        below = constant_field_paths(delta, eps, zeta0, eta_t, t, s - h)
        above = constant_field_paths(delta, eps, zeta0, eta_t, t, s + h)
        zeta, eta = constant_field_paths(delta, eps, zeta0, eta_t, t, s)
        assert np.isclose(
            (above[0] - below[0]) / (2 * h), riccati_rhs(f, zeta, s), rtol=1e-7
        )
        assert np.isclose(
            (above[1] - below[1]) / (2 * h), riccati_rhs(f, eta, s, "eta"), rtol=1e-7
        )


def test_constant_field_exponent():
    """Test the closed-form action exponential against quadrature along the paths."""
    delta, eps, t = 0.8, 0.5, 1.5
    zeta0, eta_t = 0.3 + 0.2j, 0.5 - 0.1j

    def integrand(s):
        zeta, eta = constant_field_paths(delta, eps, zeta0, eta_t, t, s)
        value = delta * (zeta + eta) / 2 + eps
        return np.array([value.real, value.imag])

    integral, _ = scipy.integrate.quad_vec(integrand, 0, t, epsabs=1e-13, epsrel=1e-12)
    expected = np.exp(-0.5j * complex(*integral))
    assert np.isclose(constant_field_exponent(delta, eps, zeta0, eta_t, t), expected)


@pytest.mark.parametrize(
    "delta,eps,t",
    [(1.0, 0.0, 1.0), (0.6, 1.4, 2.2), (-2.0, 0.3, 4.5), (0.0, 1.0, 3.0)],
)
def test_constant_field_semiclassical(delta, eps, t):
    """Test that the closed-form semiclassical propagator is exact."""
    initial = SphereAngles(0.9, -0.4)
    final = SphereAngles(2.1, 1.3)
    value = constant_field_semiclassical(delta, eps, initial, final, t)
    exact = exact_propagator(ConstantField(delta, 0, eps), initial, final, t, CFG)
    assert abs(value - exact) < 1e-9


def test_lz_basis_without_coupling():
    """Test the Landau-Zener basis without transverse coupling."""
    gamma, s = 1.3, 1.7
    basis = lz_basis(0.0, gamma, s)
    assert np.isclose(basis.A, 1)
    assert basis.B == 0
    assert basis.C == 0
    assert np.isclose(basis.D, np.exp(-0.5j * gamma**2 * s**2))


@pytest.mark.parametrize(
    "omega,gamma,t",
    [(1.0, 1.0, 2.0), (0.5, 2.0, 1.5), (2.5, 0.6, 4.0), (1.2, 0.0, 2.0), (3.0, 3.0, 2.1)],
)
def test_lz_ab(omega, gamma, t):
    """Test the Landau-Zener propagator against ODE integration."""
    closed = lz_ab(omega, gamma, t)
    exact = integrate_ab(LandauZenerField(omega, gamma), t, CFG)
    assert abs(closed.a - exact.a) < 1e-9
    assert abs(closed.b - exact.b) < 1e-9


def test_lz_ab_unitarity():
    """Test unitarity of the Landau-Zener propagator on a parameter grid."""
    for omega in np.linspace(0.2, 3, 4):
        for gamma in np.linspace(0.2, 3, 4):
            for t in np.linspace(0, 4, 5):
                if gamma**2 * t**2 / 2 <= 20:
                    assert lz_ab(omega, gamma, t).unitarity_defect < 1e-9


def test_lz_basis_domain():
    """Test that arguments beyond the supported domain are rejected."""
    with pytest.raises(ParameterError):
        lz_basis(1.0, 2.0, 6.0)


def test_lz_paths():
    """Test the closed-form Landau-Zener paths against the integrated classical path."""
    omega, gamma, t = 1.0, 0.8, 3.0
    initial = SphereAngles(1.0, 0.3)
    final = SphereAngles(2.0, -0.5)
    zeta0 = to_stereo(initial).zeta
    eta_t = to_stereo(final).eta
    trajectory = solve_trajectory(LandauZenerField(omega, gamma), initial, final, t, CFG)
    for s in (0.0, 1.0, 2.2, t):
        zeta, eta = lz_paths(omega, gamma, zeta0, eta_t, t, s)
        path = trajectory.at(s)
        assert np.isclose(zeta, path.zeta, rtol=1e-7)
        assert np.isclose(eta, path.eta, rtol=1e-7)


def test_lz_asymptote():
    """Test the asymptotic survival probability."""
    assert lz_asymptote(1.0, 1.0) == pytest.approx(0.20787957635076193)
    assert lz_asymptote(0.0, 2.0) == 1
    assert lz_asymptote(1.0, 0.0) == 0


@pytest.mark.slow
@pytest.mark.parametrize("window,tol", [(30.0, 1 / 30.0), (100.0, 5e-3)])
def test_lz_asymptote_symmetric_window(window, tol):
    """Test the survival probability of long symmetric sweeps."""
    # on a finite window the probability oscillates about the limit by about 1/(gamma**2 T)
    u = integrate_ab(
        LandauZenerField(1.0, 1.0, t_offset=-window),
        2 * window,
        IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, method="DOP853"),
    )
    assert abs(abs(u.a) ** 2 + abs(u.b) ** 2 - 1) < 1e-8
    assert abs(abs(u.a) ** 2 - lz_asymptote(1.0, 1.0)) < tol
    assert abs(abs(u.b) ** 2 - (1 - lz_asymptote(1.0, 1.0))) < tol


def _derivative(function, s, h=1e-3):
    # five-point stencil, fourth order in h
    values = [np.array(function(s + k * h)) for k in (-2, -1, 1, 2)]
    return (values[0] - 8 * values[1] + 8 * values[2] - values[3]) / (12 * h)


def test_lz_basis_derivative_system():
    """Test the linear differential equations of the Kummer basis on a grid."""
    worst = 0.0
    for omega in np.linspace(0.2, 3, 5):
        for gamma in np.linspace(0.2, 3, 5):
            for s in np.linspace(0.2, 1.5, 5):
                A, B, C, D = lz_basis(omega, gamma, s)
                dA, dB, dC, dD = _derivative(lambda x: lz_basis(omega, gamma, x), s)
                residuals = (
                    dA + 0.5j * omega * C,
                    dB + 0.5j * omega * D,
                    dC + 0.5j * omega * A + 1j * gamma**2 * s * C,
                    dD + 0.5j * omega * B + 1j * gamma**2 * s * D,
                )
                worst = max(worst, *(abs(r) for r in residuals))
    assert worst <= 1e-6


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kummer_phi_terminating_series(seed):
    """Test the term recurrence against factorials for terminating series."""
    rng = np.random.default_rng(seed)
    for n in range(1, 21):
        beta = complex(rng.uniform(0.2, 3), rng.uniform(-2, 2))
        z = complex(*rng.uniform(-2, 2, size=2))
        direct = mpmath.fsum(
            mpmath.rf(-n, k) / mpmath.rf(beta, k) * mpmath.mpc(z) ** k / mpmath.factorial(k)
            for k in range(n + 1)
        )
        expected = complex(direct)
        assert abs(kummer_phi(-n, beta, z) - expected) <= 1e-10 * max(1, abs(expected))


@pytest.mark.slow
def test_constant_field_ab_ensemble():
    """Test the constant-field closed form against integration on random samples."""
    rng = np.random.default_rng(2024)
    for _ in range(200):
        delta, eps = rng.uniform(-3, 3, size=2)
        t = rng.uniform(0, 10)
        closed = constant_field_ab(delta, eps, t)
        u = integrate_ab(ConstantField(delta, 0, eps), t, CFG)
        assert max(abs(closed.a - u.a), abs(closed.b - u.b)) <= 1e-10
        for w in (closed, u):
            assert abs(abs(w.a) ** 2 + abs(w.b) ** 2 - 1) <= 1e-10

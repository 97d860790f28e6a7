# © spinsemi developers
#
# License: BSD (3-clause)

"""Tests for field models, field files and the classical Hamiltonian."""

import numpy as np
import pytest

from spinsemi import (
    ConstantField,
    DegenerateLabelError,
    FieldSpecError,
    FourierField,
    LandauZenerField,
    OutOfRangeError,
    PoleError,
    RotatedField,
    SphereAngles,
    StereoPair,
    TabulatedField,
    classical_rhs,
    field_at,
    hamiltonian_angles,
    hamiltonian_stereo,
    parse_field,
    read_fourier,
    read_table,
    shifted,
    spin_matrix_elements,
    to_stereo,
)


@pytest.fixture()
def table_file(tmp_path):
    """Write a small field table."""
    path = tmp_path / "table.csv"
    path.write_text("t,bx,by,bz\n0,0,0,0\n1,2,0,-1\n2,2,4,1\n")
    return path


@pytest.fixture()
def fourier_file(tmp_path):
    """Write a small set of Fourier coefficients."""
    path = tmp_path / "fourier.csv"
    path.write_text(
        "component,omega,cos_amp,sin_amp\nx,1.0,0.5,0.0\nz,2.0,0.0,1.5\nz,0,0.25,0\n"
    )
    return path


def test_landau_zener_field():
    """Test the linearly swept field and its time offset."""
    assert field_at(LandauZenerField(1.5, 2.0), 0.5) == (1.5, 0.0, -2.0)
    assert field_at(LandauZenerField(1.0, 1.0, t_offset=-3.0), 3.0).bz == 0.0


def test_tabulated_field(table_file):
    """Test linear interpolation of a field table."""
    f = read_table(table_file)
    assert isinstance(f, TabulatedField)
    assert field_at(f, 0.5) == pytest.approx((1.0, 0.0, -0.5))
    assert field_at(f, 1.5) == pytest.approx((2.0, 2.0, 0.0))
    assert field_at(f, 2.0) == pytest.approx((2.0, 4.0, 1.0))
    assert f.describe() == f"table:{table_file}"
    with pytest.raises(OutOfRangeError):
        f.sample(2.1)
    with pytest.raises(OutOfRangeError):
        f.sample(-1e-3)


@pytest.mark.parametrize(
    "t,b",
    [
        ([0.0], [[1.0, 0.0, 0.0]]),
        ([0.0, 1.0], [[1.0, 0.0, 0.0]]),
        ([0.0, 0.0], np.zeros((2, 3))),
        ([0.0, np.inf], np.zeros((2, 3))),
    ],
)
def test_invalid_tabulated_field(t, b):
    """Test that malformed tables are rejected."""
    with pytest.raises(FieldSpecError):
        TabulatedField(np.array(t), np.array(b))


def test_fourier_field(fourier_file):
    """Test evaluation of a Fourier field read from a file."""
    f = read_fourier(fourier_file)
    assert isinstance(f, FourierField)
    t = 0.3
    expected = (0.5 * np.cos(t), 0.0, 1.5 * np.sin(2 * t) + 0.25)
    assert field_at(f, t) == pytest.approx(expected)
    assert f.describe() == f"fourier:{fourier_file}"


def test_invalid_field_files(tmp_path):
    """Test that field files with a wrong layout are rejected."""
    bad_header = tmp_path / "bad_header.csv"
    bad_header.write_text("time,bx,by,bz\n0,0,0,0\n1,0,0,0\n")
    with pytest.raises(FieldSpecError, match="Invalid header"):
        read_table(bad_header)

    bad_number = tmp_path / "bad_number.csv"
    bad_number.write_text("t,bx,by,bz\n0,0,0,0\n1,x,0,0\n")
    with pytest.raises(FieldSpecError, match="Invalid number"):
        read_table(bad_number)

    bad_component = tmp_path / "bad_component.csv"
    bad_component.write_text("component,omega,cos_amp,sin_amp\nw,1,1,1\n")
    with pytest.raises(FieldSpecError, match="Invalid component"):
        read_fourier(bad_component)

    with pytest.raises(FieldSpecError, match="Cannot read"):
        read_table(tmp_path / "missing.csv")


def test_parse_field(table_file, fourier_file):
    """Test all kinds of field specifications."""
    assert parse_field("const:1,2,3") == ConstantField(1.0, 2.0, 3.0)
    assert parse_field("lz:1,0.5") == LandauZenerField(1.0, 0.5)
    assert parse_field("lz:1,0.5,-2") == LandauZenerField(1.0, 0.5, -2.0)
    assert isinstance(parse_field(f"table:{table_file}"), TabulatedField)
    assert isinstance(parse_field(f"fourier:{fourier_file}"), FourierField)
    for f in (ConstantField(1.0, -2.5, 0.125), LandauZenerField(0.5, 2.0, 1.0)):
        assert parse_field(f.describe()) == f


@pytest.mark.parametrize(
    "spec", ["const:1,2", "lz:1", "foo:1,2,3", "const", "const:1,a,3", "lz:1,nan"]
)
def test_invalid_field_specification(spec):
    """Test that malformed specifications are rejected."""
    with pytest.raises(FieldSpecError):
        parse_field(spec)


def test_shifted_and_rotated_fields():
    """Test field wrappers."""
    f = LandauZenerField(1.0, 1.0)
    assert shifted(f, 0) is f
    assert field_at(shifted(f, 2.0), 1.0) == field_at(f, 3.0)
    quarter_turn = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    rotated = RotatedField(ConstantField(1.0, 0.0, 2.0), quarter_turn)
    assert field_at(rotated, 0.0) == pytest.approx((0.0, 1.0, 2.0))


@pytest.mark.parametrize("theta,phi", [(0.3, -2.0), (1.2, 0.4), (2.9, 3.0)])
def test_hamiltonian_forms_agree(theta, phi):
    """Test the Hamiltonian in angles, in stereographic form and as a matrix element."""
    f = ConstantField(0.7, -1.3, 2.1)
    p = SphereAngles(theta, phi)
    h = hamiltonian_angles(f, p, 0.0)
    assert np.isclose(hamiltonian_stereo(f, to_stereo(p), 0.0), h, atol=1e-14)
    elements = spin_matrix_elements(p, p)
    assert np.isclose(np.dot(elements[:3], (0.7, -1.3, 2.1)).real, h)


def test_hamiltonian_stereo_pole():
    """Test the Hamiltonian where 1 + zeta*eta vanishes."""
    with pytest.raises(PoleError):
        hamiltonian_stereo(ConstantField(1, 0, 0), StereoPair(2.0, -0.5), 0.0)


def test_classical_rhs():
    """Test the classical equations of motion."""
    f = ConstantField(0.0, 0.0, 1.5)
    assert classical_rhs(f, 1.0, 0.3, 0.0) == (0.0, 1.5)
    assert classical_rhs(f, 0.0, 0.3, 0.0) == (0.0, 1.5)
    dtheta, dphi = classical_rhs(ConstantField(1.0, 0.0, 0.0), np.pi / 2, np.pi / 2, 0.0)
    assert dtheta == pytest.approx(-1.0)
    assert dphi == pytest.approx(0.0)
    with pytest.raises(DegenerateLabelError):
        classical_rhs(ConstantField(1.0, 0.0, 0.0), 0.0, 0.0, 0.0)

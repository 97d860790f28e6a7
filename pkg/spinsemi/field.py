# © spinsemi developers
#
# License: BSD (3-clause)

"""Magnetic field models and the classical spin Hamiltonian."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from spinsemi.errors import (
    DegenerateLabelError,
    FieldSpecError,
    OutOfRangeError,
    PoleError,
)
from spinsemi.sphere import ANGLE_EPS, SphereAngles, StereoPair, spin_ratios_stereo

TABLE_HEADER = ("t", "bx", "by", "bz")
FOURIER_HEADER = ("component", "omega", "cos_amp", "sin_amp")
_COMPONENTS = ("x", "y", "z")


class FieldSample(NamedTuple):
    """Field components `B(t) = (bx, by, bz)` in units of angular frequency."""

    bx: float
    by: float
    bz: float


class FieldSpec:
    """
    Base class of the time-dependent magnetic field models.

    A spin-1/2 in the field evolves under `H(t) = bx S_x + by S_y + bz S_z` (with hbar = 1).
    Subclasses are immutable and implement `sample`.
    """

    def sample(self, t: float) -> FieldSample:
        """Evaluate the field at time `t`."""
        raise NotImplementedError

    def describe(self) -> str:
        """Return a specification string understood by `parse_field`, if one exists."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantField(FieldSpec):
    """A time-independent field."""

    bx: float
    by: float
    bz: float

    def sample(self, t: float) -> FieldSample:  # noqa: D102
        return FieldSample(self.bx, self.by, self.bz)

    def describe(self) -> str:  # noqa: D102
        return f"const:{self.bx!r},{self.by!r},{self.bz!r}"


@dataclass(frozen=True)
class LandauZenerField(FieldSpec):
    """
    Constant transverse coupling with a linearly swept detuning.

    The field is `B(t) = (omega, 0, -gamma**2 (t + t_offset))`; the level crossing happens
    at `t = -t_offset`.

    Attributes
    ----------
    omega : float
        Transverse coupling.
    gamma : float
        Square root of the sweep rate.
    t_offset : float
        Shift of the time origin, by default `0`.
    """

    omega: float
    gamma: float
    t_offset: float = 0.0

    def sample(self, t: float) -> FieldSample:  # noqa: D102
        return FieldSample(self.omega, 0.0, -self.gamma**2 * (t + self.t_offset))

    def describe(self) -> str:  # noqa: D102
        return f"lz:{self.omega!r},{self.gamma!r},{self.t_offset!r}"


@dataclass(frozen=True, eq=False)
class TabulatedField(FieldSpec):
    """
    A field linearly interpolated between samples.

    Attributes
    ----------
    t : np.ndarray
        Strictly increasing sample times.
    b : np.ndarray
        Field samples, shape `(len(t), 3)`.
    source : str, optional
        Path the table was read from, used by `describe`.
    """

    t: np.ndarray
    b: np.ndarray
    source: str | None = None
    _slack: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if t.ndim != 1 or len(t) < 2:
            raise FieldSpecError("A tabulated field needs at least two samples")
        if b.shape != (len(t), 3):
            raise FieldSpecError(
                f"Field samples must have shape {(len(t), 3)}, got {b.shape}"
            )
        if np.any(np.diff(t) <= 0):
            raise FieldSpecError("Sample times of a tabulated field must strictly increase")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(b))):
            raise FieldSpecError("Tabulated field contains non-finite values")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "b", b)
        # tolerate rounding of integrator stage times at the table ends
        object.__setattr__(self, "_slack", 1e-12 * (1 + np.max(np.abs(t))))

    def sample(self, t: float) -> FieldSample:  # noqa: D102
        if not self.t[0] - self._slack <= t <= self.t[-1] + self._slack:
            raise OutOfRangeError(
                f"Time {t!r} outside of the tabulated range [{self.t[0]!r}, {self.t[-1]!r}]"
            )
        return FieldSample(*(float(np.interp(t, self.t, self.b[:, i])) for i in range(3)))

    def describe(self) -> str:  # noqa: D102
        if self.source is None:
            raise FieldSpecError("Tabulated field was not read from a file")
        return f"table:{self.source}"


@dataclass(frozen=True, eq=False)
class FourierField(FieldSpec):
    """
    A field given by finite Fourier series in every component.

    Attributes
    ----------
    harmonics : tuple[np.ndarray, np.ndarray, np.ndarray]
        For each of x, y and z an array of shape `(n, 3)` with rows
        `(angular frequency, cosine amplitude, sine amplitude)`.
    source : str, optional
        Path the coefficients were read from, used by `describe`.
    """

    harmonics: tuple[np.ndarray, np.ndarray, np.ndarray]
    source: str | None = None

    def __post_init__(self) -> None:
        if len(self.harmonics) != 3:
            raise FieldSpecError("A Fourier field needs coefficients for x, y and z")
        harmonics = []
        for component in self.harmonics:
            array = np.asarray(component, dtype=float).reshape(-1, 3)
            if not np.all(np.isfinite(array)):
                raise FieldSpecError("Fourier field contains non-finite coefficients")
            harmonics.append(array)
        object.__setattr__(self, "harmonics", tuple(harmonics))

    def sample(self, t: float) -> FieldSample:  # noqa: D102
        values = []
        for component in self.harmonics:
            phase = component[:, 0] * t
            values.append(
                float(component[:, 1] @ np.cos(phase) + component[:, 2] @ np.sin(phase))
            )
        return FieldSample(*values)

    def describe(self) -> str:  # noqa: D102
        if self.source is None:
            raise FieldSpecError("Fourier field was not read from a file")
        return f"fourier:{self.source}"


@dataclass(frozen=True)
class ShiftedField(FieldSpec):
    """The field `base` seen from a clock started at `t0`, i.e. `B(t) = base(t + t0)`."""

    base: FieldSpec
    t0: float

    def sample(self, t: float) -> FieldSample:  # noqa: D102
        return self.base.sample(t + self.t0)

    def describe(self) -> str:  # noqa: D102
        raise FieldSpecError("A shifted field has no textual specification")


@dataclass(frozen=True, eq=False)
class RotatedField(FieldSpec):
    """The field `base` rotated by the 3x3 rotation matrix `rotation`."""

    base: FieldSpec
    rotation: np.ndarray

    def sample(self, t: float) -> FieldSample:  # noqa: D102
        return FieldSample(*(float(x) for x in self.rotation @ self.base.sample(t)))

    def describe(self) -> str:  # noqa: D102
        raise FieldSpecError("A rotated field has no textual specification")


def shifted(f: FieldSpec, t0: float) -> FieldSpec:
    """Return the field `f` with its time origin moved to `t0`."""
    if t0 == 0:
        return f
    return ShiftedField(f, t0)


def field_at(f: FieldSpec, t: float) -> FieldSample:
    """
    Evaluate a field at a given time.

    Parameters
    ----------
    f : FieldSpec
        The field model.
    t : float
        Time.

    Returns
    -------
    FieldSample
        The field components.

    Examples
    --------
    >>> field_at(LandauZenerField(omega=1, gamma=1), 3)
    FieldSample(bx=1, by=0.0, bz=-3.0)
    """
    return f.sample(t)


def hamiltonian_angles(f: FieldSpec, p: SphereAngles, t: float) -> float:
    """
    Evaluate the classical Hamiltonian `<p|H(t)|p>` on the real sphere.

    Parameters
    ----------
    f : FieldSpec
        The field model.
    p : SphereAngles
        The coherent-state label.
    t : float
        Time.

    Returns
    -------
    float
        `(bx sin(theta) cos(phi) + by sin(theta) sin(phi) + bz cos(theta)) / 2`.
    """
    bx, by, bz = f.sample(t)
    sin_theta = np.sin(p.theta)
    transverse = bx * np.cos(p.phi) + by * np.sin(p.phi)
    return 0.5 * float(sin_theta * transverse + bz * np.cos(p.theta))


def hamiltonian_stereo(f: FieldSpec, p: StereoPair, t: float) -> complex:
    """
    Evaluate the classical Hamiltonian in stereographic coordinates.

    The coordinates may be independent complex numbers, so this continues the Hamiltonian
    analytically to the complexified sphere.

    Parameters
    ----------
    f : FieldSpec
        The field model.
    p : StereoPair
        Stereographic coordinates with `1 + zeta eta != 0`.
    t : float
        Time.

    Returns
    -------
    complex
        `(bx (zeta + eta) - i by (zeta - eta) + bz (1 - zeta eta)) / (2 (1 + zeta eta))`.
    """
    b = f.sample(t)
    try:
        ratios = spin_ratios_stereo(p.zeta, p.eta)
    except PoleError:
        raise PoleError(
            f"Hamiltonian undefined at zeta={p.zeta!r}, eta={p.eta!r}: 1 + zeta*eta = 0"
        ) from None
    return complex(ratios @ np.asarray(b, dtype=float))


def classical_rhs(f: FieldSpec, theta: float, phi: float, t: float) -> tuple[float, float]:
    """
    Classical equations of motion of a coherent-state label.

    Parameters
    ----------
    f : FieldSpec
        The field model.
    theta, phi : float
        Current label (`0 < theta < pi`).
    t : float
        Time.

    Returns
    -------
    dtheta : float
        `-bx sin(phi) + by cos(phi)`.
    dphi : float
        `bz - cot(theta) (bx cos(phi) + by sin(phi))`.

    Raises
    ------
    DegenerateLabelError
        If the label sits on a pole while a transverse field drives it away.
    """
    bx, by, bz = f.sample(t)
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    dtheta = -bx * sin_phi + by * cos_phi
    transverse = bx * cos_phi + by * sin_phi
    if transverse == 0:
        return float(dtheta), float(bz)
    sin_theta = np.sin(theta)
    if abs(sin_theta) < ANGLE_EPS:
        raise DegenerateLabelError(
            f"Classical label at theta={theta!r} is a pole, the azimuth is undefined"
        )
    return float(dtheta), float(bz - transverse * np.cos(theta) / sin_theta)


def _parse_numbers(text: str, spec: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise FieldSpecError(f"Invalid number in field specification {spec!r}") from None


def read_table(path: str | Path) -> TabulatedField:
    """
    Read a tabulated field from a CSV file with header `t,bx,by,bz`.

    Parameters
    ----------
    path : str | pathlib.Path
        The UTF-8 encoded CSV file.

    Returns
    -------
    TabulatedField
        The linearly interpolated field.
    """
    rows = _read_csv(path, TABLE_HEADER)
    try:
        data = np.array([[float(row[key]) for key in TABLE_HEADER] for row in rows])
    except (TypeError, ValueError):
        raise FieldSpecError(f"Invalid number in field table {str(path)!r}") from None
    if len(data) < 2:
        raise FieldSpecError(f"Field table {str(path)!r} needs at least two rows")
    return TabulatedField(data[:, 0], data[:, 1:], source=str(path))


def read_fourier(path: str | Path) -> FourierField:
    """
    Read Fourier coefficients from a CSV file with header `component,omega,cos_amp,sin_amp`.

    Parameters
    ----------
    path : str | pathlib.Path
        The UTF-8 encoded CSV file; `component` is one of `x`, `y`, `z`.

    Returns
    -------
    FourierField
        The field.
    """
    harmonics: dict[str, list[list[float]]] = {c: [] for c in _COMPONENTS}
    for row in _read_csv(path, FOURIER_HEADER):
        component = (row["component"] or "").strip()
        if component not in harmonics:
            raise FieldSpecError(
                f"Invalid component {component!r} in {str(path)!r}. "
                f"Possible options are: {_COMPONENTS}."
            )
        try:
            harmonics[component].append([float(row[key]) for key in FOURIER_HEADER[1:]])
        except (TypeError, ValueError):
            raise FieldSpecError(f"Invalid number in Fourier file {str(path)!r}") from None
    arrays = tuple(np.array(harmonics[c], dtype=float).reshape(-1, 3) for c in _COMPONENTS)
    return FourierField(arrays, source=str(path))  # type: ignore[arg-type]


def _read_csv(path: str | Path, header: tuple[str, ...]) -> list[dict[str, str]]:
    try:
        with open(path, newline="", encoding="utf-8") as csvfile:
            reader = csv.DictReader(csvfile)
            fieldnames = tuple(name.strip() for name in reader.fieldnames or ())
            if fieldnames != header:
                raise FieldSpecError(
                    f"Invalid header in {str(path)!r}: expected {','.join(header)!r}, "
                    f"got {','.join(fieldnames)!r}"
                )
            reader.fieldnames = list(fieldnames)
            return list(reader)
    except OSError as error:
        raise FieldSpecError(f"Cannot read field file {str(path)!r}: {error}") from None


def parse_field(spec: str) -> FieldSpec:
    """
    Create a field from its textual specification.

    Possible forms are `const:bx,by,bz`, `lz:omega,gamma[,t_offset]`, `table:<path>` and
    `fourier:<path>`, with decimal numbers.

    Parameters
    ----------
    spec : str
        The field specification.

    Returns
    -------
    FieldSpec
        The field model.

    Examples
    --------
    >>> parse_field("lz:1,0.5")
    LandauZenerField(omega=1.0, gamma=0.5, t_offset=0.0)
    """
    kind, sep, argument = spec.partition(":")
    kinds = ("const", "lz", "table", "fourier")
    if not sep or kind not in kinds:
        raise FieldSpecError(
            f"Invalid field specification: {spec!r}. Possible kinds are: {kinds}."
        )
    if kind == "table":
        return read_table(argument)
    if kind == "fourier":
        return read_fourier(argument)

    numbers = _parse_numbers(argument, spec)
    if not all(np.isfinite(numbers)):
        raise FieldSpecError(f"Non-finite number in field specification {spec!r}")
    if kind == "const":
        if len(numbers) != 3:
            raise FieldSpecError(f"Expected 'const:bx,by,bz', got {spec!r}")
        return ConstantField(*numbers)
    if len(numbers) not in (2, 3):
        raise FieldSpecError(f"Expected 'lz:omega,gamma[,t_offset]', got {spec!r}")
    return LandauZenerField(*numbers)

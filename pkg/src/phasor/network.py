"""Two-port scattering algebra, reference-plane conversions and noise formulas.

All container types are immutable after construction and every operation is a
pure function, so the module is safe to call from multiple threads without
synchronization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
T0_KELVIN = 290.0  # reference noise temperature (IEEE convention)

# Singular values of a passive S-matrix may exceed 1 by at most this much.
PASSIVITY_TOL = 1e-9

#: Flag value returned by :func:`input_reflection` where the reflection
#: denominator vanishes (lossless resonant corner cases).
INFINITE_REFLECTION = complex(math.inf, 0.0)


class SingularConversion(ValueError):
    """S-to-ABCD conversion is undefined where S21 = 0."""


class GridMismatch(ValueError):
    """Operands do not share the same frequency grid / reference impedance."""


class EmptyCascade(ValueError):
    """A cascade of zero networks has no meaning."""


class DegenerateSource(ValueError):
    """|gamma_source| >= 1 has no noise-figure interpretation."""


class NegativeNoiseFigure(ValueError):
    """Noise figures below 0 dB are unphysical for this conversion."""


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly increasing, positive frequency points in Hz."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float)).copy()
        if pts.size == 0:
            raise ValueError("frequency grid must be non-empty")
        if np.any(pts <= 0.0):
            raise ValueError("frequencies must be > 0 Hz")
        if pts.size > 1 and np.any(np.diff(pts) <= 0.0):
            raise ValueError("frequencies must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def single(cls, f_hz: float) -> "FrequencyGrid":
        return cls(np.array([float(f_hz)]))

    def __len__(self) -> int:
        return self.points.size

    def same_as(self, other: "FrequencyGrid") -> bool:
        return np.array_equal(self.points, other.points)


@dataclass(frozen=True, eq=False)
class TwoPortNetwork:
    """Frequency-indexed 2x2 scattering data against a real reference impedance.

    ``s`` has shape (n, 2, 2) with one matrix per grid point.  Networks flagged
    ``passive`` are checked at construction: no singular value of S may exceed
    1 + 1e-9 at any frequency.
    """

    grid: FrequencyGrid
    s: np.ndarray
    z_ref: float = 50.0
    passive: bool = False

    def __post_init__(self):
        s = np.asarray(self.s, dtype=complex).copy()
        if s.ndim == 2 and s.shape == (2, 2):
            s = s[np.newaxis, :, :]
        if s.ndim != 3 or s.shape[1:] != (2, 2) or s.shape[0] != len(self.grid):
            raise ValueError("s must have shape (n_freq, 2, 2)")
        if not self.z_ref > 0.0:
            raise ValueError("z_ref must be > 0")
        if self.passive:
            sv = np.linalg.svd(s, compute_uv=False)
            if np.any(sv > 1.0 + PASSIVITY_TOL):
                raise ValueError("network flagged passive has singular values > 1")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def s11(self) -> np.ndarray:
        return self.s[:, 0, 0]

    @property
    def s12(self) -> np.ndarray:
        return self.s[:, 0, 1]

    @property
    def s21(self) -> np.ndarray:
        return self.s[:, 1, 0]

    @property
    def s22(self) -> np.ndarray:
        return self.s[:, 1, 1]


@dataclass(frozen=True)
class Immittance:
    """A complex impedance (ohm) or admittance (S), tagged by kind."""

    value: complex
    kind: str = "impedance"

    def __post_init__(self):
        if self.kind not in ("impedance", "admittance"):
            raise ValueError("kind must be 'impedance' or 'admittance'")

    def to_impedance(self) -> complex:
        if self.kind == "impedance":
            return complex(self.value)
        return 1.0 / complex(self.value)

    def reflection(self, z_ref: float = 50.0) -> complex:
        z = self.to_impedance()
        return (z - z_ref) / (z + z_ref)


def as_impedance(z) -> complex:
    """Coerce a complex number or an Immittance to a complex impedance."""
    if isinstance(z, Immittance):
        return z.to_impedance()
    return complex(z)


@dataclass(frozen=True)
class NoiseSpec:
    """Four-parameter noise description: NFmin, Rn and the optimum source."""

    f_min_db: float
    r_n: float
    gamma_opt: complex = 0j

    def __post_init__(self):
        if self.f_min_db < 0.0:
            raise ValueError("f_min_db must be >= 0")
        if self.r_n < 0.0:
            raise ValueError("r_n must be >= 0")
        if abs(self.gamma_opt) >= 1.0:
            raise ValueError("|gamma_opt| must be < 1")


def gamma_from_z(z: complex, z_ref: float = 50.0) -> complex:
    """Reflection coefficient of an impedance against a real reference."""
    return (z - z_ref) / (z + z_ref)


def z_from_gamma(gamma: complex, z_ref: float = 50.0) -> complex:
    if abs(1.0 - gamma) < 1e-300:
        return complex(math.inf, 0.0)
    return z_ref * (1.0 + gamma) / (1.0 - gamma)


def s_to_abcd(net: TwoPortNetwork) -> np.ndarray:
    """Convert S-parameters to per-frequency ABCD matrices.

    Raises SingularConversion when S21 = 0 at any grid point.
    """
    s11, s12, s21, s22 = net.s11, net.s12, net.s21, net.s22
    zero = np.abs(s21) == 0.0
    if np.any(zero):
        idx = int(np.argmax(zero))
        raise SingularConversion(
            f"S21 = 0 at {net.grid.points[idx]:.6g} Hz; ABCD undefined"
        )
    z0 = net.z_ref
    den = 2.0 * s21
    abcd = np.empty_like(net.s)
    abcd[:, 0, 0] = ((1 + s11) * (1 - s22) + s12 * s21) / den
    abcd[:, 0, 1] = z0 * ((1 + s11) * (1 + s22) - s12 * s21) / den
    abcd[:, 1, 0] = ((1 - s11) * (1 - s22) - s12 * s21) / (z0 * den)
    abcd[:, 1, 1] = ((1 - s11) * (1 + s22) + s12 * s21) / den
    return abcd


def abcd_to_s(
    abcd: np.ndarray,
    grid: FrequencyGrid,
    z_ref: float = 50.0,
    passive: bool = False,
) -> TwoPortNetwork:
    abcd = np.asarray(abcd, dtype=complex)
    if abcd.ndim == 2:
        abcd = abcd[np.newaxis, :, :]
    a, b = abcd[:, 0, 0], abcd[:, 0, 1]
    c, d = abcd[:, 1, 0], abcd[:, 1, 1]
    z0 = z_ref
    den = a + b / z0 + c * z0 + d
    s = np.empty_like(abcd)
    s[:, 0, 0] = (a + b / z0 - c * z0 - d) / den
    s[:, 0, 1] = 2.0 * (a * d - b * c) / den
    s[:, 1, 0] = 2.0 / den
    s[:, 1, 1] = (-a + b / z0 - c * z0 + d) / den
    return TwoPortNetwork(grid, s, z_ref, passive=passive)


def s_to_z(net: TwoPortNetwork) -> np.ndarray:
    """Convert S-parameters to per-frequency impedance matrices."""
    s11, s12, s21, s22 = net.s11, net.s12, net.s21, net.s22
    z0 = net.z_ref
    den = (1 - s11) * (1 - s22) - s12 * s21
    z = np.empty_like(net.s)
    z[:, 0, 0] = z0 * ((1 + s11) * (1 - s22) + s12 * s21) / den
    z[:, 0, 1] = z0 * 2.0 * s12 / den
    z[:, 1, 0] = z0 * 2.0 * s21 / den
    z[:, 1, 1] = z0 * ((1 - s11) * (1 + s22) + s12 * s21) / den
    return z


def z_to_s(
    z: np.ndarray,
    grid: FrequencyGrid,
    z_ref: float = 50.0,
    passive: bool = False,
) -> TwoPortNetwork:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 2:
        z = z[np.newaxis, :, :]
    z11, z12 = z[:, 0, 0], z[:, 0, 1]
    z21, z22 = z[:, 1, 0], z[:, 1, 1]
    z0 = z_ref
    den = (z11 + z0) * (z22 + z0) - z12 * z21
    s = np.empty_like(z)
    s[:, 0, 0] = ((z11 - z0) * (z22 + z0) - z12 * z21) / den
    s[:, 0, 1] = 2.0 * z12 * z0 / den
    s[:, 1, 0] = 2.0 * z21 * z0 / den
    s[:, 1, 1] = ((z11 + z0) * (z22 - z0) - z12 * z21) / den
    return TwoPortNetwork(grid, s, z_ref, passive=passive)


def lossless_through(grid: FrequencyGrid, z_ref: float = 50.0) -> TwoPortNetwork:
    s = np.zeros((len(grid), 2, 2), dtype=complex)
    s[:, 0, 1] = 1.0
    s[:, 1, 0] = 1.0
    return TwoPortNetwork(grid, s, z_ref, passive=True)


def series_impedance(z, grid: FrequencyGrid, z_ref: float = 50.0) -> TwoPortNetwork:
    """Two-port of a single series impedance (scalar or per-frequency array)."""
    z = np.broadcast_to(np.asarray(z, dtype=complex), (len(grid),))
    abcd = np.zeros((len(grid), 2, 2), dtype=complex)
    abcd[:, 0, 0] = 1.0
    abcd[:, 0, 1] = z
    abcd[:, 1, 1] = 1.0
    return abcd_to_s(abcd, grid, z_ref)


def shunt_admittance(y, grid: FrequencyGrid, z_ref: float = 50.0) -> TwoPortNetwork:
    """Two-port of a single shunt admittance (scalar or per-frequency array)."""
    y = np.broadcast_to(np.asarray(y, dtype=complex), (len(grid),))
    abcd = np.zeros((len(grid), 2, 2), dtype=complex)
    abcd[:, 0, 0] = 1.0
    abcd[:, 1, 0] = y
    abcd[:, 1, 1] = 1.0
    return abcd_to_s(abcd, grid, z_ref)


def cascade(nets: list[TwoPortNetwork]) -> TwoPortNetwork:
    """Compose two-ports in order (port 2 of each into port 1 of the next).

    All operands must share an identical frequency grid and reference
    impedance.  The result is flagged passive only if every operand is.
    """
    if not nets:
        raise EmptyCascade("cascade of zero networks")
    first = nets[0]
    for net in nets[1:]:
        if not first.grid.same_as(net.grid):
            raise GridMismatch("cascade operands use different frequency grids")
        if net.z_ref != first.z_ref:
            raise GridMismatch("cascade operands use different reference impedances")
    total = s_to_abcd(first)
    for net in nets[1:]:
        total = total @ s_to_abcd(net)
    return abcd_to_s(
        total, first.grid, first.z_ref, passive=all(n.passive for n in nets)
    )


def input_reflection(net: TwoPortNetwork, gamma_load: complex) -> np.ndarray:
    """Reflection looking into port 1 with port 2 terminated in gamma_load.

    Where the denominator 1 - S22*gamma_load vanishes the flag value
    INFINITE_REFLECTION is returned instead of raising.
    """
    if abs(gamma_load) > 1.0 + 1e-12:
        raise ValueError("|gamma_load| must be <= 1")
    den = 1.0 - net.s22 * gamma_load
    out = np.full(len(net.grid), INFINITE_REFLECTION, dtype=complex)
    ok = np.abs(den) > 0.0
    out[ok] = net.s11[ok] + net.s12[ok] * net.s21[ok] * gamma_load / den[ok]
    return out


def transducer_gain(
    net: TwoPortNetwork, gamma_src: complex = 0j, gamma_load: complex = 0j
) -> np.ndarray:
    """Transducer power gain in dB per frequency for given terminations."""
    if abs(gamma_src) >= 1.0 or abs(gamma_load) >= 1.0:
        raise ValueError("source and load reflection magnitudes must be < 1")
    s11, s12, s21, s22 = net.s11, net.s12, net.s21, net.s22
    num = (
        (1.0 - abs(gamma_src) ** 2)
        * np.abs(s21) ** 2
        * (1.0 - abs(gamma_load) ** 2)
    )
    den = (
        np.abs(
            (1.0 - s11 * gamma_src) * (1.0 - s22 * gamma_load)
            - s12 * s21 * gamma_src * gamma_load
        )
        ** 2
    )
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(num / den)


def noise_figure_at_source(
    spec: NoiseSpec, gamma_src: complex, z_ref: float = 50.0
) -> float:
    """Noise figure (dB) of a stage for a given source reflection coefficient.

    Four-parameter formula:
    F = Fmin + 4 (Rn/z_ref) |Gs - Gopt|^2 / ((1 - |Gs|^2) |1 + Gopt|^2)
    """
    if abs(gamma_src) >= 1.0:
        raise DegenerateSource("|gamma_src| must be < 1")
    f_min = 10.0 ** (spec.f_min_db / 10.0)
    excess = (
        4.0
        * (spec.r_n / z_ref)
        * abs(gamma_src - spec.gamma_opt) ** 2
        / ((1.0 - abs(gamma_src) ** 2) * abs(1.0 + spec.gamma_opt) ** 2)
    )
    return 10.0 * math.log10(f_min + excess)


def noise_temperature(f_db: float) -> float:
    """Equivalent noise temperature in kelvin: T = 290 (10^(NF/10) - 1)."""
    if f_db < 0.0:
        raise NegativeNoiseFigure(f"noise figure {f_db} dB is < 0")
    return T0_KELVIN * (10.0 ** (f_db / 10.0) - 1.0)

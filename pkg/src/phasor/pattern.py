"""Planar array factor, element pattern, directivity and side-lobe analysis.

Angles facing the user are polar angle theta measured from the array normal
(boresight theta = 0) and azimuth phi in the array plane.  The single-element
model follows the 3GPP TR 38.901 parabolic-in-dB pattern, whose own convention
places boresight at (theta = 90 deg, phi = 0); the mapping between the two
frames is internal to this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import SPEED_OF_LIGHT

PATTERN_FLOOR_DB = -100.0


class DimensionMismatch(ValueError):
    """Weight matrix does not match the array geometry."""


class QuadratureFailure(ValueError):
    """The pattern integral underflowed or is not finite."""


class NoSidelobes(ValueError):
    """The cut is monotone away from the main lobe."""


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform rectangular lattice in the z = 0 plane, boresight along +z."""

    nx: int
    ny: int
    pitch_m: float

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("element counts must be >= 1")
        if not self.pitch_m > 0.0:
            raise ValueError("pitch must be > 0")

    def element_positions(self) -> tuple[np.ndarray, np.ndarray]:
        x = (np.arange(self.nx) - (self.nx - 1) / 2.0) * self.pitch_m
        y = (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.pitch_m
        return x, y


@dataclass(frozen=True)
class ElementPattern:
    """Single-element gain model (3GPP TR 38.901 defaults).

    Peak gain 8 dBi, 65 deg half-power beamwidths, 30 dB side/back floors.
    Set ``isotropic`` for a 0 dBi element everywhere.
    """

    g_max_dbi: float = 8.0
    theta_3db_deg: float = 65.0
    phi_3db_deg: float = 65.0
    sla_v_db: float = 30.0
    a_max_db: float = 30.0
    isotropic: bool = False

    def __post_init__(self):
        if not (0.0 < self.theta_3db_deg < 180.0 and 0.0 < self.phi_3db_deg < 180.0):
            raise ValueError("beamwidths must lie in (0, 180) degrees")
        if self.sla_v_db < 0.0 or self.a_max_db < 0.0:
            raise ValueError("attenuations must be >= 0")

    @classmethod
    def isotropic_element(cls) -> "ElementPattern":
        return cls(g_max_dbi=0.0, isotropic=True)


@dataclass(frozen=True, eq=False)
class RadiationPattern:
    """Sampled gain map in dBi over theta in [0, 180], phi in [-180, 180]."""

    theta_deg: np.ndarray
    phi_deg: np.ndarray
    gain_dbi: np.ndarray
    frequency_hz: float

    def __post_init__(self):
        g = np.asarray(self.gain_dbi, dtype=float)
        if not np.all(np.isfinite(g)):
            raise ValueError("pattern gains must be finite (floor applied upstream)")
        object.__setattr__(self, "theta_deg", np.asarray(self.theta_deg, dtype=float))
        object.__setattr__(self, "phi_deg", np.asarray(self.phi_deg, dtype=float))
        object.__setattr__(self, "gain_dbi", g)


def _unit_vectors(theta_deg, phi_deg):
    th = np.radians(np.asarray(theta_deg, dtype=float))
    ph = np.radians(np.asarray(phi_deg, dtype=float))
    st = np.sin(th)
    return st * np.cos(ph), st * np.sin(ph), np.cos(th)


def array_factor(
    geom: ArrayGeometry,
    weights: np.ndarray,
    f_hz: float,
    theta_deg,
    phi_deg,
    steer: tuple[float, float] = (0.0, 0.0),
) -> np.ndarray:
    """Complex array factor at the given angles with progressive-phase steering.

    AF = sum_ij w[i,j] exp(j k r_ij . (u(theta,phi) - u(theta0,phi0))).
    Broadcasts over equal-shaped theta/phi arrays; scalar in, scalar out.
    """
    w = np.asarray(weights, dtype=complex)
    if w.shape != (geom.nx, geom.ny):
        raise DimensionMismatch(
            f"weights shape {w.shape} does not match {geom.nx}x{geom.ny} geometry"
        )
    if not f_hz > 0.0:
        raise ValueError("frequency must be > 0")
    k = 2.0 * math.pi * f_hz / SPEED_OF_LIGHT
    ux, uy, _ = _unit_vectors(theta_deg, phi_deg)
    sx, sy, _ = _unit_vectors(*steer)
    dux = np.atleast_1d(ux - sx)
    duy = np.atleast_1d(uy - sy)
    x, y = geom.element_positions()
    ex = np.exp(1j * k * dux[..., np.newaxis] * x)
    ey = np.exp(1j * k * duy[..., np.newaxis] * y)
    af = np.einsum("...i,ij,...j->...", ex, w, ey)
    if np.isscalar(theta_deg) and np.isscalar(phi_deg):
        return complex(af.reshape(())[()])
    return af


def element_gain_dbi(pat: ElementPattern, theta_deg, phi_deg) -> np.ndarray:
    """Element gain in dBi in the element's own frame (boresight 90, 0)."""
    th = np.asarray(theta_deg, dtype=float)
    ph = np.asarray(phi_deg, dtype=float)
    if pat.isotropic:
        return np.zeros(np.broadcast(th, ph).shape)
    a_v = -np.minimum(12.0 * ((th - 90.0) / pat.theta_3db_deg) ** 2, pat.sla_v_db)
    a_h = -np.minimum(12.0 * (ph / pat.phi_3db_deg) ** 2, pat.a_max_db)
    return pat.g_max_dbi - np.minimum(-(a_v + a_h), pat.a_max_db)


def _element_gain_array_frame(pat: ElementPattern, theta_deg, phi_deg) -> np.ndarray:
    # Rotate the element so its boresight (90, 0) lies along the array normal.
    th = np.radians(np.asarray(theta_deg, dtype=float))
    ph = np.radians(np.asarray(phi_deg, dtype=float))
    st = np.sin(th)
    cos_te = np.clip(st * np.sin(ph), -1.0, 1.0)
    theta_e = np.degrees(np.arccos(cos_te))
    phi_e = np.degrees(np.arctan2(st * np.cos(ph), np.cos(th)))
    return element_gain_dbi(pat, theta_e, phi_e)


def composite_intensity(
    geom: ArrayGeometry,
    weights: np.ndarray,
    element: ElementPattern,
    f_hz: float,
    theta_deg,
    phi_deg,
    steer: tuple[float, float] = (0.0, 0.0),
) -> np.ndarray:
    """Unnormalized radiation intensity |AF|^2 * element gain (linear)."""
    af = array_factor(geom, weights, f_hz, theta_deg, phi_deg, steer)
    g_el = _element_gain_array_frame(element, theta_deg, phi_deg)
    return np.abs(af) ** 2 * 10.0 ** (g_el / 10.0)


def directivity(
    intensity_fn,
    frequency_hz: float,
    theta_step_deg: float = 0.25,
    phi_step_deg: float = 0.25,
) -> tuple[float, RadiationPattern]:
    """Peak directivity in dBi via midpoint-rule integration over the sphere.

    ``intensity_fn(theta_deg, phi_deg)`` must return linear relative intensity
    for broadcastable angle arrays.  Returns the directivity and the full
    normalized pattern map in dBi (floored at -100 dBi).
    """
    n_th = max(int(round(180.0 / theta_step_deg)), 2)
    n_ph = max(int(round(360.0 / phi_step_deg)), 2)
    d_th = 180.0 / n_th
    d_ph = 360.0 / n_ph
    theta = (np.arange(n_th) + 0.5) * d_th
    phi = -180.0 + (np.arange(n_ph) + 0.5) * d_ph

    u = np.empty((n_th, n_ph))
    for i, th in enumerate(theta):  # row-wise to bound memory on fine grids
        u[i, :] = intensity_fn(np.full(n_ph, th), phi)
    sin_th = np.sin(np.radians(theta))
    total = float(np.sum(u * sin_th[:, np.newaxis]) * math.radians(d_th) * math.radians(d_ph))
    u_max = float(u.max())
    if not math.isfinite(total) or total <= 0.0 or u_max <= 0.0:
        raise QuadratureFailure("pattern integral underflowed")
    d_lin = 4.0 * math.pi * u_max / total
    with np.errstate(divide="ignore"):
        gain_dbi = 10.0 * np.log10(u * (4.0 * math.pi / total))
    gain_dbi = np.maximum(gain_dbi, PATTERN_FLOOR_DB)
    pat = RadiationPattern(theta, phi, gain_dbi, frequency_hz)
    return 10.0 * math.log10(d_lin), pat


def array_directivity(
    geom: ArrayGeometry,
    weights: np.ndarray,
    element: ElementPattern,
    f_hz: float,
    steer: tuple[float, float] = (0.0, 0.0),
    theta_step_deg: float = 0.25,
    phi_step_deg: float = 0.25,
) -> tuple[float, RadiationPattern]:
    """Directivity of a weighted array with the given element pattern."""

    def intensity(th, ph):
        return composite_intensity(geom, weights, element, f_hz, th, ph, steer)

    return directivity(intensity, f_hz, theta_step_deg, phi_step_deg)


def directivity_convergence_db(
    intensity_fn, frequency_hz: float, theta_step_deg: float = 0.25
) -> float:
    """Change in directivity on halving the quadrature step (convergence check)."""
    d1, _ = directivity(intensity_fn, frequency_hz, theta_step_deg, theta_step_deg)
    d2, _ = directivity(
        intensity_fn, frequency_hz, theta_step_deg / 2.0, theta_step_deg / 2.0
    )
    return abs(d1 - d2)


def principal_cut(
    geom: ArrayGeometry,
    weights: np.ndarray,
    element: ElementPattern,
    f_hz: float,
    phi_deg: float = 0.0,
    steer: tuple[float, float] = (0.0, 0.0),
    theta_span_deg: float = 90.0,
    step_deg: float = 0.05,
) -> tuple[np.ndarray, np.ndarray]:
    """Pattern cut through boresight, normalized to the cut maximum in dB.

    The cut runs over signed theta in [-span, span]; negative angles map to
    azimuth phi + 180 deg.
    """
    theta = np.arange(-theta_span_deg, theta_span_deg + step_deg / 2, step_deg)
    th_abs = np.abs(theta)
    ph = np.where(theta < 0.0, phi_deg + 180.0, phi_deg)
    u = composite_intensity(geom, weights, element, f_hz, th_abs, ph, steer)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(u / u.max())
    return theta, np.maximum(db, PATTERN_FLOOR_DB)


@dataclass(frozen=True)
class SidelobeTable:
    """Main-lobe peak plus side-lobe levels relative to it, sorted descending."""

    main_angle_deg: float
    main_level_db: float
    lobes: tuple[tuple[float, float], ...]  # (level_rel_db, angle_deg)

    @property
    def worst_db(self) -> float:
        return self.lobes[0][0]


def _refine_peak(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    # 3-point parabolic refinement; assumes locally uniform spacing.
    if i <= 0 or i >= len(y) - 1:
        return float(x[i]), float(y[i])
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom >= 0.0:
        return float(x[i]), float(y[i])
    delta = 0.5 * (y[i - 1] - y[i + 1]) / denom
    step = 0.5 * (x[i + 1] - x[i - 1])
    return float(x[i] + delta * step), float(y[i] - 0.25 * (y[i - 1] - y[i + 1]) * delta)


def sidelobe_levels(angles_deg: np.ndarray, level_db: np.ndarray) -> SidelobeTable:
    """Locate the main lobe and all side lobes of a 1-D cut.

    Peaks are strict local maxima with parabolic sub-sample refinement; the
    main lobe is the global maximum and side-lobe levels are reported relative
    to it.  Raises NoSidelobes when no secondary peak exists.
    """
    x = np.asarray(angles_deg, dtype=float)
    y = np.asarray(level_db, dtype=float)
    if y.size < 5:
        raise ValueError("cut must have at least 5 samples")
    i_main = int(np.argmax(y))
    main_angle, main_level = _refine_peak(x, y, i_main)
    lobes = []
    for i in range(1, y.size - 1):
        if i == i_main:
            continue
        if y[i] > y[i - 1] and y[i] > y[i + 1]:
            ang, lev = _refine_peak(x, y, i)
            lobes.append((lev - main_level, ang))
    if not lobes:
        raise NoSidelobes("cut is monotone away from the main lobe")
    lobes.sort(key=lambda t: (-t[0], abs(t[1])))
    return SidelobeTable(main_angle, main_level, tuple(lobes))

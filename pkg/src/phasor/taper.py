"""Taylor line-taper synthesis, planar tapers and gain-state quantization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Three near-constant side lobes on an 8-element lattice; with the separable
# planar taper this yields the 7.5 dB per-element gain-control range.
DEFAULT_N_BAR = 3


class InvalidSpec(ValueError):
    """Taper specification outside the synthesis validity bounds."""


class InsufficientSpan(ValueError):
    """Gain-state set too narrow to cover the taper dynamic range."""


@dataclass(frozen=True)
class TaperSpec:
    """Design target: element count, side-lobe suppression, near-in lobe count."""

    n_elements: int
    sll_db: float
    n_bar: int = DEFAULT_N_BAR

    def __post_init__(self):
        if self.n_elements < 2:
            raise InvalidSpec("need at least 2 elements")
        if not self.sll_db > 0.0:
            raise InvalidSpec("sll_db must be a positive suppression in dB")
        if self.n_bar < 1:
            raise InvalidSpec("n_bar must be >= 1")
        if self.n_bar > self.n_elements / 2:
            raise InvalidSpec("n_bar must not exceed n_elements/2")


@dataclass(frozen=True, eq=False)
class TaperWeights:
    """Real excitation amplitudes normalized so the maximum is 1."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=float)).copy()
        if amps.size == 0:
            raise ValueError("weights must be non-empty")
        if np.any(amps <= 0.0) or np.any(amps > 1.0 + 1e-12):
            raise ValueError("amplitudes must lie in (0, 1]")
        if abs(amps.max() - 1.0) > 1e-9:
            raise ValueError("weights must be normalized to max = 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class GainStateSet:
    """Strictly increasing discrete gain states in dB."""

    states: np.ndarray

    def __post_init__(self):
        st = np.atleast_1d(np.asarray(self.states, dtype=float)).copy()
        if st.size == 0:
            raise ValueError("state set must be non-empty")
        if st.size > 1 and np.any(np.diff(st) <= 0.0):
            raise ValueError("states must be strictly increasing")
        st.setflags(write=False)
        object.__setattr__(self, "states", st)

    @classmethod
    def equispaced(cls, n: int, span_db: float, top_db: float = 0.0) -> "GainStateSet":
        return cls(np.linspace(top_db - span_db, top_db, n))

    @property
    def span_db(self) -> float:
        return float(self.states[-1] - self.states[0])


@dataclass(frozen=True, eq=False)
class QuantizedTaper:
    """Per-element state assignment plus the residual error of each element."""

    state_indices: np.ndarray
    residuals_db: np.ndarray

    @property
    def max_residual_db(self) -> float:
        return float(np.max(np.abs(self.residuals_db)))


def _taylor_coefficients(sll_db: float, n_bar: int) -> np.ndarray:
    # Classical Taylor n-bar line-source coefficients F(1..n_bar-1).
    a = math.acosh(10.0 ** (sll_db / 20.0)) / math.pi
    sigma2 = n_bar**2 / (a**2 + (n_bar - 0.5) ** 2)
    coeffs = np.zeros(max(n_bar - 1, 0))
    for m in range(1, n_bar):
        num = 1.0
        for n in range(1, n_bar):
            num *= 1.0 - m**2 / (sigma2 * (a**2 + (n - 0.5) ** 2))
        den = 1.0
        for n in range(1, n_bar):
            if n != m:
                den *= 1.0 - (m / n) ** 2
        coeffs[m - 1] = ((-1) ** (m + 1) / 2.0) * num / den
    return coeffs


def taylor_line_taper(spec: TaperSpec) -> TaperWeights:
    """Sample the continuous Taylor n-bar aperture at the element centers.

    The aperture of an N-element lattice with pitch d spans N*d; element i sits
    at (i - (N-1)/2)*d, i.e. at normalized position (i - (N-1)/2)/N.  Weights
    are normalized to a maximum of 1.
    """
    n = spec.n_elements
    coeffs = _taylor_coefficients(spec.sll_db, spec.n_bar)
    p = (np.arange(n) - (n - 1) / 2.0) / n
    w = np.ones(n)
    for m, f_m in enumerate(coeffs, start=1):
        w += 2.0 * f_m * np.cos(2.0 * math.pi * m * p)
    if np.any(w <= 0.0):
        raise InvalidSpec("synthesis produced non-positive weights; lower sll_db or n_bar")
    return TaperWeights(w / w.max())


def planar_taper(wx: TaperWeights, wy: TaperWeights) -> np.ndarray:
    """Separable planar taper: w[i][j] = wx[i] * wy[j] (max entry 1)."""
    return np.outer(wx.amplitudes, wy.amplitudes)


def dynamic_range_db(w: TaperWeights) -> float:
    """20*log10(max/min) of the weight amplitudes."""
    amps = w.amplitudes
    return float(20.0 * math.log10(amps.max() / amps.min()))


def quantize_weights(
    w: TaperWeights, states: GainStateSet, tolerance_db: float = 0.5
) -> QuantizedTaper:
    """Map each element onto the nearest discrete gain state.

    The largest weight is anchored at the highest state; every other element
    targets top_state + 20*log10(w_i / w_max) and is assigned the nearest
    state.  Raises InsufficientSpan when the state set cannot cover the taper
    range within ``tolerance_db``.
    """
    span = states.span_db
    need = dynamic_range_db(w)
    if span < need - tolerance_db:
        raise InsufficientSpan(
            f"state span {span:.2f} dB cannot cover taper range {need:.2f} dB"
        )
    amps = w.amplitudes
    target = states.states[-1] + 20.0 * np.log10(amps / amps.max())
    idx = np.abs(states.states[np.newaxis, :] - target[:, np.newaxis]).argmin(axis=1)
    residual = states.states[idx] - target
    return QuantizedTaper(idx, residual)

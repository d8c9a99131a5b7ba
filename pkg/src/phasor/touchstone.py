"""Touchstone v1 reading/writing, measured-metric extraction and two-tone fits.

Only v1.x documents are parsed (.s1p/.s2p, option line ``# <unit> <param>
<format> R <res>``, '!' comments, 2-port row order S11 S21 S12 S22).  v2
keyword lines are rejected by name.  Noise data accompanies S-parameters as a
separate two-column CSV because v1 has no noise block.
"""

from __future__ import annotations

import cmath
import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

_UNIT_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_PARAMETERS = ("S", "Y", "Z")
_FORMATS = ("MA", "DB", "RI")

HALF_POWER_DB = 10.0 * math.log10(2.0)  # 3.0103 dB below the peak of 20log10|S21|

#: Fundamental-slope window (dB/dB around 1) defining the small-signal region.
SMALL_SIGNAL_SLOPE_TOL = 0.1


class MalformedOptionLine(ValueError):
    pass


class NonMonotonicFrequency(ValueError):
    pass


class RowArityError(ValueError):
    pass


class UnsupportedVersion(ValueError):
    pass


class BandEdgePeak(ValueError):
    """Gain peak at the first/last sample, bandwidth only one-sided."""


class NoLinearRegion(ValueError):
    """Fewer than three small-signal points in a two-tone sweep."""


@dataclass(frozen=True, eq=False)
class TouchstoneDataset:
    """Parsed network-parameter file content.

    ``freqs_raw`` keeps the file's own unit; ``values`` holds the complex
    matrices with shape (n, ports, ports).  The original option line and '!'
    comment lines are preserved verbatim for round-tripping.
    """

    freq_unit: str
    parameter: str
    format: str
    resistance: float
    n_ports: int
    freqs_raw: np.ndarray
    values: np.ndarray
    option_line: str
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        f = np.asarray(self.freqs_raw, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if f.ndim != 1 or f.size == 0:
            raise ValueError("need at least one frequency row")
        if f.size > 1 and np.any(np.diff(f) <= 0.0):
            raise NonMonotonicFrequency("frequencies must be strictly increasing")
        if v.shape != (f.size, self.n_ports, self.n_ports):
            raise ValueError("values shape does not match frequency count / ports")
        if not self.resistance > 0.0:
            raise ValueError("reference resistance must be > 0")
        object.__setattr__(self, "freqs_raw", f)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "comments", tuple(self.comments))

    @property
    def freqs_hz(self) -> np.ndarray:
        return self.freqs_raw * _UNIT_SCALE[self.freq_unit]


def _parse_option_line(line: str, line_no: int):
    unit, parameter, fmt, resistance = "GHZ", "S", "MA", 50.0
    tokens = line[1:].split()
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in _UNIT_SCALE:
            unit = tok
        elif tok in _PARAMETERS:
            parameter = tok
        elif tok in _FORMATS:
            fmt = tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise MalformedOptionLine(f"line {line_no}: R without a resistance")
            try:
                resistance = float(tokens[i + 1])
            except ValueError:
                raise MalformedOptionLine(
                    f"line {line_no}: bad resistance token '{tokens[i + 1]}'"
                ) from None
            i += 1
        else:
            raise MalformedOptionLine(f"line {line_no}: unknown token '{tokens[i]}'")
        i += 1
    return unit, parameter, fmt, resistance


def _pair_to_complex(a: float, b: float, fmt: str) -> complex:
    if fmt == "RI":
        return complex(a, b)
    if fmt == "MA":
        return a * cmath.exp(1j * math.radians(b))
    return 10.0 ** (a / 20.0) * cmath.exp(1j * math.radians(b))


def parse_touchstone(text: str, n_ports: int | None = None) -> TouchstoneDataset:
    """Parse a Touchstone v1 document.

    The port count is inferred from the arity of the first data row (3 tokens
    for one port, 9 for two) unless given.  Option-line fields left out fall
    back to the v1 defaults (GHz, S, MA, R 50).
    """
    unit, parameter, fmt, resistance = "GHZ", "S", "MA", 50.0
    option_line = "#"
    comments: list[str] = []
    freqs: list[float] = []
    rows: list[list[complex]] = []
    saw_option = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("!"):
            comments.append(raw.rstrip("\n"))
            continue
        if line.startswith("["):
            keyword = line.split("]")[0] + "]"
            raise UnsupportedVersion(
                f"line {line_no}: keyword '{keyword}' is Touchstone v2; only v1 is supported"
            )
        if line.startswith("#"):
            if saw_option:
                raise MalformedOptionLine(f"line {line_no}: duplicate option line")
            unit, parameter, fmt, resistance = _parse_option_line(line, line_no)
            option_line = raw.rstrip("\n")
            saw_option = True
            continue
        data_part = line.split("!", 1)[0].strip()
        if "!" in line:
            comments.append("!" + line.split("!", 1)[1])
        tokens = data_part.split()
        numbers = []
        for tok in tokens:
            try:
                numbers.append(float(tok))
            except ValueError:
                raise RowArityError(
                    f"line {line_no}: non-numeric token '{tok}'"
                ) from None
        if n_ports is None:
            if len(numbers) == 3:
                n_ports = 1
            elif len(numbers) == 9:
                n_ports = 2
            else:
                raise RowArityError(
                    f"line {line_no}: expected 3 or 9 columns, got {len(numbers)}"
                )
        expected = 1 + 2 * n_ports * n_ports
        if len(numbers) != expected:
            raise RowArityError(
                f"line {line_no}: expected {expected} columns for "
                f"{n_ports}-port data, got {len(numbers)}"
            )
        if freqs and numbers[0] <= freqs[-1]:
            raise NonMonotonicFrequency(
                f"line {line_no}: frequency {numbers[0]:g} not above previous "
                f"{freqs[-1]:g} (noise blocks are not supported)"
            )
        freqs.append(numbers[0])
        pairs = [
            _pair_to_complex(numbers[k], numbers[k + 1], fmt)
            for k in range(1, expected, 2)
        ]
        rows.append(pairs)

    if not rows:
        raise RowArityError("no data rows found")
    values = np.empty((len(rows), n_ports, n_ports), dtype=complex)
    for i, pairs in enumerate(rows):
        if n_ports == 1:
            values[i, 0, 0] = pairs[0]
        else:  # v1 two-port order: S11 S21 S12 S22
            values[i, 0, 0] = pairs[0]
            values[i, 1, 0] = pairs[1]
            values[i, 0, 1] = pairs[2]
            values[i, 1, 1] = pairs[3]
    return TouchstoneDataset(
        freq_unit=unit,
        parameter=parameter,
        format=fmt,
        resistance=resistance,
        n_ports=n_ports,
        freqs_raw=np.array(freqs),
        values=values,
        option_line=option_line,
        comments=tuple(comments),
    )


def _complex_to_pair(v: complex, fmt: str) -> tuple[float, float]:
    if fmt == "RI":
        return v.real, v.imag
    mag = abs(v)
    ang = math.degrees(cmath.phase(v)) if mag > 0.0 else 0.0
    if fmt == "MA":
        return mag, ang
    return 20.0 * math.log10(max(mag, 1e-300)), ang


def write_touchstone(ds: TouchstoneDataset) -> str:
    """Serialize a dataset in its own format.

    Magnitude-like fields carry 9 significant digits; phase-in-degrees fields
    carry 10, which angles near +/-180 deg need for the 1e-8 relative
    round-trip guarantee.  The option line is emitted verbatim, so
    parse -> write -> parse is the identity on the option line.
    """
    angle_second = ds.format in ("MA", "DB")
    lines = list(ds.comments)
    lines.append(ds.option_line)
    for i, f in enumerate(ds.freqs_raw):
        fields = [f"{f:.9g}"]
        if ds.n_ports == 1:
            order = [(0, 0)]
        else:
            order = [(0, 0), (1, 0), (0, 1), (1, 1)]
        for r, c in order:
            a, b = _complex_to_pair(ds.values[i, r, c], ds.format)
            fields.append(f"{a:.9g}")
            fields.append(f"{b:.10g}" if angle_second else f"{b:.9g}")
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MeasuredMetrics:
    """Figures of merit extracted from a measured 2-port dataset."""

    peak_gain_db: float
    f_c_hz: float
    bw3db_hz: float
    min_nf_db: float | None = None
    s12_max_db: float | None = None
    band_edge_peak: bool = False


def _parabolic_vertex(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    if a >= 0.0:
        return float(x1), float(y1)
    xv = -b / (2.0 * a)
    c = y1 - a * x1**2 - b * x1
    return float(xv), float(a * xv**2 + b * xv + c)


def _cross_left(f, g, i_peak, thr):
    for i in range(i_peak, 0, -1):
        if g[i - 1] < thr <= g[i]:
            frac = (thr - g[i - 1]) / (g[i] - g[i - 1])
            return f[i - 1] + frac * (f[i] - f[i - 1])
    return None


def _cross_right(f, g, i_peak, thr):
    for i in range(i_peak, len(g) - 1):
        if g[i + 1] < thr <= g[i]:
            frac = (g[i] - thr) / (g[i] - g[i + 1])
            return f[i] + frac * (f[i + 1] - f[i])
    return None


def extract_metrics(ds: TouchstoneDataset, nf_table=None) -> MeasuredMetrics:
    """Peak gain, center frequency, 3 dB bandwidth and band-minimum NF/S12.

    The peak of 20log10|S21| is refined with a 3-point parabola; the bandwidth
    spans the half-power (peak - 3.0103 dB) crossings found by linear
    interpolation in dB.  A peak on the first or last sample flags the result
    as band-edge and reports the one-sided width.  ``nf_table`` is an optional
    (freq_hz, nf_db) two-column table; off-grid points are interpolated with a
    warning.
    """
    if ds.n_ports != 2:
        raise ValueError("metric extraction needs a 2-port dataset")
    if ds.parameter != "S":
        raise ValueError("metric extraction needs S-parameter data")
    f = ds.freqs_hz
    with np.errstate(divide="ignore"):
        g = 20.0 * np.log10(np.abs(ds.values[:, 1, 0]))
        s12_max = float(np.max(20.0 * np.log10(np.abs(ds.values[:, 0, 1]) + 1e-300)))
    i_peak = int(np.argmax(g))
    band_edge = i_peak in (0, len(g) - 1)
    if band_edge:
        f_c, peak = float(f[i_peak]), float(g[i_peak])
    else:
        f_c, peak = _parabolic_vertex(f, g, i_peak)
    thr = peak - HALF_POWER_DB
    left = _cross_left(f, g, i_peak, thr)
    right = _cross_right(f, g, i_peak, thr)
    if band_edge:
        bw = (right - f_c) if right is not None else (f_c - left) if left is not None else 0.0
    else:
        bw = (right - left) if (left is not None and right is not None) else 0.0
        if left is None or right is None:
            band_edge = True  # half-power points not bracketed inside the span
            bw = (right - f_c) if right is not None else (f_c - left) if left else 0.0

    min_nf = None
    if nf_table is not None:
        tbl = np.asarray(nf_table, dtype=float)
        if tbl.ndim != 2 or tbl.shape[1] != 2:
            raise ValueError("nf_table must be two columns: freq_hz, nf_db")
        tf, tn = tbl[:, 0], tbl[:, 1]
        lo, hi = max(f[0], tf[0]), min(f[-1], tf[-1])
        sel = (f >= lo) & (f <= hi)
        if not np.any(sel):
            raise ValueError("NF table does not overlap the dataset band")
        if not np.all(np.isin(f[sel], tf)):
            warnings.warn("NF grid differs from S-parameter grid; interpolating")
        min_nf = float(np.min(np.interp(f[sel], tf, tn)))
    return MeasuredMetrics(
        peak_gain_db=peak,
        f_c_hz=f_c,
        bw3db_hz=float(bw),
        min_nf_db=min_nf,
        s12_max_db=s12_max,
        band_edge_peak=band_edge,
    )


def load_nf_csv(text: str) -> np.ndarray:
    """Read the NF sidecar CSV (header ``freq_hz,nf_db``)."""
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().replace(" ", "") == "freq_hz,nf_db":
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {line_no}: expected 'freq_hz,nf_db'")
        rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise ValueError("empty NF table")
    return np.array(rows)


@dataclass(frozen=True, eq=False)
class TwoToneSweep:
    """Input power sweep of fundamental and third-order product powers (dBm)."""

    f1_hz: float
    f2_hz: float
    pin_dbm: np.ndarray
    pfund_dbm: np.ndarray
    pim3_dbm: np.ndarray

    def __post_init__(self):
        pin = np.asarray(self.pin_dbm, dtype=float)
        pf = np.asarray(self.pfund_dbm, dtype=float)
        pm = np.asarray(self.pim3_dbm, dtype=float)
        if not self.f2_hz > self.f1_hz:
            raise ValueError("f2 must be above f1")
        if pin.size < 4:
            raise ValueError("need at least 4 sweep rows")
        if np.any(np.diff(pin) <= 0.0):
            raise ValueError("input powers must be strictly increasing")
        if pf.shape != pin.shape or pm.shape != pin.shape:
            raise ValueError("sweep columns must have equal length")
        object.__setattr__(self, "pin_dbm", pin)
        object.__setattr__(self, "pfund_dbm", pf)
        object.__setattr__(self, "pim3_dbm", pm)


def load_two_tone_csv(text: str) -> TwoToneSweep:
    """Read a two-tone CSV: ``# f1=<Hz> f2=<Hz>`` comment, then
    ``pin_dbm,pfund_dbm,pim3_dbm`` rows."""
    f1 = f2 = None
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m1 = re.search(r"f1\s*=\s*([0-9.eE+-]+)", line)
            m2 = re.search(r"f2\s*=\s*([0-9.eE+-]+)", line)
            if m1:
                f1 = float(m1.group(1))
            if m2:
                f2 = float(m2.group(1))
            continue
        if line.lower().replace(" ", "").startswith("pin_dbm"):
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError("expected three columns: pin_dbm,pfund_dbm,pim3_dbm")
        rows.append([float(p) for p in parts])
    if f1 is None or f2 is None:
        raise ValueError("missing '# f1=<Hz> f2=<Hz>' header comment")
    arr = np.array(rows)
    return TwoToneSweep(f1, f2, arr[:, 0], arr[:, 1], arr[:, 2])


def write_two_tone_csv(sweep: TwoToneSweep) -> str:
    lines = [f"# f1={sweep.f1_hz:.9g} f2={sweep.f2_hz:.9g}", "pin_dbm,pfund_dbm,pim3_dbm"]
    for row in zip(sweep.pin_dbm, sweep.pfund_dbm, sweep.pim3_dbm):
        lines.append(",".join(f"{v:.9g}" for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LinearityFit:
    """Slope-constrained two-tone fit results.

    ``iip3_dbm`` is None when the third-order product sits at a numerical
    floor; ``ip1db_dbm`` is None when no compression is observed in the sweep.
    Free-slope estimates are diagnostics only and do not move the intercepts.
    """

    iip3_dbm: float | None
    ip1db_dbm: float | None
    small_signal_gain_db: float
    points_used: int
    fund_residual_db: float
    im3_residual_db: float
    fund_slope_free: float
    im3_slope_free: float


def fit_two_tone(sweep: TwoToneSweep) -> LinearityFit:
    """Fit slope-1/slope-3 lines over the small-signal region.

    The region is the maximal prefix whose point-to-point fundamental slope
    stays within 0.1 dB/dB of unity; three points are required.  IIP3 is the
    intersection of the two constrained lines; IP1dB interpolates the input
    power where the fundamental drops 1 dB below the slope-1 line.
    """
    pin, pf, pm = sweep.pin_dbm, sweep.pfund_dbm, sweep.pim3_dbm
    slopes = np.diff(pf) / np.diff(pin)
    n_region = 1
    while n_region - 1 < slopes.size and abs(slopes[n_region - 1] - 1.0) <= SMALL_SIGNAL_SLOPE_TOL:
        n_region += 1
    if n_region < 3:
        raise NoLinearRegion(
            f"only {n_region} small-signal points (need 3); first slope "
            f"{slopes[0]:.3f} dB/dB"
        )
    reg = slice(0, n_region)
    # The slope window tolerates a few tenths of a dB of onset compression at
    # the region's tail, which would bias a plain mean; anchor the intercepts
    # on the least-compressed leading quarter instead.
    fit = slice(0, max(3, n_region // 4))
    gain_db = float(np.mean(pf[fit] - pin[fit]))
    b3 = float(np.mean(pm[fit] - 3.0 * pin[fit]))
    fund_resid = float(np.sqrt(np.mean((pf[fit] - (pin[fit] + gain_db)) ** 2)))
    im3_resid = float(np.sqrt(np.mean((pm[fit] - (3.0 * pin[fit] + b3)) ** 2)))
    fund_slope = float(np.polyfit(pin[reg], pf[reg], 1)[0])
    im3_slope = float(np.polyfit(pin[reg], pm[reg], 1)[0])

    # Third-order product indistinguishable from a flat floor: no intercept.
    iip3 = None
    if np.ptp(pm[reg]) >= 1.0:
        iip3 = (gain_db - b3) / 2.0

    deviation = (pin + gain_db) - pf
    ip1db = None
    for i in range(1, len(pin)):
        if deviation[i] >= 1.0:
            if deviation[i] == deviation[i - 1]:
                ip1db = float(pin[i])
            else:
                frac = (1.0 - deviation[i - 1]) / (deviation[i] - deviation[i - 1])
                ip1db = float(pin[i - 1] + frac * (pin[i] - pin[i - 1]))
            break
    if ip1db is None:
        warnings.warn("no 1 dB compression observed within the sweep")
    return LinearityFit(
        iip3_dbm=iip3,
        ip1db_dbm=ip1db,
        small_signal_gain_db=gain_db,
        points_used=n_region,
        fund_residual_db=fund_resid,
        im3_residual_db=im3_resid,
        fund_slope_free=fund_slope,
        im3_slope_free=im3_slope,
    )

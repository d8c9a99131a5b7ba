"""Matching-network synthesis: L-sections, coupled-inductor input networks,
intermediate-impedance sweeps and passive insertion loss.

Adopted input-network topology (series C1 at the 50 ohm port, both windings of
the coupled pair shunt to ground and coupled with factor k, shunt C3 at the
amplifier node)::

    port 1 o---||---+---------+---o port 2 (amplifier node)
               C1   |    k    |
                    Lp )   ( Ls   with C3 from port 2 to ground
                    |         |
                   gnd       gnd

In L-network terms this is the cascade [series C1 + shunt primary] followed by
[shunt secondary + shunt C3], with the mutual branch carrying the signal.  The
topology lives only in :func:`imn_abcd`, so it can be swapped without touching
the solvers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .network import (
    FrequencyGrid,
    TwoPortNetwork,
    abcd_to_s,
    as_impedance,
    gamma_from_z,
    NoiseSpec,
    noise_figure_at_source,
    SPEED_OF_LIGHT,
    z_to_s,
)

DEFAULT_INDUCTOR_Q = 15.0
DEFAULT_CAPACITOR_Q = 50.0


class AlreadyMatched(ValueError):
    """Load and target impedances are already within tolerance."""


class NoRealSolution(ValueError):
    """No real-element L-section exists (degenerate zero-resistance input)."""


class NoFeasibleCapacitors(ValueError):
    """The root search found no positive-capacitance match."""


class EmptyFeasibleSet(ValueError):
    """No grid point of the intermediate-impedance sweep is realizable."""


@dataclass(frozen=True)
class Reactor:
    """A single reactive element with a quality factor.

    Inductors use a series resistance X/Q; capacitors a series resistance
    1/(w C Q).  Q is treated as frequency independent.
    """

    kind: str  # "inductor" | "capacitor"
    value: float  # henries or farads
    q: float = math.inf

    def __post_init__(self):
        if self.kind not in ("inductor", "capacitor"):
            raise ValueError("kind must be 'inductor' or 'capacitor'")
        if not self.value > 0.0:
            raise ValueError("element value must be > 0")
        if not self.q > 0.0:
            raise ValueError("Q must be > 0 (use inf for lossless)")

    def impedance(self, f_hz: float) -> complex:
        w = 2.0 * math.pi * f_hz
        if self.kind == "inductor":
            x = w * self.value
            r = 0.0 if math.isinf(self.q) else x / self.q
            return complex(r, x)
        x = -1.0 / (w * self.value)
        r = 0.0 if math.isinf(self.q) else -x / self.q
        return complex(r, x)


@dataclass(frozen=True)
class LSection:
    """Two-element matching section.

    ``topology`` is named from the input (transformed) port: "series-first"
    places the series element at the input and the shunt element across the
    load; "shunt-first" places the shunt element at the input.
    """

    topology: str  # "series-first" | "shunt-first"
    series_element: Reactor
    shunt_element: Reactor

    def __post_init__(self):
        if self.topology not in ("series-first", "shunt-first"):
            raise ValueError("topology must be 'series-first' or 'shunt-first'")

    def abcd(self, f_hz: float) -> np.ndarray:
        zs = self.series_element.impedance(f_hz)
        ysh = 1.0 / self.shunt_element.impedance(f_hz)
        series = np.array([[1.0, zs], [0.0, 1.0]], dtype=complex)
        shunt = np.array([[1.0, 0.0], [ysh, 1.0]], dtype=complex)
        if self.topology == "series-first":
            return series @ shunt
        return shunt @ series

    def input_impedance(self, z_load: complex, f_hz: float) -> complex:
        a = self.abcd(f_hz)
        return (a[0, 0] * z_load + a[0, 1]) / (a[1, 0] * z_load + a[1, 1])

    def with_q(self, inductor_q: float, capacitor_q: float) -> "LSection":
        def apply(r: Reactor) -> Reactor:
            return replace(r, q=inductor_q if r.kind == "inductor" else capacitor_q)

        return LSection(self.topology, apply(self.series_element), apply(self.shunt_element))


@dataclass(frozen=True)
class CoupledInductor:
    """Magnetically coupled inductor pair with per-winding quality factors.

    Winding resistances are fixed from Q at ``f_q_ref_hz`` and held constant
    with frequency.  Mutual inductance is M = k sqrt(Lp Ls).
    """

    l_p: float
    l_s: float
    k: float
    q_p: float = math.inf
    q_s: float = math.inf
    f_q_ref_hz: float = 30e9

    def __post_init__(self):
        if not (self.l_p > 0.0 and self.l_s > 0.0):
            raise ValueError("inductances must be > 0")
        if not 0.0 < self.k < 1.0:
            raise ValueError("coupling factor must satisfy 0 < k < 1")
        if not (self.q_p > 0.0 and self.q_s > 0.0):
            raise ValueError("quality factors must be > 0")

    @property
    def mutual(self) -> float:
        return self.k * math.sqrt(self.l_p * self.l_s)

    def winding_resistances(self) -> tuple[float, float]:
        w_ref = 2.0 * math.pi * self.f_q_ref_hz
        r_p = 0.0 if math.isinf(self.q_p) else w_ref * self.l_p / self.q_p
        r_s = 0.0 if math.isinf(self.q_s) else w_ref * self.l_s / self.q_s
        return r_p, r_s

    def z_matrix(self, f_hz: float) -> np.ndarray:
        w = 2.0 * math.pi * f_hz
        r_p, r_s = self.winding_resistances()
        zm = 1j * w * self.mutual
        return np.array(
            [[r_p + 1j * w * self.l_p, zm], [zm, r_s + 1j * w * self.l_s]],
            dtype=complex,
        )

    def abcd(self, f_hz: float) -> np.ndarray:
        z = self.z_matrix(f_hz)
        z21 = z[1, 0]
        det = z[0, 0] * z[1, 1] - z[0, 1] * z[1, 0]
        return np.array(
            [[z[0, 0] / z21, det / z21], [1.0 / z21, z[1, 1] / z21]], dtype=complex
        )


#: Coupled-pair values used throughout the examples: 119 pH / 267 pH / k = 0.59
#: (inductances are interpreted in picohenries).
DEFAULT_TRANSFORMER = CoupledInductor(l_p=119e-12, l_s=267e-12, k=0.59)

#: Amplifier input impedance the default matching examples target.
DEFAULT_AN_IMPEDANCE = complex(200.0, -400.0)


@dataclass(frozen=True)
class MatchingNetworkDesign:
    """C1 / coupled-pair / C3 input-matching network and its design point.

    ``z_im`` is the intermediate impedance at the internal node of the
    T-equivalent of the coupled pair, looking toward the amplifier.
    """

    c1: float
    c3: float
    transformer: CoupledInductor
    z_im: complex
    f0_hz: float
    c1_q: float = math.inf
    c3_q: float = math.inf

    def __post_init__(self):
        if not (self.c1 > 0.0 and self.c3 > 0.0):
            raise ValueError("capacitances must be > 0")
        if not self.f0_hz > 0.0:
            raise ValueError("design frequency must be > 0")


def coupled_inductor_twoport(
    t: CoupledInductor, grid: FrequencyGrid, z_ref: float = 50.0
) -> TwoPortNetwork:
    """Two-port of the coupled pair, both windings shunt to ground.

    Built from the impedance matrix directly, which stays well conditioned in
    the nearly decoupled (k -> 0) limit.
    """
    z = np.stack([t.z_matrix(f) for f in grid.points])
    lossless = math.isinf(t.q_p) and math.isinf(t.q_s)
    return z_to_s(z, grid, z_ref, passive=lossless)


def l_match(z_load, z_target, f_hz: float, tol: float = 1e-9) -> list[LSection]:
    """Closed-form lossless L-sections transforming z_load into z_target at f.

    Returns up to two sections (the two quadratic roots).  The shunt element
    sits on the higher-resistance side: series-first when R_target < R_load,
    shunt-first otherwise.  Raises AlreadyMatched when the two impedances agree
    within ``tol`` (relative) and NoRealSolution when a zero-resistance input
    makes the transformation degenerate.
    """
    zl = as_impedance(z_load)
    zt = as_impedance(z_target)
    if abs(zl - zt) <= tol * max(abs(zt), 1.0):
        raise AlreadyMatched(f"load {zl:.6g} already presents target {zt:.6g}")
    if not (zl.real > 0.0 and zt.real > 0.0):
        raise NoRealSolution("impedances must have positive real part")
    w = 2.0 * math.pi * f_hz

    def reactor_from_series(x: float) -> Reactor | None:
        if x > 0.0:
            return Reactor("inductor", x / w)
        if x < 0.0:
            return Reactor("capacitor", -1.0 / (w * x))
        return None

    def reactor_from_shunt(b: float) -> Reactor | None:
        if b > 0.0:
            return Reactor("capacitor", b / w)
        if b < 0.0:
            return Reactor("inductor", -1.0 / (w * b))
        return None

    out: list[LSection] = []
    if zt.real < zl.real:
        # Shunt across the load, series element toward the input.
        yl = 1.0 / zl
        g, bl = yl.real, yl.imag
        disc = g / zt.real - g * g
        if disc < 0.0:
            raise NoRealSolution("target resistance outside the reachable range")
        for sign in (+1.0, -1.0):
            b = -bl + sign * math.sqrt(disc)
            y_mid = complex(g, bl + b)
            z_mid = 1.0 / y_mid
            x = zt.imag - z_mid.imag
            rs = reactor_from_series(x)
            rsh = reactor_from_shunt(b)
            if rs is None or rsh is None:
                continue
            out.append(LSection("series-first", rs, rsh))
    else:
        # Shunt across the input, series element toward the load.
        yt = 1.0 / zt
        disc = zl.real / yt.real - zl.real**2
        if disc < 0.0:
            raise NoRealSolution("target conductance outside the reachable range")
        for sign in (+1.0, -1.0):
            x = -zl.imag + sign * math.sqrt(disc)
            z_mid = zl + 1j * x
            b = yt.imag - (1.0 / z_mid).imag
            rs = reactor_from_series(x)
            rsh = reactor_from_shunt(b)
            if rs is None or rsh is None:
                continue
            out.append(LSection("shunt-first", rs, rsh))
    if not out:
        raise NoRealSolution("no realizable two-element section")
    return out


def imn_abcd(design: MatchingNetworkDesign, f_hz: float) -> np.ndarray:
    """ABCD of the full input network from the 50 ohm port to the amplifier."""
    w = 2.0 * math.pi * f_hz
    z_c1 = Reactor("capacitor", design.c1, design.c1_q).impedance(f_hz)
    y_c3 = 1.0 / Reactor("capacitor", design.c3, design.c3_q).impedance(f_hz)
    series_c1 = np.array([[1.0, z_c1], [0.0, 1.0]], dtype=complex)
    shunt_c3 = np.array([[1.0, 0.0], [y_c3, 1.0]], dtype=complex)
    return series_c1 @ design.transformer.abcd(f_hz) @ shunt_c3


def imn_two_port(
    design: MatchingNetworkDesign, grid: FrequencyGrid, z_ref: float = 50.0
) -> TwoPortNetwork:
    abcd = np.stack([imn_abcd(design, f) for f in grid.points])
    lossless = all(
        math.isinf(q)
        for q in (design.c1_q, design.c3_q, design.transformer.q_p, design.transformer.q_s)
    )
    return abcd_to_s(abcd, grid, z_ref, passive=lossless)


def imn_input_reflection(
    design: MatchingNetworkDesign, z_an, f_hz: float, z_ref: float = 50.0
) -> complex:
    """Reflection at the 50 ohm port with the amplifier load attached."""
    a = imn_abcd(design, f_hz)
    zl = as_impedance(z_an)
    z_in = (a[0, 0] * zl + a[0, 1]) / (a[1, 0] * zl + a[1, 1])
    return gamma_from_z(z_in, z_ref)


def _realized_z_im(design: MatchingNetworkDesign, z_an: complex, f_hz: float) -> complex:
    # Impedance toward the amplifier at the internal T-node of the coupled pair.
    w = 2.0 * math.pi * f_hz
    t = design.transformer
    _, r_s = t.winding_resistances()
    z_ls = r_s + 1j * w * (t.l_s - t.mutual)
    y_c3 = 1.0 / Reactor("capacitor", design.c3, design.c3_q).impedance(f_hz)
    return z_ls + 1.0 / (y_c3 + 1.0 / z_an)


def synthesize_imn(
    z_an,
    transformer: CoupledInductor = DEFAULT_TRANSFORMER,
    f0_hz: float = 30e9,
    z_ref: float = 50.0,
    target_db: float = -15.0,
) -> MatchingNetworkDesign:
    """Solve for C1, C3 > 0 so the input network matches z_an to z_ref at f0.

    Uses a damped Newton iteration on (Re, Im) of the input reflection over
    (ln C1, ln C3), multi-started from four log-spaced capacitances in a fixed
    order.  Succeeds when |Gamma_in| at f0 is at or below ``target_db``;
    raises NoFeasibleCapacitors otherwise.
    """
    zl = as_impedance(z_an)
    if not zl.real > 0.0:
        raise ValueError("amplifier impedance must have positive real part")
    if not f0_hz > 0.0:
        raise ValueError("design frequency must be > 0")

    def gamma(log_c1: float, log_c3: float) -> complex:
        design = MatchingNetworkDesign(
            math.exp(log_c1), math.exp(log_c3), transformer, 0j, f0_hz
        )
        return imn_input_reflection(design, zl, f0_hz, z_ref)

    def residual(u: np.ndarray) -> np.ndarray:
        g = gamma(u[0], u[1])
        return np.array([g.real, g.imag])

    lo, hi = math.log(1e-17), math.log(1e-8)
    target_lin = 10.0 ** (target_db / 20.0)
    starts = [math.log(c) for c in np.geomspace(20e-15, 5e-12, 4)]
    best: tuple[float, np.ndarray] | None = None
    h = 1e-7
    for s1 in starts:
        for s3 in starts:
            u = np.array([s1, s3])
            r = residual(u)
            for _ in range(60):
                if np.linalg.norm(r) < 1e-13:
                    break
                jac = np.empty((2, 2))
                for j in range(2):
                    up = u.copy()
                    um = u.copy()
                    up[j] += h
                    um[j] -= h
                    jac[:, j] = (residual(up) - residual(um)) / (2.0 * h)
                try:
                    step = np.linalg.solve(jac, -r)
                except np.linalg.LinAlgError:
                    break
                lam = 1.0
                improved = False
                for _ in range(20):
                    u_new = np.clip(u + lam * step, lo, hi)
                    r_new = residual(u_new)
                    if np.linalg.norm(r_new) < np.linalg.norm(r):
                        u, r = u_new, r_new
                        improved = True
                        break
                    lam *= 0.5
                if not improved:
                    break
            err = float(np.linalg.norm(r))
            if best is None or err < best[0]:
                best = (err, u.copy())
            if err <= target_lin:
                c1, c3 = math.exp(u[0]), math.exp(u[1])
                stub = MatchingNetworkDesign(c1, c3, transformer, 0j, f0_hz)
                z_im = _realized_z_im(stub, zl, f0_hz)
                return MatchingNetworkDesign(c1, c3, transformer, z_im, f0_hz)
    err_db = 20.0 * math.log10(best[0]) if best and best[0] > 0 else -math.inf
    raise NoFeasibleCapacitors(
        f"no positive C1/C3 reaches {target_db:.1f} dB at {f0_hz:.4g} Hz "
        f"(best |Gamma| = {err_db:.1f} dB)"
    )


def available_gain_db(
    abcd: np.ndarray, z_ref: float = 50.0
) -> float:
    """Available power gain (dB) of a two-port from a z_ref source."""
    grid = FrequencyGrid.single(1.0)  # frequency is irrelevant for a fixed ABCD
    net = abcd_to_s(abcd[np.newaxis, :, :], grid, z_ref)
    s21 = net.s21[0]
    s22 = net.s22[0]
    g_av = abs(s21) ** 2 / max(1.0 - abs(s22) ** 2, 1e-300)
    return 10.0 * math.log10(g_av)


def insertion_loss_db(
    design: MatchingNetworkDesign, grid: FrequencyGrid, z_ref: float = 50.0
) -> np.ndarray:
    """Passive loss of the network per frequency, in dB.

    Defined as the transducer loss between a z_ref source and the load that
    conjugate-matches the network output, i.e. the available-gain loss.  Zero
    for lossless elements.
    """
    out = np.empty(len(grid))
    for i, f in enumerate(grid.points):
        out[i] = -available_gain_db(imn_abcd(design, f), z_ref)
    return out


def _flip_abcd(a: np.ndarray) -> np.ndarray:
    # Reverse a reciprocal two-port (AD - BC = 1): swap A and D.
    return np.array([[a[1, 1], a[0, 1]], [a[1, 0], a[0, 0]]], dtype=complex)


@dataclass(frozen=True, eq=False)
class ZimSweepResult:
    """Outcome of the intermediate-impedance sweep.

    ``nf_db`` is indexed [i_r, i_x]; unrealizable grid points hold NaN.  The
    best point's two L-sections are reported alongside an equivalent
    uncoupled design record (k ~ 0) built from their element values.
    """

    r_values: np.ndarray
    x_values: np.ndarray
    nf_db: np.ndarray
    best_z_im: complex
    best_nf_db: float
    best_stage1: LSection
    best_stage2: LSection
    best_design: MatchingNetworkDesign
    objective: str


def _stage_elements(section: LSection) -> tuple[Reactor, Reactor] | None:
    # One inductor + one capacitor, in either position, else not recordable.
    pair = (section.series_element, section.shunt_element)
    kinds = {r.kind for r in pair}
    if kinds != {"inductor", "capacitor"}:
        return None
    ind = next(r for r in pair if r.kind == "inductor")
    cap = next(r for r in pair if r.kind == "capacitor")
    return ind, cap


def sweep_zim(
    z_an,
    noise: NoiseSpec,
    transformer: CoupledInductor = DEFAULT_TRANSFORMER,
    f0_hz: float = 30e9,
    *,
    r_values=None,
    x_values=None,
    r_range: tuple[float, float] = (10.0, 400.0),
    x_range: tuple[float, float] = (-500.0, 100.0),
    n_r: int = 40,
    n_x: int = 40,
    inductor_q: float | None = None,
    capacitor_q: float = DEFAULT_CAPACITOR_Q,
    objective: str = "noise",
    z_ref: float = 50.0,
) -> ZimSweepResult:
    """Sweep the intermediate impedance and pick the lowest-noise realization.

    Each grid point Z_IM is realized as two L-sections: stage 1 transforms the
    z_ref source into Z_IM, stage 2 transforms Z_IM into conj(z_an).  Element
    losses use ``inductor_q`` (default: the transformer's winding Qs, or 15
    when those are lossless) and ``capacitor_q``.  The figure of merit is the
    cascade noise figure at the amplifier plane: stage noise at the realized
    source reflection plus the network's available-gain loss.  With
    ``objective="gain"`` only the loss is minimized.

    Ties are broken toward the lowest R, then lowest |X|, then grid order.
    """
    if objective not in ("noise", "gain"):
        raise ValueError("objective must be 'noise' or 'gain'")
    zl = as_impedance(z_an)
    if not zl.real > 0.0:
        raise ValueError("amplifier impedance must have positive real part")
    r_vals = (
        np.asarray(r_values, dtype=float)
        if r_values is not None
        else np.geomspace(r_range[0], r_range[1], n_r)
    )
    x_vals = (
        np.asarray(x_values, dtype=float)
        if x_values is not None
        else np.linspace(x_range[0], x_range[1], n_x)
    )
    if np.any(r_vals <= 0.0):
        raise ValueError("intermediate resistances must be > 0")
    if inductor_q is None:
        q1 = transformer.q_p if math.isfinite(transformer.q_p) else DEFAULT_INDUCTOR_Q
        q2 = transformer.q_s if math.isfinite(transformer.q_s) else DEFAULT_INDUCTOR_Q
    else:
        q1 = q2 = inductor_q

    nf_map = np.full((r_vals.size, x_vals.size), np.nan)
    best = None  # (score, r, |x|, flat_index, z_im, nf, stage1, stage2)
    flat = 0
    for i, r in enumerate(r_vals):
        for j, x in enumerate(x_vals):
            z_im = complex(r, x)
            try:
                stage1_opts = l_match(z_ref, z_im, f0_hz)
                stage2_opts = l_match(z_im, zl.conjugate(), f0_hz)
            except (AlreadyMatched, NoRealSolution):
                flat += 1
                continue
            point = None
            for s1 in stage1_opts:
                for s2 in stage2_opts:
                    if _stage_elements(s1) is None or _stage_elements(s2) is None:
                        continue
                    s1q = s1.with_q(q1, capacitor_q)
                    s2q = s2.with_q(q2, capacitor_q)
                    # Source-to-amplifier ABCD: both sections face the node.
                    total = _flip_abcd(s1q.abcd(f0_hz)) @ _flip_abcd(s2q.abcd(f0_hz))
                    loss_db = -available_gain_db(total, z_ref)
                    z_src = (total[1, 1] * z_ref + total[0, 1]) / (
                        total[1, 0] * z_ref + total[0, 0]
                    )
                    gamma_src = gamma_from_z(z_src, z_ref)
                    if abs(gamma_src) >= 1.0:
                        continue
                    if objective == "noise":
                        score = noise_figure_at_source(noise, gamma_src, z_ref) + loss_db
                    else:
                        score = loss_db
                    if point is None or score < point[0]:
                        point = (score, s1q, s2q)
            if point is None:
                flat += 1
                continue
            score, s1q, s2q = point
            nf_map[i, j] = score
            # Scores within 1e-9 dB count as tied so the stated tie-break
            # (lowest R, then lowest |X|, then grid order) is reachable.
            key = (round(score, 9), r, abs(x), flat)
            if best is None or key < best[0]:
                best = (key, score, z_im, s1q, s2q)
            flat += 1
    if best is None:
        raise EmptyFeasibleSet("no intermediate-impedance grid point is realizable")
    _, best_score, z_best, s1q, s2q = best
    ind1, cap1 = _stage_elements(s1q)
    ind2, cap2 = _stage_elements(s2q)
    design = MatchingNetworkDesign(
        c1=cap1.value,
        c3=cap2.value,
        transformer=CoupledInductor(
            l_p=ind1.value, l_s=ind2.value, k=1e-9, q_p=ind1.q, q_s=ind2.q,
            f_q_ref_hz=f0_hz,
        ),
        z_im=z_best,
        f0_hz=f0_hz,
        c1_q=cap1.q,
        c3_q=cap2.q,
    )
    return ZimSweepResult(
        r_values=r_vals,
        x_values=x_vals,
        nf_db=nf_map,
        best_z_im=z_best,
        best_nf_db=float(best_score),
        best_stage1=s1q,
        best_stage2=s2q,
        best_design=design,
        objective=objective,
    )


def cpw_line(
    length_m: float,
    grid: FrequencyGrid,
    z0_line: float = 50.0,
    loss_db_per_mm: float = 0.0,
    z_ref: float = 50.0,
) -> TwoPortNetwork:
    """Ideal 50 ohm feed-line segment with optional flat loss in dB/mm."""
    if length_m < 0.0:
        raise ValueError("length must be >= 0")
    alpha = loss_db_per_mm * 1000.0 / (20.0 * math.log10(math.e))  # Np/m
    abcd = np.empty((len(grid), 2, 2), dtype=complex)
    for i, f in enumerate(grid.points):
        beta = 2.0 * math.pi * f / SPEED_OF_LIGHT
        gl = complex(alpha * length_m, beta * length_m)
        abcd[i] = [
            [cmath.cosh(gl), z0_line * cmath.sinh(gl)],
            [cmath.sinh(gl) / z0_line, cmath.cosh(gl)],
        ]
    return abcd_to_s(abcd, grid, z_ref, passive=True)

"""Independent verification paths used by the tests.

Everything here deliberately avoids the package's composition code: networks
are solved by nodal analysis, noise by Monte-Carlo sampling, intermodulation
by time-domain simulation, and directivity by a closed-form lattice sum or a
trapezoidal fine-grid integral.
"""

from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------------------------
# Nodal (MNA) two-port solver


def solve_two_port(n_nodes, branches, port1, port2, f_hz, z0=50.0):
    """S-parameters of a netlist by nodal analysis.

    ``branches`` entries are ("y", node_a, node_b, y_siemens) for a
    two-terminal admittance, or ("coupled", node_p, node_s, z_matrix_fn) for a
    coupled pair with both windings to ground, where z_matrix_fn(f) returns
    the 2x2 impedance matrix.  Node 0 is ground; ports carry z0 terminations.
    """
    y = np.zeros((n_nodes + 1, n_nodes + 1), dtype=complex)

    def stamp(a, b, adm):
        y[a, a] += adm
        y[b, b] += adm
        y[a, b] -= adm
        y[b, a] -= adm

    for br in branches:
        if br[0] == "y":
            _, a, b, adm = br
            stamp(a, b, adm(f_hz) if callable(adm) else adm)
        elif br[0] == "coupled":
            _, np_, ns_, zfn = br
            ym = np.linalg.inv(zfn(f_hz))
            y[np_, np_] += ym[0, 0]
            y[np_, ns_] += ym[0, 1]
            y[ns_, np_] += ym[1, 0]
            y[ns_, ns_] += ym[1, 1]
        else:
            raise ValueError(br[0])

    y[port1, port1] += 1.0 / z0
    y[port2, port2] += 1.0 / z0
    yr = y[1:, 1:]

    def drive(port):
        rhs = np.zeros(n_nodes, dtype=complex)
        rhs[port - 1] = 1.0 / z0  # Norton equivalent of a 1 V source behind z0
        return np.linalg.solve(yr, rhs)

    v1 = drive(port1)
    v2 = drive(port2)
    return np.array(
        [
            [2.0 * v1[port1 - 1] - 1.0, 2.0 * v2[port1 - 1]],
            [2.0 * v1[port2 - 1], 2.0 * v2[port2 - 1] - 1.0],
        ]
    )


def reactor_admittance(reactor):
    def adm(f):
        return 1.0 / reactor.impedance(f)

    return adm


def lsection_branches(section, node_in, node_out, next_node):
    """Netlist branches of an LSection between two nodes.

    Returns (branches, n_extra_nodes).  The shunt element lands on the load
    node for series-first topology, on the input node otherwise.
    """
    zs = reactor_admittance(section.series_element)
    ysh = reactor_admittance(section.shunt_element)
    if section.topology == "series-first":
        return (
            [("y", node_in, node_out, zs), ("y", node_out, 0, ysh)],
            0,
        )
    return (
        [("y", node_in, 0, ysh), ("y", node_in, node_out, zs)],
        0,
    )


def imn_netlist(design):
    """Netlist of the input matching network: series C1, coupled pair, shunt C3.

    Nodes: 1 = 50 ohm port, 2 = amplifier node, 3 = primary winding node.
    """
    from phasor.matching import Reactor

    c1 = Reactor("capacitor", design.c1, design.c1_q)
    c3 = Reactor("capacitor", design.c3, design.c3_q)
    branches = [
        ("y", 1, 3, reactor_admittance(c1)),
        ("coupled", 3, 2, design.transformer.z_matrix),
        ("y", 2, 0, reactor_admittance(c3)),
    ]
    return 3, branches, 1, 2


def imn_gamma_in_nodal(design, z_an, f_hz, z0=50.0):
    """Input reflection of the matching network by nodal analysis.

    The amplifier impedance is attached as an extra shunt branch at port 2
    with the port-2 termination removed by embedding: solve the one-port
    looking into node 1 directly.
    """
    from phasor.matching import Reactor

    c1 = Reactor("capacitor", design.c1, design.c1_q)
    c3 = Reactor("capacitor", design.c3, design.c3_q)
    n_nodes = 3
    y = np.zeros((n_nodes + 1, n_nodes + 1), dtype=complex)

    def stamp(a, b, adm):
        y[a, a] += adm
        y[b, b] += adm
        y[a, b] -= adm
        y[b, a] -= adm

    stamp(1, 3, 1.0 / c1.impedance(f_hz))
    ym = np.linalg.inv(design.transformer.z_matrix(f_hz))
    y[3, 3] += ym[0, 0]
    y[3, 2] += ym[0, 1]
    y[2, 3] += ym[1, 0]
    y[2, 2] += ym[1, 1]
    stamp(2, 0, 1.0 / c3.impedance(f_hz))
    stamp(2, 0, 1.0 / z_an)
    yr = y[1:, 1:]
    rhs = np.zeros(n_nodes, dtype=complex)
    rhs[0] = 1.0  # 1 A into node 1
    v = np.linalg.solve(yr, rhs)
    z_in = v[0]
    return (z_in - z0) / (z_in + z0)


# ---------------------------------------------------------------------------
# Noise-wave Monte-Carlo cascade oracle


def mc_cascade_nf_db(stages, n_samples=4_000_000, seed=7):
    """Estimate the cascade noise figure by sampling noise waves.

    ``stages`` is a list of (gain_db, nf_db).  Source noise has unit variance;
    each stage adds input-referred Gaussian noise of variance (F - 1) and
    amplifies by its power gain.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n_samples)
    g_total = 1.0
    for gain_db, nf_db in stages:
        g = 10.0 ** (gain_db / 10.0)
        f_lin = 10.0 ** (nf_db / 10.0)
        v = math.sqrt(g) * (v + math.sqrt(f_lin - 1.0) * rng.standard_normal(n_samples))
        g_total *= g
    f_est = float(np.var(v) / g_total)
    return 10.0 * math.log10(f_est)


# ---------------------------------------------------------------------------
# Time-domain two-tone cascade oracle


def _poly_coeffs(gain_db, iip3_dbm, r_ohm=50.0):
    a1 = 10.0 ** (gain_db / 20.0)
    a_ip3_sq = 10.0 ** (iip3_dbm / 10.0) * 2.0 * r_ohm / 1000.0  # peak volts^2
    a3 = -(4.0 / 3.0) * a1 / a_ip3_sq
    return a1, a3


def sim_cascade_iip3_dbm(stages, pin_dbm=-70.0, r_ohm=50.0):
    """Brute-force two-tone IIP3 of cascaded memoryless cubics.

    Drives two small tones through every stage's polynomial in the time
    domain, reads fundamental and 2f1-f2 bin powers off the FFT and
    extrapolates the intercept.
    """
    n = 1 << 14
    k1, k2 = 401, 431
    t = np.arange(n)
    amp = math.sqrt(2.0 * r_ohm * 10.0 ** (pin_dbm / 10.0) / 1000.0)
    x = amp * (np.cos(2 * np.pi * k1 * t / n) + np.cos(2 * np.pi * k2 * t / n))
    for gain_db, iip3_dbm in stages:
        a1, a3 = _poly_coeffs(gain_db, iip3_dbm, r_ohm)
        x = a1 * x + a3 * x**3
    spec = np.abs(np.fft.rfft(x)) / n * 2.0
    p_fund = 10.0 * math.log10(spec[k1] ** 2 / (2.0 * r_ohm) * 1000.0)
    p_im3 = 10.0 * math.log10(spec[2 * k1 - k2] ** 2 / (2.0 * r_ohm) * 1000.0)
    return pin_dbm + (p_fund - p_im3) / 2.0


def cubic_sweep(a1_db, iip3_dbm, pin_lo_dbm=None, step_db=1.0, r_ohm=50.0):
    """Synthetic bench sweep for a memoryless cubic device.

    The fundamental column is the single-tone compression response; the IM3
    column is the two-tone product at the same per-tone input power.  Sweeps
    start 45 dB below IIP3 unless told otherwise and stop short of the
    gain-expansion fold-over.
    """
    from phasor.touchstone import TwoToneSweep

    if pin_lo_dbm is None:
        pin_lo_dbm = iip3_dbm - 45.0
    pins = np.arange(pin_lo_dbm, iip3_dbm - 8.0, step_db)
    a1, a3 = _poly_coeffs(a1_db, iip3_dbm, r_ohm)
    amp = np.sqrt(2.0 * r_ohm * 10.0 ** (pins / 10.0) / 1000.0)
    v_fund = a1 * amp + 0.75 * a3 * amp**3
    v_im3 = 0.75 * abs(a3) * amp**3
    p_fund = 10.0 * np.log10(np.maximum(v_fund, 1e-30) ** 2 / (2.0 * r_ohm) * 1000.0)
    p_im3 = 10.0 * np.log10(np.maximum(v_im3, 1e-300) ** 2 / (2.0 * r_ohm) * 1000.0)
    return TwoToneSweep(30e9, 30.05e9, pins, p_fund, p_im3)


# ---------------------------------------------------------------------------
# Directivity oracles


def sinc_sum_directivity_dbi(weights_2d, pitch_m, f_hz):
    """Closed-form directivity of an isotropic-element planar lattice.

    D = |sum w|^2 / sum_ij w_i w_j sinc(k |r_i - r_j|), the analytic value of
    the full-sphere integral.
    """
    c0 = 299_792_458.0
    k = 2.0 * np.pi * f_hz / c0
    nx, ny = weights_2d.shape
    x = (np.arange(nx) - (nx - 1) / 2.0) * pitch_m
    yv = (np.arange(ny) - (ny - 1) / 2.0) * pitch_m
    gx, gy = np.meshgrid(x, yv, indexing="ij")
    pos = np.column_stack([gx.ravel(), gy.ravel()])
    w = weights_2d.ravel()
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    arg = k * dist
    kern = np.where(arg == 0.0, 1.0, np.sin(np.where(arg == 0.0, 1.0, arg)) / np.where(arg == 0.0, 1.0, arg))
    return 10.0 * math.log10(abs(w.sum()) ** 2 / float(w @ kern @ w))


def trapezoid_directivity_dbi(intensity_fn, step_deg=0.5):
    """Fine-grid trapezoidal directivity integral, written independently.

    Same value as the package's midpoint rule in the converged limit; used as
    the independent quadrature cross-check.  The 0.05 deg regression constants
    in the tests were produced by this kind of scan at step_deg=0.05.
    """
    theta = np.radians(np.arange(0.0, 180.0 + step_deg / 2, step_deg))
    phi = np.radians(np.arange(-180.0, 180.0 + step_deg / 2, step_deg))
    rows = np.empty((theta.size, phi.size))
    for i, th in enumerate(theta):
        rows[i, :] = intensity_fn(np.full(phi.size, math.degrees(th)), np.degrees(phi))
    integrand = rows * np.sin(theta)[:, None]
    total = np.trapezoid(np.trapezoid(integrand, phi, axis=1), theta)
    return 10.0 * math.log10(4.0 * np.pi * rows.max() / total)


def brute_force_line_cut_db(weights, pitch_m, f_hz, step_deg=0.01, max_deg=90.0):
    """|AF|^2 cut of a line array on a fine grid, self-contained."""
    c0 = 299_792_458.0
    k = 2.0 * np.pi * f_hz / c0
    n = len(weights)
    pos = (np.arange(n) - (n - 1) / 2.0) * pitch_m
    theta = np.arange(-max_deg, max_deg + step_deg / 2, step_deg)
    u = np.sin(np.radians(theta))
    af = np.exp(1j * k * np.outer(u, pos)) @ np.asarray(weights)
    p = np.abs(af) ** 2
    return theta, 10.0 * np.log10(p / p.max() + 1e-300)


def local_maxima_db(theta, db):
    out = []
    for i in range(1, len(db) - 1):
        if db[i] > db[i - 1] and db[i] > db[i + 1]:
            out.append((db[i], theta[i]))
    return out


# ---------------------------------------------------------------------------
# Synthetic measured datasets


def lorentzian_s2p_text(
    fc_hz=30.1e9,
    bw_hz=7.1e9,
    peak_db=16.0,
    f_lo_hz=25e9,
    f_hi_hz=35e9,
    step_hz=50e6,
    unit="HZ",
    s12_db=-35.0,
):
    """Touchstone text for a half-power-width Lorentzian |S21|^2 response."""
    scale = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}[unit]
    freqs = np.arange(f_lo_hz, f_hi_hz + step_hz / 2, step_hz)
    s21 = np.sqrt(10.0 ** (peak_db / 10.0) / (1.0 + ((freqs - fc_hz) / (bw_hz / 2.0)) ** 2))
    s12 = 10.0 ** (s12_db / 20.0)
    lines = [f"# {unit} S RI R 50"]
    for f, v in zip(freqs, s21):
        lines.append(f"{f / scale:.17g} 0.1 0 {v:.17g} 0 {s12:.9g} 0 0.1 0")
    return "\n".join(lines) + "\n"

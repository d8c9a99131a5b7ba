"""Figure rendering for the CLI report paths (PNG files next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_taper_figure(path, line_weights, weights_2d):
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    ax = axes[0]
    n = len(line_weights)
    ax.stem(np.arange(n), line_weights)
    ax.set_xlabel("Element index")
    ax.set_ylabel("Normalized amplitude")
    ax.set_title("Line taper")
    ax.set_ylim(0, 1.1)
    ax.grid(True, alpha=0.3)

    ax = axes[1]
    db = 20.0 * np.log10(weights_2d)
    im = ax.imshow(db, origin="lower", cmap="viridis")
    ax.set_xlabel("Element x")
    ax.set_ylabel("Element y")
    ax.set_title("Planar weights [dB]")
    fig.colorbar(im, ax=ax, label="dB")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pattern_figure(path, cuts, title="Principal cuts"):
    """cuts: mapping label -> (angle_deg, level_db)."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, (ang, db) in cuts.items():
        ax.plot(ang, db, linewidth=1.2, label=label)
    ax.set_xlabel("Theta from boresight [deg]")
    ax.set_ylabel("Normalized gain [dB]")
    ax.set_title(title)
    ax.set_ylim(-60, 2)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_gamma_figure(path, freqs_hz, gamma_db, f0_hz, target_db=None):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(np.asarray(freqs_hz) / 1e9, gamma_db, "b-", linewidth=1.5)
    ax.axvline(f0_hz / 1e9, color="gray", linestyle=":", alpha=0.7)
    if target_db is not None:
        ax.axhline(target_db, color="r", linestyle="--", alpha=0.6,
                   label=f"target {target_db:g} dB")
        ax.legend()
    ax.set_xlabel("Frequency [GHz]")
    ax.set_ylabel("|Gamma_in| [dB]")
    ax.set_title("Input reflection of the matching network")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_nf_map_figure(path, r_values, x_values, nf_db, best_z_im):
    fig, ax = plt.subplots(figsize=(7, 5))
    mesh = ax.pcolormesh(r_values, x_values, nf_db.T, shading="nearest", cmap="magma")
    ax.plot([best_z_im.real], [best_z_im.imag], "c*", markersize=14,
            label=f"best {best_z_im.real:.0f}{best_z_im.imag:+.0f}j")
    ax.set_xscale("log")
    ax.set_xlabel("Re(Z_IM) [ohm]")
    ax.set_ylabel("Im(Z_IM) [ohm]")
    ax.set_title("Cascade noise figure over the intermediate impedance")
    fig.colorbar(mesh, ax=ax, label="NF [dB]")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_budget_figure(path, names, cum_gain_db, cum_nf_db):
    x = np.arange(len(names))
    fig, ax1 = plt.subplots(figsize=(7.5, 4.5))
    ax1.plot(x, cum_gain_db, "bo-", label="Cumulative gain")
    ax1.set_ylabel("Gain [dB]", color="b")
    ax1.set_xticks(x)
    ax1.set_xticklabels(names, rotation=20, ha="right")
    ax1.grid(True, alpha=0.3)
    ax2 = ax1.twinx()
    ax2.plot(x, cum_nf_db, "rs--", label="Cumulative NF")
    ax2.set_ylabel("NF [dB]", color="r")
    ax1.set_title("Chain budget by stage")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sparam_figure(path, freqs_hz, s21_db, s12_db, metrics):
    fig, ax = plt.subplots(figsize=(7.5, 4.5))
    f_ghz = np.asarray(freqs_hz) / 1e9
    ax.plot(f_ghz, s21_db, "b-", label="|S21|")
    if s12_db is not None:
        ax.plot(f_ghz, s12_db, "g--", label="|S12|")
    ax.axvline(metrics.f_c_hz / 1e9, color="gray", linestyle=":", alpha=0.7)
    ax.plot([metrics.f_c_hz / 1e9], [metrics.peak_gain_db], "r*", markersize=12,
            label=f"peak {metrics.peak_gain_db:.1f} dB")
    ax.set_xlabel("Frequency [GHz]")
    ax.set_ylabel("Magnitude [dB]")
    ax.set_title("Measured S-parameters")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_two_tone_figure(path, sweep, fit):
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(sweep.pin_dbm, sweep.pfund_dbm, "bo-", markersize=3, label="Fundamental")
    ax.plot(sweep.pin_dbm, sweep.pim3_dbm, "rs-", markersize=3, label="IM3")
    g = fit.small_signal_gain_db
    pin = sweep.pin_dbm
    ax.plot(pin, pin + g, "b:", alpha=0.7, label="slope 1")
    if fit.iip3_dbm is not None:
        b3 = g - 2.0 * fit.iip3_dbm
        ax.plot(pin, 3.0 * pin + b3, "r:", alpha=0.7, label="slope 3")
        ax.plot([fit.iip3_dbm], [fit.iip3_dbm + g], "k*", markersize=12,
                label=f"IIP3 {fit.iip3_dbm:.1f} dBm")
    if fit.ip1db_dbm is not None:
        ax.axvline(fit.ip1db_dbm, color="gray", linestyle="--", alpha=0.6,
                   label=f"IP1dB {fit.ip1db_dbm:.1f} dBm")
    ax.set_xlabel("Input power per tone [dBm]")
    ax.set_ylabel("Output power [dBm]")
    ax.set_title("Two-tone linearity fit")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_figure(path, names, pc_high_mw, pc_low_mw, ours):
    x = np.arange(len(names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(8, 4.5))
    colors = ["tab:red" if n == ours else "tab:blue" for n in names]
    ax.bar(x - width / 2, pc_high_mw, width, color=colors, label="high-gain state")
    low = [p if p is not None else 0.0 for p in pc_low_mw]
    ax.bar(x + width / 2, low, width, color=colors, alpha=0.55, label="low-gain state")
    ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("Power consumption [mW]")
    ax.set_title("Power consumption per design")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

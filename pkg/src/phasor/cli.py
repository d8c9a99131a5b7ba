"""Batch command-line front end.

Every run resolves its configuration (built-in defaults, then ``--config``
JSON, then explicit flags), writes the results as CSV/JSON plus rendered PNG
figures into the output directory, and records the fully resolved
configuration in ``manifest.json`` so the run can be reproduced exactly.

Exit codes: 0 success, 2 input validation failure, 3 infeasible synthesis.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .budget import (
    BenchmarkEntry,
    EmptyChain,
    GainState,
    MissingIip3,
    StageSpec,
    benchmark_fom,
    chain_budget,
    friis_cascade,
)
from .matching import (
    CoupledInductor,
    EmptyFeasibleSet,
    MatchingNetworkDesign,
    NoFeasibleCapacitors,
    imn_input_reflection,
    insertion_loss_db,
    sweep_zim,
    synthesize_imn,
)
from .network import FrequencyGrid, NoiseSpec
from .pattern import (
    ArrayGeometry,
    ElementPattern,
    NoSidelobes,
    array_directivity,
    principal_cut,
    sidelobe_levels,
)
from .taper import (
    DEFAULT_N_BAR,
    GainStateSet,
    InsufficientSpan,
    InvalidSpec,
    TaperSpec,
    TaperWeights,
    dynamic_range_db,
    planar_taper,
    quantize_weights,
    taylor_line_taper,
)
from .touchstone import (
    MalformedOptionLine,
    NoLinearRegion,
    NonMonotonicFrequency,
    RowArityError,
    UnsupportedVersion,
    extract_metrics,
    fit_two_tone,
    load_nf_csv,
    load_two_tone_csv,
    parse_touchstone,
)

VALIDATION_ERRORS = (
    ValueError,
    InvalidSpec,
    InsufficientSpan,
    MalformedOptionLine,
    NonMonotonicFrequency,
    RowArityError,
    UnsupportedVersion,
    NoLinearRegion,
    EmptyChain,
    MissingIip3,
    NoSidelobes,
    OSError,
    json.JSONDecodeError,
)
INFEASIBLE_ERRORS = (NoFeasibleCapacitors, EmptyFeasibleSet)

DEFAULTS: dict[str, dict] = {
    "taper": {
        "n": 8,
        "sll": 18.0,
        "nbar": DEFAULT_N_BAR,
        "states": 0,
        "state_span": None,
    },
    "pattern": {
        "n": 8,
        "sll": 18.0,
        "nbar": DEFAULT_N_BAR,
        "weights": None,
        "pitch_mm": 6.0,
        "freq_ghz": 30.0,
        "isotropic": False,
        "element_gain_dbi": 8.0,
        "theta_3db": 65.0,
        "phi_3db": 65.0,
        "sla_v": 30.0,
        "a_max": 30.0,
        "step_deg": 0.25,
        "cut_step_deg": 0.05,
        "steer_theta": 0.0,
        "steer_phi": 0.0,
    },
    "match": {
        "zan": "200-400j",
        "lp_ph": 119.0,
        "ls_ph": 267.0,
        "k": 0.59,
        "q_p": math.inf,
        "q_s": math.inf,
        "f0_ghz": 30.0,
        "target_db": -15.0,
        "span_ghz": "26:34",
        "points": 161,
    },
    "zim": {
        "zan": "200-400j",
        "fmin_db": 2.0,
        "rn": 20.0,
        "gamma_opt": "0",
        "f0_ghz": 30.0,
        "rmin": 10.0,
        "rmax": 400.0,
        "nr": 40,
        "xmin": -500.0,
        "xmax": 100.0,
        "nx": 40,
        "inductor_q": 15.0,
        "capacitor_q": 50.0,
        "objective": "noise",
    },
    "budget": {"chain": None, "format": "text", "voltage_addition": False},
    "extract": {"s2p": None, "nf": None, "two_tone": None, "ip1db_req_dbm": -30.0},
    "bench": {"table": None, "ours": "VG-LNA2", "format": "text"},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasor",
        description="Design and verification toolkit for tapered phased-array "
        "receive chains.",
    )
    parser.add_argument("--version", action="version", version=f"phasor {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("-o", "--out", default=argparse.SUPPRESS,
                       help="output directory (default: ./phasor-out, or $PHASOR_OUT)")
        p.add_argument("--config", default=argparse.SUPPRESS,
                       help="JSON config file (or a previous run's manifest.json)")
        p.add_argument("--no-figures", action="store_true", default=argparse.SUPPRESS,
                       help="skip PNG rendering")

    p = sub.add_parser("taper", help="synthesize a Taylor taper and report its range")
    p.add_argument("--n", type=int, default=argparse.SUPPRESS)
    p.add_argument("--sll", type=float, default=argparse.SUPPRESS)
    p.add_argument("--nbar", type=int, default=argparse.SUPPRESS)
    p.add_argument("--states", type=int, default=argparse.SUPPRESS,
                   help="quantize onto this many equispaced gain states")
    p.add_argument("--state-span", type=float, default=argparse.SUPPRESS,
                   help="span of the state set in dB (default: taper range)")
    common(p)

    p = sub.add_parser("pattern", help="array pattern, directivity and side lobes")
    for name, typ in [("--n", int), ("--sll", float), ("--nbar", int),
                      ("--pitch-mm", float), ("--freq-ghz", float),
                      ("--element-gain-dbi", float), ("--theta-3db", float),
                      ("--phi-3db", float), ("--sla-v", float), ("--a-max", float),
                      ("--step-deg", float), ("--cut-step-deg", float),
                      ("--steer-theta", float), ("--steer-phi", float)]:
        p.add_argument(name, type=typ, default=argparse.SUPPRESS)
    p.add_argument("--weights", default=argparse.SUPPRESS,
                   help="CSV of 2-D weights (overrides --n/--sll/--nbar)")
    p.add_argument("--isotropic", action="store_true", default=argparse.SUPPRESS)
    common(p)

    p = sub.add_parser("match", help="synthesize the C1/coupled-pair/C3 input match")
    for name, typ in [("--lp-ph", float), ("--ls-ph", float), ("--k", float),
                      ("--q-p", float), ("--q-s", float), ("--f0-ghz", float),
                      ("--target-db", float), ("--points", int)]:
        p.add_argument(name, type=typ, default=argparse.SUPPRESS)
    p.add_argument("--zan", default=argparse.SUPPRESS,
                   help="amplifier input impedance, e.g. '200-400j'")
    p.add_argument("--span-ghz", default=argparse.SUPPRESS, help="sweep range lo:hi")
    common(p)

    p = sub.add_parser("zim", help="noise-aware intermediate-impedance sweep")
    p.add_argument("--zan", default=argparse.SUPPRESS)
    p.add_argument("--gamma-opt", default=argparse.SUPPRESS)
    for name, typ in [("--fmin-db", float), ("--rn", float), ("--f0-ghz", float),
                      ("--rmin", float), ("--rmax", float), ("--nr", int),
                      ("--xmin", float), ("--xmax", float), ("--nx", int),
                      ("--inductor-q", float), ("--capacitor-q", float)]:
        p.add_argument(name, type=typ, default=argparse.SUPPRESS)
    p.add_argument("--objective", choices=["noise", "gain"], default=argparse.SUPPRESS)
    common(p)

    p = sub.add_parser("budget", help="cascade a chain definition JSON")
    p.add_argument("chain", nargs="?", default=argparse.SUPPRESS)
    p.add_argument("--voltage-addition", action="store_true", default=argparse.SUPPRESS)
    p.add_argument("--format", choices=["text", "json", "csv"], default=argparse.SUPPRESS)
    common(p)

    p = sub.add_parser("extract", help="metrics from .s2p (+ NF sidecar, two-tone CSV)")
    p.add_argument("s2p", nargs="?", default=argparse.SUPPRESS)
    p.add_argument("--nf", default=argparse.SUPPRESS, help="NF sidecar CSV")
    p.add_argument("--two-tone", default=argparse.SUPPRESS, help="two-tone sweep CSV")
    p.add_argument("--ip1db-req-dbm", type=float, default=argparse.SUPPRESS,
                   help="input-referred compression requirement (default -30 dBm)")
    common(p)

    p = sub.add_parser("bench", help="units-per-competitor comparison table")
    p.add_argument("table", nargs="?", default=argparse.SUPPRESS)
    p.add_argument("--ours", default=argparse.SUPPRESS)
    p.add_argument("--format", choices=["text", "json", "csv"], default=argparse.SUPPRESS)
    common(p)
    return parser


def resolve_config(cmd: str, ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[cmd])
    cfg["figures"] = True
    provided = {k: v for k, v in vars(ns).items() if k != "cmd"}
    config_path = provided.pop("config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        if "config" in loaded and loaded.get("subcommand") == cmd:
            loaded = loaded["config"]  # a manifest from a previous run
        unknown = set(loaded) - set(cfg) - {"out"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
        cfg["config"] = str(config_path)
    if provided.pop("no_figures", False):
        cfg["figures"] = False
    out = provided.pop("out", None)
    if out is None:
        out = cfg.get("out") or os.environ.get("PHASOR_OUT") or "phasor-out"
    cfg.update(provided)
    cfg["out"] = str(out)
    return cfg


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_manifest(out: Path, cmd: str, cfg: dict, outputs: list[str]) -> None:
    manifest = {
        "tool": "phasor",
        "version": __version__,
        "subcommand": cmd,
        "config": {k: v for k, v in cfg.items() if k != "config"},
        "outputs": sorted(outputs),
    }
    _write_json(out / "manifest.json", manifest)


def _parse_complex(text) -> complex:
    return complex(str(text).replace(" ", ""))


def _weights_csv(w: np.ndarray) -> str:
    return "\n".join(",".join(repr(float(v)) for v in row) for row in np.atleast_2d(w)) + "\n"


def run_taper(cfg: dict, out: Path) -> int:
    spec = TaperSpec(cfg["n"], cfg["sll"], cfg["nbar"])
    line = taylor_line_taper(spec)
    w2d = planar_taper(line, line)
    dr_line = dynamic_range_db(line)
    dr_planar = float(20.0 * math.log10(w2d.max() / w2d.min()))
    (out / "weights.csv").write_text(_weights_csv(line.amplitudes), encoding="utf-8")
    (out / "weights_2d.csv").write_text(_weights_csv(w2d), encoding="utf-8")
    report = {
        "n_elements": cfg["n"],
        "sll_db": cfg["sll"],
        "n_bar": cfg["nbar"],
        "line_weights": [float(v) for v in line.amplitudes],
        "dynamic_range_line_db": dr_line,
        "dynamic_range_planar_db": dr_planar,
        "gain_control_range_db": dr_planar,
    }
    if cfg["states"]:
        span = cfg["state_span"] if cfg["state_span"] is not None else dr_planar
        states = GainStateSet.equispaced(cfg["states"], span)
        quant = quantize_weights(TaperWeights(w2d.ravel()), states)
        report["quantization"] = {
            "n_states": cfg["states"],
            "span_db": span,
            "max_residual_db": quant.max_residual_db,
        }
    _write_json(out / "taper_report.json", report)
    outputs = ["weights.csv", "weights_2d.csv", "taper_report.json"]
    if cfg["figures"]:
        from . import plots

        plots.save_taper_figure(out / "taper.png", line.amplitudes, w2d)
        outputs.append("taper.png")
    print(f"line taper dynamic range: {dr_line:.3f} dB")
    print(f"planar gain-control range: {dr_planar:.3f} dB")
    _write_manifest(out, "taper", cfg, outputs)
    return 0


def _load_weights_csv(path: str) -> np.ndarray:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            rows.append([float(v) for v in line.split(",")])
    return np.array(rows)


def _cut_csv(theta, phi_label, gain_dbi) -> str:
    lines = ["theta_deg,phi_deg,gain_dbi"]
    for t, v in zip(theta, gain_dbi):
        lines.append(f"{t:.6g},{phi_label:.6g},{v:.9g}")
    return "\n".join(lines) + "\n"


def run_pattern(cfg: dict, out: Path) -> int:
    if cfg["weights"]:
        w2d = _load_weights_csv(cfg["weights"])
    else:
        line = taylor_line_taper(TaperSpec(cfg["n"], cfg["sll"], cfg["nbar"]))
        w2d = planar_taper(line, line)
    geom = ArrayGeometry(w2d.shape[0], w2d.shape[1], cfg["pitch_mm"] * 1e-3)
    if cfg["isotropic"]:
        element = ElementPattern.isotropic_element()
    else:
        element = ElementPattern(
            g_max_dbi=cfg["element_gain_dbi"],
            theta_3db_deg=cfg["theta_3db"],
            phi_3db_deg=cfg["phi_3db"],
            sla_v_db=cfg["sla_v"],
            a_max_db=cfg["a_max"],
        )
    f_hz = cfg["freq_ghz"] * 1e9
    steer = (cfg["steer_theta"], cfg["steer_phi"])
    uniform = np.ones_like(w2d)

    d_tap, _ = array_directivity(geom, w2d, element, f_hz, steer,
                                 cfg["step_deg"], cfg["step_deg"])
    d_uni, _ = array_directivity(geom, uniform, element, f_hz, steer,
                                 cfg["step_deg"], cfg["step_deg"])

    outputs = []
    summary = {
        "frequency_hz": f_hz,
        "pitch_m": geom.pitch_m,
        "nx": geom.nx,
        "ny": geom.ny,
        "directivity_dbi": d_tap,
        "directivity_uniform_dbi": d_uni,
        "cuts": {},
    }
    cuts_fig = {}
    for phi in (0.0, 90.0):
        theta, db = principal_cut(geom, w2d, element, f_hz, phi, steer,
                                  step_deg=cfg["cut_step_deg"])
        name = f"cut_phi{int(phi)}.csv"
        # cut levels anchored at the pattern peak so the CSV carries dBi
        (out / name).write_text(_cut_csv(theta, phi, db + d_tap), encoding="utf-8")
        outputs.append(name)
        cuts_fig[f"tapered phi={phi:g}"] = (theta, db)
        try:
            table = sidelobe_levels(theta, db)
            lobes = [
                {"level_rel_db": lv, "angle_deg": ang} for lv, ang in table.lobes[:5]
            ]
            summary["cuts"][f"phi{int(phi)}"] = {
                "main_lobe_angle_deg": table.main_angle_deg,
                "worst_sidelobe_rel_db": table.worst_db,
                "top_sidelobes": lobes,
            }
        except NoSidelobes:
            summary["cuts"][f"phi{int(phi)}"] = {
                "main_lobe_angle_deg": float(theta[np.argmax(db)]),
                "worst_sidelobe_rel_db": None,
                "top_sidelobes": [],
            }
    theta_u, db_u = principal_cut(geom, uniform, element, f_hz, 0.0, steer,
                                  step_deg=cfg["cut_step_deg"])
    cuts_fig["uniform phi=0"] = (theta_u, db_u)
    table_u = sidelobe_levels(theta_u, db_u)
    summary["uniform_cut_phi0"] = {
        "worst_sidelobe_rel_db": table_u.worst_db,
    }
    _write_json(out / "pattern_summary.json", summary)
    outputs.append("pattern_summary.json")
    if cfg["figures"]:
        from . import plots

        plots.save_pattern_figure(out / "pattern.png", cuts_fig)
        outputs.append("pattern.png")
    print(f"directivity (tapered): {d_tap:.3f} dBi")
    print(f"directivity (uniform): {d_uni:.3f} dBi")
    worst = summary["cuts"]["phi0"]["worst_sidelobe_rel_db"]
    if worst is not None:
        print(f"worst side lobe, phi=0 cut: {worst:.2f} dB")
    _write_manifest(out, "pattern", cfg, outputs)
    return 0


def run_match(cfg: dict, out: Path) -> int:
    print("note: transformer inductances are interpreted in picohenries (pH).")
    transformer = CoupledInductor(
        l_p=cfg["lp_ph"] * 1e-12,
        l_s=cfg["ls_ph"] * 1e-12,
        k=cfg["k"],
        q_p=cfg["q_p"],
        q_s=cfg["q_s"],
        f_q_ref_hz=cfg["f0_ghz"] * 1e9,
    )
    z_an = _parse_complex(cfg["zan"])
    f0 = cfg["f0_ghz"] * 1e9
    design = synthesize_imn(z_an, transformer, f0, target_db=cfg["target_db"])
    lo, hi = (float(v) for v in str(cfg["span_ghz"]).split(":"))
    grid = FrequencyGrid(np.linspace(lo * 1e9, hi * 1e9, cfg["points"]))
    gamma_db = np.array(
        [
            20.0 * math.log10(max(abs(imn_input_reflection(design, z_an, f)), 1e-300))
            for f in grid.points
        ]
    )
    g0 = imn_input_reflection(design, z_an, f0)
    g0_db = 20.0 * math.log10(max(abs(g0), 1e-300))
    record = {
        "f0_hz": f0,
        "z_an": [z_an.real, z_an.imag],
        "c1_f": design.c1,
        "c3_f": design.c3,
        "l_p_h": transformer.l_p,
        "l_s_h": transformer.l_s,
        "k": transformer.k,
        "mutual_h": transformer.mutual,
        "z_im": [design.z_im.real, design.z_im.imag],
        "gamma_in_db_at_f0": g0_db,
        "insertion_loss_db_at_f0": float(insertion_loss_db(design, FrequencyGrid.single(f0))[0]),
        "units_note": "inductances interpreted in picohenries",
    }
    _write_json(out / "match_design.json", record)
    csv_lines = ["freq_hz,gamma_in_db"] + [
        f"{f:.9g},{g:.9g}" for f, g in zip(grid.points, gamma_db)
    ]
    (out / "gamma_sweep.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    outputs = ["match_design.json", "gamma_sweep.csv"]
    if cfg["figures"]:
        from . import plots

        plots.save_gamma_figure(out / "match.png", grid.points, gamma_db, f0,
                                cfg["target_db"])
        outputs.append("match.png")
    print(f"C1 = {design.c1 * 1e15:.2f} fF, C3 = {design.c3 * 1e15:.2f} fF")
    print(f"|Gamma_in| at f0: {g0_db:.1f} dB")
    print(f"Z_IM = {design.z_im.real:.2f}{design.z_im.imag:+.2f}j ohm")
    _write_manifest(out, "match", cfg, outputs)
    return 0


def run_zim(cfg: dict, out: Path) -> int:
    noise = NoiseSpec(cfg["fmin_db"], cfg["rn"], _parse_complex(cfg["gamma_opt"]))
    result = sweep_zim(
        _parse_complex(cfg["zan"]),
        noise,
        f0_hz=cfg["f0_ghz"] * 1e9,
        r_range=(cfg["rmin"], cfg["rmax"]),
        x_range=(cfg["xmin"], cfg["xmax"]),
        n_r=cfg["nr"],
        n_x=cfg["nx"],
        inductor_q=cfg["inductor_q"],
        capacitor_q=cfg["capacitor_q"],
        objective=cfg["objective"],
    )
    lines = ["r_ohm,x_ohm,nf_db"]
    for i, r in enumerate(result.r_values):
        for j, x in enumerate(result.x_values):
            v = result.nf_db[i, j]
            lines.append(f"{r:.9g},{x:.9g},{'' if math.isnan(v) else format(v, '.9g')}")
    (out / "nf_map.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    d = result.best_design
    best = {
        "objective": result.objective,
        "z_im": [result.best_z_im.real, result.best_z_im.imag],
        "nf_db": result.best_nf_db,
        "stage1": _section_record(result.best_stage1),
        "stage2": _section_record(result.best_stage2),
        "c1_f": d.c1,
        "c3_f": d.c3,
        "l_p_h": d.transformer.l_p,
        "l_s_h": d.transformer.l_s,
    }
    _write_json(out / "zim_best.json", best)
    outputs = ["nf_map.csv", "zim_best.json"]
    if cfg["figures"]:
        from . import plots

        plots.save_nf_map_figure(out / "zim.png", result.r_values, result.x_values,
                                 result.nf_db, result.best_z_im)
        outputs.append("zim.png")
    print(f"best Z_IM = {result.best_z_im.real:.2f}{result.best_z_im.imag:+.2f}j ohm")
    print(f"best cascade NF = {result.best_nf_db:.3f} dB ({result.objective} objective)")
    _write_manifest(out, "zim", cfg, outputs)
    return 0


def _section_record(section) -> dict:
    return {
        "topology": section.topology,
        "series": {"kind": section.series_element.kind,
                   "value": section.series_element.value,
                   "q": section.series_element.q},
        "shunt": {"kind": section.shunt_element.kind,
                  "value": section.shunt_element.value,
                  "q": section.shunt_element.q},
    }


def _load_chain(path: str) -> list[StageSpec]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    stages = []
    for st in doc["stages"]:
        states = tuple(
            GainState(
                label=s.get("label", f"s{i}"),
                gain_db=float(s["gain_db"]),
                nf_db=float(s["nf_db"]),
                pc_mw=float(s.get("pc_mw", 0.0)),
                ip1db_dbm=s.get("ip1db_dbm"),
                iip3_dbm=s.get("iip3_dbm"),
                control_voltage=s.get("control_voltage"),
            )
            for i, s in enumerate(st["states"])
        )
        stages.append(StageSpec(st["name"], states, int(st.get("selected", 0))))
    if not stages:
        raise EmptyChain("chain document lists no stages")
    return stages


def run_budget(cfg: dict, out: Path) -> int:
    if not cfg["chain"]:
        raise ValueError("budget needs a chain JSON path")
    stages = _load_chain(cfg["chain"])
    result = chain_budget(stages, cfg["voltage_addition"])
    cum_gain, cum_nf, names = [], [], []
    for k in range(1, len(stages) + 1):
        nf_k, g_k = friis_cascade(stages[:k])
        names.append(stages[k - 1].name)
        cum_gain.append(g_k)
        cum_nf.append(nf_k)
    record = {
        "stages": [
            {"name": s.name, "state": s.state.label, "gain_db": s.state.gain_db,
             "nf_db": s.state.nf_db, "iip3_dbm": s.state.iip3_dbm,
             "pc_mw": s.state.pc_mw}
            for s in stages
        ],
        "total_gain_db": result.total_gain_db,
        "total_nf_db": result.total_nf_db,
        "total_iip3_dbm": result.total_iip3_dbm,
        "total_ip1db_dbm": result.total_ip1db_dbm,
        "total_pc_mw": result.total_pc_mw,
        "cumulative_gain_db": cum_gain,
        "cumulative_nf_db": cum_nf,
    }
    _write_json(out / "budget.json", record)
    rows = [["stage", "state", "gain_db", "nf_db", "iip3_dbm", "pc_mw"]]
    for s in stages:
        st = s.state
        rows.append([s.name, st.label, f"{st.gain_db:.2f}", f"{st.nf_db:.2f}",
                     "-" if st.iip3_dbm is None else f"{st.iip3_dbm:.2f}",
                     f"{st.pc_mw:.3f}"])
    rows.append(["TOTAL", "-", f"{result.total_gain_db:.2f}",
                 f"{result.total_nf_db:.2f}",
                 "-" if result.total_iip3_dbm is None else f"{result.total_iip3_dbm:.2f}",
                 f"{result.total_pc_mw:.3f}"])
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    text = "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows) + "\n"
    (out / "budget.txt").write_text(text, encoding="utf-8")
    outputs = ["budget.json", "budget.txt"]
    if cfg["figures"]:
        from . import plots

        plots.save_budget_figure(out / "budget.png", names, cum_gain, cum_nf)
        outputs.append("budget.png")
    if cfg["format"] == "json":
        print(json.dumps(record, indent=2, sort_keys=True))
    elif cfg["format"] == "csv":
        print("\n".join(",".join(r) for r in rows))
    else:
        print(text, end="")
    _write_manifest(out, "budget", cfg, outputs)
    return 0


def run_extract(cfg: dict, out: Path) -> int:
    if not cfg["s2p"]:
        raise ValueError("extract needs a .s2p path")
    path = Path(cfg["s2p"])
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    ds = parse_touchstone(path.read_text(encoding="utf-8"))
    nf_table = None
    if cfg["nf"]:
        nf_table = load_nf_csv(Path(cfg["nf"]).read_text(encoding="utf-8"))
    metrics = extract_metrics(ds, nf_table)
    record = {
        "source": str(path),
        "peak_gain_db": metrics.peak_gain_db,
        "f_c_hz": metrics.f_c_hz,
        "bw3db_hz": metrics.bw3db_hz,
        "min_nf_db": metrics.min_nf_db,
        "s12_max_db": metrics.s12_max_db,
        "band_edge_peak": metrics.band_edge_peak,
    }
    outputs = ["metrics.json"]
    fit = None
    sweep = None
    if cfg["two_tone"]:
        sweep = load_two_tone_csv(Path(cfg["two_tone"]).read_text(encoding="utf-8"))
        fit = fit_two_tone(sweep)
        threshold = cfg["ip1db_req_dbm"]
        record["linearity"] = {
            "iip3_dbm": fit.iip3_dbm,
            "ip1db_dbm": fit.ip1db_dbm,
            "small_signal_gain_db": fit.small_signal_gain_db,
            "points_used": fit.points_used,
            "fund_slope_free": fit.fund_slope_free,
            "im3_slope_free": fit.im3_slope_free,
            "ip1db_requirement_dbm": threshold,
            "meets_ip1db_requirement": (
                None if fit.ip1db_dbm is None else bool(fit.ip1db_dbm >= threshold)
            ),
        }
    _write_json(out / "metrics.json", record)
    if cfg["figures"]:
        from . import plots

        with np.errstate(divide="ignore"):
            s21_db = 20.0 * np.log10(np.abs(ds.values[:, 1, 0]) + 1e-300)
            s12_db = 20.0 * np.log10(np.abs(ds.values[:, 0, 1]) + 1e-300)
        plots.save_sparam_figure(out / "extract.png", ds.freqs_hz, s21_db, s12_db, metrics)
        outputs.append("extract.png")
        if fit is not None:
            plots.save_two_tone_figure(out / "two_tone.png", sweep, fit)
            outputs.append("two_tone.png")
    print(f"peak gain {metrics.peak_gain_db:.2f} dB at {metrics.f_c_hz / 1e9:.3f} GHz, "
          f"BW3dB {metrics.bw3db_hz / 1e9:.3f} GHz")
    if fit is not None and fit.iip3_dbm is not None:
        print(f"IIP3 {fit.iip3_dbm:.2f} dBm, IP1dB "
              f"{'n/a' if fit.ip1db_dbm is None else format(fit.ip1db_dbm, '.2f')} dBm")
    _write_manifest(out, "extract", cfg, outputs)
    return 0


def load_benchmark_csv(text: str) -> list[BenchmarkEntry]:
    """Long-format benchmark table: one row per (work, state), high state first.

    Header: work,state,peak_gain_db,fc_ghz,bw3db_ghz,min_nf_db,ip1db_dbm,
    ang_s21_var_deg,pc_mw,core_area_mm2.  Empty cells mean unpublished.
    """
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    header = [h.strip().lower() for h in lines[0].split(",")]
    required = {"work", "state", "pc_mw"}
    if not required <= set(header):
        raise ValueError(f"benchmark CSV must carry columns {sorted(required)}")
    idx = {name: header.index(name) for name in header}
    order: list[str] = []
    data: dict[str, dict] = {}
    for line in lines[1:]:
        cells = [c.strip() for c in line.split(",")]
        work = cells[idx["work"]]
        if work not in data:
            order.append(work)
            data[work] = {"pc": [], "gain": [], "nf": [], "ip1db": [], "extra": {}}

        def get(col):
            if col not in idx or idx[col] >= len(cells) or cells[idx[col]] == "":
                return None
            return float(cells[idx[col]])

        ang = get("ang_s21_var_deg")
        if ang is not None:  # carried through to reports, not modeled
            data[work]["extra"]["ang_s21_var_deg"] = ang
        pc = get("pc_mw")
        if pc is None:
            continue  # states without published power do not enter the FOM
        data[work]["pc"].append(pc)
        data[work]["gain"].append(get("peak_gain_db"))
        data[work]["nf"].append(get("min_nf_db"))
        data[work]["ip1db"].append(get("ip1db_dbm"))
    return [
        BenchmarkEntry(
            name=w,
            pc_mw=tuple(data[w]["pc"]),
            peak_gain_db=tuple(data[w]["gain"]),
            min_nf_db=tuple(data[w]["nf"]),
            ip1db_dbm=tuple(data[w]["ip1db"]),
            extra=data[w]["extra"],
        )
        for w in order
    ]


def run_bench(cfg: dict, out: Path) -> int:
    if not cfg["table"]:
        raise ValueError("bench needs a benchmark CSV path")
    entries = load_benchmark_csv(Path(cfg["table"]).read_text(encoding="utf-8"))
    by_name = {e.name: e for e in entries}
    rows = benchmark_fom(entries, cfg["ours"])
    record = {
        "ours": cfg["ours"],
        "rows": [
            {
                "theirs": r.theirs,
                "their_pc_mw": list(r.their_pc_mw),
                "our_pc_mw": list(r.our_pc_mw),
                "units_high": r.units_high,
                "units_worst": r.units_worst,
                "ang_s21_var_deg": by_name[r.theirs].extra.get("ang_s21_var_deg"),
            }
            for r in rows
        ],
    }
    _write_json(out / "bench.json", record)
    table_rows = [["work", "pc_high_mw", "pc_low_mw", "units_high", "units_worst"]]
    for r in rows:
        low = f"{min(r.their_pc_mw):.3g}" if len(r.their_pc_mw) > 1 else "-"
        table_rows.append([r.theirs, f"{r.their_pc_mw[0]:.3g}", low,
                           str(r.units_high), str(r.units_worst)])
    widths = [max(len(row[i]) for row in table_rows) for i in range(5)]
    text = "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths))
                     for row in table_rows) + "\n"
    (out / "bench.txt").write_text(text, encoding="utf-8")
    outputs = ["bench.json", "bench.txt"]
    if cfg["figures"]:
        from . import plots

        names = [e.name for e in entries]
        pc_hi = [e.pc_mw[0] for e in entries]
        pc_lo = [e.pc_mw[1] if len(e.pc_mw) > 1 else None for e in entries]
        plots.save_bench_figure(out / "bench.png", names, pc_hi, pc_lo, cfg["ours"])
        outputs.append("bench.png")
    if cfg["format"] == "json":
        print(json.dumps(record, indent=2, sort_keys=True))
    elif cfg["format"] == "csv":
        print("\n".join(",".join(r) for r in table_rows))
    else:
        print(text, end="")
    for r in rows:
        print(f">= {r.units_high} units vs {r.theirs}")
    _write_manifest(out, "bench", cfg, outputs)
    return 0


DISPATCH = {
    "taper": run_taper,
    "pattern": run_pattern,
    "match": run_match,
    "zim": run_zim,
    "budget": run_budget,
    "extract": run_extract,
    "bench": run_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse printed usage/help already
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns.cmd, ns)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        return DISPATCH[ns.cmd](cfg, out)
    except INFEASIBLE_ERRORS as exc:
        print(f"phasor {ns.cmd}: infeasible: {exc}", file=sys.stderr)
        return 3
    except VALIDATION_ERRORS as exc:
        print(f"phasor {ns.cmd}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

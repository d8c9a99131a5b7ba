"""Receive-chain cascade budgets (gain, noise, linearity, power) and the
units-per-competitor benchmarking arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .taper import GainStateSet, InsufficientSpan, TaperWeights, quantize_weights

#: Input 1 dB compression sits this far below IIP3 for a memoryless cubic:
#: 10*log10(1 - 10^(-1/20)).
P1DB_FROM_IIP3_DB = 10.0 * math.log10(1.0 - 10.0 ** (-1.0 / 20.0))


class EmptyChain(ValueError):
    """A cascade of zero stages has no budget."""


class MissingIip3(ValueError):
    """A stage in an IIP3 cascade does not define iip3_dbm."""


@dataclass(frozen=True)
class GainState:
    """One discrete operating state of a variable-gain stage."""

    label: str
    gain_db: float
    nf_db: float
    pc_mw: float = 0.0
    ip1db_dbm: float | None = None
    iip3_dbm: float | None = None
    control_voltage: float | None = None  # metadata only

    def __post_init__(self):
        if self.pc_mw < 0.0:
            raise ValueError("power consumption must be >= 0")
        if (
            self.ip1db_dbm is not None
            and self.iip3_dbm is not None
            and not self.ip1db_dbm < self.iip3_dbm
        ):
            raise ValueError("ip1db_dbm must be below iip3_dbm")


@dataclass(frozen=True)
class StageSpec:
    """A chain element with its available states and the active selection."""

    name: str
    states: tuple[GainState, ...]
    selected: int = 0

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise ValueError("stage needs at least one state")
        if not 0 <= self.selected < len(self.states):
            raise ValueError("selected state out of range")

    @property
    def state(self) -> GainState:
        return self.states[self.selected]


@dataclass(frozen=True)
class ChainBudget:
    total_gain_db: float
    total_nf_db: float
    total_iip3_dbm: float | None
    total_ip1db_dbm: float | None
    total_pc_mw: float


def friis_cascade(stages: list[StageSpec]) -> tuple[float, float]:
    """Total noise figure and gain in dB of the selected states.

    Linear-domain accumulation: F = F1 + sum_i (Fi - 1) / prod_{j<i} Gj.
    """
    if not stages:
        raise EmptyChain("no stages")
    f_total = 0.0
    g_running = 1.0
    for stage in stages:
        st = stage.state
        f_i = 10.0 ** (st.nf_db / 10.0)
        if f_total == 0.0:
            f_total = f_i
        else:
            f_total += (f_i - 1.0) / g_running
        g_running *= 10.0 ** (st.gain_db / 10.0)
    return 10.0 * math.log10(f_total), 10.0 * math.log10(g_running)


def iip3_cascade(stages: list[StageSpec], voltage_addition: bool = False) -> float:
    """Input-referred third-order intercept of the chain in dBm.

    Default combines stage contributions in linear power:
    1/iip3_tot = sum_i (prod_{j<i} g_j) / iip3_i, everything in mW.
    ``voltage_addition`` switches to the fully coherent amplitude form
    (square-root terms), which is the more pessimistic budget.
    """
    if not stages:
        raise EmptyChain("no stages")
    inv = 0.0
    g_running = 1.0
    for stage in stages:
        st = stage.state
        if st.iip3_dbm is None:
            raise MissingIip3(f"stage '{stage.name}' state '{st.label}' lacks iip3_dbm")
        iip3_mw = 10.0 ** (st.iip3_dbm / 10.0)
        term = g_running / iip3_mw
        inv += math.sqrt(term) if voltage_addition else term
        g_running *= 10.0 ** (st.gain_db / 10.0)
    total_mw = (1.0 / inv) ** 2 if voltage_addition else 1.0 / inv
    return 10.0 * math.log10(total_mw)


def p1db_from_iip3(iip3_dbm: float) -> float:
    """Input 1 dB compression from IIP3, exact for a memoryless cubic."""
    if not math.isfinite(iip3_dbm):
        raise ValueError("iip3_dbm must be finite")
    return iip3_dbm + P1DB_FROM_IIP3_DB


def power_total(stages: list[StageSpec]) -> float:
    """Sum of the selected states' power consumption in mW."""
    return sum(stage.state.pc_mw for stage in stages)


def chain_budget(stages: list[StageSpec], voltage_addition: bool = False) -> ChainBudget:
    """Full cascade budget of the selected states."""
    nf_db, gain_db = friis_cascade(stages)
    try:
        iip3 = iip3_cascade(stages, voltage_addition)
        ip1db = p1db_from_iip3(iip3)
    except MissingIip3:
        iip3 = None
        ip1db = None
    return ChainBudget(gain_db, nf_db, iip3, ip1db, power_total(stages))


@dataclass(frozen=True)
class BenchmarkEntry:
    """Named per-state metric record, high-gain state first by convention."""

    name: str
    pc_mw: tuple[float, ...]
    peak_gain_db: tuple[float | None, ...] = ()
    min_nf_db: tuple[float | None, ...] = ()
    ip1db_dbm: tuple[float | None, ...] = ()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pc_mw", tuple(float(p) for p in self.pc_mw))
        if not self.pc_mw:
            raise ValueError("each record needs power consumption for >= 1 state")
        if any(p <= 0.0 for p in self.pc_mw):
            raise ValueError("power consumption must be > 0")


@dataclass(frozen=True)
class BenchmarkRow:
    """Units-per-competitor ratios of one design pair.

    ``units_high`` divides the competitors' high-gain-state power by ours;
    ``units_worst`` divides their lowest-power state by our highest-power
    state (the least favorable pairing).
    """

    ours: str
    theirs: str
    our_pc_mw: tuple[float, ...]
    their_pc_mw: tuple[float, ...]
    units_high: int
    units_worst: int


def benchmark_fom(entries: list[BenchmarkEntry], ours: str) -> list[BenchmarkRow]:
    """Compare one design's power consumption against every other entry."""
    by_name = {e.name: e for e in entries}
    if ours not in by_name:
        raise ValueError(f"unknown design '{ours}'")
    mine = by_name[ours]
    rows = []
    for entry in entries:
        if entry.name == ours:
            continue
        rows.append(
            BenchmarkRow(
                ours=ours,
                theirs=entry.name,
                our_pc_mw=mine.pc_mw,
                their_pc_mw=entry.pc_mw,
                units_high=math.floor(entry.pc_mw[0] / mine.pc_mw[0]),
                units_worst=math.floor(min(entry.pc_mw) / max(mine.pc_mw)),
            )
        )
    return rows


def linear_power_states(
    n_states: int,
    gain_hi_db: float = 15.7,
    pc_hi_mw: float = 0.91,
    gain_lo_db: float = 8.1,
    pc_lo_mw: float = 0.40,
) -> tuple[GainState, ...]:
    """Gain states with power interpolated linearly in dB-gain.

    Only the two endpoint states are published figures; intermediate states
    are an explicit linear model between them.
    """
    if n_states < 2:
        raise ValueError("need at least 2 states")
    gains = np.linspace(gain_lo_db, gain_hi_db, n_states)
    slope = (pc_hi_mw - pc_lo_mw) / (gain_hi_db - gain_lo_db)
    return tuple(
        GainState(
            label=f"s{i}",
            gain_db=float(g),
            nf_db=0.0,
            pc_mw=float(pc_lo_mw + slope * (g - gain_lo_db)),
        )
        for i, g in enumerate(gains)
    )


@dataclass(frozen=True, eq=False)
class TaperBudget:
    """Per-element state assignment for a tapered array and its power total."""

    state_indices: np.ndarray  # same shape as the weight matrix
    residuals_db: np.ndarray
    total_pc_mw: float
    all_max_pc_mw: float

    @property
    def savings_mw(self) -> float:
        return self.all_max_pc_mw - self.total_pc_mw

    @property
    def savings_fraction(self) -> float:
        return self.savings_mw / self.all_max_pc_mw


def taper_budget(
    weights_2d: np.ndarray, stage: StageSpec, tolerance_db: float = 0.5
) -> TaperBudget:
    """Assign every array element a gain state and total the power draw.

    The element weights are quantized onto the stage's states (largest weight
    anchored at the highest-gain state); power is the sum of the assigned
    states' pc_mw, reported against the all-elements-at-maximum baseline.
    Raises InsufficientSpan when the state set cannot cover the taper range.
    """
    w = np.asarray(weights_2d, dtype=float)
    gains = np.array([s.gain_db for s in stage.states])
    order = np.argsort(gains)
    if np.any(np.diff(gains[order]) <= 0.0):
        raise ValueError("stage states must have distinct gains")
    states = GainStateSet(gains[order])
    quant = quantize_weights(TaperWeights(w.ravel() / w.max()), states, tolerance_db)
    stage_idx = order[quant.state_indices]
    pc = np.array([s.pc_mw for s in stage.states])[stage_idx]
    top = stage.states[int(order[-1])].pc_mw
    return TaperBudget(
        state_indices=stage_idx.reshape(w.shape),
        residuals_db=quant.residuals_db.reshape(w.shape),
        total_pc_mw=float(pc.sum()),
        all_max_pc_mw=float(top * w.size),
    )

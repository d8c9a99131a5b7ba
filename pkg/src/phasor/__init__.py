"""phasor: design and verification toolkit for tapered mm-wave phased-array
receive chains.

Subpackages by concern: :mod:`phasor.network` (two-port algebra and noise),
:mod:`phasor.taper` (Taylor taper synthesis and quantization),
:mod:`phasor.pattern` (array factor, directivity, side lobes),
:mod:`phasor.matching` (L-sections and the coupled-pair input match),
:mod:`phasor.budget` (cascade gain/NF/IIP3/power budgets),
:mod:`phasor.touchstone` (Touchstone v1 I/O and measured-metric extraction),
:mod:`phasor.cli` (the ``phasor`` command).
"""

__version__ = "0.1.0"

from .network import (
    FrequencyGrid,
    Immittance,
    NoiseSpec,
    TwoPortNetwork,
    cascade,
    input_reflection,
    noise_figure_at_source,
    noise_temperature,
    transducer_gain,
)
from .taper import (
    GainStateSet,
    TaperSpec,
    TaperWeights,
    dynamic_range_db,
    planar_taper,
    quantize_weights,
    taylor_line_taper,
)
from .pattern import (
    ArrayGeometry,
    ElementPattern,
    RadiationPattern,
    array_directivity,
    array_factor,
    element_gain_dbi,
    principal_cut,
    sidelobe_levels,
)
from .matching import (
    CoupledInductor,
    LSection,
    MatchingNetworkDesign,
    coupled_inductor_twoport,
    insertion_loss_db,
    l_match,
    sweep_zim,
    synthesize_imn,
)
from .budget import (
    BenchmarkEntry,
    ChainBudget,
    GainState,
    StageSpec,
    benchmark_fom,
    chain_budget,
    friis_cascade,
    iip3_cascade,
    p1db_from_iip3,
    power_total,
    taper_budget,
)
from .touchstone import (
    LinearityFit,
    MeasuredMetrics,
    TouchstoneDataset,
    TwoToneSweep,
    extract_metrics,
    fit_two_tone,
    parse_touchstone,
    write_touchstone,
)

"""Photon click statistics behind a saturable two-detector stage, and
the single-emitter test built on them."""

from .analytic import (
    SourceDistribution,
    binomial_source,
    double_molecule_stats,
    expected_stats,
    g2_zero_estimate,
    hbt_transform,
    mandel_q,
    multi_emitter_stats,
    poisson_source,
    sbr_from_stats,
    single_with_background_stats,
    stats_from_sb,
)
from .criterion import (
    CriticalValues,
    boundary_eta,
    classify,
    classify_counts,
    corrected_critical_values,
    sbr_threshold,
    setup_sbr,
    uncorrected_bounds,
)
from .deviations import (
    DeviationReport,
    deviation_report,
    relative_deviations,
    sampling_fluctuation,
    systematic_deviation,
    unbalanced_stats,
)
from .model import (
    ClickCounts,
    Coherent,
    ConvergenceError,
    Decision,
    DetectionParams,
    EmitterWithBackground,
    FormatError,
    GateError,
    IdealEmitters,
    PhotonStats,
    RangeError,
    SbrNotApplicable,
    SourceModel,
    Verdict,
    stats_from_counts,
)
from .simulate import (
    SimConfig,
    counts_from_click_arrays,
    simulate_click_arrays,
    simulate_pulses,
)
from .timetags import (
    ClickRecord,
    GateConfig,
    ingest_arrays,
    ingest_records,
    is_counts_block,
    read_counts_block,
    read_sim_config,
    read_timetags_binary,
    read_timetags_csv,
    records_from_click_arrays,
    write_counts_block,
    write_timetags_binary,
    write_timetags_csv,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""Beam-splitter quantum random number generator: simulation and analysis.

Analytic photon statistics for interfering and non-interfering weak coherent
sources on a 50/50 splitter, a seeded Monte Carlo gate simulator, bit-stream
extraction with von Neumann debiasing, and a block-wise statistical
randomness battery.
"""

from .detection import (
    DetectorPair,
    OutcomeProbabilities,
    click_probability,
    folding_equivalence_check,
    outcome_probabilities,
    throughput,
)
from .fock import (
    AmplitudeMap,
    JointPhotonDistribution,
    OccupationPair,
    SourceKind,
    SourceModel,
    TruncationError,
    TruncationPolicy,
    bs_output_amplitudes,
    coincidence_contrast,
    output_joint_distribution,
    poisson_pair_pmf,
    truncation_bound,
)
from .mcsim import (
    EventRecord,
    EventTally,
    Outcome,
    ResourceLimitError,
    SimConfig,
    run,
    sample_bs_outcome,
    sample_gate,
)
from .postproc import (
    BitStream,
    StreamStats,
    debias,
    events_to_bits,
    stream_stats,
    von_neumann,
)
from .randtests import (
    BatteryParams,
    InsufficientDataError,
    TestReport,
    approximate_entropy,
    block_frequency,
    cumulative_sums,
    frequency_monobit,
    longest_run_of_ones,
    run_battery,
    runs,
    serial,
)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeMap",
    "BatteryParams",
    "BitStream",
    "DetectorPair",
    "EventRecord",
    "EventTally",
    "InsufficientDataError",
    "JointPhotonDistribution",
    "OccupationPair",
    "Outcome",
    "OutcomeProbabilities",
    "ResourceLimitError",
    "SimConfig",
    "SourceKind",
    "SourceModel",
    "StreamStats",
    "TestReport",
    "TruncationError",
    "TruncationPolicy",
    "approximate_entropy",
    "block_frequency",
    "bs_output_amplitudes",
    "click_probability",
    "coincidence_contrast",
    "cumulative_sums",
    "debias",
    "events_to_bits",
    "folding_equivalence_check",
    "frequency_monobit",
    "longest_run_of_ones",
    "outcome_probabilities",
    "output_joint_distribution",
    "poisson_pair_pmf",
    "run",
    "run_battery",
    "runs",
    "sample_bs_outcome",
    "sample_gate",
    "serial",
    "stream_stats",
    "throughput",
    "truncation_bound",
    "von_neumann",
]

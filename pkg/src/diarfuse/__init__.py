"""Combination of speaker diarization hypotheses by label mapping and voting."""

__version__ = "0.1.0"

from .combine import CombineOptions, Combination, combine, combine_recordings
from .errors import (
    CapacityError,
    ConfigError,
    DiarFuseError,
    InconsistentRecordingsError,
    MappingError,
    RTTMParseError,
    UndefinedMetricError,
    ValidationError,
)
from .mapping import (
    CostTensor,
    LabelMapping,
    RankWeights,
    apply_mapping,
    build_cost_tensor,
    dover_incremental_map,
    global_map,
    greedy_kpartite_map,
    hungarian,
    rank_hypotheses,
)
from .rttm_io import EPSILON, Hypothesis, Turn, UEMRegion, dump_rttm, load_rttm, parse_rttm, parse_uem, write_rttm
from .scoring import DERReport, average_pairwise_der, der
from .synth import PerturbConfig, SynthConfig, generate_reference, make_ensemble, perturb
from .timeline import (
    OverlapMatrix,
    Region,
    build_regions,
    overlap_fraction,
    pairwise_overlap,
    regions_to_turns,
    speaker_durations,
)
from .voting import doverlap_vote, dover_vote, estimate_speaker_count

"""Volumetric segmentation evaluation and challenge-ranking toolkit.

Scores 3-D tumour segmentations with Dice and 95th-percentile Hausdorff
distance under the BraTS empty-region conventions, ranks algorithm pools
case by case ("rank then aggregate"), optimizes enhancing-tumour removal
thresholds, ensembles probability maps, and reads and writes a NIfTI-1
subset.  The ``voxeval`` command line tool batches all of it over CSV
manifests.
"""

from .aggregate import SummaryStats, percentile, summarize
from .ensemble import average_probs, ensemble_predict, two_level_ensemble
from .errors import FormatError, ValidationError
from .io import (
    VolumeHeader,
    read_label_volume,
    read_probability_volume,
    read_volume,
    write_label_volume,
    write_volume,
)
from .metrics import (
    DEFAULT_POLICY,
    MetricRecord,
    SpecialCase,
    SpecialCasePolicy,
    dice,
    evaluate_case,
    hd95,
    soft_dice,
    surface_distances,
)
from .postprocess import (
    ThresholdChoice,
    ThresholdSweepResult,
    apply_et_threshold,
    default_candidates,
    optimize_threshold,
    sweep_thresholds,
)
from .ranking import (
    MetricTable,
    RankFlip,
    RankResult,
    StabilityReport,
    brats_ranking,
    jackknife_stability,
    rank_column,
)
from .volume import (
    DEFAULT_CODING,
    REGIONS,
    LabelCoding,
    LabelVolume,
    RegionMaskSet,
    RegionProbSet,
    Spacing,
    binarize_regions,
    labels_to_regions,
    region_volume_mm3,
    regions_to_labels,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CODING",
    "DEFAULT_POLICY",
    "FormatError",
    "LabelCoding",
    "LabelVolume",
    "MetricRecord",
    "MetricTable",
    "RankFlip",
    "RankResult",
    "RegionMaskSet",
    "RegionProbSet",
    "REGIONS",
    "Spacing",
    "SpecialCase",
    "SpecialCasePolicy",
    "StabilityReport",
    "SummaryStats",
    "ThresholdChoice",
    "ThresholdSweepResult",
    "ValidationError",
    "VolumeHeader",
    "apply_et_threshold",
    "average_probs",
    "binarize_regions",
    "brats_ranking",
    "default_candidates",
    "dice",
    "ensemble_predict",
    "evaluate_case",
    "hd95",
    "jackknife_stability",
    "labels_to_regions",
    "optimize_threshold",
    "percentile",
    "rank_column",
    "read_label_volume",
    "read_probability_volume",
    "read_volume",
    "region_volume_mm3",
    "regions_to_labels",
    "soft_dice",
    "summarize",
    "surface_distances",
    "sweep_thresholds",
    "two_level_ensemble",
    "write_label_volume",
    "write_volume",
    "__version__",
]

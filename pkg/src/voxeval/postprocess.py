"""Enhancing-tumour removal below a volume threshold, with optimization.

On data where many references contain no enhancing tumour, a small false
positive trades a perfect (Dice 1, HD95 0) score for the worst one, so it
can pay off to drop tiny enhancing predictions altogether.  Removal is
all-or-nothing: if the predicted enhancing volume is below the threshold,
every enhancing voxel is relabelled to necrosis, which leaves the whole
tumour and tumour core regions untouched.

The threshold is optimized over a labelled dataset by two criteria, once
by maximizing the mean enhancing-tumour Dice and once by minimizing the
ranking score of a pool in which each candidate threshold acts as one
pseudo-algorithm; callers pick whichever suits their deployment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .metrics import DEFAULT_POLICY, SpecialCasePolicy, evaluate_case
from .ranking import MetricTable, brats_ranking
from .volume import LabelVolume, _freeze, region_volume_mm3

#: Added to each observed ET volume when building default candidates, so the
#: sweep contains a threshold just above every achievable removal pattern.
DEFAULT_EPSILON_MM3 = 0.5

_ET_INDEX = 2  # position of ET in canonical region order


def apply_et_threshold(pred: LabelVolume, threshold_mm3: float) -> LabelVolume:
    """Remove all enhancing tumour if its volume falls below a threshold.

    Args:
        pred: predicted segmentation.
        threshold_mm3: nonnegative volume threshold in cubic millimetres.
            The comparison is strict, so 0 never removes anything.

    Returns:
        ``pred`` itself when the enhancing volume reaches the threshold
        (or there is nothing to remove); otherwise a new volume with every
        enhancing voxel relabelled to the necrosis code.
    """
    threshold_mm3 = float(threshold_mm3)
    if threshold_mm3 < 0.0:
        raise ValidationError(f"threshold must be nonnegative, got {threshold_mm3}")
    et = pred.data == pred.coding.enhancing
    if not et.any():
        return pred
    if region_volume_mm3(et, pred.spacing) >= threshold_mm3:
        return pred
    relabeled = pred.data.copy()
    relabeled[et] = pred.coding.necrosis
    return LabelVolume(relabeled, pred.spacing, pred.coding)


@dataclass(frozen=True, eq=False)
class ThresholdSweepResult:
    """Per-candidate outcomes of an enhancing-threshold sweep.

    For each candidate threshold (strictly increasing): the mean ET Dice
    over all cases, how many cases score the perfect ET pair, how many the
    worst pair, and the candidate's ranking score in the pseudo-algorithm
    pool.
    """

    thresholds: tuple[float, ...]
    mean_et_dice: np.ndarray
    perfect_counts: np.ndarray
    worst_counts: np.ndarray
    ranking_scores: np.ndarray
    n_cases: int

    def __post_init__(self) -> None:
        thresholds = tuple(float(t) for t in self.thresholds)
        if not thresholds:
            raise ValidationError("sweep needs at least one threshold")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ValidationError("thresholds must be strictly increasing")
        n = len(thresholds)
        arrays = {}
        for name, dtype in (
            ("mean_et_dice", np.float64),
            ("perfect_counts", np.int64),
            ("worst_counts", np.int64),
            ("ranking_scores", np.float64),
        ):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            if arr.shape != (n,):
                raise ValidationError(
                    f"{name} must have one entry per threshold, got shape {arr.shape}"
                )
            arrays[name] = arr
        if self.n_cases < 1:
            raise ValidationError("sweep needs at least one case")
        counts = arrays["perfect_counts"] + arrays["worst_counts"]
        if counts.max() > self.n_cases:
            raise ValidationError("special-case counts exceed the number of cases")
        object.__setattr__(self, "thresholds", thresholds)
        for name, arr in arrays.items():
            object.__setattr__(self, name, _freeze(arr))


@dataclass(frozen=True)
class ThresholdChoice:
    """The two optimized thresholds, one per selection criterion."""

    best_by_dice: float
    best_by_rank: float

    def by(self, criterion: str) -> float:
        """Return the threshold chosen by ``criterion`` ("dice" or "rank")."""
        if criterion == "dice":
            return self.best_by_dice
        if criterion == "rank":
            return self.best_by_rank
        raise ValidationError(
            f"criterion must be 'dice' or 'rank', got {criterion!r}"
        )


def default_candidates(
    cases: Sequence[tuple[LabelVolume, LabelVolume]],
    epsilon_mm3: float = DEFAULT_EPSILON_MM3,
) -> tuple[float, ...]:
    """Candidate grid realizing every achievable removal pattern.

    Contains 0, every distinct predicted enhancing volume in the dataset,
    and each such volume plus ``epsilon_mm3`` (just above it, so the
    corresponding prediction gets removed).
    """
    values = {0.0}
    for _, pred in cases:
        et = pred.data == pred.coding.enhancing
        volume = region_volume_mm3(et, pred.spacing)
        values.add(volume)
        values.add(volume + float(epsilon_mm3))
    return tuple(sorted(values))


def sweep_thresholds(
    cases: Sequence[tuple[LabelVolume, LabelVolume]],
    candidates: Sequence[float] | None = None,
    policy: SpecialCasePolicy = DEFAULT_POLICY,
) -> ThresholdSweepResult:
    """Evaluate every candidate threshold over a labelled dataset.

    Each candidate is applied to every prediction and the cases are
    rescored.  Besides per-candidate mean ET Dice and counts of perfect
    and worst ET scores, each candidate is ranked against the others as a
    pseudo-algorithm on the ET columns only, yielding a ranking score per
    candidate.

    Args:
        cases: (reference, prediction) pairs.
        candidates: explicit threshold grid; deduplicated and sorted.
            Defaults to :func:`default_candidates` over the dataset.
        policy: empty-region scoring policy, also defines the perfect and
            worst score pairs being counted.

    Returns:
        A :class:`ThresholdSweepResult` aligned with the sorted candidates.
    """
    cases = list(cases)
    if not cases:
        raise ValidationError("sweep needs at least one (reference, prediction) pair")
    if candidates is None:
        grid = default_candidates(cases)
    else:
        grid = tuple(sorted({float(c) for c in candidates}))
        if not grid:
            raise ValidationError("candidate list must be nonempty")

    n_cases = len(cases)
    dice = np.empty((len(grid), n_cases, 1))
    hd = np.empty((len(grid), n_cases, 1))
    perfect = np.zeros(len(grid), dtype=np.int64)
    worst = np.zeros(len(grid), dtype=np.int64)
    perfect_pair = (policy.perfect_dice, policy.perfect_hd95)
    worst_pair = (policy.worst_dice, policy.worst_hd95)
    for i, threshold in enumerate(grid):
        for j, (ref, pred) in enumerate(cases):
            records = evaluate_case(ref, apply_et_threshold(pred, threshold), policy)
            et = records[_ET_INDEX]
            dice[i, j, 0] = et.dice
            hd[i, j, 0] = et.hd95
            if (et.dice, et.hd95) == perfect_pair:
                perfect[i] += 1
            elif (et.dice, et.hd95) == worst_pair:
                worst[i] += 1

    pool = MetricTable(
        algorithms=tuple(repr(t) for t in grid),
        cases=tuple(f"case{j}" for j in range(n_cases)),
        dice=dice,
        hd95=hd,
        regions=("ET",),
    )
    scores = brats_ranking(pool).score
    return ThresholdSweepResult(
        thresholds=grid,
        mean_et_dice=dice[:, :, 0].mean(axis=1),
        perfect_counts=perfect,
        worst_counts=worst,
        ranking_scores=scores,
        n_cases=n_cases,
    )


def optimize_threshold(sweep: ThresholdSweepResult) -> ThresholdChoice:
    """Pick the best threshold under each criterion.

    ``best_by_dice`` maximizes the mean ET Dice, ``best_by_rank`` minimizes
    the pseudo-algorithm ranking score.  Ties go to the smallest threshold,
    which removes the least.
    """
    # argmax/argmin return the first extremum; thresholds are ascending,
    # so ties resolve to the smallest candidate.
    by_dice = sweep.thresholds[int(np.argmax(sweep.mean_et_dice))]
    by_rank = sweep.thresholds[int(np.argmin(sweep.ranking_scores))]
    return ThresholdChoice(best_by_dice=by_dice, best_by_rank=by_rank)

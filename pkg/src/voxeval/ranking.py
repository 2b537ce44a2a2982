"""Rank-then-aggregate challenge ranking with jackknife stability analysis.

Every algorithm is ranked against the others separately on each case,
region and metric (six columns per case: Dice and HD95 for WT, TC, ET).
Ties share the arithmetic mean of the positions they span, so each
column's ranks always sum to N(N+1)/2.  The per-algorithm mean over all
6M ranks, divided by the number of participants N, is the ranking score:
it lies in (0, 1] and lower is better.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .metrics import MetricRecord
from .volume import REGIONS, _freeze

#: Metric columns per (case, region): name and ranking direction.
_METRICS = (("dice", "higher_better"), ("hd95", "lower_better"))


@dataclass(frozen=True, eq=False)
class MetricTable:
    """Fully populated scores of N algorithms on M shared cases.

    ``dice`` and ``hd95`` are float arrays of shape (N, M, R) indexed by
    algorithm, case and region.  Every entry must be present: the ranking
    has no missing-data rule.
    """

    algorithms: tuple[str, ...]
    cases: tuple[str, ...]
    dice: np.ndarray
    hd95: np.ndarray
    regions: tuple[str, ...] = REGIONS

    def __post_init__(self) -> None:
        algorithms = tuple(str(a) for a in self.algorithms)
        cases = tuple(str(c) for c in self.cases)
        regions = tuple(str(r) for r in self.regions)
        if not algorithms:
            raise ValidationError("metric table needs at least one algorithm")
        if not cases:
            raise ValidationError("metric table needs at least one case")
        if not regions:
            raise ValidationError("metric table needs at least one region")
        if len(set(algorithms)) != len(algorithms):
            raise ValidationError("algorithm ids must be unique")
        if len(set(cases)) != len(cases):
            raise ValidationError("case ids must be unique")
        shape = (len(algorithms), len(cases), len(regions))
        arrays = {}
        for name in ("dice", "hd95"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ValidationError(
                    f"{name} array has shape {arr.shape}, expected "
                    f"(algorithms, cases, regions) = {shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} array contains non-finite values")
            arrays[name] = arr
        if arrays["dice"].min() < 0.0 or arrays["dice"].max() > 1.0:
            raise ValidationError("dice values must lie in [0, 1]")
        if arrays["hd95"].min() < 0.0:
            raise ValidationError("hd95 values must be nonnegative")
        object.__setattr__(self, "algorithms", algorithms)
        object.__setattr__(self, "cases", cases)
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "dice", _freeze(arrays["dice"]))
        object.__setattr__(self, "hd95", _freeze(arrays["hd95"]))

    @classmethod
    def from_records(
        cls,
        per_algorithm: Mapping[str, Mapping[str, Sequence[MetricRecord]]],
        regions: tuple[str, ...] = REGIONS,
    ) -> "MetricTable":
        """Assemble a table from per-algorithm, per-case metric records.

        Every algorithm must cover the identical set of case ids, and every
        case must carry exactly one record per region.  Cases are ordered
        by sorted id, algorithms keep their input order.
        """
        algorithms = tuple(per_algorithm)
        if not algorithms:
            raise ValidationError("metric table needs at least one algorithm")
        case_set = set(per_algorithm[algorithms[0]])
        for alg in algorithms[1:]:
            other = set(per_algorithm[alg])
            if other != case_set:
                missing = sorted(case_set ^ other)
                raise ValidationError(
                    f"algorithm {alg!r} does not cover the same cases as "
                    f"{algorithms[0]!r}; differing case ids: {missing[:5]}"
                )
        if not case_set:
            raise ValidationError("metric table needs at least one case")
        cases = tuple(sorted(case_set))
        shape = (len(algorithms), len(cases), len(regions))
        dice = np.empty(shape)
        hd95 = np.empty(shape)
        for i, alg in enumerate(algorithms):
            for j, case in enumerate(cases):
                by_region = {}
                for rec in per_algorithm[alg][case]:
                    if rec.region in by_region:
                        raise ValidationError(
                            f"algorithm {alg!r}, case {case!r}: duplicate "
                            f"record for region {rec.region}"
                        )
                    by_region[rec.region] = rec
                if set(by_region) != set(regions):
                    raise ValidationError(
                        f"algorithm {alg!r}, case {case!r}: expected one record "
                        f"per region {regions}, got {sorted(by_region)}"
                    )
                for k, region in enumerate(regions):
                    dice[i, j, k] = by_region[region].dice
                    hd95[i, j, k] = by_region[region].hd95
        return cls(algorithms, cases, dice, hd95, regions)

    def without(self, algorithm: str) -> "MetricTable":
        """Return the table with one algorithm's rows removed."""
        if algorithm not in self.algorithms:
            raise ValidationError(f"unknown algorithm id {algorithm!r}")
        keep = [i for i, a in enumerate(self.algorithms) if a != algorithm]
        if not keep:
            raise ValidationError("cannot remove the only algorithm")
        return MetricTable(
            tuple(self.algorithms[i] for i in keep),
            self.cases,
            self.dice[keep],
            self.hd95[keep],
            self.regions,
        )


def rank_column(values, direction: str) -> np.ndarray:
    """Fractional ranks of one column, best value first.

    Args:
        values: finite values of all N algorithms on one column.
        direction: "higher_better" (Dice) or "lower_better" (HD95).

    Returns:
        Float array of ranks starting at 1; tied values share the mean of
        the positions they span, so the ranks always sum to N(N+1)/2.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("rank_column expects a nonempty 1-D column")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("rank_column received NaN or infinite values")
    if direction == "higher_better":
        key = -arr
    elif direction == "lower_better":
        key = arr
    else:
        raise ValidationError(
            f"direction must be 'higher_better' or 'lower_better', got {direction!r}"
        )
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    ranks = np.empty(arr.size, dtype=np.float64)
    start = 0
    while start < arr.size:
        stop = start + 1
        while stop < arr.size and sorted_key[stop] == sorted_key[start]:
            stop += 1
        # positions start+1 .. stop share their mean rank
        ranks[order[start:stop]] = (start + stop + 1) / 2.0
        start = stop
    return ranks


@dataclass(frozen=True, eq=False)
class RankResult:
    """Mean ranks and normalized ranking scores of one algorithm pool."""

    algorithms: tuple[str, ...]
    mean_rank: np.ndarray
    score: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(
            self, "mean_rank", _freeze(np.asarray(self.mean_rank, dtype=np.float64))
        )
        object.__setattr__(
            self, "score", _freeze(np.asarray(self.score, dtype=np.float64))
        )

    @property
    def ordering(self) -> tuple[str, ...]:
        """Algorithm ids sorted by score, best first; ties keep input order."""
        order = np.argsort(self.score, kind="stable")
        return tuple(self.algorithms[i] for i in order)

    def _index(self, algorithm: str) -> int:
        try:
            return self.algorithms.index(algorithm)
        except ValueError:
            raise ValidationError(f"unknown algorithm id {algorithm!r}")

    def mean_rank_of(self, algorithm: str) -> float:
        return float(self.mean_rank[self._index(algorithm)])

    def score_of(self, algorithm: str) -> float:
        return float(self.score[self._index(algorithm)])


def brats_ranking(table: MetricTable) -> RankResult:
    """Rank a pool of algorithms case by case, then aggregate.

    For every case and region the pool is ranked twice, on Dice
    (higher better) and on HD95 (lower better).  Each algorithm's ranks
    are averaged over all columns and normalized by the pool size.
    """
    n_alg = len(table.algorithms)
    n_cases = len(table.cases)
    n_regions = len(table.regions)
    ranks = np.empty((n_alg, n_cases * n_regions * len(_METRICS)))
    col = 0
    for j in range(n_cases):
        for k in range(n_regions):
            for name, direction in _METRICS:
                values = getattr(table, name)[:, j, k]
                ranks[:, col] = rank_column(values, direction)
                col += 1
    # np.mean uses pairwise summation, so the aggregate does not depend on
    # any evaluation order beyond the fixed column layout built above.
    mean_rank = np.mean(ranks, axis=1)
    return RankResult(table.algorithms, mean_rank, mean_rank / n_alg)


@dataclass(frozen=True)
class RankFlip:
    """One pair of algorithms whose relative order changed in a jackknife pool.

    ``full_relation`` and ``jackknife_relation`` describe ``algorithm_a``
    relative to ``algorithm_b`` ("better", "tied" or "worse") in the full
    pool and in the pool with ``removed`` left out.
    """

    removed: str
    algorithm_a: str
    algorithm_b: str
    full_relation: str
    jackknife_relation: str


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Jackknife (leave-one-out) analysis of a ranking's stability."""

    full: RankResult
    leave_one_out: Mapping[str, RankResult]
    flips: tuple[RankFlip, ...]
    rank_ranges: Mapping[str, tuple[float, float]]


def _relation(score_a: float, score_b: float) -> str:
    if score_a < score_b:
        return "better"
    if score_a > score_b:
        return "worse"
    return "tied"


def jackknife_stability(table: MetricTable) -> StabilityReport:
    """Recompute the ranking with each algorithm left out in turn.

    Reports every pair whose relative order differs from the full-pool
    ordering in some leave-one-out pool, plus the range of positions each
    algorithm occupies across the pools containing it.  Positions are
    fractional ranks of the scores, sharing ties like the ranking itself.

    Requires at least three algorithms; with fewer, no pair remains to
    compare once one algorithm is removed.
    """
    ids = table.algorithms
    if len(ids) < 3:
        raise ValidationError(
            "jackknife stability needs at least 3 algorithms; removing one "
            f"of {len(ids)} leaves no pair to compare"
        )
    full = brats_ranking(table)
    leave_one_out: dict[str, RankResult] = {}
    flips: list[RankFlip] = []
    positions: dict[str, list[float]] = {alg: [] for alg in ids}
    for removed in ids:
        sub = brats_ranking(table.without(removed))
        leave_one_out[removed] = sub
        pos = rank_column(sub.score, "lower_better")
        for alg, p in zip(sub.algorithms, pos):
            positions[alg].append(float(p))
        for i, alg_a in enumerate(sub.algorithms):
            for alg_b in sub.algorithms[i + 1 :]:
                before = _relation(full.score_of(alg_a), full.score_of(alg_b))
                after = _relation(sub.score_of(alg_a), sub.score_of(alg_b))
                if before != after:
                    flips.append(RankFlip(removed, alg_a, alg_b, before, after))
    ranges = {alg: (min(p), max(p)) for alg, p in positions.items()}
    return StabilityReport(full, leave_one_out, tuple(flips), ranges)

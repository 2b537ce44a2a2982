"""Per-case segmentation metrics: Dice, surface distances, HD95, soft Dice.

Scoring follows the BraTS convention for empty regions.  A region that is
empty in the reference and in the prediction scores the best possible
values (Dice 1, HD95 0); predicting voxels for a region the reference does
not contain scores the worst values (Dice 0, HD95 373.13).  A region the
reference contains but the prediction misses entirely is scored with the
same worst pair, since neither metric is otherwise defined there.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .aggregate import percentile
from .errors import ValidationError
from .volume import REGIONS, LabelVolume, Spacing, labels_to_regions

# Face connectivity (6 neighbours); used to find interior voxels.
_FACE_STRUCT = ndimage.generate_binary_structure(3, 1)


class SpecialCase(str, Enum):
    """How a per-region score came about."""

    NONE = "none"
    BOTH_EMPTY = "both_empty"
    REF_EMPTY_PRED_NONEMPTY = "ref_empty_pred_nonempty"
    REF_NONEMPTY_PRED_EMPTY = "ref_nonempty_pred_empty"


@dataclass(frozen=True)
class SpecialCasePolicy:
    """Score pairs substituted when a region is empty on either side."""

    worst_hd95: float = 373.13
    worst_dice: float = 0.0
    perfect_dice: float = 1.0
    perfect_hd95: float = 0.0


DEFAULT_POLICY = SpecialCasePolicy()


@dataclass(frozen=True)
class MetricRecord:
    """One region's scores for one case."""

    region: str
    dice: float
    hd95: float
    special_case: SpecialCase = SpecialCase.NONE

    def __post_init__(self) -> None:
        if self.region not in REGIONS:
            raise ValidationError(
                f"unknown region {self.region!r}, expected one of {REGIONS}"
            )


def _as_mask(arr, name: str) -> np.ndarray:
    out = np.asarray(arr)
    if out.ndim != 3:
        raise ValidationError(f"mask {name} must be 3-D, got shape {out.shape}")
    if out.dtype != np.bool_:
        out = out.astype(bool)
    return out


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValidationError(f"mask shapes differ: {a.shape} vs {b.shape}")


def dice(a, b) -> float:
    """Dice overlap 2|a∩b| / (|a|+|b|) of two binary masks.

    Counting and summation happen in exact integer arithmetic; the only
    floating-point step is the final division.  At least one mask must be
    nonempty: scoring of empty regions is a policy question handled by
    :func:`evaluate_case`, not a property of the overlap itself.
    """
    a = _as_mask(a, "a")
    b = _as_mask(b, "b")
    _check_same_shape(a, b)
    na = int(np.count_nonzero(a))
    nb = int(np.count_nonzero(b))
    if na == 0 and nb == 0:
        raise ValidationError(
            "dice is undefined for two empty masks; use evaluate_case, which "
            "applies the empty-region scoring policy"
        )
    inter = int(np.count_nonzero(a & b))
    return 2 * inter / (na + nb)


def _union_bbox(a: np.ndarray, b: np.ndarray) -> tuple[slice, slice, slice]:
    slices = []
    for axis in range(3):
        other = tuple(i for i in range(3) if i != axis)
        line = np.any(a, axis=other) | np.any(b, axis=other)
        idx = np.flatnonzero(line)
        slices.append(slice(int(idx[0]), int(idx[-1]) + 1))
    return tuple(slices)


def _surface(mask: np.ndarray) -> np.ndarray:
    """Voxels of ``mask`` with at least one face neighbour outside the mask.

    border_value=0 makes the array edge count as outside, so a mask voxel
    on the volume boundary is always surface.
    """
    interior = ndimage.binary_erosion(mask, structure=_FACE_STRUCT, border_value=0)
    return mask & ~interior


def surface_distances(a, b, spacing: Spacing) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-surface distances between two nonempty masks, both ways.

    The surface of a mask consists of its voxels that have at least one
    face neighbour (6-connectivity) outside the mask, where the array edge
    counts as outside.  Distances are Euclidean between voxel centres in
    millimetres.

    Args:
        a, b: binary masks of identical shape, both nonempty.
        spacing: physical voxel size.

    Returns:
        Two 1-D float arrays: distances from each surface voxel of ``a``
        to the nearest surface voxel of ``b``, and vice versa.
    """
    a = _as_mask(a, "a")
    b = _as_mask(b, "b")
    _check_same_shape(a, b)
    if not a.any():
        raise ValidationError("mask a is empty; surface distances need nonempty masks")
    if not b.any():
        raise ValidationError("mask b is empty; surface distances need nonempty masks")

    # Crop to the union bounding box. Outside the box both masks are
    # background, and erosion with border_value=0 treats the cut edge
    # exactly like background, so surfaces and distances are unchanged.
    box = _union_bbox(a, b)
    a = a[box]
    b = b[box]

    surf_a = _surface(a)
    surf_b = _surface(b)
    sampling = spacing.as_tuple()
    # distance_transform_edt assigns every voxel its distance to the
    # nearest zero of the input, so ~surf gives nearest-surface distances.
    dt_b = ndimage.distance_transform_edt(~surf_b, sampling=sampling)
    dt_a = ndimage.distance_transform_edt(~surf_a, sampling=sampling)
    return dt_b[surf_a], dt_a[surf_b]


def hd95(a, b, spacing: Spacing) -> float:
    """Symmetric 95th-percentile Hausdorff distance in millimetres.

    Computed as the maximum of the two directed 95th percentiles of
    nearest-surface distances, with the shared linear-interpolation
    percentile.  Both masks must be nonempty; empty regions are scored
    by :func:`evaluate_case`.
    """
    d_ab, d_ba = surface_distances(a, b, spacing)
    return max(percentile(d_ab, 95.0), percentile(d_ba, 95.0))


def evaluate_case(
    ref: LabelVolume,
    pred: LabelVolume,
    policy: SpecialCasePolicy = DEFAULT_POLICY,
) -> tuple[MetricRecord, MetricRecord, MetricRecord]:
    """Score a prediction against its reference on WT, TC and ET.

    Per region: if both masks are empty the policy's perfect pair is
    recorded; if exactly one side is empty the worst pair is recorded,
    tagged with which side was empty; otherwise Dice and HD95 are computed
    from the masks.

    Args:
        ref: reference segmentation.
        pred: predicted segmentation; shape, spacing and coding must match.
        policy: substitute scores for empty-region cases.

    Returns:
        Three :class:`MetricRecord` in canonical region order (WT, TC, ET).
    """
    if ref.shape != pred.shape:
        raise ValidationError(
            f"reference and prediction shapes differ: {ref.shape} vs {pred.shape}"
        )
    if ref.spacing != pred.spacing:
        raise ValidationError(
            f"reference and prediction spacings differ: "
            f"{ref.spacing.as_tuple()} vs {pred.spacing.as_tuple()}"
        )
    if ref.coding != pred.coding:
        raise ValidationError("reference and prediction use different label codings")

    ref_regions = labels_to_regions(ref)
    pred_regions = labels_to_regions(pred)
    records = []
    for name in REGIONS:
        mask_ref = ref_regions.region(name)
        mask_pred = pred_regions.region(name)
        ref_empty = not mask_ref.any()
        pred_empty = not mask_pred.any()
        if ref_empty and pred_empty:
            rec = MetricRecord(
                name, policy.perfect_dice, policy.perfect_hd95, SpecialCase.BOTH_EMPTY
            )
        elif ref_empty:
            rec = MetricRecord(
                name,
                policy.worst_dice,
                policy.worst_hd95,
                SpecialCase.REF_EMPTY_PRED_NONEMPTY,
            )
        elif pred_empty:
            rec = MetricRecord(
                name,
                policy.worst_dice,
                policy.worst_hd95,
                SpecialCase.REF_NONEMPTY_PRED_EMPTY,
            )
        else:
            rec = MetricRecord(
                name,
                dice(mask_ref, mask_pred),
                hd95(mask_ref, mask_pred, ref.spacing),
                SpecialCase.NONE,
            )
        records.append(rec)
    return tuple(records)  # type: ignore[return-value]


def soft_dice(probs, refs, mode: str = "sample", smooth: float = 1e-5) -> float:
    """Forward-value soft Dice of a batch of probability maps.

    Per region the soft Dice is (2 * sum(p * g) + s) / (sum(p) + sum(g) + s)
    with smoothing s.  ``mode="sample"`` evaluates the formula per sample
    and region and returns the mean.  ``mode="batch"`` takes the sums over
    the whole batch per region before dividing, treating the batch as one
    large sample; a tiny lesion missed in one sample is then overshadowed
    by the other samples instead of zeroing out its own term.

    Args:
        probs: sequence of :class:`RegionProbSet`, one per sample.
        refs: sequence of :class:`RegionMaskSet` of equal length.
        mode: "sample" or "batch".
        smooth: smoothing constant s.

    Returns:
        The scalar soft Dice value (no gradients).
    """
    if mode not in ("sample", "batch"):
        raise ValidationError(f"mode must be 'sample' or 'batch', got {mode!r}")
    probs = list(probs)
    refs = list(refs)
    if not probs:
        raise ValidationError("soft_dice requires a nonempty batch")
    if len(probs) != len(refs):
        raise ValidationError(
            f"batch lengths differ: {len(probs)} probability sets "
            f"vs {len(refs)} references"
        )
    for i, (p, g) in enumerate(zip(probs, refs)):
        if p.shape != g.shape:
            raise ValidationError(
                f"sample {i}: probability shape {p.shape} does not match "
                f"reference shape {g.shape}"
            )

    if mode == "sample":
        values = []
        for p, g in zip(probs, refs):
            for name in REGIONS:
                pm = np.asarray(p.region(name), dtype=np.float64)
                gm = g.region(name)
                num = 2.0 * float(np.sum(pm, where=gm)) + smooth
                den = float(pm.sum()) + int(np.count_nonzero(gm)) + smooth
                values.append(num / den)
        return float(np.mean(values))

    per_region = []
    for name in REGIONS:
        overlap = 0.0
        total = 0.0
        for p, g in zip(probs, refs):
            pm = np.asarray(p.region(name), dtype=np.float64)
            gm = g.region(name)
            overlap += float(np.sum(pm, where=gm))
            total += float(pm.sum()) + int(np.count_nonzero(gm))
        per_region.append((2.0 * overlap + smooth) / (total + smooth))
    return float(np.mean(per_region))

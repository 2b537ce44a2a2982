"""Core data model for labelled tumour volumes and region masks.

A segmentation is stored as a 3-D integer label volume together with its
voxel spacing and a label coding that says which integer means what.  All
evaluation happens on the three nested BraTS regions derived from the labels:

* whole tumour (WT): every non-background voxel,
* tumour core (TC): necrosis plus enhancing tumour,
* enhancing tumour (ET): enhancing tumour only.

By construction ET is a subset of TC and TC is a subset of WT; the region
container enforces that nesting whenever masks are supplied directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: Canonical region order used everywhere (tables, CSV files, rankings).
REGIONS = ("WT", "TC", "ET")


def _freeze(arr: np.ndarray) -> np.ndarray:
    """Return a C-contiguous, read-only view of ``arr``."""
    out = np.ascontiguousarray(arr)
    if out is arr and arr.flags.writeable:
        out = arr.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Spacing:
    """Physical voxel size in millimetres along each axis."""

    dx: float = 1.0
    dy: float = 1.0
    dz: float = 1.0

    def __post_init__(self) -> None:
        for name, value in (("dx", self.dx), ("dy", self.dy), ("dz", self.dz)):
            value = float(value)
            if not np.isfinite(value) or value <= 0.0:
                raise ValidationError(
                    f"spacing component {name} must be a positive finite "
                    f"number, got {value!r}"
                )
            object.__setattr__(self, name, value)

    @property
    def voxel_volume(self) -> float:
        """Volume of a single voxel in cubic millimetres."""
        return self.dx * self.dy * self.dz

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.dx, self.dy, self.dz)


@dataclass(frozen=True)
class LabelCoding:
    """Integer label values used by a segmentation.

    Defaults follow the BraTS convention: 0 background, 1 necrotic core,
    2 peritumoural edema, 4 enhancing tumour.
    """

    background: int = 0
    necrosis: int = 1
    edema: int = 2
    enhancing: int = 4

    def __post_init__(self) -> None:
        codes = self.codes
        for code in codes:
            if not isinstance(code, (int, np.integer)) or isinstance(code, bool):
                raise ValidationError(f"label code {code!r} is not an integer")
            if code < 0:
                raise ValidationError(f"label code {code} is negative")
        if len(set(codes)) != len(codes):
            raise ValidationError(f"label codes must be distinct, got {codes}")

    @property
    def codes(self) -> tuple[int, int, int, int]:
        return (self.background, self.necrosis, self.edema, self.enhancing)


DEFAULT_CODING = LabelCoding()


@dataclass(frozen=True, eq=False)
class LabelVolume:
    """A 3-D integer segmentation with spacing and label coding.

    The voxel array is stored read-only; operations that change labels
    return a new instance.
    """

    data: np.ndarray
    spacing: Spacing
    coding: LabelCoding = DEFAULT_CODING

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise ValidationError(f"label volume must be 3-D, got shape {arr.shape}")
        if arr.dtype.kind not in "iu":
            raise ValidationError(
                f"label volume must have an integer dtype, got {arr.dtype}"
            )
        allowed = np.asarray(self.coding.codes, dtype=arr.dtype)
        valid = np.isin(arr, allowed)
        if not valid.all():
            idx = np.argwhere(~valid)[0]
            value = arr[tuple(idx)]
            raise ValidationError(
                f"label value {int(value)} at voxel {tuple(int(i) for i in idx)} "
                f"is not one of the configured codes {self.coding.codes}"
            )
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class RegionMaskSet:
    """Boolean masks for the three nested regions of one case."""

    wt: np.ndarray
    tc: np.ndarray
    et: np.ndarray
    spacing: Spacing

    def __post_init__(self) -> None:
        masks = {}
        shape = None
        for name in ("wt", "tc", "et"):
            arr = np.asarray(getattr(self, name))
            if arr.ndim != 3:
                raise ValidationError(f"{name} mask must be 3-D, got shape {arr.shape}")
            if arr.dtype != np.bool_:
                arr = arr.astype(bool)
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ValidationError(
                    f"region masks disagree on shape: {shape} vs {arr.shape}"
                )
            masks[name] = arr
        if np.any(masks["et"] & ~masks["tc"]):
            raise ValidationError("enhancing-tumour mask extends outside tumour core")
        if np.any(masks["tc"] & ~masks["wt"]):
            raise ValidationError("tumour-core mask extends outside whole tumour")
        for name, arr in masks.items():
            object.__setattr__(self, name, _freeze(arr))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.wt.shape  # type: ignore[return-value]

    def region(self, name: str) -> np.ndarray:
        """Return the mask for region ``name`` ("WT", "TC" or "ET")."""
        try:
            return {"WT": self.wt, "TC": self.tc, "ET": self.et}[name]
        except KeyError:
            raise ValidationError(f"unknown region {name!r}, expected one of {REGIONS}")

    def iter_regions(self):
        """Yield ``(name, mask)`` pairs in canonical region order."""
        for name in REGIONS:
            yield name, self.region(name)


@dataclass(frozen=True, eq=False)
class RegionProbSet:
    """Per-region probability maps for one case, each valued in [0, 1]."""

    p_wt: np.ndarray
    p_tc: np.ndarray
    p_et: np.ndarray
    spacing: Spacing

    def __post_init__(self) -> None:
        shape = None
        for name in ("p_wt", "p_tc", "p_et"):
            arr = np.asarray(getattr(self, name))
            if arr.ndim != 3:
                raise ValidationError(f"{name} map must be 3-D, got shape {arr.shape}")
            if arr.dtype.kind != "f":
                arr = arr.astype(np.float64)
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ValidationError(
                    f"probability maps disagree on shape: {shape} vs {arr.shape}"
                )
            if arr.size and (not np.all(np.isfinite(arr))):
                raise ValidationError(f"{name} map contains non-finite values")
            if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                raise ValidationError(
                    f"{name} map has values outside [0, 1]: "
                    f"min={float(arr.min())}, max={float(arr.max())}"
                )
            object.__setattr__(self, name, _freeze(arr))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.p_wt.shape  # type: ignore[return-value]

    def region(self, name: str) -> np.ndarray:
        try:
            return {"WT": self.p_wt, "TC": self.p_tc, "ET": self.p_et}[name]
        except KeyError:
            raise ValidationError(f"unknown region {name!r}, expected one of {REGIONS}")


def labels_to_regions(volume: LabelVolume) -> RegionMaskSet:
    """Derive the three nested region masks from a label volume.

    WT collects every non-background voxel, TC necrosis plus enhancing,
    ET enhancing only.  The nesting invariant holds by construction.
    """
    data = volume.data
    coding = volume.coding
    wt = data != coding.background
    tc = (data == coding.necrosis) | (data == coding.enhancing)
    et = data == coding.enhancing
    return RegionMaskSet(wt, tc, et, volume.spacing)


def regions_to_labels(
    probs: RegionProbSet,
    threshold: float = 0.5,
    coding: LabelCoding = DEFAULT_CODING,
) -> LabelVolume:
    """Threshold nested probability maps into a label volume.

    Decisions are gated from the outside in, which guarantees that the
    derived region masks nest: a voxel whose WT probability is below
    ``threshold`` is background no matter what the inner maps say; past the
    WT gate it is edema unless the TC map also fires, then necrosis unless
    the ET map fires too, and enhancing only when all three agree.

    Args:
        probs: per-region probability maps.
        threshold: decision threshold, must lie strictly inside (0, 1).
        coding: label coding for the output volume.

    Returns:
        A new :class:`LabelVolume` with the same shape and spacing.
    """
    threshold = float(threshold)
    if not (0.0 < threshold < 1.0):
        raise ValidationError(
            f"threshold must lie strictly between 0 and 1, got {threshold}"
        )
    wt = probs.p_wt >= threshold
    tc = probs.p_tc >= threshold
    et = probs.p_et >= threshold
    dtype = np.uint8 if max(coding.codes) <= np.iinfo(np.uint8).max else np.int32
    labels = np.select(
        [~wt, ~tc, ~et],
        [coding.background, coding.edema, coding.necrosis],
        default=coding.enhancing,
    ).astype(dtype)
    return LabelVolume(labels, probs.spacing, coding)


def binarize_regions(probs: RegionProbSet, threshold: float = 0.5) -> RegionMaskSet:
    """Threshold probability maps directly into nested region masks.

    Equivalent to ``labels_to_regions(regions_to_labels(probs, threshold))``;
    the hierarchical label assignment is what restores the nesting when the
    raw maps disagree (for example ET above threshold but TC below).
    """
    return labels_to_regions(regions_to_labels(probs, threshold))


def region_volume_mm3(mask: np.ndarray, spacing: Spacing) -> float:
    """Physical volume of a binary mask in cubic millimetres."""
    arr = np.asarray(mask)
    if arr.ndim != 3:
        raise ValidationError(f"mask must be 3-D, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        arr = arr.astype(bool)
    return int(np.count_nonzero(arr)) * spacing.voxel_volume

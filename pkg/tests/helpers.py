"""Shared synthetic-data builders for the test suite."""

from __future__ import annotations

import numpy as np

from voxeval import DEFAULT_CODING, LabelCoding, LabelVolume, RegionProbSet, Spacing

#: One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def label_volume_from_masks(
    wt, tc, et, spacing=Spacing(), coding: LabelCoding = DEFAULT_CODING
) -> LabelVolume:
    """Build a label volume whose derived regions equal the given nested masks."""
    wt = np.asarray(wt, dtype=bool)
    tc = np.asarray(tc, dtype=bool)
    et = np.asarray(et, dtype=bool)
    data = np.full(wt.shape, coding.background, dtype=np.int32)
    data[wt & ~tc] = coding.edema
    data[tc & ~et] = coding.necrosis
    data[et] = coding.enhancing
    return LabelVolume(data, spacing, coding)


def random_nested_masks(rng: np.random.Generator, shape, p_wt=0.3, p_tc=0.6, p_et=0.6):
    """Random nested (wt, tc, et) masks; inner masks subsample the outer."""
    wt = rng.random(shape) < p_wt
    tc = wt & (rng.random(shape) < p_tc)
    et = tc & (rng.random(shape) < p_et)
    return wt, tc, et


def random_label_volume(
    rng: np.random.Generator,
    shape,
    spacing=Spacing(),
    coding: LabelCoding = DEFAULT_CODING,
    weights=(0.7, 0.1, 0.1, 0.1),
) -> LabelVolume:
    codes = np.asarray(coding.codes, dtype=np.int32)
    data = rng.choice(codes, size=shape, p=np.asarray(weights) / np.sum(weights))
    return LabelVolume(data, spacing, coding)


def random_mask(rng: np.random.Generator, shape, density=0.2, ensure_nonempty=True):
    mask = rng.random(shape) < density
    if ensure_nonempty and not mask.any():
        idx = tuple(rng.integers(0, s) for s in shape)
        mask[idx] = True
    return mask


def sphere_mask(shape, center, radius) -> np.ndarray:
    grids = np.ogrid[tuple(slice(0, s) for s in shape)]
    d2 = sum((g - c) ** 2 for g, c in zip(grids, center))
    return d2 <= radius**2


def box_mask(shape, lo, hi) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    mask[tuple(slice(a, b) for a, b in zip(lo, hi))] = True
    return mask


def constant_probset(shape, p_wt, p_tc, p_et, spacing=Spacing()) -> RegionProbSet:
    return RegionProbSet(
        np.full(shape, p_wt, dtype=np.float64),
        np.full(shape, p_tc, dtype=np.float64),
        np.full(shape, p_et, dtype=np.float64),
        spacing,
    )


def random_probset(rng: np.random.Generator, shape, spacing=Spacing()) -> RegionProbSet:
    return RegionProbSet(
        rng.random(shape), rng.random(shape), rng.random(shape), spacing
    )

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxeval import (
    DEFAULT_CODING,
    LabelCoding,
    LabelVolume,
    RegionMaskSet,
    RegionProbSet,
    Spacing,
    ValidationError,
    binarize_regions,
    labels_to_regions,
    region_volume_mm3,
    regions_to_labels,
)
from helpers import label_volume_from_masks, random_label_volume, random_nested_masks


def test_spacing_defaults_and_volume():
    s = Spacing()
    assert s.as_tuple() == (1.0, 1.0, 1.0)
    assert s.voxel_volume == 1.0
    assert Spacing(1.0, 1.0, 2.0).voxel_volume == 2.0


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_spacing_rejects_nonpositive(bad):
    with pytest.raises(ValidationError):
        Spacing(1.0, bad, 1.0)


def test_coding_defaults_follow_brats():
    assert DEFAULT_CODING.codes == (0, 1, 2, 4)


def test_coding_rejects_duplicates_and_negatives():
    with pytest.raises(ValidationError):
        LabelCoding(background=0, necrosis=0, edema=2, enhancing=4)
    with pytest.raises(ValidationError):
        LabelCoding(background=-1)


def test_label_volume_requires_3d_integers():
    with pytest.raises(ValidationError):
        LabelVolume(np.zeros((4, 4), dtype=np.uint8), Spacing())
    with pytest.raises(ValidationError):
        LabelVolume(np.zeros((4, 4, 4), dtype=np.float32), Spacing())


def test_label_volume_names_offending_code_and_voxel():
    data = np.zeros((3, 3, 3), dtype=np.uint8)
    data[1, 2, 0] = 3
    with pytest.raises(ValidationError, match=r"label value 3 at voxel \(1, 2, 0\)"):
        LabelVolume(data, Spacing())


def test_label_volume_data_is_read_only():
    vol = LabelVolume(np.zeros((2, 2, 2), dtype=np.uint8), Spacing())
    with pytest.raises(ValueError):
        vol.data[0, 0, 0] = 1


def test_labels_to_regions_single_enhancing_voxel():
    data = np.zeros((3, 3, 3), dtype=np.uint8)
    data[1, 1, 1] = 4
    regions = labels_to_regions(LabelVolume(data, Spacing()))
    assert regions.wt[1, 1, 1] and regions.tc[1, 1, 1] and regions.et[1, 1, 1]
    assert regions.wt.sum() == regions.tc.sum() == regions.et.sum() == 1


def test_labels_to_regions_edema_voxel_in_wt_only():
    data = np.zeros((3, 3, 3), dtype=np.uint8)
    data[0, 0, 0] = 2
    regions = labels_to_regions(LabelVolume(data, Spacing()))
    assert regions.wt[0, 0, 0]
    assert not regions.tc.any()
    assert not regions.et.any()


def test_labels_to_regions_background_only():
    regions = labels_to_regions(LabelVolume(np.zeros((3, 3, 3), dtype=np.uint8), Spacing()))
    assert not regions.wt.any() and not regions.tc.any() and not regions.et.any()


def test_labels_to_regions_nesting_on_random_volumes():
    rng = np.random.default_rng(7)
    for _ in range(50):
        vol = random_label_volume(rng, (6, 5, 4))
        regions = labels_to_regions(vol)
        assert not (regions.et & ~regions.tc).any()
        assert not (regions.tc & ~regions.wt).any()


def test_region_mask_set_rejects_broken_nesting():
    et = np.zeros((2, 2, 2), dtype=bool)
    et[0, 0, 0] = True
    empty = np.zeros((2, 2, 2), dtype=bool)
    with pytest.raises(ValidationError, match="outside tumour core"):
        RegionMaskSet(wt=empty, tc=empty, et=et, spacing=Spacing())


def test_region_mask_set_rejects_shape_mismatch():
    with pytest.raises(ValidationError, match="shape"):
        RegionMaskSet(
            wt=np.zeros((2, 2, 2), dtype=bool),
            tc=np.zeros((2, 2, 3), dtype=bool),
            et=np.zeros((2, 2, 2), dtype=bool),
            spacing=Spacing(),
        )


def test_region_prob_set_rejects_out_of_range():
    good = np.zeros((2, 2, 2))
    with pytest.raises(ValidationError, match=r"outside \[0, 1\]"):
        RegionProbSet(good, good, good + 1.5, Spacing())
    with pytest.raises(ValidationError, match="non-finite"):
        RegionProbSet(good, good + np.nan, good, Spacing())


@pytest.mark.parametrize(
    "probs,expected",
    [
        ((0.9, 0.9, 0.9), 4),  # all gates pass -> enhancing
        ((0.9, 0.2, 0.9), 2),  # TC gate fails -> edema, ET ignored
        ((0.4, 0.9, 0.9), 0),  # WT gate fails -> background
        ((0.9, 0.9, 0.2), 1),  # ET gate fails -> necrosis
    ],
)
def test_regions_to_labels_decision_rule(probs, expected):
    shape = (1, 1, 1)
    prob_set = RegionProbSet(
        np.full(shape, probs[0]),
        np.full(shape, probs[1]),
        np.full(shape, probs[2]),
        Spacing(),
    )
    assert regions_to_labels(prob_set).data[0, 0, 0] == expected


@pytest.mark.parametrize("threshold", [0.0, 1.0, -0.1, 1.5])
def test_regions_to_labels_rejects_degenerate_threshold(threshold):
    prob_set = RegionProbSet(*(np.zeros((2, 2, 2)),) * 3, spacing=Spacing())
    with pytest.raises(ValidationError):
        regions_to_labels(prob_set, threshold)


def test_regions_to_labels_uses_only_configured_codes():
    rng = np.random.default_rng(11)
    coding = LabelCoding(background=10, necrosis=20, edema=30, enhancing=40)
    prob_set = RegionProbSet(
        rng.random((5, 5, 5)), rng.random((5, 5, 5)), rng.random((5, 5, 5)), Spacing()
    )
    out = regions_to_labels(prob_set, 0.5, coding)
    assert set(np.unique(out.data)) <= {10, 20, 30, 40}


def test_roundtrip_identity_on_binarized_nested_masks():
    rng = np.random.default_rng(13)
    for _ in range(25):
        wt, tc, et = random_nested_masks(rng, (6, 6, 6))
        prob_set = RegionProbSet(
            wt.astype(float), tc.astype(float), et.astype(float), Spacing()
        )
        regions = labels_to_regions(regions_to_labels(prob_set))
        assert np.array_equal(regions.wt, wt)
        assert np.array_equal(regions.tc, tc)
        assert np.array_equal(regions.et, et)


def test_binarize_regions_extremes_and_nesting_repair():
    full = binarize_regions(
        RegionProbSet(*(np.ones((2, 2, 2)),) * 3, spacing=Spacing())
    )
    assert full.wt.all() and full.tc.all() and full.et.all()
    empty = binarize_regions(
        RegionProbSet(*(np.zeros((2, 2, 2)),) * 3, spacing=Spacing())
    )
    assert not empty.wt.any()
    # ET above threshold but TC below: the voxel ends up WT-only (edema).
    shape = (1, 1, 1)
    repaired = binarize_regions(
        RegionProbSet(
            np.full(shape, 0.9), np.full(shape, 0.2), np.full(shape, 0.9), Spacing()
        )
    )
    assert repaired.wt[0, 0, 0]
    assert not repaired.tc[0, 0, 0] and not repaired.et[0, 0, 0]


@given(
    counts=st.integers(min_value=0, max_value=50),
    dx=st.floats(0.1, 5.0),
    dy=st.floats(0.1, 5.0),
    dz=st.floats(0.1, 5.0),
)
@settings(max_examples=50, deadline=None)
def test_region_volume_scales_with_spacing(counts, dx, dy, dz):
    mask = np.zeros((4, 4, 4), dtype=bool)
    mask.ravel()[:counts] = True
    volume = region_volume_mm3(mask, Spacing(dx, dy, dz))
    assert volume == pytest.approx(counts * dx * dy * dz, rel=1e-12)


def test_region_volume_examples():
    mask = np.zeros((4, 4, 4), dtype=bool)
    assert region_volume_mm3(mask, Spacing()) == 0.0
    mask.ravel()[:10] = True
    assert region_volume_mm3(mask, Spacing()) == 10.0
    assert region_volume_mm3(mask, Spacing(1, 1, 2)) == 20.0


def test_region_volume_additive_over_disjoint_masks():
    rng = np.random.default_rng(3)
    a = rng.random((5, 5, 5)) < 0.3
    b = (rng.random((5, 5, 5)) < 0.3) & ~a
    s = Spacing(0.7, 1.1, 1.3)
    assert region_volume_mm3(a | b, s) == pytest.approx(
        region_volume_mm3(a, s) + region_volume_mm3(b, s), rel=1e-12
    )


def test_label_volume_from_masks_helper_roundtrips():
    rng = np.random.default_rng(5)
    wt, tc, et = random_nested_masks(rng, (5, 5, 5))
    vol = label_volume_from_masks(wt, tc, et)
    regions = labels_to_regions(vol)
    assert np.array_equal(regions.wt, wt)
    assert np.array_equal(regions.tc, tc)
    assert np.array_equal(regions.et, et)

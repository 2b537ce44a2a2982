"""
Evaluating one segmentation case
================================

Build a synthetic reference/prediction pair, derive the three nested
evaluation regions and score them with Dice and HD95, including the
empty-region special cases.
"""

import numpy as np

from voxeval import LabelVolume, Spacing, evaluate_case

#%%
# A label volume stores one integer code per voxel: 0 background,
# 1 necrotic core, 2 edema, 4 enhancing tumour. The three evaluation
# regions are nested unions of those codes: whole tumour {1,2,4},
# tumour core {1,4}, enhancing tumour {4}.

shape = (48, 48, 32)
z, y, x = np.ogrid[: shape[0], : shape[1], : shape[2]]


def ball(center, radius):
    cz, cy, cx = center
    return (z - cz) ** 2 + (y - cy) ** 2 + (x - cx) ** 2 <= radius**2


reference = np.zeros(shape, dtype=np.uint8)
reference[ball((24, 24, 16), 12)] = 2
reference[ball((24, 24, 16), 8)] = 1
reference[ball((24, 24, 16), 4)] = 4

#%%
# The prediction misses part of the tumour and shifts the enhancing
# component by a couple of voxels.

prediction = np.zeros(shape, dtype=np.uint8)
prediction[ball((24, 24, 16), 11)] = 2
prediction[ball((25, 25, 16), 8)] = 1
prediction[ball((26, 25, 16), 4)] = 4

spacing = Spacing(1.0, 1.0, 2.0)  # anisotropic millimetre voxels
ref_volume = LabelVolume(reference, spacing)
pred_volume = LabelVolume(prediction, spacing)

for record in evaluate_case(ref_volume, pred_volume):
    print(
        f"{record.region}: dice={record.dice:.4f} "
        f"hd95={record.hd95:.3f} mm ({record.special_case.value})"
    )

#%%
# When the reference has no enhancing tumour at all, metric values are
# replaced by fixed scores: an empty prediction is perfect (1, 0) and a
# nonempty one gets the worst case (0, 373.13).

empty_reference = reference.copy()
empty_reference[empty_reference == 4] = 1

for name, pred in (("empty too", empty_reference), ("false positive", prediction)):
    record = evaluate_case(LabelVolume(empty_reference, spacing), LabelVolume(pred, spacing))[2]
    print(f"ET {name}: dice={record.dice} hd95={record.hd95} ({record.special_case.value})")

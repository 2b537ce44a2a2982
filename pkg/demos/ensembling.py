"""
Two-level probability ensembling
================================

Average per-model probability maps within each training configuration,
then average the configuration means, so configurations with many
trained models do not drown out configurations with few. Finally turn
the averaged maps into labels with the outside-in region decision rule.
"""

import numpy as np

from voxeval import RegionProbSet, Spacing, ensemble_predict, two_level_ensemble

#%%
# Three configurations with different numbers of trained models. Each
# member carries one probability map per region (WT, TC, ET).

rng = np.random.default_rng(3)
shape = (16, 16, 16)


def member(strength):
    base = rng.random(shape)
    return RegionProbSet(
        np.clip(base * strength, 0, 1),
        np.clip(base * strength * 0.7, 0, 1),
        np.clip(base * strength * 0.4, 0, 1),
        Spacing(),
    )


configurations = [
    [member(0.9) for _ in range(5)],  # a well-sampled configuration
    [member(1.0)],                    # a single strong model
    [member(0.6) for _ in range(2)],
]

#%%
# Two-level averaging gives each configuration weight 1/3 regardless of
# how many members it has. A flat (pooled) mean would give the 5-member
# configuration 5/8 of the total weight instead.

combined = two_level_ensemble(configurations)
flat = np.mean([m.p_wt for cfg in configurations for m in cfg], axis=0)
print("two-level WT mean:", float(combined.p_wt.mean()))
print("pooled    WT mean:", float(flat.mean()))

#%%
# The scalar fixture makes the difference obvious: configurations
# {0.2} and {0.4, 0.8} average to (0.2 + 0.6)/2 = 0.4, not the pooled
# (0.2 + 0.4 + 0.8)/3 = 0.467.

def point(p):
    return RegionProbSet(np.full((1, 1, 1), p), np.zeros((1, 1, 1)), np.zeros((1, 1, 1)), Spacing())


fixture = two_level_ensemble([[point(0.2)], [point(0.4), point(0.8)]])
print("fixture WT value:", float(fixture.p_wt[0, 0, 0]))

#%%
# Optional weights emphasize configurations (here: trust the single
# strong model twice as much), and `ensemble_predict` maps the averaged
# probabilities straight to label codes: a voxel must pass the WT
# threshold to be tumour at all, then the TC threshold, then the ET one.

weighted = two_level_ensemble(configurations, weights=[1.0, 2.0, 1.0])
labels = ensemble_predict(configurations, threshold=0.5)
values, counts = np.unique(labels.data, return_counts=True)
print("weighted WT mean:", float(weighted.p_wt.mean()))
print("predicted label histogram:", dict(zip(values.tolist(), counts.tolist())))

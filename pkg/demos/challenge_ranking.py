"""
Rank-then-aggregate challenge scoring
=====================================

Rank a pool of algorithms case by case and metric by metric, average the
ranks into a final score, and probe the stability of the resulting order
with a leave-one-algorithm-out jackknife.
"""

import numpy as np

from voxeval import MetricTable, brats_ranking, jackknife_stability

#%%
# Each algorithm contributes six numbers per case: Dice (higher is
# better) and HD95 (lower is better) for the three regions. Rather than
# averaging the metrics themselves, every case/region/metric column is
# ranked across algorithms (ties get the mean of the positions they
# occupy) and the ~6M ranks per algorithm are averaged.

rng = np.random.default_rng(7)
algorithms = ("unet", "cascade", "ensemble", "baseline")
n, m = len(algorithms), 15

skill = np.array([0.82, 0.80, 0.86, 0.64])[:, None, None]
dice = np.clip(skill + rng.normal(0.0, 0.08, size=(n, m, 3)), 0.0, 1.0)
hd95 = np.clip((1.0 - skill) * 18 + rng.normal(0.0, 3.0, size=(n, m, 3)), 0.0, None)

table = MetricTable(algorithms, tuple(f"case{i:02d}" for i in range(m)), dice, hd95)
result = brats_ranking(table)

print("final order:", " > ".join(result.ordering))
for name in result.ordering:
    print(f"  {name:<9} mean rank {result.mean_rank_of(name):.3f}  score {result.score_of(name):.3f}")

#%%
# The score is the mean rank divided by the pool size, so it always lies
# in (0, 1] and is comparable across pools of different sizes. A pool of
# identical submissions is fully tied:

same = MetricTable(("a", "b", "c"), ("case0",), np.full((3, 1, 3), 0.9), np.ones((3, 1, 3)))
print("identical pool scores:", brats_ranking(same).score)  # (N+1)/(2N) each

#%%
# Rankings can be fragile: removing one competitor changes every column's
# rank distribution, which can swap neighbouring algorithms. The
# jackknife recomputes the ranking once per left-out algorithm and
# reports every pair whose relation changed.

report = jackknife_stability(table)
if not report.flips:
    print("no rank flips: the order is stable against removing any one algorithm")
for flip in report.flips:
    print(
        f"removing {flip.removed}: {flip.algorithm_a} was {flip.full_relation} "
        f"than {flip.algorithm_b}, now {flip.jackknife_relation}"
    )
for name, (lo, hi) in report.rank_ranges.items():
    print(f"  {name:<9} rank range across pools: [{lo}, {hi}]")

"""
Batch evaluation from the command line
======================================

Write a small cohort to disk in the supported volume formats, drive the
``voxeval`` command-line interface end to end (evaluate, rank,
leaderboard) and read the deterministic CSV/JSON outputs back.
"""

import csv
import json
import tempfile
from pathlib import Path

import numpy as np

from voxeval import LabelVolume, Spacing, write_label_volume
from voxeval.cli import main

workdir = Path(tempfile.mkdtemp(prefix="voxeval_demo_"))
print("working in", workdir)

#%%
# Volumes go to compressed NIfTI files; the writer is byte-deterministic
# so reruns produce identical files. A manifest CSV lists one case per
# row with paths resolved relative to the manifest.

rng = np.random.default_rng(5)
rows = []
for i in range(4):
    ref = np.zeros((20, 20, 20), dtype=np.uint8)
    ref[5:15, 5:15, 5:15] = 2
    ref[7:13, 7:13, 7:13] = 1
    ref[9:11, 9:11, 9:11] = 4
    pred = ref.copy()
    if i % 2:
        pred[9:11, 9:11, 9:11] = 1  # this submission misses the enhancing part
    write_label_volume(workdir / f"case{i}_ref.nii.gz", LabelVolume(ref, Spacing()))
    write_label_volume(workdir / f"case{i}_pred.nii.gz", LabelVolume(pred, Spacing()))
    rows.append([f"case{i}", f"case{i}_ref.nii.gz", f"case{i}_pred.nii.gz"])

with open(workdir / "manifest.csv", "w", newline="") as fh:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["case_id", "reference_path", "prediction_path"])
    writer.writerows(rows)

#%%
# `evaluate` scores every case and writes metrics.csv plus an optional
# per-column summary table. `--jobs` controls worker processes; the
# output order always follows the manifest.

code = main(
    [
        "evaluate",
        "--manifest", str(workdir / "manifest.csv"),
        "--out-metrics", str(workdir / "metrics.csv"),
        "--out-summary", str(workdir / "summary.csv"),
        "--jobs", "1",
    ]
)
print("evaluate exit code:", code)
print((workdir / "metrics.csv").read_text(), end="")

#%%
# `rank` compares several metrics files as challenge submissions. Here
# the same file twice is a fully tied pool.

code = main(
    [
        "rank",
        f"self={workdir / 'metrics.csv'}",
        f"again={workdir / 'metrics.csv'}",
        "--out", str(workdir / "leaderboard.json"),
    ]
)
print("rank exit code:", code)
print(json.loads((workdir / "leaderboard.json").read_text())["ranking_score"])

#%%
# The leaderboard store keeps submissions and re-ranks on every addition.
# Errors come back as a JSON line on stderr with a stable category, and
# exit codes distinguish validation (3), format (4) and I/O (5) failures.

store = workdir / "store.json"
main(["leaderboard", "add", "--store", str(store), "--metrics", str(workdir / "metrics.csv"), "--algorithm", "demo"])
print("store ranking:", json.loads(store.read_text())["ranking"]["ranking_score"])

code = main(["evaluate", "--manifest", str(workdir / "missing.csv"), "--out-metrics", str(workdir / "x.csv")])
print("missing manifest exit code:", code)

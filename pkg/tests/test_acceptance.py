"""End-to-end acceptance checks, one test per release criterion.

Each test prints a single pass/fail line (echoed again in the terminal
summary) with its runtime and budget, so the whole checklist can be read
off one screen.  Tolerances and runtime budgets are part of the criteria
and are asserted, not just reported.
"""

import functools
import time

import numpy as np
import pytest

from voxeval import (
    DEFAULT_POLICY,
    LabelVolume,
    MetricTable,
    RegionMaskSet,
    RegionProbSet,
    Spacing,
    VolumeHeader,
    apply_et_threshold,
    average_probs,
    brats_ranking,
    dice,
    evaluate_case,
    hd95,
    jackknife_stability,
    labels_to_regions,
    optimize_threshold,
    rank_column,
    read_volume,
    soft_dice,
    sweep_thresholds,
    two_level_ensemble,
    write_label_volume,
    write_volume,
)
from voxeval.cli import Manifest, ManifestRow, ToolConfig, evaluate_manifest

from helpers import (
    ACCEPTANCE_LINES,
    constant_probset,
    label_volume_from_masks,
    random_label_volume,
    random_mask,
    random_nested_masks,
    random_probset,
    sphere_mask,
)
from oracles import dice_oracle, hd95_oracle
from test_ranking import FLIP_DICE, FLIP_HD95

WORST_HD95 = 373.13


def _record(label, name, status, elapsed, budget, detail):
    line = f"criterion {label:>3}  {name:<34} {status}  [{elapsed:6.2f}s"
    if budget is not None:
        line += f" / <{budget:g}s"
    line += "]"
    if detail:
        line += f"  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def criterion(label, name, budget=None):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(**kwargs):
            start = time.perf_counter()
            try:
                detail = fn(**kwargs)
            except BaseException as exc:
                elapsed = time.perf_counter() - start
                reason = str(exc).splitlines()[0][:110] if str(exc) else type(exc).__name__
                _record(label, name, "FAIL", elapsed, budget, reason)
                raise
            elapsed = time.perf_counter() - start
            if budget is not None and elapsed > budget:
                _record(label, name, "FAIL", elapsed, budget, "runtime budget exceeded")
                pytest.fail(f"runtime {elapsed:.2f}s exceeds the {budget}s budget")
            _record(label, name, "PASS", elapsed, budget, detail)

        return wrapper

    return decorate


# --------------------------------------------------------------------------
# 1. special-case table


@criterion("1", "special-case table", budget=1.0)
def test_criterion_01_special_cases():
    shape = (8, 8, 8)
    wt = sphere_mask(shape, (4, 4, 4), 3.0)
    tc = sphere_mask(shape, (4, 4, 4), 2.0)
    empty = np.zeros(shape, dtype=bool)
    ref = label_volume_from_masks(wt, tc, empty)

    both_empty = evaluate_case(ref, ref)[2]
    assert both_empty.dice == 1.0 and both_empty.hd95 == 0.0
    assert both_empty.special_case.value == "both_empty"

    et_fp = empty.copy()
    et_fp[4, 4, 4] = True
    pred = label_volume_from_masks(wt, tc, et_fp)
    false_positive = evaluate_case(ref, pred)[2]
    assert false_positive.dice == 0.0 and false_positive.hd95 == WORST_HD95
    assert false_positive.special_case.value == "ref_empty_pred_nonempty"

    missed = evaluate_case(pred, ref)[2]
    assert missed.dice == 0.0 and missed.hd95 == WORST_HD95
    assert missed.special_case.value == "ref_nonempty_pred_empty"


# --------------------------------------------------------------------------
# 2. dice oracle equivalence


@criterion("2", "dice oracle equivalence", budget=5.0)
def test_criterion_02_dice_oracle():
    rng = np.random.default_rng(2001)
    for _ in range(200):
        shape = tuple(rng.integers(1, 33, size=3))
        a = rng.random(shape) < rng.uniform(0.02, 0.8)
        b = rng.random(shape) < rng.uniform(0.02, 0.8)
        if not a.any() and not b.any():
            a.ravel()[0] = True
        assert dice(a, b) == dice_oracle(a, b)


# --------------------------------------------------------------------------
# 3. hd95 oracle equivalence


@criterion("3", "hd95 oracle equivalence", budget=30.0)
def test_criterion_03_hd95_oracle():
    rng = np.random.default_rng(2002)
    worst = 0.0
    for _ in range(100):
        shape = tuple(rng.integers(2, 17, size=3))
        spacing = Spacing(*rng.uniform(0.3, 3.0, size=3))
        a = random_mask(rng, shape, density=rng.uniform(0.05, 0.6))
        b = random_mask(rng, shape, density=rng.uniform(0.05, 0.6))
        worst = max(worst, abs(hd95(a, b, spacing) - hd95_oracle(a, b, spacing)))
    assert worst <= 1e-9

    a = np.zeros((1, 1, 11), dtype=bool)
    a[0, 0, 0] = True
    b = a.copy()
    b[0, 0, 10] = True
    assert hd95(a, b, Spacing()) == pytest.approx(9.5, abs=1e-12)
    return f"max |err| {worst:.2e}"


# --------------------------------------------------------------------------
# 4. ranking correctness


@criterion("4", "ranking correctness", budget=10.0)
def test_criterion_04_ranking():
    cases = ("c1", "c2", "c3")
    strong = np.ones((1, 3, 3))
    weak = np.full((1, 3, 3), 0.5)
    table = MetricTable(
        ("A", "B"),
        cases,
        np.concatenate([strong, weak]),
        np.concatenate([np.zeros((1, 3, 3)), np.full((1, 3, 3), 10.0)]),
    )
    result = brats_ranking(table)
    assert result.score_of("A") == 0.5 and result.score_of("B") == 1.0

    for n in (2, 3, 5, 9):
        same = MetricTable(
            tuple(f"a{i}" for i in range(n)),
            cases,
            np.full((n, 3, 3), 0.7),
            np.full((n, 3, 3), 5.0),
        )
        scores = brats_ranking(same).score
        assert np.all(scores == (n + 1) / (2 * n))

    rng = np.random.default_rng(2003)
    for trial in range(1000):
        n = int(rng.integers(1, 13))
        column = rng.integers(0, 4, size=n) * 0.25
        direction = "higher_better" if trial % 2 else "lower_better"
        assert rank_column(column, direction).sum() == n * (n + 1) / 2

    for _ in range(100):
        n, m = int(rng.integers(2, 6)), int(rng.integers(1, 5))
        dice_values = rng.integers(0, 5, size=(n, m, 3)) / 4.0
        hd95_values = rng.integers(0, 5, size=(n, m, 3)) * 3.5
        base = MetricTable(
            tuple(f"a{i}" for i in range(n)),
            tuple(f"c{j}" for j in range(m)),
            dice_values,
            hd95_values,
        )
        power = float(rng.uniform(0.2, 3.0))
        scale, shift = float(rng.uniform(0.1, 4.0)), float(rng.uniform(0.0, 9.0))
        mapped = MetricTable(
            base.algorithms, base.cases, dice_values**power, hd95_values * scale + shift
        )
        assert np.array_equal(brats_ranking(base).mean_rank, brats_ranking(mapped).mean_rank)


# --------------------------------------------------------------------------
# 5. empty-reference dichotomy


@criterion("5", "empty-ET-reference dichotomy", budget=1.0)
def test_criterion_05_dichotomy():
    rng = np.random.default_rng(2004)
    shape = (8, 8, 8)
    algorithms = [f"alg{i}" for i in range(5)]
    per_algorithm = {name: {} for name in algorithms}
    clean_per_case = []
    for m in range(4):
        wt, tc, _ = random_nested_masks(rng, shape, p_wt=0.4)
        tc[3, 3, 3] = wt[3, 3, 3] = True
        empty = np.zeros(shape, dtype=bool)
        ref = label_volume_from_masks(wt, tc, empty)
        clean = set(rng.choice(len(algorithms), size=int(rng.integers(1, 5)), replace=False))
        clean_per_case.append(clean)
        for i, name in enumerate(algorithms):
            et = empty.copy()
            if i not in clean:
                et[3, 3, 3] = True
            pred = label_volume_from_masks(wt, tc, et)
            per_algorithm[name][f"case{m}"] = list(evaluate_case(ref, pred))
    table = MetricTable.from_records(per_algorithm)

    n = len(algorithms)
    for m, clean in enumerate(clean_per_case):
        k = len(clean)
        dirty = set(range(n)) - clean
        for ranks in (
            rank_column(table.dice[:, m, 2], "higher_better"),
            rank_column(table.hd95[:, m, 2], "lower_better"),
        ):
            assert len(np.unique(ranks)) == 2
            assert all(ranks[i] == (k + 1) / 2 for i in clean)
            assert all(ranks[i] == (k + 1 + n) / 2 for i in dirty)


# --------------------------------------------------------------------------
# 6. postprocessing


def _brute_force_sweep(pairs, candidates):
    order = sorted(set(float(c) for c in candidates))
    mean_dice, perfect, worst = [], [], []
    per_threshold = {}
    for t in order:
        records = [
            evaluate_case(ref, apply_et_threshold(pred, t))[2] for ref, pred in pairs
        ]
        per_threshold[repr(t)] = {
            f"case{i}": [rec] for i, rec in enumerate(records)
        }
        mean_dice.append(np.mean([rec.dice for rec in records]))
        perfect.append(sum(rec.dice == 1.0 and rec.hd95 == 0.0 for rec in records))
        worst.append(sum(rec.dice == 0.0 and rec.hd95 == WORST_HD95 for rec in records))
    table = MetricTable.from_records(per_threshold, regions=("ET",))
    scores = brats_ranking(table).score
    return order, mean_dice, perfect, worst, scores


@criterion("6", "postprocessing sweep and optimum", budget=20.0)
def test_criterion_06_postprocess():
    rng = np.random.default_rng(2005)
    thresholds = [0.0, 2.0, 8.0, 32.0, 128.0]
    volumes = [
        random_label_volume(rng, (10, 10, 10), spacing=Spacing(*rng.uniform(0.5, 2.0, 3)))
        for _ in range(100)
    ]
    empty_counts = []
    for t in thresholds:
        empties = 0
        for volume in volumes:
            cleaned = apply_et_threshold(volume, t)
            before = labels_to_regions(volume)
            after = labels_to_regions(cleaned)
            assert np.array_equal(before.wt, after.wt)
            assert np.array_equal(before.tc, after.tc)
            empties += not after.et.any()
        empty_counts.append(empties)
    assert empty_counts == sorted(empty_counts)

    ref = LabelVolume(np.zeros((8, 8, 8), dtype=np.uint8), Spacing())
    fp = np.zeros((8, 8, 8), dtype=np.uint8)
    fp[4, 4, 4:7] = 4
    pred = LabelVolume(fp, Spacing())
    choice = optimize_threshold(sweep_thresholds([(ref, pred)], [0.0, 10.0]))
    assert choice.best_by_dice == 10.0 and choice.best_by_rank == 10.0

    pairs = []
    for _ in range(12):
        spacing = Spacing(*rng.uniform(0.5, 2.0, 3))
        pairs.append(
            (
                random_label_volume(rng, (10, 10, 10), spacing=spacing),
                random_label_volume(rng, (10, 10, 10), spacing=spacing),
            )
        )
    candidates = [0.0, 1.5, 4.0, 16.0, 64.0]
    sweep = sweep_thresholds(pairs, candidates)
    order, mean_dice, perfect, worst, scores = _brute_force_sweep(pairs, candidates)
    assert list(sweep.thresholds) == order
    assert np.array_equal(sweep.mean_et_dice, np.asarray(mean_dice))
    assert np.array_equal(sweep.perfect_counts, np.asarray(perfect))
    assert np.array_equal(sweep.worst_counts, np.asarray(worst))
    assert np.array_equal(sweep.ranking_scores, scores)


# --------------------------------------------------------------------------
# 7. mean-inflation arithmetic


@criterion("7", "worst-case mean inflation", budget=1.0)
def test_criterion_07_mean_inflation():
    rng = np.random.default_rng(2006)
    values = np.concatenate([rng.uniform(0.0, 60.0, size=120), np.full(5, WORST_HD95)])
    rng.shuffle(values)
    flipped = values.copy()
    flipped[np.flatnonzero(flipped == WORST_HD95)[0]] = 0.0
    drop = float(np.mean(values) - np.mean(flipped))
    assert drop == pytest.approx(2.98504, abs=1e-9)


# --------------------------------------------------------------------------
# 8. two-level ensembling


@criterion("8", "two-level ensembling", budget=5.0)
def test_criterion_08_ensembling():
    shape = (4, 4, 4)
    lone = constant_probset(shape, 0.2, 0.2, 0.2)
    pair = [constant_probset(shape, 0.4, 0.4, 0.4), constant_probset(shape, 0.8, 0.8, 0.8)]
    combined = two_level_ensemble([[lone], pair])
    assert np.max(np.abs(combined.p_wt - 0.4)) <= 1e-12
    assert abs(float(combined.p_wt[0, 0, 0]) - 1.4 / 3.0) > 1e-3  # not the pooled mean

    rng = np.random.default_rng(2007)
    for _ in range(5):
        configs = [
            [random_probset(rng, shape) for _ in range(int(rng.integers(1, 4)))]
            for _ in range(int(rng.integers(1, 5)))
        ]
        base = two_level_ensemble(configs)
        shuffled = [list(config) for config in configs]
        rng.shuffle(shuffled)
        for config in shuffled:
            rng.shuffle(config)
        again = two_level_ensemble(shuffled)
        for region in ("p_wt", "p_tc", "p_et"):
            assert np.max(np.abs(getattr(base, region) - getattr(again, region))) <= 1e-12

    balanced = [[random_probset(rng, shape) for _ in range(2)] for _ in range(3)]
    pooled = average_probs([member for config in balanced for member in config])
    nested = two_level_ensemble(balanced)
    for region in ("p_wt", "p_tc", "p_et"):
        assert np.max(np.abs(getattr(nested, region) - getattr(pooled, region))) <= 1e-12


# --------------------------------------------------------------------------
# 9. batch vs sample soft dice


@criterion("9", "batch vs sample soft dice", budget=1.0)
def test_criterion_09_soft_dice_modes():
    shape = (12, 12, 12)
    tiny = np.zeros(shape, dtype=bool)
    tiny[0, 0, 0] = True
    big = np.zeros(shape, dtype=bool)
    big.ravel()[:1000] = True
    zero = np.zeros(shape, dtype=bool)
    refs = [RegionMaskSet(tiny, tiny, tiny, Spacing()), RegionMaskSet(big, big, big, Spacing())]
    probs = [
        RegionProbSet(zero.astype(float), zero.astype(float), zero.astype(float), Spacing()),
        RegionProbSet(big.astype(float), big.astype(float), big.astype(float), Spacing()),
    ]
    assert soft_dice(probs, refs, "sample") == pytest.approx(0.5, abs=1e-4)
    assert soft_dice(probs, refs, "batch") >= 0.999

    rng = np.random.default_rng(2008)
    wt, tc, et = random_nested_masks(rng, (7, 7, 7), p_wt=0.4)
    single_ref = [RegionMaskSet(wt, tc, et, Spacing())]
    single_prob = [random_probset(rng, (7, 7, 7))]
    assert soft_dice(single_prob, single_ref, "sample") == pytest.approx(
        soft_dice(single_prob, single_ref, "batch"), abs=1e-12
    )


# --------------------------------------------------------------------------
# 10. volume I/O roundtrip


@criterion("10", "volume roundtrip bit-exactness", budget=5.0)
def test_criterion_10_io_roundtrip(tmp_path):
    rng = np.random.default_rng(2009)
    shape = (9, 7, 5)
    spacing = Spacing(0.5, 1.0, 2.5)
    for dtype in ("uint8", "int16", "int32", "float32", "float64"):
        if np.dtype(dtype).kind == "f":
            data = (rng.random(shape) * 200 - 100).astype(dtype)
        else:
            info = np.iinfo(dtype)
            data = rng.integers(info.min, info.max, size=shape).astype(dtype)
        for suffix in (".nii", ".nii.gz"):
            path = tmp_path / f"vol_{dtype}{suffix}"
            write_volume(path, VolumeHeader(shape, dtype, spacing), data)
            header, back = read_volume(path)
            assert back.dtype == np.dtype(dtype)
            assert back.tobytes() == data.tobytes()
            assert header.spacing == spacing


# --------------------------------------------------------------------------
# 11. performance


def _synthetic_case(shape, centers, radii, shift=(0, 0, 0), spacing=Spacing()):
    def nested(offset):
        masks = []
        for scale in (1.0, 0.65, 0.35):
            mask = np.zeros(shape, dtype=bool)
            for center, radius in zip(centers, radii):
                moved = tuple(c + o for c, o in zip(center, offset))
                mask |= sphere_mask(shape, moved, radius * scale)
            masks.append(mask)
        return masks

    ref = label_volume_from_masks(*nested((0, 0, 0)), spacing=spacing)
    pred = label_volume_from_masks(*nested(shift), spacing=spacing)
    return ref, pred


@criterion("11a", "single-case runtime", budget=None)
def test_criterion_11a_single_case_speed():
    rng = np.random.default_rng(2010)
    for _ in range(5):
        shape = tuple(rng.integers(4, 13, size=3))
        a = random_mask(rng, shape, density=0.3)
        b = random_mask(rng, shape, density=0.3)
        spacing = Spacing(*rng.uniform(0.5, 2.0, 3))
        assert abs(hd95(a, b, spacing) - hd95_oracle(a, b, spacing)) <= 1e-9

    shape = (240, 240, 155)
    ref, pred = _synthetic_case(
        shape, [(120, 120, 77)], [40.0], shift=(3, 2, 1), spacing=Spacing(1.0, 1.0, 1.0)
    )
    start = time.perf_counter()
    records = evaluate_case(ref, pred)
    elapsed = time.perf_counter() - start
    assert all(rec.special_case.value == "none" for rec in records)
    assert elapsed < 2.0
    return f"240x240x155 evaluate_case in {elapsed:.2f}s"


@criterion("11b", "parallel scaling over 20 cases", budget=None)
def test_criterion_11b_parallel_scaling(tmp_path):
    shape = (96, 96, 96)
    rows = []
    rng = np.random.default_rng(2011)
    for i in range(20):
        jitter = tuple(int(j) for j in rng.integers(-4, 5, size=3))
        ref, pred = _synthetic_case(
            shape,
            centers=[(20, 20, 20), (76, 76, 76)],
            radii=[16.0 + i % 3, 18.0],
            shift=jitter,
        )
        ref_path = tmp_path / f"case{i}_ref.nii"
        pred_path = tmp_path / f"case{i}_pred.nii"
        write_label_volume(ref_path, ref)
        write_label_volume(pred_path, pred)
        rows.append(ManifestRow(f"case{i}", ref_path, pred_path))
    manifest = Manifest(tuple(rows))
    config = ToolConfig()

    evaluate_manifest(Manifest(tuple(rows[:1])), config, 1)  # warm caches
    start = time.perf_counter()
    serial = evaluate_manifest(manifest, config, 1)
    serial_s = time.perf_counter() - start
    start = time.perf_counter()
    parallel = evaluate_manifest(manifest, config, 4)
    parallel_s = time.perf_counter() - start
    assert parallel == serial  # same results in manifest order
    speedup = serial_s / parallel_s
    assert speedup >= 3.0, (
        f"4-worker speedup {speedup:.2f}x over 20 cases "
        f"(serial {serial_s:.2f}s, parallel {parallel_s:.2f}s)"
    )
    return f"speedup {speedup:.2f}x (serial {serial_s:.2f}s, parallel {parallel_s:.2f}s)"


# --------------------------------------------------------------------------
# 12. jackknife instability


@criterion("12", "jackknife rank flips", budget=5.0)
def test_criterion_12_jackknife_flips():
    table = MetricTable(
        ("A", "B", "C"),
        ("case0", "case1"),
        np.asarray(FLIP_DICE, dtype=float),
        np.asarray(FLIP_HD95, dtype=float),
    )
    report = jackknife_stability(table)
    assert len(report.flips) >= 1
    relations = {(f.removed, f.algorithm_a, f.algorithm_b) for f in report.flips}
    assert ("C", "A", "B") in relations
    return f"{len(report.flips)} flip(s) across {len(report.leave_one_out)} pools"

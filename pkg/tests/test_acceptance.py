"""Acceptance gate. Each test carries a ``criterion`` marker and the run ends
with one PASS/FAIL line per criterion in the "acceptance criteria" section."""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from topo_metrics.cli import EXIT_OK, main
from topo_metrics.core import pairwise_distances
from topo_metrics.harness import CorrelationMode, evaluate, spearman
from topo_metrics.homology import persistence_metric, rips_h0_diagram, rips_h1_diagram
from topo_metrics.io import synth_cloud
from topo_metrics.oracle import kruskal_mst, naive_persistence
from topo_metrics.spectral import SPECTRAL_METRICS, self_cluster

from conftest import SQRT2, random_clouds, random_orthogonal
from test_harness import HAND, hand_fixture


def same_multiset(a, b):
    return np.array_equal(a.sorted_intervals(), b.sorted_intervals())


@pytest.mark.criterion(1, "oracle equivalence on 200 random clouds")
def test_oracle_equivalence():
    start = time.perf_counter()
    clouds = random_clouds(200)
    assert {x.shape[0] for x in clouds} <= set(range(3, 13))
    assert {x.shape[1] for x in clouds} == {1, 2, 3, 4}
    mismatches = []
    for i, x in enumerate(clouds):
        dm = pairwise_distances(x)
        oracle = naive_persistence(dm)
        if not same_multiset(rips_h0_diagram(dm), oracle[0]) or not same_multiset(rips_h1_diagram(dm), oracle[1]):
            mismatches.append(i)
    elapsed = time.perf_counter() - start
    assert mismatches == []
    assert elapsed < 30.0


@pytest.mark.criterion(2, "analytic fixtures (square, equilateral triangle)")
def test_analytic_fixtures(unit_square, equilateral):
    r = persistence_metric(unit_square, dims=(0, 1))
    assert abs(r["persistence0"] - 3 / SQRT2) <= 1e-12
    assert abs(r["persistence1"] - (SQRT2 - 1) / SQRT2) <= 1e-12
    assert abs(persistence_metric(equilateral, dims=(1,))["persistence1"]) <= 1e-12


@pytest.mark.criterion(3, "circle has one dominant H1 bar dying at sqrt(3)")
def test_circle_topology():
    dg = rips_h1_diagram(pairwise_distances(synth_cloud("circle", 60, 2, seed=0)))
    order = np.argsort(dg.lengths)[::-1]
    assert dg.lengths[order[0]] >= 10 * dg.lengths[order[1]]
    assert abs(dg.intervals[order[0], 1] - math.sqrt(3)) <= 1e-6

    # at a size the oracle can handle, the same picture with exact agreement
    dm = pairwise_distances(synth_cloud("circle", 12, 2, seed=0))
    small = rips_h1_diagram(dm)
    assert same_multiset(small, naive_persistence(dm)[1])
    lengths = np.sort(small.lengths)[::-1]
    assert lengths[0] >= 10 * lengths[1]
    assert abs(small.intervals[np.argmax(small.lengths), 1] - math.sqrt(3)) <= 1e-6


@pytest.mark.criterion(4, "H0 scaling exponents for d=2 and d=3")
def test_scaling_law(tmp_path, capsys):
    out = tmp_path / "scaling.json"
    start = time.perf_counter()
    argv = ["scaling", "--dims", "2,3", "--n-grid", "100,200,400,800,1600", "--trials", "10", "--output", str(out)]
    assert main(argv) == EXIT_OK
    elapsed = time.perf_counter() - start
    fits = {f["d"]: f["fitted_exponent"] for f in json.loads(out.read_text())["fits"]}
    with capsys.disabled():
        print(f"\n  fitted exponents: d=2 {fits[2]:.4f}, d=3 {fits[3]:.4f} ({elapsed:.1f}s)")
    assert abs(fits[2] - 0.5) <= 0.07
    assert abs(fits[3] - 2 / 3) <= 0.07
    assert elapsed < 300.0


@pytest.mark.criterion(5, "invariance under scaling, isometry, permutation and rotation")
def test_invariance_suite():
    rng = np.random.default_rng(55)
    for _ in range(5):
        x = rng.standard_normal((40, 5)) * rng.uniform(0.2, 2.0, size=5)
        base = persistence_metric(x, subsample=None).values
        q = random_orthogonal(5, rng)
        moved = x @ q + rng.uniform(-10, 10, size=5)
        perm = rng.permutation(len(x))
        for c in (1e-3, 42.0):
            scaled = persistence_metric(c * x, subsample=None).values
            for k in base:
                assert scaled[k] == pytest.approx(base[k], rel=1e-9)
        isometric = persistence_metric(moved, subsample=None).values
        for k in base:
            assert isometric[k] == pytest.approx(base[k], rel=1e-9, abs=1e-9)
        assert persistence_metric(x[perm], subsample=None).values == base

        for name, fn in {**SPECTRAL_METRICS, "self_cluster": self_cluster}.items():
            value = fn(x)
            assert fn(x @ q) == pytest.approx(value, rel=1e-8), name
            for c in (1e-3, 7.5, 1e4):
                assert fn(c * x) == pytest.approx(value, rel=1e-8), name


@pytest.mark.criterion(6, "H0 deaths equal Kruskal MST edge weights")
def test_h0_equals_mst():
    for x in random_clouds(200):
        dm = pairwise_distances(x)
        _, weights = kruskal_mst(dm)
        np.testing.assert_array_equal(np.sort(rips_h0_diagram(dm).intervals[:, 1]), np.sort(weights))


@pytest.mark.criterion(7, "harness hand fixture, tie handling, absolute mode")
def test_harness_correctness():
    summary = evaluate(hand_fixture(), ["m", "m2"], ["t", "t2"])
    for (metric, task), (p, s, q, best) in HAND.items():
        cell = summary.cell(metric, task)
        assert abs(cell.pearson - p) <= 1e-12
        assert abs(cell.spearman - s) <= 1e-12
        assert abs(cell.selection_quality - q) <= 1e-12
        assert cell.best_possible == best
    # y ranks (1.5, 1.5, 3, 4) against x ranks (1, 2, 3, 4)
    assert abs(spearman([1, 2, 3, 4], [10, 10, 20, 30]) - 4.5 / math.sqrt(22.5)) <= 1e-12
    absolute = evaluate(hand_fixture(CorrelationMode.ABSOLUTE), ["m", "m2"], ["t", "t2"])
    for (metric, task), (p, s, _, _) in HAND.items():
        assert abs(absolute.cell(metric, task).pearson - abs(p)) <= 1e-12
        assert abs(absolute.cell(metric, task).spearman - abs(s)) <= 1e-12


@pytest.mark.criterion(8, "collapsed clusters score below a uniform cube, 10/10 seeds")
def test_cluster_vs_cube():
    wins = 0
    for seed in range(10):
        clusters = synth_cloud("clusters", 300, 8, noise=0.01, clusters=3, seed=seed)
        cube = synth_cloud("cube", 300, 8, seed=seed)
        a = persistence_metric(clusters, dims=(0,), subsample=None)["persistence0"]
        b = persistence_metric(cube, dims=(0,), subsample=None)["persistence0"]
        wins += a < b
    assert wins == 10


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "topo_metrics", *args], capture_output=True, check=False)


@pytest.mark.criterion(9, "every CLI command is byte-for-byte deterministic")
def test_determinism(tmp_path):
    emb = tmp_path / "emb.bin"
    runs = tmp_path / "runs.csv"
    config = tmp_path / "config.json"
    runs.write_text("run_id,m,m2,t,t2\nr1,1,5,2,5\nr2,2,3,1,4\nr3,3,3,4,3\nr4,4,1,3,2\nr5,5,2,5,1\n")
    config.write_text(json.dumps({"metrics": ["m", "m2"], "tasks": ["t", "t2"], "orientation": {"m2": "lower"}}))

    outputs = []
    for attempt in range(2):
        out = tmp_path / f"synth{attempt}.bin"
        synth = _cli("synth", "--shape", "clusters", "--n", "700", "--d", "6", "--noise", "0.05", "--seed", "3",
                     "--output", str(out))
        assert synth.returncode == 0, synth.stderr
        if attempt == 0:
            emb.write_bytes(out.read_bytes())
        results = [
            out.read_bytes(),
            _cli("compute", "--input", str(emb), "--seed", "5", "--subsample", "300"),
            _cli("evaluate", "--runs", str(runs), "--config", str(config)),
            _cli("scaling", "--dims", "2,3", "--n-grid", "50,100", "--trials", "3", "--seed", "1"),
        ]
        for r in results[1:]:
            assert r.returncode == 0, r.stderr
        outputs.append([results[0]] + [r.stdout for r in results[1:]])
    first, second = outputs
    for a, b in zip(first, second):
        assert len(a) > 0
        assert a == b

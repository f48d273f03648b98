"""Acceptance gate: one PASS/FAIL line per criterion, printed in the run summary."""
from __future__ import annotations

import gc
import logging
import statistics
import subprocess
import sys
import time

import pytest

from reebmapper.cover import Box, refine, resolution, uniform_cover
from reebmapper.fixtures import (
    aligned_pair,
    auto_depth,
    canned,
    oracle_reeb_graph,
    random_instance,
    raster_jcn_count,
    sampling_oracle,
    square_grid_2d,
)
from reebmapper.interleave import (
    build_interleaving,
    certified_upper_bound,
    corrupt,
    identity_witness,
    swapped,
    verify_interleaving,
)
from reebmapper.mapper import categorical_mapper, default_test_boxes, jcn, lemma61_check
from reebmapper.preimage import active_vertex_partition, components
from reebmapper.reeb import (
    ReebGraph,
    betti,
    contract_regular,
    essential_values,
    geometric_mapper,
    is_adapted,
    reeb_graph,
    rgraph_isomorphic,
)

@pytest.fixture(autouse=True, scope="module")
def _quiet():
    log = logging.getLogger("reebmapper")
    level = log.level
    log.setLevel(logging.ERROR)
    yield
    log.setLevel(level)


def verdict(record_property, n: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    record_property("acceptance", line)
    print(line)
    assert ok, line


def _bounds_cover(x, counts, gain):
    lo, hi = x.image_bounds()
    return uniform_cover(Box(tuple(lo), tuple(hi)), counts, gain)


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1_colimit_matches_direct(record_property):
    t0 = time.perf_counter()
    failures, fewest, pairs = 0, None, 0
    for seed in range(200):
        x, c = random_instance(seed, dim_range=1 + seed % 2)
        boxes = default_test_boxes(x, c, count=16, seed=seed, limit=40)
        rep = lemma61_check(x, c, boxes)
        failures += not rep.passed
        pairs += rep.pairs_checked
        fewest = len(boxes) if fewest is None else min(fewest, len(boxes))
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and fewest >= 10 and elapsed < 120
    verdict(record_property, 1, ok,
            f"200 instances, >= {fewest} boxes each, {pairs} nested pairs, {failures} failures, {elapsed:.1f} s")


# -- 2 and 7 ---------------------------------------------------------------------

def _instances():
    for seed in range(50):
        x, c = random_instance(1000 + seed, dim_range=1)
        yield lambda x=x, c=c: build_interleaving(x, c)
    for seed in range(20):
        x, c = random_instance(2000 + seed, dim_range=2)
        yield lambda x=x, c=c, seed=seed: build_interleaving(x, c, count=64, seed=seed)


@pytest.fixture(scope="module")
def witness_summary():
    """Verify each witness, its identity and its swap, keeping only counts."""
    s = {"failed": 0, "full": 0, "sampled": 0, "sizes": set(), "bad_identity": 0, "bad_swap": 0, "n": 0}
    for make in _instances():
        w = make()
        r = verify_interleaving(w)
        s["n"] += 1
        s["failed"] += not r.passed
        s[r.label] += 1
        if r.label == "sampled":
            s["sizes"].add(r.generators)
        s["bad_identity"] += not verify_interleaving(identity_witness(w.G.space, w.generators, w.pairs)).passed
        s["bad_swap"] += not verify_interleaving(swapped(w)).passed
        del w
        gc.collect()
    return s


def test_criterion_2_interleaving_certified(record_property, witness_summary):
    s = witness_summary
    caught = 0
    controls = 10
    for seed in range(controls):
        x, c = random_instance(1000 + seed, dim_range=1)
        w = build_interleaving(x, c)
        if corrupt(w) is not None and not verify_interleaving(w).passed:
            caught += 1
        del w
        gc.collect()
    ok = (s["failed"] == 0 and s["full"] == 50 and s["sampled"] == 20
          and s["sizes"] == {64} and caught == controls)
    verdict(record_property, 2, ok,
            f"{s['full']} d=1 full + {s['sampled']} d=2 sampled witnesses, {s['failed']} failures; "
            f"corruption caught {caught}/{controls}")


def test_criterion_7_reflexive_and_symmetric(record_property, witness_summary):
    s = witness_summary
    ok = s["bad_identity"] == 0 and s["bad_swap"] == 0
    verdict(record_property, 7, ok,
            f"{s['n']} instances: identity failures {s['bad_identity']}, swapped failures {s['bad_swap']}; "
            "triangle inequality not tested")


# -- 3 ---------------------------------------------------------------------------

def test_criterion_3_engine_matches_oracle(record_property):
    mismatches = unstable = 0
    pairs = 600
    for seed in range(pairs):
        x, boxes = aligned_pair(seed, dim_range=1 + seed % 2)
        depth = max(33, auto_depth(x, boxes)) | 1
        cs = components(x, boxes)
        a = sampling_oracle(x, boxes, depth=depth)
        b = sampling_oracle(x, boxes, depth=depth + 2)
        if (a.count, a.vertex_partition) != (b.count, b.vertex_partition):
            unstable += 1
        if len(cs) != a.count or active_vertex_partition(cs, x.complex.vertex_count) != a.vertex_partition:
            mismatches += 1
    ok = mismatches == 0 and unstable == 0
    verdict(record_property, 3, ok,
            f"{pairs} (mesh, region) pairs, {mismatches} mismatches, {unstable} unstable at depth+2")


# -- 4 ---------------------------------------------------------------------------

def test_criterion_4_canonical_reeb_graphs(record_property):
    notes, ok = [], True
    for name in ("tent", "circle4", "torus"):
        x = canned(name).space
        values, edges = oracle_reeb_graph(x)
        oracle = contract_regular(ReebGraph(tuple(values), tuple(edges)))
        g = reeb_graph(x)
        match = rgraph_isomorphic(oracle, g, "exact")
        bp = (betti(oracle).b0, betti(oracle).b1)
        if name == "tent":
            shape = oracle.node_count == 3 and bp == (1, 0)
        elif name == "circle4":
            shape = oracle.node_count == 2 and len(oracle.edges) == 2 and bp == (1, 1)
        else:
            shape = bp == (1, 1) and len(oracle.non_regular_nodes()) == 4
        ok &= match and shape
        notes.append(f"{name} {oracle.node_count}n/{len(oracle.edges)}e b={bp} match={match}")
    verdict(record_property, 4, ok, "; ".join(notes))


# -- 5 ---------------------------------------------------------------------------

GAINS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)


def test_criterion_5_adapted_covers_and_sweep(record_property):
    notes, ok = [], True
    for name in ("tent", "circle4", "torus"):
        x = canned(name).space
        g = reeb_graph(x)
        crit = essential_values(g)
        adapted = iso = 0
        for n in range(2, 13):
            for gain in GAINS:
                c = _bounds_cover(x, n, gain)
                if is_adapted(c, crit):
                    adapted += 1
                    iso += rgraph_isomorphic(geometric_mapper(categorical_mapper(x, c)), g, "monotone")
        ok &= adapted > 0 and iso == adapted
        notes.append(f"{name} isomorphic on {iso}/{adapted} adapted covers")
    sweep_ok = True
    for name in ("tent", "circle4", "torus"):
        x = canned(name).space
        c = _bounds_cover(x, 2, 0.5)
        prev = None
        for _ in range(4):
            bound = certified_upper_bound(x, c)
            res = resolution(c)
            sweep_ok &= bound <= res
            if prev is not None:
                sweep_ok &= res < prev and res == pytest.approx(prev / 2)
            prev = res
            c = refine(c)
    ok &= sweep_ok
    notes.append(f"4-step sweeps certified and halving: {sweep_ok}")
    verdict(record_property, 5, ok, "; ".join(notes))


# -- 6 ---------------------------------------------------------------------------

def test_criterion_6_jcn_matches_raster(record_property):
    mismatches, total = [], 0
    for seed in range(20):
        x = square_grid_2d(32, "sines", seed)
        for k in range(2, 9):
            nerve = jcn(x, (k, k), 0.5)
            raster = raster_jcn_count(x, 32, _bounds_cover(x, (k, k), 0.5))
            total += 1
            if len(nerve.vertices) != raster:
                mismatches.append((seed, k, len(nerve.vertices), raster))
    ok = not mismatches
    example = f"; e.g. seed {mismatches[0][0]} k={mismatches[0][1]}: jcn {mismatches[0][2]} vs raster {mismatches[0][3]}" \
        if mismatches else ""
    verdict(record_property, 6, ok, f"20 fields x k=2..8, {len(mismatches)}/{total} mismatches{example}")


# -- 8 ---------------------------------------------------------------------------

def test_criterion_8_jcn_scaling(record_property):
    medians = {}
    for n in (32, 64, 128):
        runs = []
        for _ in range(5):
            x = square_grid_2d(n, "sines", 0)  # fresh space: no memo carried between runs
            t0 = time.perf_counter()
            jcn(x, (4, 4), 0.5)
            runs.append(time.perf_counter() - t0)
        medians[n] = statistics.median(runs)
    r1, r2 = medians[64] / medians[32], medians[128] / medians[64]
    ok = r1 < 2.5 and r2 < 2.5
    verdict(record_property, 8, ok,
            f"median s {medians[32]:.3f} / {medians[64]:.3f} / {medians[128]:.3f}, ratios {r1:.2f}x and {r2:.2f}x")


# -- 9 ---------------------------------------------------------------------------

def test_criterion_9_converge_csv_is_deterministic(record_property, tmp_path):
    outs = []
    for run in ("a", "b"):
        cmd = [sys.executable, "-m", "reebmapper.cli", "converge", "--fixture", "circle4",
               "--steps", "4", "--seed", "7", "--out", str(tmp_path / run)]
        proc = subprocess.run(cmd, capture_output=True, check=False)
        assert proc.returncode == 0, proc.stderr
        outs.append((tmp_path / run / "converge.csv").read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    verdict(record_property, 9, ok, f"two runs, {len(outs[0])} bytes, identical={outs[0] == outs[1]}")

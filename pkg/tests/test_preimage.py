from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebmapper.complex import from_arrays
from reebmapper.cover import Box
from reebmapper.errors import ContainmentError
from reebmapper.fixtures import aligned_pair, canned, sampling_oracle
from reebmapper.lp import hull_meets_box
from reebmapper.preimage import (
    ComponentEngine,
    active_vertex_partition,
    component_map,
    components,
    engine_for,
    simplex_region_intersects,
)


@pytest.fixture
def tent():
    return canned("tent").space


def test_activity_examples():
    x = from_arrays([[0.0], [1.0]], [[0, 1]])
    assert simplex_region_intersects((0, 1), x.map, Box.of((0.5, 1.5)))
    assert not simplex_region_intersects((0,), x.map, Box.of((0.25, 0.75)))
    tri = from_arrays([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], [[0, 1, 2]])
    assert simplex_region_intersects((0, 1, 2), tri.map, Box.of((0.9, 1.1), (0.9, 1.1)))


def test_touching_a_face_is_not_activity():
    x = from_arrays([[0.0], [1.0]], [[0, 1]])
    assert not simplex_region_intersects((0, 1), x.map, Box.of((1.0, 2.0)))
    assert not simplex_region_intersects((0, 1), x.map, Box.of((1.0 - 1e-12, 2.0)))
    assert simplex_region_intersects((0, 1), x.map, Box.of((1.0 - 1e-6, 2.0)))


def test_tent_components(tent):
    assert len(components(tent, Box.of((0.5, 1.5)))) == 1
    assert len(components(tent, Box.of((-0.5, 0.5)))) == 2
    assert len(components(tent, Box.of((3, 4)))) == 0


def test_tent_inclusion_map(tent):
    small = components(tent, Box.of((-0.5, 0.5)))
    large = components(tent, Box.of((-0.5, 1.5)))
    m = component_map(tent, small, large)
    assert len(large) == 1 and set(m) == set(small.labels)
    assert set(m.values()) == set(large.labels)


def test_identity_and_empty_maps(tent):
    cs = components(tent, Box.of((0.2, 0.8)))
    assert component_map(tent, cs, cs) == {lab: lab for lab in cs.labels}
    assert component_map(tent, components(tent, Box.of((5, 6))), cs) == {}


def test_non_inclusion_is_rejected(tent):
    small = components(tent, Box.of((-0.5, 0.5)))
    large = components(tent, Box.of((0.6, 0.9)))
    with pytest.raises(ContainmentError):
        component_map(tent, small, large)


def test_union_of_overlapping_boxes_glues(tent):
    u = components(tent, [Box.of((-0.5, 0.5)), Box.of((0.4, 1.5))])
    assert len(u) == 1
    apart = components(tent, [Box.of((-0.5, 0.3)), Box.of((0.4, 1.5))])
    assert len(apart) == 3


def test_union_boxes_sharing_only_a_face_stay_apart():
    x = from_arrays([[0.0], [1.0]], [[0, 1]])
    assert len(components(x, [Box.of((0.0, 0.5)), Box.of((0.5, 1.0))])) == 2


def test_component_map_into_union(tent):
    small = components(tent, Box.of((0.45, 0.48)))
    large = components(tent, [Box.of((-0.5, 0.5)), Box.of((0.4, 1.5))])
    m = component_map(tent, small, large)
    assert len(small) == 2 and set(m.values()) == set(large.labels)


def test_partition_and_json(tent):
    cs = components(tent, Box.of((-0.5, 0.5)))
    cx = tent.complex
    parts = sorted(sorted(cx.simplices[s] for s in simps) for simps in cs.partition().values())
    assert parts == [[(0,), (0, 1)], [(1, 2), (2,)]]
    assert active_vertex_partition(cs, cx.vertex_count) == {frozenset({0}), frozenset({2})}
    assert set(cs.to_json()) == {"region", "components"}


def test_tolerance_override(monkeypatch):
    x = from_arrays([[0.0], [1.0]], [[0, 1]])
    b = Box.of((1.0 - 1e-6, 2.0))
    assert len(ComponentEngine(x).components(b)) == 1
    assert len(ComponentEngine(x, tol=1e-3).components(b)) == 0
    monkeypatch.setenv("REEBMAPPER_TOL", "1e-3")
    assert len(ComponentEngine(x).components(b)) == 0


def test_engine_is_shared_per_space(tent):
    assert engine_for(tent) is engine_for(tent)


@st.composite
def triangles_and_boxes(draw):
    d = draw(st.integers(2, 3))
    k = draw(st.integers(1, 3))
    coords = st.floats(-2, 2, allow_nan=False).map(lambda v: round(v, 3))
    pts = np.array(draw(st.lists(coords, min_size=k * d, max_size=k * d))).reshape(k, d)
    lo = np.array(draw(st.lists(coords, min_size=d, max_size=d)))
    w = np.array(draw(st.lists(st.floats(0.01, 2).map(lambda v: round(v, 3)), min_size=d, max_size=d)))
    return pts, Box(tuple(lo), tuple(lo + w))


@settings(max_examples=150, deadline=None)
@given(triangles_and_boxes())
def test_vectorised_activity_matches_exact_lp(case):
    pts, box = case
    x = from_arrays(pts, [list(range(len(pts)))])
    eng = ComponentEngine(x)
    top = x.complex.index[tuple(range(len(pts)))]
    fast = top in set(eng.active_ids(box).tolist())
    tau = eng.tol
    exact = hull_meets_box(pts, [a + tau for a in box.lo], [b - tau for b in box.hi])
    assert fast == exact


@pytest.mark.parametrize("seed", range(0, 40))
def test_engine_matches_sampling_oracle(seed):
    x, boxes = aligned_pair(seed, dim_range=1 + seed % 2)
    cs = components(x, boxes)
    oracle = sampling_oracle(x, boxes, depth=33)
    assert len(cs) == oracle.count
    assert active_vertex_partition(cs, x.complex.vertex_count) == oracle.vertex_partition


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.floats(0, 0.6), w=st.floats(0.05, 0.4), grow=st.floats(0, 0.3))
def test_nested_regions_compose(seed, a, w, grow):
    from reebmapper.fixtures import random_instance

    x, _ = random_instance(seed, dim_range=1, max_simplices=60)
    i1 = Box.of((a, a + w))
    i2 = i1.thicken(grow / 2)
    i3 = i2.thicken(grow / 2 + 0.01)
    c1, c2, c3 = (components(x, b) for b in (i1, i2, i3))
    m12, m23, m13 = component_map(x, c1, c2), component_map(x, c2, c3), component_map(x, c1, c3)
    assert m13 == {k: m23[v] for k, v in m12.items()}

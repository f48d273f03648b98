from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebmapper.cover import (
    Box,
    Cover,
    cover_from_json,
    k_sub,
    nerve_of_cover,
    normalize_region,
    refine,
    resolution,
    thicken,
    uniform_cover,
    union_region,
)
from reebmapper.errors import CoverError


def _intervals(c):
    return [(b.lo[0], b.hi[0]) for b in c.elements]


def test_three_intervals_half_gain():
    c = uniform_cover(Box.of((0, 1)), 3, 0.5)
    assert _intervals(c) == pytest.approx([(-0.375, 0.375), (0.125, 0.875), (0.625, 1.375)])
    assert resolution(c) == pytest.approx(0.75)


def test_two_intervals_half_gain():
    c = uniform_cover(Box.of((0, 1)), 2, 0.5)
    assert _intervals(c) == pytest.approx([(-0.75, 0.75), (0.25, 1.75)])
    assert resolution(c) == pytest.approx(1.5)


@pytest.mark.parametrize("gain", [0.0, 1.0, 1.5, -0.2])
def test_gain_outside_unit_interval(gain):
    with pytest.raises(CoverError):
        uniform_cover(Box.of((0, 1)), 3, gain)


def test_bad_counts_and_ranges():
    with pytest.raises(CoverError):
        uniform_cover(Box.of((0, 1)), 0, 0.5)
    with pytest.raises(CoverError):
        uniform_cover(Box.of((0, 1), (0, 1)), (2, 2, 2), 0.5)
    with pytest.raises(CoverError):
        uniform_cover(Box.of((0, math.inf)), 2, 0.5)


def test_box_diameter_is_longest_side():
    assert resolution(Cover((Box.of((0, 1), (0, 2)),))) == 2.0


def test_nerve_of_three_intervals_is_a_path():
    c = uniform_cover(Box.of((0, 1)), 3, 0.5)
    k = nerve_of_cover(c)
    assert k.simplices == ((0,), (1,), (2,), (0, 1), (1, 2))
    assert k.box((0, 1)).lo[0] == pytest.approx(0.125)
    assert k.box((0, 1)).hi[0] == pytest.approx(0.375)


def test_disjoint_boxes_give_isolated_vertices():
    k = nerve_of_cover(Cover((Box.of((0, 1)), Box.of((2, 3)))))
    assert k.simplices == ((0,), (1,))


def test_two_by_two_cover_has_the_fourfold_simplex():
    k = nerve_of_cover(uniform_cover(Box.of((0, 1), (0, 1)), 2, 0.5))
    assert (0, 1, 2, 3) in k
    centre = k.box((0, 1, 2, 3))
    assert centre.lo[0] < 0.5 < centre.hi[0] and centre.lo[1] < 0.5 < centre.hi[1]


def test_k_sub_examples():
    c = uniform_cover(Box.of((0, 1)), 3, 0.5)
    k = nerve_of_cover(c)
    assert k_sub(c, k, Box.of((0.2, 0.3))) == [(0,), (1,), (0, 1)]
    assert k_sub(c, k, Box.of((5, 6))) == []
    assert k_sub(c, k, Box.of((-10, 10))) == list(k.simplices)
    assert union_region(c, k, Box.of((0.2, 0.3))) == (c.elements[0], c.elements[1])


def test_thicken_examples():
    assert thicken(Box.of((0, 1)), 0.5) == Box.of((-0.5, 1.5))
    b = Box.of((0.1, 0.2))
    assert thicken(b, 0) is b
    assert Box.of((0, 1), (2, 3)).thicken(1) == Box.of((-1, 2), (1, 4))
    with pytest.raises(ValueError):
        thicken(b, -1)


def test_refine_examples():
    c = refine(uniform_cover(Box.of((0, 1)), 3, 0.5))
    assert c.uniform.counts == (5,) and c.uniform.gain == 0.5
    assert resolution(c) == pytest.approx(0.375)
    assert refine(uniform_cover(Box.of((0, 1)), 2, 0.5)).uniform.counts == (3,)
    with pytest.raises(CoverError):
        refine(Cover((Box.of((0, 1)),)))


def test_box_predicates_are_strict():
    a, b = Box.of((0, 1)), Box.of((1, 2))
    assert not a.meets(b)
    assert a.meets(Box.of((0.999, 2)))
    assert Box.of((0, 2)).contains(a)
    assert not a.contains(Box.of((0, 1.01)))
    assert Box.of((1, 1)).is_empty


def test_normalize_region_merges_and_drops():
    boxes = [Box.of((0, 1), (0, 1)), Box.of((0.5, 2), (0, 1)), Box.of((0.2, 0.3), (0.2, 0.3))]
    assert normalize_region(boxes) == (Box.of((0, 2), (0, 1)),)
    assert normalize_region([Box.of((0, 1)), Box.of((2, 3))]) == (Box.of((0, 1)), Box.of((2, 3)))


def test_cover_json_round_trip():
    c = uniform_cover(Box.of((0, 1), (0, 2)), (2, 3), 0.4)
    assert cover_from_json(c.to_json()).elements == c.elements
    with pytest.raises(CoverError):
        cover_from_json({"boxes": []})


@settings(max_examples=80, deadline=None)
@given(
    lo=st.floats(-100, 100),
    width=st.floats(0.01, 100),
    n=st.integers(1, 12),
    gain=st.floats(0.05, 0.95),
)
def test_uniform_cover_properties(lo, width, n, gain):
    c = uniform_cover(Box.of((lo, lo + width)), n, gain)
    iv = _intervals(c)
    # the closed range sits inside the union
    assert iv[0][0] < lo and iv[-1][1] > lo + width
    # only neighbours overlap, and they all do
    for i in range(len(iv)):
        for j in range(i + 1, len(iv)):
            overlap = max(iv[i][0], iv[j][0]) < min(iv[i][1], iv[j][1])
            assert overlap == (j == i + 1)
    k = nerve_of_cover(c)
    assert len(k.edges()) == n - 1
    if n > 1:
        assert resolution(refine(c)) == pytest.approx(resolution(c) / 2)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 4), m=st.integers(1, 4), gain=st.floats(0.05, 0.95))
def test_nerve_is_face_closed_and_boxes_match(n, m, gain):
    c = uniform_cover(Box.of((0, 1), (0, 3)), (n, m), gain)
    k = nerve_of_cover(c)
    for s in k.simplices:
        for f in k.facets(s):
            assert f in k
            assert k.box(f).contains(k.box(s))
        common = c.elements[s[0]]
        for i in s[1:]:
            common = common.intersect(c.elements[i])
        assert common == k.box(s) and not common.is_empty

from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebmapper.complex import (
    SimplicialComplex,
    from_arrays,
    image_polytope,
    load_mesh,
    make_simplex,
    mesh_from_json,
    mesh_to_json,
    same_mesh,
    save_mesh,
)
from reebmapper.errors import MeshFormatError, ValidationError


def _write(tmp_path, payload, name="mesh.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_path_file_closes_to_five_simplices(tmp_path):
    x = load_mesh(_write(tmp_path, {"dim_range": 1, "vertices": [[0], [1], [0]], "simplices": [[0, 1], [1, 2]]}))
    assert len(x.complex) == 5
    assert x.complex.count_by_dim() == [3, 2]


def test_single_vertex_file(tmp_path):
    x = load_mesh(_write(tmp_path, {"dim_range": 1, "vertices": [[2.5]], "simplices": []}))
    assert len(x.complex) == 1
    assert x.values.tolist() == [[2.5]]


def test_out_of_range_vertex_is_rejected(tmp_path):
    path = _write(tmp_path, {"dim_range": 1, "vertices": [[0], [1], [2]], "simplices": [[0, 7]]})
    with pytest.raises(ValidationError):
        load_mesh(path)


@pytest.mark.parametrize("payload", [
    [],
    {"vertices": [], "simplices": []},
    {"dim_range": "1", "vertices": [], "simplices": []},
    {"dim_range": 1, "vertices": [["a"]], "simplices": []},
    {"dim_range": 1, "vertices": [[0]], "simplices": [[0.5]]},
])
def test_malformed_json_raises_format_error(payload):
    with pytest.raises(MeshFormatError):
        mesh_from_json(payload)


def test_wrong_coordinate_count():
    with pytest.raises(ValidationError):
        mesh_from_json({"dim_range": 2, "vertices": [[0.0]], "simplices": []})


def test_unparseable_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(MeshFormatError):
        load_mesh(path)


def test_make_simplex_sorts_and_rejects_duplicates():
    assert make_simplex([3, 1, 2]) == (1, 2, 3)
    with pytest.raises(ValidationError):
        make_simplex([1, 1])
    with pytest.raises(ValidationError):
        make_simplex([])


@pytest.mark.parametrize("values, simplex, expected", [
    ([[0.0], [1.0]], (0, 1), [[0.0], [1.0]]),
    ([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], (0, 1, 2), [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    ([[5.0], [5.0], [0.0]], (2,), [[0.0]]),
])
def test_image_polytope(values, simplex, expected):
    x = from_arrays(values, [simplex] if len(simplex) > 1 else [])
    assert image_polytope(simplex, x.map) == expected


def test_facets_point_at_codimension_one_faces():
    cx = SimplicialComplex(3, [[0, 1, 2]])
    tri = cx.index[(0, 1, 2)]
    assert sorted(cx.simplices[f] for f in cx.facets(tri)) == [(0, 1), (0, 2), (1, 2)]
    assert cx.facets(cx.index[(1,)]) == []
    assert cx.maximal_simplices == [(0, 1, 2)]


def test_isolated_vertices_are_kept():
    cx = SimplicialComplex(4, [[0, 1]])
    assert (3,) in cx.index
    assert set(cx.maximal_simplices) == {(0, 1), (2,), (3,)}


def test_non_generic_values_are_flagged(caplog):
    x = from_arrays([0.0, 1.0, 0.0], [[0, 1], [1, 2]])
    assert not x.is_generic
    assert "not generic" in caplog.text
    assert from_arrays([0.0, 1.0, 0.5], [[0, 1], [1, 2]]).is_generic


def test_map_size_must_match_vertices():
    from reebmapper.complex import PLMap, RdSpace

    with pytest.raises(ValidationError):
        RdSpace(SimplicialComplex(3, [[0, 1]]), PLMap(np.zeros((2, 1))))
    with pytest.raises(ValidationError):
        PLMap(np.array([[np.nan]]))


def test_image_bounds_and_simplex_boxes():
    x = from_arrays([[0.0, 2.0], [1.0, -1.0], [3.0, 0.5]], [[0, 1, 2]])
    lo, hi = x.image_bounds()
    assert lo.tolist() == [0.0, -1.0] and hi.tolist() == [3.0, 2.0]
    tri = x.complex.index[(0, 1, 2)]
    assert x.simplex_lo[tri].tolist() == [0.0, -1.0]
    assert x.simplex_hi[tri].tolist() == [3.0, 2.0]


@st.composite
def meshes(draw):
    n = draw(st.integers(1, 8))
    d = draw(st.integers(1, 3))
    tris = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=1, max_size=3, unique=True), max_size=10))
    vals = draw(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=n * d, max_size=n * d))
    return from_arrays(np.array(vals).reshape(n, d), tris)


@settings(max_examples=60, deadline=None)
@given(meshes())
def test_json_round_trip(x):
    y = mesh_from_json(json.loads(json.dumps(mesh_to_json(x))))
    assert same_mesh(x, y)


@settings(max_examples=60, deadline=None)
@given(meshes())
def test_closure_is_downward_closed(x):
    cx = x.complex
    for s in cx.simplices:
        for f in cx.facets(cx.index[s]):
            assert set(cx.simplices[f]) < set(s)
        assert len(cx.facets(cx.index[s])) == (len(s) if len(s) > 1 else 0)


def test_save_then_load(tmp_path):
    x = from_arrays([[0.1], [0.7], [0.3]], [[0, 1], [1, 2]])
    save_mesh(x, tmp_path / "m.json")
    assert same_mesh(x, load_mesh(tmp_path / "m.json"))

"""Simplicial complexes carrying piecewise-linear maps to R^d.

Simplices are stored as strictly increasing tuples of vertex ids. The full
face closure is materialised once at construction and every simplex gets an
integer id; ids are ordered by ``(dimension, vertex tuple)`` so vertex ``v``
always has simplex id ``v``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import MeshFormatError, ValidationError
from .tolerance import tol

log = logging.getLogger(__name__)

Simplex = tuple[int, ...]


def make_simplex(vertices: Iterable[int]) -> Simplex:
    """Return the canonical (sorted) simplex, rejecting repeated vertices."""
    vs = tuple(sorted(int(v) for v in vertices))
    if not vs:
        raise ValidationError("a simplex needs at least one vertex")
    if any(a == b for a, b in zip(vs, vs[1:])):
        raise ValidationError(f"duplicate vertex in simplex {list(vertices)}")
    return vs


class SimplicialComplex:
    """Finite abstract simplicial complex with explicit face closure.

    Every vertex ``0 .. vertex_count-1`` is part of the complex, so isolated
    vertices need not be listed among the maximal simplices.
    """

    def __init__(self, vertex_count: int, maximal_simplices: Iterable[Iterable[int]]):
        if vertex_count < 0:
            raise ValidationError("vertex_count must be non-negative")
        self.vertex_count = int(vertex_count)
        maximal = []
        for raw in maximal_simplices:
            s = make_simplex(raw)
            if s[-1] >= vertex_count or s[0] < 0:
                raise ValidationError(
                    f"simplex {list(s)} references a vertex outside 0..{vertex_count - 1}"
                )
            maximal.append(s)

        faces: set[Simplex] = {(v,) for v in range(self.vertex_count)}
        for s in maximal:
            for k in range(1, len(s) + 1):
                faces.update(combinations(s, k))
        self.simplices: list[Simplex] = sorted(faces, key=lambda s: (len(s), s))
        self.index: dict[Simplex, int] = {s: i for i, s in enumerate(self.simplices)}

        src, dst = [], []
        covered = np.zeros(len(self.simplices), dtype=bool)
        for i, s in enumerate(self.simplices):
            if len(s) > 1:
                for k in range(len(s)):
                    j = self.index[s[:k] + s[k + 1:]]
                    src.append(i)
                    dst.append(j)
                    covered[j] = True
        self.maximal_simplices: list[Simplex] = [
            s for s, c in zip(self.simplices, covered) if not c
        ]
        self.facet_src = np.asarray(src, dtype=np.int64)
        self.facet_dst = np.asarray(dst, dtype=np.int64)
        # CSR pointer into facet_src/facet_dst, rows are simplex ids
        self.facet_ptr = np.zeros(len(self.simplices) + 1, dtype=np.int64)
        np.add.at(self.facet_ptr, self.facet_src + 1, 1)
        np.cumsum(self.facet_ptr, out=self.facet_ptr)

    def __len__(self) -> int:
        return len(self.simplices)

    @property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def dim(self, sid: int) -> int:
        return len(self.simplices[sid]) - 1

    def facets(self, sid: int) -> list[int]:
        lo, hi = self.facet_ptr[sid], self.facet_ptr[sid + 1]
        return self.facet_dst[lo:hi].tolist()

    def count_by_dim(self) -> list[int]:
        counts = [0] * (self.dimension + 1)
        for s in self.simplices:
            counts[len(s) - 1] += 1
        return counts

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.count_by_dim()))

    @cached_property
    def padded_vertices(self) -> np.ndarray:
        """``(m, k+1)`` vertex table, short rows padded with their first vertex."""
        width = self.dimension + 1
        table = np.empty((len(self.simplices), max(width, 1)), dtype=np.int64)
        for i, s in enumerate(self.simplices):
            table[i, : len(s)] = s
            table[i, len(s):] = s[0]
        return table


@dataclass(frozen=True, eq=False)
class PLMap:
    """Per-vertex values of a PL map into R^d, shape ``(vertex_count, d)``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("PL map values must be a 2-d array (vertices x d)")
        if values.shape[1] < 1:
            raise ValidationError("dim_range must be at least 1")
        if not np.all(np.isfinite(values)):
            raise ValidationError("PL map values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim_range(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class RdSpace:
    """A complex together with a PL map defined on all of its vertices."""

    complex: SimplicialComplex
    map: PLMap
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.map) != self.complex.vertex_count:
            raise ValidationError(
                f"map has {len(self.map)} values for {self.complex.vertex_count} vertices"
            )
        if self.dim_range == 1 and not self.is_generic:
            log.warning("%s: vertices share a value; the map is not generic", self.name or "mesh")

    @property
    def dim_range(self) -> int:
        return self.map.dim_range

    @property
    def values(self) -> np.ndarray:
        return self.map.values

    @property
    def is_generic(self) -> bool:
        """False when two vertices have values closer than the tolerance (d = 1 only)."""
        if self.dim_range != 1 or len(self.map) < 2:
            return True
        v = np.sort(self.values[:, 0])
        return bool(np.all(np.diff(v) > tol()))

    @cached_property
    def simplex_lo(self) -> np.ndarray:
        """Per-simplex lower corner of the image bounding box, shape ``(m, d)``."""
        if len(self.complex) == 0:
            return np.zeros((0, self.dim_range))
        return self.values[self.complex.padded_vertices].min(axis=1)

    @cached_property
    def simplex_hi(self) -> np.ndarray:
        if len(self.complex) == 0:
            return np.zeros((0, self.dim_range))
        return self.values[self.complex.padded_vertices].max(axis=1)

    def image_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.complex.vertex_count == 0:
            raise ValidationError("empty mesh has no image")
        return self.values.min(axis=0), self.values.max(axis=0)


def image_polytope(s: Sequence[int], m: PLMap) -> list[list[float]]:
    """Vertex images of ``s``; their convex hull is f(s)."""
    return [m.values[v].tolist() for v in s]


def from_arrays(values, simplices, name: str = "") -> RdSpace:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    cx = SimplicialComplex(values.shape[0], simplices)
    return RdSpace(cx, PLMap(values), name=name)


def load_mesh(path) -> RdSpace:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc
    return mesh_from_json(payload, name=path.stem)


def mesh_from_json(payload, name: str = "") -> RdSpace:
    if not isinstance(payload, dict):
        raise MeshFormatError("mesh JSON must be an object")
    for key in ("dim_range", "vertices", "simplices"):
        if key not in payload:
            raise MeshFormatError(f"mesh JSON lacks field {key!r}")
    d = payload["dim_range"]
    if not isinstance(d, int) or isinstance(d, bool):
        raise MeshFormatError("dim_range must be an integer")
    if d < 1:
        raise ValidationError("dim_range must be at least 1")
    verts = payload["vertices"]
    if not isinstance(verts, list):
        raise MeshFormatError("vertices must be an array")
    rows = []
    for i, row in enumerate(verts):
        if not isinstance(row, list) or len(row) != d:
            raise ValidationError(f"vertex {i} must have exactly {d} coordinates")
        try:
            rows.append([float(x) for x in row])
        except (TypeError, ValueError) as exc:
            raise MeshFormatError(f"vertex {i}: {exc}") from exc
    simplices = payload["simplices"]
    if not isinstance(simplices, list) or not all(isinstance(s, list) for s in simplices):
        raise MeshFormatError("simplices must be an array of integer arrays")
    for s in simplices:
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in s):
            raise MeshFormatError(f"simplex {s} contains a non-integer vertex id")
    values = np.asarray(rows, dtype=np.float64).reshape(len(rows), d)
    cx = SimplicialComplex(len(rows), simplices)
    return RdSpace(cx, PLMap(values), name=name)


def mesh_to_json(x: RdSpace) -> dict:
    return {
        "dim_range": x.dim_range,
        "vertices": x.values.tolist(),
        "simplices": [list(s) for s in x.complex.maximal_simplices if len(s) > 1],
    }


def save_mesh(x: RdSpace, path) -> None:
    Path(path).write_text(json.dumps(mesh_to_json(x)) + "\n", encoding="utf-8")


def same_mesh(a: RdSpace, b: RdSpace) -> bool:
    """Identical complexes and bitwise-equal values."""
    return (
        a.complex.vertex_count == b.complex.vertex_count
        and a.complex.simplices == b.complex.simplices
        and a.values.shape == b.values.shape
        and a.values.tobytes() == b.values.tobytes()
    )

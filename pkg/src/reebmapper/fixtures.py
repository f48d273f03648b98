"""Canned meshes, seeded random instances, and brute-force oracles.

The oracles never touch the component engine: they sample points, test
membership pointwise and flood-fill, so they can be used to check it.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .complex import PLMap, RdSpace, SimplicialComplex, from_arrays
from .cover import Box, Cover, uniform_cover
from .errors import ValidationError
from .tolerance import tol as default_tol

MAX_RANDOM_SIMPLICES = 200


@dataclass(frozen=True)
class Fixture:
    name: str
    space: RdSpace
    expected: dict = field(default_factory=dict)


def tent() -> RdSpace:
    return from_arrays([0.0, 1.0, 0.0], [[0, 1], [1, 2]], name="tent")


def circle4() -> RdSpace:
    return from_arrays([0.0, 1.0, 2.0, 1.0], [[0, 1], [1, 2], [2, 3], [3, 0]], name="circle4")


TORUS_SHAPE = (12, 8)
TORUS_RADII = (2.0, 1.0)
TORUS_OFFSETS = (0.3, 0.17)


def torus(nu: int = TORUS_SHAPE[0], nv: int = TORUS_SHAPE[1]) -> RdSpace:
    """Triangulated torus with the height ``(R + r cos v) cos u``.

    Vertex ``(i, j)`` has id ``i * nv + j`` and sits at
    ``u = 2 pi (i + 0.3) / nu``, ``v = 2 pi (j + 0.17) / nv``; the offsets keep
    the sampled height generic. Each grid square ``a=(i,j), b=(i+1,j),
    c=(i,j+1), d=(i+1,j+1)`` (indices mod the grid) splits into ``abd`` and ``adc``.
    """
    if nu < 3 or nv < 3:
        raise ValidationError("torus grid needs at least 3 x 3 vertices")
    big, small = TORUS_RADII
    ou, ov = TORUS_OFFSETS
    ids = lambda i, j: (i % nu) * nv + (j % nv)  # noqa: E731
    values = np.empty(nu * nv)
    tris = []
    for i in range(nu):
        u = 2 * math.pi * (i + ou) / nu
        for j in range(nv):
            v = 2 * math.pi * (j + ov) / nv
            values[ids(i, j)] = (big + small * math.cos(v)) * math.cos(u)
            a, b, c, d = ids(i, j), ids(i + 1, j), ids(i, j + 1), ids(i + 1, j + 1)
            tris += [[a, b, d], [a, d, c]]
    return from_arrays(values, tris, name="torus")


def _grid_values(n: int, field_name: str, seed: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n)
    xs, ys = np.meshgrid(t, t, indexing="xy")  # [j, i] -> x = t[i], y = t[j]
    xs, ys = xs.ravel(), ys.ravel()
    if field_name == "identity":
        return np.stack([xs, ys], axis=1)
    if field_name == "sines":
        return sine_field(xs, ys, seed)
    raise ValidationError(f"unknown grid field {field_name!r}")


def sine_field(xs: np.ndarray, ys: np.ndarray, seed: int, terms: int = 3) -> np.ndarray:
    """Two low-frequency random sums of sines evaluated at the points."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(2):
        acc = np.zeros_like(xs)
        for _ in range(terms):
            kx, ky = rng.uniform(0.5, 2.0, size=2)
            phase = rng.uniform(0, 2 * math.pi)
            amp = rng.uniform(0.5, 1.0)
            acc += amp * np.sin(math.pi * (kx * xs + ky * ys) + phase)
        out.append(acc)
    return np.stack(out, axis=1)


def grid_triangles(n: int) -> list[list[int]]:
    """Cell ``(i, j)`` with ``v00 = j*n+i`` splits into (v00,v10,v11), (v00,v11,v01)."""
    tris = []
    for j in range(n - 1):
        for i in range(n - 1):
            v00 = j * n + i
            v10, v01, v11 = v00 + 1, v00 + n, v00 + n + 1
            tris += [[v00, v10, v11], [v00, v11, v01]]
    return tris


def square_grid_2d(n: int = 8, field_name: str = "identity", seed: int = 0) -> RdSpace:
    """Triangulated ``n x n`` grid on the unit square; vertex ``(i, j)`` at ``(i, j)/(n-1)``."""
    if n < 2:
        raise ValidationError("grid needs n >= 2")
    values = _grid_values(n, field_name, seed)
    return from_arrays(values, grid_triangles(n), name=f"square_grid_2d_{n}_{field_name}")


def canned(name: str) -> Fixture:
    if name == "tent":
        return Fixture(name, tent(), {"vertices": 3, "edges": 2, "reeb_nodes": 3, "betti": (1, 0)})
    if name == "circle4":
        return Fixture(name, circle4(), {"vertices": 4, "edges": 4, "reeb_nodes": 2, "betti": (1, 1)})
    if name == "torus":
        return Fixture(name, torus(), {"euler": 0, "betti": (1, 1), "non_regular": 4})
    if name == "square_grid_2d":
        return Fixture(name, square_grid_2d(), {"vertices": 64})
    raise ValidationError(f"unknown fixture {name!r}; choose tent, circle4, torus or square_grid_2d")


FIXTURES = ("tent", "circle4", "torus", "square_grid_2d")


# -- random instances ------------------------------------------------------------

def _random_graph(rng: np.random.Generator, n: int) -> list[list[int]]:
    """Random connected graph on ``n`` vertices: a random tree plus a few chords."""
    perm = rng.permutation(n)
    edges = {tuple(sorted((int(perm[k]), int(perm[rng.integers(k)])))) for k in range(1, n)}
    for _ in range(int(rng.integers(0, max(2, n // 3)))):
        a, b = rng.choice(n, size=2, replace=False)
        edges.add(tuple(sorted((int(a), int(b)))))
    return [list(e) for e in sorted(edges)]


def _random_surface(rng: np.random.Generator, a: int, b: int) -> list[list[int]]:
    """Triangulated ``a x b`` grid with random diagonals and a few holes punched."""
    tris = []
    for j in range(b - 1):
        for i in range(a - 1):
            v00 = j * a + i
            v10, v01, v11 = v00 + 1, v00 + a, v00 + a + 1
            if rng.random() < 0.5:
                pair = [[v00, v10, v11], [v00, v11, v01]]
            else:
                pair = [[v00, v10, v01], [v10, v11, v01]]
            tris += [t for t in pair if rng.random() > 0.15]
    return tris


def _piece(rng: np.random.Generator, kind: str, budget: int) -> tuple[int, list[list[int]]]:
    if kind == "graph":
        n = int(rng.integers(3, max(4, budget // 3)))
        return n, _random_graph(rng, n)
    a = int(rng.integers(2, 6))
    b = int(rng.integers(2, 6))
    return a * b, _random_surface(rng, a, b)


def random_instance(seed: int, dim_range: int | None = None, max_simplices: int = MAX_RANDOM_SIMPLICES,
                    degenerate: bool = False, max_intervals: int | None = None) -> tuple[RdSpace, Cover]:
    """Seeded random mesh and uniform cover.

    Distribution: ``d`` in {1, 2} unless given; one or two pieces, each a
    random graph (tree plus chords) or a randomly triangulated grid patch
    with holes; values uniform in ``[0, 1]^d`` (rounded to tenths when
    ``degenerate``); maximal simplices are dropped from the end until the
    face closure has at most ``max_simplices`` simplices. The cover spans the
    image bounding box with 2..6 intervals per axis (2..4 for d = 2) and gain
    in [0.2, 0.7].
    """
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3)) if dim_range is None else int(dim_range)
    pieces = int(rng.integers(1, 3))
    offset, simplices = 0, []
    for _ in range(pieces):
        kind = "graph" if rng.random() < 0.5 else "surface"
        n, simp = _piece(rng, kind, max_simplices // pieces)
        simplices += [[v + offset for v in s] for s in simp]
        offset += n
    values = rng.uniform(0.0, 1.0, size=(offset, d))
    if degenerate:
        values = np.round(values, 1)
    while True:
        cx = SimplicialComplex(offset, simplices)
        if len(cx) <= max_simplices:
            break
        simplices = simplices[:-1]
        if not simplices:
            offset = min(offset, max_simplices)
            values = values[:offset]
            simplices = []
    x = RdSpace(cx, PLMap(values), name=f"random_{seed}")
    hi_n = 6 if d == 1 else 4
    if max_intervals is not None:
        hi_n = min(hi_n, max_intervals)
    counts = tuple(int(rng.integers(2, hi_n + 1)) for _ in range(d))
    gain = float(rng.uniform(0.2, 0.7))
    lo, hi = x.image_bounds()
    return x, uniform_cover(Box(tuple(lo), tuple(hi)), counts, gain)


def aligned_pair(seed: int, dim_range: int | None = None,
                 max_simplices: int = MAX_RANDOM_SIMPLICES) -> tuple[RdSpace, tuple[Box, ...]]:
    """Random mesh and region on a dyadic grid, for exact oracle comparisons.

    The mesh comes from :func:`random_instance` with values snapped to
    multiples of 1/4; the region is one or two boxes whose faces sit at odd
    multiples of 1/8, side 1/4 to 3/4. Every face is then 1/8 away from every
    vertex value, and an odd-depth lattice never samples a face exactly.
    """
    x, _ = random_instance(seed, dim_range, max_simplices)
    x = RdSpace(x.complex, PLMap(np.round(x.values * 4) / 4), name=f"aligned_{seed}")
    rng = np.random.default_rng((seed, 1))
    boxes = []
    for _ in range(1 if rng.random() < 0.6 else 2):
        lo = rng.integers(-1, 4, size=x.dim_range)
        w = rng.integers(1, 4, size=x.dim_range)
        boxes.append(Box(tuple((2 * lo + 1) / 8), tuple((2 * (lo + w) + 1) / 8)))
    return x, tuple(boxes)


# -- sampling oracle --------------------------------------------------------------

@dataclass(frozen=True)
class OracleResult:
    """Component count and the induced partition of sampled points.

    ``vertex_partition`` restricts the partition to samples sitting on mesh
    vertices; ``depth`` is the lattice depth actually used. ``keys`` holds
    one canonical row per kept sample and ``labels`` its component.
    """

    count: int
    vertex_partition: frozenset
    samples: int
    depth: int
    keys: np.ndarray | None = field(default=None, compare=False, repr=False)
    labels: np.ndarray | None = field(default=None, compare=False, repr=False)


@functools.lru_cache(maxsize=32)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, row = -1, []
        for bar in bars:
            row.append(bar - prev - 1)
            prev = bar
        row.append(total + parts - 2 - prev)
        rows.append(row)
    return np.array(rows, dtype=np.int64)


def auto_depth(x: RdSpace, region: Sequence[Box], base: int = 8, budget: int = 1 << 15) -> int:
    """Lattice depth at which one step changes f by well under the box and overlap widths.

    One lattice move changes ``f`` by at most ``span / depth`` per axis, where
    ``span`` is the largest image extent. The depth is raised until that is a
    third of the narrowest side of any box or of any pairwise overlap, so
    that pieces crossing an overlap still catch a sample inside it. The
    depth is capped so one top simplex holds at most ``budget`` samples.
    """
    if x.complex.vertex_count == 0 or not region:
        return base
    lo, hi = x.image_bounds()
    span = float(np.max(hi - lo)) or 1.0
    feature = min(min(b - a for a, b in zip(r.lo, r.hi)) for r in region)
    for r1, r2 in itertools.combinations(region, 2):
        if r1.meets(r2):
            feature = min(feature, min(min(b1, b2) - max(a1, a2) for a1, b1, a2, b2 in zip(r1.lo, r1.hi, r2.lo, r2.hi)))
    feature /= 3
    if not math.isfinite(feature):
        return base
    k = max(len(s) for s in x.complex.maximal_simplices) - 1
    cap = int(math.factorial(k) * budget) if k <= 1 else int((math.factorial(k) * budget) ** (1 / k))
    return max(base, min(cap, int(math.ceil(span / max(feature, 1e-12)))))


_ORACLE_CHUNK = 1 << 21


def sampling_oracle(x: RdSpace, r: Box | Iterable[Box], depth: int | None = None,
                    tol: float | None = None) -> OracleResult:
    """Flood-fill a barycentric point lattice restricted to ``f^{-1}(r)``.

    Each maximal simplex is sampled at barycentric coordinates ``c / depth``
    for integer ``c``. A sample is keyed by its support vertices and weights,
    so samples on shared faces coincide across simplices. Samples are kept
    when ``f`` lies strictly inside some box with slack ``tol``. Kept samples
    of one simplex that land in the same box are joined, since the segment
    between them stays inside that convex piece. Every edge is therefore a
    genuine path and the count can only err upward, on pieces too thin to
    hold a sample.
    """
    tau = default_tol() if tol is None else tol
    region = (r,) if isinstance(r, Box) else tuple(r)
    if depth is None:
        depth = auto_depth(x, region)
    if depth < 4:
        raise ValidationError("oracle depth must be at least 4")
    if not region or x.complex.vertex_count == 0:
        return OracleResult(0, frozenset(), 0, depth)
    values = x.values
    los = np.array([b.lo for b in region]) + tau
    his = np.array([b.hi for b in region]) - tau
    width = max(len(s) for s in x.complex.maximal_simplices)
    big = x.complex.vertex_count
    key_blocks, edge_blocks, offset = [], [], 0
    by_size: dict[int, list] = {}
    for s in x.complex.maximal_simplices:
        by_size.setdefault(len(s), []).append(s)
    for k, simps in sorted(by_size.items()):
        comps = _compositions(depth, k)
        verts = np.array(simps, dtype=np.int64)                         # (S, k)
        vals = values[verts]
        near = np.zeros(len(verts), dtype=bool)                         # bounding box test only
        for lo, hi in zip(los, his):
            near |= np.all((vals.max(axis=1) > lo) & (vals.min(axis=1) < hi), axis=1)
        verts, vals = verts[near], vals[near]
        step = max(1, _ORACLE_CHUNK // len(comps))
        for start in range(0, len(verts), step):
            vs, pts = verts[start:start + step], np.einsum("pk,skd->spd", comps, vals[start:start + step]) / depth
            inside = [np.all((pts > lo) & (pts < hi), axis=2) for lo, hi in zip(los, his)]
            keep = np.logical_or.reduce(inside)
            si, pi = np.nonzero(keep)
            if not len(si):
                continue
            # canonical key: (vertex, weight) pairs with positive weight, padded
            vv, cc = vs[si], comps[pi]
            vv = np.where(cc > 0, vv, big)
            order = np.argsort(vv, axis=1, kind="stable")
            keys = np.empty((len(si), 2 * width), dtype=np.int64)
            keys[:, 0:2 * k:2] = np.take_along_axis(vv, order, axis=1)
            keys[:, 1:2 * k:2] = np.take_along_axis(cc, order, axis=1)
            keys[:, 2 * k::2] = big
            keys[:, 2 * k + 1::2] = 0
            key_blocks.append(keys)
            local = np.full(keep.shape, -1, dtype=np.int64)
            local[si, pi] = np.arange(offset, offset + len(si))
            for mask in inside:
                rows = mask.any(axis=1)
                hub = local[rows, mask[rows].argmax(axis=1)]            # first sample per simplex
                spoke = np.where(mask[rows], local[rows], -1)
                hubs = np.broadcast_to(hub[:, None], spoke.shape)
                ok = spoke >= 0
                edge_blocks.append(np.stack([hubs[ok], spoke[ok]], axis=1))
            offset += len(si)
    if offset == 0:
        return OracleResult(0, frozenset(), 0, depth)
    all_keys = np.concatenate(key_blocks)
    uniq, gid = np.unique(all_keys, axis=0, return_inverse=True)
    gid = gid.ravel()
    n = len(uniq)
    edges = np.concatenate(edge_blocks) if edge_blocks else np.zeros((0, 2), dtype=np.int64)
    graph = coo_matrix((np.ones(len(edges), dtype=np.int8), (gid[edges[:, 0]], gid[edges[:, 1]])), shape=(n, n))
    count, labels = connected_components(graph, directed=False)
    on_vertex = uniq[:, 2] == big
    groups: dict[int, set[int]] = {}
    for v, lab in zip(uniq[on_vertex, 0].tolist(), labels[on_vertex].tolist()):
        groups.setdefault(int(lab), set()).add(int(v))
    return OracleResult(int(count), frozenset(frozenset(g) for g in groups.values()), n, depth, uniq, labels)


def _face_labels(res: OracleResult, big: int) -> dict[tuple[int, ...], int]:
    """Support face of every kept sample, mapped to its component."""
    out: dict[tuple[int, ...], int] = {}
    for row, lab in zip(res.keys.tolist(), res.labels.tolist()):
        out[tuple(v for v in row[0::2] if v != big)] = lab
    return out


def oracle_reeb_graph(x: RdSpace, factor: float = 2.0, min_depth: int = 17) -> tuple[list[float], list[tuple[int, int]]]:
    """Uncontracted Reeb graph assembled from oracle components alone.

    Nodes are the oracle components over ``(t_{i-1}, t_{i+1})`` at each
    distinct vertex value ``t_i`` (infinite at the ends); edges are the
    components over ``(t_i, t_{i+1})``. Each interval gets its own odd depth,
    about ``factor`` samples per interval width along the steepest simplex.
    Within one simplex the preimage of an interval is convex, so a face
    carries at most one piece; gap samples are attached to star components
    through their support faces. Returns node values and the edge list.
    """
    vals = np.unique(x.values[:, 0])
    big = x.complex.vertex_count
    reach = max((float(np.ptp(x.values[list(s), 0])) for s in x.complex.maximal_simplices), default=0.0)

    def depth(width: float) -> int:
        return max(min_depth, int(math.ceil(factor * reach / width))) | 1

    ext = [-math.inf, *vals.tolist(), math.inf]
    stars, base, node_values = [], [], []
    for i in range(len(vals)):
        finite = [w for w in (ext[i + 2] - ext[i + 1], ext[i + 1] - ext[i]) if math.isfinite(w)]
        res = sampling_oracle(x, Box((ext[i],), (ext[i + 2],)), depth=depth(min(finite, default=1.0)))
        stars.append(_face_labels(res, big))
        base.append(len(node_values))
        node_values += [float(vals[i])] * res.count
    edges = []
    for i in range(len(vals) - 1):
        gap = sampling_oracle(x, Box((vals[i],), (vals[i + 1],)), depth=depth(vals[i + 1] - vals[i]))
        ends: list[dict[int, set[int]]] = [{}, {}]
        for face, lab in _face_labels(gap, big).items():
            for side, j in enumerate((i, i + 1)):
                if face in stars[j]:
                    ends[side].setdefault(lab, set()).add(stars[j][face])
        for lab in range(gap.count):
            lo, hi = ends[0].get(lab, set()), ends[1].get(lab, set())
            if len(lo) != 1 or len(hi) != 1:
                raise ValidationError(f"gap component over ({vals[i]}, {vals[i + 1]}) has ends {lo} and {hi}")
            edges.append((base[i] + lo.pop(), base[i + 1] + hi.pop()))
    return node_values, edges


# -- raster JCN oracle ------------------------------------------------------------

def raster_field(values: np.ndarray, n: int, pixels: int = 256) -> np.ndarray:
    """Sample the PL field of :func:`square_grid_2d` at pixel centres.

    ``values`` is the ``(n*n, d)`` vertex table; the result has shape
    ``(pixels, pixels, d)`` indexed ``[row=y, col=x]``.
    """
    grid = values.reshape(n, n, -1)  # [j, i]
    t = (np.arange(pixels) + 0.5) / pixels * (n - 1)
    cell = np.minimum(np.floor(t).astype(int), n - 2)
    frac = t - cell
    i, u = cell[None, :], frac[None, :]  # along x (columns)
    j, v = cell[:, None], frac[:, None]  # along y (rows)
    u = np.broadcast_to(u, (pixels, pixels))[..., None]
    v = np.broadcast_to(v, (pixels, pixels))[..., None]
    ii = np.broadcast_to(i, (pixels, pixels))
    jj = np.broadcast_to(j, (pixels, pixels))
    f00 = grid[jj, ii]
    f10 = grid[jj, ii + 1]
    f01 = grid[jj + 1, ii]
    f11 = grid[jj + 1, ii + 1]
    lower = f00 + u * (f10 - f00) + v * (f11 - f10)   # triangle (v00, v10, v11), u >= v
    upper = f00 + v * (f01 - f00) + u * (f11 - f01)   # triangle (v00, v11, v01), u < v
    return np.where(u >= v, lower, upper)


def raster_jcn_count(x: RdSpace, n: int, c: Cover, pixels: int = 256, tol: float | None = None) -> int:
    """Sum over cover boxes of 4-connected pixel components inside the box."""
    tau = default_tol() if tol is None else tol
    img = raster_field(x.values, n, pixels)
    total = 0
    for b in c.elements:
        lo = np.array(b.lo) + tau
        hi = np.array(b.hi) - tau
        mask = np.all((img > lo) & (img < hi), axis=2)
        _, k = ndimage.label(mask)
        total += int(k)
    return total

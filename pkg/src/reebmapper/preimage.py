"""Connected components of preimages of boxes and unions of boxes.

For a PL map the preimage of a convex region inside one closed simplex is
convex, so two simplices' pieces touch exactly when a shared face is active.
Components of ``f^{-1}(B)`` for one box are therefore the classes of active
simplices glued to their active facets.

For a union of boxes the piece of a simplex need not be connected, so the
graph nodes are ``(simplex, box)`` pairs: ``(s, b)`` is glued to ``(t, b)``
for an active facet ``t``, and to ``(s, b')`` when ``s`` meets ``B ∩ B'``.
Node keys are ``simplex * nbox + box``; a component's label is its smallest
key, which for a single box is its smallest simplex id.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .complex import RdSpace
from .cover import Box, normalize_region
from .errors import ContainmentError, WellDefinednessError
from .lp import hull_meets_box
from .tolerance import tol as default_tol

Region = tuple[Box, ...]

CACHE_SIZE = 1 << 14


class _Lru(OrderedDict):
    """Dict that forgets its least recently used entries beyond ``maxsize``."""

    def __init__(self, maxsize: int = CACHE_SIZE):
        super().__init__()
        self.maxsize = maxsize

    def get(self, key, default=None):
        if key in self:
            self.move_to_end(key)
            return self[key]
        return default

    def __setitem__(self, key, value):
        super().__setitem__(key, value)
        self.move_to_end(key)
        if len(self) > self.maxsize:
            self.popitem(last=False)


def as_region(r: Box | Iterable[Box]) -> Region:
    if isinstance(r, Box):
        return (r,)
    return tuple(r)


def simplex_region_intersects(s: Sequence[int], m, r: Box | Iterable[Box], tol: float | None = None) -> bool:
    """Whether conv(f(s)) meets the region with more than ``tol`` slack.

    Decided by the exact rational LP for every dimension; the vectorised
    engine below uses faster special cases.
    """
    tau = default_tol() if tol is None else tol
    values = m.values if hasattr(m, "values") else np.asarray(m)
    pts = values[list(s)]
    for b in as_region(r):
        lo = [a + tau for a in b.lo]
        hi = [a - tau for a in b.hi]
        if any(not a < c for a, c in zip(lo, hi)):
            continue
        if hull_meets_box(pts, lo, hi):
            return True
    return False


@dataclass(frozen=True, eq=False)
class ComponentSet:
    """Components of ``f^{-1}(region)``.

    ``keys`` (sorted) are the active ``(simplex, box)`` nodes encoded as
    ``simplex * nbox + box``; ``node_labels[i]`` is the component of ``keys[i]``.
    """

    region: Region
    keys: np.ndarray
    node_labels: np.ndarray
    labels: tuple[int, ...]
    signature: object = None

    @property
    def nbox(self) -> int:
        return max(len(self.region), 1)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    @property
    def node_simplices(self) -> np.ndarray:
        return self.keys // self.nbox

    def active_simplices(self) -> np.ndarray:
        return np.unique(self.node_simplices)

    def simplices(self, label: int) -> list[int]:
        return np.unique(self.node_simplices[self.node_labels == label]).tolist()

    def partition(self) -> dict[int, list[int]]:
        return {lab: self.simplices(lab) for lab in self.labels}

    def label_of(self, simplex: int, box: int = 0) -> int | None:
        key = simplex * self.nbox + box
        i = np.searchsorted(self.keys, key)
        if i < len(self.keys) and self.keys[i] == key:
            return int(self.node_labels[i])
        return None

    def to_json(self) -> dict:
        return {
            "region": [b.to_json() for b in self.region],
            "components": {str(lab): simps for lab, simps in self.partition().items()},
        }


def _empty(region: Region) -> ComponentSet:
    z = np.zeros(0, dtype=np.int64)
    return ComponentSet(region, z, z, (), signature=("empty",))


class ComponentEngine:
    """Connectivity engine bound to one :class:`RdSpace`.

    Results are memoised; single-box results are keyed by their active
    simplex set, so boxes with the same active set share one computation.
    """

    def __init__(self, x: RdSpace, tol: float | None = None):
        self.x = x
        self.tol = default_tol() if tol is None else tol
        cx = x.complex
        self.m = len(cx)
        self._lo = x.simplex_lo
        self._hi = x.simplex_hi
        # simplices sorted by lower image bound on axis 0, for candidate slicing
        if self.m:
            self._order = np.argsort(self._lo[:, 0], kind="stable")
            self._lo0_sorted = self._lo[self._order, 0]
            self._reach = float(np.max(self._hi[:, 0] - self._lo[:, 0]))
        self._scratch = np.zeros(self.m, dtype=bool)
        self._cc_cache = _Lru()
        self._region_cache = _Lru()
        self._map_cache = _Lru()
        self._map_by_id = _Lru()
        if x.dim_range == 2 and self.m:
            self._pts = x.values[cx.padded_vertices]  # (m, k, 2)

    # -- activity ---------------------------------------------------------
    def active_ids(self, box: Box) -> np.ndarray:
        """Sorted ids of simplices whose image meets ``box`` with slack > tol."""
        if self.m == 0:
            return np.zeros(0, dtype=np.int64)
        lo = np.asarray(box.lo) + self.tol
        hi = np.asarray(box.hi) - self.tol
        if np.any(hi <= lo):
            return np.zeros(0, dtype=np.int64)
        start = np.searchsorted(self._lo0_sorted, lo[0] - self._reach, side="left")
        stop = np.searchsorted(self._lo0_sorted, hi[0], side="left")
        cand = self._order[start:stop]
        ok = np.all((self._lo[cand] < hi) & (self._hi[cand] > lo), axis=1)
        cand = np.sort(cand[ok])
        d = self.x.dim_range
        if d == 1 or len(cand) == 0:
            return cand
        if d == 2:
            return cand[self._sat_2d(cand, lo, hi)]
        keep = [
            hull_meets_box(self.x.values[list(self.x.complex.simplices[s])], lo, hi)
            for s in cand
        ]
        return cand[np.asarray(keep, dtype=bool)]

    def _sat_2d(self, cand: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        # Separating axes: the closed polygon conv(P) misses the open box iff
        # some edge normal of P - box separates (axis normals already done).
        pts = self._pts[cand]
        k = pts.shape[1]
        separated = np.zeros(len(cand), dtype=bool)
        for i in range(k):
            for j in range(i + 1, k):
                e = pts[:, j] - pts[:, i]
                n = np.stack([-e[:, 1], e[:, 0]], axis=1)
                proj = np.einsum("mkd,md->mk", pts, n)
                tmin, tmax = proj.min(axis=1), proj.max(axis=1)
                bmin = np.minimum(n * lo, n * hi).sum(axis=1)
                bmax = np.maximum(n * lo, n * hi).sum(axis=1)
                nz = np.any(n != 0, axis=1)
                separated |= nz & ((tmax <= bmin) | (tmin >= bmax))
        return ~separated

    # -- components -------------------------------------------------------
    def _cc(self, ids: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
        """Components of the active set ``ids`` glued along active facets."""
        key = ids.tobytes()
        hit = self._cc_cache.get(key)
        if hit is not None:
            return hit
        n = len(ids)
        if n == 0:
            out = (np.zeros(0, dtype=np.int64), ())
            self._cc_cache[key] = out
            return out
        cx = self.x.complex
        starts = cx.facet_ptr[ids]
        counts = cx.facet_ptr[ids + 1] - starts
        total = int(counts.sum())
        labels = self._label(ids, self._facet_pairs(ids, starts, counts, total))
        uniq = tuple(int(v) for v in np.unique(labels))
        out = (labels, uniq)
        self._cc_cache[key] = out
        return out

    def _facet_pairs(self, ids, starts, counts, total):
        cx = self.x.complex
        if total == 0:
            return np.zeros((0, 2), dtype=np.int64)
        offsets = np.repeat(starts - np.cumsum(counts) + counts, counts)
        pair_idx = np.arange(total) + offsets
        src = np.repeat(ids, counts)
        dst = cx.facet_dst[pair_idx]
        scratch = self._scratch
        scratch[ids] = True
        keep = scratch[dst]
        scratch[ids] = False
        return np.stack([src[keep], dst[keep]], axis=1)

    @staticmethod
    def _label(keys: np.ndarray, edges: np.ndarray) -> np.ndarray:
        """Per-node component label (smallest key in class); ``keys`` sorted."""
        n = len(keys)
        if len(edges):
            a = np.searchsorted(keys, edges[:, 0])
            b = np.searchsorted(keys, edges[:, 1])
            graph = coo_matrix((np.ones(len(a), dtype=np.int8), (a, b)), shape=(n, n))
            _, comp = connected_components(graph, directed=False)
        else:
            comp = np.arange(n)
        _, first = np.unique(comp, return_index=True)
        rep = np.empty(comp.max() + 1, dtype=np.int64)
        rep[comp[first]] = keys[first]
        return rep[comp]

    def components(self, region: Box | Iterable[Box]) -> ComponentSet:
        raw = as_region(region)
        cached = self._region_cache.get(raw)
        if cached is not None:
            return cached
        boxes = normalize_region(raw)
        if not boxes:
            out = _empty(boxes)
        elif len(boxes) == 1:
            ids = self.active_ids(boxes[0])
            labels, uniq = self._cc(ids)
            out = ComponentSet(boxes, ids, labels, uniq, signature=("ids", ids.tobytes()))
        else:
            out = self._components_union(boxes)
        self._region_cache[raw] = out
        return out

    def _components_union(self, boxes: Region) -> ComponentSet:
        nb = len(boxes)
        per_box = [self.active_ids(b) for b in boxes]
        keys = np.concatenate([ids * nb + i for i, ids in enumerate(per_box)])
        order = np.argsort(keys)
        keys = keys[order]
        if len(keys) == 0:
            return _empty(boxes)
        edges = []
        cx = self.x.complex
        for i, ids in enumerate(per_box):
            starts = cx.facet_ptr[ids]
            counts = cx.facet_ptr[ids + 1] - starts
            pairs = self._facet_pairs(ids, starts, counts, int(counts.sum()))
            edges.append(pairs * nb + i)
        for i in range(nb):
            for j in range(i + 1, nb):
                if boxes[i].meets(boxes[j]):
                    both = self.active_ids(boxes[i].intersect(boxes[j]))
                    edges.append(np.stack([both * nb + i, both * nb + j], axis=1))
        edges = np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64)
        labels = self._label(keys, edges)
        uniq = tuple(int(v) for v in np.unique(labels))
        return ComponentSet(boxes, keys, labels, uniq, signature=("region", boxes))

    # -- induced maps -----------------------------------------------------
    def component_map(self, small: ComponentSet, large: ComponentSet) -> dict[int, int]:
        """Map induced by ``f^{-1}(small.region) ⊆ f^{-1}(large.region)``.

        A node ``(s, b)`` of ``small`` is sent to the component of ``(s, b')``
        for any large box ``b'`` such that ``s`` meets ``B ∩ B'``. Raises
        :class:`ContainmentError` if some node has no such ``b'`` and
        :class:`WellDefinednessError` if one component gets two targets.
        """
        if len(small.keys) == 0:
            return {}
        # component sets are memoised per engine, so identity is a valid key
        fast = self._map_by_id.get((id(small), id(large)))
        if fast is not None:
            return fast[2]
        contained = [
            next((j for j, big in enumerate(large.region) if big.contains(b)), None)
            for b in small.region
        ]
        if all(c is not None for c in contained):
            ck = (small.signature, large.signature, tuple(contained), small.nbox, large.nbox)
        else:
            ck = (small.region, large.region)
        hit = self._map_cache.get(ck)
        if hit is not None:
            self._map_by_id[(id(small), id(large))] = (small, large, hit)
            return hit
        out = self._compute_map(small, large, contained)
        self._map_cache[ck] = out
        self._map_by_id[(id(small), id(large))] = (small, large, out)
        return out

    def _compute_map(self, small, large, contained) -> dict[int, int]:
        nbs, nbl = small.nbox, large.nbox
        s_simp = small.keys // nbs
        s_box = small.keys % nbs
        src_nodes, tgt_labels = [], []
        for b, big in enumerate(contained):
            sel = np.flatnonzero(s_box == b)
            if big is not None:
                target = s_simp[sel] * nbl + big
                pos = np.searchsorted(large.keys, target)
                pos = np.minimum(pos, len(large.keys) - 1) if len(large.keys) else pos
                if len(large.keys) == 0 or np.any(large.keys[pos] != target):
                    raise ContainmentError("a small node is inactive in its containing box")
                src_nodes.append(sel)
                tgt_labels.append(large.node_labels[pos])
                continue
            hit_any = np.zeros(len(sel), dtype=bool)
            for j, lb in enumerate(large.region):
                inter = small.region[b].intersect(lb)
                if inter.is_empty:
                    continue
                both = self.active_ids(inter)
                simp = s_simp[sel]
                mask = np.isin(simp, both)
                if not mask.any():
                    continue
                target = simp[mask] * nbl + j
                pos = np.searchsorted(large.keys, target)
                pos = np.minimum(pos, len(large.keys) - 1)
                if np.any(large.keys[pos] != target):
                    raise ContainmentError("intersection-active simplex inactive in large region")
                src_nodes.append(sel[mask])
                tgt_labels.append(large.node_labels[pos])
                hit_any |= mask
            if not hit_any.all():
                bad = int(s_simp[sel][~hit_any][0])
                raise ContainmentError(
                    f"simplex {bad} over {small.region[b]} is not covered by {list(large.region)}"
                )
        nodes = np.concatenate(src_nodes)
        tgts = np.concatenate(tgt_labels)
        src_labels = small.node_labels[nodes]
        order = np.lexsort((tgts, src_labels))
        src_labels, tgts = src_labels[order], tgts[order]
        first = np.ones(len(src_labels), dtype=bool)
        first[1:] = src_labels[1:] != src_labels[:-1]
        starts = np.flatnonzero(first)
        lo_t = tgts[starts]
        hi_t = np.maximum.reduceat(tgts, starts)
        if np.any(lo_t != hi_t):
            i = int(np.flatnonzero(lo_t != hi_t)[0])
            raise WellDefinednessError(
                f"component {int(src_labels[starts[i]])} of {list(small.region)} maps to "
                f"{int(lo_t[i])} and {int(hi_t[i])} of {list(large.region)}"
            )
        out = {int(a): int(b) for a, b in zip(src_labels[starts], lo_t)}
        if len(out) != len(small.labels):
            raise ContainmentError("some small components have no image")
        return out


def engine_for(x: RdSpace, tol: float | None = None) -> ComponentEngine:
    """Shared engine per space and tolerance, stored on the space so both die together."""
    tau = default_tol() if tol is None else tol
    per_space = x.__dict__.setdefault("_engines", {})
    eng = per_space.get(tau)
    if eng is None:
        eng = per_space[tau] = ComponentEngine(x, tau)
    return eng


def components(x: RdSpace, r: Box | Iterable[Box]) -> ComponentSet:
    return engine_for(x).components(r)


def component_map(x: RdSpace, small: ComponentSet, large: ComponentSet) -> dict[int, int]:
    return engine_for(x).component_map(small, large)


def active_vertex_partition(cs: ComponentSet, vertex_count: int) -> set[frozenset[int]]:
    """Partition of the active mesh vertices induced by the components."""
    simp = cs.node_simplices
    is_vertex = simp < vertex_count
    groups: dict[int, set[int]] = {}
    for v, lab in zip(simp[is_vertex].tolist(), cs.node_labels[is_vertex].tolist()):
        groups.setdefault(lab, set()).add(v)
    return {frozenset(g) for g in groups.values()}

"""Reeb graphs of real-valued PL maps and the display of a one-dimensional mapper.

The Reeb graph is read off from the cosheaf of components: with critical
values ``t_0 < ... < t_k``, the components over the star ``(t_{i-1}, t_{i+1})``
are the nodes at height ``t_i`` and the components over the gap
``(t_i, t_{i+1})`` are the edges, attached by the inclusion maps.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import MultiGraphMatcher

from .complex import RdSpace
from .cover import Box, Cover
from .errors import DimensionError, OrderingError, SizeLimitError
from .mapper import CategoricalMapper, MapperNerve
from .preimage import ComponentSet, engine_for
from .tolerance import tol
from .unionfind import UnionFind

MAX_ISO_NODES = 200


def _require_1d(x: RdSpace) -> None:
    if x.dim_range != 1:
        raise DimensionError(f"needs a real-valued map, got dim_range {x.dim_range}")


def critical_values(x: RdSpace) -> list[float]:
    """Sorted vertex values, merging runs closer than the tolerance."""
    _require_1d(x)
    tau = tol()
    out: list[float] = []
    for v in np.sort(x.values[:, 0]).tolist():
        if not out or v - out[-1] > tau:
            out.append(v)
    return out


@dataclass(frozen=True)
class ReebGraph:
    """Finite multigraph with a real value per node."""

    values: tuple[float, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def node_count(self) -> int:
        return len(self.values)

    def degree(self) -> list[int]:
        deg = [0] * len(self.values)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def up_down(self) -> list[tuple[int, int]]:
        """Per node, the number of edges going up and going down."""
        out = [[0, 0] for _ in self.values]
        for u, v in self.edges:
            lo, hi = (u, v) if self.values[u] < self.values[v] else (v, u)
            out[lo][0] += 1
            out[hi][1] += 1
        return [tuple(p) for p in out]

    def is_monotone(self) -> bool:
        return all(self.values[u] != self.values[v] for u, v in self.edges)

    def regular_nodes(self) -> list[int]:
        return [i for i, ud in enumerate(self.up_down()) if ud == (1, 1)]

    def non_regular_nodes(self) -> list[int]:
        return [i for i, ud in enumerate(self.up_down()) if ud != (1, 1)]

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": i, "value": v} for i, v in enumerate(self.values)],
            "edges": [list(e) for e in self.edges],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_dot(self) -> str:
        lines = ["graph reeb {", "  rankdir=BT;"]
        for i, v in enumerate(self.values):
            lines.append(f'  {i} [label="{v:.12g}"];')
        by_value: dict[float, list[int]] = {}
        for i, v in enumerate(self.values):
            by_value.setdefault(v, []).append(i)
        for v in sorted(by_value):
            lines.append("  { rank=same; " + " ".join(f"{i};" for i in by_value[v]) + " }")
        for u, v in self.edges:
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _canonical(values: Sequence[float], edges: Sequence[tuple[int, int]]) -> ReebGraph:
    """Renumber nodes by (value, old id) and sort edges."""
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    new = {old: n for n, old in enumerate(order)}
    es = sorted(tuple(sorted((new[u], new[v]))) for u, v in edges)
    return ReebGraph(tuple(float(values[i]) for i in order), tuple(es))


def contract_regular(g: ReebGraph) -> ReebGraph:
    """Splice out nodes with exactly one edge up and one edge down."""
    adj: dict[int, list[int]] = {i: [] for i in range(g.node_count)}
    edges = dict(enumerate(g.edges))
    for eid, (u, v) in edges.items():
        adj[u].append(eid)
        adj[v].append(eid)
    alive = set(range(g.node_count))
    next_id = len(g.edges)
    for node in range(g.node_count):
        inc = adj[node]
        if len(inc) != 2:
            continue
        others = [edges[e][0] if edges[e][1] == node else edges[e][1] for e in inc]
        val = g.values[node]
        if not ((g.values[others[0]] < val < g.values[others[1]])
                or (g.values[others[1]] < val < g.values[others[0]])):
            continue
        e0, e1 = inc
        del edges[e0], edges[e1]
        for o, e in zip(others, inc):
            adj[o].remove(e)
        eid = next_id
        next_id += 1
        edges[eid] = (others[0], others[1])
        adj[others[0]].append(eid)
        adj[others[1]].append(eid)
        alive.discard(node)
        adj[node] = []
    keep = sorted(alive)
    idx = {old: n for n, old in enumerate(keep)}
    return _canonical([g.values[i] for i in keep], [(idx[u], idx[v]) for u, v in edges.values()])


@dataclass
class CosheafRep:
    """Components of f over open intervals, anchored at the critical set ``S``.

    ``stars[i]`` holds the components over ``(t_{i-1}, t_{i+1})`` (with
    infinite ends), ``gaps[i]`` those over ``(t_i, t_{i+1})``; ``gap_maps[i]``
    sends gap components to the two neighbouring stars.
    """

    space: RdSpace
    critical_set: tuple[float, ...]
    stars: list[ComponentSet] = field(default_factory=list)
    gaps: list[ComponentSet] = field(default_factory=list)
    gap_maps: list[tuple[dict, dict]] = field(default_factory=list)

    def evaluate(self, lo: float, hi: float) -> ComponentSet:
        return engine_for(self.space).components(Box((lo,), (hi,)))

    def map(self, small: tuple[float, float], large: tuple[float, float]) -> dict[int, int]:
        eng = engine_for(self.space)
        return eng.component_map(self.evaluate(*small), self.evaluate(*large))

    def critical_in(self, lo: float, hi: float) -> tuple[float, ...]:
        return tuple(t for t in self.critical_set if lo < t < hi)

    def constructibility_failures(self, intervals: Sequence[tuple[float, float]]) -> list[tuple]:
        """Nested pairs with the same critical values whose map is not a bijection."""
        bad = []
        for a in intervals:
            for b in intervals:
                if a == b or not (b[0] <= a[0] and a[1] <= b[1]):
                    continue
                if self.critical_in(*a) != self.critical_in(*b):
                    continue
                m = self.map(a, b)
                n_large = len(self.evaluate(*b))
                if len(set(m.values())) != len(m) or len(m) != n_large:
                    bad.append((a, b))
        return bad


def cosheaf_rep(x: RdSpace) -> CosheafRep:
    _require_1d(x)
    s = critical_values(x) if x.complex.vertex_count else []
    rep = CosheafRep(x, tuple(s))
    ext = [-math.inf] + s + [math.inf]
    eng = engine_for(x)
    for i in range(len(s)):
        rep.stars.append(eng.components(Box((ext[i],), (ext[i + 2],))))
    for i in range(len(s) - 1):
        gap = eng.components(Box((s[i],), (s[i + 1],)))
        rep.gaps.append(gap)
        rep.gap_maps.append((eng.component_map(gap, rep.stars[i]), eng.component_map(gap, rep.stars[i + 1])))
    return rep


def reeb_graph(x: RdSpace, contract: bool = True) -> ReebGraph:
    """Reeb graph of a real-valued PL map; regular nodes spliced out if ``contract``."""
    rep = cosheaf_rep(x)
    values: list[float] = []
    node_of: dict[tuple[int, int], int] = {}
    for i, star in enumerate(rep.stars):
        for lab in star.labels:
            node_of[(i, lab)] = len(values)
            values.append(rep.critical_set[i])
    edges = []
    for i, (gap, (down, up)) in enumerate(zip(rep.gaps, rep.gap_maps)):
        for lab in gap.labels:
            edges.append((node_of[(i, down[lab])], node_of[(i + 1, up[lab])]))
    g = _canonical(values, edges)
    return contract_regular(g) if contract else g


def sorted_intervals(c: Cover) -> tuple[list[int], list[float], list[float]]:
    """Cover indices sorted by left endpoint, with the interleaving order checked.

    Requires ``a_1 < a_2 < b_1 < a_3 < b_2 < ...``: consecutive intervals
    overlap and no others do.
    """
    if c.dim_range != 1:
        raise DimensionError("geometric mapper needs a cover of the real line")
    order = sorted(range(len(c)), key=lambda j: (c.elements[j].lo[0], c.elements[j].hi[0]))
    a = [c.elements[j].lo[0] for j in order]
    b = [c.elements[j].hi[0] for j in order]
    n = len(order)
    for i in range(n - 1):
        if not (a[i] < a[i + 1] and b[i] < b[i + 1] and a[i + 1] < b[i]):
            raise OrderingError(f"intervals {order[i]} and {order[i + 1]} do not overlap consecutively")
        if i + 2 < n and not (b[i] < a[i + 2]):
            raise OrderingError(f"intervals {order[i]} and {order[i + 2]} overlap")
    return order, a, b


def geometric_mapper(cm: CategoricalMapper, contract: bool = True) -> ReebGraph:
    """Graph display of the one-dimensional mapper.

    With phantom endpoints ``b_0`` and ``a_{n+1}``, vertex ``v`` of
    ``M[i]`` becomes an edge over ``[b_{i-1}, a_{i+1}]`` and each component
    ``Q`` of ``M[i, i+1]`` an edge over ``[a_{i+1}, b_i]``; the edge of ``v`` is
    attached to the edges of the components containing ``v``.
    """
    _require_1d(cm.space)
    order, a, b = sorted_intervals(cm.cover)
    n = len(order)
    if n == 1:
        w = b[0] - a[0]
        b0, an1 = a[0] + w / 3, a[0] + 2 * w / 3
    else:
        b0, an1 = (a[0] + a[1]) / 2, (b[n - 2] + b[n - 1]) / 2
    # 1-based endpoint helpers with the phantom values
    A = [None] + a + [an1]
    B = [b0] + b
    idx = order  # sorted position p (0-based) -> cover index
    vert_labels = [cm.value[(idx[p],)].labels for p in range(n)]

    # components of M[i, i+1] for i = 0..n, as union-find over (p, label)
    values: list[float] = []
    edges: list[tuple[int, int]] = []
    comp_low: list[dict] = []   # i -> {(p, label): node at a_{i+1}}
    comp_high: list[dict] = []  # i -> {(p, label): node at b_i}
    for i in range(n + 1):
        members = []
        if i >= 1:
            members += [(i - 1, lab) for lab in vert_labels[i - 1]]
        if i < n:
            members += [(i, lab) for lab in vert_labels[i]]
        uf = UnionFind(members)
        if 1 <= i < n:
            lo_idx, hi_idx = idx[i - 1], idx[i]
            pair = tuple(sorted((lo_idx, hi_idx)))
            if pair in cm.value:
                m_lo = cm.map(pair, (lo_idx,))
                m_hi = cm.map(pair, (hi_idx,))
                for lab in cm.value[pair].labels:
                    uf.union((i - 1, m_lo[lab]), (i, m_hi[lab]))
        low, high = {}, {}
        for cls in uf.classes():
            lo_node = len(values)
            values.append(A[i + 1])
            hi_node = len(values)
            values.append(B[i])
            edges.append((lo_node, hi_node))
            for mbr in cls:
                low[mbr] = lo_node
                high[mbr] = hi_node
        comp_low.append(low)
        comp_high.append(high)
    # vertex v of M[i] (1-based i, sorted position i-1) spans [b_{i-1}, a_{i+1}]
    for p in range(n):
        i = p + 1
        for lab in vert_labels[p]:
            edges.append((comp_high[i - 1][(p, lab)], comp_low[i][(p, lab)]))
    g = _canonical(values, edges)
    return contract_regular(g) if contract else g


def _dense_ranks(values: Sequence[float]) -> list[int]:
    tau = tol()
    distinct: list[float] = []
    for v in sorted(values):
        if not distinct or v - distinct[-1] > tau:
            distinct.append(v)
    return [int(np.searchsorted(np.array(distinct), v - tau, side="left")) for v in values]


def _to_nx(g: ReebGraph, keys: Sequence) -> nx.MultiGraph:
    h = nx.MultiGraph()
    for i, k in enumerate(keys):
        h.add_node(i, key=k)
    h.add_edges_from(g.edges)
    return h


def rgraph_isomorphic(g1: ReebGraph, g2: ReebGraph, mode: str = "monotone") -> bool:
    """Graph isomorphism respecting node values.

    ``exact``: values agree within the tolerance. ``monotone``: the value
    order of nodes is preserved, i.e. values agree after a shared
    order-preserving reparameterisation.
    """
    if max(g1.node_count, g2.node_count) > MAX_ISO_NODES:
        raise SizeLimitError(f"graphs above {MAX_ISO_NODES} nodes are not compared")
    if g1.node_count != g2.node_count or len(g1.edges) != len(g2.edges):
        return False
    if mode == "monotone":
        k1, k2 = _dense_ranks(g1.values), _dense_ranks(g2.values)
        match = lambda p, q: p["key"] == q["key"]  # noqa: E731
    elif mode == "exact":
        k1, k2 = g1.values, g2.values
        tau = tol()
        match = lambda p, q: abs(p["key"] - q["key"]) <= tau  # noqa: E731
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return MultiGraphMatcher(_to_nx(g1, k1), _to_nx(g2, k2), node_match=match).is_isomorphic()


@dataclass(frozen=True)
class BettiPair:
    b0: int
    b1: int


def betti(g: ReebGraph | MapperNerve) -> BettiPair:
    """Betti numbers of a graph (the 1-skeleton for a mapper nerve)."""
    if isinstance(g, MapperNerve):
        n, edges = len(g.vertices), g.edges
    else:
        n, edges = g.node_count, g.edges
    uf = UnionFind(range(n))
    for u, v in edges:
        uf.union(u, v)
    b0 = len({uf.find(i) for i in range(n)})
    return BettiPair(b0, len(edges) - n + b0)


def essential_values(g: ReebGraph) -> list[float]:
    """Sorted distinct values of the nodes where the level-set topology changes."""
    tau = tol()
    out: list[float] = []
    for v in sorted(g.values[i] for i in g.non_regular_nodes()):
        if not out or v - out[-1] > tau:
            out.append(v)
    return out


def is_adapted(c: Cover, critical: Sequence[float]) -> bool:
    """No overlap holds a critical value and two consecutive intervals hold at most one.

    Every critical value then sits in a single interval whose neighbours are
    free of critical values, so each arc between critical values crosses an
    interval where components are plain arcs. All critical values must also
    lie inside the union of the cover.
    """
    try:
        _, a, b = sorted_intervals(c)
    except OrderingError:
        return False
    n = len(a)
    if any(not (a[0] < t < b[-1]) for t in critical):
        return False
    for i in range(n - 1):
        if any(a[i + 1] <= t <= b[i] for t in critical):
            return False
        if sum(1 for t in critical if a[i] < t < b[i + 1]) > 1:
            return False
    if n == 1 and len(critical) > 1:
        return False
    return True

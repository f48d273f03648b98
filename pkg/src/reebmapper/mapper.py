"""Categorical mapper, its colimit evaluation, and the classic mapper nerve."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .complex import RdSpace
from .cover import Box, Cover, CoverNerve, k_sub, nerve_of_cover, resolution, union_region, uniform_cover
from .errors import DimensionError, WellDefinednessError
from .preimage import ComponentSet, component_map, components, engine_for
from .unionfind import UnionFind

Simplex = tuple[int, ...]
Mapping = dict[int, int]


def compose(second: Mapping, first: Mapping) -> Mapping:
    """``second ∘ first`` as finite dicts."""
    return {a: second[b] for a, b in first.items()}


@dataclass
class CategoricalMapper:
    """Component sets over every nerve simplex with the face maps between them.

    ``face_map[(tau, sigma)]`` is stored only when ``sigma`` is a facet of
    ``tau``; longer face relations are composed on demand by :meth:`map`.
    """

    space: RdSpace
    cover: Cover
    nerve: CoverNerve
    value: dict[Simplex, ComponentSet]
    face_map: dict[tuple[Simplex, Simplex], Mapping]
    _composed: dict = field(default_factory=dict, repr=False)

    def map(self, tau: Simplex, sigma: Simplex) -> Mapping:
        """Map ``C(tau) -> C(sigma)`` for a face ``sigma <= tau``."""
        tau, sigma = tuple(tau), tuple(sigma)
        if tau == sigma:
            return {lab: lab for lab in self.value[tau].labels}
        hit = self.face_map.get((tau, sigma)) or self._composed.get((tau, sigma))
        if hit is not None:
            return hit
        extra = [v for v in tau if v not in sigma]
        if len(extra) != len(tau) - len(sigma):
            raise ValueError(f"{sigma} is not a face of {tau}")
        step = tuple(v for v in tau if v != extra[0])
        out = compose(self.map(step, sigma), self.face_map[(tau, step)])
        self._composed[(tau, sigma)] = out
        return out

    def vertex_label(self, sigma: Simplex, label: int, alpha: int) -> int:
        return self.map(sigma, (alpha,))[label]


def categorical_mapper(x: RdSpace, c: Cover, check: bool = True) -> CategoricalMapper:
    """Build ``C_K``: components over each ``U_sigma`` and codimension-1 face maps.

    With ``check`` every codimension-2 square is compared against the map
    computed directly from the inclusion, so composites agree exactly.
    """
    if c.dim_range != x.dim_range:
        raise DimensionError(f"cover lives in R^{c.dim_range}, map in R^{x.dim_range}")
    k = nerve_of_cover(c)
    eng = engine_for(x)
    value = {s: eng.components(k.box(s)) for s in k.simplices}
    face_map = {}
    for tau in k.simplices:
        for sigma in k.facets(tau):
            face_map[(tau, sigma)] = eng.component_map(value[tau], value[sigma])
    cm = CategoricalMapper(x, c, k, value, face_map)
    if check:
        for rho in k.simplices:
            if len(rho) < 3 or not value[rho].labels:
                continue
            for i, j in itertools.combinations(range(len(rho)), 2):
                a = rho[:i] + rho[i + 1:]
                b = rho[:j] + rho[j + 1:]
                sigma = tuple(v for t, v in enumerate(rho) if t not in (i, j))
                via_a = compose(face_map[(a, sigma)], face_map[(rho, a)])
                via_b = compose(face_map[(b, sigma)], face_map[(rho, b)])
                direct = eng.component_map(value[rho], value[sigma])
                if not (via_a == via_b == direct):
                    raise WellDefinednessError(f"face maps of {rho} do not compose onto {sigma}")
    return cm


@dataclass(frozen=True)
class MapperNerve:
    """Nerve of the pulled-back cover.

    ``vertices[i] = (alpha, label)`` names component ``label`` of
    ``f^{-1}(U_alpha)``; ``simplices`` are sorted tuples of vertex ids,
    closed under faces and ordered by ``(dimension, tuple)``.
    """

    vertices: tuple[tuple[int, int], ...]
    simplices: tuple[tuple[int, ...], ...]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [s for s in self.simplices if len(s) == 2]

    def count_by_dim(self) -> list[int]:
        out: list[int] = []
        for s in self.simplices:
            while len(out) < len(s):
                out.append(0)
            out[len(s) - 1] += 1
        return out

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": i, "cover_index": a, "label": lab} for i, (a, lab) in enumerate(self.vertices)],
            "simplices": [list(s) for s in self.simplices],
        }

    def to_dot(self) -> str:
        lines = ["graph mapper {"]
        for i, (a, lab) in enumerate(self.vertices):
            lines.append(f'  {i} [label="U{a}:{lab}"];')
        for u, v in self.edges:
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def mapper_nerve(cm: CategoricalMapper) -> MapperNerve:
    """Mapper nerve read off the categorical mapper.

    Each component of ``f^{-1}(U_sigma)`` contributes the simplex of its images
    in the vertex sets ``C({alpha})``, ``alpha`` in ``sigma``.
    """
    k = cm.nerve
    verts = sorted((s[0], lab) for s in k.simplices if len(s) == 1 for lab in cm.value[s].labels)
    vid = {v: i for i, v in enumerate(verts)}
    tops: set[tuple[int, ...]] = set()
    for sigma in k.simplices:
        comps = cm.value[sigma].labels
        if not comps:
            continue
        per_vertex = [cm.map(sigma, (a,)) for a in sigma]
        for lab in comps:
            tops.add(tuple(sorted(vid[(a, m[lab])] for a, m in zip(sigma, per_vertex))))
    closed: set[tuple[int, ...]] = set()
    for s in tops:
        if s in closed:
            continue
        for r in range(1, len(s) + 1):
            closed.update(itertools.combinations(s, r))
    return MapperNerve(tuple(verts), tuple(sorted(closed, key=lambda s: (len(s), s))))


def jcn(x: RdSpace, counts: Sequence[int] | int, gain: float) -> MapperNerve:
    """Joint Contour Net: mapper over a uniform box grid on the image bounding box."""
    lo, hi = x.image_bounds()
    c = uniform_cover(Box(tuple(lo), tuple(hi)), counts, gain)
    return mapper_nerve(categorical_mapper(x, c, check=False))


@dataclass(frozen=True)
class SetFunctorValue:
    """A finite labelled set standing for a functor value on ``provenance``.

    ``members`` records, per label, what the element is made of: the glued
    ``(sigma, component)`` pairs for a colimit, or nothing for a direct value.
    """

    elements: tuple[int, ...]
    provenance: tuple[Box, ...]
    members: dict = field(default_factory=dict, compare=False)
    components: ComponentSet | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.elements)


def pk_evaluate(cm: CategoricalMapper, i: Box) -> SetFunctorValue:
    """Colimit of ``C_K`` over ``K_I`` via union-find.

    Class labels are ``0..n-1`` ordered by smallest member.
    """
    ki = k_sub(cm.cover, cm.nerve, i)
    uf = UnionFind((s, lab) for s in ki for lab in cm.value[s].labels)
    for tau in ki:
        for sigma in cm.nerve.facets(tau):
            for a, b in cm.face_map[(tau, sigma)].items():
                uf.union((tau, a), (sigma, b))
    classes = uf.classes()
    members = {n: tuple(cls) for n, cls in enumerate(classes)}
    return SetFunctorValue(tuple(range(len(classes))), (i,), members)


def pk_class_of(value: SetFunctorValue) -> dict:
    """Inverse index ``(sigma, component) -> class label``."""
    return {m: lab for lab, ms in value.members.items() for m in ms}


def pk_map(small: SetFunctorValue, large: SetFunctorValue) -> Mapping:
    """Map of colimits induced by ``K_I ⊆ K_J``."""
    index = pk_class_of(large)
    return {lab: index[ms[0]] for lab, ms in small.members.items()}


def f_direct(x: RdSpace, c: Cover, k: CoverNerve, i: Box) -> SetFunctorValue:
    """Components of f over the union of ``U_sigma`` for ``sigma`` in ``K_I``."""
    region = union_region(c, k, i)
    cs = components(x, region)
    return SetFunctorValue(cs.labels, cs.region, {}, cs)


@dataclass
class ColimitReport:
    boxes_checked: int = 0
    pairs_checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "boxes_checked": self.boxes_checked,
            "pairs_checked": self.pairs_checked,
            "passed": self.passed,
            "failures": self.failures,
        }


def canonical_bijection(cm: CategoricalMapper, pk: SetFunctorValue, direct: SetFunctorValue) -> Mapping:
    """Send each colimit class to the direct component containing its members.

    Raises :class:`WellDefinednessError` if the members of one class land in
    different direct components.
    """
    x = cm.space
    out: Mapping = {}
    cache: dict = {}
    for lab, ms in pk.members.items():
        targets = set()
        for sigma, comp in ms:
            m = cache.get(sigma)
            if m is None:
                m = cache[sigma] = component_map(x, cm.value[sigma], direct.components)
            targets.add(m[comp])
        if len(targets) != 1:
            raise WellDefinednessError(f"colimit class {lab} spans direct components {sorted(targets)}")
        out[lab] = targets.pop()
    return out


def nested_pairs(boxes: Sequence[Box]) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)`` with ``boxes[i] ⊆ boxes[j]`` and ``i != j``."""
    lo = np.array([b.lo for b in boxes])
    hi = np.array([b.hi for b in boxes])
    inside = np.all((lo[None, :, :] >= lo[:, None, :]) & (hi[None, :, :] <= hi[:, None, :]), axis=2)
    np.fill_diagonal(inside, False)
    outer, inner = np.nonzero(inside)
    return sorted(zip(inner.tolist(), outer.tolist()))


def lemma61_check(x: RdSpace, c: Cover, test_boxes: Sequence[Box], cm: CategoricalMapper | None = None) -> ColimitReport:
    """Colimit vs direct evaluation: bijection per box, naturality per nested pair."""
    cm = cm or categorical_mapper(x, c)
    k = cm.nerve
    rep = ColimitReport()
    pk, direct, bij = [], [], []
    for n, box in enumerate(test_boxes):
        p = pk_evaluate(cm, box)
        d = f_direct(x, c, k, box)
        pk.append(p)
        direct.append(d)
        rep.boxes_checked += 1
        try:
            b = canonical_bijection(cm, p, d)
        except WellDefinednessError as exc:
            rep.failures.append({"box": box.to_json(), "kind": "well-definedness", "detail": str(exc)})
            bij.append(None)
            continue
        if len(p) != len(d) or sorted(b.values()) != sorted(d.elements):
            rep.failures.append({
                "box": box.to_json(), "kind": "bijection",
                "colimit": len(p), "direct": len(d), "map": {str(a): v for a, v in b.items()},
            })
            bij.append(None)
            continue
        bij.append(b)
    for i, j in nested_pairs(test_boxes):
        if bij[i] is None or bij[j] is None:
            continue
        rep.pairs_checked += 1
        left = compose(bij[j], pk_map(pk[i], pk[j]))
        right = compose(component_map(x, direct[i].components, direct[j].components), bij[i])
        if left != right:
            rep.failures.append({
                "box": test_boxes[i].to_json(), "outer": test_boxes[j].to_json(), "kind": "naturality",
                "via_colimit": {str(a): v for a, v in left.items()},
                "via_direct": {str(a): v for a, v in right.items()},
            })
    return rep


def breakpoints_1d(x: RdSpace, c: Cover, shifts: Iterable[float] = ()) -> np.ndarray:
    """Sorted distinct cover endpoints and vertex values, with optional shifts."""
    base = [v for b in c.elements for v in (b.lo[0], b.hi[0])]
    base += x.values[:, 0].tolist()
    pts = set(base)
    for s in shifts:
        pts.update(v + s for v in base)
        pts.update(v - s for v in base)
    return np.array(sorted(pts))


def midpoints(bp: np.ndarray) -> np.ndarray:
    """Midpoints of consecutive breakpoints plus one point beyond each end."""
    if len(bp) == 0:
        return bp
    span = max(bp[-1] - bp[0], 1.0)
    inner = (bp[:-1] + bp[1:]) / 2
    return np.concatenate([[bp[0] - span], inner, [bp[-1] + span]])


def default_test_boxes(x: RdSpace, c: Cover, count: int = 64, seed: int = 0,
                       limit: int | None = None) -> list[Box]:
    """Test boxes for the colimit check.

    d = 1: every interval between two midpoints of consecutive breakpoints;
    if ``limit`` is set and the family is larger, a seeded subset of that size.
    d >= 2: ``count`` seeded boxes at scales res/2, res and 2 res, half of
    them drawn inside earlier boxes so nested pairs occur.
    """
    rng = np.random.default_rng(seed)
    if x.dim_range == 1:
        mids = midpoints(breakpoints_1d(x, c))
        boxes = [Box((a,), (b,)) for a, b in itertools.combinations(mids.tolist(), 2)]
        if limit is not None and len(boxes) > limit:
            pick = np.sort(rng.choice(len(boxes), size=limit, replace=False))
            boxes = [boxes[i] for i in pick]
        return boxes
    return random_boxes(x, c, count, rng)


def random_boxes(x: RdSpace, c: Cover, count: int, rng: np.random.Generator) -> list[Box]:
    d = x.dim_range
    res = resolution(c)
    lo, hi = x.image_bounds()
    lo = lo - res
    hi = hi + res
    scales = (res / 2, res, 2 * res)
    boxes: list[Box] = []
    for n in range(count):
        if boxes and n % 2 == 1:
            parent = boxes[int(rng.integers(len(boxes)))]
            a = np.array(parent.lo)
            b = np.array(parent.hi)
            u = np.sort(rng.uniform(size=(d, 2)), axis=1)
            blo = a + (b - a) * u[:, 0]
            bhi = a + (b - a) * u[:, 1]
            if np.all(bhi > blo):
                boxes.append(Box(tuple(blo), tuple(bhi)))
                continue
        w = scales[n % 3] * rng.uniform(0.5, 1.5, size=d)
        centre = rng.uniform(lo, hi)
        boxes.append(Box(tuple(centre - w / 2), tuple(centre + w / 2)))
    return boxes

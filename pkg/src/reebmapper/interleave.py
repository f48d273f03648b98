"""Explicit interleavings between the Reeb functor and the mapper image.

``C(I)`` is the set of components of ``f^{-1}(I)``; ``F(I)`` is the set of
components over ``W(I)``, the union of the cover elements meeting ``I``,
which is isomorphic to the colimit of the categorical mapper over ``K_I``.
For ``eps >= res`` every cover element meeting ``I`` lies inside ``I^eps``
and ``I`` lies inside ``W(I^eps)``, giving maps ``phi_I: F(I) -> C(I^eps)``
and ``psi_I: C(I) -> F(I^eps)``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .complex import RdSpace
from .cover import Box, Cover, nerve_of_cover, resolution, thicken
from .errors import ContainmentError, VerificationError
from .mapper import CategoricalMapper, breakpoints_1d, compose, midpoints, pk_evaluate, pk_map, random_boxes
from .preimage import ComponentSet, engine_for

Mapping = dict[int, int]


class Functor(Protocol):
    def value(self, box: Box) -> tuple[int, ...]: ...
    def map(self, small: Box, large: Box) -> Mapping: ...


class ReebSpaceFunctor:
    """``I -> pi_0 f^{-1}(I)``."""

    def __init__(self, x: RdSpace):
        self.space = x
        self._eng = engine_for(x)

    def components(self, box: Box) -> ComponentSet:
        return self._eng.components(box)

    def value(self, box: Box) -> tuple[int, ...]:
        return self.components(box).labels

    def map(self, small: Box, large: Box) -> Mapping:
        return self._eng.component_map(self.components(small), self.components(large))


class MapperImageFunctor:
    """``I -> pi_0 f^{-1}(W(I))`` with ``W(I)`` the union of cover elements meeting ``I``."""

    def __init__(self, x: RdSpace, c: Cover):
        self.space = x
        self.cover = c
        self._eng = engine_for(x)
        self._lo = np.array([b.lo for b in c.elements])
        self._hi = np.array([b.hi for b in c.elements])
        self._regions: dict = {}

    def region(self, box: Box) -> tuple[Box, ...]:
        hit = self._regions.get(box)
        if hit is None:
            lo, hi = np.array(box.lo), np.array(box.hi)
            meets = np.all(np.maximum(self._lo, lo) < np.minimum(self._hi, hi), axis=1)
            hit = tuple(self.cover.elements[i] for i in np.flatnonzero(meets))
            self._regions[box] = hit
        return hit

    def components(self, box: Box) -> ComponentSet:
        return self._eng.components(self.region(box))

    def value(self, box: Box) -> tuple[int, ...]:
        return self.components(box).labels

    def map(self, small: Box, large: Box) -> Mapping:
        return self._eng.component_map(self.components(small), self.components(large))


class ColimitFunctor:
    """``I -> colim_{K_I} C_K`` evaluated by union-find."""

    def __init__(self, cm: CategoricalMapper):
        self.cm = cm
        self._cache: dict = {}

    def _eval(self, box: Box):
        hit = self._cache.get(box)
        if hit is None:
            hit = self._cache[box] = pk_evaluate(self.cm, box)
        return hit

    def value(self, box: Box) -> tuple[int, ...]:
        return self._eval(box).elements

    def map(self, small: Box, large: Box) -> Mapping:
        return pk_map(self._eval(small), self._eval(large))


class EmptyFunctor:
    def value(self, box: Box) -> tuple[int, ...]:
        return ()

    def map(self, small: Box, large: Box) -> Mapping:
        return {}


@dataclass
class InterleavingWitness:
    """Maps ``phi_I: F(I) -> G(I^eps)`` and ``psi_I: G(I) -> F(I^eps)`` on demand.

    ``phi_fn`` and ``psi_fn`` compute a map for any box; results are memoised
    in ``phi`` and ``psi`` so later edits (e.g. a deliberate corruption) stick.
    """

    F: Functor
    G: Functor
    eps: float
    generators: list[Box]
    pairs: list[tuple[int, int]]
    phi_fn: Callable[[Box], Mapping]
    psi_fn: Callable[[Box], Mapping]
    label: str = "full"
    phi: dict = field(default_factory=dict)
    psi: dict = field(default_factory=dict)

    def phi_at(self, box: Box) -> Mapping:
        m = self.phi.get(box)
        if m is None:
            m = self.phi[box] = self.phi_fn(box)
        return m

    def psi_at(self, box: Box) -> Mapping:
        m = self.psi.get(box)
        if m is None:
            m = self.psi[box] = self.psi_fn(box)
        return m

    def thick(self, box: Box, times: int = 1) -> Box:
        for _ in range(times):
            box = thicken(box, self.eps)
        return box


def generators_1d(x: RdSpace, c: Cover, eps: float) -> list[Box]:
    """All intervals between midpoints of the refined breakpoint set.

    Breakpoints are cover endpoints and vertex values with their ``±eps`` and
    ``±2 eps`` shifts, so both functors are constant between them.
    """
    shifts = (eps, 2 * eps) if eps > 0 else ()
    mids = midpoints(breakpoints_1d(x, c, shifts)).tolist()
    return [Box((a,), (b,)) for a, b in itertools.combinations(mids, 2)]


def elementary_pairs_1d(boxes: Sequence[Box]) -> list[tuple[int, int]]:
    """Nested pairs that move a single endpoint outward by one grid step.

    Every nested pair in the interval family is a chain of such steps, and
    naturality squares paste along chains, so these pairs suffice.
    """
    mids = sorted({b.lo[0] for b in boxes} | {b.hi[0] for b in boxes})
    rank = {v: i for i, v in enumerate(mids)}
    where = {(rank[b.lo[0]], rank[b.hi[0]]): n for n, b in enumerate(boxes)}
    out = []
    for (i, j), n in where.items():
        for nb in ((i - 1, j), (i, j + 1)):
            m = where.get(nb)
            if m is not None:
                out.append((n, m))
    return sorted(out)


def all_nested_pairs(boxes: Sequence[Box]) -> list[tuple[int, int]]:
    from .mapper import nested_pairs
    return nested_pairs(boxes)


def sampled_generators(x: RdSpace, c: Cover, count: int = 64, seed: int = 0) -> list[Box]:
    return random_boxes(x, c, count, np.random.default_rng(seed))


def build_interleaving(x: RdSpace, c: Cover, eps: float | None = None, *, generators: Sequence[Box] | None = None,
                       pairs: str = "elementary", count: int = 64, seed: int = 0) -> InterleavingWitness:
    """The interleaving between the mapper image ``F`` and ``C`` at ``eps`` (default ``res``).

    ``pairs`` picks the nested pairs for the naturality checks in d = 1:
    ``"elementary"`` or ``"all"``. For d >= 2 the generators are ``count``
    seeded boxes and the witness is labelled ``"sampled"``.
    """
    res = resolution(c)
    eps = res if eps is None else float(eps)
    if eps < res:
        raise ContainmentError(f"eps={eps} is below the cover resolution {res}")
    F = MapperImageFunctor(x, c)
    G = ReebSpaceFunctor(x)
    if generators is None:
        if x.dim_range == 1:
            gens = generators_1d(x, c, eps)
            label = "full"
        else:
            gens = sampled_generators(x, c, count, seed)
            label = "sampled"
    else:
        gens = list(generators)
        label = "full" if x.dim_range == 1 else "sampled"
    if x.dim_range == 1 and pairs == "elementary" and generators is None:
        prs = elementary_pairs_1d(gens)
    else:
        prs = all_nested_pairs(gens)
    slack = 1e-12 * max(1.0, eps)

    def phi_fn(box: Box) -> Mapping:
        big = thicken(box, eps)
        for u in F.region(box):
            if not big.contains(u, slack):
                raise ContainmentError(f"cover element {u} meets {box} but is not inside {big}")
        return engine_for(x).component_map(F.components(box), G.components(big))

    def psi_fn(box: Box) -> Mapping:
        return engine_for(x).component_map(G.components(box), F.components(thicken(box, eps)))

    return InterleavingWitness(F, G, eps, gens, prs, phi_fn, psi_fn, label)


def identity_witness(x: RdSpace, generators: Sequence[Box], pairs: Sequence[tuple[int, int]] | None = None) -> InterleavingWitness:
    """``C`` against itself at ``eps = 0`` with identity maps."""
    G = ReebSpaceFunctor(x)
    ident = lambda box: {lab: lab for lab in G.value(box)}  # noqa: E731
    gens = list(generators)
    prs = list(pairs) if pairs is not None else all_nested_pairs(gens)
    return InterleavingWitness(G, G, 0.0, gens, prs, ident, ident, "identity")


def swapped(w: InterleavingWitness) -> InterleavingWitness:
    """The same interleaving read from the other side."""
    return InterleavingWitness(w.G, w.F, w.eps, w.generators, w.pairs, w.psi_at, w.phi_at, w.label)


def relaxed(w: InterleavingWitness, eps2: float) -> InterleavingWitness:
    """Witness at ``eps2 >= eps`` obtained by composing with thickening maps."""
    if eps2 < w.eps:
        raise ValueError("can only relax to a larger eps")

    def phi_fn(box: Box) -> Mapping:
        return compose(w.G.map(thicken(box, w.eps), thicken(box, eps2)), w.phi_at(box))

    def psi_fn(box: Box) -> Mapping:
        return compose(w.F.map(thicken(box, w.eps), thicken(box, eps2)), w.psi_at(box))

    return InterleavingWitness(w.F, w.G, eps2, w.generators, w.pairs, phi_fn, psi_fn, w.label)


@dataclass
class DiagramReport:
    label: str
    eps: float
    generators: int = 0
    squares_checked: int = 0
    triangles_checked: int = 0
    failure_count: int = 0
    counterexamples: list = field(default_factory=list)
    max_examples: int = 10

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def fail(self, payload: dict) -> None:
        self.failure_count += 1
        if len(self.counterexamples) < self.max_examples:
            self.counterexamples.append(payload)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "eps": self.eps,
            "generators": self.generators,
            "squares_checked": self.squares_checked,
            "triangles_checked": self.triangles_checked,
            "failures": self.failure_count,
            "passed": self.passed,
            "counterexamples": self.counterexamples,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _jsonmap(m: Mapping) -> dict:
    return {str(k): v for k, v in sorted(m.items())}


def verify_interleaving(w: InterleavingWitness) -> DiagramReport:
    """Check totality, naturality squares on nested pairs and both triangles."""
    rep = DiagramReport(w.label, w.eps, len(w.generators))
    gens = w.generators
    for box in gens:
        big = w.thick(box)
        phi, psi = w.phi_at(box), w.psi_at(box)
        if set(phi) != set(w.F.value(box)) or not set(phi.values()) <= set(w.G.value(big)):
            rep.fail({"kind": "phi-not-total", "box": box.to_json()})
            continue
        if set(psi) != set(w.G.value(box)) or not set(psi.values()) <= set(w.F.value(big)):
            rep.fail({"kind": "psi-not-total", "box": box.to_json()})
            continue
        two = w.thick(box, 2)
        rep.triangles_checked += 2
        left = compose(w.psi_at(big), phi)
        right = w.F.map(box, two)
        if left != right:
            rep.fail({"kind": "triangle-F", "box": box.to_json(),
                      "psi_after_phi": _jsonmap(left), "F_map": _jsonmap(right)})
        left = compose(w.phi_at(big), psi)
        right = w.G.map(box, two)
        if left != right:
            rep.fail({"kind": "triangle-G", "box": box.to_json(),
                      "phi_after_psi": _jsonmap(left), "G_map": _jsonmap(right)})
    for i, j in w.pairs:
        a, b = gens[i], gens[j]
        ae, be = w.thick(a), w.thick(b)
        rep.squares_checked += 2
        left = compose(w.G.map(ae, be), w.phi_at(a))
        right = compose(w.phi_at(b), w.F.map(a, b))
        if left != right:
            rep.fail({"kind": "square-phi", "inner": a.to_json(), "outer": b.to_json(),
                      "G_then": _jsonmap(left), "F_then": _jsonmap(right)})
        left = compose(w.F.map(ae, be), w.psi_at(a))
        right = compose(w.psi_at(b), w.G.map(a, b))
        if left != right:
            rep.fail({"kind": "square-psi", "inner": a.to_json(), "outer": b.to_json(),
                      "F_then": _jsonmap(left), "G_then": _jsonmap(right)})
    return rep


def corrupt(w: InterleavingWitness) -> tuple[str, Box, int, int] | None:
    """Redirect one ``phi`` or ``psi`` image so that some checked diagram breaks.

    Tries, in order: a change visible through a triangle (the other map at
    ``I^eps`` separates old and new image), then one visible through a
    naturality square (the thickening map to ``J^eps`` separates them).
    Returns ``(side, I, element, new_image)``, or ``None`` when no single
    relabelling is detectable.
    """
    sides = (("phi", w.phi_at, w.psi_at, w.phi, w.G), ("psi", w.psi_at, w.phi_at, w.psi, w.F))
    for side, first, second, store, target in sides:
        for box in w.generators:
            m = first(box)
            if not m:
                continue
            big = w.thick(box)
            back = second(big)
            for a, b in m.items():
                for alt in target.value(big):
                    if alt != b and back[alt] != back[b]:
                        store[box] = {**m, a: alt}
                        return side, box, a, alt
    for side, first, _, store, target in sides:
        for i, j in w.pairs:
            box, outer = w.generators[i], w.generators[j]
            m = first(box)
            if not m:
                continue
            push = target.map(w.thick(box), w.thick(outer))
            for a, b in m.items():
                for alt in target.value(w.thick(box)):
                    if alt != b and push[alt] != push[b]:
                        store[box] = {**m, a: alt}
                        return side, box, a, alt
    return None


def certified_upper_bound(x: RdSpace, c: Cover, **kw) -> float:
    """``res(c)`` once the interleaving at that eps has been verified."""
    w = build_interleaving(x, c, **kw)
    rep = verify_interleaving(w)
    if not rep.passed:
        raise VerificationError(rep.dumps())
    return resolution(c)


def default_candidates(x: RdSpace, c: Cover | None = None, steps: int = 24) -> list[float]:
    lo, hi = x.image_bounds() if x.complex.vertex_count else (np.zeros(1), np.ones(1))
    span = float(np.max(hi - lo))
    if c is not None:
        span = max(span, resolution(c))
    span = max(span, 1e-6)
    grid = [span * 2.0 ** (k / 2) for k in range(-steps, 5)]
    return [0.0] + sorted(set(grid)) + [math.inf]


def _violates(a: Functor, b: Functor, probe: Box, eps: float) -> bool:
    two = thicken(thicken(probe, eps), eps)
    image = set(a.map(probe, two).values())
    return len(image) > len(b.value(thicken(probe, eps)))


def cardinality_lower_bound(a: Functor, b: Functor, probes: Sequence[Box],
                            candidates: Sequence[float] | None = None) -> float:
    """Largest candidate eps at which no eps-interleaving can exist.

    An eps-interleaving factors ``a[I ⊆ I^{2 eps}]`` through ``b(I^eps)``, so
    the image of that map can have at most ``|b(I^eps)|`` elements (and the
    same with ``a`` and ``b`` exchanged). Returns 0 if no probe violates this.
    """
    if candidates is None:
        candidates = [0.0, math.inf]
    best = 0.0
    for eps in sorted(candidates):
        for probe in probes:
            if _violates(a, b, probe, eps) or _violates(b, a, probe, eps):
                best = eps
                break
    return best

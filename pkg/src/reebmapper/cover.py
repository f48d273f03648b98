"""Axis-aligned open box covers of R^d and their nerves.

All distances use the sup-norm, so the diameter of a box is its longest side
and thickening a box by ``eps`` widens every side by ``eps`` at both ends.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CoverError

Simplex = tuple[int, ...]


@dataclass(frozen=True)
class Box:
    """Open box ``prod_i (lo_i, hi_i)``; bounds may be infinite."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise CoverError("box bounds must be non-empty and of equal length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "_hash", hash((lo, hi)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def of(cls, *intervals: Sequence[float]) -> "Box":
        """``Box.of((0, 1), (2, 3))`` builds (0,1) x (2,3)."""
        return cls(tuple(a for a, _ in intervals), tuple(b for _, b in intervals))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def is_empty(self) -> bool:
        return any(not a < b for a, b in zip(self.lo, self.hi))

    def intersect(self, other: "Box") -> "Box":
        return Box(
            tuple(max(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(min(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def meets(self, other: "Box") -> bool:
        return all(max(a, c) < min(b, d) for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def contains(self, other: "Box", slack: float = 0.0) -> bool:
        """Box-wise containment ``other ⊆ self`` (up to ``slack`` per bound)."""
        return all(
            a <= c + slack and d <= b + slack
            for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def diameter(self) -> float:
        return max(b - a for a, b in zip(self.lo, self.hi))

    def thicken(self, eps: float) -> "Box":
        return thicken(self, eps)

    def to_json(self) -> list[list[float]]:
        return [[a, b] for a, b in zip(self.lo, self.hi)]

    def __repr__(self) -> str:
        return "Box(" + " x ".join(f"({a:g}, {b:g})" for a, b in zip(self.lo, self.hi)) + ")"


def thicken(b: Box, eps: float) -> Box:
    if eps < 0:
        raise ValueError("thickening radius must be non-negative")
    if eps == 0:
        return b
    return Box(tuple(a - eps for a in b.lo), tuple(h + eps for h in b.hi))


@dataclass(frozen=True)
class UniformSpec:
    """Parameters a cover was generated from, kept so it can be refined."""

    range_lo: tuple[float, ...]
    range_hi: tuple[float, ...]
    counts: tuple[int, ...]
    gain: float


@dataclass(frozen=True)
class Cover:
    elements: tuple[Box, ...]
    uniform: UniformSpec | None = None

    def __post_init__(self):
        if not self.elements:
            raise CoverError("a cover needs at least one element")
        d = self.elements[0].dim
        for b in self.elements:
            if b.dim != d:
                raise CoverError("cover elements have mixed dimensions")
            if b.is_empty:
                raise CoverError(f"cover element {b} is empty")

    @property
    def dim_range(self) -> int:
        return self.elements[0].dim

    def __len__(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        out = {"elements": [b.to_json() for b in self.elements]}
        if self.uniform is not None:
            out["counts"] = list(self.uniform.counts)
            out["gain"] = self.uniform.gain
        return out


def _axis_intervals(lo: float, hi: float, n: int, gain: float) -> list[tuple[float, float]]:
    if n == 1:
        width = hi - lo
        c = (lo + hi) / 2
        r = (1 + gain) * width / 2
        return [(c - r, c + r)]
    step = (hi - lo) / (n - 1)
    r = (1 + gain) * step / 2
    return [(lo + i * step - r, lo + i * step + r) for i in range(n)]


def uniform_cover(range_box: Box | Sequence[Sequence[float]], counts: Sequence[int] | int, gain: float) -> Cover:
    """Product cover with ``counts[i]`` evenly spaced intervals on axis ``i``.

    Interval centres sit on ``lo + j*step`` with ``step = (hi-lo)/(n-1)`` and
    radius ``(1+gain)*step/2``, so only neighbouring intervals overlap and the
    closed range lies strictly inside the union. A degenerate axis
    (``lo == hi``) is widened to unit length first.
    """
    if not isinstance(range_box, Box):
        range_box = Box.of(*range_box)
    d = range_box.dim
    if isinstance(counts, int):
        counts = (counts,) * d
    counts = tuple(int(n) for n in counts)
    if len(counts) != d:
        raise CoverError(f"need {d} interval counts, got {len(counts)}")
    if any(n < 1 for n in counts):
        raise CoverError("interval counts must be at least 1")
    if not (0.0 < gain < 1.0):
        raise CoverError(f"gain must lie in (0, 1), got {gain}")
    lo, hi = list(range_box.lo), list(range_box.hi)
    for i in range(d):
        if not (math.isfinite(lo[i]) and math.isfinite(hi[i])) or hi[i] < lo[i]:
            raise CoverError(f"invalid range on axis {i}: ({lo[i]}, {hi[i]})")
        if hi[i] == lo[i]:
            lo[i] -= 0.5
            hi[i] += 0.5
    axes = [_axis_intervals(lo[i], hi[i], counts[i], gain) for i in range(d)]
    elements = tuple(
        Box(tuple(iv[0] for iv in combo), tuple(iv[1] for iv in combo))
        for combo in itertools.product(*axes)
    )
    spec = UniformSpec(tuple(lo), tuple(hi), counts, float(gain))
    return Cover(elements, spec)


def resolution(c: Cover) -> float:
    return max(b.diameter() for b in c.elements)


def refine(c: Cover) -> Cover:
    """Same range and gain with ``2n-1`` intervals per axis (``1 -> 3``)."""
    if c.uniform is None:
        raise CoverError("only covers built by uniform_cover can be refined")
    u = c.uniform
    counts = tuple(3 if n == 1 else 2 * n - 1 for n in u.counts)
    return uniform_cover(Box(u.range_lo, u.range_hi), counts, u.gain)


@dataclass(frozen=True)
class CoverNerve:
    """Nerve K of a cover with the intersection box of every simplex."""

    simplices: tuple[Simplex, ...]
    intersection_box: dict

    def __contains__(self, sigma) -> bool:
        return tuple(sigma) in self.intersection_box

    def __len__(self) -> int:
        return len(self.simplices)

    def box(self, sigma: Simplex) -> Box:
        return self.intersection_box[tuple(sigma)]

    @property
    def vertices(self) -> list[int]:
        return [s[0] for s in self.simplices if len(s) == 1]

    def facets(self, sigma: Simplex) -> list[Simplex]:
        if len(sigma) == 1:
            return []
        return [sigma[:k] + sigma[k + 1:] for k in range(len(sigma))]

    def cofacets(self) -> dict:
        out: dict = {s: [] for s in self.simplices}
        for s in self.simplices:
            for f in self.facets(s):
                out[f].append(s)
        return out

    def edges(self) -> list[Simplex]:
        return [s for s in self.simplices if len(s) == 2]


def nerve_of_cover(c: Cover) -> CoverNerve:
    """All index sets with nonempty common intersection.

    Grown one vertex at a time from lower-dimensional simplices, so the
    result is closed under faces by construction.
    """
    boxes = c.elements
    n = len(boxes)
    lo = np.array([b.lo for b in boxes])
    hi = np.array([b.hi for b in boxes])
    adjacent = np.all(
        np.maximum(lo[:, None, :], lo[None, :, :]) < np.minimum(hi[:, None, :], hi[None, :, :]),
        axis=2,
    )
    inter: dict = {(i,): boxes[i] for i in range(n)}
    layer = [(i,) for i in range(n)]
    while layer:
        nxt = []
        for sigma in layer:
            base = inter[sigma]
            for j in range(sigma[-1] + 1, n):
                if not all(adjacent[i, j] for i in sigma):
                    continue
                if base.meets(boxes[j]):
                    tau = sigma + (j,)
                    inter[tau] = base.intersect(boxes[j])
                    nxt.append(tau)
        layer = nxt
    simplices = tuple(sorted(inter, key=lambda s: (len(s), s)))
    return CoverNerve(simplices, inter)


def k_sub(c: Cover, k: CoverNerve, a: Box) -> list[Simplex]:
    """Nerve simplices whose intersection box meets the open box ``a``."""
    return [s for s in k.simplices if k.intersection_box[s].meets(a)]


def union_region(c: Cover, k: CoverNerve, a: Box) -> tuple[Box, ...]:
    """Boxes whose union is ``U_sigma`` over ``sigma`` in ``K_a``.

    Since ``U_sigma ⊆ U_alpha`` for each vertex of ``sigma``, the union is the
    union of the vertex boxes in ``K_a``.
    """
    return tuple(c.elements[s[0]] for s in k_sub(c, k, a) if len(s) == 1)


def normalize_region(boxes: Iterable[Box]) -> tuple[Box, ...]:
    """Equivalent list of boxes with redundant ones dropped and mergeable ones merged.

    Two boxes merge when they agree on every axis but one and overlap on that
    axis, in which case their union is again a box.
    """
    work = []
    for b in boxes:
        if not b.is_empty and b not in work:
            work.append(b)
    changed = True
    while changed:
        changed = False
        work = [b for i, b in enumerate(work)
                if not any(j != i and o.contains(b) and (o != b) for j, o in enumerate(work))]
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                m = _merge(work[i], work[j])
                if m is not None:
                    work = [b for t, b in enumerate(work) if t not in (i, j)] + [m]
                    changed = True
                    break
            if changed:
                break
    return tuple(sorted(work, key=lambda b: (b.lo, b.hi)))


def _merge(a: Box, b: Box) -> Box | None:
    diff = [i for i in range(a.dim) if (a.lo[i], a.hi[i]) != (b.lo[i], b.hi[i])]
    if len(diff) != 1:
        return None
    i = diff[0]
    if max(a.lo[i], b.lo[i]) < min(a.hi[i], b.hi[i]):
        lo = list(a.lo)
        hi = list(a.hi)
        lo[i] = min(a.lo[i], b.lo[i])
        hi[i] = max(a.hi[i], b.hi[i])
        return Box(tuple(lo), tuple(hi))
    return None


def cover_from_json(payload) -> Cover:
    try:
        boxes = tuple(Box.of(*el) for el in payload["elements"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CoverError(f"malformed cover JSON: {exc}") from exc
    return Cover(boxes)

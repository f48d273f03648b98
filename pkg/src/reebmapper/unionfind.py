"""Disjoint-set forest over hashable items, used for finite colimits."""
from __future__ import annotations

from typing import Hashable, Iterable


class UnionFind:
    """Union by size with path halving."""

    def __init__(self, items: Iterable[Hashable] = ()):
        self._parent: dict = {}
        self._size: dict = {}
        for it in items:
            self.add(it)

    def add(self, item: Hashable) -> None:
        if item not in self._parent:
            self._parent[item] = item
            self._size[item] = 1

    def __contains__(self, item) -> bool:
        return item in self._parent

    def __len__(self) -> int:
        return len(self._parent)

    def find(self, item: Hashable) -> Hashable:
        parent = self._parent
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = parent[item]
        return item

    def union(self, a: Hashable, b: Hashable) -> Hashable:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]
        return ra

    def classes(self) -> list[list]:
        """Classes as sorted lists, ordered by their smallest member."""
        groups: dict = {}
        for it in self._parent:
            groups.setdefault(self.find(it), []).append(it)
        return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])

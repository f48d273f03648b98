"""Dense two-phase simplex method over exact rationals.

Only meant for the tiny programs arising from one simplex against one box
(a handful of barycentric variables), where exactness matters more than speed.
Bland's rule is used throughout, so the method always terminates.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np


class Infeasible(Exception):
    pass


def _pivot(t: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = t[row][col]
    t[row] = [v / piv for v in t[row]]
    for r in range(len(t)):
        if r != row and t[r][col] != 0:
            f = t[r][col]
            t[r] = [a - f * b for a, b in zip(t[r], t[row])]
    basis[row] = col


def _run(t: list[list[Fraction]], basis: list[int], allowed: int) -> None:
    # last row holds reduced costs of a maximisation (negative entry => improving)
    while True:
        obj = t[-1]
        col = next((j for j in range(allowed) if obj[j] < 0), None)
        if col is None:
            return
        best = None
        for r in range(len(t) - 1):
            a = t[r][col]
            if a > 0:
                ratio = t[r][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            raise ArithmeticError("unbounded program")
        _pivot(t, basis, best[1], col)


def maximize(c: Sequence, a_ub: Sequence[Sequence], b_ub: Sequence,
             a_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> tuple[Fraction, list[Fraction]]:
    """Maximise ``c @ x`` subject to ``a_ub @ x <= b_ub``, ``a_eq @ x == b_eq``, ``x >= 0``.

    All inputs are converted to :class:`fractions.Fraction` (floats exactly).
    Raises :class:`Infeasible` when no feasible point exists.
    """
    n = len(c)
    rows = [([Fraction(v) for v in r], Fraction(b), True) for r, b in zip(a_ub, b_ub)]
    rows += [([Fraction(v) for v in r], Fraction(b), False) for r, b in zip(a_eq, b_eq)]
    m = len(rows)
    n_slack = sum(1 for _, _, ub in rows if ub)
    width = n + n_slack + m  # originals, slacks, artificials
    t: list[list[Fraction]] = []
    slack_col = n
    for i, (coef, b, ub) in enumerate(rows):
        row = coef + [Fraction(0)] * (n_slack + m) + [b]
        if ub:
            row[slack_col] = Fraction(1)
            slack_col += 1
        if b < 0:
            row = [-v for v in row]
        row[n + n_slack + i] = Fraction(1)
        t.append(row)
    basis = [n + n_slack + i for i in range(m)]
    # phase 1: maximise -sum(artificials)
    obj = [Fraction(0)] * (width + 1)
    for r in t:
        for j in range(n + n_slack):
            obj[j] -= r[j]
        obj[-1] -= r[-1]
    t.append(obj)
    _run(t, basis, n + n_slack)
    if t[-1][-1] != 0:
        raise Infeasible()
    # drive remaining artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= n + n_slack:
            col = next((j for j in range(n + n_slack) if t[r][j] != 0), None)
            if col is not None:
                _pivot(t, basis, r, col)
    # phase 2
    obj = [Fraction(0)] * (width + 1)
    for j in range(n):
        obj[j] = -Fraction(c[j])
    for r in range(m):
        col = basis[r]
        if col < n and obj[col] != 0:
            f = obj[col]
            obj = [a - f * b for a, b in zip(obj, t[r])]
    t[-1] = obj
    _run(t, basis, n + n_slack)
    x = [Fraction(0)] * n
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = t[r][-1]
    return t[-1][-1], x


def hull_meets_box(points: np.ndarray, lo: Sequence[float], hi: Sequence[float]) -> bool:
    """Whether conv(points) meets the open box ``(lo, hi)``, decided exactly.

    Maximises the slack ``t`` in ``lo + t <= sum_j lam_j p_j <= hi - t`` over
    barycentric ``lam``; the hull meets the open box iff the optimum is > 0.
    ``t`` is capped at 1 to keep the program bounded.
    """
    points = np.asarray(points, dtype=np.float64)
    k, d = points.shape
    # variables: lam_1..lam_k, u, w with t = u - w
    c = [0] * k + [1, -1]
    a_ub, b_ub = [], []
    for i in range(d):
        coords = [Fraction(float(p)) for p in points[:, i]]
        if np.isfinite(lo[i]):
            a_ub.append([-v for v in coords] + [1, -1])
            b_ub.append(-Fraction(float(lo[i])))
        if np.isfinite(hi[i]):
            a_ub.append(coords + [1, -1])
            b_ub.append(Fraction(float(hi[i])))
    a_ub.append([0] * k + [1, 0])
    b_ub.append(1)
    a_eq = [[1] * k + [0, 0]]
    b_eq = [1]
    try:
        best, _ = maximize(c, a_ub, b_ub, a_eq, b_eq)
    except Infeasible:
        return False
    return best > 0

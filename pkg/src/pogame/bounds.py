"""Local and preparation-non-contextual bounds by exact enumeration.

For a deterministic strategy (a, b) with entries in {-1, +1} the Bell value
factors as ``sum_y b_y (s - 2 a_y)`` with ``s = sum_x a_x``, so the best Bob
response is ``b_y = sign(s - 2 a_y)`` and enumeration over Alice's 2^n sign
vectors is exact.  The PNC polytope replaces Alice's responses by vectors in
[-1, 1]^n summing to zero; the objective is linear in them, so the maximum
sits on a vertex (one zero entry, balanced signs elsewhere, for odd n).

Enumeration order is lexicographic with -1 < 0 < +1 and the first maximizer
wins, so results are reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import gamecore

#: Enumeration is exact but exponential; a verifier has no business beyond this.
MAX_N = 13


@dataclass(frozen=True)
class DeterministicStrategy:
    a: tuple[int, ...]
    b: tuple[int, ...]


@dataclass(frozen=True)
class PncVertex:
    """Alice vertex of {sum a = 0, |a_x| <= 1} plus a deterministic Bob."""

    a: tuple[int, ...]
    b: tuple[int, ...]


def _check_n(n: int) -> None:
    if n % 2 == 0 or n < 3 or n > MAX_N:
        raise ValueError(f"n must be odd with 3 <= n <= {MAX_N}, got {n}")


def _best_bob(a) -> tuple[np.ndarray, float]:
    """Optimal deterministic Bob against Alice responses a (entries in [-1, 1]).

    Ties (coefficient exactly zero) resolve to -1, the lexicographically
    smallest choice.
    """
    a = np.asarray(a, dtype=float)
    coeff = a.sum() - 2.0 * a
    b = np.where(coeff > 0, 1, -1)
    return b, float(np.abs(coeff).sum())


def local_bound(n: int) -> tuple[int, DeterministicStrategy]:
    """Exact maximum over all 2^(2n) deterministic strategies, with witness."""
    _check_n(n)
    rows = np.array(list(product((-1, 1), repeat=n)), dtype=int)
    s = rows.sum(axis=1)
    values = np.abs(s[:, None] - 2 * rows).sum(axis=1)
    idx = int(np.argmax(values))  # first maximizer = lexicographically smallest a
    a = rows[idx]
    b, value = _best_bob(a)
    return int(round(value)), DeterministicStrategy(tuple(int(v) for v in a), tuple(int(v) for v in b))


def local_bound_closed_form(n: int) -> int:
    """Independent route: maximize over the number of +1 entries in a.

    The value of the best (a, b) depends on a only through s = sum(a):
    ``(n+s)/2 * |s-2| + (n-s)/2 * |s+2|``.
    """
    _check_n(n)
    best = 0
    for s in range(-n, n + 1, 2):
        k_plus = (n + s) // 2
        k_minus = (n - s) // 2
        best = max(best, k_plus * abs(s - 2) + k_minus * abs(s + 2))
    return best


def _pnc_vertices(n: int):
    """Vertices of {a in [-1,1]^n : sum a = 0} in lexicographic order.

    For odd n each vertex has exactly one zero entry and balanced signs on
    the rest.
    """
    for a in product((-1, 0, 1), repeat=n):
        if a.count(0) == 1 and sum(a) == 0:
            yield a


def pnc_bound(n: int) -> tuple[int, PncVertex]:
    """Exact maximum over PNC vertices with an unconstrained deterministic Bob."""
    _check_n(n)
    best_value = None
    best_witness = None
    for a in _pnc_vertices(n):
        b, value = _best_bob(a)
        value = int(round(value))
        if best_value is None or value > best_value:
            best_value = value
            best_witness = PncVertex(a, tuple(int(v) for v in b))
    return best_value, best_witness


def pnc_bound_reduction(n: int) -> int:
    """Closed-form route: with sum a = 0 the value is 2 sum |a_y|, maximal at 2(n-1)."""
    _check_n(n)
    return 2 * (n - 1)


def pnc_bound_symmetric(n: int) -> int:
    """PNC bound when Bob's responses are constrained to the same polytope.

    The objective is linear in b on Bob's polytope, so for each Alice vertex
    it suffices to enumerate Bob's zero position and balance the signs of
    the remaining entries against the coefficients.
    """
    _check_n(n)
    half = (n - 1) // 2
    best = 0.0
    for a in _pnc_vertices(n):
        arr = np.asarray(a, dtype=float)
        coeff = arr.sum() - 2.0 * arr
        for q in range(n):
            rest = np.sort(np.delete(coeff, q))[::-1]
            value = rest[:half].sum() - rest[half:].sum()
            best = max(best, value)
    return int(round(best))


def strategy_behavior(strategy: DeterministicStrategy | PncVertex, n: int) -> gamecore.Behavior:
    """Behavior realized by a (possibly fuzzy) Alice response and deterministic Bob.

    Alice entries in {-1, 0, +1} map to p(a=0|x) = (1 + a_x)/2; Bob entries
    are deterministic signs.
    """
    table = np.zeros((n, n, 2, 2))
    for x in range(n):
        p0 = (1.0 + strategy.a[x]) / 2.0
        pa = (p0, 1.0 - p0)
        for y in range(n):
            b = 0 if strategy.b[y] == 1 else 1
            for a in (0, 1):
                table[x, y, a, b] = pa[a]
    beh = gamecore.Behavior(n=n, table=table)
    beh.validate()
    return beh


@dataclass(frozen=True)
class GapReport:
    """Classical, PNC and quantum-optimal values of the n-input expression."""

    local: int
    pnc: int
    quantum_opt: float

    def __post_init__(self):
        if not self.pnc < self.quantum_opt:
            raise ValueError("PNC bound must lie strictly below the quantum optimum")


def quantum_gap_report(n: int) -> GapReport:
    """(local, pnc, 2n) with the orderings asserted.

    ``pnc < quantum`` holds for every n; ``pnc < local < quantum`` only for
    n = 3 (from n = 5 on, unconstrained classical strategies beat 2n).
    """
    _check_n(n)
    local, _ = local_bound(n)
    pnc, _ = pnc_bound(n)
    quantum = 2.0 * n
    report = GapReport(local=local, pnc=pnc, quantum_opt=quantum)
    if n == 3 and not (pnc < local < quantum):
        raise RuntimeError("expected strict ordering pnc < local < quantum at n = 3")
    return report

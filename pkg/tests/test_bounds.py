from itertools import product

import numpy as np
import pytest

from pogame import bounds, gamecore as gc


def brute_force_local(n):
    """Oracle: evaluate the expression on every deterministic pair directly."""
    coeff = gc.bell_expression(n).coefficients
    best = None
    for a in product((-1, 1), repeat=n):
        for b in product((-1, 1), repeat=n):
            value = sum(coeff[x, y] * a[x] * b[y] for x in range(n) for y in range(n))
            best = value if best is None else max(best, value)
    return best


def test_local_bound_n3():
    value, witness = bounds.local_bound(3)
    assert value == 5
    assert value == brute_force_local(3)
    assert witness.a == (-1, -1, 1)


def test_local_bound_n5_brute_force():
    value, _ = bounds.local_bound(5)
    assert value == brute_force_local(5)
    assert value == 15


@pytest.mark.parametrize("n", [3, 5, 7, 9, 11, 13])
def test_local_bound_matches_closed_form(n):
    value, _ = bounds.local_bound(n)
    assert value == bounds.local_bound_closed_form(n)


@pytest.mark.parametrize("n,expected", [(3, 4), (5, 8), (7, 12)])
def test_pnc_bound_values(n, expected):
    value, witness = bounds.pnc_bound(n)
    assert value == expected
    assert sum(witness.a) == 0
    assert witness.a.count(0) == 1


@pytest.mark.parametrize("n", [3, 5, 7])
def test_pnc_bound_matches_reduction(n):
    assert bounds.pnc_bound(n)[0] == bounds.pnc_bound_reduction(n)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_pnc_bound_symmetric_bob(n):
    # Constraining Bob to the same polytope does not change the bound.
    assert bounds.pnc_bound_symmetric(n) == 2 * n - 2


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_local_dominates_pnc(n):
    assert bounds.local_bound(n)[0] >= bounds.pnc_bound(n)[0]


@pytest.mark.parametrize("n", [3, 5, 7])
def test_witnesses_replay_exactly(n):
    expr = gc.bell_expression(n)
    local_value, local_w = bounds.local_bound(n)
    assert gc.bell_value(expr, bounds.strategy_behavior(local_w, n)) == local_value
    pnc_value, pnc_w = bounds.pnc_bound(n)
    assert gc.bell_value(expr, bounds.strategy_behavior(pnc_w, n)) == pnc_value


def test_witness_behaviors_are_valid():
    for n in (3, 5):
        _, w = bounds.pnc_bound(n)
        beh = bounds.strategy_behavior(w, n)
        beh.validate()
        assert beh.no_signaling_defect() <= 1e-15


def test_vertex_count():
    # n choices of the zero times balanced sign patterns on the rest.
    from math import comb

    for n in (3, 5, 7):
        count = sum(1 for _ in bounds._pnc_vertices(n))
        assert count == n * comb(n - 1, (n - 1) // 2)


def test_gap_report_orderings():
    rep3 = bounds.quantum_gap_report(3)
    assert (rep3.local, rep3.pnc, rep3.quantum_opt) == (5, 4, 6.0)
    rep5 = bounds.quantum_gap_report(5)
    assert rep5.pnc == 8 and rep5.quantum_opt == 10.0
    assert rep5.pnc < rep5.quantum_opt
    rep7 = bounds.quantum_gap_report(7)
    assert rep7.pnc == 12 and rep7.quantum_opt == 14.0


def test_range_validation():
    for bad in (2, 4, 15, 1):
        with pytest.raises(ValueError):
            bounds.local_bound(bad)
        with pytest.raises(ValueError):
            bounds.pnc_bound(bad)


def test_tie_breaking_is_lexicographic():
    # The first maximizer in (-1 < +1) product order must be returned.
    value, witness = bounds.local_bound(3)
    seen = []
    for a in product((-1, 1), repeat=3):
        b, v = bounds._best_bob(a)
        if int(round(v)) == value:
            seen.append(a)
    assert witness.a == seen[0]

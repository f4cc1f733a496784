"""Canonical qubit observable families for the n-setting oblivious game.

Every family consists of n traceless unit-Bloch observables for Alice that
sum to the zero operator, together with Bob's optimal counterparts
``B_y = -A_y^T``.  The transpose matters: for families with a sigma_y
component the plain negation does not reach the optimal correlations on the
maximally entangled state, while the transposed form always does (for real
families the two coincide).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qmat import EPS, I2, PAULIS, SIGMA_X, SIGMA_Y, SIGMA_Z, is_hermitian, operator_norm


def obs_from_bloch(vec) -> np.ndarray:
    """Observable ``n . sigma`` for a unit Bloch vector ``n``."""
    v = np.asarray(vec, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1.0) > EPS:
        raise ValueError(f"Bloch vector is not unit length: {v}")
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def bloch_of(m) -> np.ndarray:
    """Bloch components (x, y, z) of a 2x2 Hermitian matrix."""
    arr = np.asarray(m, dtype=complex)
    return np.array([np.trace(arr @ p).real / 2.0 for p in PAULIS])


def assert_observable(m, tol: float = EPS) -> None:
    """Check the dichotomic-observable contract: Hermitian and m^2 = I."""
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (2, 2):
        raise ValueError(f"expected a 2x2 observable, got shape {arr.shape}")
    if not is_hermitian(arr, tol):
        raise ValueError("observable is not Hermitian")
    if np.max(np.abs(arr @ arr - I2)) > tol:
        raise ValueError("observable does not square to the identity")


@dataclass(frozen=True, eq=False)
class ObservableFamily:
    """n dichotomic qubit observables per party with the sum-zero constraint.

    ``alice`` holds the generating observables; ``bob`` is fixed to the
    optimal ``-A^T`` counterparts.  ``params`` records the free parameters
    used by the generator.
    """

    n: int
    alice: tuple[np.ndarray, ...]
    bob: tuple[np.ndarray, ...]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n % 2 == 0 or self.n < 3:
            raise ValueError(f"n must be odd and >= 3, got {self.n}")
        if len(self.alice) != self.n or len(self.bob) != self.n:
            raise ValueError("family must carry exactly n observables per party")
        for m in self.alice + self.bob:
            assert_observable(m)


def _family(n: int, alice: list[np.ndarray], params: dict) -> ObservableFamily:
    bob = tuple(-a.T for a in alice)
    return ObservableFamily(n=n, alice=tuple(alice), bob=bob, params=params)


def trine() -> ObservableFamily:
    """Three coplanar observables at 120 degrees in the x-z Bloch plane."""
    a1 = SIGMA_Z.copy()
    a2 = (np.sqrt(3) / 2) * SIGMA_X - 0.5 * SIGMA_Z
    a3 = -(np.sqrt(3) / 2) * SIGMA_X - 0.5 * SIGMA_Z
    return _family(3, [a1, a2, a3], {})


def _default_split(n: int) -> float:
    # Even split of the transverse weight subject to nu^2 + beta^2 + 1/(n-1)^2 = 1.
    return np.sqrt((1.0 - 1.0 / (n - 1) ** 2) / 2.0)


def _check_normalization(n: int, nu: float, beta: float) -> None:
    if abs(nu**2 + beta**2 + 1.0 / (n - 1) ** 2 - 1.0) > EPS:
        raise ValueError(
            f"parameters violate nu^2 + beta^2 + 1/(n-1)^2 = 1: nu={nu}, beta={beta}, n={n}"
        )


def family_n(n: int, nu: float | None = None, beta: float | None = None) -> ObservableFamily:
    """Mirrored-pair family of n observables for any odd n >= 3.

    The first observable is sigma_z; the remaining n-1 split into two
    mirrored blocks ``+nu sx - beta sy - sz/(n-1)`` and
    ``-nu sx + beta sy - sz/(n-1)``, which cancel pairwise so the family
    sums to zero exactly.
    """
    if n % 2 == 0 or n < 3:
        raise ValueError(f"n must be odd and >= 3, got {n}")
    if nu is None and beta is None:
        nu = beta = _default_split(n)
    elif nu is None or beta is None:
        raise ValueError("provide both nu and beta, or neither")
    _check_normalization(n, nu, beta)

    z = -1.0 / (n - 1)
    alice = [SIGMA_Z.copy()]
    half = (n - 1) // 2
    for _ in range(half):
        alice.append(nu * SIGMA_X - beta * SIGMA_Y + z * SIGMA_Z)
    for _ in range(half):
        alice.append(-nu * SIGMA_X + beta * SIGMA_Y + z * SIGMA_Z)
    return _family(n, alice, {"nu": float(nu), "beta": float(beta)})


def _quartet(nu: float, beta: float, z: float) -> list[np.ndarray]:
    # Four observables whose x and y components cancel within the quartet.
    return [
        nu * SIGMA_X - beta * SIGMA_Y + z * SIGMA_Z,
        -nu * SIGMA_X - beta * SIGMA_Y + z * SIGMA_Z,
        nu * SIGMA_X + beta * SIGMA_Y + z * SIGMA_Z,
        -nu * SIGMA_X + beta * SIGMA_Y + z * SIGMA_Z,
    ]


def family_five(nu: float | None = None, beta: float | None = None) -> ObservableFamily:
    """Five-setting family with one out-of-plane quartet.

    This is the family whose quartet structure feeds the five-setting
    self-test: summing/differencing the quartet isolates pure sigma_x and
    sigma_y directions.
    """
    if nu is None and beta is None:
        nu = beta = _default_split(5)
    elif nu is None or beta is None:
        raise ValueError("provide both nu and beta, or neither")
    _check_normalization(5, nu, beta)
    alice = [SIGMA_Z.copy()] + _quartet(nu, beta, -0.25)
    return _family(5, alice, {"nu": float(nu), "beta": float(beta)})


def family_quartets(n: int, nu: float | None = None, beta: float | None = None) -> ObservableFamily:
    """Quartet family for odd n > 5.

    Settings 2..n are grouped into (+x,-y)/(-x,-y)/(+x,+y)/(-x,+y) quartets;
    when n = 3 (mod 4) one extra mirrored pair completes the set.  All x and
    y components cancel within each group, so the sum-zero constraint holds
    exactly for any parameters satisfying the per-observable normalization.
    """
    if n % 2 == 0 or n <= 5:
        raise ValueError(f"n must be odd and > 5, got {n}")
    if nu is None and beta is None:
        nu = beta = _default_split(n)
    elif nu is None or beta is None:
        raise ValueError("provide both nu and beta, or neither")
    _check_normalization(n, nu, beta)

    z = -1.0 / (n - 1)
    alice = [SIGMA_Z.copy()]
    remaining = n - 1
    while remaining >= 4:
        alice.extend(_quartet(nu, beta, z))
        remaining -= 4
    if remaining == 2:
        # n = 3 (mod 4): one extra pair with cancelling x and y components.
        alice.append(nu * SIGMA_X - beta * SIGMA_Y + z * SIGMA_Z)
        alice.append(-nu * SIGMA_X + beta * SIGMA_Y + z * SIGMA_Z)
    elif remaining != 0:
        raise RuntimeError(f"grouping failed for n={n}")
    return _family(n, alice, {"nu": float(nu), "beta": float(beta)})


def canonical_family(n: int) -> ObservableFamily:
    """Default family used by the pipeline: trine, five-setting, or quartets."""
    if n == 3:
        return trine()
    if n == 5:
        return family_five()
    return family_quartets(n)


def check_parity_condition(fam: ObservableFamily) -> float:
    """Largest violation of the operator constraints behind parity obliviousness.

    Returns ``max(||sum_x A_x||, ||(2/n) sum_x P^-_x - I||)`` in spectral
    norm, where ``P^-_x = (I - A_x)/2``.  Both vanish for a valid family.
    """
    total = sum(fam.alice)
    zero_norm = operator_norm(total)
    proj_sum = sum((I2 - a) / 2.0 for a in fam.alice)
    proj_norm = operator_norm((2.0 / fam.n) * proj_sum - I2)
    return max(zero_norm, proj_norm)

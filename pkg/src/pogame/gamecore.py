"""Game definition, Bell expression, behaviors and steering checks.

Conventions
-----------
Settings ``x, y`` run over 1..n in the external interfaces and 0..n-1 in
array indices.  Outcomes ``a, b`` in {0, 1} map to observable eigenvalues
``(-1)^a`` and ``(-1)^b``, which makes the correlator
``E_xy = sum_ab (-1)^(a+b) p(a,b|x,y)`` exact.

The prepared-ensemble labels used for the steering bookkeeping follow a
different, per-setting convention: the state labeled ``(x, a)`` is the one
steered by the projector with eigenvalue sign ``(-1)^(x+a)``, so the
even-parity ensemble always collects the +1 steerings.  Under this labeling
the operational parity condition is equivalent to ``sum_x A_x = 0``.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .observables import ObservableFamily, assert_observable
from .qmat import EPS, I2, as_state, operator_norm, partial_trace, phi_plus, proj, tensor


@dataclass(frozen=True)
class GameSpec:
    """n-input game with uniform inputs and winning rule b = [x == y] xor a."""

    n: int

    def __post_init__(self):
        if self.n % 2 == 0 or self.n < 3:
            raise ValueError(f"n must be odd and >= 3, got {self.n}")

    @property
    def input_probability(self) -> float:
        return 1.0 / self.n

    def winning_output(self, x: int, y: int, a: int) -> int:
        """Bob's required output for inputs (x, y) and Alice outcome a."""
        return (1 if x == y else 0) ^ (a & 1)


@dataclass(frozen=True, eq=False)
class BellExpression:
    """Coefficient tensor with -1 on the diagonal and +1 off it."""

    n: int
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients)
        if c.shape != (self.n, self.n):
            raise ValueError("coefficient tensor must be n x n")
        if not np.all(np.abs(c) == 1):
            raise ValueError("coefficients must be +1 or -1")
        diag = np.diag(c)
        if not (np.all(diag == -1) and np.sum(c == -1) == self.n):
            raise ValueError("exactly the n diagonal entries must be -1")


def bell_expression(n: int) -> BellExpression:
    if n % 2 == 0 or n < 3:
        raise ValueError(f"n must be odd and >= 3, got {n}")
    coeff = np.ones((n, n), dtype=int)
    np.fill_diagonal(coeff, -1)
    return BellExpression(n=n, coefficients=coeff)


@dataclass(frozen=True, eq=False)
class Behavior:
    """Joint probability table p(a, b | x, y), stored as table[x, y, a, b]."""

    n: int
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table)
        if t.shape != (self.n, self.n, 2, 2):
            raise ValueError(f"table must have shape (n, n, 2, 2), got {t.shape}")

    def validate(self, tol: float = EPS) -> None:
        t = self.table
        if np.min(t) < -tol or np.max(t) > 1 + tol:
            raise ValueError("probabilities must lie in [0, 1]")
        sums = t.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > tol:
            raise ValueError("each setting pair must be normalized")
        if self.no_signaling_defect() > tol:
            raise ValueError("behavior is signaling")

    def correlator(self, x: int, y: int) -> float:
        """Signed correlator sum_ab (-1)^(a+b) p(a,b|x,y) (0-based x, y)."""
        block = self.table[x, y]
        return float(block[0, 0] - block[0, 1] - block[1, 0] + block[1, 1])

    def marginal_alice(self, x: int) -> np.ndarray:
        """p(a|x) from the y = 0 block (no-signaling makes y irrelevant)."""
        return self.table[x, 0].sum(axis=1)

    def marginal_bob(self, y: int) -> np.ndarray:
        return self.table[0, y].sum(axis=0)

    def no_signaling_defect(self) -> float:
        """Largest variation of either party's marginal across the other's input."""
        t = self.table
        alice = t.sum(axis=3)  # p(a|x, y)
        bob = t.sum(axis=2)  # p(b|x, y)
        d_alice = np.max(np.abs(alice - alice[:, :1, :]))
        d_bob = np.max(np.abs(bob - bob[:1, :, :]))
        return float(max(d_alice, d_bob))


def uniform_behavior(n: int) -> Behavior:
    """Fully random box: p(a,b|x,y) = 1/4 everywhere."""
    return Behavior(n=n, table=np.full((n, n, 2, 2), 0.25))


@dataclass(frozen=True, eq=False)
class QuantumSetup:
    """Shared two-qubit pure state plus n dichotomic observables per party."""

    state: np.ndarray
    alice: tuple[np.ndarray, ...]
    bob: tuple[np.ndarray, ...]

    def __post_init__(self):
        as_state(self.state)
        if len(self.state) != 4:
            raise ValueError("state must be a two-qubit vector of dimension 4")
        if len(self.alice) != len(self.bob):
            raise ValueError("alice and bob must hold the same number of observables")
        for m in self.alice + self.bob:
            assert_observable(m)

    @property
    def n(self) -> int:
        return len(self.alice)


def setup_from_family(fam: ObservableFamily) -> QuantumSetup:
    """Canonical optimal setup: family observables on the maximally entangled state."""
    return QuantumSetup(state=phi_plus(), alice=fam.alice, bob=fam.bob)


def _outcome_projector(observable: np.ndarray, outcome: int) -> np.ndarray:
    return (I2 + (-1) ** outcome * observable) / 2.0


def behavior_from_setup(setup: QuantumSetup) -> Behavior:
    """Born-rule behavior p(a,b|x,y) = <psi| P_a^x (x) P_b^y |psi>."""
    n = setup.n
    rho = proj(setup.state)
    table = np.empty((n, n, 2, 2))
    for x, ax in enumerate(setup.alice):
        for a in (0, 1):
            pa = _outcome_projector(ax, a)
            for y, by in enumerate(setup.bob):
                for b in (0, 1):
                    pb = _outcome_projector(by, b)
                    table[x, y, a, b] = np.trace(tensor(pa, pb) @ rho).real
    beh = Behavior(n=n, table=table)
    beh.validate()
    return beh


def bell_value(expr: BellExpression, beh: Behavior) -> float:
    """sum_xy alpha_xy E_xy for matching sizes."""
    if expr.n != beh.n:
        raise ValueError(f"size mismatch: expression n={expr.n}, behavior n={beh.n}")
    total = 0.0
    for x in range(expr.n):
        for y in range(expr.n):
            total += expr.coefficients[x, y] * beh.correlator(x, y)
    return float(total)


def success_probability(expr: BellExpression, beh: Behavior) -> float:
    """Game success probability 1/2 + <B>/(2 n^2)."""
    n = expr.n
    return 0.5 + bell_value(expr, beh) / (2.0 * n * n)


def success_probability_direct(spec: GameSpec, beh: Behavior) -> float:
    """Predicate-averaged success probability, independent of the Bell route.

    Averages p(b = [x==y] xor a | x, y) over uniform inputs by direct
    enumeration of the table; used as the oracle for ``success_probability``.
    """
    if spec.n != beh.n:
        raise ValueError("size mismatch between game and behavior")
    n = spec.n
    total = 0.0
    for x in range(n):
        for y in range(n):
            for a in (0, 1):
                b = spec.winning_output(x + 1, y + 1, a)
                total += beh.table[x, y, a, b]
    return total / (n * n)


def success_probability_at(n: int, value: float) -> float:
    """Success probability implied by a Bell value for the n-input game."""
    return 0.5 + value / (2.0 * n * n)


@dataclass(frozen=True, eq=False)
class SteeredState:
    """Conditional state of Bob for one prepared-ensemble label (x, a)."""

    x: int  # 1-based setting
    a: int  # ensemble label in {0, 1}
    parity: int  # (x + a) mod 2; 0 is the even-parity ensemble
    rho: np.ndarray
    probability: float
    degenerate: bool = False


def steer(rho_ab: np.ndarray, alice: tuple[np.ndarray, ...], tol: float = EPS) -> list[SteeredState]:
    """Steered states of Bob for a shared density matrix.

    The label (x, a) maps to the projector with eigenvalue sign
    ``(-1)^(x+a)`` (see module docstring).  Zero-probability branches
    return the maximally mixed state flagged as degenerate instead of
    failing.
    """
    out = []
    for x0, ax in enumerate(alice):
        x = x0 + 1
        for a in (0, 1):
            sign = (-1) ** (x + a)
            p_op = (I2 + sign * ax) / 2.0
            big = tensor(p_op, I2)
            unnorm = big @ rho_ab @ big
            p = np.trace(unnorm).real
            if p < tol:
                out.append(SteeredState(x, a, (x + a) % 2, I2 / 2.0, 0.0, degenerate=True))
                continue
            reduced = partial_trace(unnorm, keep=1, dims=[2, 2]) / p
            out.append(SteeredState(x, a, (x + a) % 2, reduced, float(p)))
    return out


def steered_states(setup: QuantumSetup) -> list[SteeredState]:
    """Steered states for a pure-state setup (2n entries, one per label)."""
    return steer(proj(setup.state), setup.alice)


def check_operational_parity(states: list[SteeredState]) -> float:
    """Spectral norm of (sum of even-parity states) - (sum of odd-parity states)."""
    dim = states[0].rho.shape[0]
    diff = np.zeros((dim, dim), dtype=complex)
    for s in states:
        diff += s.rho if s.parity == 0 else -s.rho
    return operator_norm(diff)


# ---------------------------------------------------------------------------
# Behavior serialization (CSV with header x,y,a,b,p and JSON keyed "x,y").
# Floats are written with 17 significant digits so round-trips are bit-exact.
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def behavior_to_csv(beh: Behavior) -> str:
    buf = io.StringIO()
    buf.write("x,y,a,b,p\n")
    for x in range(beh.n):
        for y in range(beh.n):
            for a in (0, 1):
                for b in (0, 1):
                    buf.write(f"{x + 1},{y + 1},{a},{b},{_fmt(beh.table[x, y, a, b])}\n")
    return buf.getvalue()


def behavior_from_csv(text: str) -> Behavior:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if lines[0].strip() != "x,y,a,b,p":
        raise ValueError("CSV header must be 'x,y,a,b,p'")
    rows = []
    for ln in lines[1:]:
        x, y, a, b, p = ln.split(",")
        rows.append((int(x), int(y), int(a), int(b), float(p)))
    n = max(r[0] for r in rows)
    if len(rows) != 4 * n * n:
        raise ValueError(f"expected {4 * n * n} rows for n={n}, got {len(rows)}")
    table = np.empty((n, n, 2, 2))
    for x, y, a, b, p in rows:
        table[x - 1, y - 1, a, b] = p
    beh = Behavior(n=n, table=table)
    beh.validate()
    return beh


def behavior_to_json(beh: Behavior) -> str:
    blocks = []
    for x in range(beh.n):
        for y in range(beh.n):
            block = beh.table[x, y]
            rendered = ", ".join(
                "[" + ", ".join(_fmt(block[a, b]) for b in (0, 1)) + "]" for a in (0, 1)
            )
            blocks.append(f'"{x + 1},{y + 1}": [{rendered}]')
    return '{"n": %d, "table": {%s}}' % (beh.n, ", ".join(blocks))


def behavior_from_json(text: str) -> Behavior:
    obj = json.loads(text)
    n = int(obj["n"])
    table = np.empty((n, n, 2, 2))
    for key, block in obj["table"].items():
        x, y = (int(t) for t in key.split(","))
        table[x - 1, y - 1] = np.asarray(block, dtype=float)
    beh = Behavior(n=n, table=table)
    beh.validate()
    return beh

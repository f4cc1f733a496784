"""SWAP-circuit simulation and self-testing relation checks.

Register layout is ``(A, B, A', B')`` for the three-setting circuit and
``(A, B, A', B', A'', B'')`` for the five-setting one; physical registers
come first so the initial vector is just ``psi (x) |0...0>``.  Controlled
gates act when the control ancilla is in |1>, which reproduces the
``(1 +/- Z)`` branch pattern after the Hadamard sandwich.

The second swap stage controls the single unitary ``i Y X`` (phase
included): with the product operator the cross branches cancel against the
optimum relations, which plain controlled-Y gates do not achieve.  The
sigma_y direction is only ever extracted up to the sigma_z dressing of the
junk state, reflecting the complex-conjugation equivalence of the
correlations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gamecore import QuantumSetup
from .qmat import EPS, I2, SIGMA_X, SIGMA_Y, SIGMA_Z, operator_norm, phi_plus, tensor

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _embed(op: np.ndarray, reg: int, nregs: int) -> np.ndarray:
    factors = [I2] * nregs
    factors[reg] = op
    return tensor(*factors)


def _controlled(control: int, target: int, u: np.ndarray, nregs: int) -> np.ndarray:
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    return _embed(p0, control, nregs) + _embed(p1, control, nregs) @ _embed(u, target, nregs)


def _permute_registers(vec: np.ndarray, perm: tuple[int, ...]) -> np.ndarray:
    """Reorder qubit registers: position i of the output takes source perm[i]."""
    nregs = len(perm)
    return np.transpose(vec.reshape((2,) * nregs), perm).reshape(-1)


@dataclass(frozen=True, eq=False)
class SelfTestOperators:
    """Normalized swap operators built from a setup's observables."""

    n: int
    alice: tuple[np.ndarray, ...]
    bob: tuple[np.ndarray, ...]
    z_a: np.ndarray
    x_a: np.ndarray
    z_b: np.ndarray
    x_b: np.ndarray
    y_a: np.ndarray | None = None
    y_b: np.ndarray | None = None
    norms: dict | None = None


def _state_norm(op: np.ndarray, state: np.ndarray, side: str) -> float:
    big = tensor(op, I2) if side == "a" else tensor(I2, op)
    return float(np.linalg.norm(big @ state))


def _quartet_combo(items, signs) -> np.ndarray:
    out = np.zeros((2, 2), dtype=complex)
    for m, s in zip(items, signs):
        out = out + s * m
    return out


def build_selftest_operators(setup: QuantumSetup, tol: float = EPS) -> SelfTestOperators:
    """Swap operators (Z, X-tilde and, from five settings on, Y-tilde).

    Normalization divisors are the state norms ``||X psi||`` so the
    construction only uses quantities available from the correlations.  For
    more than five settings the x/y directions are isolated by signed sums
    over the quartets; a trailing mirrored pair (n = 3 mod 4) carries mixed
    transverse components and is left out of the combinations.
    """
    n = setup.n
    psi = setup.state
    alice, bob = setup.alice, setup.bob

    def normalized(op: np.ndarray, side: str) -> tuple[np.ndarray, float]:
        norm = _state_norm(op, psi, side)
        if norm < tol:
            raise ValueError("swap operator has vanishing norm on the state")
        normed = op / norm
        if operator_norm(normed @ normed - I2) > 1e-6:
            raise ValueError("normalized swap operator does not square to the identity")
        return normed, norm

    z_a = alice[0]
    z_b = -bob[0]
    norms: dict[str, float] = {}

    if n == 3:
        x_a, norms["x_a"] = normalized(alice[2] - alice[1], "a")
        x_b, norms["x_b"] = normalized(bob[1] - bob[2], "b")
        return SelfTestOperators(n, alice, bob, z_a, x_a, z_b, x_b, norms=norms)

    if n < 5 or (n - 1) % 4 not in (0, 2):
        raise ValueError(f"self-test operators are defined for n = 3 or odd n >= 5, got {n}")

    x_a_raw = np.zeros((2, 2), dtype=complex)
    y_a_raw = np.zeros((2, 2), dtype=complex)
    x_b_raw = np.zeros((2, 2), dtype=complex)
    y_b_raw = np.zeros((2, 2), dtype=complex)
    pos = 1
    while pos + 4 <= n:
        quartet_a = alice[pos : pos + 4]
        quartet_b = bob[pos : pos + 4]
        x_a_raw += _quartet_combo(quartet_a, (1, -1, 1, -1))
        y_a_raw += _quartet_combo(quartet_a, (-1, -1, 1, 1))
        x_b_raw += _quartet_combo(quartet_b, (-1, 1, -1, 1))
        y_b_raw += _quartet_combo(quartet_b, (-1, -1, 1, 1))
        pos += 4
    # Any trailing mirrored pair is skipped: its x and y parts do not separate.

    x_a, norms["x_a"] = normalized(x_a_raw, "a")
    y_a, norms["y_a"] = normalized(y_a_raw, "a")
    x_b, norms["x_b"] = normalized(x_b_raw, "b")
    y_b, norms["y_b"] = normalized(y_b_raw, "b")
    return SelfTestOperators(n, alice, bob, z_a, x_a, z_b, x_b, y_a=y_a, y_b=y_b, norms=norms)


def _on_a(op: np.ndarray) -> np.ndarray:
    return tensor(op, I2)


def _on_b(op: np.ndarray) -> np.ndarray:
    return tensor(I2, op)


def verify_relations(ops: SelfTestOperators, state) -> dict[str, float]:
    """Residual norms of the optimum relations, all zero at the exact optimum."""
    psi = np.asarray(state, dtype=complex).reshape(-1)
    res: dict[str, float] = {}

    def rec(name: str, vec: np.ndarray) -> None:
        res[name] = float(np.linalg.norm(vec))

    for x in range(ops.n):
        rec(
            f"diag_anticorrelation_{x + 1}",
            (tensor(ops.alice[x], ops.bob[x]) @ psi) + psi,
        )

    rec("z_equal", (_on_a(ops.z_a) - _on_b(ops.z_b)) @ psi)
    rec("x_equal", (_on_a(ops.x_a) - _on_b(ops.x_b)) @ psi)
    rec("zx_anticommute_a", _on_a(ops.z_a @ ops.x_a + ops.x_a @ ops.z_a) @ psi)
    rec("zx_anticommute_b", _on_b(ops.z_b @ ops.x_b + ops.x_b @ ops.z_b) @ psi)

    if ops.n == 3:
        # Pairwise sum relations implied by the vanishing observable sums.
        pairs = [
            ("a1_b2_b3", ops.alice[0], ops.bob[1], ops.bob[2]),
            ("a2_b1_b3", ops.alice[1], ops.bob[0], ops.bob[2]),
            ("a3_b1_b2", ops.alice[2], ops.bob[0], ops.bob[1]),
        ]
        for name, a, b1, b2 in pairs:
            rec(f"pair_{name}", (tensor(a, b1) + tensor(a, b2)) @ psi - psi)
        pairs_b = [
            ("a2_a3_b1", ops.alice[1], ops.alice[2], ops.bob[0]),
            ("a1_a3_b2", ops.alice[0], ops.alice[2], ops.bob[1]),
            ("a2_a1_b3", ops.alice[1], ops.alice[0], ops.bob[2]),
        ]
        for name, a1, a2, b in pairs_b:
            rec(f"pair_{name}", (tensor(a1, b) + tensor(a2, b)) @ psi - psi)
        return res

    assert ops.y_a is not None and ops.y_b is not None
    rec("y_opposite", (_on_a(ops.y_a) + _on_b(ops.y_b)) @ psi)
    rec("yx_anticommute_a", _on_a(ops.y_a @ ops.x_a + ops.x_a @ ops.y_a) @ psi)
    rec("yx_anticommute_b", _on_b(ops.y_b @ ops.x_b + ops.x_b @ ops.y_b) @ psi)
    rec("zy_anticommute_a", _on_a(ops.z_a @ ops.y_a + ops.y_a @ ops.z_a) @ psi)
    rec("zy_anticommute_b", _on_b(ops.z_b @ ops.y_b + ops.y_b @ ops.z_b) @ psi)
    rec("yx_product_equal", (_on_a(ops.y_a @ ops.x_a) - _on_b(ops.y_b @ ops.x_b)) @ psi)
    rec(
        "yx_yx_minus_one",
        (tensor(ops.y_a @ ops.x_a, ops.y_b @ ops.x_b) @ psi) + psi,
    )
    return res


@dataclass(frozen=True, eq=False)
class SwapCircuit:
    """Gate list over the qubit registers; gates apply left to right."""

    n: int
    nregs: int
    gates: tuple[tuple[str, np.ndarray], ...]

    def unitary(self) -> np.ndarray:
        dim = 2**self.nregs
        u = np.eye(dim, dtype=complex)
        for _, gate in self.gates:
            u = gate @ u
        return u


def build_circuit(ops: SelfTestOperators) -> SwapCircuit:
    """Assemble the swap circuit for n = 3 (one stage) or n = 5 (two stages)."""
    if ops.n == 3:
        nregs = 4
        regs_anc = (2, 3)
    elif ops.n == 5:
        nregs = 6
        regs_anc = (2, 3)
    else:
        raise ValueError(f"isometry circuits are implemented for n = 3 and n = 5, got {ops.n}")

    gates: list[tuple[str, np.ndarray]] = []

    def h(reg: int, tag: str) -> None:
        gates.append((f"H_{tag}", _embed(_HADAMARD, reg, nregs)))

    def c(control: int, target: int, u: np.ndarray, tag: str) -> None:
        gates.append((tag, _controlled(control, target, u, nregs)))

    ap, bp = regs_anc
    h(ap, "A'")
    h(bp, "B'")
    c(ap, 0, ops.z_a, "CZ_A")
    c(bp, 1, ops.z_b, "CZ_B")
    h(ap, "A'")
    h(bp, "B'")
    c(ap, 0, ops.x_a, "CX_A")
    c(bp, 1, ops.x_b, "CX_B")

    if ops.n == 5:
        app, bpp = 4, 5
        ya_xa = 1j * ops.y_a @ ops.x_a
        yb_xb = 1j * ops.y_b @ ops.x_b
        h(app, "A''")
        h(bpp, "B''")
        c(app, 0, ya_xa, "CYX_A")
        c(bpp, 1, yb_xb, "CYX_B")
        h(app, "A''")
        h(bpp, "B''")

    return SwapCircuit(n=ops.n, nregs=nregs, gates=tuple(gates))


@dataclass(frozen=True, eq=False)
class IsometryResult:
    target: str
    output: np.ndarray
    expected: np.ndarray
    fidelity: float
    junk: np.ndarray | None
    extracted: np.ndarray | None
    junk_fidelity: float
    extracted_fidelity: float
    factorized: bool
    max_entry_error: float


def _schmidt_split(vec: np.ndarray, nregs: int, keep: tuple[int, ...], tol: float):
    """Rank-1 factorization across the (keep | rest) bipartition, if it exists."""
    rest = tuple(i for i in range(nregs) if i not in keep)
    mat = np.transpose(vec.reshape((2,) * nregs), rest + keep).reshape(
        2 ** len(rest), 2 ** len(keep)
    )
    u, s, vh = np.linalg.svd(mat)
    factorized = bool(s[0] > 0 and (len(s) == 1 or s[1] < tol))
    junk = u[:, 0] * s[0]
    extracted = vh[0]
    return factorized, junk, extracted


def _fidelity(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.vdot(a, b)) ** 2 / (na**2 * nb**2))


def _frame_coefficients(op: np.ndarray, z: np.ndarray, x: np.ndarray, tol: float) -> tuple[float, float]:
    """Coefficients of ``op`` in the (z, x) swap frame, with a span check."""
    cz = float(np.trace(op @ z).real / 2.0)
    cx = float(np.trace(op @ x).real / 2.0)
    if operator_norm(op - cz * z - cx * x) > max(tol, 1e-8):
        raise ValueError("observable does not lie in the span of the swap frame")
    return cz, cx


def _chi_vector(ops: SelfTestOperators, psi: np.ndarray) -> np.ndarray:
    return (np.eye(4) + _on_a(ops.z_a)) @ psi / np.sqrt(2)


def _xi_vector(ops: SelfTestOperators, psi: np.ndarray) -> np.ndarray:
    """Junk for the two-stage circuit, on registers (A, B, A'', B'')."""
    chi = _chi_vector(ops, psi)
    m = _on_a(1j * ops.y_a @ ops.x_a)
    plus = (np.eye(4) + m) @ chi
    minus = (np.eye(4) - m) @ chi
    e00 = np.zeros(4)
    e00[0] = 1.0
    e11 = np.zeros(4)
    e11[3] = 1.0
    return 0.5 * (np.kron(plus, e00) + np.kron(minus, e11))


def _parse_target(target: str, n: int) -> tuple[str, tuple]:
    if target == "state":
        return "state", ()
    named = {"ZA", "XA", "YA", "ZB", "XB", "YB"}
    if target in named:
        return "named", (target,)
    if target.startswith("A") and "B" in target[1:]:
        xs, ys = target[1:].split("B")
        x, y = int(xs), int(ys)
        if not (1 <= x <= n and 1 <= y <= n):
            raise ValueError(f"target indices out of range: {target}")
        return "ab", (x - 1, y - 1)
    if target.startswith("A"):
        x = int(target[1:])
        if not 1 <= x <= n:
            raise ValueError(f"target index out of range: {target}")
        return "a", (x - 1,)
    if target.startswith("B"):
        y = int(target[1:])
        if not 1 <= y <= n:
            raise ValueError(f"target index out of range: {target}")
        return "b", (y - 1,)
    raise ValueError(f"unrecognized isometry target: {target}")


def run_isometry(setup: QuantumSetup, target: str = "state", tol: float = EPS) -> IsometryResult:
    """Apply the swap circuit and compare with the predicted factorized output.

    ``target`` selects the operator applied to the physical state before the
    circuit: "state" (none), "A<x>", "B<y>", "A<x>B<y>" (three-setting
    circuit) or one of "ZA", "XA", "YA", "ZB", "XB", "YB".  The expected
    vector is the junk factor times the corresponding reference action on
    the ancilla pair; fidelities are phase-invariant.
    """
    ops = build_selftest_operators(setup)
    circuit = build_circuit(ops)
    n, nregs = setup.n, circuit.nregs
    psi = setup.state
    phi = phi_plus()

    kind, args = _parse_target(target, n)

    # Physical operator applied before the circuit, and expected ancilla action.
    named_ops = {
        "ZA": (_on_a(ops.z_a), np.kron(SIGMA_Z, I2) @ phi, False),
        "ZB": (_on_b(ops.z_b), np.kron(I2, SIGMA_Z) @ phi, False),
        "XA": (_on_a(ops.x_a), np.kron(SIGMA_X, I2) @ phi, False),
        "XB": (_on_b(ops.x_b), np.kron(I2, SIGMA_X) @ phi, False),
        "YA": (_on_a(ops.y_a) if ops.y_a is not None else None, np.kron(SIGMA_Y, I2) @ phi, True),
        "YB": (_on_b(ops.y_b) if ops.y_b is not None else None, np.kron(I2, SIGMA_Y) @ phi, True),
    }

    dressed = False
    if kind == "state":
        pre = np.eye(4, dtype=complex)
        anc_expected = phi
    elif kind == "named":
        (name,) = args
        pre, anc_expected, dressed = named_ops[name]
        if pre is None:
            raise ValueError(f"target {name} requires the five-setting operators")
    else:
        if n != 3:
            raise ValueError("raw observable targets are supported by the three-setting circuit")
        za, xa = ops.z_a, ops.x_a
        zb, xb = ops.z_b, ops.x_b
        if kind == "a":
            (x,) = args
            cz, cx = _frame_coefficients(setup.alice[x], za, xa, tol)
            pre = _on_a(setup.alice[x])
            anc_expected = np.kron(cz * SIGMA_Z + cx * SIGMA_X, I2) @ phi
        elif kind == "b":
            (y,) = args
            dz, dx = _frame_coefficients(setup.bob[y], zb, xb, tol)
            pre = _on_b(setup.bob[y])
            anc_expected = np.kron(I2, dz * SIGMA_Z + dx * SIGMA_X) @ phi
        else:
            x, y = args
            cz, cx = _frame_coefficients(setup.alice[x], za, xa, tol)
            dz, dx = _frame_coefficients(setup.bob[y], zb, xb, tol)
            pre = tensor(setup.alice[x], setup.bob[y])
            anc_expected = np.kron(cz * SIGMA_Z + cx * SIGMA_X, dz * SIGMA_Z + dx * SIGMA_X) @ phi

    anc_zero = np.zeros(2 ** (nregs - 2))
    anc_zero[0] = 1.0
    vec_in = np.kron(pre @ psi, anc_zero)
    output = circuit.unitary() @ vec_in

    # Expected output: junk factor on the non-extracted registers.
    if n == 3:
        junk_expected = _chi_vector(ops, psi)
        expected = np.kron(junk_expected, anc_expected)
        keep = (2, 3)
    else:
        xi = _xi_vector(ops, psi)
        if dressed:
            xi = _embed(SIGMA_Z, 2, 4) @ xi  # sigma_z on A'' within (A, B, A'', B'')
        junk_expected = xi
        # Assemble on (A, B, A'', B'', A', B') then reorder to (A, B, A', B', A'', B'').
        expected = _permute_registers(np.kron(xi, anc_expected), (0, 1, 4, 5, 2, 3))
        keep = (2, 3)

    exp_norm = np.linalg.norm(expected)
    if exp_norm > 0:
        expected_unit = expected / exp_norm
    else:
        expected_unit = expected
    fid = _fidelity(output, expected)

    overlap = np.vdot(expected_unit, output)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    max_entry_error = float(np.max(np.abs(output - phase * expected_unit)))

    factorized, junk, extracted = _schmidt_split(output, nregs, keep, max(tol, 1e-8))
    junk_fid = _fidelity(junk, junk_expected) if factorized else 0.0
    extracted_fid = _fidelity(extracted, anc_expected) if factorized else 0.0

    return IsometryResult(
        target=target,
        output=output,
        expected=expected_unit,
        fidelity=fid,
        junk=junk if factorized else None,
        extracted=extracted if factorized else None,
        junk_fidelity=junk_fid,
        extracted_fidelity=extracted_fid,
        factorized=factorized,
        max_entry_error=max_entry_error,
    )


def perturbed_state(delta: float) -> np.ndarray:
    """Maximally entangled state mixed with |00> by amplitude ``delta``, renormalized."""
    vec = phi_plus() + delta * np.array([1, 0, 0, 0], dtype=complex)
    return vec / np.linalg.norm(vec)

"""Dense complex linear algebra for small multi-qubit registers.

Operators are complex128 ndarrays in row-major order; pure states are 1-D
complex128 ndarrays.  Everything here targets dimensions up to 64 (two
physical qubits plus up to four ancillas), so dense storage and LAPACK
routines are used throughout.  All functions are pure and never mutate
their arguments.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

#: Default absolute tolerance for Hermiticity / unitarity / normalization checks.
EPS = 1e-9

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _all_finite(arr: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag)))


def as_operator(m) -> np.ndarray:
    """Coerce to a finite 2-D complex matrix."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not _all_finite(arr):
        raise ValueError("matrix contains non-finite entries")
    return arr


def as_state(v, tol: float = EPS) -> np.ndarray:
    """Coerce to a normalized 1-D complex state vector."""
    arr = np.asarray(v, dtype=complex).reshape(-1)
    if not _all_finite(arr):
        raise ValueError("state contains non-finite entries")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state is not normalized: |v| = {norm}")
    return arr


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def is_hermitian(m, tol: float = EPS) -> bool:
    arr = np.asarray(m, dtype=complex)
    return arr.shape[0] == arr.shape[1] and np.max(np.abs(arr - dagger(arr))) <= tol


def is_unitary(m, tol: float = EPS) -> bool:
    arr = np.asarray(m, dtype=complex)
    if arr.shape[0] != arr.shape[1]:
        return False
    return np.max(np.abs(dagger(arr) @ arr - np.eye(arr.shape[0]))) <= tol


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors)."""
    if not ops:
        raise ValueError("tensor() needs at least one factor")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def proj(v) -> np.ndarray:
    """Rank-1 projector |v><v| of a (not necessarily normalized) vector."""
    arr = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(arr, arr.conj())


def phi_plus() -> np.ndarray:
    """Two-qubit maximally entangled state (|00> + |11>)/sqrt(2)."""
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def partial_trace(rho, keep, dims: Sequence[int]) -> np.ndarray:
    """Trace out all subsystems except the ones in ``keep``.

    Parameters
    ----------
    rho : array_like
        Square matrix on the full tensor-product space.
    keep : int or sequence of int
        Indices (into ``dims``) of the subsystems to keep, in order.
    dims : sequence of int
        Dimension of each tensor factor; their product must match ``rho``.

    Returns
    -------
    np.ndarray
        Reduced matrix on the kept subsystems; its trace equals ``tr(rho)``.
    """
    rho = as_operator(rho)
    dims = [int(d) for d in dims]
    if rho.shape[0] != rho.shape[1]:
        raise ValueError("partial_trace expects a square matrix")
    total = int(np.prod(dims))
    if rho.shape[0] != total:
        raise ValueError(f"dims {dims} inconsistent with matrix of size {rho.shape[0]}")
    keep_idx = [int(keep)] if np.isscalar(keep) else [int(k) for k in keep]
    if any(k < 0 or k >= len(dims) for k in keep_idx):
        raise ValueError(f"keep indices {keep_idx} out of range for {len(dims)} subsystems")

    nsys = len(dims)
    reshaped = rho.reshape(dims + dims)
    # Row index of factor k is axis k, column index is axis nsys + k.
    keep_dim = int(np.prod([dims[k] for k in keep_idx]))
    row_axes = [i for i in range(nsys)]
    col_axes = [nsys + i if i in keep_idx else i for i in range(nsys)]
    reduced = np.einsum(reshaped, row_axes + col_axes)
    return reduced.reshape(keep_dim, keep_dim)


def eig_hermitian(m, tol: float = EPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, V)`` with eigenvalues ``w`` ascending and eigenvectors as
    the columns of ``V``, so that ``m = V @ diag(w) @ V.conj().T``.  Raises
    ``ValueError`` when ``m`` is not Hermitian within ``tol``.
    """
    arr = as_operator(m)
    if not is_hermitian(arr, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(arr)
    return w, v


def operator_norm(m) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m, dtype=complex)))

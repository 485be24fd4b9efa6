"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Tensor
products follow the lexicographic convention of :func:`numpy.kron`: the
left factor is the most significant index, so the basis vector
``e_i (x) e_j`` of ``C^m (x) C^n`` sits at position ``i * n + j``.
All indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np


class DimensionError(ValueError):
    """Raised when matrix shapes do not fit the requested operation."""


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class ToleranceConfig:
    """Floating point tolerances.

    ``atol`` bounds entrywise/Frobenius residuals, ``rank_rtol`` is the
    eigenvalue threshold (relative to the largest eigenvalue) below which an
    eigenvalue counts as zero when computing numerical rank.
    """

    atol: float = 1e-9
    rank_rtol: float = 1e-10

    def __post_init__(self):
        if not (self.atol > 0 and self.rank_rtol > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite 2-d complex matrix and return a read-only copy."""
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def kron(*factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        out = np.kron(out, np.asarray(f, dtype=np.complex128))
    return out


def dagger(a) -> np.ndarray:
    return np.asarray(a).conj().T


def trace(a) -> complex:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"trace needs a square matrix, got shape {a.shape}")
    return complex(np.trace(a))


def frobenius_distance(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def basis_matrix(i: int, j: int, m: int) -> np.ndarray:
    """The ``m x m`` matrix unit with a single 1 at ``(i, j)``."""
    if not (0 <= i < m and 0 <= j < m):
        raise DimensionError(f"index ({i}, {j}) out of range for size {m}")
    e = np.zeros((m, m), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def partial_trace(x, n: int, a: int, factor: Literal["first", "second"] = "second") -> np.ndarray:
    """Trace out one factor of a square matrix on ``C^n (x) C^a``.

    ``factor="second"`` removes the ``a``-dimensional factor and returns an
    ``n x n`` matrix; ``factor="first"`` removes the ``n``-dimensional one
    and returns ``a x a``.
    """
    x = np.asarray(x)
    if x.shape != (n * a, n * a):
        raise DimensionError(f"expected a {n * a}x{n * a} matrix, got {x.shape}")
    t = x.reshape(n, a, n, a)
    if factor == "second":
        return np.einsum("ikjk->ij", t)
    if factor == "first":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"factor must be 'first' or 'second', not {factor!r}")


def is_hermitian(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.linalg.norm(a - dagger(a)) <= tol.atol


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: ``n - 1`` rounds (``n`` padded to even) of disjoint pairs
    that together visit every index pair exactly once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if max(p, q) < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _rotate_rows(m, p, q, c, s, x, y):
    """Rows ``p, q`` become ``c m_p + x m_q`` and ``s m_p + y m_q``."""
    mp = m[p, :]
    mq = m[q, :]
    m[p, :] = c[:, None] * mp + x[:, None] * mq
    m[q, :] = s[:, None] * mp + y[:, None] * mq


def _jacobi_sweeps(a: np.ndarray, max_sweeps: int = 60):
    """Cyclic Jacobi with parallel ordering.

    Each round annihilates the ``(p, q)`` entries of ``n / 2`` disjoint index
    pairs at once; rotations on disjoint pairs commute, so they are applied
    together as vectorized row and column updates.
    """
    n = a.shape[0]
    uh = np.eye(n, dtype=np.complex128)  # conjugate transpose of the eigenvector matrix
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return a, uh
    eps = np.finfo(float).eps
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= eps * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > eps * eps * scale
            if not active.any():
                continue
            p, q, apq, mag = p[active], q[active], apq[active], mag[active]
            phase = apq / mag
            tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.hypot(1.0, t)
            s = t * c
            # per pair: phase fix on q, then a real rotation in the (p, q) plane;
            # G^* acts on rows, and a G = (G^* a^*)^* keeps every update row-wise
            rot = (p, q, c, s, np.conj(-s * np.conj(phase)), phase * c)
            _rotate_rows(a, *rot)
            a = np.ascontiguousarray(a.conj().T)
            _rotate_rows(a, *rot)
            a = np.ascontiguousarray(a.conj().T)
            _rotate_rows(uh, *rot)
            a[p, q] = a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real
    return a, uh.conj().T


def hermitian_eig(a, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors as orthonormal columns, so that
    ``a == U @ diag(w) @ U^*``.
    """
    a = np.array(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not is_hermitian(a, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    a = (a + dagger(a)) / 2
    d, u = _jacobi_sweeps(a)
    w = np.diag(d).real
    order = np.argsort(-w, kind="stable")
    return w[order], u[:, order]


def numerical_rank(eigenvalues, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    w = np.asarray(eigenvalues, dtype=float)
    if w.size == 0 or w.max() <= 0:
        return 0
    return int(np.count_nonzero(w > tol.rank_rtol * w.max()))


def is_isometry(v, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    v = np.asarray(v)
    if v.ndim != 2 or v.shape[0] < v.shape[1]:
        return False
    return np.linalg.norm(dagger(v) @ v - np.eye(v.shape[1])) <= tol.atol


def min_eigenvalue(a, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    w, _ = hermitian_eig(a, tol)
    return float(w[-1]) if w.size else 0.0


def is_psd(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    if not is_hermitian(a, tol):
        return False
    return min_eigenvalue(a, tol) >= -tol.atol


def extend_to_orthonormal(v, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``range(v)``.

    For an isometry ``v`` of shape ``(a, r)`` the result ``c`` has shape
    ``(a, a - r)`` and ``[v | c]`` is unitary.
    """
    v = np.asarray(v, dtype=np.complex128)
    if not is_isometry(v, tol):
        raise ValueError("extend_to_orthonormal needs an isometry")
    a, r = v.shape
    if r == a:
        return np.zeros((a, 0), dtype=np.complex128)
    projector = np.eye(a) - v @ dagger(v)
    _, vecs = hermitian_eig(projector, ToleranceConfig(atol=max(tol.atol, 1e-8)))
    c = vecs[:, : a - r]
    # one Gram-Schmidt pass against v cleans up rounding in the projector
    c = c - v @ (dagger(v) @ c)
    q, _ = np.linalg.qr(c)
    return q


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in a.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if rows < 0 or cols < 0 or len(data) != rows * cols:
        raise DimensionError(f"matrix JSON declares {rows}x{cols} but has {len(data)} entries")
    try:
        flat = np.array([complex(float(re), float(im)) for re, im in data], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix entry: {exc}") from exc
    return as_matrix(flat.reshape(rows, cols))

"""Stinespring dilations of channels.

A dilation of ``f: m -> n`` is an isometry ``V: m -> n (x) a`` with
``f(rho) = tr_a(V rho V^*)``.  The minimal one has ``a`` equal to the rank
of the Choi matrix of ``f``.  Any two dilations of the same channel are
related by isometries on the ancilla, which :func:`connect_dilations`
computes explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cptp
from .cptp import CptpMor
from .isometry import (IsometryCategory, IsometryMor, canonical_injection, iso_compose,
                       iso_identity, iso_tensor)
from .linalg import (DEFAULT_TOL, ToleranceConfig, dagger, extend_to_orthonormal,
                     hermitian_eig, is_isometry, matrix_from_json, matrix_to_json, numerical_rank)
from .smc import Dilation, DilationOracle


@dataclass(frozen=True, eq=False)
class KrausFamily:
    dom: int
    cod: int
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in self.operators)
        object.__setattr__(self, "operators", ops)
        if any(k.shape != (self.cod, self.dom) for k in ops):
            raise ValueError(f"Kraus operators must be {self.cod}x{self.dom}")
        total = sum((dagger(k) @ k for k in ops), np.zeros((self.dom, self.dom)))
        if np.linalg.norm(total - np.eye(self.dom)) > DEFAULT_TOL.atol:
            raise ValueError("Kraus family is not trace preserving")

    def __len__(self):
        return len(self.operators)

    def apply(self, rho) -> np.ndarray:
        return sum(k @ rho @ dagger(k) for k in self.operators)


@dataclass(frozen=True, eq=False)
class StinespringDilation(Dilation):
    """A dilation whose morphism is an :class:`IsometryMor`."""

    minimal: bool = False

    @property
    def isometry(self) -> np.ndarray:
        return self.morphism.matrix

    def kraus_operators(self) -> list[np.ndarray]:
        """``K_k = (id_n (x) <k|) V`` for each ancilla basis vector."""
        v = self.isometry.reshape(self.cod, self.ancilla, self.dom)
        return [v[:, k, :] for k in range(self.ancilla)]

    def to_json(self) -> dict:
        return {"dom": self.dom, "cod": self.cod, "ancilla": self.ancilla,
                "isometry": matrix_to_json(self.isometry), "minimal": self.minimal}

    @classmethod
    def from_json(cls, obj) -> "StinespringDilation":
        try:
            m, n, a = int(obj["dom"]), int(obj["cod"]), int(obj["ancilla"])
            v = IsometryMor(m, n * a, matrix_from_json(obj["isometry"]))
            return cls(m, n, a, v, bool(obj.get("minimal", False)))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed dilation JSON: {exc}") from exc


def as_stinespring(d: Dilation, minimal: bool = False) -> StinespringDilation:
    if isinstance(d, StinespringDilation):
        return d
    return StinespringDilation(d.dom, d.cod, d.ancilla, d.morphism, minimal)


def _fix_phase(u: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(u)))
    return u * (abs(u[k]) / u[k])


def _choi_spectrum(f: CptpMor, tol: ToleranceConfig):
    w, u = hermitian_eig(f.choi, tol)
    if w[-1] < -tol.atol:
        raise cptp.NotCPTPError(f"Choi matrix has eigenvalue {w[-1]:.3g}")
    r = numerical_rank(w, tol)
    return w[:r], u[:, :r]


def _unvec(u: np.ndarray, m: int, n: int) -> np.ndarray:
    # Choi index i * n + k carries the (k, i) entry of the operator
    return u.reshape(m, n).T


def kraus_from_choi(f: CptpMor, tol: ToleranceConfig = DEFAULT_TOL) -> KrausFamily:
    """Minimal Kraus family from the eigendecomposition of the Choi matrix.

    Each eigenvector is rescaled so that its largest-magnitude entry is real
    and positive, which makes the result deterministic.
    """
    w, u = _choi_spectrum(f, tol)
    ops = [math.sqrt(lam) * _unvec(_fix_phase(u[:, k]), f.dom, f.cod) for k, lam in enumerate(w)]
    return KrausFamily(f.dom, f.cod, tuple(ops))


def _stack_kraus(ops, m: int, n: int) -> np.ndarray:
    # V x = sum_k (K_k x) (x) e_k, ancilla least significant
    return np.stack(ops, axis=1).reshape(n * len(ops), m)


def dilate(f: CptpMor, tol: ToleranceConfig = DEFAULT_TOL) -> StinespringDilation:
    """Minimal Stinespring dilation of ``f``."""
    kraus = kraus_from_choi(f, tol)
    a = len(kraus)
    v = IsometryMor(f.dom, f.cod * a, _stack_kraus(kraus.operators, f.dom, f.cod))
    return StinespringDilation(f.dom, f.cod, a, v, minimal=True)


def channel_of_dilation(d: Dilation) -> CptpMor:
    """``rho -> tr_a(V rho V^*)``."""
    if not isinstance(d.morphism, IsometryMor):
        raise TypeError("channel_of_dilation needs an isometry dilation")
    # same as compose(partial_trace_channel(n, a), E(V)), without the (n a)^2 intermediate
    return cptp.from_kraus(as_stinespring(d).kraus_operators())


def factor_through_minimal(d: Dilation, minimal: StinespringDilation | None = None,
                           tol: ToleranceConfig = DEFAULT_TOL) -> IsometryMor:
    """Isometry ``T: r -> a`` with ``(id_n (x) T) V_min = V``.

    ``V_min`` defaults to :func:`dilate` of the channel induced by ``d``.
    Its Kraus operators ``M_k`` are mutually orthogonal, so
    ``T[i, k] = <M_k, K_i> / <M_k, M_k>``.
    """
    d = as_stinespring(d)
    if minimal is None:
        minimal = dilate(channel_of_dilation(d), tol)
    if (minimal.dom, minimal.cod) != (d.dom, d.cod):
        raise ValueError("minimal dilation has a different type")
    minimal_ops = minimal.kraus_operators()
    weights = [np.vdot(mk, mk).real for mk in minimal_ops]
    t = np.array([[np.vdot(mk, ki) / lam for mk, lam in zip(minimal_ops, weights)]
                  for ki in d.kraus_operators()])
    residual = np.linalg.norm(np.kron(np.eye(d.cod), t) @ minimal.isometry - d.isometry)
    if residual > tol.atol or not is_isometry(t, tol):
        raise ValueError(f"dilation does not factor through the minimal one (residual {residual:.3g})")
    return IsometryMor(minimal.ancilla, d.ancilla, t)


@dataclass(frozen=True, eq=False)
class Connection:
    """Isometries ``V': a -> c`` and ``W': b -> c`` joining two dilations."""

    ancilla: int
    left: IsometryMor
    right: IsometryMor


def connect_dilations(d1: Dilation, d2: Dilation, tol: ToleranceConfig = DEFAULT_TOL) -> Connection:
    """Isometries making ``(id_n (x) V') V = (id_n (x) W') W``.

    Both dilations are factored through the minimal one, ``T_a: r -> a``
    and ``T_b: r -> b``.  The common ancilla has ``c = a + b - r``
    dimensions: the first ``r`` coordinates receive ``range(T_a)`` and
    ``range(T_b)`` alike, the next ``a - r`` the orthogonal complement of
    ``range(T_a)`` and the last ``b - r`` that of ``range(T_b)``.
    """
    d1, d2 = as_stinespring(d1), as_stinespring(d2)
    if (d1.dom, d1.cod) != (d2.dom, d2.cod):
        raise ValueError("dilations have different types")
    dist = cptp.channel_distance(channel_of_dilation(d1), channel_of_dilation(d2))
    if dist > tol.atol:
        raise ValueError(f"dilations induce different channels (Choi distance {dist:.3g})")
    # both must factor through the same minimal dilation
    v_min = dilate(channel_of_dilation(d1), tol)
    t_a = factor_through_minimal(d1, v_min, tol).matrix
    t_b = factor_through_minimal(d2, v_min, tol).matrix
    r = t_a.shape[1]
    a, b = d1.ancilla, d2.ancilla
    c = a + b - r
    eye = np.eye(c)
    shared = eye[:, :r]
    v_prime = shared @ dagger(t_a) + eye[:, r:a] @ dagger(extend_to_orthonormal(t_a, tol))
    w_prime = shared @ dagger(t_b) + eye[:, a:c] @ dagger(extend_to_orthonormal(t_b, tol))
    return Connection(c, IsometryMor(a, c, v_prime), IsometryMor(b, c, w_prime))


def connection_residual(d1: Dilation, d2: Dilation, conn: Connection) -> float:
    n = d1.cod
    lhs = iso_compose(iso_tensor(iso_identity(n), conn.left), d1.morphism)
    rhs = iso_compose(iso_tensor(iso_identity(n), conn.right), d2.morphism)
    return float(np.linalg.norm(lhs.matrix - rhs.matrix))


def pad_to_power_of_two(d: Dilation) -> StinespringDilation:
    """Enlarge the ancilla to ``2**ceil(log2 a)`` via ``id_n (x) Inj_{a, 2^k}``."""
    d = as_stinespring(d)
    size = 1 << (d.ancilla - 1).bit_length()
    if size == d.ancilla:
        return d
    pad = iso_tensor(iso_identity(d.cod), canonical_injection(d.ancilla, size))
    return StinespringDilation(d.dom, d.cod, size, iso_compose(pad, d.morphism), minimal=False)


def connect_padded(d1: Dilation, d2: Dilation, tol: ToleranceConfig = DEFAULT_TOL) -> Connection:
    """A connection whose common ancilla is itself a power of two.

    Composes the connection of :func:`connect_dilations` with
    ``Inj_{c, 2^k}`` so that the whole diagram stays among qubit systems.
    """
    conn = connect_dilations(d1, d2, tol)
    size = 1 << (conn.ancilla - 1).bit_length()
    inj = canonical_injection(conn.ancilla, size)
    return Connection(size, iso_compose(inj, conn.left), iso_compose(inj, conn.right))


class ChoiOracle(DilationOracle):
    """Equivalence of isometry dilations by equality of the induced channels.

    Complete for ``L(Isometry)`` because dilations of a channel are unique
    up to ancilla isometries.
    """

    def __init__(self, tol: ToleranceConfig = DEFAULT_TOL):
        self.tol = tol

    def distance(self, d1, d2):
        if (d1.dom, d1.cod) != (d2.dom, d2.cod):
            return math.inf
        return cptp.channel_distance(channel_of_dilation(d1), channel_of_dilation(d2))

    def equivalent(self, d1, d2):
        return self.distance(d1, d2) <= self.tol.atol

    def normalize(self, d):
        return dilate(channel_of_dilation(d), self.tol)


def isometry_reflection():
    """``L(Isometry)`` with the Choi oracle."""
    from .smc import ReflectionCategory
    return ReflectionCategory(IsometryCategory(), ChoiOracle())

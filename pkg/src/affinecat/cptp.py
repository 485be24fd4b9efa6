"""Completely positive trace preserving maps stored as Choi matrices.

For a channel ``f: M_m -> M_n`` the Choi matrix is
``sum_{ij} e_ij (x) f(e_ij)``, an ``(m n) x (m n)`` matrix whose ``(i, j)``
block of size ``n x n`` is ``f(e_ij)``.  The input factor is the most
significant one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .isometry import IsometryMor, iso_identity, random_isometry, symmetry
from .linalg import (DEFAULT_TOL, DimensionError, ToleranceConfig, as_matrix, dagger,
                     frobenius_distance, hermitian_eig, is_hermitian, kron,
                     matrix_from_json, matrix_to_json, partial_trace)
from .smc import Category


class NotCPTPError(ValueError):
    pass


@dataclass(frozen=True)
class CPTPReport:
    cp: bool
    tp: bool
    min_eigenvalue: float
    tp_deviation: float
    hermitian: bool = True

    @property
    def ok(self) -> bool:
        return self.cp and self.tp


def is_cptp(choi, dom: int, cod: int, tol: ToleranceConfig = DEFAULT_TOL) -> CPTPReport:
    """Check complete positivity (Choi PSD) and trace preservation."""
    choi = np.asarray(choi, dtype=np.complex128)
    if dom < 1 or cod < 1 or choi.shape != (dom * cod, dom * cod):
        raise DimensionError(f"Choi shape {choi.shape} does not match {dom}->{cod}")
    tp_dev = float(np.linalg.norm(partial_trace(choi, dom, cod, "second") - np.eye(dom)))
    hermitian = is_hermitian(choi, tol)
    if hermitian:
        lam = float(hermitian_eig(choi, tol)[0][-1])
    else:
        lam = -math.inf
    return CPTPReport(cp=hermitian and lam >= -tol.atol, tp=tp_dev <= tol.atol,
                      min_eigenvalue=lam, tp_deviation=tp_dev, hermitian=hermitian)


def _fast_cptp_violation(choi, dom, cod, tol):
    """Cheap eager check used by constructors; ``is_cptp`` gives the full report."""
    if np.linalg.norm(partial_trace(choi, dom, cod, "second") - np.eye(dom)) > tol.atol:
        return "trace preservation fails"
    if not is_hermitian(choi, tol):
        return "Choi matrix is not Hermitian"
    shifted = (choi + dagger(choi)) / 2 + tol.atol * np.eye(choi.shape[0])
    try:
        np.linalg.cholesky(shifted)
    except np.linalg.LinAlgError:
        return "Choi matrix is not positive semidefinite"
    return None


@dataclass(frozen=True, eq=False)
class CptpMor:
    """A channel ``dom -> cod`` given by its Choi matrix, validated on construction."""

    dom: int
    cod: int
    choi: np.ndarray

    def __post_init__(self):
        c = as_matrix(self.choi, "choi")
        object.__setattr__(self, "choi", c)
        if c.shape != (self.dom * self.cod, self.dom * self.cod):
            raise DimensionError(f"Choi shape {c.shape} does not match {self.dom}->{self.cod}")
        problem = _fast_cptp_violation(c, self.dom, self.cod, DEFAULT_TOL)
        if problem:
            raise NotCPTPError(f"not a channel {self.dom}->{self.cod}: {problem}")

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def block(self, i: int, j: int) -> np.ndarray:
        """``f(e_ij)``."""
        n = self.cod
        return self.choi[i * n:(i + 1) * n, j * n:(j + 1) * n]

    def to_json(self) -> dict:
        return {"dom": self.dom, "cod": self.cod, "choi": matrix_to_json(self.choi)}

    @classmethod
    def from_json(cls, obj) -> "CptpMor":
        try:
            return cls(int(obj["dom"]), int(obj["cod"]), matrix_from_json(obj["choi"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed channel JSON: {exc}") from exc


def _choi_tensor(f: CptpMor) -> np.ndarray:
    return f.choi.reshape(f.dom, f.cod, f.dom, f.cod)


def apply(f: CptpMor, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (f.dom, f.dom):
        raise DimensionError(f"channel expects a {f.dom}x{f.dom} input, got {rho.shape}")
    return np.einsum("ij,ikjl->kl", rho, _choi_tensor(f))


def choi_from_action(action, m: int) -> np.ndarray:
    """Choi matrix of an arbitrary linear map given as a callable on ``m x m`` matrices."""
    blocks = [[np.asarray(action(_unit(i, j, m)), dtype=np.complex128) for j in range(m)]
              for i in range(m)]
    return np.block(blocks)


def _unit(i, j, m):
    e = np.zeros((m, m), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def from_isometry(v: IsometryMor) -> CptpMor:
    """The functor ``E``: ``rho -> V rho V^*``."""
    psi = v.matrix.T.reshape(-1)
    return CptpMor(v.dom, v.cod, np.outer(psi, psi.conj()))


def from_kraus(operators) -> CptpMor:
    ops = [np.asarray(k, dtype=np.complex128) for k in operators]
    if not ops:
        raise ValueError("empty Kraus family")
    n, m = ops[0].shape
    if any(k.shape != (n, m) for k in ops):
        raise DimensionError("Kraus operators must share a shape")
    vecs = np.array([k.T.reshape(-1) for k in ops])
    return CptpMor(m, n, vecs.T @ vecs.conj())


def identity_channel(n: int) -> CptpMor:
    return from_isometry(iso_identity(n))


def compose(g: CptpMor, f: CptpMor) -> CptpMor:
    """``g`` after ``f``."""
    if f.cod != g.dom:
        raise DimensionError(f"cannot compose {f.dom}->{f.cod} with {g.dom}->{g.cod}")
    m, n, p = f.dom, f.cod, g.cod
    # C[i r, j s] = sum_{k l} F[i k, j l] G[k r, l s], done as one matrix product
    fm = _choi_tensor(f).transpose(0, 2, 1, 3).reshape(m * m, n * n)
    gm = _choi_tensor(g).transpose(0, 2, 1, 3).reshape(n * n, p * p)
    c = (fm @ gm).reshape(m, m, p, p).transpose(0, 2, 1, 3)
    return CptpMor(m, p, c.reshape(m * p, m * p))


def tensor(f: CptpMor, g: CptpMor) -> CptpMor:
    """``f (x) g``; reorders Choi factors (in1 out1 in2 out2) -> (in1 in2 out1 out2)."""
    m, n, p, q = f.dom, f.cod, g.dom, g.cod
    reorder = kron(np.eye(m), symmetry(n, p).matrix, np.eye(q))
    c = reorder @ kron(f.choi, g.choi) @ dagger(reorder)
    return CptpMor(m * p, n * q, c)


def trace_channel(n: int) -> CptpMor:
    """The unique channel ``n -> 1``."""
    return CptpMor(n, 1, np.eye(n))


def partial_trace_channel(m: int, n: int) -> CptpMor:
    """``id_m (x) !``: trace out the second factor of ``m (x) n``."""
    return tensor(identity_channel(m), trace_channel(n))


def prepare_channel(rho) -> CptpMor:
    """The channel ``1 -> n`` preparing the density matrix ``rho``."""
    rho = as_matrix(rho)
    return CptpMor(1, rho.shape[0], rho)


def equal(f: CptpMor, g: CptpMor, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return channel_distance(f, g) <= tol.atol


def channel_distance(f: CptpMor, g: CptpMor) -> float:
    if (f.dom, f.cod) != (g.dom, g.cod):
        raise DimensionError(f"channels {f.dom}->{f.cod} and {g.dom}->{g.cod} are not parallel")
    return frobenius_distance(f.choi, g.choi)


def random_channel(m: int, n: int, rng=None, kraus_rank: int | None = None) -> CptpMor:
    """A random channel ``tr_a(V . V^*)`` from a random isometry ``m -> n a``."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if kraus_rank is None:
        kraus_rank = int(rng.integers(1, m * n + 1))
    a = max(kraus_rank, -(-m // n))
    v = random_isometry(m, n * a, rng)
    return compose(partial_trace_channel(n, a), from_isometry(v))


def is_density(rho, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol) or abs(np.trace(rho) - 1) > tol.atol:
        return False
    return hermitian_eig(rho, tol)[0][-1] >= -tol.atol


def random_density(n: int, rng=None, rank: int | None = None) -> np.ndarray:
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    rank = n if rank is None else rank
    z = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = z @ dagger(z)
    return rho / np.trace(rho).real


class CPTPCategory(Category):
    name = "CPTP"

    def identity(self, n):
        return identity_channel(n)

    def compose(self, g, f):
        return compose(g, f)

    def tensor(self, f, g):
        return tensor(f, g)

    def symmetry(self, a, b):
        return from_isometry(symmetry(a, b))

    def discard(self, n):
        return trace_channel(n)

    def distance(self, f, g):
        if (f.dom, f.cod) != (g.dom, g.cod):
            return math.inf
        return channel_distance(f, g)

    def random_morphism(self, rng, dom, cod):
        return random_channel(dom, cod, rng)

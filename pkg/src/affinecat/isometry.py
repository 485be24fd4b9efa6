"""Categories of pure maps: isometries, injections and functions.

Objects are natural numbers ``n`` standing for ``C^n`` (or the finite set
``{0, ..., n-1}``); the monoidal product is multiplication.  The qubit
view ``Isometry_2`` uses qubit counts as objects, with addition as the
monoidal product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (DEFAULT_TOL, DimensionError, ToleranceConfig, as_matrix, dagger,
                     frobenius_distance, is_isometry, kron, matrix_from_json, matrix_to_json)
from .smc import Category


class NotIsometryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class IsometryMor:
    """An isometry ``dom -> cod``, stored as its ``cod x dom`` matrix."""

    dom: int
    cod: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "isometry")
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.cod, self.dom):
            raise DimensionError(f"matrix shape {m.shape} does not match {self.dom}->{self.cod}")
        if not is_isometry(m, DEFAULT_TOL):
            raise NotIsometryError(f"matrix {self.dom}->{self.cod} is not an isometry")

    @classmethod
    def from_matrix(cls, matrix) -> "IsometryMor":
        m = as_matrix(matrix)
        return cls(m.shape[1], m.shape[0], m)

    def to_json(self) -> dict:
        return matrix_to_json(self.matrix)

    @classmethod
    def from_json(cls, obj) -> "IsometryMor":
        return cls.from_matrix(matrix_from_json(obj))


def iso_identity(m: int) -> IsometryMor:
    return IsometryMor(m, m, np.eye(m))


def iso_compose(g: IsometryMor, f: IsometryMor) -> IsometryMor:
    if f.cod != g.dom:
        raise DimensionError(f"cannot compose {f.dom}->{f.cod} with {g.dom}->{g.cod}")
    return IsometryMor(f.dom, g.cod, g.matrix @ f.matrix)


def iso_tensor(f: IsometryMor, g: IsometryMor) -> IsometryMor:
    return IsometryMor(f.dom * g.dom, f.cod * g.cod, kron(f.matrix, g.matrix))


def permutation_matrix(perm) -> np.ndarray:
    """Matrix sending basis vector ``e_i`` to ``e_{perm[i]}``."""
    n = len(perm)
    p = np.zeros((n, n), dtype=np.complex128)
    p[list(perm), range(n)] = 1.0
    return p


def swap_index(m: int, n: int) -> list[int]:
    """Index map of the pairing swap ``(i, j) -> (j, i)`` on ``m * n``."""
    return [j * m + i for i in range(m) for j in range(n)]


def symmetry(m: int, n: int) -> IsometryMor:
    """The braiding ``sigma_{m,n}: m (x) n -> n (x) m``."""
    return IsometryMor(m * n, n * m, permutation_matrix(swap_index(m, n)))


def canonical_injection(a: int, b: int) -> IsometryMor:
    """``Inj_{a,b}``: ones on the first ``a`` diagonal entries of a ``b x a`` matrix."""
    if b < a:
        raise DimensionError(f"canonical injection needs b >= a, got a={a}, b={b}")
    return IsometryMor(a, b, np.eye(b, a))


def ket(k: int, d: int) -> IsometryMor:
    """Preparation of basis state ``|k>`` as an isometry ``1 -> d``."""
    if not 0 <= k < d:
        raise DimensionError(f"basis index {k} out of range for dimension {d}")
    v = np.zeros((d, 1), dtype=np.complex128)
    v[k, 0] = 1.0
    return IsometryMor(1, d, v)


def _as_rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def random_isometry(m: int, n: int, rng=None) -> IsometryMor:
    """Random isometry ``m -> n`` from a complex Gaussian matrix.

    ``rng`` is a :class:`numpy.random.Generator` or a seed.  Columns are
    orthonormalized by modified Gram-Schmidt with one re-orthogonalization
    pass.
    """
    if n < m:
        raise DimensionError(f"no isometry {m}->{n} exists")
    rng = _as_rng(rng)
    z = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    q = np.zeros((n, m), dtype=np.complex128)
    for k in range(m):
        v = z[:, k].copy()
        for _ in range(2):
            v -= q[:, :k] @ (dagger(q[:, :k]) @ v)
        q[:, k] = v / np.linalg.norm(v)
    return IsometryMor(m, n, q)


def qubit_view(k: int) -> int:
    """Dimension ``2**k`` of a ``k``-qubit object."""
    if k < 0:
        raise ValueError("qubit count must be nonnegative")
    return 2 ** k


def qubit_count(d: int) -> int:
    """Inverse of :func:`qubit_view`."""
    if d < 1 or d & (d - 1):
        raise DimensionError(f"{d} is not a power of two")
    return d.bit_length() - 1


@dataclass(frozen=True)
class FunctionMor:
    """A function ``{0..dom-1} -> {0..cod-1}`` stored as its value table."""

    dom: int
    cod: int
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(x) for x in self.map))
        if len(self.map) != self.dom:
            raise DimensionError(f"map has {len(self.map)} entries, expected {self.dom}")
        if any(not 0 <= x < self.cod for x in self.map):
            raise ValueError(f"map entries must lie in 0..{self.cod - 1}")

    @property
    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    def __call__(self, i: int) -> int:
        return self.map[i]

    def to_json(self) -> dict:
        return {"dom": self.dom, "cod": self.cod, "map": list(self.map)}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(int(obj["dom"]), int(obj["cod"]), tuple(obj["map"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed map JSON: {exc}") from exc


@dataclass(frozen=True)
class InjectionMor(FunctionMor):
    def __post_init__(self):
        super().__post_init__()
        if not self.is_injective:
            raise ValueError(f"map {self.map} is not injective")


def _result_type(*fs):
    return InjectionMor if all(isinstance(f, InjectionMor) for f in fs) else FunctionMor


def func_identity(m: int) -> InjectionMor:
    return InjectionMor(m, m, tuple(range(m)))


def func_compose(g: FunctionMor, f: FunctionMor) -> FunctionMor:
    if f.cod != g.dom:
        raise DimensionError(f"cannot compose {f.dom}->{f.cod} with {g.dom}->{g.cod}")
    return _result_type(f, g)(f.dom, g.cod, tuple(g.map[x] for x in f.map))


def func_tensor(f: FunctionMor, g: FunctionMor) -> FunctionMor:
    """Pairing ``(i, j) -> (f(i), g(j))`` under lexicographic flattening."""
    table = tuple(f.map[i] * g.cod + g.map[j] for i in range(f.dom) for j in range(g.dom))
    return _result_type(f, g)(f.dom * g.dom, f.cod * g.cod, table)


def func_symmetry(m: int, n: int) -> InjectionMor:
    return InjectionMor(m * n, n * m, tuple(swap_index(m, n)))


def injection_to_isometry(f: FunctionMor) -> IsometryMor:
    """The zero-one isometry ``V_f`` with ``(V_f a)_{f(i)} = a_i``."""
    if not f.is_injective:
        raise ValueError("only injections embed as isometries")
    v = np.zeros((f.cod, f.dom), dtype=np.complex128)
    v[list(f.map), range(f.dom)] = 1.0
    return IsometryMor(f.dom, f.cod, v)


def random_function(rng, m: int, n: int, injective: bool = False) -> FunctionMor:
    rng = _as_rng(rng)
    if injective:
        if n < m:
            raise DimensionError(f"no injection {m}->{n} exists")
        return InjectionMor(m, n, tuple(int(x) for x in rng.permutation(n)[:m]))
    return FunctionMor(m, n, tuple(int(x) for x in rng.integers(0, n, size=m)))


class IsometryCategory(Category):
    name = "Isometry"

    def __init__(self, tol: ToleranceConfig = DEFAULT_TOL):
        self.tol = tol

    def identity(self, n):
        return iso_identity(n)

    def compose(self, g, f):
        return iso_compose(g, f)

    def tensor(self, f, g):
        return iso_tensor(f, g)

    def symmetry(self, a, b):
        return symmetry(a, b)

    def distance(self, f, g):
        if (f.dom, f.cod) != (g.dom, g.cod):
            return math.inf
        return frobenius_distance(f.matrix, g.matrix)

    def random_morphism(self, rng, dom, cod):
        return random_isometry(dom, cod, rng)


class QubitIsometryCategory(IsometryCategory):
    """``Isometry_2``: objects are qubit counts, tensor adds them."""

    name = "Isometry_2"
    unit = 0

    def tensor_objects(self, a, b):
        return a + b

    def identity(self, n):
        return iso_identity(qubit_view(n))

    def symmetry(self, a, b):
        return symmetry(qubit_view(a), qubit_view(b))

    def random_morphism(self, rng, dom, cod):
        return random_isometry(qubit_view(dom), qubit_view(cod), rng)


class InjectionCategory(Category):
    name = "Injection"
    exact = True

    def identity(self, n):
        return func_identity(n)

    def compose(self, g, f):
        return func_compose(g, f)

    def tensor(self, f, g):
        return func_tensor(f, g)

    def symmetry(self, a, b):
        return func_symmetry(a, b)

    def distance(self, f, g):
        if (f.dom, f.cod) != (g.dom, g.cod):
            return math.inf
        return 0.0 if f.map == g.map else 1.0

    def random_morphism(self, rng, dom, cod):
        return random_function(rng, dom, cod, injective=True)


class FunctionCategory(InjectionCategory):
    name = "Function"

    def random_morphism(self, rng, dom, cod):
        return random_function(rng, dom, cod)

    def discard(self, n):
        return FunctionMor(n, 1, (0,) * n)

"""Strict symmetric monoidal categories with natural-number objects, and
the affine reflection ``L(C)`` built from dilation pairs.

A morphism of ``L(C)`` from ``m`` to ``n`` is represented by a
:class:`Dilation` ``(a, f: m -> n (x) a)``.  Two dilations are identified
when they are related by the equivalence generated by the rewrite
``(a, f) ~ (b, (n (x) g) f)`` for ``g: a -> b``.  Deciding that relation is
delegated to a :class:`DilationOracle` chosen per base category.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


class Category(ABC):
    """Operations of a strict symmetric monoidal category.

    Objects are positive integers.  Morphisms are whatever the concrete
    category uses, as long as they expose ``dom`` and ``cod``.
    """

    name: str = "category"
    unit: int = 1
    #: whether equality is decided exactly (integer data) rather than numerically
    exact: bool = False

    def tensor_objects(self, a: int, b: int) -> int:
        return a * b

    @abstractmethod
    def identity(self, n: int) -> Any: ...

    @abstractmethod
    def compose(self, g, f) -> Any:
        """``g`` after ``f``."""

    @abstractmethod
    def tensor(self, f, g) -> Any: ...

    @abstractmethod
    def symmetry(self, a: int, b: int) -> Any: ...

    @abstractmethod
    def distance(self, f, g) -> float:
        """Deviation between parallel morphisms; ``inf`` if not parallel."""

    @abstractmethod
    def random_morphism(self, rng: np.random.Generator, dom: int, cod: int) -> Any:
        """Random morphism ``dom -> cod``; callers keep ``dom <= cod``."""

    def equal(self, f, g, atol: float = 1e-9) -> bool:
        return self.distance(f, g) <= (0.0 if self.exact else atol)


class DilationOracle(ABC):
    """Decides equivalence of dilations in ``L(C)``."""

    @abstractmethod
    def equivalent(self, d1: "Dilation", d2: "Dilation") -> bool: ...

    def distance(self, d1: "Dilation", d2: "Dilation") -> float:
        return 0.0 if self.equivalent(d1, d2) else math.inf

    def normalize(self, d: "Dilation") -> "Dilation":
        raise NotImplementedError(f"{type(self).__name__} has no normal form")


@dataclass(frozen=True, eq=False)
class Dilation:
    """A pair ``(ancilla, morphism: dom -> cod (x) ancilla)``."""

    dom: int
    cod: int
    ancilla: int
    morphism: Any

    def __post_init__(self):
        if min(self.dom, self.cod, self.ancilla) < 1:
            raise ValueError("dilation objects must be positive")
        if self.morphism.dom != self.dom or self.morphism.cod != self.cod * self.ancilla:
            raise ValueError(
                f"dilation morphism {self.morphism.dom}->{self.morphism.cod} does not fit "
                f"{self.dom} -> {self.cod} (x) {self.ancilla}"
            )


@dataclass(frozen=True, eq=False)
class ReflectionMor:
    """A morphism of ``L(C)``: a representative dilation plus the oracle that
    decides equality of classes."""

    representative: Dilation
    oracle: DilationOracle = field(repr=False)

    @property
    def dom(self) -> int:
        return self.representative.dom

    @property
    def cod(self) -> int:
        return self.representative.cod

    def __eq__(self, other):
        if not isinstance(other, ReflectionMor):
            return NotImplemented
        return self.oracle.equivalent(self.representative, other.representative)

    __hash__ = None


def reflect_embed(cat: Category, f, oracle: DilationOracle | None = None):
    """The unit ``C -> L(C)``: ``f`` with the trivial ancilla."""
    d = Dilation(f.dom, f.cod, cat.unit, f)
    return ReflectionMor(d, oracle) if oracle is not None else d


def reflect_discard(cat: Category, n: int, oracle: DilationOracle | None = None):
    """The discard ``n -> 1``, represented as ``(n, id_n: n -> 1 (x) n)``."""
    d = Dilation(n, cat.unit, n, cat.identity(n))
    return ReflectionMor(d, oracle) if oracle is not None else d


def reflect_compose(cat: Category, g_dil: Dilation, f_dil: Dilation) -> Dilation:
    """Dilation of ``g f``: ``(W (x) id_a) V`` with ancilla ``b (x) a``."""
    if f_dil.cod != g_dil.dom:
        raise ValueError(f"cannot compose dilations {f_dil.dom}->{f_dil.cod} and {g_dil.dom}->{g_dil.cod}")
    a = f_dil.ancilla
    morphism = cat.compose(cat.tensor(g_dil.morphism, cat.identity(a)), f_dil.morphism)
    return Dilation(f_dil.dom, g_dil.cod, cat.tensor_objects(g_dil.ancilla, a), morphism)


def reflect_tensor(cat: Category, f_dil: Dilation, g_dil: Dilation) -> Dilation:
    """Dilation of ``f (x) g``: ``(id_n (x) sigma_{a,q} (x) id_b)(V (x) W)``."""
    n, a = f_dil.cod, f_dil.ancilla
    q, b = g_dil.cod, g_dil.ancilla
    swap_middle = cat.tensor(cat.tensor(cat.identity(n), cat.symmetry(a, q)), cat.identity(b))
    morphism = cat.compose(swap_middle, cat.tensor(f_dil.morphism, g_dil.morphism))
    return Dilation(
        cat.tensor_objects(f_dil.dom, g_dil.dom),
        cat.tensor_objects(n, q),
        cat.tensor_objects(a, b),
        morphism,
    )


def rewrite_step(cat: Category, d: Dilation, g) -> Dilation:
    """One generating step of the dilation equivalence: ``(b, (n (x) g) f)``."""
    if g.dom != d.ancilla:
        raise ValueError(f"rewrite morphism has domain {g.dom}, ancilla is {d.ancilla}")
    morphism = cat.compose(cat.tensor(cat.identity(d.cod), g), d.morphism)
    return Dilation(d.dom, d.cod, g.cod, morphism)


class ReflectionCategory(Category):
    """``L(C)`` as a category in its own right, with morphisms :class:`Dilation`."""

    def __init__(self, base: Category, oracle: DilationOracle, max_ancilla: int = 3):
        self.base = base
        self.oracle = oracle
        self.exact = base.exact
        self.max_ancilla = max_ancilla
        self.name = f"L({base.name})"

    def identity(self, n):
        return reflect_embed(self.base, self.base.identity(n))

    def compose(self, g, f):
        return reflect_compose(self.base, g, f)

    def tensor(self, f, g):
        return reflect_tensor(self.base, f, g)

    def symmetry(self, a, b):
        return reflect_embed(self.base, self.base.symmetry(a, b))

    def discard(self, n):
        return reflect_discard(self.base, n)

    def distance(self, f, g):
        if (f.dom, f.cod) != (g.dom, g.cod):
            return math.inf
        return self.oracle.distance(f, g)

    def random_morphism(self, rng, dom, cod):
        a = int(rng.integers(1, self.max_ancilla + 1))
        while self.base.tensor_objects(cod, a) < dom:
            a += 1
        return Dilation(dom, cod, a, self.base.random_morphism(rng, dom, self.base.tensor_objects(cod, a)))


@dataclass
class SMCReport:
    category: str
    samples: int
    seed: int
    deviations: dict[str, float]
    atol: float

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.atol


def _safe_distance(cat: Category, lhs: Callable[[], Any], rhs: Callable[[], Any]) -> float:
    try:
        return cat.distance(lhs(), rhs())
    except ValueError:
        # a broken tensor can produce non-composable pieces
        return math.inf


def check_smc_axioms(cat: Category, seed: int = 0, count: int = 50, max_dim: int = 3,
                     atol: float = 1e-9) -> SMCReport:
    """Evaluate the strict symmetric monoidal equations on random morphisms.

    Checked per sample: associativity of tensor, unit laws for tensor and
    composition, functoriality of tensor (interchange), ``sigma sigma = id``,
    the triangle ``sigma_{A,B(x)C} = (B (x) sigma_{A,C})(sigma_{A,B} (x) C)``
    and naturality of ``sigma``.
    """
    rng = np.random.default_rng(seed)
    dev = {k: 0.0 for k in ("associativity", "unit", "identity", "interchange",
                            "involution", "triangle", "naturality")}

    def dims(k):
        return sorted(int(x) for x in rng.integers(1, max_dim + 1, size=k))

    for _ in range(count):
        m, n = dims(2)
        p, q = dims(2)
        r, s = dims(2)
        f = cat.random_morphism(rng, m, n)
        g = cat.random_morphism(rng, p, q)
        h = cat.random_morphism(rng, r, s)
        one = cat.identity(cat.unit)

        def bump(key, value):
            dev[key] = max(dev[key], value)

        bump("associativity", _safe_distance(
            cat, lambda: cat.tensor(cat.tensor(f, g), h), lambda: cat.tensor(f, cat.tensor(g, h))))
        bump("unit", _safe_distance(cat, lambda: cat.tensor(f, one), lambda: f))
        bump("unit", _safe_distance(cat, lambda: cat.tensor(one, f), lambda: f))
        bump("identity", _safe_distance(cat, lambda: cat.compose(f, cat.identity(m)), lambda: f))
        bump("identity", _safe_distance(cat, lambda: cat.compose(cat.identity(n), f), lambda: f))

        # interchange: (f2 f1) (x) (g2 g1) = (f2 (x) g2)(f1 (x) g1)
        n2 = max(n, int(rng.integers(1, max_dim + 1)))
        q2 = max(q, int(rng.integers(1, max_dim + 1)))
        f2 = cat.random_morphism(rng, n, n2)
        g2 = cat.random_morphism(rng, q, q2)
        bump("interchange", _safe_distance(
            cat,
            lambda: cat.tensor(cat.compose(f2, f), cat.compose(g2, g)),
            lambda: cat.compose(cat.tensor(f2, g2), cat.tensor(f, g))))

        a, b, c = (int(x) for x in rng.integers(1, max_dim + 1, size=3))
        bump("involution", _safe_distance(
            cat, lambda: cat.compose(cat.symmetry(b, a), cat.symmetry(a, b)),
            lambda: cat.identity(cat.tensor_objects(a, b))))
        bump("triangle", _safe_distance(
            cat,
            lambda: cat.symmetry(a, cat.tensor_objects(b, c)),
            lambda: cat.compose(cat.tensor(cat.identity(b), cat.symmetry(a, c)),
                                cat.tensor(cat.symmetry(a, b), cat.identity(c)))))
        bump("naturality", _safe_distance(
            cat,
            lambda: cat.compose(cat.symmetry(n, q), cat.tensor(f, g)),
            lambda: cat.compose(cat.tensor(g, f), cat.symmetry(m, p))))
    return SMCReport(cat.name, count, seed, dev, 0.0 if cat.exact else atol)


@dataclass(frozen=True)
class Functor:
    """A strict symmetric monoidal functor given by callbacks.

    ``on_objects`` maps natural numbers to objects of ``target``;
    ``on_morphisms`` maps isometries to morphisms of ``target``.
    """

    on_objects: Callable[[int], int]
    on_morphisms: Callable[[Any], Any]
    target: Category

    def __call__(self, f):
        return self.on_morphisms(f)


def universal_extend(F: Functor, f, discard_in_D: Callable[[int], Any], atol: float = 1e-9):
    """The unique extension of ``F`` along ``E`` evaluated at a channel.

    Computes ``(F(n) (x) !) F(V)`` for the minimal Stinespring dilation
    ``(V, a)`` of ``f``.  Monoidality of ``F`` is spot-checked on the
    pieces actually used; a violation raises ``ValueError``.
    """
    from .isometry import iso_identity, iso_tensor, symmetry
    from .stinespring import dilate

    d = dilate(f)
    D = F.target
    n, a = d.cod, d.ancilla
    Fn, Fa = F.on_objects(n), F.on_objects(a)
    if D.tensor_objects(Fn, Fa) != F.on_objects(n * a) or F.on_objects(1) != D.unit:
        raise ValueError("functor is not strict monoidal on objects")
    checks = [
        (F(iso_tensor(iso_identity(n), iso_identity(a))), D.tensor(F(iso_identity(n)), F(iso_identity(a)))),
        (F(iso_identity(n * a)), D.identity(D.tensor_objects(Fn, Fa))),
        (F(symmetry(n, a)), D.symmetry(Fn, Fa)),
    ]
    for lhs, rhs in checks:
        if D.distance(lhs, rhs) > atol:
            raise ValueError("functor is not strict symmetric monoidal on the sampled inputs")
    discard_ancilla = D.tensor(D.identity(Fn), discard_in_D(Fa))
    return D.compose(discard_ancilla, F(d.morphism))

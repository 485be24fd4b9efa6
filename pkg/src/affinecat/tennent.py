"""The Tennent category: the affine reflection of finite injections.

A morphism ``m -> n`` is a pair ``(Q, f)`` of an equivalence relation ``Q``
on ``{0..m-1}`` and a function ``f`` that is injective on every
``Q``-class.  Every injective dilation ``(a, h: m -> n (x) a)`` has a
normal form of this shape, and the functor into channels is
``tr_{m/Q} . E(V_{(f, q)})`` with ``q`` the quotient map.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import cptp
from .cptp import CptpMor
from .isometry import (FunctionMor, InjectionMor, injection_to_isometry, random_function,
                       swap_index)
from .linalg import basis_matrix, partial_trace
from .smc import Category, Dilation, DilationOracle

MAX_ENUMERATION = 4


@dataclass(frozen=True)
class EquivRelation:
    """A partition of ``{0..size-1}`` as a class-index array.

    Classes are numbered by first occurrence, so two relations are equal
    exactly when their arrays are.
    """

    classes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", _canonical(self.classes))

    @classmethod
    def total(cls, m: int) -> "EquivRelation":
        return cls((0,) * m)

    @classmethod
    def discrete(cls, m: int) -> "EquivRelation":
        return cls(tuple(range(m)))

    @classmethod
    def from_blocks(cls, m: int, blocks) -> "EquivRelation":
        labels = [-1] * m
        for k, block in enumerate(blocks):
            for i in block:
                if labels[i] != -1:
                    raise ValueError(f"element {i} occurs in two blocks")
                labels[i] = k
        if -1 in labels:
            raise ValueError("blocks do not cover every element")
        return cls(tuple(labels))

    @property
    def size(self) -> int:
        return len(self.classes)

    @property
    def num_classes(self) -> int:
        return max(self.classes, default=-1) + 1

    def related(self, i: int, j: int) -> bool:
        return self.classes[i] == self.classes[j]

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_classes)]
        for i, c in enumerate(self.classes):
            out[c].append(i)
        return out

    def product(self, other: "EquivRelation") -> "EquivRelation":
        """``(i, j) ~ (i', j')`` iff ``i ~ i'`` and ``j ~ j'``."""
        k = other.num_classes
        return EquivRelation(tuple(a * k + b for a in self.classes for b in other.classes))


def _canonical(labels) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(x), len(seen)) for x in labels)


@dataclass(frozen=True)
class TennentMor:
    dom: int
    cod: int
    relation: EquivRelation
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(x) for x in self.map))
        if self.relation.size != self.dom or len(self.map) != self.dom:
            raise ValueError(f"relation/map sizes do not match domain {self.dom}")
        if any(not 0 <= x < self.cod for x in self.map):
            raise ValueError(f"map entries must lie in 0..{self.cod - 1}")
        for i, j in itertools.combinations(range(self.dom), 2):
            if self.map[i] == self.map[j] and self.relation.related(i, j):
                raise ValueError(f"map is not injective on the class of {i} and {j}")

    @property
    def function(self) -> FunctionMor:
        return FunctionMor(self.dom, self.cod, self.map)

    def quotient_map(self) -> FunctionMor:
        """``q: m -> m/Q``, classes ordered by first occurrence."""
        return FunctionMor(self.dom, self.relation.num_classes, self.relation.classes)

    def to_json(self) -> dict:
        return {"dom": self.dom, "cod": self.cod, "classes": list(self.relation.classes),
                "map": list(self.map)}

    @classmethod
    def from_json(cls, obj) -> "TennentMor":
        try:
            return cls(int(obj["dom"]), int(obj["cod"]), EquivRelation(tuple(obj["classes"])),
                       tuple(obj["map"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed Tennent JSON: {exc}") from exc


def tennent_identity(m: int) -> TennentMor:
    return TennentMor(m, m, EquivRelation.total(m), tuple(range(m)))


def tennent_compose(g: TennentMor, f: TennentMor) -> TennentMor:
    """``(R, g) . (Q, f) = (S, g f)`` with ``S(i,i')`` iff ``Q(i,i')`` and ``R(f i, f i')``."""
    if f.cod != g.dom:
        raise ValueError(f"cannot compose {f.dom}->{f.cod} with {g.dom}->{g.cod}")
    pairs = [(f.relation.classes[i], g.relation.classes[f.map[i]]) for i in range(f.dom)]
    index: dict = {}
    labels = tuple(index.setdefault(p, len(index)) for p in pairs)
    return TennentMor(f.dom, g.cod, EquivRelation(labels), tuple(g.map[x] for x in f.map))


def tennent_tensor(f: TennentMor, g: TennentMor) -> TennentMor:
    """Product relation and pairing of maps."""
    table = tuple(f.map[i] * g.cod + g.map[j] for i in range(f.dom) for j in range(g.dom))
    return TennentMor(f.dom * g.dom, f.cod * g.cod, f.relation.product(g.relation), table)


def tennent_symmetry(m: int, n: int) -> TennentMor:
    return TennentMor(m * n, n * m, EquivRelation.total(m * n), tuple(swap_index(m, n)))


def from_injection(f: FunctionMor) -> TennentMor:
    """``f -> (m x m, f)``."""
    if not f.is_injective:
        raise ValueError("from_injection needs an injection")
    return TennentMor(f.dom, f.cod, EquivRelation.total(f.dom), f.map)


def denormalize(t: TennentMor) -> Dilation:
    """The injective dilation ``(m/Q, (f, q): m -> n (x) m/Q)``."""
    k = t.relation.num_classes
    h = InjectionMor(t.dom, t.cod * k, tuple(t.map[i] * k + t.relation.classes[i] for i in range(t.dom)))
    return Dilation(t.dom, t.cod, k, h)


def normalize_dilation(d: Dilation) -> TennentMor:
    """Normal form of an injective dilation ``(a, h)``.

    The map is the first component of ``h`` and two points are related
    when the second components agree.  The relabelling ``[i] -> h(i) mod a``
    is a well-defined injection ``m/Q -> a`` witnessing that ``d`` and the
    denormalized result are related by one rewrite step.
    """
    h = d.morphism
    if not isinstance(h, FunctionMor) or not h.is_injective:
        raise ValueError("normal forms exist for injective dilations only")
    a = d.ancilla
    return TennentMor(d.dom, d.cod, EquivRelation(tuple(x % a for x in h.map)),
                      tuple(x // a for x in h.map))


def normalization_witness(d: Dilation) -> InjectionMor:
    """The injection ``g: m/Q -> a`` with ``rewrite_step(denormalize(nf), g) == d``."""
    nf = normalize_dilation(d)
    a = d.ancilla
    table = [0] * nf.relation.num_classes
    for i, c in enumerate(nf.relation.classes):
        table[c] = d.morphism.map[i] % a
    return InjectionMor(nf.relation.num_classes, a, tuple(table))


def to_cptp(t: TennentMor) -> CptpMor:
    """``F(Q, f) = tr_{m/Q} . E(V_{(f, q)})``."""
    d = denormalize(t)
    v = injection_to_isometry(d.morphism)
    return cptp.compose(cptp.partial_trace_channel(t.cod, d.ancilla), cptp.from_isometry(v))


def recover_map(channel: CptpMor) -> tuple[int, ...]:
    """Read ``f`` back from the diagonal of ``F(Q,f)(e_ii)`` (exact 0/1 entries)."""
    out = []
    for i in range(channel.dom):
        diag = _rounded(np.diag(channel.block(i, i)))
        hits = [j for j, x in enumerate(diag) if x == 1]
        if len(hits) != 1 or sum(diag) != 1:
            raise ValueError(f"channel is not in the image of the Tennent functor (row {i})")
        out.append(hits[0])
    return tuple(out)


def recover_relation(channel: CptpMor) -> EquivRelation:
    """Read ``Q`` from the ``(f i, f i')`` entry of ``F(Q,f)(e_{ii'})``."""
    f = recover_map(channel)
    m = channel.dom
    labels = list(range(m))
    for i, j in itertools.combinations(range(m), 2):
        if _rounded(channel.block(i, j)[f[i], f[j]]) == 1:
            labels[j] = labels[i]
    return EquivRelation(tuple(labels))


def _rounded(x, atol: float = 1e-9):
    x = np.asarray(x)
    r = np.round(x.real)
    if np.any(np.abs(x - r) > atol):
        raise ValueError("entries are not within tolerance of 0/1")
    return r.astype(int).tolist()


def set_partitions(m: int):
    """All partitions of ``{0..m-1}`` as restricted growth strings."""
    def grow(prefix, top):
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for c in range(top + 2):
            yield from grow(prefix + [c], max(top, c))
    if m == 0:
        yield ()
        return
    yield from grow([0], 0)


def enumerate_tennent(m: int, n: int) -> list[TennentMor]:
    """Every Tennent morphism ``m -> n``, each exactly once."""
    if m > MAX_ENUMERATION or n > MAX_ENUMERATION:
        raise ValueError(f"enumeration is limited to m, n <= {MAX_ENUMERATION}")
    out = []
    for labels in set_partitions(m):
        rel = EquivRelation(labels)
        for table in itertools.product(range(n), repeat=m):
            if all(table[i] != table[j] or labels[i] != labels[j]
                   for i, j in itertools.combinations(range(m), 2)):
                out.append(TennentMor(m, n, rel, table))
    return out


def enumerate_injective_dilations(m: int, n: int, a: int) -> list[Dilation]:
    return [Dilation(m, n, a, InjectionMor(m, n * a, h))
            for h in itertools.permutations(range(n * a), m)]


@dataclass
class CounterexampleReport:
    """Outcome of the check that no functor ``Function -> CPTP`` extends ``E``."""

    basis_matches: bool
    random_matches: bool
    differs_when_corner_nonzero: bool
    max_deviation: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.basis_matches and self.random_matches and self.differs_when_corner_nonzero


def counterexample_image(matrix) -> np.ndarray:
    """``tr_2(V_f M V_f^*)`` for ``f = (0->0, 1->1, 2->5): 3 -> 2 (x) 3``."""
    f = InjectionMor(3, 6, (0, 1, 5))
    v = injection_to_isometry(f).matrix
    return partial_trace(v @ np.asarray(matrix) @ v.conj().T, 2, 3, "first")


def _expected_counterexample(matrix) -> np.ndarray:
    out = np.array(matrix, dtype=np.complex128)
    out[0, 2] = out[1, 2] = out[2, 0] = out[2, 1] = 0
    return out


def function_counterexample_check(trials: int = 20, seed: int = 0) -> CounterexampleReport:
    """Discarding after ``f`` keeps only the block structure of ``M``.

    As functions ``(!_2 (x) id_3) f = id_3``, yet the channel image of the
    left side kills the off-diagonal entries linking ``{0, 1}`` with ``2``;
    so no monoidal functor on all functions can extend ``E``.
    """
    basis_ok = True
    for i in range(3):
        for j in range(3):
            e = basis_matrix(i, j, 3)
            basis_ok &= bool(np.array_equal(counterexample_image(e), _expected_counterexample(e)))
    rng = np.random.default_rng(seed)
    random_ok, differs, worst = True, True, 0.0
    for _ in range(trials):
        m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        img = counterexample_image(m)
        dev = float(np.abs(img - _expected_counterexample(m)).max())
        worst = max(worst, dev)
        random_ok &= dev == 0.0
        if m[0, 2] != 0:
            differs &= not np.array_equal(img, m)
    return CounterexampleReport(basis_ok, random_ok, differs, worst, trials)


class TennentCategory(Category):
    name = "Tennent"
    exact = True

    def identity(self, n):
        return tennent_identity(n)

    def compose(self, g, f):
        return tennent_compose(g, f)

    def tensor(self, f, g):
        return tennent_tensor(f, g)

    def symmetry(self, a, b):
        return tennent_symmetry(a, b)

    def discard(self, n):
        return TennentMor(n, 1, EquivRelation.discrete(n), (0,) * n)

    def distance(self, f, g):
        if (f.dom, f.cod) != (g.dom, g.cod):
            return math.inf
        return 0.0 if (f.relation, f.map) == (g.relation, g.map) else 1.0

    def random_morphism(self, rng, dom, cod):
        f = random_function(rng, dom, cod)
        rel = EquivRelation(tuple(int(x) for x in rng.integers(0, dom, size=dom)))
        # split classes until f is injective on each
        labels = list(rel.classes)
        for i, j in itertools.combinations(range(dom), 2):
            if labels[i] == labels[j] and f.map[i] == f.map[j]:
                labels[j] = dom + j
        return TennentMor(dom, cod, EquivRelation(tuple(labels)), f.map)


class TennentOracle(DilationOracle):
    """Equivalence of injective dilations by equality of normal forms."""

    def equivalent(self, d1, d2):
        return (d1.dom, d1.cod) == (d2.dom, d2.cod) and normalize_dilation(d1) == normalize_dilation(d2)

    def normalize(self, d):
        return denormalize(normalize_dilation(d))


def injection_reflection():
    """``L(Injection)`` with the normal-form oracle."""
    from .isometry import InjectionCategory
    from .smc import ReflectionCategory
    return ReflectionCategory(InjectionCategory(), TennentOracle())

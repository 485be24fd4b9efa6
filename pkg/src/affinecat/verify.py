"""Property suites behind ``affinecat verify``.

Each suite draws its own random data from a seeded generator and returns a
:class:`SuiteResult`.  Suites are independent of each other, so the runner
may execute them in any order or in parallel.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib.resources import files

import numpy as np

from . import cptp, tennent
from .circuit import interpret, interpret_pure, interpret_via_dilation, parse_circuit
from .cptp import CPTPCategory
from .isometry import (FunctionCategory, InjectionCategory, IsometryCategory, QubitIsometryCategory,
                       injection_to_isometry, random_isometry)
from .smc import (Functor, ReflectionCategory, check_smc_axioms, reflect_compose, reflect_tensor,
                  rewrite_step, universal_extend)
from .stinespring import (ChoiOracle, StinespringDilation, channel_of_dilation, connect_dilations,
                          connect_padded, connection_residual, dilate, pad_to_power_of_two)
from .tennent import TennentCategory, TennentOracle

ATOL = 1e-9


@dataclass
class SuiteResult:
    suite: str
    passed: bool
    max_deviation: float
    seed: int
    elapsed: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": bool(self.passed),
                "max_deviation": float(self.max_deviation), "seed": int(self.seed)}


def _random_dilation(rng, f_min: StinespringDilation, max_extra: int = 2) -> StinespringDilation:
    """A non-minimal dilation of the same channel via one random rewrite step."""
    b = f_min.ancilla + int(rng.integers(0, max_extra + 1))
    d = rewrite_step(IsometryCategory(), f_min, random_isometry(f_min.ancilla, b, rng))
    return StinespringDilation(d.dom, d.cod, d.ancilla, d.morphism)


def _random_source_dilation(rng, m: int, n: int, a: int) -> StinespringDilation:
    a = max(a, -(-m // n))
    return StinespringDilation(m, n, a, random_isometry(m, n * a, rng))


def stinespring_round_trip(seed: int, dims: int = 4, count: int = 100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst, ok = 0.0, True
    for _ in range(count):
        m, n = (int(x) for x in rng.integers(1, dims + 1, size=2))
        source = _random_source_dilation(rng, m, n, int(rng.integers(1, m * n + 1)))
        f = channel_of_dilation(source)
        d = dilate(f)
        worst = max(worst, cptp.channel_distance(channel_of_dilation(d), f))
        svd_rank = int(np.linalg.matrix_rank(f.choi, tol=1e-8))
        ok &= d.ancilla == svd_rank == min(source.ancilla, m * n)
    return SuiteResult("stinespring_round_trip", ok and worst <= ATOL, worst, seed)


def dilation_uniqueness(seed: int, dims: int = 4, count: int = 100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        m, n = (int(x) for x in rng.integers(1, min(dims, 3) + 1, size=2))
        source = _random_source_dilation(rng, m, n, int(rng.integers(1, m * n + 1)))
        f = channel_of_dilation(source)
        other = _random_dilation(rng, dilate(f))
        conn = connect_dilations(source, other)
        iso_dev = max(np.linalg.norm(v.matrix.conj().T @ v.matrix - np.eye(v.dom))
                      for v in (conn.left, conn.right))
        worst = max(worst, connection_residual(source, other, conn), float(iso_dev))
    return SuiteResult("dilation_uniqueness", worst <= ATOL, worst, seed)


def dilation_formulas(seed: int, dims: int = 4, count: int = 100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    cat = IsometryCategory()
    worst = 0.0
    for _ in range(count):
        m, n, p = (int(x) for x in rng.integers(1, min(dims, 3) + 1, size=3))
        f = cptp.random_channel(m, n, rng)
        g = cptp.random_channel(n, p, rng)
        df, dg = _random_dilation(rng, dilate(f), 1), _random_dilation(rng, dilate(g), 1)
        composite = channel_of_dilation(reflect_compose(cat, dg, df))
        worst = max(worst, cptp.channel_distance(composite, cptp.compose(g, f)))
        q = int(rng.integers(1, 3))
        h = cptp.random_channel(p, q, rng)
        dh = _random_dilation(rng, dilate(h), 1)
        product = channel_of_dilation(reflect_tensor(cat, df, dh))
        worst = max(worst, cptp.channel_distance(product, cptp.tensor(f, h)))
    return SuiteResult("dilation_formulas", worst <= ATOL, worst, seed)


def terminality(seed: int, dims: int = 4, count: int = 50) -> SuiteResult:
    rng = np.random.default_rng(seed)
    oracle = ChoiOracle()
    worst, ok = 0.0, True
    for _ in range(count):
        n = int(rng.integers(1, dims + 1))
        f = channel_of_dilation(_random_source_dilation(rng, n, 1, int(rng.integers(1, n + 3))))
        worst = max(worst, cptp.channel_distance(f, cptp.trace_channel(n)))
        d1 = _random_source_dilation(rng, n, 1, int(rng.integers(1, n + 3)))
        d2 = _random_source_dilation(rng, n, 1, int(rng.integers(1, n + 3)))
        ok &= oracle.equivalent(d1, d2)
        worst = max(worst, oracle.distance(d1, d2))
    return SuiteResult("terminality", ok and worst <= ATOL, worst, seed)


def universal_extension(seed: int, dims: int = 4, count: int = 50) -> SuiteResult:
    rng = np.random.default_rng(seed)
    E = Functor(lambda n: n, cptp.from_isometry, CPTPCategory())
    worst = 0.0
    for _ in range(count):
        m, n = (int(x) for x in rng.integers(1, min(dims, 3) + 1, size=2))
        f = cptp.random_channel(m, n, rng)
        worst = max(worst, cptp.channel_distance(universal_extend(E, f, cptp.trace_channel), f))
    return SuiteResult("universal_extension", worst <= ATOL, worst, seed)


def function_counterexample(seed: int, dims: int = 4) -> SuiteResult:
    report = tennent.function_counterexample_check(trials=20, seed=seed)
    return SuiteResult("function_counterexample", report.passed, report.max_deviation, seed)


def tennent_faithfulness(seed: int, dims: int = 3) -> SuiteResult:
    size = min(dims, 3)
    ok, worst = True, 0.0
    for m in range(1, size + 1):
        for n in range(1, size + 1):
            morphisms = tennent.enumerate_tennent(m, n)
            keys = set()
            for t in morphisms:
                ch = tennent.to_cptp(t)
                worst = max(worst, float(np.abs(ch.choi - np.round(ch.choi.real)).max()))
                ok &= tennent.recover_map(ch) == t.map
                ok &= tennent.recover_relation(ch) == t.relation
                keys.add(np.round(ch.choi.real).astype(np.int8).tobytes())
            ok &= len(keys) == len(morphisms)
    return SuiteResult("tennent_faithfulness", ok and worst <= ATOL, worst, seed)


def tennent_oracle_agreement(seed: int, dims: int = 3) -> SuiteResult:
    size = min(dims, 3)
    ok, worst = True, 0.0
    for m in range(1, size + 1):
        for n in range(1, size + 1):
            dilations = [d for a in range(1, size + 1) if n * a >= m
                         for d in tennent.enumerate_injective_dilations(m, n, a)]
            forms = [tennent.normalize_dilation(d) for d in dilations]
            chois = np.array([
                channel_of_dilation(StinespringDilation(d.dom, d.cod, d.ancilla,
                                                        injection_to_isometry(d.morphism))).choi.reshape(-1)
                for d in dilations])
            labels = {}
            form_ids = np.array([labels.setdefault(nf, len(labels)) for nf in forms])
            for i in range(len(dilations)):
                dist = np.linalg.norm(chois - chois[i], axis=1)
                same_form = form_ids == form_ids[i]
                same_choi = dist <= ATOL
                ok &= bool(np.array_equal(same_form, same_choi))
                # largest distance among pairs judged equal must be exactly zero
                worst = max(worst, float(dist[same_choi].max()))
                ok &= bool(np.all(dist[~same_choi] >= 1.0 - ATOL))
    return SuiteResult("tennent_oracle_agreement", ok and worst <= ATOL, worst, seed)


def qubit_padding(seed: int, dims: int = 4, count: int = 50) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst, ok = 0.0, True
    for _ in range(count):
        m, n = (2 ** int(x) for x in rng.integers(1, 3, size=2))
        f = cptp.random_channel(m, n, rng)
        d = dilate(f)
        padded = pad_to_power_of_two(d)
        ok &= padded.ancilla & (padded.ancilla - 1) == 0 and padded.ancilla >= d.ancilla
        worst = max(worst, cptp.channel_distance(channel_of_dilation(padded), f))
        other = pad_to_power_of_two(_random_dilation(rng, d, 3))
        conn = connect_padded(padded, other)
        ok &= conn.ancilla & (conn.ancilla - 1) == 0
        worst = max(worst, connection_residual(padded, other, conn))
    return SuiteResult("qubit_padding", ok and worst <= ATOL, worst, seed)


def parity_circuit(seed: int, dims: int = 4) -> SuiteResult:
    worst, ok = 0.0, True
    for name in ("parity.qc", "parity_random.qc"):
        circuit = parse_circuit(files("affinecat").joinpath("data").joinpath(name).read_text())
        channel = interpret(circuit)
        left = interpret_pure(circuit.pure_prefix())
        ok &= (channel.dom, channel.cod, left.dom, left.cod) == (4, 4, 4, 8)
        ok &= cptp.is_cptp(channel.choi, 4, 4).ok
        expected = cptp.compose(cptp.partial_trace_channel(4, 2), cptp.from_isometry(left))
        worst = max(worst, cptp.channel_distance(channel, expected),
                    cptp.channel_distance(channel, interpret_via_dilation(circuit)))
    return SuiteResult("parity_circuit", ok and worst <= ATOL, worst, seed)


def smc_categories():
    return [
        (IsometryCategory(), 3),
        (QubitIsometryCategory(), 2),
        (CPTPCategory(), 2),
        (InjectionCategory(), 3),
        (FunctionCategory(), 3),
        (TennentCategory(), 3),
        (ReflectionCategory(IsometryCategory(), ChoiOracle(), max_ancilla=2), 2),
        (ReflectionCategory(InjectionCategory(), TennentOracle(), max_ancilla=2), 3),
    ]


def smc_axioms(seed: int, dims: int = 3, count: int = 200) -> SuiteResult:
    worst, ok, notes = 0.0, True, []
    for cat, max_dim in smc_categories():
        report = check_smc_axioms(cat, seed=seed, count=count, max_dim=min(max_dim, dims), atol=ATOL)
        ok &= report.passed
        worst = max(worst, report.max_deviation)
        notes.append(f"{cat.name}: {report.max_deviation:.2e}")
    return SuiteResult("smc_axioms", ok, worst, seed, notes=notes)


SUITES = {
    "stinespring_round_trip": stinespring_round_trip,
    "dilation_uniqueness": dilation_uniqueness,
    "dilation_formulas": dilation_formulas,
    "terminality": terminality,
    "universal_extension": universal_extension,
    "function_counterexample": function_counterexample,
    "tennent_faithfulness": tennent_faithfulness,
    "tennent_oracle_agreement": tennent_oracle_agreement,
    "qubit_padding": qubit_padding,
    "parity_circuit": parity_circuit,
    "smc_axioms": smc_axioms,
}


def _timed(name, seed, dims):
    start = time.perf_counter()
    try:
        result = SUITES[name](seed, dims)
    except Exception as exc:  # a crashing suite is a failing suite
        result = SuiteResult(name, False, math.inf, seed, notes=[f"{type(exc).__name__}: {exc}"])
    result.elapsed = time.perf_counter() - start
    return result


def run_all(seed: int = 0, dims: int = 4, names=None, workers: int = 1) -> list[SuiteResult]:
    names = list(names or SUITES)
    if workers <= 1:
        return [_timed(n, seed, dims) for n in names]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_timed, names, itertools.repeat(seed), itertools.repeat(dims)))

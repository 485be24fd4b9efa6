import numpy as np
import pytest

from affinecat import cptp
from affinecat.cptp import CPTPCategory
from affinecat.isometry import (FunctionCategory, InjectionCategory, IsometryCategory, IsometryMor,
                                QubitIsometryCategory, canonical_injection, iso_tensor, ket,
                                random_isometry)
from affinecat.smc import (Dilation, Functor, ReflectionCategory, ReflectionMor, check_smc_axioms,
                           reflect_compose, reflect_discard, reflect_embed, reflect_tensor,
                           rewrite_step, universal_extend)
from affinecat.stinespring import ChoiOracle, StinespringDilation, channel_of_dilation, dilate
from affinecat.tennent import TennentCategory, TennentOracle

ISO = IsometryCategory()
ORACLE = ChoiOracle()


def induced(d):
    return channel_of_dilation(StinespringDilation(d.dom, d.cod, d.ancilla, d.morphism))


def random_dilation(rng, m, n, a):
    a = max(a, -(-m // n))
    return Dilation(m, n, a, random_isometry(m, n * a, rng))


class BrokenTensorIsometries(IsometryCategory):
    """Tensor that swaps its factors without the braiding."""

    name = "broken"

    def tensor(self, f, g):
        return iso_tensor(g, f)


@pytest.mark.parametrize("cat, max_dim", [
    (IsometryCategory(), 3), (QubitIsometryCategory(), 2), (CPTPCategory(), 2),
    (InjectionCategory(), 3), (FunctionCategory(), 3), (TennentCategory(), 3),
    (ReflectionCategory(IsometryCategory(), ChoiOracle(), max_ancilla=2), 2),
    (ReflectionCategory(InjectionCategory(), TennentOracle(), max_ancilla=2), 3),
], ids=lambda x: getattr(x, "name", str(x)))
def test_axioms_hold(cat, max_dim):
    report = check_smc_axioms(cat, seed=2, count=50, max_dim=max_dim)
    assert report.passed, report.deviations
    if cat.exact:
        assert report.max_deviation == 0.0


def test_broken_tensor_is_detected():
    report = check_smc_axioms(BrokenTensorIsometries(), seed=0, count=20, max_dim=3)
    assert not report.passed
    assert report.max_deviation > 1e-3


def test_reflect_embed_examples(rng):
    d = reflect_embed(ISO, IsometryMor.from_matrix(np.eye(2)))
    assert (d.ancilla, d.dom, d.cod) == (1, 2, 2)
    d = reflect_embed(ISO, ket(0, 2))
    assert d.ancilla == 1 and np.array_equal(d.morphism.matrix, [[1], [0]])
    v, w = random_isometry(2, 3, rng), random_isometry(3, 3, rng)
    lhs = reflect_compose(ISO, reflect_embed(ISO, w), reflect_embed(ISO, v))
    assert ORACLE.equivalent(lhs, reflect_embed(ISO, ISO.compose(w, v)))
    assert reflect_embed(ISO, v, ORACLE) == ReflectionMor(reflect_embed(ISO, v), ORACLE)


def test_reflect_compose(rng):
    rng = np.random.default_rng(8)
    for _ in range(20):
        m, n, p = (int(x) for x in rng.integers(1, 4, size=3))
        df = random_dilation(rng, m, n, int(rng.integers(1, 3)))
        dg = random_dilation(rng, n, p, int(rng.integers(1, 3)))
        composite = reflect_compose(ISO, dg, df)
        assert composite.ancilla == dg.ancilla * df.ancilla
        expected = cptp.compose(induced(dg), induced(df))
        assert cptp.channel_distance(induced(composite), expected) <= 1e-9
        ident = reflect_embed(ISO, ISO.identity(n))
        assert ORACLE.equivalent(reflect_compose(ISO, ident, df), df)
    # discarding after anything is discarding
    df = random_dilation(rng, 3, 2, 2)
    assert cptp.equal(induced(reflect_compose(ISO, reflect_discard(ISO, 2), df)), cptp.trace_channel(3))
    with pytest.raises(ValueError):
        reflect_compose(ISO, df, df)


def test_reflect_compose_associative_up_to_oracle(rng):
    for _ in range(10):
        d1 = random_dilation(rng, 2, 2, 2)
        d2 = random_dilation(rng, 2, 3, 1)
        d3 = random_dilation(rng, 3, 2, 2)
        left = reflect_compose(ISO, d3, reflect_compose(ISO, d2, d1))
        right = reflect_compose(ISO, reflect_compose(ISO, d3, d2), d1)
        assert ORACLE.equivalent(left, right)


def test_reflect_tensor(rng):
    for _ in range(20):
        m, n, p, q = (int(x) for x in rng.integers(1, 4, size=4))
        df = random_dilation(rng, m, n, int(rng.integers(1, 3)))
        dg = random_dilation(rng, p, q, int(rng.integers(1, 3)))
        product = reflect_tensor(ISO, df, dg)
        expected = cptp.tensor(induced(df), induced(dg))
        assert cptp.channel_distance(induced(product), expected) <= 1e-9
    unit = reflect_embed(ISO, ISO.identity(1))
    out = reflect_tensor(ISO, df, unit)
    assert np.array_equal(out.morphism.matrix, df.morphism.matrix)
    both = reflect_tensor(ISO, reflect_discard(ISO, 2), reflect_discard(ISO, 3))
    assert ORACLE.equivalent(both, reflect_discard(ISO, 6))


def test_reflect_discard():
    d = reflect_discard(ISO, 1)
    assert np.array_equal(d.morphism.matrix, [[1]])
    assert cptp.equal(induced(reflect_discard(ISO, 3)), cptp.trace_channel(3))


def test_terminality_in_reflection():
    rng = np.random.default_rng(4)
    for _ in range(30):
        m = int(rng.integers(1, 5))
        d1 = random_dilation(rng, m, 1, int(rng.integers(1, 6)))
        d2 = random_dilation(rng, m, 1, int(rng.integers(1, 6)))
        assert ORACLE.equivalent(d1, d2)


def test_rewrite_step(rng):
    d = random_dilation(rng, 2, 2, 2)
    same = rewrite_step(ISO, d, ISO.identity(2))
    assert np.array_equal(same.morphism.matrix, d.morphism.matrix)
    padded = rewrite_step(ISO, d, canonical_injection(2, 4))
    assert padded.ancilla == 4 and ORACLE.equivalent(d, padded)
    with pytest.raises(ValueError):
        rewrite_step(ISO, d, ISO.identity(3))


def test_oracle_sound_on_random_rewrites():
    rng = np.random.default_rng(9)
    for _ in range(200):
        m, n, a = (int(x) for x in rng.integers(1, 4, size=3))
        d = random_dilation(rng, m, n, a)
        g = random_isometry(d.ancilla, d.ancilla + int(rng.integers(0, 3)), rng)
        assert ORACLE.equivalent(d, rewrite_step(ISO, d, g))


def test_dilation_type_check(rng):
    with pytest.raises(ValueError):
        Dilation(2, 2, 2, random_isometry(2, 3, rng))


E = Functor(lambda n: n, cptp.from_isometry, CPTPCategory())


def test_universal_extend_is_identity_on_channels():
    rng = np.random.default_rng(10)
    for _ in range(50):
        m, n = (int(x) for x in rng.integers(1, 4, size=2))
        f = cptp.random_channel(m, n, rng)
        assert cptp.channel_distance(universal_extend(E, f, cptp.trace_channel), f) <= 1e-9


def test_universal_extend_examples(rng):
    v = random_isometry(2, 3, rng)
    assert cptp.equal(universal_extend(E, cptp.from_isometry(v), cptp.trace_channel), cptp.from_isometry(v))
    assert cptp.equal(universal_extend(E, cptp.trace_channel(3), cptp.trace_channel), cptp.trace_channel(3))


def test_universal_extend_rejects_non_monoidal_functor(rng):
    def scrambled(v):
        # conjugates by a fixed non-trivial unitary on dimension 4 only
        if v.dom == 4:
            u = random_isometry(4, 4, 0).matrix
            return cptp.from_isometry(IsometryMor.from_matrix(u @ v.matrix @ u.conj().T))
        return cptp.from_isometry(v)

    bad = Functor(lambda n: n, scrambled, CPTPCategory())
    f = cptp.random_channel(2, 2, rng, kraus_rank=2)
    with pytest.raises(ValueError):
        universal_extend(bad, f, cptp.trace_channel)


def test_reflection_category_discard_is_terminal(rng):
    cat = ReflectionCategory(ISO, ORACLE)
    f = cat.random_morphism(rng, 2, 3)
    lhs = cat.compose(cat.discard(3), f)
    assert cat.equal(lhs, cat.discard(2))

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mvmourre.errors import ConfigError, DomainError
from mvmourre.gfun import (ConjugateOperator, G, G_prime, ModelConfig, g2, g2_prime, g3, m)

C4 = math.cos(math.pi / 4)
E1 = (math.sqrt(5) - 1) / 2
RHO8 = (17 + 8 * math.sqrt(5)) / 62
BAND1 = ConjugateOperator(4, (1, 2), (1.0, RHO8))


def fd(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_m():
    assert m(1) == 0 and m(0) == 1
    assert m(C4) == pytest.approx(0.5)


def test_config_rejects_odd_kappa():
    with pytest.raises(ConfigError):
        ModelConfig(kappa=3)
    with pytest.raises(ConfigError):
        ModelConfig(kappa=4, dimension=5)
    assert ModelConfig(kappa=4).kappa == 4


def test_operator_invariants():
    with pytest.raises(ConfigError):
        ConjugateOperator(4, (2, 3), (1.0, 1.0))
    with pytest.raises(ConfigError):
        ConjugateOperator(4, (1, 1), (1.0, 1.0))
    with pytest.raises(ConfigError):
        ConjugateOperator(4, (1, 2), (2.0, 1.0))
    with pytest.raises(ConfigError):
        ConjugateOperator(4, (1, 2), (1.0,))
    op = ConjugateOperator.from_dict(BAND1.to_dict())
    assert op == BAND1


def test_g2_examples():
    assert g2(C4, 1, 4, C4) == pytest.approx(0, abs=1e-14)
    assert g2(0.5, 1, 4, 1.0) == pytest.approx(-0.75)
    E, t = 0.6, 1.1
    assert g2(E, 2, 4, math.sqrt(E) * t) == pytest.approx(g2(E, 2, 4, math.sqrt(E) / t), abs=1e-12)


def test_g2_domain():
    with pytest.raises(DomainError):
        g2(0.5, 1, 4, 0.3)
    with pytest.raises(DomainError):
        g2(0.5, 1, 4, 0.0)


def test_g2_prime_examples():
    assert g2_prime(0.6, 1, 4, math.sqrt(0.6)) == pytest.approx(0, abs=1e-12)
    assert g2_prime(0.55, 2, 4, 0.8) == pytest.approx(fd(lambda t: g2(0.55, 2, 4, t), 0.8), rel=1e-6)
    E, x = 0.61, 0.9
    assert x * g2_prime(E, 1, 6, x) + (E / x) * g2_prime(E, 1, 6, E / x) == pytest.approx(0, abs=1e-11)


def test_g3_examples():
    assert g3(C4 * C4, 3, 4, C4, C4) == pytest.approx(0, abs=1e-13)
    assert g3(0.5, 1, 4, 1.0, 1.0) == pytest.approx(-0.75)
    rng = random.Random(1)
    for _ in range(100):
        E = rng.uniform(0.05, 0.9)
        y = rng.uniform(math.sqrt(E), 1)
        x = rng.uniform(E / y, 1)
        if abs(E / x) > 1:
            continue
        j, k = rng.randint(1, 4), rng.choice([4, 6, 8])
        assert g3(E, j, k, x, y) == pytest.approx(g3(E, j, k, y, x), abs=1e-12)


def test_g3_domain():
    with pytest.raises(DomainError):
        g3(0.5, 1, 4, 0.6, 0.6)


def test_G_reduces_to_g2():
    op = ConjugateOperator.trivial(6)
    for x in (0.5, 0.7, 0.95):
        assert G(op, 0.4, x) == g2(0.4, 1, 6, x)
        assert G_prime(op, 0.4, x) == g2_prime(0.4, 1, 6, x)


def test_band1_operator_vanishes_at_sqrt_E1():
    assert G(BAND1, E1, math.sqrt(E1)) == pytest.approx(0, abs=1e-10)


def test_G_even_and_symmetric():
    rng = random.Random(2)
    ops = [BAND1, ConjugateOperator(6, (1, 3, 4), (1.0, -0.3, 0.7))]
    for _ in range(100):
        op = rng.choice(ops)
        E = rng.uniform(0.05, 0.95)
        x = rng.uniform(E, 1)
        assert G(op, E, -x) == pytest.approx(G(op, E, x), abs=1e-12)
        t = rng.uniform(1, 1 / math.sqrt(E))
        s = math.sqrt(E)
        assert G(op, E, s * t) == pytest.approx(G(op, E, s / t), abs=1e-11)
        assert G_prime(op, E, s) == pytest.approx(0, abs=1e-11)
        x = rng.uniform(E + 1e-3, 1 - 1e-3)
        assert G_prime(op, E, x) == pytest.approx(fd(lambda u: G(op, E, u), x), rel=1e-6, abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([4, 6, 8, 10]), st.data())
def test_vanishing_on_cosine_products(k, data):
    a = data.draw(st.integers(1, k - 1))
    b = data.draw(st.integers(1, k - 1))
    xa, xb = math.cos(a * math.pi / k), math.cos(b * math.pi / k)
    E = xa * xb
    if abs(E) < 1e-6:
        return
    for j in range(1, 6):
        assert abs(g2(E, j, k, xa)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([4, 6, 8]), st.integers(1, 5), st.floats(0.01, 0.99), st.floats(0, 1))
def test_odd_in_energy(k, j, E, s):
    x = E + s * (1 - E)
    assert g2(-E, j, k, -x) == pytest.approx(-g2(E, j, k, x), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([4, 6]), st.integers(1, 3), st.floats(0.05, 0.9), st.floats(0.05, 0.95))
def test_polynomial_smoothness(k, j, E, s):
    # x * g2 is a Laurent polynomial: its third differences shrink like h^3
    x = E + s * (1 - E)
    h = 1e-3 * min(x - E, 1 - x, 0.05) if 0 < x - E and x < 1 else 0
    if h <= 0:
        return
    f = lambda u: u * g2(E, j, k, u)
    second = f(x + h) - 2 * f(x) + f(x - h)
    predicted = 0.5 * (f(x + 2 * h) - 2 * f(x + h) + f(x) + f(x) - 2 * f(x - h) + f(x - 2 * h))
    assert abs(second - predicted) <= 1e-9

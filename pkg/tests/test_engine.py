import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from casimir_scatter import engine
from casimir_scatter.errors import ConvergenceError, DomainError, NoisyStencilError, SingularRoundTripError
from casimir_scatter.model import EnergyResult


def _contraction(rng, n, radius=0.9):
    a = rng.standard_normal((n, n))
    return radius * a / max(1e-300, np.max(np.abs(np.linalg.eigvals(a))))


@pytest.mark.parametrize("n", [1, 3, 8, 25])
def test_logdet_matches_eigenvalues(n):
    rng = np.random.default_rng(n)
    N = _contraction(rng, n)
    want = np.sum(np.log(1 - np.linalg.eigvals(N))).real
    assert engine.logdet_i_minus(N) == pytest.approx(want, rel=1e-10, abs=1e-12)


@given(arrays(float, (4, 4), elements=st.floats(-0.2, 0.2)))
def test_logdet_symmetric_oracle(a):
    sym = 0.5 * (a + a.T)
    want = float(np.sum(np.log1p(-np.linalg.eigvalsh(sym))))
    assert engine.logdet_i_minus(sym) == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_logdet_of_positive_semidefinite_contraction_is_negative():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((6, 6))
    N = b @ b.T
    N *= 0.8 / np.linalg.eigvalsh(N).max()
    assert engine.logdet_i_minus(N) < 0


def test_logdet_edge_cases():
    assert engine.logdet_i_minus(np.zeros((3, 3))) == 0.0
    assert engine.logdet_i_minus(np.zeros((0, 0))) == 0.0
    with pytest.raises(SingularRoundTripError):
        engine.logdet_i_minus(np.eye(2))
    with pytest.raises(SingularRoundTripError):
        engine.logdet_i_minus(2 * np.eye(1))
    with pytest.raises(SingularRoundTripError):
        engine.logdet_i_minus(np.array([[np.nan]]))
    with pytest.raises(DomainError):
        engine.logdet_i_minus(np.ones(3))


def test_logdet_ratio_two_blocks():
    rng = np.random.default_rng(1)
    A = np.eye(3) + 0.1 * rng.standard_normal((3, 3))
    D = np.eye(2) + 0.1 * rng.standard_normal((2, 2))
    B = 0.2 * rng.standard_normal((3, 2))
    C = 0.2 * rng.standard_normal((2, 3))
    N = np.linalg.solve(A, B) @ np.linalg.solve(D, C)
    assert engine.logdet_ratio([[A, B], [C, D]]) == pytest.approx(engine.logdet_i_minus(N), rel=1e-12)


def test_gauss_legendre_is_cached_and_read_only():
    x, w = engine.gauss_legendre(12)
    assert engine.gauss_legendre(12)[0] is x
    with pytest.raises(ValueError):
        x[0] = 0.0
    assert w.sum() == pytest.approx(2.0)


@pytest.mark.parametrize("transform, tol", [("rational", 1e-12), ("exponential", 1e-8)])
def test_half_line_quadrature(transform, tol):
    spec = engine.QuadratureSpec(nodes=16, transform=transform, scale=1.0, tol=tol)
    v, err, n = engine.integrate_half_line(lambda x: x * math.exp(-2 * x), spec)
    assert v == pytest.approx(0.25, rel=10 * tol)
    assert err <= tol * 0.25


def test_quadrature_convergence_failure():
    spec = engine.QuadratureSpec(nodes=4, max_nodes=8, tol=1e-15)
    with pytest.raises(ConvergenceError) as info:
        engine.integrate_half_line(lambda x: math.sin(50 * x) * math.exp(-x), spec)
    assert len(info.value.estimates) == 2


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        engine.QuadratureSpec(transform="tanh")
    with pytest.raises(DomainError):
        engine.QuadratureSpec(nodes=64, max_nodes=32)


def test_zero_temperature_prefactor():
    spec = engine.QuadratureSpec(nodes=32, tol=1e-12)
    r = engine.integrate_zero_t(lambda k: math.exp(-k), spec)
    assert r.value == pytest.approx(1.0 / (2 * math.pi), rel=1e-11)


def test_matsubara_sum_geometric_series():
    T = 0.3
    a = 0.5
    f = lambda k: math.exp(-a * k)
    q = math.exp(-a * 2 * math.pi * T)
    exact = T * (0.5 * math.exp(-a * engine.KAPPA_MIN) + q / (1 - q))
    r = engine.matsubara_sum(f, T, tol=1e-14)
    assert r.value == pytest.approx(exact, rel=1e-12)
    fixed = engine.matsubara_sum(f, T, cutoff=3)
    assert fixed.value == pytest.approx(T * (0.5 * f(engine.KAPPA_MIN) + q + q * q), rel=1e-14)


def test_matsubara_high_temperature_is_zero_mode():
    f = lambda k: math.exp(-k)
    r = engine.matsubara_sum(f, 50.0)
    assert r.value == pytest.approx(50.0 * 0.5, rel=1e-8)


def test_matsubara_validation_and_failure():
    with pytest.raises(DomainError):
        engine.matsubara_sum(lambda k: 1.0, 0.0)
    with pytest.raises(ConvergenceError):
        engine.matsubara_sum(lambda k: 1.0, 1.0, max_terms=32)


def test_ordered_map_preserves_order():
    out = engine.ordered_map(lambda x: x * x, range(20), workers=4)
    assert out == [x * x for x in range(20)]


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("CASIMIR_THREADS", "3")
    assert engine.worker_count() == 3
    monkeypatch.setenv("CASIMIR_THREADS", "many")
    with pytest.raises(DomainError):
        engine.worker_count()


def test_quadrature_identical_across_workers():
    spec = engine.QuadratureSpec(nodes=32, tol=1e-9)
    f = lambda x: math.exp(-x) * math.cos(x)
    a = engine.integrate_half_line(f, spec, workers=1)
    b = engine.integrate_half_line(f, spec, workers=5)
    assert a == b


def test_geometric_extrapolation_is_exact_for_geometric_sequences():
    orders = [10, 20, 30]
    vals = [2.0 + 3.0 * 0.5 ** (n / 10) for n in orders]
    assert engine.extrapolate(orders, vals) == pytest.approx(2.0, rel=1e-14)


def test_algebraic_extrapolation():
    orders = [40, 80]
    vals = [1.0 + 5.0 / n ** 2 for n in orders]
    assert engine.extrapolate(orders, vals, model="algebraic") == pytest.approx(1.0, rel=1e-14)


def test_extrapolation_guards():
    assert engine.extrapolate([1, 2, 3], [1.0, 2.0, 4.0]) == 4.0  # diverging
    assert engine.extrapolate([1, 2], [1.0, 2.0]) == 2.0
    with pytest.raises(DomainError):
        engine.extrapolate([1, 2, 4], [1.0, 1.5, 1.75])
    with pytest.raises(DomainError):
        engine.extrapolate([1, 2, 3], [1.0, 1.5, 1.75], model="pade")


def test_converge_truncation():
    calls = []

    def solver(n):
        calls.append(n)
        return EnergyResult(-1.0 - 2.0 ** (-n), n, 1e-9)

    r = engine.converge_truncation(solver, 4, 1e-3)
    assert r.value == pytest.approx(-1.0, abs=1e-6)
    assert calls == [4, 8, 12, 16]
    with pytest.raises(ConvergenceError):
        engine.converge_truncation(lambda n: 1.0 / n, 1, 1e-12, n_cap=5)


def test_central_derivative():
    assert engine.central_derivative(math.sin, 0.7) == pytest.approx(math.cos(0.7), rel=1e-11)
    with pytest.raises(NoisyStencilError):
        engine.central_derivative(lambda x: 1.0 + 1e-16 * x, 1.0, noise=1e-12)

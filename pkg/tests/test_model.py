import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from casimir_scatter.errors import DomainError, ExtrapolationError
from casimir_scatter.model import (
    PERFECT_CONDUCTOR,
    VACUUM,
    Constant,
    CylinderPlate,
    EnergyResult,
    FrequencyGrid,
    Medium,
    ParabolaPlate,
    PolarizabilityTensor,
    Tabulated,
    TwoCylinders,
    depolarizing_factors,
    eval_material,
    load_material_table,
    rotation,
    spheroid_polarizability,
)


def test_perfect_conductor_sentinel():
    r = eval_material(PERFECT_CONDUCTOR, 1.0)
    assert r.perfect and math.isinf(r.eps)


def test_constant_validation():
    assert eval_material(Constant(2.5, 1.5), 3.0) == (2.5, 1.5, False)
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(DomainError):
            Constant(bad)
    with pytest.raises(DomainError):
        eval_material(Constant(2.0), 0.0)


def test_tabulated_reproduces_nodes_exactly():
    k = (0.1, 0.5, 2.0, 9.0)
    e = (7.0, 4.0, 2.2, 1.1)
    t = Tabulated(k, e, (1.0,) * 4)
    for ki, ei in zip(k, e):
        assert eval_material(t, ki).eps == ei


@given(st.floats(0.1, 9.0))
def test_tabulated_is_monotone_between_monotone_nodes(kappa):
    t = Tabulated((0.1, 0.5, 2.0, 9.0), (7.0, 4.0, 2.2, 1.1), (1.0, 1.0, 1.0, 1.0))
    e = eval_material(t, kappa).eps
    assert 1.1 <= e <= 7.0


def test_tabulated_extrapolation_policy():
    t = Tabulated((1.0, 2.0), (3.0, 2.0), (1.0, 1.0))
    with pytest.raises(ExtrapolationError):
        eval_material(t, 5.0)
    held = Tabulated((1.0, 2.0), (3.0, 2.0), (1.0, 1.0), extrapolate=True)
    assert eval_material(held, 5.0).eps == 2.0
    assert eval_material(held, 0.01).eps == 3.0


def test_tabulated_validation():
    with pytest.raises(DomainError):
        Tabulated((1.0,), (2.0,), (1.0,))
    with pytest.raises(DomainError):
        Tabulated((2.0, 1.0), (2.0, 2.0), (1.0, 1.0))
    with pytest.raises(DomainError):
        Tabulated((1.0, 2.0), (2.0, -1.0), (1.0, 1.0))


def test_load_material_table(tmp_path):
    f = tmp_path / "gold.txt"
    f.write_text("# kappa eps\n0.1, 50\n1.0 10  # comment\n\n10 2 1.5\n")
    t = load_material_table(f)
    assert t.kappa == (0.1, 1.0, 10.0)
    assert t.mu == (1.0, 1.0, 1.5)
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3 4\n")
    with pytest.raises(DomainError):
        load_material_table(bad)


def test_medium():
    assert VACUUM.is_vacuum and VACUUM.index(1.0) == 1.0
    m = Medium(Constant(4.0, 2.25))
    assert m.index(0.3) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        Medium(PERFECT_CONDUCTOR)


def test_matsubara_grid():
    g = FrequencyGrid.matsubara(0.1, 4)
    assert g.weights[0] == 0.5 and np.all(g.weights[1:] == 1.0)
    assert g.kappa[2] == pytest.approx(2 * math.pi * 0.1 * 2)
    assert g.kappa[0] > 0
    with pytest.raises(DomainError):
        FrequencyGrid.matsubara(0.0, 3)


def test_zero_temperature_grid_validation():
    FrequencyGrid.zero_temperature([0.5, 1.0], [0.2, 0.3])
    with pytest.raises(DomainError):
        FrequencyGrid.zero_temperature([0.0, 1.0], [0.2, 0.3])


def test_polarizability_symmetry_and_immutability():
    with pytest.raises(DomainError):
        PolarizabilityTensor(np.array([[1, 2, 0], [0, 1, 0], [0, 0, 1.0]]), np.eye(3))
    p = PolarizabilityTensor.isotropic(2.0, -1.0)
    with pytest.raises(ValueError):
        p.electric[0, 0] = 5.0


@given(st.floats(0, math.pi), st.floats(-math.pi, math.pi))
def test_rotation_is_orthogonal_and_preserves_trace(theta, psi):
    r = rotation(theta, psi)
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-14)
    p = PolarizabilityTensor(np.diag([1.0, 2.0, 5.0]), np.diag([-0.5, -0.5, -1.0]))
    q = p.rotated(r)
    assert np.trace(q.electric) == pytest.approx(8.0)
    assert np.trace(q.magnetic) == pytest.approx(-2.0)


@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0))
def test_depolarizing_factors_sum_to_one(R, L):
    n = depolarizing_factors(R, L)
    assert sum(n) == pytest.approx(1.0, rel=1e-13)
    assert all(0 < x < 1 for x in n)


def test_depolarizing_branches_join_smoothly():
    # the series is used for |e^2| < 0.1; compare across the switch
    below = depolarizing_factors(1.0, 2.0 / math.sqrt(1 - 0.0999999))[2]
    above = depolarizing_factors(1.0, 2.0 / math.sqrt(1 - 0.1000001))[2]
    assert below == pytest.approx(above, rel=1e-6)
    assert depolarizing_factors(1.0, 2.0)[2] == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_sphere_polarizability():
    p = spheroid_polarizability(1.0, 2.0, PERFECT_CONDUCTOR)
    assert np.allclose(p.electric, np.eye(3), rtol=1e-13)
    assert np.allclose(p.magnetic, -0.5 * np.eye(3), rtol=1e-13)
    d = spheroid_polarizability(1.0, 2.0, 3.0)
    assert np.allclose(d.electric, (3 - 1) / (3 + 2) * np.eye(3), rtol=1e-13)


def test_limiting_shapes():
    # thin disk: alpha_par -> 4R^3/3pi, beta_z -> -2R^3/3pi
    disk = spheroid_polarizability(1.0, 1e-6, PERFECT_CONDUCTOR)
    assert disk.electric[0, 0] == pytest.approx(4 / (3 * math.pi), rel=1e-5)
    assert disk.magnetic[2, 2] == pytest.approx(-2 / (3 * math.pi), rel=1e-5)
    # long needle: alpha_z ~ L^3 / (24 (ln(L/R) - 1))
    L = 1e6
    needle = spheroid_polarizability(1.0, L, PERFECT_CONDUCTOR)
    assert needle.electric[2, 2] == pytest.approx(L ** 3 / (24 * (math.log(L) - 1)), rel=1e-2)


def test_energy_result_arithmetic():
    a = EnergyResult(-1.0, 10, 1e-6, 2e-6)
    b = EnergyResult(-0.5, 12, 1e-7, 0.0)
    s = a + b
    assert s.value == -1.5 and s.truncation_order == 12
    assert s.quadrature_error == pytest.approx(1.1e-6)
    t = a.scaled(-2.0)
    assert t.value == 2.0 and t.quadrature_error == pytest.approx(2e-6)
    with pytest.raises(DomainError):
        EnergyResult(math.nan)


def test_geometry_descriptors():
    assert TwoCylinders(1.0, 3.0).with_separation(4.0).d == 4.0
    assert CylinderPlate(1.0, 2.0).separation == 2.0
    p = ParabolaPlate(1.0, 0.6)
    assert p.H == pytest.approx(0.1)
    for bad in (lambda: TwoCylinders(1.0, 2.0), lambda: CylinderPlate(1.0, 1.0),
                lambda: ParabolaPlate(1.0, 0.5), lambda: ParabolaPlate(0.0, 1.0, math.pi / 2)):
        with pytest.raises(DomainError):
            bad()

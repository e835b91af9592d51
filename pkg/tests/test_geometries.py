import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from casimir_scatter import geometries as g
from casimir_scatter.engine import QuadratureSpec
from casimir_scatter.errors import DomainError, UnsupportedFeatureError
from casimir_scatter.model import (
    Constant,
    CylinderPlate,
    Medium,
    ParabolaPlate,
    Tabulated,
    TwoCylinders,
)


def _t(n, x, pol):
    if pol == "E":
        return -special.iv(n, x) / special.kv(n, x)
    return -special.ivp(n, x) / special.kvp(n, x)


def _two_cyl_oracle(p, R, d, nmax, pol):
    ns = range(-nmax, nmax + 1)
    T = np.diag([_t(abs(n), p * R, pol) for n in ns])
    K = np.array([[special.kv(abs(a + b), p * d) for b in ns] for a in ns])
    N = T @ K @ T @ K
    sign, val = np.linalg.slogdet(np.eye(len(ns)) - N)
    assert sign > 0
    return val


def _plate_oracle(p, R, H, nmax, pol):
    ns = range(-nmax, nmax + 1)
    N = np.array([[abs(_t(abs(a), p * R, pol)) * special.kv(abs(a + b), 2 * p * H) for b in ns] for a in ns])
    return np.linalg.slogdet(np.eye(len(ns)) - N)[1]


@pytest.mark.parametrize("pol", ["E", "M"])
@pytest.mark.parametrize("p", [0.05, 0.6, 3.0])
def test_two_cylinder_logdet_against_unbalanced_product(pol, p):
    assert g.two_cylinders_logdet(p, 1.0, 2.5, 8, pol) == pytest.approx(_two_cyl_oracle(p, 1.0, 2.5, 8, pol), rel=1e-10)


@pytest.mark.parametrize("pol", ["E", "M"])
@pytest.mark.parametrize("p", [0.05, 0.6, 3.0])
def test_cylinder_plate_logdet_against_image_construction(pol, p):
    assert g.cylinder_plate_logdet(p, 1.0, 1.4, 8, pol) == pytest.approx(_plate_oracle(p, 1.0, 1.4, 8, pol), rel=1e-10)


def test_two_cylinder_energy_against_direct_quadrature():
    R, d, nmax = 1.0, 3.0, 6
    want = 0.0
    for pol in ("E", "M"):
        want += integrate.quad(lambda p: p * _two_cyl_oracle(p, R, d, nmax, pol), 0, 40.0,
                               epsabs=0, epsrel=1e-10, limit=200)[0] / (4 * math.pi)
    got = g.two_cylinders_energy(R, d, g.SolveOptions(nmax=nmax, quad=QuadratureSpec(nodes=32, tol=1e-10)))
    assert got.value == pytest.approx(want, rel=1e-8)


def test_polarizations_add_up():
    o = dict(nmax=5)
    e = g.cylinder_plate_energy(1.0, 2.0, g.SolveOptions(polarization="E", **o)).value
    m = g.cylinder_plate_energy(1.0, 2.0, g.SolveOptions(polarization="M", **o)).value
    t = g.cylinder_plate_energy(1.0, 2.0, g.SolveOptions(**o)).value
    assert e + m == pytest.approx(t, rel=1e-7)
    assert e < 0 and m < 0


@settings(max_examples=8)
@given(st.floats(2.3, 8.0), st.floats(0.05, 1.0))
def test_two_cylinder_energy_negative_and_monotone(d, dd):
    o = g.SolveOptions(nmax=8)
    e1 = g.two_cylinders_energy(1.0, d, o).value
    e2 = g.two_cylinders_energy(1.0, d + dd, o).value
    assert e1 < e2 < 0


@settings(max_examples=8)
@given(st.floats(1.2, 6.0), st.floats(0.05, 1.0))
def test_cylinder_plate_energy_negative_and_monotone(H, dH):
    o = g.SolveOptions(nmax=8)
    assert g.cylinder_plate_energy(1.0, H, o).value < g.cylinder_plate_energy(1.0, H + dH, o).value < 0


def test_automatic_truncation_reports_order_and_error():
    r = g.two_cylinders_energy(1.0, 2.5, g.SolveOptions(trunc_tol=1e-6))
    assert r.truncation_order >= 8
    assert 0 <= r.truncation_error <= 1e-5 * abs(r.value)


def test_medium_divides_by_refractive_index():
    o = dict(nmax=6)
    vac = g.two_cylinders_energy(1.0, 3.0, g.SolveOptions(**o)).value
    water = g.two_cylinders_energy(1.0, 3.0, g.SolveOptions(medium=Medium(Constant(1.69, 1.0)), **o)).value
    assert water == pytest.approx(vac / 1.3, rel=1e-12)


def test_dispersive_medium_is_rejected():
    table = Tabulated((0.1, 10.0), (2.0, 1.5), (1.0, 1.0))
    with pytest.raises(UnsupportedFeatureError):
        g.two_cylinders_energy(1.0, 3.0, g.SolveOptions(nmax=4, medium=Medium(table)))


def test_high_temperature_is_classical_zero_mode():
    # T -> inf: E ~ T/2 * (zero-mode kz integral)/pi, linear in T
    o = dict(nmax=6, polarization="M")
    a = g.two_cylinders_energy(1.0, 2.5, g.SolveOptions(temperature=20.0, **o)).value
    b = g.two_cylinders_energy(1.0, 2.5, g.SolveOptions(temperature=40.0, **o)).value
    assert b / a == pytest.approx(2.0, rel=1e-3)


# ---------------------------------------------------------------- dielectric plate

@pytest.mark.parametrize("alpha", [0.01, 0.3, 1.2])
def test_coupled_solver_reproduces_perfect_plate(alpha):
    p, R, H, nmax = 0.9, 1.0, 1.5, 6
    kappa, kz = p * math.cos(alpha), p * math.sin(alpha)
    coupled = g.dielectric_plate_logdet(kappa, kz, R, H, nmax, None, None)
    split = g.cylinder_plate_logdet(p, R, H, nmax, "E") + g.cylinder_plate_logdet(p, R, H, nmax, "M")
    assert coupled == pytest.approx(split, rel=1e-10)


def test_large_permittivity_approaches_perfect_plate():
    p, R, H, nmax = 0.9, 1.0, 1.5, 6
    kappa, kz = p * math.cos(0.5), p * math.sin(0.5)
    perfect = g.dielectric_plate_logdet(kappa, kz, R, H, nmax, None, None)
    errs = [abs(g.dielectric_plate_logdet(kappa, kz, R, H, nmax, eps, 1.0) / perfect - 1) for eps in (1e4, 1e6, 1e8)]
    # Fresnel coefficients approach -1 and +1 like 1/sqrt(eps)
    assert errs[0] / errs[1] == pytest.approx(10.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(10.0, rel=0.01)


def test_index_matched_plate_gives_zero():
    assert g.dielectric_plate_logdet(0.5, 0.2, 1.0, 1.5, 4, 1.0, 1.0) == 0.0


def test_dielectric_plate_energy_between_zero_and_perfect():
    o = dict(nmax=4, angle_nodes=8)
    perfect = g.cylinder_plate_energy(1.0, 2.0, g.SolveOptions(nmax=4)).value
    diel = g.cylinder_plate_energy(1.0, 2.0, g.SolveOptions(plate=Constant(4.0), **o)).value
    assert perfect < diel < 0


def test_dielectric_plate_restrictions():
    with pytest.raises(DomainError):
        g.cylinder_plate_energy(1.0, 2.0, g.SolveOptions(nmax=2, plate=Constant(3.0), polarization="E"))
    with pytest.raises(UnsupportedFeatureError):
        g.cylinder_plate_energy(1.0, 2.0, g.SolveOptions(nmax=2, plate=Constant(3.0), temperature=0.1))


# ---------------------------------------------------------------- parabola

def test_knife_edge_scales_as_inverse_square():
    o = g.SolveOptions(nmax=20)
    e1 = g.parabola_plate_energy(0.0, 1.0, 0.0, o).value
    e2 = g.parabola_plate_energy(0.0, 2.0, 0.0, o).value
    assert e2 * 4.0 == pytest.approx(e1, rel=1e-6)


def test_knife_edge_force_from_inverse_square_law():
    geo = ParabolaPlate(0.0, 1.0)
    o = g.SolveOptions(nmax=20)
    e = g.energy(geo, o).value
    f = g.force(geo, o)
    assert f == pytest.approx(2.0 * e / geo.H, rel=1e-2)
    assert f < 0


def test_knife_edge_value_at_moderate_order():
    e = g.parabola_plate_energy(0.0, 1.0, 0.0, g.SolveOptions(nmax=40)).value
    assert -e == pytest.approx(0.0067415, rel=2e-3)


def test_parabola_tilt_is_symmetric():
    o = g.SolveOptions(nmax=12)
    assert g.parabola_plate_energy(0.0, 1.0, 0.3, o).value == pytest.approx(
        g.parabola_plate_energy(0.0, 1.0, -0.3, o).value, rel=1e-10)


def test_parabola_matrix_is_finite_for_wide_parabola():
    m = g.parabola_plate_matrix(2.0, 1.0, 0.6, 0.0, 30, "M")
    assert np.all(np.isfinite(m))


def test_parabola_energy_negative_and_monotone_in_distance():
    o = g.SolveOptions(nmax=16)
    vals = [g.parabola_plate_energy(1.0, d, 0.0, o).value for d in (0.7, 1.0, 1.5)]
    assert vals[0] < vals[1] < vals[2] < 0


# ---------------------------------------------------------------- dispatch and forces

def test_force_matches_energy_difference():
    geo = TwoCylinders(1.0, 3.0)
    o = g.SolveOptions(nmax=8)
    f = g.force(geo, o)
    fixed = g.SolveOptions(nmax=8, adaptive=False, quad=QuadratureSpec(nodes=64, scale=1.0, tol=1e-7))
    h = 1e-3
    fd = -(g.two_cylinders_energy(1.0, 3.0 + h, fixed).value - g.two_cylinders_energy(1.0, 3.0 - h, fixed).value) / (2 * h)
    assert f == pytest.approx(fd, rel=1e-5)
    assert f < 0


def test_plate_force_is_attractive():
    assert g.force(CylinderPlate(1.0, 1.5), g.SolveOptions(nmax=8)) < 0


def test_energy_dispatch_and_validation():
    with pytest.raises(DomainError):
        g.energy("two cylinders")
    with pytest.raises(DomainError):
        g.SolveOptions(polarization="TE")
    with pytest.raises(DomainError):
        g.two_cylinders_energy(1.0, 1.9)


def test_far_cylinder_pair_e_mode_against_high_precision_oracle():
    # only the n = 0 channel matters at d/R = 1000
    mp.mp.dps = 30
    d = mp.mpf(1000)
    f = lambda x: x * mp.log(1 - (mp.besseli(0, x / d) / mp.besselk(0, x / d) * mp.besselk(0, x)) ** 2)
    want = float(mp.quad(f, [0, 1e-6, 1e-3, 0.1, 1, 3, 10, 40]) / (4 * mp.pi) / d ** 2)
    got = g.two_cylinders_energy(1.0, 1000.0, g.SolveOptions(nmax=2, polarization="E")).value
    assert got == pytest.approx(want, rel=1e-4)

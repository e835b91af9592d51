"""Full-numerics Casimir energies for the implemented geometries.

All energies are per unit length ``E / (hbar c L)`` in units of
``1/length^2`` and negative for attraction.  Cylindrical symmetry along z
reduces the frequency integral to polar form::

    E/L = (1/4 pi) int_0^inf p dp  log det(I - N(p)),   p^2 = kappa^2 + k_z^2

whenever the round trip depends on ``p`` only.  A dielectric plate mixes the
two polarizations with a ``(kappa, k_z)`` dependence, and the full polar
double integral over ``(p, alpha)`` is used instead.

Round-trip matrices are assembled in balanced form
``sqrt|T_n| X_{nn'} sqrt|T_n'|`` (a similarity transform of ``T X``), which
keeps every entry O(1) even when ``T_n`` and ``X`` separately overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import specfun
from .engine import (
    QuadratureSpec,
    central_derivative,
    converge_truncation,
    gauss_legendre,
    integrate_half_line,
    logdet_i_minus,
    matsubara_sum,
    ordered_map,
)
from .errors import DomainError, UnsupportedFeatureError
from .model import (
    PERFECT_CONDUCTOR,
    VACUUM,
    Constant,
    CylinderPlate,
    EnergyResult,
    ParabolaPlate,
    PerfectConductor,
    TwoCylinders,
    eval_material,
)
from .scattering import cylinder_log_amplitudes, fresnel_coefficients
from .translation import parabola_plane_log, plate_reflection_matrix

POLARIZATIONS = ("E", "M", "total")


@dataclass(frozen=True)
class SolveOptions:
    """Solver settings.

    Attributes
    ----------
    nmax : int or None
        Truncation order (cylindrical ``n_max`` or parabolic ``nu_max``).
        ``None`` raises the order until ``trunc_tol`` is met.
    trunc_tol : float
        Relative change that ends the truncation search.
    quad : QuadratureSpec or None
        Outer integral; ``None`` picks a scale from the geometry.
    adaptive : bool
        Double quadrature nodes until ``quad.tol`` is met.  Off means a
        single fixed rule (smooth in parameters, used for derivatives).
    polarization : {'E', 'M', 'total'}
    temperature : float
        0 for the zero-temperature integral, otherwise a Matsubara sum.
    medium : Medium
        Background; only constant media are supported.
    plate : material of the plate (cylinder-plate only).
    angle_nodes : int
        Gauss-Legendre nodes in the polar angle (dielectric plate only).
    """

    nmax: int | None = None
    trunc_tol: float = 1e-4
    quad: QuadratureSpec | None = None
    adaptive: bool = True
    polarization: str = "total"
    temperature: float = 0.0
    medium: object = VACUUM
    plate: object = PERFECT_CONDUCTOR
    angle_nodes: int = 16
    workers: int | None = None

    def __post_init__(self):
        if self.polarization not in POLARIZATIONS:
            raise DomainError(f"polarization must be one of {POLARIZATIONS}")
        if self.trunc_tol <= 0:
            raise DomainError("trunc_tol must be positive")
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")
        if self.nmax is not None and self.nmax < 0:
            raise DomainError("nmax must be >= 0")


def _medium_index(opts):
    mat = opts.medium.material
    if not isinstance(mat, Constant):
        raise UnsupportedFeatureError("only frequency-independent media are supported")
    return math.sqrt(mat.eps * mat.mu)


def _pols(opts):
    return ("E", "M") if opts.polarization == "total" else (opts.polarization,)


def _balanced(log_t, log_x, idx_sum):
    """``exp(log_t_i/2 + log_t_j/2 + log_x[|i+j|])`` for signed indices."""
    half = 0.5 * log_t
    return np.exp(half[:, None] + half[None, :] + log_x[idx_sum])


def _signed_index(nmax):
    n = np.arange(-nmax, nmax + 1)
    return np.abs(n), np.abs(n[:, None] + n[None, :])


# --------------------------------------------------------------------------
# Two cylinders
# --------------------------------------------------------------------------

def two_cylinders_logdet(p, R, d, nmax, pol):
    """``log det(I - N^P)`` of two perfectly conducting cylinders at ``p``."""
    absn, idx = _signed_index(nmax)
    _, log_t = cylinder_log_amplitudes(nmax, p * R, pol)
    log_k = specfun.bessel_ik_table(2 * nmax, p * d).log_k
    B = _balanced(log_t[absn], log_k, idx)
    # N = B^2 and det(I - B^2) = det(I - B) det(I + B)
    return logdet_i_minus(B) + logdet_i_minus(-B)


def cylinder_plate_logdet(p, R, H, nmax, pol):
    """``log det(I - N^P)`` of a perfect cylinder above a perfect plate."""
    absn, idx = _signed_index(nmax)
    _, log_t = cylinder_log_amplitudes(nmax, p * R, pol)
    log_k = specfun.bessel_ik_table(2 * nmax, 2.0 * p * H).log_k
    return logdet_i_minus(_balanced(log_t[absn], log_k, idx))


def _polar_energy(logdet, scale, opts, nmax):
    """``(1/4 pi) int p dp logdet(p)`` or its Matsubara counterpart."""
    quad = opts.quad or QuadratureSpec(nodes=48, scale=scale, tol=1e-7)
    if opts.temperature > 0:
        inner = replace(quad, nodes=max(16, quad.nodes // 2))

        def per_kappa(kappa):
            def f(kz):
                return logdet(math.hypot(kappa, kz))

            v, _, _ = _integrate(f, inner, opts)
            return v / math.pi

        r = matsubara_sum(per_kappa, opts.temperature, workers=opts.workers)
        return replace(r, truncation_order=nmax)

    def f(p):
        return p * logdet(p)

    v, err, _ = _integrate(f, quad, opts)
    return EnergyResult(v / (4.0 * math.pi), nmax, err / (4.0 * math.pi), 0.0)


def _integrate(f, quad, opts):
    if opts.adaptive:
        return integrate_half_line(f, quad, opts.workers)
    x, w = quad.rule(quad.nodes)
    vals = ordered_map(f, x, opts.workers)
    return math.fsum(float(a) * float(b) for a, b in zip(w, vals)), 0.0, quad.nodes


def _auto_truncation(energy_at, opts, n_start):
    if opts.nmax is not None:
        return energy_at(opts.nmax)
    return converge_truncation(energy_at, n_start, opts.trunc_tol, step=n_start, n_cap=256)


def _per_polarization(energy_for_pol, opts):
    parts = [energy_for_pol(pol) for pol in _pols(opts)]
    total = parts[0]
    for extra in parts[1:]:
        total = total + extra
    return total


def two_cylinders_energy(R, d, opts=SolveOptions()):
    """Energy per unit length of two perfectly conducting cylinders.

    Parameters
    ----------
    R : float
        Radius of both cylinders.
    d : float
        Distance between the axes (``d > 2R``).
    """
    geo = TwoCylinders(R, d)
    n_index = _medium_index(opts)
    scale = 1.0 / (geo.d - 2.0 * geo.R)

    def for_pol(pol):
        def at(nmax):
            return _polar_energy(lambda p: two_cylinders_logdet(p, R, d, nmax, pol), scale, opts, nmax)

        return _auto_truncation(at, opts, _cyl_start(R, d - 2.0 * R))

    return _per_polarization(for_pol, opts).scaled(1.0 / n_index)


def _cyl_start(R, gap):
    return max(4, min(32, int(math.ceil(2.0 * math.sqrt(R / gap))) + 4))


# --------------------------------------------------------------------------
# Cylinder and plate
# --------------------------------------------------------------------------

def _t_nodes(z, m_max, alpha_scale):
    """Panelled Gauss-Legendre nodes for ``int dt exp(-z cosh t - m t)``."""
    # cut where the worst exponent has dropped by 46 below its peak
    grid = np.linspace(0.0, 40.0, 8001)
    expo = -z * np.cosh(grid) + m_max * grid
    peak = expo.max()
    beyond = np.nonzero((expo < peak - 46.0) & (grid > grid[np.argmax(expo)]))[0]
    T = grid[beyond[0]] if beyond.size else grid[-1]
    breaks = {0.0, T}
    for k in (1.0, 4.0, 16.0):
        b = math.asinh(k * alpha_scale)
        if b < T:
            breaks.add(b)
    pts = sorted(breaks)
    fine = []
    for a, b in zip(pts[:-1], pts[1:]):
        n_sub = max(1, int(math.ceil((b - a) / 0.5)))
        fine.extend(np.linspace(a, b, n_sub + 1)[:-1])
    fine.append(T)
    edges = np.array(sorted(set(fine)))
    edges = np.concatenate([-edges[::-1], edges[1:]])
    x, w = gauss_legendre(16)
    lo, hi = edges[:-1, None], edges[1:, None]
    t = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    wt = 0.5 * (hi - lo) * w[None, :]
    return t.ravel(), wt.ravel()


def dielectric_plate_logdet(kappa, kz, R, H, nmax, eps_rel, mu_rel):
    """``log det(I - N)`` of a perfect cylinder and a dielectric plate.

    E and M channels are coupled by the plate; the matrix has dimension
    ``2 (2 nmax + 1)``.  ``eps_rel``/``mu_rel`` may be ``None`` for a
    perfectly conducting plate.
    """
    p = math.hypot(kappa, kz)
    z = 2.0 * p * H
    t, wt = _t_nodes(z, 2 * nmax, kz / p)
    kx = p * np.sinh(t)
    if eps_rel is None:
        r_e, r_m = 1.0, -1.0
    else:
        q = p * np.cosh(t)
        r_e, r_m = fresnel_coefficients(eps_rel, mu_rel, kappa / q)
    refl = plate_reflection_matrix(kappa, kx, kz, r_e, r_m)
    n = np.arange(-nmax, nmax + 1)
    log_w = np.log(0.5 * wt) - z * np.cosh(t)
    blocks = {}
    factors = {}
    signs = {}
    for pol in ("E", "M"):
        sign, log_t = cylinder_log_amplitudes(nmax, p * R, pol)
        signs[pol] = sign
        factors[pol] = np.exp(0.5 * log_t[np.abs(n)][:, None] - n[:, None] * t[None, :] + 0.5 * log_w[None, :])
    pairs = {("E", "E"): refl[0], ("E", "M"): refl[1], ("M", "E"): refl[2], ("M", "M"): refl[3]}
    for (a, b), r in pairs.items():
        blocks[a, b] = signs[a] * (factors[a] * r[None, :]) @ factors[b].T
    N = np.block([[blocks["E", "E"], blocks["E", "M"]], [blocks["M", "E"], blocks["M", "M"]]])
    return logdet_i_minus(N)


def cylinder_plate_energy(R, H, opts=SolveOptions()):
    """Energy per unit length of a perfect cylinder above a plate.

    ``H`` is the axis-to-plate distance.  ``opts.plate`` selects the plate
    material; anything but a perfect conductor uses the coupled E/M solver
    (``opts.polarization`` must then be ``'total'``).
    """
    geo = CylinderPlate(R, H)
    n_index = _medium_index(opts)
    scale = 1.0 / (geo.H - geo.R)
    if isinstance(opts.plate, PerfectConductor):
        def for_pol(pol):
            def at(nmax):
                return _polar_energy(lambda p: cylinder_plate_logdet(p, R, H, nmax, pol), scale, opts, nmax)

            return _auto_truncation(at, opts, _cyl_start(R, H - R))

        return _per_polarization(for_pol, opts).scaled(1.0 / n_index)

    if opts.polarization != "total":
        raise DomainError("a dielectric plate couples E and M; use polarization='total'")
    if opts.temperature > 0:
        raise UnsupportedFeatureError("finite temperature is not available for a dielectric plate")
    medium = opts.medium.material
    alpha, w_alpha = gauss_legendre(opts.angle_nodes)
    alpha = 0.25 * math.pi * (alpha + 1.0)
    w_alpha = 0.25 * math.pi * w_alpha

    def at(nmax):
        def f(p):
            acc = []
            for a, wa in zip(alpha, w_alpha):
                # p and alpha are in medium-scaled variables (kappa' = n_M kappa)
                kappa = p * math.cos(a)
                kz = p * math.sin(a)
                resp = eval_material(opts.plate, kappa / n_index)
                eps_rel = resp.eps / medium.eps
                mu_rel = resp.mu / medium.mu
                acc.append(wa * dielectric_plate_logdet(kappa, kz, R, H, nmax, eps_rel, mu_rel))
            return p * math.fsum(acc)

        quad = opts.quad or QuadratureSpec(nodes=32, scale=scale, tol=1e-6)
        v, err, _ = _integrate(f, quad, opts)
        c = 1.0 / (2.0 * math.pi ** 2)
        return EnergyResult(c * v, nmax, c * err, 0.0)

    return _auto_truncation(at, opts, _cyl_start(R, H - R)).scaled(1.0 / n_index)


# --------------------------------------------------------------------------
# Parabolic cylinder and plate
# --------------------------------------------------------------------------

def _s_rule(x, ns):
    smax = 60.0 if x <= 0 else min(60.0, math.acosh(max(1.0, 350.0 / x)) + 1.0)
    t, w = gauss_legendre(ns)
    return smax * t, smax * w


def parabola_plate_matrix(P, R, d, theta, nu_max, pol, ns=800):
    """Real round-trip matrix of a parabolic cylinder and a perfect plate.

    Channels with vanishing amplitude (the knife edge, ``R = 0``) are
    dropped; they only add zero rows and leave the determinant unchanged.
    """
    u = math.sqrt(2.0 * R * P)
    sign, log_g = specfun.pcf_amplitudes_scaled(nu_max, u, pol)
    keep = np.nonzero(sign)[0]
    s, ws = _s_rule(d * P, ns)
    log_w = np.log(ws) + R * P
    la = parabola_plane_log(nu_max, s, P, d, theta)[keep]
    lb = parabola_plane_log(nu_max, s, P, d, -theta)[keep]
    half = 0.5 * log_g[keep][:, None] + 0.5 * log_w[None, :]
    fa = np.exp(la + half)
    fb = np.exp(lb + half)
    r = 1.0 if pol == "E" else -1.0
    return r * sign[keep][:, None] * (fa @ fb.T).real


def parabola_plate_logdet(P, R, d, theta, nu_max, pol, ns=800):
    return logdet_i_minus(parabola_plate_matrix(P, R, d, theta, nu_max, pol, ns))


def parabola_plate_energy(R, d, theta=0.0, opts=SolveOptions(nmax=40)):
    """Energy per unit length of a perfect parabolic cylinder and a perfect plate.

    ``d`` is the focus-to-plate distance; the closest approach at
    ``theta = 0`` is ``H = d - R/2``.  For a perfect plate the round trip
    depends on ``(kappa, k_z)`` through ``P = sqrt(kappa^2 + k_z^2)`` only, at
    every tilt, so a single radial integral suffices.
    """
    geo = ParabolaPlate(R, d, theta)
    n_index = _medium_index(opts)
    quad = opts.quad or QuadratureSpec(nodes=64, scale=1.0 / geo.d, tol=1e-6)
    o = replace(opts, quad=quad)

    def for_pol(pol):
        def at(nu_max):
            return _polar_energy(lambda P: parabola_plate_logdet(P, R, d, theta, nu_max, pol), 0.0, o, nu_max)

        return _auto_truncation(at, o, 20)

    return _per_polarization(for_pol, opts).scaled(1.0 / n_index)


# --------------------------------------------------------------------------
# Forces
# --------------------------------------------------------------------------

def energy(geometry, opts=SolveOptions()):
    """Dispatch on a geometry descriptor."""
    if isinstance(geometry, TwoCylinders):
        return two_cylinders_energy(geometry.R, geometry.d, opts)
    if isinstance(geometry, CylinderPlate):
        return cylinder_plate_energy(geometry.R, geometry.H, opts)
    if isinstance(geometry, ParabolaPlate):
        return parabola_plate_energy(geometry.R, geometry.d, geometry.theta, opts)
    raise DomainError(f"unknown geometry {geometry!r}")


def force(geometry, opts=SolveOptions(), rel_step=1e-3):
    """``-dE/d(separation)`` per unit length; negative means attraction.

    The separation is ``d`` for two cylinders and the parabola and ``H`` for
    the cylinder-plate pair.  Each stencil point uses the same fixed
    quadrature rule and truncation so the differences are smooth.
    """
    base = energy(geometry, opts)
    sep = geometry.separation
    quad = opts.quad or _default_quad(geometry)
    fixed = replace(opts, nmax=base.truncation_order or opts.nmax, adaptive=False,
                    quad=replace(quad, nodes=max(quad.nodes, 64)))

    def e(x):
        return energy(geometry.with_separation(x), fixed).value

    noise = 1e-13 * abs(base.value)
    return -central_derivative(e, sep, rel_step, noise)


def _default_quad(geometry):
    if isinstance(geometry, TwoCylinders):
        return QuadratureSpec(nodes=48, scale=1.0 / (geometry.d - 2 * geometry.R), tol=1e-7)
    if isinstance(geometry, CylinderPlate):
        return QuadratureSpec(nodes=48, scale=1.0 / (geometry.H - geometry.R), tol=1e-7)
    return QuadratureSpec(nodes=64, scale=1.0 / geometry.d, tol=1e-6)

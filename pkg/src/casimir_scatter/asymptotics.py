"""Closed-form Casimir energies and forces.

Energies of cylindrical objects are per unit length (``E / (hbar c L)``);
compact objects return ``E / (hbar c)``.  With hbar = c = 1 every function
returns a plain number in powers of the input lengths.  These forms also
serve as oracles for the full solvers.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .model import PerfectConductor, PolarizabilityTensor
from .scattering import fresnel_coefficients

C_PARALLEL = math.pi ** 2 / 720.0


# --------------------------------------------------------------------------
# Cylinders
# --------------------------------------------------------------------------

def cyl_pair_asym(R, d, pol):
    """Two perfect cylinders at ``d >> R``.

    E: ``-1/(8 pi d^2 ln^2(d/R)) (1 - 2/ln(d/R))``; M: ``-(7/5 pi) R^4/d^6``.
    """
    if not (R > 0 and d > 0):
        raise DomainError("R and d must be positive")
    if pol == "E":
        lg = math.log(d / R)
        return -(1.0 - 2.0 / lg) / (8.0 * math.pi * d * d * lg * lg)
    if pol == "M":
        return -7.0 / (5.0 * math.pi) * R ** 4 / d ** 6
    raise DomainError("pol must be 'E' or 'M'")


def cyl_plate_asym(R, H, pol):
    """Perfect cylinder at height ``H >> R`` above a perfect plate."""
    if not (R > 0 and H > 0):
        raise DomainError("R and H must be positive")
    if pol == "E":
        return -1.0 / (16.0 * math.pi * H * H * math.log(H / R))
    if pol == "M":
        return -5.0 / (32.0 * math.pi) * R * R / H ** 4
    raise DomainError("pol must be 'E' or 'M'")


def _static_fresnel(eps, mu, x):
    if isinstance(eps, PerfectConductor):
        return 1.0, -1.0
    return fresnel_coefficients(eps, mu, x)


def phi_e(eps_plate, mu_plate=1.0):
    """``int_0^1 dx/(1+x) [r^E(0,x) - x r^M(0,x)]`` with static Fresnel data.

    Pass a :class:`PerfectConductor` as ``eps_plate`` for the ideal metal,
    for which the integral is exactly 1.
    """
    def f(x):
        r_e, r_m = _static_fresnel(eps_plate, mu_plate, x)
        return (r_e - x * r_m) / (1.0 + x)

    return quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13)[0]


def dielectric_cyl_plate_asym(variant, R, H, eps_cyl=None, mu_cyl=1.0, eps_plate=None, mu_plate=1.0):
    """Large-distance cylinder/plate energies involving dielectrics.

    Variants
    --------
    ``"dielectric-both"``
        Dielectric cylinder (``mu_cyl = 1``) above a dielectric plate.
    ``"perfect-plate"``
        Dielectric cylinder (``eps_cyl``, ``mu_cyl``) above a perfect plate.
    ``"perfect-cylinder"``
        Perfect cylinder above a dielectric plate; uses :func:`phi_e`.
    """
    if not (R > 0 and H > R):
        raise DomainError("need 0 < R < H")
    if variant == "dielectric-both":
        if mu_cyl != 1.0:
            raise DomainError("this form assumes mu_cyl = 1")
        contrast = (eps_cyl - 1.0) / (eps_cyl + 1.0)

        def f(x):
            r_e, r_m = _static_fresnel(eps_plate, mu_plate, x)
            return contrast * ((7.0 + eps_cyl - 4.0 * x * x) * r_e - (3.0 + eps_cyl) * x * x * r_m)

        return -3.0 * R * R / (128.0 * math.pi * H ** 4) * quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13)[0]
    if variant == "perfect-plate":
        e, m = eps_cyl, mu_cyl
        return -R * R / (32.0 * math.pi * H ** 4) * (e - m) * (9.0 + e + m + e * m) / ((1.0 + e) * (1.0 + m))
    if variant == "perfect-cylinder":
        return phi_e(eps_plate, mu_plate) / (16.0 * math.pi * H * H * math.log(R / H))
    raise DomainError(f"unknown variant {variant!r}")


# --------------------------------------------------------------------------
# Compact objects
# --------------------------------------------------------------------------

def _aniso_bracket(a1, a2, b1, b2):
    def same(x, y):
        return (13.0 * (x[0, 0] * y[0, 0] + x[1, 1] * y[1, 1] + 2.0 * x[0, 1] * y[0, 1])
                + 20.0 * x[2, 2] * y[2, 2]
                - 30.0 * (x[0, 2] * y[0, 2] + x[1, 2] * y[1, 2]))

    def cross(x, y):
        return x[0, 0] * y[1, 1] + x[1, 1] * y[0, 0] - 2.0 * x[0, 1] * y[0, 1]

    return same(a1, a2) + same(b1, b2) - 7.0 * (cross(a1, b2) + cross(a2, b1))


def cp_two_objects(obj1, obj2, d):
    """Large-distance energy of two compact objects, ``z`` along the separation.

    ``obj1``, ``obj2`` are :class:`PolarizabilityTensor`.  Scales as ``d^-7``.
    """
    if not d > 0:
        raise DomainError("d must be positive")
    b = _aniso_bracket(obj1.electric, obj2.electric, obj1.magnetic, obj2.magnetic)
    return -b / (8.0 * math.pi * d ** 7)


def cp_isotropic(alpha_par, alpha_z, beta_par, beta_z, d):
    """Two identical objects with axial polarizabilities (no wall)."""
    b = (33.0 * alpha_par ** 2 + 13.0 * alpha_z ** 2 - 14.0 * alpha_par * beta_z
         + 33.0 * beta_par ** 2 + 13.0 * beta_z ** 2 - 14.0 * beta_par * alpha_z)
    return -b / (8.0 * math.pi * d ** 7)


def _cp_diagonal(ap, az, bp, bz, D, ell):
    l2, l4 = ell * ell, ell ** 4

    def half(ap, az, bp, bz):
        return (26.0 * ap * ap + 20.0 * az * az
                - 14.0 * l2 * (4.0 * ap * ap - 9.0 * ap * az + 5.0 * az * az)
                + 63.0 * l4 * (ap - az) ** 2
                - 14.0 * (ap * bp * (1.0 - l2) + l2 * ap * bz))

    return -(half(ap, az, bp, bz) + half(bp, bz, ap, az)) / (8.0 * math.pi * D ** 7)


def _cp_three_body(ap, az, bp, bz, d, D, ell):
    p1 = 3 * ell ** 6 + 15 * ell ** 5 + 28 * ell ** 4 + 20 * ell ** 3 + 6 * ell ** 2 - 5 * ell - 1
    p2 = 3 * ell ** 6 + 15 * ell ** 5 + 24 * ell ** 4 - 10 * ell ** 2 - 5 * ell - 1
    p3 = 4.0 * (ell ** 4 + 5 * ell ** 3 + ell ** 2)
    b = p1 * (ap * ap - bp * bp) - p2 * (az * az - bz * bz) + p3 * (az * bp - ap * bz)
    return 4.0 / math.pi * b / (d ** 3 * D ** 4 * (ell + 1.0) ** 5)


def cp_with_wall(alpha_z, alpha_par, beta_z, beta_par, d, H, large_h=False):
    """Two identical objects a distance ``d`` apart, both ``H`` from a mirror.

    Returns the ``d``-dependent energy: direct two-body term, two-body term
    with the image, and the three-body term.  ``large_h`` selects the
    expansion up to ``H^-6`` instead.
    """
    if not (d > 0 and H > 0):
        raise DomainError("d and H must be positive")
    ap, az, bp, bz = alpha_par, alpha_z, beta_par, beta_z
    direct = cp_isotropic(ap, az, bp, bz, d)
    if large_h:
        def corr(ap, az, bp, bz):
            return (az * az - ap * ap) / (4.0 * d ** 3 * H ** 4) + (9.0 * ap * ap - az * az - 2.0 * ap * bz) / (8.0 * d * H ** 6)

        return direct + (corr(ap, az, bp, bz) - corr(bp, bz, ap, az)) / math.pi
    D = math.hypot(d, 2.0 * H)
    ell = d / D
    return direct + _cp_diagonal(ap, az, bp, bz, D, ell) + _cp_three_body(ap, az, bp, bz, d, D, ell)


_F_LIMITS = {
    (6, "large-h"): lambda h: -1001.0 / 16.0 + 3.0 / (4.0 * h ** 6),
    (6, "small-h"): lambda h: -791.0 / 8.0 + 6741.0 * h * h / 8.0,
    (8, "large-h"): lambda h: -71523.0 / 160.0 + 39.0 / (80.0 * h ** 6),
    (8, "small-h"): lambda h: -60939.0 / 80.0 + 582879.0 * h * h / 80.0,
}


def sphere_wall_f_limits(j, regime, h):
    """Truncated expansions of the sphere-pair force coefficients ``f_j(H/d)``.

    ``large-h`` at ``h = inf`` returns the constant term.  The two regimes are
    separate truncations and are not meant to join continuously.
    """
    try:
        f = _F_LIMITS[int(j), regime]
    except KeyError:
        raise DomainError("j must be 6 or 8 and regime 'large-h' or 'small-h'") from None
    if regime == "large-h" and math.isinf(h):
        return f(math.inf)
    return f(float(h))


_DEGENERATE_TOL = 1e-12


def _is(a, b, tol):
    return abs(a - b) <= tol


def prolate_pair_energy(theta1, theta2, psi, L, R, d):
    """Two perfect needles (``L >> R``) at large distance ``d``.

    At ``theta_1 = pi/2`` with ``theta_2 = 0`` or ``psi = pi/2`` (and the
    mirrored case) the leading ``L^6`` term vanishes and the ``L^4 R^2`` form
    is returned.  Angles within ``1e-6`` of that set but not within
    ``1e-12`` keep the generic form with a warning.
    """
    if not (L > 2 * R > 0 and d > 0):
        raise DomainError("need L > 2R > 0 and d > 0")
    half = 0.5 * math.pi
    lg = math.log(L / R) - 1.0

    def degenerate(tol):
        for a, b in ((theta1, theta2), (theta2, theta1)):
            if _is(a, half, tol) and (_is(b, 0.0, tol) or _is(abs(psi), half, tol)):
                return b
        return None

    other = degenerate(_DEGENERATE_TOL)
    if other is not None:
        return -L ** 4 * R * R / (1152.0 * math.pi * d ** 7 * lg) * (73.0 + 7.0 * math.cos(2.0 * other))
    if degenerate(1e-6) is not None:
        warnings.warn("angles are close to the crossed-needle set; the leading form is nearly zero here",
                      RuntimeWarning, stacklevel=2)
    bracket = (math.cos(theta1) ** 2 * math.cos(theta2) ** 2
               + 13.0 / 20.0 * math.cos(psi) ** 2 * math.sin(theta1) ** 2 * math.sin(theta2) ** 2
               - 3.0 / 8.0 * math.cos(psi) * math.sin(2 * theta1) * math.sin(2 * theta2))
    return -5.0 * L ** 6 / (1152.0 * math.pi * lg * lg * d ** 7) * bracket


def oblate_pair_energy(theta1, theta2, psi, R, d):
    """Two perfect pancakes (``R >> L/2``) at large distance ``d``."""
    if not (R > 0 and d > 0):
        raise DomainError("R and d must be positive")
    c1, c2 = math.cos(2 * theta1), math.cos(2 * theta2)
    bracket = (765.0 - 5.0 * (c1 + c2) + 237.0 * c1 * c2
               + 372.0 * math.cos(2 * psi) * math.sin(theta1) ** 2 * math.sin(theta2) ** 2
               - 300.0 * math.cos(psi) * math.sin(2 * theta1) * math.sin(2 * theta2))
    return -R ** 6 / (144.0 * math.pi ** 3 * d ** 7) * bracket


def object_wall_energy(pol, d, delta=0.0, theta=0.0, R=0.0):
    """Compact object a distance ``d`` from a perfect mirror.

    The leading term ``-tr(alpha - beta)/(8 pi d^4)`` is orientation blind.
    For a sphere of radius ``R`` deformed by ``delta Y_20`` and tilted by
    ``theta``, the leading orientation-dependent term is added.
    """
    if not d > 0:
        raise DomainError("d must be positive")
    e = -float(np.trace(pol.electric - pol.magnetic)) / (8.0 * math.pi * d ** 4)
    if delta:
        e += distortion_energy(delta, R, d, theta)
    return e


def distortion_energy(delta, R, d, theta):
    """``-(1607/(640 sqrt5 pi^1.5)) delta R^4/d^6 cos 2theta``."""
    return -1607.0 / (640.0 * math.sqrt(5.0) * math.pi ** 1.5) * delta * R ** 4 / d ** 6 * math.cos(2.0 * theta)


# --------------------------------------------------------------------------
# Proximity force approximation
# --------------------------------------------------------------------------

def parabola_pfa(R, H):
    """``-(pi^3/(960 sqrt2)) sqrt(R/H^5)`` per unit length.

    Also the cylinder-plate estimate with ``H`` the surface gap.
    """
    if not (R > 0 and H > 0):
        raise DomainError("R and H must be positive")
    return -math.pi ** 3 / (960.0 * math.sqrt(2.0)) * math.sqrt(R / H ** 5)


def cyl_pair_pfa_energy(R, d):
    """PFA energy per length of two cylinders, gap ``h = d - 2R``."""
    h = d - 2.0 * R
    if not (R > 0 and h > 0):
        raise DomainError("need d > 2R > 0")
    return -math.pi ** 3 / 1920.0 * math.sqrt(R / h ** 5)


def cyl_pair_pfa_force(R, d):
    """Magnitude of the PFA force per length, ``(5/2)(pi^3/1920) sqrt(R/h^7)``."""
    h = d - 2.0 * R
    if not (R > 0 and h > 0):
        raise DomainError("need d > 2R > 0")
    return 2.5 * math.pi ** 3 / 1920.0 * math.sqrt(R / h ** 7)


def sphere_pfa_d3_force(r, R):
    """``lim d^3 F = -(pi^3/360) r R/(r + R)``; ``R < 0`` is the interior case."""
    if r + R == 0:
        raise DomainError("r + R must be non-zero")
    return -math.pi ** 3 / 360.0 * r * R / (r + R)


def theta1_pfa_r(x):
    return -(x + x / (1.0 + x) + 3.0)


def theta1_pfa_R(x):
    return -(3.0 * x + x / (1.0 + x) + 1.0)


THETA1_FIT = (1.05, 1.08, 1.38)


def theta1_fit(x, k=THETA1_FIT):
    k1, k2, k3 = k
    return -(k1 * x + k2 * x / (1.0 + x) + k3)


_PFA_KINDS = {
    "parabola": lambda p: parabola_pfa(p["R"], p["H"]),
    "two-spheres": lambda p: sphere_pfa_d3_force(p["r"], p["R"]),
    "cyl-pair": lambda p: cyl_pair_pfa_energy(p["R"], p["d"]),
    "cyl-pair-force": lambda p: cyl_pair_pfa_force(p["R"], p["d"]),
    "theta1-pfa-r": lambda p: theta1_pfa_r(p["x"]),
    "theta1-pfa-R": lambda p: theta1_pfa_R(p["x"]),
    "theta1-fit": lambda p: theta1_fit(p["x"]),
}

PFA_KINDS = tuple(_PFA_KINDS)


def pfa_suite(kind, **params):
    """Evaluate one of the proximity-force forms by name (see ``PFA_KINDS``)."""
    try:
        f = _PFA_KINDS[kind]
    except KeyError:
        raise DomainError(f"unknown PFA kind {kind!r}; choose from {PFA_KINDS}") from None
    try:
        return f(params)
    except KeyError as exc:
        raise DomainError(f"PFA kind {kind!r} needs parameter {exc.args[0]!r}") from None


def perfect_sphere(R):
    """Polarizabilities of a perfectly conducting sphere."""
    return PolarizabilityTensor.isotropic(R ** 3, -0.5 * R ** 3)

"""Translation and conversion elements between object bases.

All elements are real on the imaginary frequency axis.  The parabolic
element is complex per plane wave, but ``U(k_x)`` and ``U(-k_x)`` are
complex conjugates; :func:`parabola_plane_u` returns the real combination
``Re U + Im U`` so that

    int dk_x U_nu(k_x, theta) U_nu'(k_x, -theta)
        = int dk_x u_nu(k_x, theta) u_nu'(-k_x, -theta)

with real ``u`` on both sides (the odd cross terms integrate to zero).
"""

from __future__ import annotations

import math

import numpy as np

from . import specfun
from .errors import DomainError

_LOG_TINY = math.log(np.finfo(float).tiny)


def cyl_translation(n, n2, p, d):
    """Cylinder-to-cylinder element ``K_{n+n2}(p d)``.

    Returns ``0.0`` when the value underflows (large ``p d``).
    """
    if not (p > 0 and d > 0):
        raise DomainError("p and d must be positive")
    m = abs(int(n) + int(n2))
    v = specfun.bessel_k(m, p * d)
    return v.value


def plane_wave_propagator(k_perp, kappa, H):
    """``exp(-sqrt(k_perp^2 + kappa^2) H)``: decay of an evanescent plane wave."""
    if not (H > 0 and kappa > 0):
        raise DomainError("H and kappa must be positive")
    return math.exp(-math.hypot(k_perp, kappa) * H)


def cyl_to_plane(n, kx, p, pol="E"):
    """Weight of plane wave ``k_x`` in the outgoing cylindrical wave of order ``n``.

    With ``k_x = p sinh t`` the regular decomposition
    ``K_n(p rho) e^{i n phi} = 1/2 int dt exp(-p y cosh t + i p x sinh t - n t)``
    (for ``y > 0``) gives the coefficient ``e^{-n t} = ((q - k_x)/p)^n`` with
    ``q = sqrt(p^2 + k_x^2)``.  Field scalars are ``E_z`` and ``H_z``, so the
    weight is the same for both polarizations; the mixing lives in
    :func:`plate_reflection_matrix`.
    """
    if pol not in ("E", "M"):
        raise DomainError("pol must be 'E' or 'M'")
    if not p > 0:
        raise DomainError("p must be positive")
    return math.exp(-int(n) * math.asinh(kx / p))


def plate_reflection_matrix(kappa, kx, kz, r_e, r_m):
    """Plate reflection in the (E, M) cylinder basis.

    Returns ``(R_EE, R_EM, R_ME, R_MM)`` (arrays broadcast over inputs).  A
    perfect conductor (``r_e = 1``, ``r_m = -1``) gives ``diag(-1, 1)``.
    """
    kappa, kx, kz = np.broadcast_arrays(*map(lambda a: np.asarray(a, dtype=float), (kappa, kx, kz)))
    p = np.hypot(kappa, kz)
    q = np.hypot(p, kx)
    k_perp = np.hypot(kx, kz)
    safe = np.where(k_perp > 0, k_perp, 1.0)
    c = np.where(k_perp > 0, kz * q / (p * safe), 1.0)
    s = np.where(k_perp > 0, kappa * kx / (p * safe), 0.0)
    c2, s2, cs = c * c, s * s, c * s
    r_ee = -(r_e * c2 - r_m * s2)
    r_mm = r_e * s2 - r_m * c2
    mix = cs * (r_e + r_m)
    return r_ee, mix, -mix, r_mm


def parabola_plane_log(nu_max, s, P, d, theta):
    """Complex logarithm of ``U_nu`` on the path ``k_x = P sinh s``.

    Returns an array of shape ``(nu_max + 1,) + s.shape`` holding
    ``log U_nu + log(sqrt(P cosh s))`` (the Jacobian half-weight included, so
    the product of two such factors integrates directly in ``s``) with the
    factorial left out.
    """
    s = np.asarray(s, dtype=float)
    a = 0.5 * (theta - 1j * s)
    with np.errstate(divide="ignore"):
        log_tan = np.log(np.tan(a))
    base = -0.5 * math.log(2.0 * math.sqrt(2.0 * math.pi)) - np.log(np.cos(a)) - d * P * np.cosh(s)
    nu = np.arange(nu_max + 1).reshape((-1,) + (1,) * s.ndim)
    with np.errstate(invalid="ignore"):
        powers = np.where(nu == 0, 0.0, nu * log_tan)
    return base + powers


def parabola_plane_u(nu, kx, kz, kappa, d, theta):
    """Real parabola-to-plane element ``Re U + Im U``.

    ``U = sqrt(1/(2 k nu! sqrt(2 pi))) tan^nu(a) / cos(a) e^{-k d}`` with
    ``k = sqrt(kappa^2 + kx^2 + kz^2)``, ``a = (phi + theta)/2`` and
    ``phi = -i artanh(kx/k)``.  See the module docstring for the pairing rule.
    """
    if int(nu) != nu or nu < 0:
        raise DomainError("nu must be a non-negative integer")
    if not (kappa > 0 and d > 0):
        raise DomainError("kappa and d must be positive")
    P = math.hypot(kappa, kz)
    k = math.hypot(P, kx)
    s = math.asinh(kx / P)
    log_u = parabola_plane_log(int(nu), np.array(s), P, d, theta)[int(nu)]
    log_u = log_u - 0.5 * math.log(k) - 0.5 * math.lgamma(nu + 1.0)
    mag = math.exp(log_u.real) if log_u.real > _LOG_TINY else 0.0
    return mag * (math.cos(log_u.imag) + math.sin(log_u.imag))

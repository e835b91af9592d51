"""Scattering amplitudes on the imaginary frequency axis.

Each object is described in its natural wave basis, where the amplitude is
diagonal in the channel index: cylindrical order ``n`` for cylinders,
parabolic order ``nu`` for parabolic cylinders, and plane waves for a plate.
"""

from __future__ import annotations

import math

import numpy as np

from . import specfun
from .errors import BesselOverflowError, DomainError, UnsupportedFeatureError
from .model import VACUUM, PerfectConductor, eval_material


def _check_pol(pol):
    if pol not in ("E", "M"):
        raise DomainError(f"polarization must be 'E' or 'M', got {pol!r}")


def cylinder_log_amplitudes(nmax, x, pol):
    """``log|T_n(x)|`` for ``n = 0..nmax`` of a perfectly conducting cylinder.

    ``x = p R``.  The amplitude is ``T_n = -I_n/K_n`` (E) or ``-I'_n/K'_n`` (M):
    negative for E and positive for M.  Returns ``(sign, log_abs)`` with
    ``log_abs`` of shape ``(nmax + 1,) + x.shape``.
    """
    _check_pol(pol)
    t = specfun.bessel_ik_table(nmax, x)
    log_abs = t.log_i - t.log_k
    if pol == "E":
        return -1.0, log_abs
    return 1.0, log_abs + np.log(t.di / -t.dk)


def cylinder_amplitude(n, p, R, pol):
    """Exterior amplitude of a perfectly conducting cylinder.

    Parameters
    ----------
    n : int
        Cylindrical order; negative orders map to ``|n|``.
    p : float
        ``sqrt(kappa^2 + k_z^2) > 0``.
    R : float
        Radius.
    pol : {'E', 'M'}
    """
    if not (p > 0 and R > 0):
        raise DomainError("p and R must be positive")
    n = abs(int(n))
    sign, log_abs = cylinder_log_amplitudes(n, p * R, pol)
    v = float(log_abs[n])
    if v > math.log(np.finfo(float).max):
        raise BesselOverflowError(f"cylinder amplitude overflows at n={n}, pR={p * R}")
    return sign * math.exp(v)


def dielectric_cylinder_amplitude(n, p, R, pol, material):
    """Reserved: the dielectric cylinder amplitude is not implemented."""
    raise UnsupportedFeatureError(
        "dielectric cylinder amplitudes are not available; only the large-distance "
        "closed forms in casimir_scatter.asymptotics cover dielectric cylinders"
    )


def fresnel_coefficients(eps, mu, x):
    """Vectorized ``(r^E, r^M)`` for relative ``eps``, ``mu`` at ``x`` in (0, 1]."""
    n2 = eps * mu
    root = np.sqrt(1.0 + (n2 - 1.0) * x * x)
    return (eps - root) / (eps + root), (mu - root) / (mu + root)


def fresnel(pol, kappa, x, plate, medium=VACUUM):
    """Plate reflection coefficient ``r^E`` or ``r^M``.

    ``x = kappa / sqrt(kappa^2 + k_perp^2)``.  A perfect conductor returns
    ``r^E = 1`` and ``r^M = -1`` exactly.  In a medium the plate's ``eps``
    and ``mu`` are taken relative to the medium's.
    """
    _check_pol(pol)
    if not (0 < x <= 1):
        raise DomainError(f"x must lie in (0, 1], got {x}")
    if isinstance(plate, PerfectConductor):
        return 1.0 if pol == "E" else -1.0
    r = eval_material(plate, kappa)
    m = medium.response(kappa)
    r_e, r_m = fresnel_coefficients(r.eps / m.eps, r.mu / m.mu, x)
    return float(r_e if pol == "E" else r_m)


def parabola_amplitude(nu, kappa, kz, R, pol):
    """Amplitude of a perfectly conducting parabolic cylinder.

    Depends on ``(kappa, kz)`` only through ``u = sqrt(2 R sqrt(kappa^2 + kz^2))``.
    ``R = 0`` is the knife edge (half plane).
    """
    _check_pol(pol)
    if not (kappa > 0 and R >= 0):
        raise DomainError("need kappa > 0 and R >= 0")
    u = math.sqrt(2.0 * R * math.hypot(kappa, kz))
    return specfun.pcf_ratio_e(nu, u) if pol == "E" else specfun.pcf_ratio_m(nu, u)

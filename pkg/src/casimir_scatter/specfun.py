"""Special functions on the imaginary frequency axis.

Two families are provided:

* modified Bessel functions ``I_n`` and ``K_n`` of integer order together with
  their derivatives, evaluated in logarithmic form so that large orders and
  arguments never overflow internally;
* the real-valued parabolic cylinder combinations that make up the
  scattering amplitudes of a perfectly reflecting parabolic cylinder.

Bessel functions
----------------
``K_0`` and ``K_1`` come from their power series for ``x <= 2`` and from
Steed's continued fraction otherwise; higher orders follow from the (stable)
upward recurrence.  ``I_n`` is obtained from the ratio ``I_{n+1}/I_n`` (backward
recurrence) and the Wronskian ``I_n K_{n+1} + I_{n+1} K_n = 1/x``.

Parabolic cylinder functions
----------------------------
For integer ``nu >= 0`` and real ``u >= 0`` everything reduces to the moments::

    Ch_nu(u) = int_0^inf t^nu exp(-t^2/2) cosh(u t) dt
    Sh_nu(u) = int_0^inf t^nu exp(-t^2/2) sinh(u t) dt
    B_nu(u)  = int_0^inf t^nu exp(-t^2/2 - u t) dt

with ``i^nu D_nu(iu) = sqrt(2/pi) exp(-u^2/4) S_nu`` (``S = Ch`` for even and
``-Sh`` for odd ``nu``) and ``D_{-nu-1}(u) = exp(-u^2/4) B_nu / nu!``.  ``Ch`` and
``Sh`` obey recurrences with positive coefficients only, so no cancellation
occurs on the rotated branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erf, erfcx

from .errors import BesselOverflowError, DomainError, FunctionOverflowError, PrecisionLossError

EULER_GAMMA = 0.57721566490153286061
_LOG_MAX = math.log(np.finfo(float).max)
_LOG_TINY = math.log(np.finfo(float).tiny)
_SERIES_TERMS = 30
_CF2_MAXIT = 10000


@dataclass(frozen=True)
class ValueAndDerivative:
    """A function value with its first derivative.

    ``underflow`` is set when the true value is below the smallest normal
    double and has been flushed to zero.
    """

    value: float
    derivative: float
    underflow: bool = False


class BesselTable(NamedTuple):
    """Logarithmic Bessel data for orders ``0..nmax`` (first axis).

    ``di`` and ``dk`` hold the logarithmic derivatives ``I'_n/I_n`` and
    ``K'_n/K_n``; ``kratio`` is ``K_{n+1}/K_n`` and ``iratio`` is ``I_{n+1}/I_n``.
    """

    log_i: np.ndarray
    log_k: np.ndarray
    di: np.ndarray
    dk: np.ndarray
    iratio: np.ndarray
    kratio: np.ndarray


# --------------------------------------------------------------------------
# Bessel functions
# --------------------------------------------------------------------------

def _k01_small(x):
    """Power series for K_0, K_1 (unscaled) valid for 0 < x <= 2."""
    y = 0.25 * x * x
    lx = np.log(0.5 * x)
    term0 = np.ones_like(x)
    term1 = np.ones_like(x)  # (y^k)/(k!(k+1)!)
    i0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    harmonic = 0.0
    for k in range(_SERIES_TERMS):
        if k > 0:
            term0 = term0 * y / (k * k)
            term1 = term1 * y / (k * (k + 1))
            harmonic += 1.0 / k
        psi_k1 = -EULER_GAMMA + harmonic
        psi_k2 = psi_k1 + 1.0 / (k + 1)
        i0 += term0
        i1 += term1
        s0 += psi_k1 * term0
        s1 += (psi_k1 + psi_k2) * term1
    i1 = 0.5 * x * i1
    k0 = -lx * i0 + s0
    k1 = 1.0 / x + lx * i1 - 0.25 * x * s1
    return k0, k1


def _k01_scaled_large(x):
    """Steed's continued fraction CF2 for e^x K_0 and e^x K_1, x > 2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, _CF2_MAXIT):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + np.where(done, 0.0, delh)
        dels = q * delh
        s = s + np.where(done, 0.0, dels)
        done |= np.abs(dels / s) < 1e-17
        if done.all():
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _log_k01(x):
    x = np.asarray(x, dtype=float)
    small = x <= 2.0
    lk0 = np.empty_like(x)
    lk1 = np.empty_like(x)
    if small.any():
        k0, k1 = _k01_small(x[small])
        lk0[small] = np.log(k0)
        lk1[small] = np.log(k1)
    if (~small).any():
        xl = x[~small]
        k0, k1 = _k01_scaled_large(xl)
        lk0[~small] = np.log(k0) - xl
        lk1[~small] = np.log(k1) - xl
    return lk0, lk1


def _check_args(nmax, x):
    if int(nmax) != nmax or nmax < 0:
        raise DomainError(f"order must be a non-negative integer, got {nmax!r}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("Bessel argument must be finite")
    if np.any(x <= 0.0):
        raise DomainError("Bessel argument must be strictly positive")
    return int(nmax), x


def bessel_ik_table(nmax, x):
    """Logarithmic tables of ``I_n(x)``, ``K_n(x)`` for ``n = 0..nmax``.

    Parameters
    ----------
    nmax : int
        Highest order needed.
    x : array_like
        Positive arguments; any shape.

    Returns
    -------
    BesselTable
        Arrays of shape ``(nmax + 1,) + x.shape``.
    """
    nmax, x = _check_args(nmax, x)
    shape = x.shape
    x = x.reshape(-1)
    n = np.arange(nmax + 2, dtype=float)[:, None]

    # K: upward recurrence on the ratio K_{n+1}/K_n
    lk0, lk1 = _log_k01(x)
    kratio = np.empty((nmax + 2, x.size))
    log_k = np.empty((nmax + 2, x.size))
    log_k[0] = lk0
    log_k[1] = lk1
    kratio[0] = np.exp(lk1 - lk0)
    for m in range(1, nmax + 1):
        kratio[m] = 1.0 / kratio[m - 1] + 2.0 * m / x
        log_k[m + 1] = log_k[m] + np.log(kratio[m])

    # I: backward recurrence on I_{n+1}/I_n started far above nmax
    top = nmax + 40 + int(10.0 * math.sqrt(float(x.max())))
    rho = np.zeros_like(x)
    iratio = np.empty((nmax + 1, x.size))
    for m in range(top, -1, -1):
        rho = 1.0 / (2.0 * (m + 1) / x + rho)
        if m <= nmax:
            iratio[m] = rho
    log_i = -np.log(x) - log_k[: nmax + 1] - np.log(kratio[: nmax + 1] + iratio)

    nn = n[: nmax + 1]
    di = iratio + nn / x
    dk = nn / x - kratio[: nmax + 1]
    out = BesselTable(
        log_i=log_i,
        log_k=log_k[: nmax + 1],
        di=di,
        dk=dk,
        iratio=iratio,
        kratio=kratio[: nmax + 1],
    )
    return BesselTable(*(a.reshape((nmax + 1,) + shape) for a in out))


def _scalar(n, x):
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a non-negative integer, got {n!r}")
    if not (isinstance(x, (int, float, np.floating, np.integer)) and math.isfinite(x)):
        raise DomainError("argument must be a finite real number")
    if x <= 0:
        raise DomainError("argument must be strictly positive")
    return int(n), float(x)


def bessel_i(n, x):
    """``I_n(x)`` and ``I'_n(x)`` for integer ``n >= 0`` and ``x > 0``.

    Raises :class:`BesselOverflowError` when ``I_n(x)`` exceeds the double
    range (roughly ``x > 713``); use :func:`bessel_ik_table` for logarithms.
    """
    n, x = _scalar(n, x)
    t = bessel_ik_table(n, x)
    log_v = float(t.log_i[n])
    if log_v > _LOG_MAX:
        raise BesselOverflowError(f"I_{n}({x}) overflows double precision")
    v = math.exp(log_v)
    d = v * float(t.di[n])
    if not math.isfinite(d):
        raise BesselOverflowError(f"I'_{n}({x}) overflows double precision")
    return ValueAndDerivative(v, d)


def bessel_k(n, x):
    """``K_n(x)`` and ``K'_n(x)`` for integer ``n >= 0`` and ``x > 0``.

    Large arguments whose value is below the smallest normal double return
    ``0.0`` with ``underflow=True``; large orders at small arguments raise
    :class:`BesselOverflowError`.
    """
    n, x = _scalar(n, x)
    t = bessel_ik_table(n, x)
    log_v = float(t.log_k[n])
    if log_v > _LOG_MAX or log_v + math.log(abs(float(t.dk[n]))) > _LOG_MAX:
        raise BesselOverflowError(f"K_{n}({x}) overflows double precision")
    if log_v < _LOG_TINY:
        return ValueAndDerivative(0.0, 0.0, underflow=True)
    v = math.exp(log_v)
    return ValueAndDerivative(v, v * float(t.dk[n]))


def log_bessel_k(n, x):
    """Natural logarithm of ``K_n(x)``; never overflows."""
    n, x = _scalar(n, x)
    return float(bessel_ik_table(n, x).log_k[n])


# --------------------------------------------------------------------------
# Parabolic cylinder functions
# --------------------------------------------------------------------------

class PCFMoments(NamedTuple):
    """Log-moments for orders ``0..nu_max + 1`` (first axis).

    ``log_ch`` and ``log_sh`` carry the factor ``exp(-u^2/2)``:
    they are ``log(Ch_nu e^{-u^2/2})`` and ``log(Sh_nu e^{-u^2/2})``.
    ``log_b`` is ``log B_nu`` without scaling.
    """

    log_ch: np.ndarray
    log_sh: np.ndarray
    log_b: np.ndarray


_FORWARD_LIMIT = 3.0


def _log_b_moments(nu_top, u):
    """log B_nu(u) for nu = 0..nu_top, u >= 0 (1-D array)."""
    log_b = np.empty((nu_top + 1, u.size))
    log_b[0] = math.log(math.sqrt(math.pi / 2.0)) + np.log(erfcx(u / math.sqrt(2.0)))

    fwd = u * math.sqrt(nu_top + 1.0) <= _FORWARD_LIMIT
    if fwd.any():
        uf = u[fwd]
        b_prev = np.exp(log_b[0, fwd])
        b_cur = 1.0 - uf * b_prev  # B_1 = 1 - u B_0
        log_b[1, fwd] = np.log(b_cur)
        offset = np.zeros_like(uf)
        for nu in range(2, nu_top + 1):
            b_next = (nu - 1) * b_prev - uf * b_cur
            b_prev, b_cur = b_cur, b_next
            big = np.abs(b_cur) > 1e150
            if big.any():
                scale = np.where(big, b_cur, 1.0)
                b_prev = b_prev / scale
                b_cur = b_cur / scale
                offset = offset + np.log(scale)
            log_b[nu, fwd] = np.log(b_cur) + offset
    bwd = ~fwd
    if bwd.any():
        ub = u[bwd]
        umin = float(ub.min())
        extra = 60 + int(40.0 * math.sqrt(nu_top + 1.0) / umin)
        top = nu_top + extra
        beta = 0.5 * (-ub + np.sqrt(ub * ub + 4.0 * top))
        log_ratio = np.empty((nu_top + 1, ub.size))
        for nu in range(top, 0, -1):
            # beta currently approximates B_{nu+1}/B_nu; step to B_nu/B_{nu-1}
            beta = nu / (ub + beta)
            if nu <= nu_top:
                log_ratio[nu] = np.log(beta)
        log_ratio[0] = log_b[0, bwd]
        log_b[:, bwd] = np.cumsum(log_ratio, axis=0)
    return log_b


def pcf_moments(nu_max, u):
    """Compute :class:`PCFMoments` for orders up to ``nu_max + 1``.

    Parameters
    ----------
    nu_max : int
    u : array_like
        Non-negative arguments (any shape).
    """
    if int(nu_max) != nu_max or nu_max < 0:
        raise DomainError("nu_max must be a non-negative integer")
    nu_max = int(nu_max)
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)) or np.any(u < 0):
        raise DomainError("parabolic cylinder argument must be finite and >= 0")
    shape = u.shape
    u = u.reshape(-1)
    top = nu_max + 1
    gauss = math.sqrt(math.pi / 2.0)

    ch = np.empty((top + 1, u.size))
    sh = np.empty((top + 1, u.size))
    c_prev = np.full_like(u, gauss)
    s_prev = gauss * erf(u / math.sqrt(2.0))
    c_cur = np.exp(-0.5 * u * u) + u * s_prev
    s_cur = u * c_prev
    offset = np.zeros_like(u)
    with np.errstate(divide="ignore"):
        ch[0] = np.log(c_prev)
        sh[0] = np.log(s_prev)
        if top >= 1:
            ch[1] = np.log(c_cur)
            sh[1] = np.log(s_cur)
        for nu in range(2, top + 1):
            c_next = u * s_cur + (nu - 1) * c_prev
            s_next = u * c_cur + (nu - 1) * s_prev
            c_prev, s_prev, c_cur, s_cur = c_cur, s_cur, c_next, s_next
            scale = np.maximum(c_cur, 1.0)
            big = scale > 1e150
            if big.any():
                scale = np.where(big, scale, 1.0)
                c_prev, s_prev = c_prev / scale, s_prev / scale
                c_cur, s_cur = c_cur / scale, s_cur / scale
                offset = offset + np.log(scale)
            ch[nu] = np.log(c_cur) + offset
            sh[nu] = np.log(s_cur) + offset
    log_b = _log_b_moments(top, u)
    return PCFMoments(
        ch.reshape((top + 1,) + shape),
        sh.reshape((top + 1,) + shape),
        log_b.reshape((top + 1,) + shape),
    )


def _precision_check(nu_max, u):
    # forward B recurrence amplifies rounding by roughly exp(2 u sqrt(nu))
    u = np.asarray(u, dtype=float)
    fwd = u * math.sqrt(nu_max + 2.0) <= _FORWARD_LIMIT
    amp = np.where(fwd, 2.0 * u * math.sqrt(nu_max + 2.0), 0.0)
    if np.any(amp + math.log(np.finfo(float).eps) > math.log(1e-8)):
        raise PrecisionLossError("parabolic cylinder recurrence lost more than 1e-8 relative")


def pcf_amplitudes_scaled(nu_max, u, pol):
    """Scaled parabolic-cylinder amplitudes for all orders ``0..nu_max``.

    Returns ``(sign, log_abs)`` of ``f_nu / nu! * exp(-u^2/2)`` where ``f_nu`` is
    the E ratio ``i^nu D_nu(iu) / D_{-nu-1}(u)`` or the M ratio
    ``i^{nu+1} D'_nu(iu) / D'_{-nu-1}(u)``.  Both arrays have shape
    ``(nu_max + 1,) + u.shape``; exact zeros have ``sign == 0``.
    """
    if pol not in ("E", "M"):
        raise DomainError(f"polarization must be 'E' or 'M', got {pol!r}")
    u = np.asarray(u, dtype=float)
    _precision_check(nu_max, u)
    mom = pcf_moments(nu_max, u)
    nu = np.arange(nu_max + 1).reshape((-1,) + (1,) * u.ndim)
    even = (nu % 2) == 0
    half_log = 0.5 * math.log(2.0 / math.pi)
    ch, sh, lb = mom.log_ch[: nu_max + 1], mom.log_sh[: nu_max + 1], mom.log_b
    with np.errstate(divide="ignore", invalid="ignore"):
        if pol == "E":
            log_abs = half_log + np.where(even, ch, sh) - lb[: nu_max + 1]
            sign = np.where(even, 1.0, -1.0) * np.isfinite(log_abs)
        else:
            log_u2 = np.log(0.5 * u)
            x_main = np.where(even, ch, sh)
            y_prev = np.empty_like(ch)
            y_prev[0] = -np.inf
            y_prev[1:] = np.where(even[1:], sh[:-1], ch[:-1])
            num = np.logaddexp(log_u2 + x_main, np.log(nu) + y_prev)
            den = np.logaddexp(log_u2 + lb[: nu_max + 1], lb[1 : nu_max + 2])
            log_abs = half_log + num - den
            sign = np.where(even, -1.0, 1.0) * np.isfinite(log_abs)
    log_abs = np.where(sign == 0, -np.inf, log_abs)
    return sign, log_abs


def _pcf_ratio(nu, u, pol):
    if int(nu) != nu or nu < 0:
        raise DomainError("nu must be a non-negative integer")
    if not math.isfinite(u) or u < 0:
        raise DomainError("u must be finite and >= 0")
    nu = int(nu)
    sign, log_abs = pcf_amplitudes_scaled(nu, float(u), pol)
    s = float(sign[nu])
    if s == 0:
        return 0.0
    log_v = float(log_abs[nu]) + 0.5 * u * u + math.lgamma(nu + 1.0)
    if log_v > _LOG_MAX:
        raise FunctionOverflowError(f"parabolic cylinder ratio overflows at nu={nu}, u={u}")
    return s * math.exp(log_v)


def pcf_ratio_e(nu, u):
    """E-polarization ratio ``i^nu D_nu(iu) / D_{-nu-1}(u)`` (real)."""
    return _pcf_ratio(nu, u, "E")


def pcf_ratio_m(nu, u):
    """M-polarization ratio ``i^{nu+1} D'_nu(iu) / D'_{-nu-1}(u)`` (real)."""
    return _pcf_ratio(nu, u, "M")


def pcf_rotated(nu, u):
    """``i^nu D_nu(iu)`` and its ``u``-derivative ``i^{nu+1} D'_nu(iu)``."""
    if int(nu) != nu or nu < 0 or u < 0:
        raise DomainError("need integer nu >= 0 and u >= 0")
    nu = int(nu)
    mom = pcf_moments(nu + 1, float(u))
    k = math.sqrt(2.0 / math.pi) * math.exp(0.25 * u * u)

    def s_val(m):
        if m < 0:
            return 0.0
        if m % 2 == 0:
            return math.exp(float(mom.log_ch[m]))
        return -math.exp(float(mom.log_sh[m]))

    # d/du Ch_m = Sh_{m+1}, d/du Sh_m = Ch_{m+1}
    s = s_val(nu)
    ds = math.exp(float(mom.log_sh[nu + 1])) if nu % 2 == 0 else -math.exp(float(mom.log_ch[nu + 1]))
    return ValueAndDerivative(k * s, k * (ds - 0.5 * u * s))


def pcf_negative(nu, u):
    """``D_{-nu-1}(u)`` and ``D'_{-nu-1}(u)`` for integer ``nu >= 0``, ``u >= 0``."""
    if int(nu) != nu or nu < 0 or u < 0:
        raise DomainError("need integer nu >= 0 and u >= 0")
    nu = int(nu)
    lb = _log_b_moments(nu + 1, np.array([float(u)]))[:, 0]
    base = -0.25 * u * u - math.lgamma(nu + 1.0)
    b0 = math.exp(float(lb[nu]) + base)
    b1 = math.exp(float(lb[nu + 1]) + base)
    return ValueAndDerivative(b0, -(0.5 * u * b0 + b1))

"""Materials, media, frequency grids, polarizabilities and result records.

Units: hbar = c = 1 and a single user-chosen length unit.  Response
functions live on the imaginary frequency axis ``omega = i kappa``, where
they are real and positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, ExtrapolationError


# --------------------------------------------------------------------------
# Materials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PerfectConductor:
    """Ideal metal.  Handled by exact limits, never as a large epsilon."""


@dataclass(frozen=True)
class Constant:
    """Frequency-independent ``epsilon`` and ``mu``."""

    eps: float
    mu: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise DomainError(f"eps must be finite and positive, got {self.eps}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"mu must be finite and positive, got {self.mu}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Sampled ``epsilon(i kappa)`` and ``mu(i kappa)``.

    Interpolation is monotone cubic (PCHIP) in ``log kappa``.  Queries outside
    ``[kappa[0], kappa[-1]]`` raise :class:`ExtrapolationError` unless
    ``extrapolate`` is set, in which case the end values are held constant.
    """

    kappa: tuple
    eps: tuple
    mu: tuple
    extrapolate: bool = False
    _eps_fit: object = field(init=False, repr=False)
    _mu_fit: object = field(init=False, repr=False)

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        e = np.asarray(self.eps, dtype=float)
        m = np.asarray(self.mu, dtype=float)
        if k.ndim != 1 or k.size < 2 or e.shape != k.shape or m.shape != k.shape:
            raise DomainError("table needs at least two rows of equal length")
        if np.any(k <= 0) or np.any(np.diff(k) <= 0):
            raise DomainError("kappa samples must be positive and strictly increasing")
        if np.any(e <= 0) or np.any(m <= 0) or not np.all(np.isfinite(e * m)):
            raise DomainError("eps and mu samples must be finite and positive")
        object.__setattr__(self, "kappa", tuple(k))
        object.__setattr__(self, "eps", tuple(e))
        object.__setattr__(self, "mu", tuple(m))
        object.__setattr__(self, "_eps_fit", PchipInterpolator(np.log(k), e, extrapolate=False))
        object.__setattr__(self, "_mu_fit", PchipInterpolator(np.log(k), m, extrapolate=False))

    def __call__(self, kappa):
        k = np.asarray(kappa, dtype=float)
        lo, hi = self.kappa[0], self.kappa[-1]
        outside = (k < lo) | (k > hi)
        if np.any(outside) and not self.extrapolate:
            raise ExtrapolationError(f"kappa outside table range [{lo}, {hi}]")
        kc = np.clip(k, lo, hi)
        lk = np.log(kc)
        e = self._eps_fit(lk)
        m = self._mu_fit(lk)
        # PCHIP reproduces the nodes up to rounding; pin them exactly
        idx = np.searchsorted(self.kappa, kc)
        idx = np.minimum(idx, len(self.kappa) - 1)
        hit = np.asarray(self.kappa)[idx] == kc
        e = np.where(hit, np.asarray(self.eps)[idx], e)
        m = np.where(hit, np.asarray(self.mu)[idx], m)
        return e, m


Material = Union[PerfectConductor, Constant, Tabulated]

PERFECT_CONDUCTOR = PerfectConductor()
VACUUM_MATERIAL = Constant(1.0, 1.0)


class Response(NamedTuple):
    """Material response at one imaginary frequency.

    ``perfect`` marks the ideal-metal sentinel; ``eps`` is then ``inf`` and
    ``mu`` is meaningless, and reflection code must branch on the flag.
    """

    eps: float
    mu: float
    perfect: bool = False


def eval_material(material, kappa):
    """Evaluate ``(epsilon, mu)`` at imaginary frequency ``kappa > 0``."""
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    if isinstance(material, PerfectConductor):
        return Response(math.inf, 1.0, True)
    if isinstance(material, Constant):
        return Response(material.eps, material.mu)
    if isinstance(material, Tabulated):
        e, m = material(kappa)
        return Response(float(e), float(m))
    raise DomainError(f"unknown material {material!r}")


def load_material_table(path, extrapolate=False):
    """Read a ``kappa eps [mu]`` text table (``#`` starts a comment)."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (2, 3):
            raise DomainError(f"{path}:{lineno}: expected 2 or 3 columns")
        vals = [float(p) for p in parts]
        rows.append(vals + [1.0] * (3 - len(vals)))
    if not rows:
        raise DomainError(f"{path}: no data rows")
    arr = np.array(rows)
    return Tabulated(tuple(arr[:, 0]), tuple(arr[:, 1]), tuple(arr[:, 2]), extrapolate)


@dataclass(frozen=True)
class Medium:
    """Homogeneous background filling the space between objects.

    ``material`` supplies both ``eps_M(i kappa)`` and ``mu_M(i kappa)``.
    """

    material: Material = VACUUM_MATERIAL

    def __post_init__(self):
        if isinstance(self.material, PerfectConductor):
            raise DomainError("a medium cannot be a perfect conductor")

    def response(self, kappa):
        return eval_material(self.material, kappa)

    def index(self, kappa):
        """Refractive index ``n_M(i kappa) = sqrt(eps_M mu_M)``."""
        r = self.response(kappa)
        return math.sqrt(r.eps * r.mu)

    @property
    def is_vacuum(self):
        return self.material == VACUUM_MATERIAL


VACUUM = Medium()


# --------------------------------------------------------------------------
# Frequencies
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Imaginary frequencies with weights.

    Use :meth:`zero_temperature` for a quadrature rule on ``(0, inf)`` or
    :meth:`matsubara` for the discrete thermal sum.
    """

    mode: str
    kappa: np.ndarray
    weights: np.ndarray
    temperature: float = 0.0

    @classmethod
    def zero_temperature(cls, nodes, weights):
        k = np.asarray(nodes, dtype=float)
        w = np.asarray(weights, dtype=float)
        if k.shape != w.shape or np.any(k <= 0) or np.any(w <= 0):
            raise DomainError("quadrature nodes and weights must be positive")
        return cls("zero-temperature", k, w)

    @classmethod
    def matsubara(cls, temperature, count, kappa_min=1e-8):
        """``kappa_n = 2 pi n T`` for ``n < count``; weight ``1/2`` at ``n = 0``.

        The zero mode is evaluated at ``kappa_min`` instead of exactly 0.
        """
        if not temperature > 0 or count < 1:
            raise DomainError("need temperature > 0 and count >= 1")
        n = np.arange(count, dtype=float)
        k = 2.0 * math.pi * temperature * n
        k[0] = kappa_min
        w = np.ones(count)
        w[0] = 0.5
        return cls("matsubara", k, w, float(temperature))


# --------------------------------------------------------------------------
# Polarizabilities
# --------------------------------------------------------------------------

def _sym3(m, name):
    a = np.array(m, dtype=float)
    if a.shape != (3, 3):
        raise DomainError(f"{name} polarizability must be 3x3")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} polarizability must be finite")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(np.abs(a).max(), 1e-300)):
        raise DomainError(f"{name} polarizability must be symmetric")
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PolarizabilityTensor:
    """Static electric (``alpha``) and magnetic (``beta``) dipole tensors."""

    electric: np.ndarray
    magnetic: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "electric", _sym3(self.electric, "electric"))
        object.__setattr__(self, "magnetic", _sym3(self.magnetic, "magnetic"))

    @classmethod
    def isotropic(cls, alpha, beta=0.0):
        return cls(alpha * np.eye(3), beta * np.eye(3))

    def rotated(self, rot):
        """``R a R^T`` for both tensors."""
        rot = np.asarray(rot, dtype=float)
        return PolarizabilityTensor(rot @ self.electric @ rot.T, rot @ self.magnetic @ rot.T)


def rotation(theta, psi=0.0):
    """Rotate by ``theta`` about x and then by ``psi`` about z."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, ct, -st], [0.0, st, ct]])
    rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    return rz @ rx


def depolarizing_factors(R, L):
    """Depolarizing factors ``(n1, n2, n3)`` of a spheroid.

    ``L`` is the length of the symmetry (3) axis and ``R`` the equatorial
    radius.  Prolate (``L > 2R``) and oblate (``L < 2R``) shapes both use
    real arithmetic; near the sphere a power series in ``e^2`` is used.
    """
    if not (R > 0 and L > 0):
        raise DomainError("R and L must be positive")
    z = 1.0 - 4.0 * R * R / (L * L)  # e^2, negative for oblate
    if abs(z) < 0.1:
        s, term, k = 0.0, 1.0, 0
        while True:
            add = term / (2 * k + 3)
            s += add
            if abs(add) < 1e-18 * abs(s):
                break
            term *= z
            k += 1
        n3 = (1.0 - z) * s
    elif z > 0:
        e = math.sqrt(z)
        n3 = (1.0 - z) / (2.0 * e ** 3) * (math.log1p(e) - math.log1p(-e) - 2.0 * e)
    else:
        g = math.sqrt(-z)
        n3 = (1.0 + g * g) * (g - math.atan(g)) / g ** 3
    n1 = 0.5 * (1.0 - n3)
    return n1, n1, n3


def spheroid_polarizability(R, L, eps, mu=1.0):
    """Static polarizability tensors of a spheroid in its principal frame.

    Parameters
    ----------
    R, L : float
        Equatorial radius and symmetry-axis length.
    eps : float or PerfectConductor
        Static permittivity.  A perfect conductor has ``eps -> inf`` for the
        electric and ``mu -> 0`` for the magnetic response.
    mu : float
        Static permeability (ignored for perfect conductors).
    """
    n = np.array(depolarizing_factors(R, L))
    vol = R * R * L / 6.0  # V / 4pi with V = (4pi/3) R^2 (L/2)
    if isinstance(eps, PerfectConductor):
        alpha = vol / n
        beta = -vol / (1.0 - n)
    else:
        if not (eps > 0 and mu > 0):
            raise DomainError("eps and mu must be positive")
        alpha = vol * (eps - 1.0) / (1.0 + (eps - 1.0) * n)
        beta = vol * (mu - 1.0) / (1.0 + (mu - 1.0) * n)
    return PolarizabilityTensor(np.diag(alpha), np.diag(beta))


# --------------------------------------------------------------------------
# Results and geometry descriptors
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyResult:
    """An energy with its error budget.

    ``value`` is in hbar = c = 1 units; each solver documents its
    normalization (per unit length for the cylindrical geometries).
    """

    value: float
    truncation_order: int = 0
    quadrature_error: float = 0.0
    truncation_error: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError("energy must be finite")
        if self.quadrature_error < 0 or self.truncation_error < 0:
            raise DomainError("error estimates must be non-negative")

    def __add__(self, other):
        if not isinstance(other, EnergyResult):
            return NotImplemented
        return EnergyResult(
            self.value + other.value,
            max(self.truncation_order, other.truncation_order),
            self.quadrature_error + other.quadrature_error,
            self.truncation_error + other.truncation_error,
        )

    def scaled(self, factor):
        f = abs(factor)
        return replace(
            self,
            value=self.value * factor,
            quadrature_error=self.quadrature_error * f,
            truncation_error=self.truncation_error * f,
        )


@dataclass(frozen=True)
class TwoCylinders:
    """Two parallel cylinders of radius ``R`` with axes ``d`` apart."""

    R: float
    d: float

    def __post_init__(self):
        if not (self.R > 0 and self.d > 2 * self.R):
            raise DomainError("two cylinders need R > 0 and d > 2R")

    @property
    def separation(self):
        return self.d

    def with_separation(self, d):
        return replace(self, d=d)


@dataclass(frozen=True)
class CylinderPlate:
    """A cylinder of radius ``R`` whose axis is ``H`` above a plate."""

    R: float
    H: float

    def __post_init__(self):
        if not (self.R > 0 and self.H > self.R):
            raise DomainError("cylinder-plate needs R > 0 and H > R")

    @property
    def separation(self):
        return self.H

    def with_separation(self, H):
        return replace(self, H=H)


@dataclass(frozen=True)
class ParabolaPlate:
    """Parabolic cylinder ``y = (x^2 - R^2)/2R`` with focus ``d`` above a plate.

    ``theta`` tilts the parabola's axis away from the plate normal.  The
    surface-to-plate distance at ``theta = 0`` is ``H = d - R/2``.
    """

    R: float
    d: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.R >= 0:
            raise DomainError("R must be non-negative")
        if not self.d - 0.5 * self.R > 0:
            raise DomainError("need H = d - R/2 > 0")
        if not abs(self.theta) < 0.5 * math.pi:
            raise DomainError("theta must lie in (-pi/2, pi/2)")

    @property
    def H(self):
        return self.d - 0.5 * self.R

    @property
    def separation(self):
        return self.d

    def with_separation(self, d):
        return replace(self, d=d)

"""Classification of materials and a numerical check of the no-levitation rule.

An object whose ``eps`` exceeds the medium's while its ``mu`` does not (at
every relevant imaginary frequency) has a positive potential; the opposite
inequalities give a negative one.  Objects of one class only cannot hold
each other in stable equilibrium: the Laplacian of their interaction energy
is non-positive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoisyStencilError
from .model import VACUUM, PerfectConductor, eval_material


class MaterialClass(str, enum.Enum):
    POSITIVE = "PositivePotential"
    NEGATIVE = "NegativePotential"
    INDETERMINATE = "Indeterminate"


class Verdict(str, enum.Enum):
    EXCLUDED = "StableEquilibriumExcluded"
    NOT_EXCLUDED = "NotExcluded"


def kappa_samples(separation, count=41):
    """Log-spaced ``kappa`` in ``[1/(100 s), 100/s]`` for separation ``s``."""
    if not separation > 0:
        raise DomainError("separation must be positive")
    return np.geomspace(0.01 / separation, 100.0 / separation, count)


@dataclass(frozen=True)
class Classification:
    label: MaterialClass
    violations: tuple  # kappa values that break the majority inequality, if any


def classify_detail(obj, medium=VACUUM, kappas=None):
    """Like :func:`classify` but also reports the offending frequencies.

    For an indeterminate object ``violations`` lists the samples where the
    positive-class inequalities fail (or all samples if none satisfy them).
    A perfect conductor counts as ``eps -> inf``, ``mu -> 0``.
    """
    kappas = kappa_samples(1.0) if kappas is None else np.atleast_1d(np.asarray(kappas, dtype=float))
    if kappas.size == 0:
        raise DomainError("need at least one kappa sample")
    pos, neg = [], []
    for k in kappas:
        m = medium.response(float(k))
        if isinstance(obj, PerfectConductor):
            pos.append(True)
            neg.append(False)
            continue
        r = eval_material(obj, float(k))
        pos.append(r.eps > m.eps and r.mu <= m.mu)
        neg.append(r.eps < m.eps and r.mu >= m.mu)
    pos, neg = np.array(pos), np.array(neg)
    if pos.all():
        return Classification(MaterialClass.POSITIVE, ())
    if neg.all():
        return Classification(MaterialClass.NEGATIVE, ())
    bad = kappas[~pos] if pos.any() or not neg.any() else kappas[~neg]
    return Classification(MaterialClass.INDETERMINATE, tuple(float(k) for k in bad))


def classify(obj, medium=VACUUM, kappas=None):
    """Sign class of an object's potential relative to ``medium``."""
    return classify_detail(obj, medium, kappas).label


def verdict(classes):
    """Stable equilibrium is excluded when all objects share a definite class."""
    classes = [MaterialClass(c) for c in classes]
    if not classes:
        raise DomainError("need at least one object")
    if all(c is MaterialClass.POSITIVE for c in classes) or all(c is MaterialClass.NEGATIVE for c in classes):
        return Verdict.EXCLUDED
    return Verdict.NOT_EXCLUDED


def laplacian_check(energy, point, step, dims=3, tol=0.0):
    """Central-difference Laplacian of ``energy`` at ``point``.

    ``energy`` takes a length-3 displacement array.  With ``dims=2`` only
    the first two (transverse) directions are summed, which is the full
    Laplacian for systems translation-invariant along the third axis.
    ``tol`` is the absolute accuracy of one energy evaluation; the result
    is rejected when the stencil signal is below ten times that.
    """
    if dims not in (2, 3):
        raise DomainError("dims must be 2 or 3")
    if not step > 0:
        raise DomainError("step must be positive")
    x0 = np.asarray(point, dtype=float).reshape(3)
    e0 = energy(x0)
    total = 0.0
    for i in range(dims):
        dx = np.zeros(3)
        dx[i] = step
        total += energy(x0 + dx) - 2.0 * e0 + energy(x0 - dx)
    if total != 0.0 and abs(total) < 10.0 * tol:
        raise NoisyStencilError("Laplacian stencil is dominated by evaluation noise")
    return total / (step * step)


def radial_laplacian(energy_of_distance, r, step, dims=3, tol=0.0):
    """:func:`laplacian_check` for an energy that depends on distance only."""
    def e(x):
        return energy_of_distance(math.sqrt((r + x[0]) ** 2 + x[1] ** 2 + x[2] ** 2))

    return laplacian_check(e, np.zeros(3), step, dims, tol)

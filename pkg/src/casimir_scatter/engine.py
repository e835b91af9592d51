"""Generic numerical machinery shared by the geometry solvers.

* ``log det(I - N)`` through a pivoted LU factorization,
* Gauss-Legendre quadrature on ``(0, inf)`` with node doubling,
* Matsubara sums with the half-weighted zero mode,
* truncation-order convergence with extrapolation,
* an ordered thread map (``CASIMIR_THREADS`` caps the worker count).

Every reduction sums in a fixed order with ``math.fsum``, so results do not
depend on the number of workers.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor

from .errors import ConvergenceError, DomainError, NoisyStencilError, SingularRoundTripError
from .model import EnergyResult


# --------------------------------------------------------------------------
# Determinants
# --------------------------------------------------------------------------

def logdet_i_minus(N):
    """``log det(I - N)`` for a real square matrix ``N``.

    Raises
    ------
    SingularRoundTripError
        If ``I - N`` is singular or its determinant is not positive.
    """
    N = np.asarray(N, dtype=float)
    if N.ndim != 2 or N.shape[0] != N.shape[1]:
        raise DomainError("round-trip matrix must be square")
    if N.size == 0 or not N.any():
        return 0.0
    if not np.all(np.isfinite(N)):
        raise SingularRoundTripError("round-trip matrix has non-finite entries")
    with warnings.catch_warnings():
        # a singular factor is reported below as SingularRoundTripError
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(np.eye(N.shape[0]) - N, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0):
        raise SingularRoundTripError("I - N is singular")
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    sign = (-1) ** swaps * np.prod(np.sign(diag))
    if sign <= 0:
        raise SingularRoundTripError("det(I - N) is not positive")
    return float(np.sum(np.log(np.abs(diag))))


def logdet_ratio(blocks):
    """``log det(M) - sum_a log det(M_aa)`` for a block matrix of objects.

    ``blocks[a][b]`` is the ``(a, b)`` block.  For two objects with
    ``M = [[A, B], [C, D]]`` this equals ``log det(I - A^-1 B D^-1 C)``.
    """
    m = len(blocks)
    if m == 0 or any(len(row) != m for row in blocks):
        raise DomainError("blocks must form a square array")
    full = np.block([[np.asarray(b, dtype=float) for b in row] for row in blocks])
    total = np.linalg.slogdet(full)
    parts = [np.linalg.slogdet(np.asarray(blocks[a][a], dtype=float)) for a in range(m)]
    if total[0] <= 0 or any(p[0] <= 0 for p in parts):
        raise SingularRoundTripError("block determinant is not positive")
    return float(total[1] - math.fsum(p[1] for p in parts))


# --------------------------------------------------------------------------
# Parallel map
# --------------------------------------------------------------------------

def worker_count():
    """Workers allowed by ``CASIMIR_THREADS`` (default: CPU count)."""
    env = os.environ.get("CASIMIR_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"CASIMIR_THREADS must be an integer, got {env!r}") from None
    return cpus


def ordered_map(func, items, workers=None):
    """``[func(x) for x in items]``, possibly evaluated on several threads."""
    items = list(items)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

@lru_cache(maxsize=64)
def gauss_legendre(n):
    """Cached ``n``-point Gauss-Legendre rule on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre rule mapped to ``(0, inf)``.

    ``transform`` is ``"rational"`` (``k = s t/(1-t)``) or ``"exponential"``
    (``k = -s log(1-t)``).  ``scale`` should be about the inverse surface
    separation.  Nodes double from ``nodes`` until two successive estimates
    agree to ``tol`` (relative) or ``max_nodes`` is reached.
    """

    nodes: int = 32
    transform: str = "rational"
    scale: float = 1.0
    tol: float = 1e-6
    max_nodes: int = 1024

    def __post_init__(self):
        if self.transform not in ("rational", "exponential"):
            raise DomainError(f"unknown transform {self.transform!r}")
        if self.nodes < 1 or self.max_nodes < self.nodes:
            raise DomainError("need 1 <= nodes <= max_nodes")
        if not (self.scale > 0 and self.tol > 0):
            raise DomainError("scale and tol must be positive")

    def rule(self, n):
        """Nodes and positive weights of the ``n``-point mapped rule."""
        t, w = gauss_legendre(n)
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        if self.transform == "rational":
            return self.scale * t / (1.0 - t), w * self.scale / (1.0 - t) ** 2
        return -self.scale * np.log1p(-t), w * self.scale / (1.0 - t)


def _apply_rule(f, spec, n, workers):
    x, w = spec.rule(n)
    vals = ordered_map(f, x, workers)
    return math.fsum(float(wi) * float(v) for wi, v in zip(w, vals))


def integrate_half_line(f, spec, workers=None):
    """``int_0^inf f(x) dx`` with node doubling.

    Returns ``(value, error_estimate, nodes_used)``.
    """
    n = spec.nodes
    prev = _apply_rule(f, spec, n, workers)
    history = [prev]
    while True:
        if 2 * n > spec.max_nodes:
            raise ConvergenceError("quadrature did not converge", history[-2:])
        n *= 2
        cur = _apply_rule(f, spec, n, workers)
        history.append(cur)
        err = abs(cur - prev)
        if err <= spec.tol * abs(cur) or err == 0.0:
            return cur, err, n
        prev = cur


def integrate_zero_t(integrand, spec, workers=None):
    """Zero-temperature energy ``(1/2 pi) int_0^inf integrand(kappa) dkappa``."""
    val, err, _ = integrate_half_line(integrand, spec, workers)
    return EnergyResult(val / (2.0 * math.pi), 0, err / (2.0 * math.pi), 0.0)


KAPPA_MIN = 1e-8


def matsubara_sum(integrand, temperature, cutoff=None, tol=1e-8, chunk=16, max_terms=1 << 16,
                  workers=None):
    """Thermal energy ``T [ f(0)/2 + sum_{n>=1} f(2 pi n T) ]``.

    The zero mode is evaluated at ``kappa = 1e-8``.  With ``cutoff`` the sum
    has exactly ``cutoff`` terms; otherwise chunks of ``chunk`` terms are
    added until a chunk changes the sum by less than ``tol`` (relative).
    """
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    step = 2.0 * math.pi * temperature

    def kappa(n):
        return KAPPA_MIN if n == 0 else step * n

    terms = []
    if cutoff is not None:
        if cutoff < 1:
            raise DomainError("cutoff must be >= 1")
        terms = ordered_map(lambda n: integrand(kappa(n)), range(cutoff), workers)
        terms[0] *= 0.5
        return EnergyResult(temperature * math.fsum(terms), cutoff, 0.0, temperature * abs(terms[-1]))
    n0 = 0
    last = 0.0
    while n0 < max_terms:
        block = ordered_map(lambda n: integrand(kappa(n)), range(n0, n0 + chunk), workers)
        if n0 == 0:
            block[0] *= 0.5
        terms.extend(block)
        n0 += chunk
        total = math.fsum(terms)
        last = math.fsum(block)
        if abs(last) <= tol * abs(total) or total == 0.0:
            return EnergyResult(temperature * total, n0, 0.0, temperature * abs(last))
    raise ConvergenceError("Matsubara sum did not converge", [temperature * math.fsum(terms)])


# --------------------------------------------------------------------------
# Truncation order
# --------------------------------------------------------------------------

def extrapolate(orders, values, model="geometric", power=2.0):
    """Limit of a truncation sequence from its last samples.

    ``geometric`` assumes ``A + B q^n`` and applies Aitken's delta-squared to
    the last three (equally spaced) orders.  ``algebraic`` assumes
    ``A + B n^-power`` and solves from the last two.
    """
    orders = [float(o) for o in orders]
    values = [float(v) for v in values]
    if model == "geometric":
        if len(values) < 3:
            return values[-1]
        n0, n1, n2 = orders[-3:]
        if not math.isclose(n1 - n0, n2 - n1):
            raise DomainError("geometric extrapolation needs equally spaced orders")
        a0, a1, a2 = values[-3:]
        den = (a2 - a1) - (a1 - a0)
        if den == 0.0 or (a2 - a1) == 0.0:
            return a2
        q = (a2 - a1) / (a1 - a0) if a1 != a0 else 0.0
        if not abs(q) < 1.0:
            # not a contracting sequence; no reliable tail
            return a2
        return a2 - (a2 - a1) ** 2 / den
    if model == "algebraic":
        if len(values) < 2:
            return values[-1]
        n1, n2 = orders[-2:]
        a1, a2 = values[-2:]
        w1, w2 = n1 ** power, n2 ** power
        return (a2 * w2 - a1 * w1) / (w2 - w1)
    raise DomainError(f"unknown extrapolation model {model!r}")


def converge_truncation(solver, n_start, tol, step=None, n_cap=400, model="geometric", power=2.0):
    """Raise the truncation order until the energy settles, then extrapolate.

    ``solver(n)`` returns a float or :class:`EnergyResult`.  Orders run
    ``n_start, n_start + step, ...`` (``step`` defaults to ``n_start``).
    Converged when successive values differ by less than ``tol`` relative.
    """
    if n_start < 1 or tol <= 0:
        raise DomainError("need n_start >= 1 and tol > 0")
    step = n_start if step is None else int(step)
    orders, values, quad_err = [], [], 0.0
    n = int(n_start)
    while n <= n_cap:
        r = solver(n)
        if isinstance(r, EnergyResult):
            quad_err = r.quadrature_error
            r = r.value
        orders.append(n)
        values.append(float(r))
        if len(values) >= 2:
            change = abs(values[-1] - values[-2])
            if change <= tol * abs(values[-1]) or change == 0.0:
                limit = extrapolate(orders, values, model, power)
                return EnergyResult(limit, n, quad_err, change)
        n += step
    raise ConvergenceError(f"truncation did not converge by order {n_cap}", values[-2:])


# --------------------------------------------------------------------------
# Differentiation
# --------------------------------------------------------------------------

def central_derivative(f, x, rel_step=1e-3, noise=0.0):
    """``f'(x)`` from central differences with one Richardson step.

    ``noise`` is the absolute accuracy of ``f``; the stencil is rejected with
    :class:`NoisyStencilError` when its difference is below ten times that.
    """
    h = rel_step * abs(x) if x != 0 else rel_step
    fp, fm = f(x + h), f(x - h)
    fp2, fm2 = f(x + 0.5 * h), f(x - 0.5 * h)
    if abs(fp2 - fm2) < 10.0 * noise:
        raise NoisyStencilError("finite-difference signal below the energy noise floor")
    d1 = (fp - fm) / (2.0 * h)
    d2 = (fp2 - fm2) / h
    return (4.0 * d2 - d1) / 3.0

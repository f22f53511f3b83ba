"""Adaptive quadrature on (0, 1) with endpoint-singularity handling.

Thin wrapper around QUADPACK.  Integrands arising here are smooth except
for integrable singularities at the interval endpoints (log or inverse
power below 1) and isolated interior kinks.  The interval is split at
caller-supplied interior points, and the outermost pieces are computed
after the substitutions y = e^t (near 0) and y = 1 - e^t (near 1), which
turn the endpoint behaviour into a smooth exponentially-damped tail.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Adaptive refinement failed to reach the requested tolerance."""


# Truncation point for the e^t substitution; the omitted tail has mass
# below e^-600 times the (integrable) singular scale.
_LOG_CUT = -600.0
# Near 1 the substitution stops where 1 - e^t is still representable
# below 1.0; integrands here are bounded at 1, so the omitted mass is
# at most ~1e-15 times their sup.
_LOG_CUT_ONE = math.log(1.0e-15)
# Outermost pieces narrower than this are handled by substitution.
_EDGE_WIDTH = 0.25


def _quad(f, a, b, epsabs, epsrel, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            f, a, b, epsabs=epsabs, epsrel=epsrel, limit=200, points=points
        )
    return val, err


def integrate_01(f, points=(), epsabs=1.0e-13, epsrel=1.0e-10):
    """Integrate f over (0, 1), splitting at the given interior points.

    Returns the integral estimate.  Raises QuadratureError if the summed
    QUADPACK error estimates are far outside the requested tolerance.
    """
    cuts = sorted(p for p in set(float(p) for p in points) if 0.0 < p < 1.0)
    lo_edge = min(_EDGE_WIDTH, cuts[0]) if cuts else _EDGE_WIDTH
    hi_edge = max(1.0 - _EDGE_WIDTH, cuts[-1]) if cuts else 1.0 - _EDGE_WIDTH

    total = 0.0
    total_err = 0.0

    # (0, lo_edge] via y = e^t
    val, err = _quad(
        lambda t: f(math.exp(t)) * math.exp(t),
        _LOG_CUT,
        math.log(lo_edge),
        epsabs,
        epsrel,
    )
    total += val
    total_err += err

    # interior pieces between cuts
    inner = [lo_edge] + [c for c in cuts if lo_edge < c < hi_edge] + [hi_edge]
    for a, b in zip(inner[:-1], inner[1:]):
        if b - a <= 0:
            continue
        val, err = _quad(f, a, b, epsabs, epsrel)
        total += val
        total_err += err

    # [hi_edge, 1) via y = 1 - e^t
    val, err = _quad(
        lambda t: f(1.0 - math.exp(t)) * math.exp(t),
        _LOG_CUT_ONE,
        math.log(1.0 - hi_edge),
        epsabs,
        epsrel,
    )
    total += val
    total_err += err

    tol = max(epsabs * 10, abs(total) * epsrel * 100)
    if total_err > tol and total_err > 1.0e-9:
        raise QuadratureError(
            f"quadrature error estimate {total_err:.3e} exceeds tolerance "
            f"(value {total:.6e}, requested epsrel={epsrel:.0e}, epsabs={epsabs:.0e})"
        )
    return total


def integrate_interval(f, a, b, points=(), epsabs=1.0e-13, epsrel=1.0e-10):
    """Integrate f over (a, b) with optional interior split points."""
    if not (b > a):
        raise ValueError(f"empty interval ({a}, {b})")
    cuts = sorted(p for p in set(float(p) for p in points) if a < p < b)
    val, err = _quad(f, a, b, epsabs, epsrel, points=cuts or None)
    tol = max(epsabs * 10, abs(val) * epsrel * 100)
    if err > tol and err > 1.0e-9:
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} exceeds tolerance on ({a}, {b})"
        )
    return val


def gauss_legendre_log_grid(lo, n_panels=12, n_nodes=40):
    """Nodes/weights for integrating over (lo, 1) in log space.

    Returns arrays (y, w) such that sum(w * f(y)) approximates
    the integral of f(y)/y over (lo, 1) ... multiplied back: the pair
    satisfies integral_{lo}^{1} g(y) dy ~= sum(w * y * g(y)) with the
    change of variables t = log y applied on a composite Gauss-Legendre
    grid.  Used by the vectorised bound-audit path; accuracy is checked
    against the adaptive engine in the tests.
    """
    t_lo = math.log(lo)
    edges = np.linspace(t_lo, 0.0, n_panels + 1)
    xs, ws = np.polynomial.legendre.leggauss(n_nodes)
    t = np.concatenate(
        [(0.5 * (b - a)) * xs + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])]
    )
    w = np.concatenate(
        [(0.5 * (b - a)) * ws for a, b in zip(edges[:-1], edges[1:])]
    )
    y = np.exp(t)
    return y, w * y

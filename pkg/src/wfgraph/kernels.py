"""Diffusion kernels for the per-edge Wright-Fisher excursion.

All quantities refer to the one-dimensional diffusion
dxi = gamma * xi * (1 - xi) ds + sqrt(xi * (1 - xi)) dB on (0, 1),
absorbed at the endpoints.  gamma is the directional selection
coefficient of the edge.  Everything is evaluated through expm1-style
primitives so that 1 - e^{-z} never loses precision, with analytic
gamma -> 0 limit branches below |gamma| = 1e-6.
"""

from __future__ import annotations

import math

import numpy as np

from .graph import MAX_GAMMA
from .quadrature import _quad, integrate_01, integrate_interval

# Below this the gamma -> 0 series branches are used.
GAMMA_SWITCH = 1.0e-6


def _check_gamma(gamma):
    g = float(gamma)
    if not math.isfinite(g):
        raise ValueError("gamma must be finite")
    if abs(g) > MAX_GAMMA:
        raise ValueError(
            f"|gamma| = {abs(g):.3e} exceeds the sanity bound {MAX_GAMMA:.0e}; "
            "exponentials of 2*gamma are not representable beyond it"
        )
    return g


def scale_fn(gamma, x):
    """Scale function S(x) = (1 - e^{-2 gamma x}) / (2 gamma), S(x) = x when gamma = 0.

    Natural scale of the excursion diffusion: S(0) = 0 and the
    probability of fixation from x is S(x)/S(1).
    """
    gamma = _check_gamma(gamma)
    x = np.asarray(x, dtype=float)
    if abs(gamma) < GAMMA_SWITCH:
        # x - gamma x^2 + (2/3) gamma^2 x^3; truncation error O((gamma x)^3 x)
        out = x * (1.0 - gamma * x * (1.0 - (2.0 / 3.0) * gamma * x))
    else:
        out = -np.expm1(-2.0 * gamma * x) / (2.0 * gamma)
    return out if out.ndim else float(out)


def fixation_prob(gamma, x):
    """Probability the excursion started at x in [0, 1] is absorbed at 1.

    Equals S(x)/S(1); reduces to x for gamma = 0.  Stable against
    overflow for negative gamma via e^{2|g|(x-1)} (1-e^{-2|g|x}) / (1-e^{-2|g|}).
    """
    gamma = _check_gamma(gamma)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    if abs(gamma) < GAMMA_SWITCH:
        out = x + gamma * x * (1.0 - x) * (1.0 + (gamma / 3.0) * (1.0 - 2.0 * x))
    elif gamma > 0:
        out = np.expm1(-2.0 * gamma * x) / math.expm1(-2.0 * gamma)
    else:
        b = -2.0 * gamma
        out = np.exp(b * (x - 1.0)) * np.expm1(-b * x) / math.expm1(-b)
    return out if out.ndim else float(out)


def fixation_prob_complement(gamma, x):
    """1 - fixation_prob without cancellation, via 1 - q_g(x) = q_{-g}(1-x)."""
    gamma = _check_gamma(gamma)
    x = np.asarray(x, dtype=float)
    if abs(gamma) < GAMMA_SWITCH:
        out = (1.0 - x) * (1.0 - gamma * x * (1.0 + (gamma / 3.0) * (1.0 - 2.0 * x)))
        return out if out.ndim else float(out)
    return fixation_prob(-gamma, 1.0 - x)


def log_fixation_prob(gamma, x):
    """log fixation_prob(gamma, x), finite even where the probability underflows."""
    gamma = _check_gamma(gamma)
    x = float(x)
    if not 0.0 < x <= 1.0:
        raise ValueError("x must lie in (0, 1]")
    if abs(gamma) < GAMMA_SWITCH:
        return math.log(x) + math.log1p(
            gamma * (1.0 - x) * (1.0 + (gamma / 3.0) * (1.0 - 2.0 * x))
        )
    if gamma > 0:
        return math.log(-math.expm1(-2.0 * gamma * x)) - math.log(
            -math.expm1(-2.0 * gamma)
        )
    b = -2.0 * gamma
    return (
        b * (x - 1.0)
        + math.log(-math.expm1(-b * x))
        - math.log(-math.expm1(-b))
    )


def fixation_weight(gamma):
    """Large-population fixation weight: N q(1/N) -> 2 gamma / (1 - e^{-2 gamma}).

    Equals 1 at gamma = 0 and satisfies w(-g) = e^{-2g} w(g).
    """
    gamma = _check_gamma(gamma)
    if abs(gamma) < GAMMA_SWITCH:
        return 1.0 + gamma + gamma * gamma / 3.0
    if gamma > 0:
        return -2.0 * gamma / math.expm1(-2.0 * gamma)
    # e^{2 gamma} underflows gracefully for very negative gamma
    return math.exp(2.0 * gamma) * (2.0 * -gamma / -math.expm1(2.0 * gamma))


def log_fixation_weight(gamma):
    """log of fixation_weight, finite for all |gamma| <= MAX_GAMMA."""
    gamma = _check_gamma(gamma)
    if abs(gamma) < GAMMA_SWITCH:
        return math.log1p(gamma + gamma * gamma / 3.0)
    if gamma > 0:
        return math.log(2.0 * gamma) - math.log(-math.expm1(-2.0 * gamma))
    return 2.0 * gamma + log_fixation_weight(-gamma)


# ---------------------------------------------------------------------------
# occupation correction
#
# The expected sojourn mass of an excursion entered at 1/N is
# 2 (1 + log N + K(gamma)) / N to leading order; K is the odd logarithmic
# correction.  It is computed by quadrature for all gamma (no series/
# asymptotic branch), in two algebraically equivalent arrangements chosen
# for uniformly bounded absolute error:
#   - |gamma| < 1: the defining integral over (0, 1),
#   - |gamma| >= 1: substituted form in s = 2 gamma y, whose pieces stay
#     O(1) while the prefactor omega grows like 2 gamma.


def _k_original(gamma):
    a = 2.0 * gamma

    def f(y):
        return -math.log(y) * (math.exp(-a * y) - math.exp(-a * (1.0 - y)))

    val = integrate_01(f, points=(0.5,), epsabs=1.0e-13, epsrel=1.0e-11)
    return fixation_weight(gamma) * val


def _k_substituted(gamma):
    b = 2.0 * gamma
    e = -math.expm1(-b)  # 1 - e^{-b}
    hi = min(b, 60.0)  # truncated tails are below e^-60 * log(b)

    def fa(s):
        return -math.log(s) * math.exp(-s)

    a_val, _ = _quad(fa, 0.0, hi, 1.0e-13, 1.0e-11, points=[min(1.0, hi / 2)])

    def fc(s):
        return -math.log1p(-s / b) * math.exp(-s)

    c_val, _ = _quad(fc, 0.0, hi, 1.0e-13, 1.0e-11)
    return (math.log(b) * e + a_val - c_val) / e


def occupation_correction(gamma):
    """Odd logarithmic correction K(gamma) to the per-edge occupation mass.

    K(0) = 0, K(-g) = -K(g), K(g) <= g on (0, 1], and
    K(g) - log(2 g) -> Euler's constant as g -> infinity.
    Absolute accuracy ~1e-10 across the full gamma range.
    """
    gamma = _check_gamma(gamma)
    if abs(gamma) < GAMMA_SWITCH:
        return gamma
    sign = 1.0 if gamma > 0 else -1.0
    g = abs(gamma)
    val = _k_original(g) if g < 1.0 else _k_substituted(g)
    return sign * val


# ---------------------------------------------------------------------------
# Green's function of the absorbed excursion entered at x


def _qs_upper(gamma, x, y):
    """q(x) * S(1 - y), arranged to avoid overflow for gamma < -300."""
    if abs(gamma) <= 300.0:
        return fixation_prob(gamma, x) * scale_fn(gamma, 1.0 - y)
    if gamma > 0:
        return fixation_prob(gamma, x) * scale_fn(gamma, 1.0 - y)
    b = -2.0 * gamma
    num = np.expm1(-b * x) * np.expm1(-b * (1.0 - y))  # (1-e^{-bx})(1-e^{-b(1-y)})
    return np.exp(b * (x - y)) * num / (b * -math.expm1(-b))


def _qs_lower(gamma, x, y):
    """(1 - q(x)) * S_{-gamma}(y), overflow-safe for gamma > 300."""
    if gamma <= 300.0:
        if abs(gamma) < GAMMA_SWITCH:
            s = y * (1.0 + gamma * y * (1.0 + (2.0 / 3.0) * gamma * y))
        else:
            s = np.expm1(2.0 * gamma * y) / (2.0 * gamma)
        return fixation_prob_complement(gamma, x) * s
    a = 2.0 * gamma
    return fixation_prob(gamma, 1.0 - x) * (np.exp(a * (y - x)) - np.exp(-a * x)) / a


def green_function(gamma, x, y):
    """Expected occupation density at y of the excursion entered at x.

    Two-branch formula: 2 q(x) S(1-y) / (y (1-y)) for y >= x and
    2 (1-q(x)) S_{-gamma}(y) / (y (1-y)) for y <= x; the branches agree
    at y = x.  y may be an array; y in {0, 1} is a domain error (the
    speed density is singular there even though the limit of G exists).
    """
    gamma = _check_gamma(gamma)
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("entry point x must lie strictly inside (0, 1)")
    y_arr = np.asarray(y, dtype=float)
    if np.any((y_arr <= 0.0) | (y_arr >= 1.0)):
        raise ValueError("y must lie strictly inside (0, 1)")
    if y_arr.ndim == 0:
        yf = float(y_arr)
        qs = _qs_upper(gamma, x, yf) if yf >= x else _qs_lower(gamma, x, yf)
        return 2.0 * float(qs) / (yf * (1.0 - yf))
    # both branches are evaluated on the full array; off-branch entries can
    # overflow harmlessly before being discarded by the select
    with np.errstate(over="ignore", invalid="ignore"):
        upper = _qs_upper(gamma, x, y_arr)
        lower = _qs_lower(gamma, x, y_arr)
        out = 2.0 * np.where(y_arr >= x, upper, lower) / (y_arr * (1.0 - y_arr))
    return out


def occupation_integral(gamma, x, g=None, epsrel=1.0e-9):
    """Integral of G(x, y) g(y) over (0, 1); g defaults to 1.

    Splits at y = x (the Green's function has a kink there) and handles
    both endpoints by substitution.  Relative tolerance ~1e-9.
    """
    gamma = _check_gamma(gamma)
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("entry point x must lie strictly inside (0, 1)")
    if g is None:
        f = lambda y: green_function(gamma, x, y)
    else:
        f = lambda y: green_function(gamma, x, y) * g(y)
    return integrate_01(f, points=(x,), epsabs=1.0e-14, epsrel=epsrel * 1.0e-1)


def neutral_occupation(x):
    """Closed form of occupation_integral at gamma = 0: -2(x log x + (1-x) log(1-x))."""
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie strictly inside (0, 1)")
    return -2.0 * (x * math.log(x) + (1.0 - x) * math.log1p(-x))

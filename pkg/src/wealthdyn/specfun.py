"""Log-gamma and the Gauss hypergeometric function 2F1 at z = -1.

Only the slice needed by the closed-form stationary Gini coefficient is
implemented: real log-gamma for positive arguments (Lanczos approximation,
g=7, 9 terms) and 2F1(a, b; c; -1) for real parameters. The point z = -1
sits on the boundary of the series' disc of convergence, so the value is
computed through the Pfaff transformation

    2F1(a, b; c; -1) = 2^(-a) * 2F1(a, c - b; c; 1/2),

which moves the evaluation to z = 1/2 where the power series converges
geometrically for any real parameters (c not a non-positive integer).
Since 2F1 is symmetric in (a, b), the transformation can be applied to
either upper parameter; the variant whose transformed series has fewer
sign alternations (non-negative c - b, when available) is preferred to
avoid cancellation at large parameters.
"""

from __future__ import annotations

import math

from wealthdyn.errors import StatisticsError

# Lanczos coefficients for g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# Series truncation: relative term magnitude below this for 3 consecutive
# terms, hard cap on the number of terms.
_SERIES_RTOL = 1e-16
_SERIES_CAP = 10_000


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0.

    Raises:
        StatisticsError: if x <= 0.
    """
    if not x > 0.0:
        raise StatisticsError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        # Recurrence keeps the Lanczos sum in its accurate range.
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    acc = _LANCZOS_COEFS[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def _is_nonpositive_integer(c: float) -> bool:
    return c <= 0.0 and c == math.floor(c)


def _gauss_series(a: float, b: float, c: float, z: float) -> float:
    """Power series sum of 2F1(a, b; c; z), |z| < 1."""
    total = 1.0
    term = 1.0
    quiet = 0
    for n in range(_SERIES_CAP):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) < _SERIES_RTOL * abs(total):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
    raise StatisticsError(
        f"2F1 series did not converge within {_SERIES_CAP} terms "
        f"(a={a}, b={b}, c={c}, z={z})"
    )


def hyp2f1_at_minus_one(a: float, b: float, c: float) -> float:
    """2F1(a, b; c; -1) for real parameters.

    Evaluated through the Pfaff transformation at z = 1/2 (see module
    docstring), which converges for any real a, b and any c that is not
    a non-positive integer. Relative accuracy ~1e-12 for the moderate
    parameter ranges used here.

    Raises:
        StatisticsError: c is a non-positive integer, or the series does
            not converge within the iteration cap.
    """
    if _is_nonpositive_integer(c):
        raise StatisticsError(f"2F1 undefined for non-positive integer c={c}")
    if c - b < 0.0 <= c - a:
        a, b = b, a
    return 2.0 ** (-a) * _gauss_series(a, c - b, c, 0.5)

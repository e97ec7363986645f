"""Scalar special functions backing the closed-form error-probability engine.

Everything here is pure and stateless, so unrestricted parallel invocation is
safe.  The Gauss hypergeometric evaluator also exposes vectorized helpers used
by the grid-search hot path; the public scalar functions are thin wrappers with
domain checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "EvalTolerance",
    "DEFAULT_TOL",
    "q_func",
    "ln_gamma",
    "mu_ratio",
    "central_binom",
    "gauss_2f1",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class EvalTolerance:
    """Termination control for series evaluation."""

    abs_tol: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self):
        if not (self.abs_tol > 0.0):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_TOL = EvalTolerance()


def q_func(x: float) -> float:
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Evaluated through the complementary error function; absolute error is
    below 1e-12 over the whole real line, and Q(-x) = 1 - Q(x) holds to the
    same accuracy.
    """
    if not math.isfinite(x):
        raise DomainError(f"q_func requires finite x, got {x}")
    return 0.5 * math.erfc(x / _SQRT2)


def ln_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0."""
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def mu_ratio(z: float) -> float:
    """sqrt(z / (1 + z)): maps an average SNR to a fading figure in [0, 1)."""
    if not (z >= 0.0) or not math.isfinite(z):
        raise DomainError(f"mu_ratio requires z >= 0, got {z}")
    return math.sqrt(z / (1.0 + z))


def central_binom(l: int) -> float:
    """Central binomial coefficient C(2l, l).

    Exact below l = 31; evaluated in log space above that to avoid integer
    blow-up when converting to float.
    """
    if l != int(l) or l < 0:
        raise DomainError(f"central_binom requires a non-negative integer, got {l}")
    l = int(l)
    if l <= 30:
        return float(math.comb(2 * l, l))
    return math.exp(math.lgamma(2 * l + 1) - 2.0 * math.lgamma(l + 1))


def _signed_lgamma(x: float) -> tuple[float, float]:
    """(log|Gamma(x)|, sign of Gamma(x)) for non-pole real x."""
    if x > 0.0:
        return math.lgamma(x), 1.0
    if x == math.floor(x):
        raise DomainError(f"Gamma pole at {x}")
    sign = 1.0 if math.floor(x) % 2 == 0 else -1.0
    return math.lgamma(x), sign


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _gamma_ratio(num: tuple[float, ...], den: tuple[float, ...]) -> float:
    """prod Gamma(num) / prod Gamma(den); zero when a denominator hits a pole."""
    if any(_is_nonpositive_int(d) for d in den):
        return 0.0
    log_acc, sign = 0.0, 1.0
    for x in num:
        lg, s = _signed_lgamma(x)
        log_acc += lg
        sign *= s
    for x in den:
        lg, s = _signed_lgamma(x)
        log_acc -= lg
        sign *= s
    return sign * math.exp(log_acc)


def series_2f1(a: float, b: float, c: float, z, abs_tol: float, max_terms: int):
    """Raw 2F1 power series over a scalar or ndarray argument.

    Each element stops accumulating at its own first sub-tolerance term, so a
    value is independent of whatever else shares the array: scalar calls and
    grid sweeps agree bit for bit.  Caller is responsible for picking
    arguments where the series converges usefully (|z| well below 1, or a
    terminating series).
    """
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    if z.size == 0:
        return total
    active = np.ones_like(z, dtype=bool)
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + np.where(active, term, 0.0)
        # Freeze an element only once its terms are both small and shrinking
        # (large a or b make early terms grow before the asymptotic decay).
        # The 1/4 factor keeps the geometric tail under abs_tol.
        ratio_next = (a + k + 1.0) * (b + k + 1.0) / ((c + k + 1.0) * (k + 2.0))
        active = active & ((np.abs(term) >= 0.25 * abs_tol) | (np.abs(ratio_next * z) >= 1.0))
        if not np.any(active):
            return total
    raise ConvergenceError(
        f"2F1 series stalled after {max_terms} terms (a={a}, b={b}, c={c})",
        partial=total,
    )


def linear_2f1(a: float, b: float, c: float, w, abs_tol: float, max_terms: int):
    """2F1(a, b; c; 1-w) via the z -> 1-z linear connection.

    Requires c - a - b non-integer; ``w`` (scalar or ndarray, 0 < w <= 0.5)
    is the exact distance to the singular point, so arguments approaching
    z = 1 keep full precision and geometric convergence.
    """
    s = c - a - b
    coeff1 = _gamma_ratio((c, s), (c - a, c - b))
    coeff2 = _gamma_ratio((c, -s), (a, b))
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    if coeff1 != 0.0:
        out = out + coeff1 * series_2f1(a, b, 1.0 - s, w, abs_tol, max_terms)
    if coeff2 != 0.0:
        out = out + coeff2 * w**s * series_2f1(c - a, c - b, 1.0 + s, w, abs_tol, max_terms)
    return out


def gauss_2f1(a: float, b: float, c: float, z: float, tol: EvalTolerance = DEFAULT_TOL) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) on 0 <= z < 1 with c > 0.

    Direct power series up to z = 0.5; beyond that the z -> 1-z connection
    formula keeps convergence geometric as z -> 1.  Terminating (polynomial)
    cases are summed exactly.  When the connection coefficients degenerate
    (c-a-b within 1e-6 of an integer) an Euler-transformed series is used
    instead, and may legitimately exhaust ``tol.max_terms`` near z = 1.
    """
    for name, val in (("a", a), ("b", b), ("c", c), ("z", z)):
        if not math.isfinite(val):
            raise DomainError(f"gauss_2f1 requires finite {name}, got {val}")
    if not (c > 0.0):
        raise DomainError(f"gauss_2f1 requires c > 0, got {c}")
    if not (0.0 <= z < 1.0):
        raise DomainError(f"gauss_2f1 requires 0 <= z < 1, got {z}")
    if z == 0.0:
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        # Terminating series: exact finite sum regardless of z.
        degrees = [int(-v) for v in (a, b) if _is_nonpositive_int(v)]
        n = min(degrees)
        term, total = 1.0, 1.0
        for k in range(n):
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
            total += term
        return total
    if z <= 0.5:
        return float(series_2f1(a, b, c, z, tol.abs_tol, tol.max_terms))
    s = c - a - b
    if abs(s - round(s)) > 1e-6:
        return float(linear_2f1(a, b, c, 1.0 - z, tol.abs_tol, tol.max_terms))
    # Logarithmic connection case: fall back to the Euler transform when it
    # improves the tail (maps c-a-b to its negative), else the raw series.
    if s < 0.0:
        val = (1.0 - z) ** s * series_2f1(c - a, c - b, c, z, tol.abs_tol, tol.max_terms)
        return float(val)
    return float(series_2f1(a, b, c, z, tol.abs_tol, tol.max_terms))

"""Closed-form bit-error-probability engine for the two-phase relay link.

The far stream (decoded under superposition interference) and the near stream
(decoded at the relay after imperfect successive interference cancellation)
both reduce to weighted sums of one fading-averaged BPSK kernel.  The kernel
has an exact finite form for integer shape and a hypergeometric form
otherwise; every function broadcasts over numpy arrays, and the scalar public
operations run the identical code on 0-d arrays so grid sweeps and
single-point evaluations agree bit for bit.

All functions are pure; concurrent evaluation needs no coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import ConsistencyError, DomainError
from .model import BepReport, ChannelParams, PowerConfig, derive_link_snrs
from .specfun import DEFAULT_TOL, EvalTolerance

__all__ = [
    "FarCoeffs",
    "NearCoeffs",
    "far_coeffs",
    "near_coeffs",
    "nakagami_bpsk_kernel",
    "bep_x2",
    "bep_x1_rd",
    "bep_x1_sr",
    "combine_two_hop",
    "abep_e2e",
    "abep_grid",
]

INT_SHAPE_TOL = 1e-9
_RANGE_SLACK = 1e-9
_TINY = 5e-324

ETA = (1.0, -0.5, 0.5, 0.5, -0.5)


@dataclass(frozen=True)
class FarCoeffs:
    """Weights and effective-SNR multipliers for the far (interfered) stream."""

    nu: tuple[float, float]
    sigma: tuple[float, float] = (0.5, 0.5)


@dataclass(frozen=True)
class NearCoeffs:
    """Signed weights and effective-SNR multipliers for the near stream,
    accounting for both correct and erroneous interference cancellation."""

    eta: tuple[float, float, float, float, float]
    theta: tuple[float, float, float, float, float]


def _check_alpha(alpha: float) -> None:
    # alpha == 1.0 is admitted as a single-user validation mode: every
    # effective-SNR multiplier collapses to 1.
    if alpha == 1.0:
        return
    if not (0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 0.5), got {alpha}")


def far_coeffs(alpha: float) -> FarCoeffs:
    """Superposed-BPSK decision distances for the far stream.

    The two signal points sit at amplitude sqrt(alpha) +/- sqrt(1-alpha),
    giving effective SNR multipliers 1 -/+ 2*sqrt(alpha - alpha^2) with equal
    weights 1/2.
    """
    _check_alpha(alpha)
    d = 2.0 * math.sqrt(alpha - alpha * alpha)
    return FarCoeffs(nu=(1.0 - d, 1.0 + d))


def near_coeffs(alpha: float) -> NearCoeffs:
    """Near-stream coefficients including SIC error propagation.

    Five weighted terms: the residual-signal term plus two pairs capturing
    correct and erroneous cancellation of the far symbol.
    """
    _check_alpha(alpha)
    d = 2.0 * math.sqrt(alpha - alpha * alpha)
    theta = (alpha, 1.0 + d, 1.0 - d, 4.0 - 3.0 * alpha + 2.0 * d, 4.0 - 3.0 * alpha - 2.0 * d)
    return NearCoeffs(eta=ETA, theta=theta)


def _is_integer_shape(m: float) -> bool:
    return abs(m - round(m)) < INT_SHAPE_TOL


def _kernel_integer(b: np.ndarray, m_int: int) -> np.ndarray:
    # 0.5*[1 - mu*sum_{l<m} C(2l,l)((1-mu^2)/4)^l] rearranged as
    # 0.5*[eps/(1+mu) - mu*sum_{l>=1} ...] with eps = 1/(1+b): algebraically
    # identical but keeps absolute error near 1e-20 at high SNR, where the
    # direct form cancels catastrophically.
    eps = 1.0 / (1.0 + b)
    mu = np.sqrt(b * eps)
    total = eps / (1.0 + mu)
    eps4 = eps / 4.0
    term = np.ones_like(b)
    for l in range(1, m_int):
        term = term * (eps4 * ((2 * l) * (2 * l - 1) / (l * l)))
        total = total - mu * term
    return 0.5 * total


def _family_2f1(m: float, b: np.ndarray, tol: EvalTolerance) -> np.ndarray:
    # 2F1(1, m+0.5; m+1; z) with z = 1/(1+b).  Both z and 1-z = b/(1+b) are
    # formed directly from b, so nothing cancels even as z -> 1.
    z = 1.0 / (1.0 + b)
    out = np.empty_like(z)
    direct = z <= 0.5
    if np.any(direct):
        out[direct] = specfun.series_2f1(
            1.0, m + 0.5, m + 1.0, z[direct], tol.abs_tol, tol.max_terms
        )
    if np.any(~direct):
        w = (b / (1.0 + b))[~direct]
        out[~direct] = specfun.linear_2f1(
            1.0, m + 0.5, m + 1.0, w, tol.abs_tol, tol.max_terms
        )
    return out


def _kernel_noninteger(b: np.ndarray, m: float, tol: EvalTolerance) -> np.ndarray:
    z = 1.0 / (1.0 + b)
    pref = math.exp(math.lgamma(m + 0.5) - math.lgamma(m + 1.0)) / (2.0 * math.sqrt(math.pi))
    return pref * np.sqrt(b) * z ** (m + 0.5) * _family_2f1(m, b, tol)


def _kernel(b: np.ndarray, m: float, tol: EvalTolerance) -> np.ndarray:
    if _is_integer_shape(m):
        p = _kernel_integer(b, int(round(m)))
    else:
        shape = b.shape
        p = _kernel_noninteger(np.atleast_1d(b), m, tol).reshape(shape)
    # Strictly inside (0, 0.5]: float cancellation can graze 0 below ~1e-18.
    return np.minimum(np.maximum(p, _TINY), 0.5)


def nakagami_bpsk_kernel(b, m: float, tol: EvalTolerance = DEFAULT_TOL):
    """Average BPSK error probability over a Nakagami channel.

    ``b`` is the per-shape-unit average SNR (effective average SNR divided by
    the shape m); scalars and ndarrays broadcast.  Integer shapes use the
    finite central-binomial form, non-integer shapes the hypergeometric form;
    the two agree within 1e-8 wherever both apply.  Results lie in (0, 0.5];
    relative accuracy degrades once the true value drops below ~1e-18.
    """
    if not (math.isfinite(m) and m >= 0.5):
        raise DomainError(f"shape m must be >= 0.5, got {m}")
    b_arr = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b_arr)) or not np.all(b_arr > 0.0):
        raise DomainError("effective SNR b must be finite and > 0")
    p = _kernel(b_arr, m, tol)
    return float(p) if np.isscalar(b) or b_arr.ndim == 0 else p


def _px2(alpha, rho_s, m_sd: float, omega_sd: float, tol: EvalTolerance):
    alpha = np.asarray(alpha, dtype=float)
    scale = rho_s * (omega_sd / m_sd)
    d = 2.0 * np.sqrt(alpha - alpha * alpha)
    return 0.5 * (_kernel((1.0 - d) * scale, m_sd, tol) + _kernel((1.0 + d) * scale, m_sd, tol))


def _px1_sr(alpha, rho_s, m_sr: float, omega_sr: float, tol: EvalTolerance):
    alpha = np.asarray(alpha, dtype=float)
    scale = rho_s * (omega_sr / m_sr)
    d = 2.0 * np.sqrt(alpha - alpha * alpha)
    p = ETA[0] * _kernel(alpha * scale, m_sr, tol)
    p = p + ETA[1] * _kernel((1.0 + d) * scale, m_sr, tol)
    p = p + ETA[2] * _kernel((1.0 - d) * scale, m_sr, tol)
    p = p + ETA[3] * _kernel((4.0 - 3.0 * alpha + 2.0 * d) * scale, m_sr, tol)
    p = p + ETA[4] * _kernel((4.0 - 3.0 * alpha - 2.0 * d) * scale, m_sr, tol)
    bad = (p < -_RANGE_SLACK) | (p > 0.5 + _RANGE_SLACK)
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))[0]
        raise ConsistencyError(
            f"near-stream BEP left [0, 0.5] at flat index {tuple(idx)}: "
            f"{np.atleast_1d(p)[tuple(idx)]}"
        )
    return np.minimum(np.maximum(p, _TINY), 0.5)


def bep_x2(ch: ChannelParams, rho_s: float, alpha: float, tol: EvalTolerance = DEFAULT_TOL) -> float:
    """Far-stream BEP at the destination over the direct link."""
    _check_alpha(alpha)
    if not (rho_s > 0.0 and math.isfinite(rho_s)):
        raise DomainError(f"rho_s must be > 0, got {rho_s}")
    return float(_px2(alpha, rho_s, ch.sd.m, ch.sd.omega, tol))


def bep_x1_rd(ch: ChannelParams, rho_r: float, tol: EvalTolerance = DEFAULT_TOL) -> float:
    """Near-stream BEP of the interference-free relay-to-destination hop."""
    if not (rho_r > 0.0 and math.isfinite(rho_r)):
        raise DomainError(f"rho_r must be > 0, got {rho_r}")
    return float(_kernel(np.asarray(rho_r * (ch.rd.omega / ch.rd.m)), ch.rd.m, tol))


def bep_x1_sr(ch: ChannelParams, rho_s: float, alpha: float, tol: EvalTolerance = DEFAULT_TOL) -> float:
    """Near-stream BEP at the relay, including SIC error propagation."""
    _check_alpha(alpha)
    if not (rho_s > 0.0 and math.isfinite(rho_s)):
        raise DomainError(f"rho_s must be > 0, got {rho_s}")
    return float(_px1_sr(alpha, rho_s, ch.sr.m, ch.sr.omega, tol))


def combine_two_hop(p_sr: float, p_rd: float) -> float:
    """End-to-end error probability of two independent decode hops."""
    for name, p in (("p_sr", p_sr), ("p_rd", p_rd)):
        if not (0.0 <= p <= 0.5):
            raise DomainError(f"{name} must lie in [0, 0.5], got {p}")
    return p_sr + p_rd - 2.0 * p_sr * p_rd


def abep_e2e(ch: ChannelParams, pw: PowerConfig, tol: EvalTolerance = DEFAULT_TOL) -> BepReport:
    """Average end-to-end BEP of both streams under a given power split.

    Integer and non-integer shapes pick their kernel branch per link, so
    mixed channels combine mixed branches.
    """
    rho_s, rho_r = derive_link_snrs(pw)
    p_x2 = bep_x2(ch, rho_s, pw.alpha, tol)
    p_sr = bep_x1_sr(ch, rho_s, pw.alpha, tol)
    p_rd = bep_x1_rd(ch, rho_r, tol)
    p_x1 = combine_two_hop(p_sr, p_rd)
    return BepReport(
        p_x2=p_x2,
        p_x1_sr=p_sr,
        p_x1_rd=p_rd,
        p_x1=p_x1,
        abep=(p_x1 + p_x2) / 2.0,
    )


def abep_grid(
    ch: ChannelParams,
    rho_t_db: float,
    alphas: np.ndarray,
    betas: np.ndarray,
    tol: EvalTolerance = DEFAULT_TOL,
) -> np.ndarray:
    """End-to-end ABEP over the outer product of alpha and beta vectors.

    Returns shape (len(alphas), len(betas)); entry [i, j] is bit-identical to
    ``abep_e2e`` at (alphas[i], betas[j]).
    """
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    rho_t = 10.0 ** (rho_t_db / 10.0)
    rho_s = betas * rho_t
    rho_r = (1.0 - betas) * rho_t
    a_col = alphas[:, None]
    try:
        p_x2 = _px2(a_col, rho_s[None, :], ch.sd.m, ch.sd.omega, tol)
        p_sr = _px1_sr(a_col, rho_s[None, :], ch.sr.m, ch.sr.omega, tol)
        p_rd = _kernel(rho_r * (ch.rd.omega / ch.rd.m), ch.rd.m, tol)[None, :]
    except (ConsistencyError, ArithmeticError) as exc:
        raise type(exc)(f"grid evaluation failed (rho_t_db={rho_t_db}): {exc}") from exc
    p_x1 = p_sr + p_rd - 2.0 * p_sr * p_rd
    return (p_x1 + p_x2) / 2.0

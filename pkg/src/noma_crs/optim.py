"""Joint power-sharing / power-allocation search by exhaustive grid evaluation.

The analytic engine gives a cheap vectorized objective for BPSK; the Monte
Carlo path covers modulations with no closed form and uses common random
numbers across grid points so the argmin resolves at modest trial counts.
Grid evaluation is a parallel map with a deterministic ordered reduction, so
results never depend on worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bep, sim
from .errors import DomainError, ValidationError
from .model import ChannelParams, Modulation
from .specfun import DEFAULT_TOL, EvalTolerance

__all__ = ["GridSpec", "OptResult", "grid_search_analytic", "grid_search_mc", "full_search_cost", "abep_surface"]


@dataclass(frozen=True)
class GridSpec:
    """Uniform search grid; endpoints stay inside the open validity intervals
    because alpha in {0, 0.5} and beta in {0, 1} degenerate the power split."""

    m_points: int = 100
    alpha_range: tuple[float, float] = (0.005, 0.495)
    beta_range: tuple[float, float] = (0.01, 0.99)

    def __post_init__(self):
        if self.m_points < 2:
            raise ValidationError("m_points", f"must be >= 2, got {self.m_points}")
        lo, hi = self.alpha_range
        if not (0.0 < lo < hi < 0.5):
            raise ValidationError("alpha_range", f"must satisfy 0 < lo < hi < 0.5, got {self.alpha_range}")
        lo, hi = self.beta_range
        if not (0.0 < lo < hi < 1.0):
            raise ValidationError("beta_range", f"must satisfy 0 < lo < hi < 1, got {self.beta_range}")

    def alphas(self) -> np.ndarray:
        return np.linspace(self.alpha_range[0], self.alpha_range[1], self.m_points)

    def betas(self) -> np.ndarray:
        return np.linspace(self.beta_range[0], self.beta_range[1], self.m_points)


@dataclass(frozen=True)
class OptResult:
    alpha_star: float
    beta_star: float
    ber_star: float
    evaluations: int
    warning: str | None = None


def abep_surface(
    ch: ChannelParams,
    rho_t_db: float,
    grid: GridSpec,
    tol: EvalTolerance = DEFAULT_TOL,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(alphas, betas, abep[i, j]) over the full grid."""
    alphas = grid.alphas()
    betas = grid.betas()
    return alphas, betas, bep.abep_grid(ch, rho_t_db, alphas, betas, tol)


def _argmin_lexicographic(surface: np.ndarray) -> tuple[int, int]:
    # ravel() scans alpha-major then beta, and argmin returns the first
    # minimum, which is exactly the smallest-alpha-then-smallest-beta rule.
    flat = int(np.argmin(surface))
    return flat // surface.shape[1], flat % surface.shape[1]


def grid_search_analytic(
    ch: ChannelParams,
    rho_t_db: float,
    grid: GridSpec = GridSpec(),
    tol: EvalTolerance = DEFAULT_TOL,
) -> OptResult:
    """Global grid minimum of the closed-form end-to-end ABEP."""
    alphas, betas, surface = abep_surface(ch, rho_t_db, grid, tol)
    i, j = _argmin_lexicographic(surface)
    return OptResult(
        alpha_star=float(alphas[i]),
        beta_star=float(betas[j]),
        ber_star=float(surface[i, j]),
        evaluations=grid.m_points**2,
    )


def grid_search_mc(
    ch: ChannelParams,
    rho_t_db: float,
    mod: Modulation,
    grid: GridSpec,
    trials: int,
    seed: int,
    workers: int = 1,
) -> OptResult:
    """Grid minimum of the simulated end-to-end average BER.

    Every grid point sees the same frames, noise and fading (common random
    numbers), which removes most of the comparison variance.  If other grid
    points remain statistically indistinguishable from the winner, a warning
    is attached.
    """
    alphas = grid.alphas()
    betas = grid.betas()
    rho_t = 10.0 ** (rho_t_db / 10.0)
    points = [
        (float(b_ * rho_t), float((1.0 - b_) * rho_t), float(a_))
        for a_ in alphas
        for b_ in betas
    ]
    counts = sim.simulate_points(ch, mod, points, trials, seed, workers)
    bits_per_symbol = 1 if mod is Modulation.BPSK else 2
    total_bits = 2 * trials * bits_per_symbol
    ber = (counts[:, 1] + counts[:, 2]) / total_bits
    flat = int(np.argmin(ber))
    ber_star = float(ber[flat])
    ci = 1.96 * np.sqrt(ber * (1.0 - ber) / total_bits)
    ci_star = float(ci[flat])
    overlapping = int(np.count_nonzero(ber - ci <= ber_star + ci_star)) - 1
    warning = None
    if overlapping > 0:
        warning = (
            f"minimum not resolved: {overlapping} other grid points overlap the "
            f"winner's 95% confidence interval; increase trials"
        )
    return OptResult(
        alpha_star=float(alphas[flat // grid.m_points]),
        beta_star=float(betas[flat % grid.m_points]),
        ber_star=ber_star,
        evaluations=grid.m_points**2,
        warning=warning,
    )


def full_search_cost(grid: GridSpec, ch: ChannelParams) -> float:
    """Arithmetic-operation count of exhaustive search at this grid size.

    All-integer shapes admit the cheaper finite-sum objective; any
    non-integer shape forces the hypergeometric evaluation.
    """
    m_sd, m_sr, m_rd = ch.sd.m, ch.sr.m, ch.rd.m
    msq = float(grid.m_points) ** 2
    if all(abs(m - round(m)) < bep.INT_SHAPE_TOL for m in (m_sd, m_sr, m_rd)):
        return 2.0 * msq * (2.0 * m_sd + 5.0 * m_sr + m_rd + 9.0) + 1.0
    return msq * (2.0 * m_sd + 5.0 * m_sr + m_rd + 96.0) + 1.0

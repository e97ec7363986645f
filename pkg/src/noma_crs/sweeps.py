"""Named experiment sweeps producing the report CSV artifacts.

Each plan mirrors one figure class of the study: BER-vs-SNR validation
overlays, scheme comparisons (fixed / full-search / surrogate-predicted power
coefficients), optimum-coefficient-vs-relay-position curves, the BER surface
over the coefficient plane, and the QPSK comparison driven purely by
simulation.  Plans come with desk-scale defaults; a run config and CLI flags
override them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bep, optim, plotting, sim, surrogate
from .config import RunConfig
from .errors import ValidationError
from .model import ChannelParams, LinkFading, Modulation, PowerConfig
from .surrogate import SurrogateModel

__all__ = ["PLAN_IDS", "SweepPlan", "default_config", "default_rho_db", "run_sweep", "render_sweep"]

PLAN_IDS = ("fig1a", "fig1b", "fig1c", "fig2", "fig3a", "fig3b", "fig4")

FIXED_ALPHA = 0.2
FIXED_BETA = 0.5


def _cfg(m, omega, rho_t_db, mod=Modulation.BPSK, compare_alpha=None, compare_beta=None) -> RunConfig:
    return RunConfig(
        channel=ChannelParams(
            sr=LinkFading(m[0], omega[0]),
            sd=LinkFading(m[1], omega[1]),
            rd=LinkFading(m[2], omega[2]),
        ),
        power=PowerConfig(rho_t_db=rho_t_db, alpha=FIXED_ALPHA, beta=FIXED_BETA),
        modulation=mod,
        compare_alpha=compare_alpha,
        compare_beta=compare_beta,
    )


def default_config(plan_id: str) -> RunConfig:
    if plan_id == "fig1a":
        return _cfg((1, 1, 1), (2, 1, 2), 20.0)
    if plan_id == "fig1b":
        return _cfg((4, 4, 2), (2, 1, 2), 20.0)
    if plan_id in ("fig1c", "fig2"):
        return _cfg((1, 1, 1), (10, 2, 10), 20.0)
    if plan_id in ("fig3a", "fig3b"):
        # rho_t pinned so the optimum's source SNR sits near 30 dB.
        return _cfg((1, 1, 1), (10, 2, 10), 31.0, compare_alpha=0.3, compare_beta=0.5)
    if plan_id == "fig4":
        return _cfg((1, 1, 1), (10, 2, 10), 20.0, mod=Modulation.QPSK)
    raise ValidationError("plan", f"unknown sweep plan {plan_id!r}; known: {', '.join(PLAN_IDS)}")


def default_rho_db(plan_id: str) -> tuple[float, ...]:
    if plan_id in ("fig1a", "fig1b"):
        return tuple(np.arange(0.0, 40.0 + 1e-9, 2.0))
    if plan_id in ("fig1c", "fig3a"):
        return tuple(np.arange(0.0, 20.0 + 1e-9, 2.5))
    if plan_id == "fig4":
        return (10.0, 15.0, 20.0)
    return ()


@dataclass(frozen=True)
class SweepPlan:
    """A named experiment with its resolved parameters and output path."""

    plan_id: str
    config: RunConfig
    rho_db: tuple[float, ...]
    trials: int
    seed: int
    grid_m: int
    out_path: Path
    model: SurrogateModel | None = None
    workers: int = 1

    def __post_init__(self):
        if self.plan_id not in PLAN_IDS:
            raise ValidationError("plan", f"unknown sweep plan {self.plan_id!r}; known: {', '.join(PLAN_IDS)}")


def _require_model(plan: SweepPlan) -> SurrogateModel:
    if plan.model is None:
        raise ValidationError(
            "model",
            f"plan {plan.plan_id} emits surrogate-predicted columns and needs a "
            f"trained model: pass --model <path>",
        )
    return plan.model


def _predict(model: SurrogateModel, ch: ChannelParams, rho_db: float) -> tuple[float, float]:
    return surrogate.predict(model, ch, rho_db if model.n_in == 7 else None)


def _overlay_rows(plan: SweepPlan) -> list[tuple]:
    ch = plan.config.channel
    pw = plan.config.power
    rows = []
    for rho in plan.rho_db:
        pw_rho = PowerConfig(rho_t_db=rho, alpha=pw.alpha, beta=pw.beta)
        spec = sim.SimSpec(ch=ch, pw=pw_rho, mod=plan.config.modulation, trials=plan.trials, seed=plan.seed)
        res = sim.run_ber(spec, workers=plan.workers)
        analytic = (
            bep.abep_e2e(ch, pw_rho).abep if plan.config.modulation is Modulation.BPSK else float("nan")
        )
        rows.append(
            (
                rho,
                res.x1.ber, res.x1.ci95_halfwidth,
                res.x2.ber, res.x2.ci95_halfwidth,
                res.e2e.ber, res.e2e.ci95_halfwidth,
                analytic,
            )
        )
    return rows


def _schemes_analytic_rows(plan: SweepPlan) -> list[tuple]:
    model = _require_model(plan)
    ch = plan.config.channel
    grid = optim.GridSpec(m_points=plan.grid_m)
    rows = []
    for rho in plan.rho_db:
        fixed = bep.abep_e2e(ch, PowerConfig(rho, FIXED_ALPHA, FIXED_BETA)).abep
        full = optim.grid_search_analytic(ch, rho, grid)
        a_hat, b_hat = _predict(model, ch, rho)
        sur = bep.abep_e2e(ch, PowerConfig(rho, a_hat, b_hat)).abep
        rows.append((rho, fixed, full.ber_star, sur))
    return rows


def _relay_position_rows(plan: SweepPlan) -> list[tuple]:
    model = _require_model(plan)
    cfg_ch = plan.config.channel
    rho = plan.config.power.rho_t_db
    grid = optim.GridSpec(m_points=plan.grid_m)
    rows = []
    for omega_sr in range(2, 9):
        ch = ChannelParams(
            sr=LinkFading(cfg_ch.sr.m, float(omega_sr)),
            sd=LinkFading(cfg_ch.sd.m, 1.0),
            rd=LinkFading(cfg_ch.rd.m, float(10 - omega_sr)),
        )
        full = optim.grid_search_analytic(ch, rho, grid)
        a_hat, b_hat = _predict(model, ch, rho)
        rows.append((float(omega_sr), full.alpha_star, full.beta_star, a_hat, b_hat))
    return rows


def _comparison_rows(plan: SweepPlan) -> list[tuple]:
    ch = plan.config.channel
    if plan.config.compare_alpha is None:
        raise ValidationError(
            "compare_alpha",
            "plan fig3a compares against an externally supplied power allocation; "
            "set compare_alpha (and optionally compare_beta) in the config",
        )
    cmp_alpha = plan.config.compare_alpha
    cmp_beta = plan.config.compare_beta if plan.config.compare_beta is not None else FIXED_BETA
    grid = optim.GridSpec(m_points=plan.grid_m)
    rows = []
    for rho in plan.rho_db:
        if plan.model is not None:
            a_hat, b_hat = _predict(plan.model, ch, rho)
            proposed = bep.abep_e2e(ch, PowerConfig(rho, a_hat, b_hat)).abep
        else:
            proposed = optim.grid_search_analytic(ch, rho, grid).ber_star
        comparison = bep.abep_e2e(ch, PowerConfig(rho, cmp_alpha, cmp_beta)).abep
        rows.append((rho, proposed, comparison))
    return rows


def _surface_rows(plan: SweepPlan) -> list[tuple]:
    ch = plan.config.channel
    grid = optim.GridSpec(m_points=plan.grid_m)
    alphas, betas, surface = optim.abep_surface(ch, plan.config.power.rho_t_db, grid)
    rows = []
    for i, a in enumerate(alphas):
        for j, b in enumerate(betas):
            rows.append((float(a), float(b), float(surface[i, j])))
    return rows


def _schemes_mc_rows(plan: SweepPlan) -> list[tuple]:
    model = _require_model(plan)
    ch = plan.config.channel
    mod = plan.config.modulation
    grid = optim.GridSpec(m_points=plan.grid_m)
    bits_per_symbol = 1 if mod is Modulation.BPSK else 2
    total_bits = 2 * plan.trials * bits_per_symbol
    rows = []
    for rho in plan.rho_db:
        full = optim.grid_search_mc(ch, rho, mod, grid, plan.trials, plan.seed, plan.workers)
        rho_lin = 10.0 ** (rho / 10.0)
        a_hat, b_hat = _predict(model, ch, rho)
        points = [
            (FIXED_BETA * rho_lin, (1.0 - FIXED_BETA) * rho_lin, FIXED_ALPHA),
            (b_hat * rho_lin, (1.0 - b_hat) * rho_lin, a_hat),
        ]
        counts = sim.simulate_points(ch, mod, points, plan.trials, plan.seed, plan.workers)
        fixed_ber = float((counts[0, 1] + counts[0, 2]) / total_bits)
        sur_ber = float((counts[1, 1] + counts[1, 2]) / total_bits)
        rows.append((rho, fixed_ber, full.ber_star, sur_ber))
    return rows


_HEADERS = {
    "fig1a": ["rho_db", "ber_x1", "ci95_x1", "ber_x2", "ci95_x2", "ber_e2e", "ci95_e2e", "abep_analytic"],
    "fig1b": ["rho_db", "ber_x1", "ci95_x1", "ber_x2", "ci95_x2", "ber_e2e", "ci95_e2e", "abep_analytic"],
    "fig1c": ["rho_db", "ber_fixed", "ber_full_search", "ber_surrogate"],
    "fig2": ["omega_sr", "alpha_star", "beta_star", "alpha_hat", "beta_hat"],
    "fig3a": ["rho_db", "abep_proposed", "abep_comparison"],
    "fig3b": ["alpha", "beta", "ber"],
    "fig4": ["rho_db", "ber_fixed", "ber_full_search", "ber_surrogate"],
}

_RUNNERS = {
    "fig1a": _overlay_rows,
    "fig1b": _overlay_rows,
    "fig1c": _schemes_analytic_rows,
    "fig2": _relay_position_rows,
    "fig3a": _comparison_rows,
    "fig3b": _surface_rows,
    "fig4": _schemes_mc_rows,
}


def run_sweep(plan: SweepPlan) -> tuple[list[str], list[tuple]]:
    return list(_HEADERS[plan.plan_id]), _RUNNERS[plan.plan_id](plan)


def render_sweep(plan_id: str, header: list[str], rows: list[tuple], png_path: str | Path) -> None:
    """Draw the figure matching a sweep's CSV artifact."""
    cols = {name: np.array([row[i] for row in rows], dtype=float) for i, name in enumerate(header)}
    if plan_id in ("fig1a", "fig1b"):
        plotting.plot_ber_vs_snr(
            png_path,
            cols["rho_db"],
            {"simulation (e2e)": cols["ber_e2e"], "analysis": cols["abep_analytic"],
             "simulation (x1)": cols["ber_x1"], "simulation (x2)": cols["ber_x2"]},
            title="BER vs total SNR",
        )
    elif plan_id in ("fig1c", "fig4"):
        plotting.plot_ber_vs_snr(
            png_path,
            cols["rho_db"],
            {"fixed power split": cols["ber_fixed"],
             "full search": cols["ber_full_search"],
             "surrogate predicted": cols["ber_surrogate"]},
            title="Power strategies compared" + (" (QPSK)" if plan_id == "fig4" else ""),
        )
    elif plan_id == "fig2":
        plotting.plot_series_vs_x(
            png_path,
            cols["omega_sr"],
            {r"$\alpha^*$ full search": cols["alpha_star"],
             r"$\alpha$ predicted": cols["alpha_hat"],
             r"$\beta^*$ full search": cols["beta_star"],
             r"$\beta$ predicted": cols["beta_hat"]},
            xlabel=r"$\Omega_{sr}$ (with $\Omega_{rd} = 10-\Omega_{sr}$)",
            ylabel="optimum coefficient",
            title="Optimum power coefficients vs relay position",
        )
    elif plan_id == "fig3a":
        plotting.plot_ber_vs_snr(
            png_path,
            cols["rho_db"],
            {"joint optimization": cols["abep_proposed"], "comparison allocation": cols["abep_comparison"]},
            title="Joint optimization vs externally supplied allocation",
        )
    elif plan_id == "fig3b":
        alphas = np.unique(cols["alpha"])
        betas = np.unique(cols["beta"])
        surface = cols["ber"].reshape(len(alphas), len(betas))
        plotting.plot_surface(png_path, alphas, betas, surface, title="BER over the coefficient plane")

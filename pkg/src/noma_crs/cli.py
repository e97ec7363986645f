"""Command-line interface.

Subcommands: analyze, simulate, optimize, dataset, train, predict, sweep.
Every command is deterministic given its flags (seeds are explicit with fixed
defaults).  Exit codes: 0 success, 2 configuration/validation problems,
3 numerical failures, 4 I/O failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bep, optim, plotting, sim, surrogate, sweeps
from .config import RunConfig, load_config
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    ModelFormatError,
    ValidationError,
)
from .model import Modulation, PowerConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

DEFAULT_SEED = 1
DEFAULT_TRIALS = 100_000


def parse_rho_range(text: str) -> tuple[float, ...]:
    """'start:step:stop' inclusive of stop; start beyond stop gives an empty sweep."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError("rho-db", f"expected start:step:stop, got {text!r}")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError:
        raise ValidationError("rho-db", f"non-numeric component in {text!r}") from None
    if step <= 0:
        raise ValidationError("rho-db", f"step must be > 0, got {step}")
    values = []
    v = start
    while v <= stop + 1e-9:
        values.append(round(v, 12))
        v = start + (len(values)) * step
    return tuple(values)


def parse_value_list(text: str) -> tuple[float, ...]:
    """Comma list 'a,b,c' or range 'start:step:stop'."""
    if ":" in text:
        return parse_rho_range(text)
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ValidationError("list", f"non-numeric component in {text!r}") from None


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path | None, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _png_beside(out: Path) -> Path:
    return out.with_suffix(".png")


def _load_run_config(args) -> RunConfig:
    if not args.config:
        raise ValidationError("config", "this command requires --config <path>")
    return load_config(args.config)


def cmd_analyze(args) -> int:
    cfg = _load_run_config(args)
    if cfg.modulation is not Modulation.BPSK:
        raise ValidationError("modulation", "analyze uses the closed-form engine, which is BPSK-only")
    rho_values = parse_rho_range(args.rho_db)
    header = ["rho_db", "p_x2", "p_x1_sr", "p_x1_rd", "p_x1", "abep"]
    rows = []
    for rho in rho_values:
        pw = PowerConfig(rho_t_db=rho, alpha=cfg.power.alpha, beta=cfg.power.beta)
        rep = bep.abep_e2e(cfg.channel, pw)
        rows.append((rho, rep.p_x2, rep.p_x1_sr, rep.p_x1_rd, rep.p_x1, rep.abep))
    out = Path(args.out) if args.out else None
    write_csv(out, header, rows)
    if args.plot:
        if out is None:
            raise ValidationError("plot", "--plot needs --out so the figure has a home")
        plotting.plot_ber_vs_snr(
            _png_beside(out),
            [r[0] for r in rows],
            {"abep": np.array([r[5] for r in rows]),
             "p_x2": np.array([r[1] for r in rows]),
             "p_x1": np.array([r[4] for r in rows])},
            title="Closed-form component BEPs",
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    rho_values = parse_rho_range(args.rho_db)
    header = ["rho_db", "ber_x1", "ci95_x1", "ber_x2", "ci95_x2", "ber_e2e", "ci95_e2e", "abep_analytic"]
    rows = []
    for rho in rho_values:
        pw = PowerConfig(rho_t_db=rho, alpha=cfg.power.alpha, beta=cfg.power.beta)
        spec = sim.SimSpec(ch=cfg.channel, pw=pw, mod=cfg.modulation, trials=args.trials, seed=args.seed)
        res = sim.run_ber(spec, workers=args.workers)
        analytic = bep.abep_e2e(cfg.channel, pw).abep if cfg.modulation is Modulation.BPSK else float("nan")
        rows.append(
            (rho, res.x1.ber, res.x1.ci95_halfwidth, res.x2.ber, res.x2.ci95_halfwidth,
             res.e2e.ber, res.e2e.ci95_halfwidth, analytic)
        )
    out = Path(args.out) if args.out else None
    write_csv(out, header, rows)
    if args.plot:
        if out is None:
            raise ValidationError("plot", "--plot needs --out so the figure has a home")
        plotting.plot_ber_vs_snr(
            _png_beside(out),
            [r[0] for r in rows],
            {"simulation (e2e)": np.array([r[5] for r in rows]),
             "analysis": np.array([r[7] for r in rows])},
            title="Simulation vs analysis",
        )
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _load_run_config(args)
    grid = optim.GridSpec(m_points=args.grid)
    rho = cfg.power.rho_t_db
    if args.engine == "analytic":
        if cfg.modulation is not Modulation.BPSK:
            raise ValidationError("engine", "analytic engine is BPSK-only; use --engine mc for QPSK")
        result = optim.grid_search_analytic(cfg.channel, rho, grid)
    else:
        result = optim.grid_search_mc(cfg.channel, rho, cfg.modulation, grid, args.trials, args.seed, args.workers)
    print(f"alpha_star={result.alpha_star!r} beta_star={result.beta_star!r} "
          f"ber_star={result.ber_star!r} evaluations={result.evaluations}")
    if result.warning:
        print(f"warning: {result.warning}")
    if args.surface:
        surface_path = Path(args.surface)
        alphas, betas, surface = optim.abep_surface(cfg.channel, rho, grid)
        if args.engine == "mc":
            raise ValidationError("surface", "surface dump is computed analytically; use --engine analytic")
        rows = [
            (float(a), float(b), float(surface[i, j]))
            for i, a in enumerate(alphas)
            for j, b in enumerate(betas)
        ]
        write_csv(surface_path, ["alpha", "beta", "ber"], rows)
        if args.plot:
            plotting.plot_surface(_png_beside(surface_path), alphas, betas, surface,
                                  title="BER over the coefficient plane")
    return EXIT_OK


def cmd_dataset(args) -> int:
    if not args.out:
        raise ValidationError("out", "dataset generation requires --out <path>")
    m_all = parse_value_list(args.m_list)
    omega_all = parse_value_list(args.omega_list)
    grid = surrogate.DatasetGrid(
        m_sr_values=parse_value_list(args.m_sr_list) if args.m_sr_list else m_all,
        m_sd_values=parse_value_list(args.m_sd_list) if args.m_sd_list else m_all,
        m_rd_values=parse_value_list(args.m_rd_list) if args.m_rd_list else m_all,
        omega_sr_values=parse_value_list(args.omega_sr_list) if args.omega_sr_list else omega_all,
        omega_sd_values=parse_value_list(args.omega_sd_list) if args.omega_sd_list else omega_all,
        omega_rd_values=parse_value_list(args.omega_rd_list) if args.omega_rd_list else omega_all,
        rho_db_values=parse_value_list(args.rho_list),
        max_records=args.max_records,
    )
    records = surrogate.generate_dataset(grid, optim.GridSpec(m_points=args.grid), workers=args.workers)
    surrogate.write_dataset(records, args.out)
    print(f"wrote {len(records)} records to {args.out} "
          f"(digest {surrogate.dataset_digest(records)[:12]})")
    return EXIT_OK


def cmd_train(args) -> int:
    if not args.out:
        raise ValidationError("out", "training requires --out <model path>")
    records = surrogate.read_dataset(args.dataset)
    if args.rho_filter is not None:
        records = [r for r in records if abs(r.rho_t_db - args.rho_filter) < 1e-9]
        if not records:
            raise ValidationError("rho-filter", f"no dataset rows at rho_t_db={args.rho_filter}")
    digest = surrogate.dataset_digest(records)
    train_split, test_split = surrogate.split_dataset(records, seed=args.seed)
    cfg = surrogate.TrainConfig(seed=args.seed, max_epochs=args.max_epochs)
    model = surrogate.train(train_split, test_split, cfg, mode=args.mode, dataset_hash=digest)
    surrogate.save_model(model, args.out)
    md = model.metadata
    print(f"trained {args.mode} model on {len(train_split)}/{len(test_split)} train/test records")
    print(f"train_mse={md['train_mse']:.6g} test_mse={md['test_mse']:.6g} "
          f"regression_r={md['regression_r']:.6g} epochs={md['epochs']} stop={md['stop_reason']}")
    print(f"saved to {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _load_run_config(args)
    model = surrogate.load_model(args.model)
    rho = cfg.power.rho_t_db if model.n_in == 7 else None
    alpha_hat, beta_hat = surrogate.predict(model, cfg.channel, rho)
    ops = surrogate.feedforward_op_count(model)
    print(f"alpha_hat={alpha_hat!r} beta_hat={beta_hat!r}")
    print(f"op_count: weight_mults={ops['weight_mults']} bias_adds={ops['bias_adds']} "
          f"activations={ops['activations']} total={ops['total']}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config) if args.config else sweeps.default_config(args.plan)
    rho_values = parse_rho_range(args.rho_db) if args.rho_db else sweeps.default_rho_db(args.plan)
    model = surrogate.load_model(args.model) if args.model else None
    out = Path(args.out) if args.out else Path(f"{args.plan}.csv")
    grid_m = args.grid if args.grid is not None else (20 if args.plan == "fig4" else 100)
    plan = sweeps.SweepPlan(
        plan_id=args.plan,
        config=cfg,
        rho_db=rho_values,
        trials=args.trials,
        seed=args.seed,
        grid_m=grid_m,
        out_path=out,
        model=model,
        workers=args.workers,
    )
    header, rows = sweeps.run_sweep(plan)
    write_csv(out, header, rows)
    print(f"wrote {len(rows)} rows to {out}")
    if args.plot:
        png = _png_beside(out)
        sweeps.render_sweep(args.plan, header, rows, png)
        print(f"rendered {png}")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, *, config=False, rho=False, trials=False,
                seed=False, grid=None, out=False, plot=False, workers=False) -> None:
    if config:
        p.add_argument("--config", help="run configuration file (key = value lines)")
    if rho:
        p.add_argument("--rho-db", default=None, help="total SNR sweep start:step:stop in dB")
    if trials:
        p.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="frames per Monte Carlo point")
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="64-bit RNG seed")
    if grid is not None:
        p.add_argument("--grid", type=int, default=grid, help="grid resolution per coefficient axis")
    if out:
        p.add_argument("--out", help="output path (CSV or model file)")
    if plot:
        p.add_argument("--plot", action="store_true", help="render a PNG figure next to the CSV")
    if workers:
        p.add_argument("--workers", type=int, default=1, help="parallel workers (results identical)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-crs",
        description="Error-rate analysis and power optimization for a two-phase superposition relay link",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closed-form component BEPs over an SNR sweep")
    _add_common(p, config=True, out=True, plot=True)
    p.add_argument("--rho-db", default="0:2:40", help="total SNR sweep start:step:stop in dB")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo BER sweep with the analytic overlay")
    _add_common(p, config=True, trials=True, seed=True, out=True, plot=True, workers=True)
    p.add_argument("--rho-db", default="0:2:40", help="total SNR sweep start:step:stop in dB")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="joint power-coefficient grid search at the config operating point")
    _add_common(p, config=True, trials=True, seed=True, grid=100, plot=True, workers=True)
    p.add_argument("--engine", choices=("analytic", "mc"), default="analytic")
    p.add_argument("--surface", help="also dump per-grid-point CSV (alpha,beta,ber) here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("dataset", help="label a channel grid with grid-search optima")
    _add_common(p, grid=100, out=True, workers=True)
    p.add_argument("--m-list", default="0.5,1,2,4", help="shape values for all links (list or start:step:stop)")
    p.add_argument("--omega-list", default="1:1:10", help="spread values for all links")
    p.add_argument("--rho-list", default="0,5,10,15,20", help="total SNR values in dB")
    for link in ("sr", "sd", "rd"):
        p.add_argument(f"--m-{link}-list", dest=f"m_{link}_list", help=f"override shapes for the {link} link")
        p.add_argument(f"--omega-{link}-list", dest=f"omega_{link}_list", help=f"override spreads for the {link} link")
    p.add_argument("--max-records", type=int, default=None, help="deterministically decimate to this many rows")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", help="fit the feed-forward surrogate on a labeled dataset")
    _add_common(p, seed=True, out=True)
    p.add_argument("--dataset", required=True, help="dataset CSV from the dataset command")
    p.add_argument("--mode", choices=("6in", "7in"), default="6in",
                   help="6in: per-SNR model (channel stats only); 7in: SNR as a seventh input")
    p.add_argument("--rho-filter", type=float, default=None,
                   help="keep only dataset rows at this rho_t_db (typical for 6in)")
    p.add_argument("--max-epochs", type=int, default=1000)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict (alpha, beta) for a config and print the op count")
    _add_common(p, config=True)
    p.add_argument("--model", required=True, help="trained model file")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", help="run a named figure-class experiment")
    _add_common(p, config=True, rho=True, trials=True, seed=True, out=True, plot=True, workers=True)
    p.add_argument("--plan", choices=sweeps.PLAN_IDS, required=True)
    p.add_argument("--grid", type=int, default=None,
                   help="grid resolution (default 100 analytic, 20 for fig4)")
    p.add_argument("--model", help="trained surrogate model (required by fig1c/fig2/fig4)")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DomainError, ModelFormatError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ConsistencyError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Monte Carlo link simulator for the two-phase superposition relay system.

Signal model per frame: the source superposes two unit-energy symbols with
power split alpha/(1-alpha) and sends at the source SNR; destination decodes
the far stream directly, the relay decodes the far stream, subtracts its own
re-modulated estimate (imperfect cancellation: the estimate, never the true
symbol), decodes the near stream and decode-and-forwards it at the relay SNR.

BPSK runs on a real baseband with noise variance 1/2 per observation; QPSK on
a complex baseband (Gray mapping, independent rails) with variance 1/2 per
dimension and a uniformly random, coherently removed channel phase.

Reproducibility: frames are processed in fixed 65536-frame batches and batch
``i`` of seed ``s`` draws from Philox keyed with the 128-bit value
(s << 64) | i, in a fixed vectorized order.  Counters are integer sums over
batches, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np

from .errors import DomainError, ValidationError
from .model import (
    BerEstimate,
    ChannelParams,
    Modulation,
    PowerConfig,
    derive_link_snrs,
)

__all__ = ["SimSpec", "SimCounters", "SimResult", "run_ber", "run_ber_bpsk", "run_ber_qpsk", "simulate_points"]

BATCH_FRAMES = 1 << 16
_MAX_SEED = 1 << 64

_NOISE_STD = math.sqrt(0.5)


@dataclass(frozen=True)
class SimSpec:
    """One simulation request; identical specs produce identical results."""

    ch: ChannelParams
    pw: PowerConfig
    mod: Modulation
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials", f"must be >= 1, got {self.trials}")
        if not (0 <= self.seed < _MAX_SEED):
            raise ValidationError("seed", f"must be a 64-bit unsigned int, got {self.seed}")

    @property
    def bits_per_symbol(self) -> int:
        return 1 if self.mod is Modulation.BPSK else 2


@dataclass(frozen=True)
class SimCounters:
    """Raw error counts per stream; never exceed trials x bits-per-symbol."""

    frames: int
    bits_per_stream: int
    x1_relay_errors: int
    x1_errors: int
    x2_errors: int

    def __post_init__(self):
        for name in ("x1_relay_errors", "x1_errors", "x2_errors"):
            v = getattr(self, name)
            if not (0 <= v <= self.bits_per_stream):
                raise ValidationError(name, f"{v} outside [0, {self.bits_per_stream}]")


@dataclass(frozen=True)
class SimResult:
    spec: SimSpec
    counters: SimCounters
    x1_relay: BerEstimate
    x1: BerEstimate
    x2: BerEstimate
    e2e: BerEstimate


def _rng(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 64) | batch_index))


def _batches(trials: int):
    start = 0
    index = 0
    while start < trials:
        count = min(BATCH_FRAMES, trials - start)
        yield index, count
        start += count
        index += 1


def detect_bpsk(
    x1: np.ndarray,
    x2: np.ndarray,
    g_sr: np.ndarray,
    g_sd: np.ndarray,
    g_rd: np.ndarray,
    n_sr: np.ndarray,
    n_sd: np.ndarray,
    n_rd: np.ndarray,
    rho_s: float,
    rho_r: float,
    alpha: float,
    genie_sic: bool = False,
) -> tuple[int, int, int]:
    """Detection chain on pre-drawn frames; returns error counts
    (x1 at relay, x1 end-to-end, x2 at destination).

    ``genie_sic`` subtracts the true far symbol instead of the estimate and
    exists only so tests can demonstrate that error propagation matters.
    """
    h_sr = np.sqrt(g_sr)
    h_sd = np.sqrt(g_sd)
    h_rd = np.sqrt(g_rd)
    a1 = math.sqrt(rho_s * alpha)
    a2 = math.sqrt(rho_s * (1.0 - alpha))

    y_sd = (a1 * x1 + a2 * x2) * h_sd + n_sd
    x2_hat_d = np.where(y_sd >= 0.0, 1.0, -1.0)

    y_sr = (a1 * x1 + a2 * x2) * h_sr + n_sr
    x2_hat_r = np.where(y_sr >= 0.0, 1.0, -1.0)
    subtracted = x2 if genie_sic else x2_hat_r
    y_sr_rem = y_sr - a2 * subtracted * h_sr
    x1_hat_r = np.where(y_sr_rem >= 0.0, 1.0, -1.0)

    y_rd = math.sqrt(rho_r) * x1_hat_r * h_rd + n_rd
    x1_hat_d = np.where(y_rd >= 0.0, 1.0, -1.0)

    return (
        int(np.count_nonzero(x1_hat_r != x1)),
        int(np.count_nonzero(x1_hat_d != x1)),
        int(np.count_nonzero(x2_hat_d != x2)),
    )


def detect_qpsk(
    x1: np.ndarray,
    x2: np.ndarray,
    g_sr: np.ndarray,
    g_sd: np.ndarray,
    g_rd: np.ndarray,
    phase_sr: np.ndarray,
    phase_sd: np.ndarray,
    phase_rd: np.ndarray,
    n_sr: np.ndarray,
    n_sd: np.ndarray,
    n_rd: np.ndarray,
    rho_s: float,
    rho_r: float,
    alpha: float,
    genie_sic: bool = False,
) -> tuple[int, int, int]:
    """QPSK detection chain; symbols are complex Gray-mapped points and error
    counts are in bits (2 per frame per stream)."""
    a1 = math.sqrt(rho_s * alpha)
    a2 = math.sqrt(rho_s * (1.0 - alpha))

    def hard(sym: np.ndarray) -> np.ndarray:
        return (np.where(sym.real >= 0.0, 1.0, -1.0) + 1j * np.where(sym.imag >= 0.0, 1.0, -1.0)) / math.sqrt(2.0)

    def bit_errors(est: np.ndarray, ref: np.ndarray) -> int:
        return int(np.count_nonzero(est.real != ref.real) + np.count_nonzero(est.imag != ref.imag))

    root_g_sr = np.sqrt(g_sr)
    # Coherent phase removal keeps the noise circularly symmetric, so the
    # effective channel is the real amplitude sqrt(gamma).
    y_sd = ((a1 * x1 + a2 * x2) * np.sqrt(g_sd) * np.exp(1j * phase_sd) + n_sd) * np.exp(-1j * phase_sd)
    x2_hat_d = hard(y_sd)

    y_sr = ((a1 * x1 + a2 * x2) * root_g_sr * np.exp(1j * phase_sr) + n_sr) * np.exp(-1j * phase_sr)
    x2_hat_r = hard(y_sr)
    subtracted = x2 if genie_sic else x2_hat_r
    y_sr_rem = y_sr - a2 * subtracted * root_g_sr
    x1_hat_r = hard(y_sr_rem)

    y_rd = (math.sqrt(rho_r) * x1_hat_r * np.sqrt(g_rd) * np.exp(1j * phase_rd) + n_rd) * np.exp(-1j * phase_rd)
    x1_hat_d = hard(y_rd)

    return (
        bit_errors(x1_hat_r, x1),
        bit_errors(x1_hat_d, x1),
        bit_errors(x2_hat_d, x2),
    )


def _draw_bpsk(rng: np.random.Generator, n: int, ch: ChannelParams):
    x1 = rng.integers(0, 2, n).astype(float) * 2.0 - 1.0
    x2 = rng.integers(0, 2, n).astype(float) * 2.0 - 1.0
    g_sr = rng.gamma(ch.sr.m, ch.sr.omega / ch.sr.m, n)
    g_sd = rng.gamma(ch.sd.m, ch.sd.omega / ch.sd.m, n)
    g_rd = rng.gamma(ch.rd.m, ch.rd.omega / ch.rd.m, n)
    n_sr = rng.normal(0.0, _NOISE_STD, n)
    n_sd = rng.normal(0.0, _NOISE_STD, n)
    n_rd = rng.normal(0.0, _NOISE_STD, n)
    return x1, x2, g_sr, g_sd, g_rd, n_sr, n_sd, n_rd


def _draw_qpsk(rng: np.random.Generator, n: int, ch: ChannelParams):
    def sym(bits_i, bits_q):
        return ((bits_i * 2.0 - 1.0) + 1j * (bits_q * 2.0 - 1.0)) / math.sqrt(2.0)

    x1 = sym(rng.integers(0, 2, n).astype(float), rng.integers(0, 2, n).astype(float))
    x2 = sym(rng.integers(0, 2, n).astype(float), rng.integers(0, 2, n).astype(float))
    g_sr = rng.gamma(ch.sr.m, ch.sr.omega / ch.sr.m, n)
    g_sd = rng.gamma(ch.sd.m, ch.sd.omega / ch.sd.m, n)
    g_rd = rng.gamma(ch.rd.m, ch.rd.omega / ch.rd.m, n)
    phase_sr = rng.uniform(0.0, 2.0 * math.pi, n)
    phase_sd = rng.uniform(0.0, 2.0 * math.pi, n)
    phase_rd = rng.uniform(0.0, 2.0 * math.pi, n)
    n_sr = rng.normal(0.0, _NOISE_STD, n) + 1j * rng.normal(0.0, _NOISE_STD, n)
    n_sd = rng.normal(0.0, _NOISE_STD, n) + 1j * rng.normal(0.0, _NOISE_STD, n)
    n_rd = rng.normal(0.0, _NOISE_STD, n) + 1j * rng.normal(0.0, _NOISE_STD, n)
    return x1, x2, g_sr, g_sd, g_rd, phase_sr, phase_sd, phase_rd, n_sr, n_sd, n_rd


def _batch_task(args) -> np.ndarray:
    """Simulate one batch against every (rho_s, rho_r, alpha) point; returns
    an int64 array of shape (n_points, 3)."""
    (seed, batch_index, count, ch, mod_value, points, genie_sic) = args
    rng = _rng(seed, batch_index)
    out = np.zeros((len(points), 3), dtype=np.int64)
    if mod_value == Modulation.BPSK.value:
        draws = _draw_bpsk(rng, count, ch)
        for i, (rho_s, rho_r, alpha) in enumerate(points):
            out[i] = detect_bpsk(*draws, rho_s=rho_s, rho_r=rho_r, alpha=alpha, genie_sic=genie_sic)
    else:
        draws = _draw_qpsk(rng, count, ch)
        for i, (rho_s, rho_r, alpha) in enumerate(points):
            out[i] = detect_qpsk(*draws, rho_s=rho_s, rho_r=rho_r, alpha=alpha, genie_sic=genie_sic)
    return out


def simulate_points(
    ch: ChannelParams,
    mod: Modulation,
    points: list[tuple[float, float, float]],
    trials: int,
    seed: int,
    workers: int = 1,
    genie_sic: bool = False,
) -> np.ndarray:
    """Error counts for many (rho_s, rho_r, alpha) operating points sharing
    the same random draws (common random numbers).  Shape (n_points, 3) with
    columns (x1-at-relay, x1 end-to-end, x2)."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    tasks = [
        (seed, index, count, ch, mod.value, points, genie_sic)
        for index, count in _batches(trials)
    ]
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=workers) as pool:
            results = pool.map(_batch_task, tasks)
    else:
        results = [_batch_task(t) for t in tasks]
    return np.sum(results, axis=0, dtype=np.int64)


def _result_from_counts(spec: SimSpec, counts: np.ndarray) -> SimResult:
    bits = spec.trials * spec.bits_per_symbol
    counters = SimCounters(
        frames=spec.trials,
        bits_per_stream=bits,
        x1_relay_errors=int(counts[0]),
        x1_errors=int(counts[1]),
        x2_errors=int(counts[2]),
    )
    return SimResult(
        spec=spec,
        counters=counters,
        x1_relay=BerEstimate.from_counts(counters.x1_relay_errors, bits, spec.seed),
        x1=BerEstimate.from_counts(counters.x1_errors, bits, spec.seed),
        x2=BerEstimate.from_counts(counters.x2_errors, bits, spec.seed),
        # Pooled over both streams, so the average BER keeps the exact
        # (ber_x1 + ber_x2) / 2 identity.
        e2e=BerEstimate.from_counts(counters.x1_errors + counters.x2_errors, 2 * bits, spec.seed),
    )


def run_ber_bpsk(spec: SimSpec, workers: int = 1, genie_sic: bool = False) -> SimResult:
    """Full-chain BPSK link simulation; see module docstring for the model."""
    if spec.mod is not Modulation.BPSK:
        raise DomainError(f"run_ber_bpsk requires BPSK, got {spec.mod}")
    rho_s, rho_r = derive_link_snrs(spec.pw)
    counts = simulate_points(
        spec.ch, spec.mod, [(rho_s, rho_r, spec.pw.alpha)], spec.trials, spec.seed, workers, genie_sic
    )[0]
    return _result_from_counts(spec, counts)


def run_ber_qpsk(spec: SimSpec, workers: int = 1, genie_sic: bool = False) -> SimResult:
    """Full-chain Gray-QPSK link simulation (two independent bit rails)."""
    if spec.mod is not Modulation.QPSK:
        raise DomainError(f"run_ber_qpsk requires QPSK, got {spec.mod}")
    rho_s, rho_r = derive_link_snrs(spec.pw)
    counts = simulate_points(
        spec.ch, spec.mod, [(rho_s, rho_r, spec.pw.alpha)], spec.trials, spec.seed, workers, genie_sic
    )[0]
    return _result_from_counts(spec, counts)


def run_ber(spec: SimSpec, workers: int = 1) -> SimResult:
    if spec.mod is Modulation.BPSK:
        return run_ber_bpsk(spec, workers)
    return run_ber_qpsk(spec, workers)

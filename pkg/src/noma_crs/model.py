"""Domain model: channel fading parameters, power split, and result records.

All types are immutable value objects with validated constructors, so they are
freely shareable across threads and processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError

__all__ = [
    "LinkId",
    "LinkFading",
    "ChannelParams",
    "PowerConfig",
    "Modulation",
    "BepReport",
    "BerEstimate",
    "derive_link_snrs",
]


class LinkId(Enum):
    SR = "sr"
    SD = "sd"
    RD = "rd"


class Modulation(Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"


@dataclass(frozen=True)
class LinkFading:
    """Nakagami fading of one link: shape m >= 0.5 and spread omega > 0."""

    m: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m >= 0.5):
            raise ValidationError("m", f"shape must be >= 0.5, got {self.m}")
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise ValidationError("omega", f"spread must be > 0, got {self.omega}")


@dataclass(frozen=True)
class ChannelParams:
    """Per-link fading for the source-relay, source-destination and
    relay-destination links."""

    sr: LinkFading
    sd: LinkFading
    rd: LinkFading

    def link(self, link_id: LinkId) -> LinkFading:
        return getattr(self, link_id.value)


@dataclass(frozen=True)
class PowerConfig:
    """Total SNR (dB) plus the power-allocation and power-sharing coefficients.

    alpha is the fraction of source power on the relayed stream (strictly
    below 0.5 so superposition ordering holds); beta is the fraction of total
    power spent by the source, the remainder going to the relay.
    """

    rho_t_db: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.rho_t_db):
            raise ValidationError("rho_t_db", f"must be finite, got {self.rho_t_db}")
        if not (0.0 < self.alpha < 0.5):
            raise ValidationError("alpha", f"must lie in (0, 0.5), got {self.alpha}")
        if not (0.0 < self.beta < 1.0):
            raise ValidationError("beta", f"must lie in (0, 1), got {self.beta}")


def derive_link_snrs(p: PowerConfig) -> tuple[float, float]:
    """Linear source and relay SNRs (rho_s, rho_r) implied by the power split."""
    rho_t = 10.0 ** (p.rho_t_db / 10.0)
    return p.beta * rho_t, (1.0 - p.beta) * rho_t


@dataclass(frozen=True)
class BepReport:
    """Component bit-error probabilities and their end-to-end average.

    Construction enforces the defining identities bit-exactly:
    p_x1 = p_x1_sr + p_x1_rd - 2*p_x1_sr*p_x1_rd and abep = (p_x1 + p_x2)/2.
    """

    p_x2: float
    p_x1_sr: float
    p_x1_rd: float
    p_x1: float
    abep: float

    def __post_init__(self):
        for name in ("p_x2", "p_x1_sr", "p_x1_rd", "p_x1", "abep"):
            v = getattr(self, name)
            if not (0.0 <= v <= 0.5):
                raise ValidationError(name, f"must lie in [0, 0.5], got {v}")
        expect_x1 = self.p_x1_sr + self.p_x1_rd - 2.0 * self.p_x1_sr * self.p_x1_rd
        if self.p_x1 != expect_x1:
            raise ValidationError("p_x1", f"{self.p_x1} != combined {expect_x1}")
        if self.abep != (self.p_x1 + self.p_x2) / 2.0:
            raise ValidationError("abep", f"{self.abep} != stream average")


@dataclass(frozen=True)
class BerEstimate:
    """Monte Carlo bit-error-rate estimate with a 95% confidence half-width."""

    ber: float
    trials: int
    ci95_halfwidth: float
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.ber <= 1.0):
            raise ValidationError("ber", f"must lie in [0, 1], got {self.ber}")
        if self.trials < 1:
            raise ValidationError("trials", f"must be >= 1, got {self.trials}")
        expect = 1.96 * math.sqrt(self.ber * (1.0 - self.ber) / self.trials)
        if self.ci95_halfwidth != expect:
            raise ValidationError("ci95_halfwidth", f"{self.ci95_halfwidth} != {expect}")

    @classmethod
    def from_counts(cls, errors: int, trials: int, seed: int) -> "BerEstimate":
        if trials < 1:
            raise ValidationError("trials", f"must be >= 1, got {trials}")
        ber = errors / trials
        ci = 1.96 * math.sqrt(ber * (1.0 - ber) / trials)
        return cls(ber=ber, trials=trials, ci95_halfwidth=ci, seed=seed)

"""Flat key=value run-configuration files.

Schema (one `key = value` per line, '#' comments allowed):

    m_sr, omega_sr, m_sd, omega_sd, m_rd, omega_rd  -- per-link fading
    rho_t_db, alpha, beta                           -- power operating point
    modulation                                      -- bpsk | qpsk
    compare_alpha, compare_beta (optional)          -- external comparison pair

Unknown keys are rejected so typos cannot silently change a run.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .model import ChannelParams, LinkFading, Modulation, PowerConfig

_REQUIRED = (
    "m_sr",
    "omega_sr",
    "m_sd",
    "omega_sd",
    "m_rd",
    "omega_rd",
    "rho_t_db",
    "alpha",
    "beta",
    "modulation",
)
_OPTIONAL = ("compare_alpha", "compare_beta")


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelParams
    power: PowerConfig
    modulation: Modulation
    compare_alpha: float | None = None
    compare_beta: float | None = None


def parse_config(text: str) -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError("config", f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ValidationError(key, f"duplicated on line {lineno}")
        if key not in _REQUIRED and key not in _OPTIONAL:
            raise ValidationError(key, "unknown configuration key")
        raw[key] = value
    missing = [k for k in _REQUIRED if k not in raw]
    if missing:
        raise ValidationError(missing[0], "missing required configuration key")

    def number(key: str) -> float:
        try:
            return float(raw[key])
        except ValueError:
            raise ValidationError(key, f"not a number: {raw[key]!r}") from None

    channel = ChannelParams(
        sr=LinkFading(m=number("m_sr"), omega=number("omega_sr")),
        sd=LinkFading(m=number("m_sd"), omega=number("omega_sd")),
        rd=LinkFading(m=number("m_rd"), omega=number("omega_rd")),
    )
    power = PowerConfig(rho_t_db=number("rho_t_db"), alpha=number("alpha"), beta=number("beta"))
    try:
        modulation = Modulation(raw["modulation"].lower())
    except ValueError:
        raise ValidationError("modulation", f"must be bpsk or qpsk, got {raw['modulation']!r}") from None
    return RunConfig(
        channel=channel,
        power=power,
        modulation=modulation,
        compare_alpha=number("compare_alpha") if "compare_alpha" in raw else None,
        compare_beta=number("compare_beta") if "compare_beta" in raw else None,
    )


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())

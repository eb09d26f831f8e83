"""System configuration and random angle-delay-plane scenarios.

A scenario is one drop of ``K`` single-antenna users, each contributing one to
``l_max`` active taps.  Every tap carries an arrival angle, an angular spread,
a lognormal linear power and an integer delay; taps are what the estimation
pipeline works on, users only matter for pilot assignment.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import beamspace


@dataclass(frozen=True)
class ScenarioConfig:
    """System constants and the tap parameter distributions.

    ``rho_mean_db`` / ``rho_std_db`` parametrise the real Gaussian of the
    per-tap SNR in dB (lognormal linear power); ``noise_var`` is the linear
    per-entry noise power N0.
    """

    n_antennas: int = 128
    n_users: int = 16
    l_max: int = 4
    l_ch: int = 32
    theta_min: float = -45.0
    theta_max: float = 45.0
    sigma_min: float = 0.6
    sigma_max: float = 3.0
    rho_mean_db: float = 30.0
    rho_std_db: float = 3.0
    pilot_len: int = 128
    n_realizations: int = 10
    beams_per_sector: int = 8
    noise_var: float = 1.0
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        doc = json.loads(text)
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    def replace(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def validate_config(cfg: ScenarioConfig) -> None:
    """Raise ValueError naming the offending field if any invariant fails."""
    if cfg.n_antennas < 1:
        raise ValueError("n_antennas must be positive")
    if cfg.n_users < 1:
        raise ValueError("n_users must be positive")
    if not 1 <= cfg.l_max <= cfg.l_ch:
        raise ValueError("l_max must satisfy 1 <= l_max <= l_ch")
    if cfg.theta_min >= cfg.theta_max:
        raise ValueError("theta range empty: theta_min must be < theta_max")
    if not 0 < cfg.sigma_min <= cfg.sigma_max:
        raise ValueError("sigma range invalid: need 0 < sigma_min <= sigma_max")
    if cfg.pilot_len < 1:
        raise ValueError("pilot_len must be >= 1")
    if cfg.n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    if cfg.beams_per_sector not in (4, 8):
        raise ValueError("beams_per_sector (N_sec) must be 4 or 8")
    if cfg.noise_var < 0:
        raise ValueError("noise_var must be >= 0")
    if cfg.rho_std_db < 0:
        raise ValueError("rho_std_db must be >= 0")


@dataclass(frozen=True)
class UserTap:
    user_index: int
    tap_index: int
    aoa_deg: float
    spread_deg: float
    snr_linear: float
    delay_taps: int
    sector_id: int


@dataclass(frozen=True)
class Scenario:
    """One sampled drop: taps are stored flat, grouped by user in draw order."""

    config: ScenarioConfig
    taps: tuple[UserTap, ...]

    def taps_of(self, user_index: int) -> tuple[UserTap, ...]:
        return tuple(t for t in self.taps if t.user_index == user_index)

    def to_json(self) -> str:
        doc = {
            "config": asdict(self.config),
            "taps": [asdict(t) for t in self.taps],
        }
        return json.dumps(doc, indent=2)


def sample_scenario(cfg: ScenarioConfig, rng: np.random.Generator) -> Scenario:
    """Draw one scenario from the configured distributions.

    Per user, the tap count is uniform on {1..l_max}; each tap draws a delay
    uniform on {0..l_ch-1} (distinct within a user, so marginals stay
    uniform), angle and spread uniform on their ranges, and 10*log10(rho)
    from a real Gaussian.  Pure function of (cfg, rng state).
    """
    validate_config(cfg)
    taps = []
    for k in range(cfg.n_users):
        n_taps = int(rng.integers(1, cfg.l_max + 1))
        # distinct delays per user: co-located same-pilot taps would merge into
        # one bin and defeat the matched filter; cross-user collisions stay.
        delays = rng.choice(cfg.l_ch, size=n_taps, replace=False)
        for l in range(n_taps):
            tau = int(delays[l])
            theta = float(rng.uniform(cfg.theta_min, cfg.theta_max))
            sigma = float(rng.uniform(cfg.sigma_min, cfg.sigma_max))
            rho_db = float(rng.normal(cfg.rho_mean_db, cfg.rho_std_db))
            taps.append(
                UserTap(
                    user_index=k,
                    tap_index=l,
                    aoa_deg=theta,
                    spread_deg=sigma,
                    snr_linear=10.0 ** (rho_db / 10.0),
                    delay_taps=tau,
                    sector_id=beamspace.sector_of_angle(theta),
                )
            )
    return Scenario(config=cfg, taps=tuple(taps))

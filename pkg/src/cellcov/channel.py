"""Per-link propagation: bounded path loss, shadowing, fading, antenna patterns.

All core computations are in linear units (watts, meters, radians); dB and
degrees appear only at configuration boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .blockage import LinkState

# Free-space propagation constant convention: kappa = (4*pi*f_c/c)^2 at 1 m.
SPEED_OF_LIGHT = 3.0e8  # m/s


def free_space_kappa(f_c_hz: float) -> float:
    """Free-space path loss at 1 m for carrier frequency f_c."""
    wavelength = SPEED_OF_LIGHT / f_c_hz
    return (4.0 * math.pi / wavelength) ** 2


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def thermal_noise_watts(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Receiver noise power: -174 dBm/Hz thermal floor plus the noise figure."""
    dbm = -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return dbm_to_watts(dbm)


@dataclass(frozen=True)
class ChannelParams:
    """Per-state path-loss, shadowing and fading parameters.

    Path loss is the bounded power law kappa * max{r0, r}^alpha.  Shadowing
    is log-normal with dB mean/std.  Fading power gains: Gamma(m, omega/m)
    for LOS (Nakagami-m envelope) and Exponential(omega) for NLOS (Rayleigh
    envelope).
    """

    kappa_los: float
    kappa_nlos: float
    alpha_los: float
    alpha_nlos: float
    mu_los_db: float = 0.0
    mu_nlos_db: float = 0.0
    sigma_los_db: float = 5.8
    sigma_nlos_db: float = 8.7
    nakagami_m: float = 2.0
    omega_los: float = 1.0
    omega_nlos: float = 1.0
    r0: float = 1.0

    def __post_init__(self) -> None:
        if self.kappa_los <= 0 or self.kappa_nlos <= 0:
            raise ValueError("kappa must be positive")
        if self.alpha_los <= 2 or self.alpha_nlos <= 2:
            raise ValueError("path-loss exponents must exceed 2")
        if self.sigma_los_db < 0 or self.sigma_nlos_db < 0:
            raise ValueError("shadowing std must be non-negative")
        if self.nakagami_m <= 1:
            raise ValueError("Nakagami m must exceed 1")
        if self.omega_los <= 0 or self.omega_nlos <= 0:
            raise ValueError("mean fading power must be positive")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")

    @classmethod
    def lte_urban(cls, f_c_hz: float = 2.1e9, **overrides) -> "ChannelParams":
        """LTE-A dense-urban defaults at the given carrier frequency."""
        kappa = free_space_kappa(f_c_hz)
        base = dict(
            kappa_los=kappa,
            kappa_nlos=kappa,
            alpha_los=2.5,
            alpha_nlos=3.5,
        )
        base.update(overrides)
        return cls(**base)

    def kappa(self, s: LinkState) -> float:
        return self.kappa_los if s is LinkState.LOS else self.kappa_nlos

    def alpha(self, s: LinkState) -> float:
        return self.alpha_los if s is LinkState.LOS else self.alpha_nlos

    def mu_db(self, s: LinkState) -> float:
        return self.mu_los_db if s is LinkState.LOS else self.mu_nlos_db

    def sigma_db(self, s: LinkState) -> float:
        return self.sigma_los_db if s is LinkState.LOS else self.sigma_nlos_db

    def omega(self, s: LinkState) -> float:
        return self.omega_los if s is LinkState.LOS else self.omega_nlos


def path_loss(r, s: LinkState, params: ChannelParams):
    """Bounded path loss kappa^(s) * max{r0, r}^alpha^(s); scalar or array."""
    r = np.asarray(r, dtype=float)
    out = params.kappa(s) * np.maximum(params.r0, r) ** params.alpha(s)
    return float(out) if out.ndim == 0 else out


def sample_shadowing(s: LinkState, params: ChannelParams, rng: np.random.Generator, size=None):
    """Log-normal shadowing gain 10^(chi/10), chi ~ N(mu_dB, sigma_dB^2)."""
    chi = rng.normal(params.mu_db(s), params.sigma_db(s), size)
    return 10.0 ** (chi / 10.0)


def sample_fading_power(s: LinkState, params: ChannelParams, rng: np.random.Generator, size=None):
    """Fading power gain (squared envelope) for the given link state."""
    if s is LinkState.LOS:
        m = params.nakagami_m
        return rng.gamma(m, params.omega_los / m, size)
    return rng.exponential(params.omega_nlos, size)


# ---------------------------------------------------------------------------
# Antenna radiation patterns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiLobeParams:
    """Piecewise-constant gain over angular sectors of [0, pi].

    gains g_1..g_K apply to |theta| in (theta_{k-1}, theta_k] with theta_0=0
    and theta_K=pi; the first sector is closed at 0.  Breakpoints are radians.
    """

    gains: tuple[float, ...]
    breakpoints: tuple[float, ...]

    def __post_init__(self) -> None:
        g = np.asarray(self.gains, dtype=float)
        b = np.asarray(self.breakpoints, dtype=float)
        if len(g) < 1 or len(b) != len(g) - 1:
            raise ValueError("need K >= 1 gains and K-1 breakpoints")
        if np.any(g <= 0) or np.any(g > 1):
            raise ValueError("gains must lie in (0, 1]")
        if len(b) and (b[0] <= 0 or b[-1] >= math.pi or np.any(np.diff(b) <= 0)):
            raise ValueError("breakpoints must be strictly increasing within (0, pi)")

    @classmethod
    def from_degrees(cls, gains, breakpoints_deg) -> "MultiLobeParams":
        return cls(tuple(gains), tuple(math.radians(t) for t in breakpoints_deg))


@dataclass(frozen=True)
class OmniAntenna:
    """Unit gain in every direction."""


@dataclass(frozen=True)
class ThreeGppAntenna:
    """3GPP reference pattern: quadratic-dB main lobe with a floor.

    Main lobe 10^(-0.3*(2*theta/theta_3dB)^2) for |theta| <= phi where
    phi = theta_3dB * sqrt(g_min/12); floor gain 10^(-g_min/10) elsewhere.
    """

    theta_3db_deg: float = 35.0
    g_min_db: float = 23.0

    def __post_init__(self) -> None:
        if self.theta_3db_deg <= 0:
            raise ValueError("theta_3db must be positive")
        if self.g_min_db <= 0:
            raise ValueError("g_min must be positive (dB)")
        if self.phi_deg > 180.0:
            raise ValueError("main-lobe edge exceeds 180 degrees")

    @property
    def phi_deg(self) -> float:
        return self.theta_3db_deg * math.sqrt(self.g_min_db / 12.0)


@dataclass(frozen=True)
class MultiLobeAntenna:
    """Sectorized piecewise-constant pattern."""

    params: MultiLobeParams


AntennaModel = Union[OmniAntenna, ThreeGppAntenna, MultiLobeAntenna]


def _wrap_angle(theta):
    """Wrap angles into [-pi, pi); exact identity for in-range values."""
    theta = np.asarray(theta, dtype=float)
    in_range = (theta >= -math.pi) & (theta < math.pi)
    return np.where(in_range, theta, (theta + math.pi) % (2.0 * math.pi) - math.pi)


def antenna_gain(model: AntennaModel, theta):
    """Linear gain at angle-off-boresight theta (radians); scalar or array."""
    theta = np.abs(_wrap_angle(np.asarray(theta, dtype=float)))
    if isinstance(model, OmniAntenna):
        out = np.ones_like(theta)
    elif isinstance(model, ThreeGppAntenna):
        theta_deg = np.degrees(theta)
        main = 10.0 ** (-0.3 * (2.0 * theta_deg / model.theta_3db_deg) ** 2)
        floor = 10.0 ** (-model.g_min_db / 10.0)
        out = np.where(theta_deg <= model.phi_deg, main, floor)
    elif isinstance(model, MultiLobeAntenna):
        p = model.params
        idx = np.searchsorted(np.asarray(p.breakpoints, dtype=float), theta, side="left")
        out = np.asarray(p.gains, dtype=float)[idx]
    else:
        raise TypeError(f"unknown antenna model {model!r}")
    return float(out) if out.ndim == 0 else out


def interferer_gain_sample(
    bs_model: AntennaModel, mt_model: AntennaModel, rng: np.random.Generator
) -> float:
    """Product gain of an interfering link with uniformly random orientations."""
    theta_bs = rng.uniform(-math.pi, math.pi)
    theta_mt = rng.uniform(-math.pi, math.pi)
    return float(antenna_gain(bs_model, theta_bs) * antenna_gain(mt_model, theta_mt))


def sample_interferer_gains(
    bs_model: AntennaModel, mt_model: AntennaModel, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized interferer product gains for n links."""
    theta_bs = rng.uniform(-math.pi, math.pi, n)
    theta_mt = rng.uniform(-math.pi, math.pi, n)
    return antenna_gain(bs_model, theta_bs) * antenna_gain(mt_model, theta_mt)

"""Path-loss intensity measures and blockage/antenna approximation fitting.

A homogeneous PPP of base stations mapped through the per-link path loss is
again a PPP (displacement theorem); its intensity measure on [0, x) is
2*pi*lambda_bs * sum over states of integral_0^inf 1{l_S(r) <= x} p_S(r) r dr.
This module evaluates that measure numerically (adaptive quadrature), from a
distance-binned LOS histogram, and in closed form for the 3GPP and the
distance-band blockage models, and fits band/sector approximations by
least squares on log intensities / log gains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate, optimize
from scipy.special import expit

from .blockage import LinkState, LosHistogram, MultiBallParams
from .channel import AntennaModel, ChannelParams, MultiLobeParams, antenna_gain
from .errors import NumericError

# Exact values of the closed-form constants; they round to the familiar
# 624.064 and 786.064 (structure: -162 + 1296*exp(-1/2) and 1296*exp(-1/2)).
C_LOS_3GPP = -162.0 + 1296.0 * math.exp(-0.5)
C_NLOS_3GPP = 1296.0 * math.exp(-0.5)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IntensityCurve:
    """Per-state path-loss intensity on an ascending grid, scaled by 2*pi*lambda."""

    x_grid: np.ndarray
    lambda_los: np.ndarray
    lambda_nlos: np.ndarray
    lambda_bs: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_grid", np.asarray(self.x_grid, dtype=float))
        object.__setattr__(self, "lambda_los", np.asarray(self.lambda_los, dtype=float))
        object.__setattr__(self, "lambda_nlos", np.asarray(self.lambda_nlos, dtype=float))
        if np.any(np.diff(self.x_grid) <= 0):
            raise ValueError("x_grid must be strictly ascending")
        if self.lambda_bs <= 0:
            raise ValueError("lambda_bs must be positive")
        for name, v in (("lambda_los", self.lambda_los), ("lambda_nlos", self.lambda_nlos)):
            if v.shape != self.x_grid.shape:
                raise ValueError(f"{name} must match the grid length")
            scale = max(float(v.max(initial=0.0)), 1.0)
            if np.any(v < -1e-9 * scale):
                raise NumericError(f"{name} has negative values")
            if np.any(np.diff(v) < -1e-9 * scale):
                raise NumericError(f"{name} is not non-decreasing in x")

    @property
    def total(self) -> np.ndarray:
        return self.lambda_los + self.lambda_nlos


@dataclass(frozen=True)
class FitReport:
    """Result of an approximation fit."""

    params: Union[MultiBallParams, MultiLobeParams]
    objective: float
    restarts: int
    converged: bool
    initial_objectives: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.objective < 0:
            raise ValueError("objective must be non-negative")


def default_x_grid(
    params: ChannelParams, n: int = 200, r_min: float = 1.0, r_max: float = 2000.0
) -> np.ndarray:
    """Log-spaced path-loss grid from the LOS loss at max{r0, r_min} to the
    NLOS loss at r_max (the histogram's maximum distance by default)."""
    x_lo = params.kappa_los * max(params.r0, r_min) ** params.alpha_los
    x_hi = params.kappa_nlos * r_max**params.alpha_nlos
    return np.geomspace(x_lo, x_hi, n)


# ---------------------------------------------------------------------------
# Intensity evaluation
# ---------------------------------------------------------------------------


def _reach(x: np.ndarray, kappa: float, alpha: float, r0: float) -> np.ndarray:
    """Distance below which the bounded path loss stays <= x; 0 if none."""
    t = (np.asarray(x, dtype=float) / kappa) ** (1.0 / alpha)
    return np.where(x >= kappa * r0**alpha, t, 0.0)


def intensity_numeric(
    p_los: Callable[[float], float],
    params: ChannelParams,
    lambda_bs: float,
    x_grid: np.ndarray,
    breakpoints: Sequence[float] = (),
    r_max: float | None = None,
) -> IntensityCurve:
    """Adaptive-quadrature intensity for an arbitrary LOS-probability curve.

    The indicator truncates each state's integral at (x/kappa)^(1/alpha), so
    the integrand is p_S(r) * r on a finite interval; breakpoints mark kinks
    of p_los for the quadrature.  r_max optionally truncates integration for
    probability curves only defined up to a finite distance.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    per_state = {}
    for s in LinkState:
        kappa, alpha = params.kappa(s), params.alpha(s)

        if s is LinkState.LOS:
            integrand = lambda r: p_los(r) * r
        else:
            integrand = lambda r: (1.0 - p_los(r)) * r

        uppers = _reach(x_grid, kappa, alpha, params.r0)
        if r_max is not None:
            uppers = np.minimum(uppers, r_max)
        vals = np.zeros_like(x_grid)
        for j, upper in enumerate(uppers):
            if upper <= 0:
                continue
            pts = [b for b in breakpoints if 0.0 < b < upper]
            val, _ = integrate.quad(
                integrand, 0.0, upper, points=pts or None, limit=200, epsabs=1e-12, epsrel=1e-10
            )
            if not math.isfinite(val):
                raise NumericError(f"non-finite intensity integrand at x={x_grid[j]}")
            vals[j] = val
        per_state[s] = _TWO_PI * lambda_bs * vals
    return IntensityCurve(x_grid, per_state[LinkState.LOS], per_state[LinkState.NLOS], lambda_bs)


def intensity_empirical(
    hist: LosHistogram, params: ChannelParams, lambda_bs: float, x_grid: np.ndarray
) -> IntensityCurve:
    """Discrete approximation of the intensity from a distance-binned histogram:
    delta_r * sum_t 1{l_S(r_t) <= x} p_S(r_t) r_t per state."""
    x_grid = np.asarray(x_grid, dtype=float)
    r = hist.r_grid
    per_state = {}
    for s in LinkState:
        p = hist.p_los if s is LinkState.LOS else 1.0 - hist.p_los
        losses = params.kappa(s) * np.maximum(params.r0, r) ** params.alpha(s)
        weights = hist.delta_r * p * r
        # losses ascend with r, so the indicator sum is a prefix sum.
        cum = np.concatenate([[0.0], np.cumsum(weights)])
        vals = cum[np.searchsorted(losses, x_grid, side="right")]
        per_state[s] = _TWO_PI * lambda_bs * vals
    return IntensityCurve(x_grid, per_state[LinkState.LOS], per_state[LinkState.NLOS], lambda_bs)


def _intensity_3gpp_state(x: np.ndarray, s: LinkState, params: ChannelParams) -> np.ndarray:
    """Closed-form unscaled per-state integral for the 3GPP LOS curve."""
    kappa, alpha = params.kappa(s), params.alpha(s)
    x = np.asarray(x, dtype=float)
    t = (x / kappa) ** (1.0 / alpha)
    if s is LinkState.LOS:
        inner = np.where(
            t < 18.0,
            0.5 * t**2,
            C_LOS_3GPP - 36.0 * np.exp(-t / 36.0) * (18.0 + t) + 18.0 * t,
        )
        return np.where(x >= kappa * params.r0**params.alpha_los, inner, 0.0)
    inner = 0.5 * (t - 18.0) ** 2 - C_NLOS_3GPP + 36.0 * np.exp(-t / 36.0) * (18.0 + t)
    return np.where(x >= kappa * 18.0**alpha, inner, 0.0)


def intensity_3gpp_closed(
    x_grid: np.ndarray, params: ChannelParams, lambda_bs: float
) -> IntensityCurve:
    """Closed-form intensity under the 3GPP LOS probability (needs r0 < 18 m)."""
    if params.r0 >= 18.0:
        raise ValueError("closed form requires r0 < 18 m")
    x_grid = np.asarray(x_grid, dtype=float)
    scale = _TWO_PI * lambda_bs
    return IntensityCurve(
        x_grid,
        scale * _intensity_3gpp_state(x_grid, LinkState.LOS, params),
        scale * _intensity_3gpp_state(x_grid, LinkState.NLOS, params),
        lambda_bs,
    )


def _intensity_multiball_state(
    x: np.ndarray, radii: np.ndarray, q: np.ndarray, kappa: float, alpha: float, r0: float
) -> np.ndarray:
    """Closed-form unscaled per-state integral for band probabilities q."""
    x = np.asarray(x, dtype=float)
    u = (x / kappa) ** (2.0 / alpha)

    def gate(d):  # Heaviside with H(0) = 1
        return x >= kappa * d**alpha

    n = len(radii)
    if n == 0:
        return np.where(gate(r0), 0.5 * q[0] * u, 0.0)
    d1, dn = radii[0], radii[-1]
    out = np.where(gate(r0) & ~gate(d1), 0.5 * q[0] * u, 0.0)
    out += np.where(gate(d1), 0.5 * q[0] * d1**2, 0.0)
    out += np.where(gate(dn), 0.5 * q[n] * (u - dn**2), 0.0)
    for i in range(1, n):
        lo, hi = radii[i - 1], radii[i]
        out += np.where(gate(lo) & ~gate(hi), 0.5 * q[i] * (u - lo**2), 0.0)
        out += np.where(gate(hi), 0.5 * q[i] * (hi**2 - lo**2), 0.0)
    return out


def intensity_multiball_closed(
    x_grid: np.ndarray, mb: MultiBallParams, params: ChannelParams, lambda_bs: float
) -> IntensityCurve:
    """Closed-form intensity under a distance-band model (needs r0 < d_1)."""
    radii = np.asarray(mb.radii, dtype=float)
    if len(radii) and params.r0 >= radii[0]:
        raise ValueError("closed form requires r0 < d_1")
    q_los = np.asarray(mb.q_los, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    scale = _TWO_PI * lambda_bs
    lam_l = _intensity_multiball_state(
        x_grid, radii, q_los, params.kappa_los, params.alpha_los, params.r0
    )
    lam_n = _intensity_multiball_state(
        x_grid, radii, 1.0 - q_los, params.kappa_nlos, params.alpha_nlos, params.r0
    )
    return IntensityCurve(x_grid, scale * lam_l, scale * lam_n, lambda_bs)


# ---------------------------------------------------------------------------
# Distance-band fit (log-intensity least squares)
# ---------------------------------------------------------------------------


def _multiball_objective_factory(
    xs: np.ndarray, log_act: np.ndarray, params: ChannelParams, lambda_bs: float, n_balls: int
):
    scale = _TWO_PI * lambda_bs
    r0 = params.r0

    def unpack(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # Cumulative exponentials keep radii ordered and above r0; logistic
        # squashing keeps band probabilities in (0, 1).
        radii = r0 + np.cumsum(np.exp(np.minimum(z[:n_balls], 60.0)))
        q = expit(z[n_balls:])
        return radii, q

    def objective(z: np.ndarray) -> float:
        radii, q = unpack(z)
        with np.errstate(over="ignore", invalid="ignore"):
            lam = scale * (
                _intensity_multiball_state(xs, radii, q, params.kappa_los, params.alpha_los, r0)
                + _intensity_multiball_state(
                    xs, radii, 1.0 - q, params.kappa_nlos, params.alpha_nlos, r0
                )
            )
        resid = log_act - np.log(np.maximum(lam, 1e-300))
        return float(np.dot(resid, resid))

    return objective, unpack


def _merge_thin_bands(radii: np.ndarray, q: np.ndarray, min_width: float = 1.0):
    """Drop band edges closer than min_width to their predecessor (the thin
    band's probability goes with it)."""
    kept_r: list[float] = []
    kept_q: list[float] = [float(q[0])]
    prev = 0.0
    for i, d in enumerate(radii):
        if d - prev < min_width:
            continue
        kept_r.append(float(d))
        kept_q.append(float(q[i + 1]))
        prev = d
    return np.array(kept_r), np.array(kept_q)


def fit_multiball(
    actual: IntensityCurve,
    n_balls: int,
    params: ChannelParams,
    x_max: float | None = None,
    seed: int = 0,
    restarts: int = 20,
) -> FitReport:
    """Fit an N-band blockage model by least squares on the log of the total
    intensity, over the actual curve's grid points up to x_max.

    Multi-start Nelder-Mead over an unconstrained reparameterization, with a
    final polish from the best restart; deterministic for a given seed.
    """
    if n_balls < 1:
        raise ValueError("n_balls must be >= 1")
    mask = np.ones(len(actual.x_grid), dtype=bool) if x_max is None else actual.x_grid <= x_max
    xs = actual.x_grid[mask]
    act = actual.total[mask]
    if len(xs) < 2 * n_balls + 2:
        raise ValueError("not enough grid points for the requested number of bands")
    if np.any(act <= 0):
        raise NumericError(
            "actual intensity is zero or negative on the fit grid; "
            "truncate the grid to where the intensity is positive"
        )
    log_act = np.log(act)
    objective, unpack = _multiball_objective_factory(
        xs, log_act, params, actual.lambda_bs, n_balls
    )

    r_hi = (xs[-1] / params.kappa_nlos) ** (1.0 / params.alpha_nlos)
    rng = np.random.default_rng(seed)
    inits = []
    # Deterministic start: log-spaced radii over the distance range covered by
    # the grid, band probabilities decaying from ~0.9.
    d_start = np.geomspace(max(4.0 * params.r0, 5.0), r_hi / 4.0, n_balls)
    incs = np.diff(np.concatenate([[params.r0], d_start]))
    q_start = np.geomspace(0.9, 0.02, n_balls + 1)
    inits.append(np.concatenate([np.log(incs), np.log(q_start / (1.0 - q_start))]))
    for _ in range(max(restarts - 1, 0)):
        z_d = rng.uniform(math.log(params.r0), math.log(max(r_hi / 2.0, 2.0 * params.r0)), n_balls)
        z_q = rng.uniform(-4.0, 3.0, n_balls + 1)
        inits.append(np.concatenate([z_d, z_q]))

    initial_objectives = tuple(objective(z) for z in inits)
    best_z, best_val = None, math.inf
    for z0 in inits:
        res = optimize.minimize(
            objective,
            z0,
            method="Nelder-Mead",
            options={"maxiter": 4000, "xatol": 1e-9, "fatol": 1e-13, "adaptive": True},
        )
        if res.fun < best_val:
            best_z, best_val = res.x, res.fun
    polish = optimize.minimize(
        objective,
        best_z,
        method="Nelder-Mead",
        options={"maxiter": 20000, "xatol": 1e-13, "fatol": 1e-16, "adaptive": True},
    )
    if polish.fun <= best_val:
        best_z, best_val = polish.x, polish.fun

    radii, q = unpack(best_z)
    radii, q = _merge_thin_bands(radii, q)
    fitted = MultiBallParams(tuple(radii), tuple(q))
    # Re-evaluate after merging (thin bands contribute negligibly).
    final_curve = intensity_multiball_closed(xs, fitted, params, actual.lambda_bs)
    resid = log_act - np.log(np.maximum(final_curve.total, 1e-300))
    final_val = float(np.dot(resid, resid))
    return FitReport(
        params=fitted,
        objective=final_val,
        restarts=len(inits),
        converged=bool(polish.success),
        initial_objectives=initial_objectives,
    )


def multiball_fit_objective(
    actual: IntensityCurve,
    mb: MultiBallParams,
    params: ChannelParams,
    x_max: float | None = None,
) -> float:
    """Log-intensity squared error of a given band model against a curve."""
    mask = np.ones(len(actual.x_grid), dtype=bool) if x_max is None else actual.x_grid <= x_max
    xs = actual.x_grid[mask]
    act = actual.total[mask]
    if np.any(act <= 0):
        raise NumericError("actual intensity must be positive on the grid")
    approx = intensity_multiball_closed(xs, mb, params, actual.lambda_bs).total
    resid = np.log(act) - np.log(np.maximum(approx, 1e-300))
    return float(np.dot(resid, resid))


# ---------------------------------------------------------------------------
# Sector-pattern fit (log10-gain least squares)
# ---------------------------------------------------------------------------


def default_theta_grid(step_deg: float = 0.1) -> np.ndarray:
    """Uniform angle grid over [0, pi]; the patterns are even in theta."""
    n = int(round(180.0 / step_deg)) + 1
    return np.linspace(0.0, math.pi, n)


def _segment_cost_matrix(y: np.ndarray) -> np.ndarray:
    """cost[i, j] = within-segment squared deviation of y[i:j] about its mean."""
    p1 = np.concatenate([[0.0], np.cumsum(y)])
    p2 = np.concatenate([[0.0], np.cumsum(y * y)])
    i = np.arange(len(y) + 1)
    n = i[None, :] - i[:, None]  # n[i, j] = j - i
    s1 = p1[None, :] - p1[:, None]
    s2 = p2[None, :] - p2[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = s2 - s1 * s1 / n
    cost[n <= 0] = math.inf
    return cost


def fit_multilobe(
    pattern: AntennaModel,
    k_lobes: int,
    theta_grid: np.ndarray | None = None,
    seed: int = 0,
    restarts: int = 20,
) -> FitReport:
    """Fit a K-sector pattern by least squares on log10 gains.

    For fixed sector boundaries the optimal sector gain is the geometric mean
    of the actual gains, so only the boundaries are free; on a discrete angle
    grid they take finitely many distinct configurations, and dynamic
    programming finds the exact global optimum (no random restarts needed;
    seed and restarts are accepted for interface symmetry).
    """
    if k_lobes < 1:
        raise ValueError("k_lobes must be >= 1")
    grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    if np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > math.pi + 1e-12:
        raise ValueError("theta_grid must be strictly ascending within [0, pi]")
    if k_lobes > len(grid):
        raise ValueError("more lobes than grid points")
    g_act = antenna_gain(pattern, grid)
    g_act = np.atleast_1d(np.asarray(g_act, dtype=float))
    if np.any(g_act <= 0):
        raise NumericError("pattern gain must be positive on the grid")
    y = np.log10(g_act)
    m = len(y)

    if k_lobes == 1:
        mean = float(y.mean())
        resid = y - mean
        return FitReport(
            params=MultiLobeParams(gains=(10.0**mean,), breakpoints=()),
            objective=float(np.dot(resid, resid)),
            restarts=1,
            converged=True,
        )

    cost = _segment_cost_matrix(y)
    k = k_lobes
    dp = cost[0].copy()  # one segment covering y[0:j]
    back = np.zeros((k, m + 1), dtype=np.int64)
    for seg in range(1, k):
        cand = dp[:, None] + cost  # cand[i, j] = best with previous cut at i
        back[seg] = np.argmin(cand, axis=0)
        dp = cand[back[seg], np.arange(m + 1)]
    cuts = []
    j = m
    for seg in range(k - 1, 0, -1):
        j = int(back[seg][j])
        cuts.append(j)
    cuts.reverse()

    bounds = [0, *cuts, m]
    gains, breakpoints = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        gains.append(10.0 ** float(y[a:b].mean()))
    for c in cuts:
        breakpoints.append(0.5 * (grid[c - 1] + grid[c]))
    params = MultiLobeParams(gains=tuple(gains), breakpoints=tuple(breakpoints))
    return FitReport(
        params=params,
        objective=multilobe_fit_objective(pattern, params, grid),
        restarts=1,
        converged=True,
    )


def multilobe_fit_objective(
    pattern: AntennaModel, approx: MultiLobeParams, theta_grid: np.ndarray | None = None
) -> float:
    """Log10-gain squared error of a sector pattern against an actual pattern."""
    from .channel import MultiLobeAntenna

    grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    g_act = antenna_gain(pattern, grid)
    g_app = antenna_gain(MultiLobeAntenna(approx), grid)
    resid = np.log10(g_act) - np.log10(g_app)
    return float(np.dot(resid, resid))

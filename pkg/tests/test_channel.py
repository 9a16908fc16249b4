import math

import numpy as np
import pytest

from cellcov import (
    ChannelParams,
    LinkState,
    MultiLobeAntenna,
    MultiLobeParams,
    OmniAntenna,
    ThreeGppAntenna,
    antenna_gain,
    dbm_to_watts,
    free_space_kappa,
    interferer_gain_sample,
    path_loss,
    sample_fading_power,
    sample_shadowing,
    thermal_noise_watts,
    watts_to_dbm,
)
from cellcov.channel import sample_interferer_gains

from conftest import REF_LOBES


# ---------------------------------------------------------------------------
# units and constants
# ---------------------------------------------------------------------------

def test_free_space_kappa_at_2p1ghz():
    # (4*pi / (3e8/2.1e9))^2 = (28*pi)^2
    assert abs(free_space_kappa(2.1e9) - (28 * math.pi) ** 2) < 1e-9
    assert round(free_space_kappa(2.1e9), 1) == 7737.8


def test_dbm_round_trip():
    assert dbm_to_watts(30.0) == 1.0
    assert abs(watts_to_dbm(dbm_to_watts(-7.3)) + 7.3) < 1e-12


def test_thermal_noise_lte_setup():
    # -174 + 10*log10(20 MHz) + 10 dB = -90.99 dBm
    noise = thermal_noise_watts(20e6, 10.0)
    assert abs(noise - 7.9621e-13) < 1e-16 * 1e4


# ---------------------------------------------------------------------------
# path loss
# ---------------------------------------------------------------------------

def test_path_loss_clamped_below_r0(lte_params):
    assert path_loss(0.5, LinkState.LOS, lte_params) == lte_params.kappa_los
    assert path_loss(0.0, LinkState.NLOS, lte_params) == lte_params.kappa_nlos
    r = np.linspace(0.0, 1.0, 11)
    assert np.all(path_loss(r, LinkState.LOS, lte_params) == lte_params.kappa_los)


def test_path_loss_los_100m(lte_params):
    value = path_loss(100.0, LinkState.LOS, lte_params)
    assert abs(value - lte_params.kappa_los * 1e5) < 1e-6
    assert abs(value - 7.7378e8) / 7.7378e8 < 1e-4
    assert abs(10 * np.log10(value) - 88.89) < 0.01


def test_path_loss_monotone_and_nlos_dominates(lte_params):
    r = np.geomspace(1.0, 3000.0, 300)
    los = path_loss(r, LinkState.LOS, lte_params)
    nlos = path_loss(r, LinkState.NLOS, lte_params)
    assert np.all(np.diff(los) >= 0)
    assert np.all(nlos >= los)  # equal kappa, larger exponent, r >= 1


def test_channel_params_invariants():
    with pytest.raises(ValueError):
        ChannelParams.lte_urban(alpha_los=1.5)
    with pytest.raises(ValueError):
        ChannelParams.lte_urban(nakagami_m=1.0)
    with pytest.raises(ValueError):
        ChannelParams.lte_urban(r0=0.0)
    with pytest.raises(ValueError):
        ChannelParams.lte_urban(sigma_los_db=-1.0)


# ---------------------------------------------------------------------------
# shadowing
# ---------------------------------------------------------------------------

def test_shadowing_degenerate_sigma_zero():
    params = ChannelParams.lte_urban(sigma_los_db=0.0, mu_los_db=0.0)
    rng = np.random.default_rng(0)
    assert sample_shadowing(LinkState.LOS, params, rng) == 1.0


def test_shadowing_median_and_moments():
    params = ChannelParams.lte_urban(mu_los_db=3.0)
    rng = np.random.default_rng(77)
    n = 100_000
    gains = sample_shadowing(LinkState.LOS, params, rng, size=n)
    assert abs(np.median(gains) - 10 ** (3.0 / 10.0)) / 10 ** 0.3 < 0.02

    rng = np.random.default_rng(78)
    chi = 10 * np.log10(sample_shadowing(LinkState.NLOS, params, rng, size=n))
    assert abs(chi.mean()) < 3 * 8.7 / np.sqrt(n)
    assert abs(chi.std() - 8.7) / 8.7 < 0.03


# ---------------------------------------------------------------------------
# fading
# ---------------------------------------------------------------------------

def test_fading_mean_power_both_states(lte_params):
    n = 100_000
    for state, seed in ((LinkState.LOS, 5), (LinkState.NLOS, 6)):
        rng = np.random.default_rng(seed)
        h = sample_fading_power(state, lte_params, rng, size=n)
        assert abs(h.mean() - 1.0) < 3 * h.std() / np.sqrt(n)


def test_fading_los_variance(lte_params):
    # Gamma(m=2, omega/m): variance omega^2/m = 1/2
    rng = np.random.default_rng(9)
    h = sample_fading_power(LinkState.LOS, lte_params, rng, size=100_000)
    assert abs(h.var() - 0.5) / 0.5 < 0.05


def test_fading_nlos_exponential_tail(lte_params):
    rng = np.random.default_rng(10)
    n = 100_000
    h = sample_fading_power(LinkState.NLOS, lte_params, rng, size=n)
    p = np.exp(-1.0)
    assert abs((h > 1.0).mean() - p) < 3 * np.sqrt(p * (1 - p) / n)


# ---------------------------------------------------------------------------
# antenna patterns
# ---------------------------------------------------------------------------

def test_omni_gain_is_one():
    theta = np.linspace(-np.pi, np.pi, 101)
    assert np.all(antenna_gain(OmniAntenna(), theta) == 1.0)


def test_3gpp_gain_boresight_and_floor():
    ant = ThreeGppAntenna(35.0, 23.0)
    assert antenna_gain(ant, 0.0) == 1.0
    assert abs(antenna_gain(ant, np.pi) - 10 ** (-2.3)) < 1e-15


def test_3gpp_gain_continuous_at_main_lobe_edge():
    ant = ThreeGppAntenna(35.0, 23.0)
    phi = math.radians(ant.phi_deg)
    inside = 10 ** (-0.3 * (2 * ant.phi_deg / ant.theta_3db_deg) ** 2)
    floor = 10 ** (-ant.g_min_db / 10)
    assert abs(inside - floor) < 1e-12
    assert abs(antenna_gain(ant, phi - 1e-12) - antenna_gain(ant, phi + 1e-12)) < 1e-9


def test_multilobe_reference_lookup():
    ant = MultiLobeAntenna(REF_LOBES)
    assert antenna_gain(ant, math.radians(20.0)) == 0.2865
    assert antenna_gain(ant, math.radians(16.152)) == 0.8341  # right-closed sector
    assert antenna_gain(ant, math.radians(16.153)) == 0.2865
    assert antenna_gain(ant, math.radians(170.0)) == 0.005


def test_gain_even_symmetry_and_wrap():
    models = [OmniAntenna(), ThreeGppAntenna(35.0, 23.0), MultiLobeAntenna(REF_LOBES)]
    rng = np.random.default_rng(15)
    theta = rng.uniform(-np.pi, np.pi, 200)
    for model in models:
        g = antenna_gain(model, theta)
        assert np.allclose(g, antenna_gain(model, -theta), rtol=0, atol=0)
        assert np.allclose(g, antenna_gain(model, theta + 2 * np.pi), rtol=1e-12, atol=1e-15)
        assert np.all(g <= 1.0)


def test_multilobe_invariants_rejected():
    with pytest.raises(ValueError):
        MultiLobeParams((0.5, 1.2), (0.3,))
    with pytest.raises(ValueError):
        MultiLobeParams((0.5, 0.2), (3.2,))  # breakpoint beyond pi
    with pytest.raises(ValueError):
        MultiLobeParams((0.5, 0.2, 0.1), (0.5, 0.4))


def test_3gpp_antenna_invariants_rejected():
    with pytest.raises(ValueError):
        ThreeGppAntenna(-1.0, 23.0)
    with pytest.raises(ValueError):
        ThreeGppAntenna(35.0, 0.0)
    with pytest.raises(ValueError):
        ThreeGppAntenna(120.0, 30.0)  # main lobe would exceed 180 deg


# ---------------------------------------------------------------------------
# interferer gains
# ---------------------------------------------------------------------------

def test_interferer_gain_omni_always_one():
    rng = np.random.default_rng(3)
    for _ in range(100):
        assert interferer_gain_sample(OmniAntenna(), OmniAntenna(), rng) == 1.0


def test_interferer_gain_3gpp_below_one():
    rng = np.random.default_rng(4)
    ant = ThreeGppAntenna(35.0, 23.0)
    gains = sample_interferer_gains(ant, ant, 10_000, rng)
    assert np.all(gains <= 1.0)
    assert np.all(gains > 0.0)


def test_interferer_gain_multilobe_mean_matches_sector_expectation():
    ant = MultiLobeAntenna(REF_LOBES)
    edges = np.concatenate([[0.0], np.asarray(REF_LOBES.breakpoints), [np.pi]])
    widths = np.diff(edges)
    e_g = float(np.dot(REF_LOBES.gains, widths) / np.pi)
    rng = np.random.default_rng(5)
    n = 100_000
    gains = sample_interferer_gains(ant, ant, n, rng)
    assert abs(gains.mean() - e_g**2) < 3 * gains.std() / np.sqrt(n)

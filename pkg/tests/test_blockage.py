import numpy as np
import pytest

from cellcov import (
    BaseStation,
    BuildingSet,
    EmpiricalBlockage,
    LinkState,
    MultiBallBlockage,
    MultiBallParams,
    OneStateBlockage,
    Point2D,
    Polygon,
    Region,
    ThreeGppBlockage,
    empirical_link_state,
    estimate_los_histogram,
    p_los_3gpp,
    p_state_multiball,
    sample_link_state,
)
from cellcov.blockage import p_state, sample_los_mask
from cellcov.errors import DataError
from cellcov.fileio import read_los_histogram, write_los_histogram

from conftest import LONDON_BANDS


# ---------------------------------------------------------------------------
# 3GPP LOS probability
# ---------------------------------------------------------------------------


def test_p_los_3gpp_short_range_is_one():
    assert p_los_3gpp(10.0) == 1.0
    assert p_los_3gpp(0.0) == 1.0
    assert np.all(p_los_3gpp(np.linspace(0, 18, 50)) == 1.0)


def test_p_los_3gpp_at_36m():
    # min{18/36,1}(1 - e^-1) + e^-1 = 0.5 + 0.5*e^-1
    expected = 0.5 + 0.5 * np.exp(-1.0)
    assert abs(p_los_3gpp(36.0) - expected) < 1e-15
    assert round(p_los_3gpp(36.0), 5) == 0.68394


def test_p_los_3gpp_far_limit():
    assert p_los_3gpp(1e6) < 1e-4


def test_p_los_3gpp_monotone_and_continuous():
    r = np.linspace(18.0, 3000.0, 20_000)
    p = p_los_3gpp(r)
    assert np.all(np.diff(p) <= 1e-15)
    # continuity at the 18 m knee
    assert abs(p_los_3gpp(18.0 + 1e-9) - 1.0) < 1e-8


# ---------------------------------------------------------------------------
# distance-band model
# ---------------------------------------------------------------------------


def test_band_lookup_reference_rows():
    assert p_state_multiball(10.0, LONDON_BANDS, LinkState.LOS) == 0.7948
    assert p_state_multiball(100.0, LONDON_BANDS, LinkState.LOS) == 0.0939
    assert p_state_multiball(300.0, LONDON_BANDS, LinkState.LOS) == 0.0
    assert p_state_multiball(300.0, LONDON_BANDS, LinkState.NLOS) == 1.0


def test_band_right_continuity_at_edges():
    mb = MultiBallParams((10.0, 20.0), (0.9, 0.5, 0.1))
    # exactly at an edge the next band applies: intervals are [d_{n-1}, d_n)
    assert mb.p_los(10.0) == 0.5
    assert mb.p_los(20.0) == 0.1
    assert mb.p_los(10.0 - 1e-9) == 0.9


def test_band_jump_points_count():
    r = np.linspace(0.0, 400.0, 400_001)
    p = LONDON_BANDS.p_los(r)
    jumps = np.nonzero(np.diff(p) != 0)[0]
    assert len(jumps) == 3


def test_band_invariants_rejected():
    with pytest.raises(ValueError):
        MultiBallParams((10.0, 5.0), (0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        MultiBallParams((10.0,), (1.5, 0.5))
    with pytest.raises(ValueError):
        MultiBallParams((10.0,), (0.5,))


def test_complement_exact_for_all_models():
    models = [
        ThreeGppBlockage(),
        MultiBallBlockage(LONDON_BANDS),
        OneStateBlockage(LinkState.LOS),
        OneStateBlockage(LinkState.NLOS),
    ]
    rng = np.random.default_rng(1)
    r = rng.uniform(0, 2000, 200)
    for model in models:
        for ri in r:
            total = p_state(model, ri, LinkState.LOS) + p_state(model, ri, LinkState.NLOS)
            assert total == 1.0


# ---------------------------------------------------------------------------
# geometry-based states
# ---------------------------------------------------------------------------


def test_rooftop_bs_always_nlos(unit_square):
    bs = BaseStation(0, Point2D(0.5, 0.5), rooftop=True)
    assert empirical_link_state(Point2D(5, 5), bs, [unit_square]) is LinkState.NLOS


def test_outdoor_bs_no_buildings_is_los():
    bs = BaseStation(0, Point2D(10, 10), rooftop=False)
    assert empirical_link_state(Point2D(0, 0), bs, []) is LinkState.LOS


def test_occluding_building_blocks(unit_square):
    # square sits exactly between MT at (-1, .5) and BS at (2, .5)
    bs = BaseStation(0, Point2D(2.0, 0.5), rooftop=False)
    assert empirical_link_state(Point2D(-1.0, 0.5), bs, [unit_square]) is LinkState.NLOS
    # deterministic
    again = empirical_link_state(Point2D(-1.0, 0.5), bs, [unit_square])
    assert again is LinkState.NLOS


# ---------------------------------------------------------------------------
# probabilistic sampling
# ---------------------------------------------------------------------------


def test_one_state_sampling_fixed():
    rng = np.random.default_rng(0)
    model = OneStateBlockage(LinkState.NLOS)
    assert all(sample_link_state(model, r, rng) is LinkState.NLOS for r in (0.0, 50.0, 1e4))


def test_3gpp_sampling_short_range_always_los():
    rng = np.random.default_rng(0)
    model = ThreeGppBlockage()
    assert all(sample_link_state(model, 10.0, rng) is LinkState.LOS for _ in range(1000))


def test_3gpp_sampling_fraction_at_36m():
    rng = np.random.default_rng(12)
    model = ThreeGppBlockage()
    n = 100_000
    mask = sample_los_mask(model, np.full(n, 36.0), rng)
    p = 0.5 + 0.5 * np.exp(-1.0)
    assert abs(mask.mean() - p) < 3 * np.sqrt(p * (1 - p) / n)


def test_sampling_empirical_model_rejected():
    with pytest.raises(TypeError):
        sample_link_state(EmpiricalBlockage(), 10.0, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# histogram estimator
# ---------------------------------------------------------------------------


def test_histogram_no_buildings_all_los():
    region = Region(0, 300, 0, 300)
    hist = estimate_los_histogram(region, BuildingSet([]), 100 / region.area, trials=40, m_t=450, seed=2)
    populated = hist.n_samples > 0
    assert populated.any()
    assert np.all(hist.p_los[populated] == 1.0)
    assert np.all(hist.p_los[~populated] == 0.0)


def test_histogram_blocked_city_mostly_nlos():
    # one huge building fills everything above a thin outdoor corridor
    region = Region(0, 200, 0, 200)
    wall = Polygon([Point2D(0, 6), Point2D(200, 6), Point2D(200, 200), Point2D(0, 200)])
    hist = estimate_los_histogram(
        region, BuildingSet([wall]), 60 / region.area, trials=60, m_t=300, seed=3
    )
    total = hist.n_samples.sum()
    assert total > 0
    aggregate_p = float((hist.p_los * hist.n_samples).sum() / total)
    assert aggregate_p < 0.05


def test_histogram_fully_built_region_errors():
    region = Region(0, 50, 0, 50)
    block = Polygon([Point2D(-1, -1), Point2D(51, -1), Point2D(51, 51), Point2D(-1, 51)])
    with pytest.raises(DataError):
        estimate_los_histogram(region, BuildingSet([block]), 0.01, trials=5, m_t=100, seed=0)


def test_histogram_deterministic(small_city):
    region, _, bset = small_city
    a = estimate_los_histogram(region, bset, 1e-4, trials=30, m_t=400, seed=11)
    b = estimate_los_histogram(region, bset, 1e-4, trials=30, m_t=400, seed=11)
    assert np.array_equal(a.p_los, b.p_los)
    assert np.array_equal(a.n_samples, b.n_samples)


def test_histogram_smoothed_monotone_on_city(small_city):
    region, _, bset = small_city
    hist = estimate_los_histogram(region, bset, 160 / region.area, trials=2000, m_t=600, seed=21)
    window = 10
    supported = np.nonzero(hist.n_samples >= 50)[0]
    last = supported.max()
    smoothed = np.convolve(hist.p_los[: last + 1], np.ones(window) / window, mode="valid")
    assert np.all(np.diff(smoothed) <= 0.02)
    assert smoothed[0] > 0.5  # short links are mostly LOS in street canyons
    assert smoothed[-1] < 0.1


def test_histogram_csv_round_trip(tmp_path, small_city):
    region, _, bset = small_city
    hist = estimate_los_histogram(region, bset, 1e-4, trials=20, m_t=300, seed=4)
    path = tmp_path / "hist.csv"
    write_los_histogram(hist, path)
    again = read_los_histogram(path)
    assert again.delta_r == hist.delta_r
    assert np.array_equal(again.p_los, hist.p_los)
    assert np.array_equal(again.n_samples, hist.n_samples)
    assert path.read_text().splitlines()[0] == "r_m,p_los,n_samples"

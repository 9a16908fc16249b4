import numpy as np
import pytest

from cellcov import BuildingSet, ChannelParams, MultiBallParams, MultiLobeParams, Point2D, Polygon, Region
from cellcov.citygen import generate_city

# Reference 3-band blockage parameters (dense-urban deployments and the
# 3GPP LOS curve) used as fixed lookup/fit targets in tests.
LONDON_BANDS = MultiBallParams(
    radii=(15.1335, 56.5978, 195.7149), q_los=(0.7948, 0.3818, 0.0939, 0.0)
)
MANCHESTER_BANDS = MultiBallParams(
    radii=(13.2076, 57.8840, 213.3940), q_los=(0.7866, 0.4981, 0.1015, 0.0001)
)
THREEGPP_BANDS = MultiBallParams(
    radii=(47.7989, 215.9387, 1874.442), q_los=(0.9446, 0.2142, 0.0243, 0.0021)
)

# Reference 4-sector approximation of the 3GPP pattern (35 deg, 23 dB).
REF_LOBE_GAINS = (0.8341, 0.2865, 0.0334, 0.005)
REF_LOBE_BREAKS_DEG = (16.152, 32.304, 48.455)
REF_LOBES = MultiLobeParams.from_degrees(REF_LOBE_GAINS, REF_LOBE_BREAKS_DEG)

# Deployment statistics: (BS count, area m^2, mean cell radius m).
LONDON_BS_STATS = [
    (319, 4e6, 63.1771),
    (183, 4e6, 83.4122),
    (136, 4e6, 96.7577),
]


@pytest.fixture
def unit_square():
    return Polygon([Point2D(0, 0), Point2D(1, 0), Point2D(1, 1), Point2D(0, 1)])


@pytest.fixture
def l_shape():
    # L-shaped concave polygon on a 4x4 footprint
    return Polygon(
        [
            Point2D(0, 0),
            Point2D(4, 0),
            Point2D(4, 1.5),
            Point2D(1.5, 1.5),
            Point2D(1.5, 4),
            Point2D(0, 4),
        ]
    )


@pytest.fixture(scope="session")
def lte_params():
    return ChannelParams.lte_urban()


@pytest.fixture(scope="session")
def noshadow_params():
    return ChannelParams.lte_urban(sigma_los_db=0.0, sigma_nlos_db=0.0)


@pytest.fixture(scope="session")
def small_city():
    """600 m x 600 m synthetic city at ~49% built fraction."""
    region = Region(0.0, 600.0, 0.0, 600.0)
    polygons = generate_city(region, 0.5, (15.0, 45.0), seed=5)
    return region, polygons, BuildingSet(polygons)

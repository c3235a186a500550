import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constellation_access.astro import Constants
from constellation_access.constellation import DATA_DIR
from constellation_access.ground import (
    GroundStation,
    StationFileError,
    is_visible,
    load_stations,
    look_angles,
)

HEADER = "name,lat_deg,lon_deg,alt_km,min_elev_deg\n"


def test_zenith():
    gs = GroundStation("A", 51.05, -114.07, 1.045)
    up = gs.enu_basis()[2]
    la = look_angles(gs, gs.ecef() + 500.0 * up)
    assert la.elevation == pytest.approx(90.0, abs=1e-9)
    assert la.range == pytest.approx(500.0, abs=1e-9)


def test_horizon_plane():
    gs = GroundStation("A", 63.7467, -68.517, 0.034)
    east, north, _ = gs.enu_basis()
    for d in (east, north, (east + north) / math.sqrt(2)):
        assert look_angles(gs, gs.ecef() + 1000.0 * d).elevation == pytest.approx(0.0, abs=1e-9)


def test_equatorial_station_direct_geometry():
    gs = GroundStation("E", 0.0, 0.0, 0.0)
    la = look_angles(gs, [7000.0, 0.0, 0.0])
    assert la.elevation == pytest.approx(90.0, abs=1e-12)
    assert la.range == pytest.approx(7000.0 - 6378.137, abs=1e-9)


def test_azimuth_convention():
    gs = GroundStation("A", 10.0, 20.0)
    east, north, up = gs.enu_basis()
    base = gs.ecef() + 300.0 * up
    assert look_angles(gs, base + 100 * north).azimuth == pytest.approx(0.0, abs=1e-9)
    assert look_angles(gs, base + 100 * east).azimuth == pytest.approx(90.0, abs=1e-9)
    assert look_angles(gs, base - 100 * north).azimuth == pytest.approx(180.0, abs=1e-9)


def test_enu_basis_orthonormal():
    m = GroundStation("A", -33.0, 151.0).enu_basis()
    assert np.allclose(m @ m.T, np.eye(3), atol=1e-15)
    assert np.linalg.det(m) == pytest.approx(1.0)


def test_coincident_point_rejected():
    gs = GroundStation("A", 0.0, 0.0)
    with pytest.raises(ValueError):
        look_angles(gs, gs.ecef())


def _rot(axis, angle):
    axis = np.asarray(axis, float) / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * k @ k


SPHERE = Constants(earth_polar_radius=6378.137)


@settings(max_examples=100)
@given(st.floats(-80, 80), st.floats(-180, 180), st.lists(st.floats(-1, 1), min_size=3, max_size=3),
       st.floats(0, 2 * math.pi), st.lists(st.floats(-8000, 8000), min_size=3, max_size=3))
def test_elevation_rotation_invariant_on_sphere(lat, lon, axis, angle, sat):
    if np.linalg.norm(axis) < 1e-3:
        return
    gs = GroundStation("A", lat, lon)
    sat = np.array(sat) + gs.ecef(SPHERE) * 1.2
    R = _rot(axis, angle)
    st_rot = R @ gs.ecef(SPHERE)
    r = np.linalg.norm(st_rot)
    lat2 = math.degrees(math.asin(st_rot[2] / r))
    lon2 = math.degrees(math.atan2(st_rot[1], st_rot[0]))
    gs2 = GroundStation("B", lat2, lon2)
    e1 = look_angles(gs, sat, SPHERE)
    e2 = look_angles(gs2, R @ sat, SPHERE)
    assert e1.elevation == pytest.approx(e2.elevation, abs=1e-7)
    assert e1.range == pytest.approx(np.linalg.norm(sat - gs.ecef(SPHERE)), rel=1e-12)


@settings(max_examples=100)
@given(st.floats(-90, 90), st.floats(-180, 180), st.floats(0, 89),
       st.lists(st.floats(-9000, 9000), min_size=3, max_size=3))
def test_visibility_matches_mask(lat, lon, mask, sat):
    gs = GroundStation("A", lat, lon, 0.0, mask)
    sat = np.array(sat)
    if np.linalg.norm(sat - gs.ecef()) < 1e-6:
        return
    assert is_visible(gs, sat) == (look_angles(gs, sat).elevation >= mask)


def test_longitude_normalised():
    assert GroundStation("A", 0, 180.0).longitude == 180.0
    assert GroundStation("A", 0, -180.0).longitude == 180.0
    assert GroundStation("A", 0, 270.0).longitude == -90.0


@pytest.mark.parametrize("kwargs", [dict(latitude=91), dict(min_elevation=90), dict(min_elevation=-1)])
def test_invalid_station(kwargs):
    base = dict(name="A", latitude=0.0, longitude=0.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        GroundStation(**base)


def test_load_calgary_row():
    (gs,) = load_stations(HEADER + "GS2_Calgary,51.05,-114.07,1.045,25\n")
    assert gs == GroundStation("GS2_Calgary", 51.05, -114.07, 1.045, 25.0)


def test_packaged_station_files():
    table = load_stations((DATA_DIR / "table1_stations.csv").read_text())
    assert [s.name for s in table] == ["GS1_Iqaluit", "GS2_Calgary", "GS3_Cayenne"]
    assert all(s.min_elevation == 25.0 for s in table)
    network = load_stations((DATA_DIR / "ksat_like_network.csv").read_text())
    assert len(network) == 26 and len({s.name for s in network}) == 26


@pytest.mark.parametrize(
    "body,row",
    [
        ("A,91,0,0,25\n", 2),
        ("A,0,0,0,25\nA,1,1,0,25\n", 3),
        ("A,0,0,0,25\nB,x,0,0,25\n", 3),
        ("A,0,0,0\n", 2),
    ],
)
def test_bad_rows_reported(body, row):
    with pytest.raises(StationFileError, match=f"row {row}"):
        load_stations(HEADER + body)


def test_bad_header():
    with pytest.raises(StationFileError):
        load_stations("name,lat,lon\nA,0,0\n")
    with pytest.raises(StationFileError):
        load_stations("")

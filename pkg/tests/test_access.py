import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from constellation_access import _accel, kernels
from constellation_access.access import (
    AccessMetrics,
    AccessWindow,
    MissionConfig,
    average_metrics,
    compute_windows,
    constellation_metrics,
    constellation_windows,
    data_volume_bound,
    interval_union,
    network_union_metrics,
    union_access_ratio,
)
from constellation_access.astro import OrbitalElements, gmst
from constellation_access.constellation import build_constellation, load_spec
from constellation_access.ground import GroundStation

CALGARY = GroundStation("GS2_Calgary", 51.05, -114.07, 1.045, 25.0)
IQALUIT = GroundStation("GS1_Iqaluit", 63.7467, -68.517, 0.034, 25.0)


def windows_for(sid, *spans):
    return [AccessWindow("S", sid, a, b) for a, b in spans]


# --- mission config ---------------------------------------------------------


@pytest.mark.parametrize("kwargs", [dict(duration=0), dict(sample_step=0), dict(sample_step=86400),
                                    dict(refine_tolerance=10.0)])
def test_mission_config_invariants(epoch, kwargs):
    with pytest.raises(ValueError):
        MissionConfig(epoch, **kwargs)


def test_sample_grid_ends_at_duration(epoch):
    times = MissionConfig(epoch, 95.0, 10.0).sample_times()
    assert times[0] == 0.0 and times[-1] == 95.0 and len(times) == 11


# --- compute_windows --------------------------------------------------------


def test_geostationary_like_orbit_always_visible(epoch):
    gs = GroundStation("EQ", 0.0, 0.0, 0.0, 25.0)
    a = (398600.4418 / 7.2921159e-5**2) ** (1 / 3)
    el = OrbitalElements(a, 0.0, 0.0, 0.0, 0.0, gmst(epoch), epoch)
    mission = MissionConfig(epoch, j2=False)
    (w,) = compute_windows(gs, el, mission)
    assert (w.t_rise, w.t_set) == (0.0, 86400.0)


def test_kuiper_inclination_never_reaches_iqaluit(epoch, day_mission):
    for raan in range(0, 360, 45):
        el = OrbitalElements(6378.137 + 630, 0.0, math.radians(51.9), math.radians(raan), 0.0, 0.3, epoch)
        assert compute_windows(IQALUIT, el, day_mission) == []


def _match(found, brute, tol=1.0):
    assert len(found) == len(brute), (found, brute)
    for w, (b0, b1) in zip(found, brute):
        assert abs(w.t_rise - b0) <= tol and abs(w.t_set - b1) <= tol


@pytest.mark.parametrize("seed", range(4))
def test_windows_match_brute_force(epoch, day_mission, seed):
    rng = np.random.default_rng(seed)
    gs = GroundStation("R", float(rng.uniform(-60, 60)), float(rng.uniform(-180, 180)), 0.0,
                       float(rng.uniform(5, 35)))
    el = OrbitalElements(6378.137 + rng.uniform(400, 1500), float(rng.uniform(0, 0.01)),
                         float(rng.uniform(0.3, 2.8)), float(rng.uniform(0, 6.28)), float(rng.uniform(0, 6.28)),
                         float(rng.uniform(0, 6.28)), epoch)
    found = compute_windows(gs, el, day_mission)
    brute = oracles.brute_windows(gs, el, epoch, 86400.0)
    assert found, "pick seeds that produce passes"
    _match(found, brute)


def test_window_invariants(epoch, day_mission):
    spec = load_spec("builtin:presets/iridium_like.json")
    sats = build_constellation(spec, epoch)[:12]
    windows = constellation_windows(CALGARY, sats, day_mission)
    assert set(windows) == {s.id for s in sats}
    for sat in sats:
        ws = windows[sat.id]
        assert sum(w.duration for w in ws) <= 86400.0
        for w in ws:
            assert 0.0 <= w.t_rise < w.t_set <= 86400.0
            inside = np.linspace(w.t_rise + 0.02, w.t_set - 0.02, 15)
            assert np.all(oracles.elevation_deg(CALGARY, sat.elements, epoch, inside) >= 25.0 - 1e-6)
        for a, b in zip(ws, ws[1:]):
            assert b.t_rise - a.t_set > day_mission.refine_tolerance


def test_pass_shorter_than_sample_step_is_found(epoch):
    el = OrbitalElements(6378.137 + 780, 0.0, math.radians(86.4), 0.4, 0.0, 1.0, epoch)
    gs = GroundStation("G", 45.0, 10.0, 0.0, 0.0)
    t = np.arange(0.0, 86400.0, 1.0)
    elev = oracles.elevation_deg(gs, el, epoch, t)
    k = int(np.argmax(elev))
    fine = np.arange(t[k] - 2, t[k] + 2, 1e-3)
    peak = float(np.max(oracles.elevation_deg(gs, el, epoch, fine)))
    # a mask just under the highest pass leaves a window of a few seconds
    grazing = gs.with_mask(peak - 0.01)
    windows = compute_windows(grazing, el, MissionConfig(epoch, 86400.0, 30.0, 0.01))
    assert len(windows) == 1
    w = windows[0]
    assert 0.0 < w.duration < 30.0
    assert w.t_rise <= fine[np.argmax(oracles.elevation_deg(gs, el, epoch, fine))] <= w.t_set


def test_step_robustness_iridium(epoch):
    sats = build_constellation(load_spec("builtin:presets/iridium_like.json"), epoch)
    values = []
    for step in (5.0, 10.0, 30.0):
        mission = MissionConfig(epoch, 86400.0, step)
        m = constellation_metrics(constellation_windows(CALGARY, sats, mission), len(sats), mission)
        values.append((m.accessible_ratio, m.mean_access_time_ta))
    ref = values[1]
    for ratio, ta in values:
        assert ratio == pytest.approx(ref[0], rel=0.02)
        assert ta == pytest.approx(ref[1], rel=0.02)


@pytest.mark.skipif(not _accel.NUMBA_INSTALLED, reason="numba not installed")
def test_backends_give_same_windows(epoch, day_mission):
    sats = build_constellation(load_spec("builtin:presets/iridium_like.json"), epoch)
    a = constellation_windows(CALGARY, sats, day_mission, backend=kernels.NUMPY)
    b = constellation_windows(CALGARY, sats, day_mission, backend=kernels.NUMBA)
    for sid in a:
        assert len(a[sid]) == len(b[sid])
        for wa, wb in zip(a[sid], b[sid]):
            assert abs(wa.t_rise - wb.t_rise) < 1e-6 and abs(wa.t_set - wb.t_set) < 1e-6


# --- metrics ----------------------------------------------------------------


@pytest.mark.parametrize("ta,gamma_pct", [(1102.8, 1.276), (2123.6, 2.457)])
def test_gamma_examples(epoch, day_mission, ta, gamma_pct):
    m = constellation_metrics({"a": windows_for("a", (100.0, 100.0 + ta))}, 1, day_mission)
    assert m.mean_access_time_ta == pytest.approx(ta)
    assert 100 * m.gamma == pytest.approx(gamma_pct, abs=0.002)


def test_metrics_definitions(day_mission):
    windows = {
        "a": windows_for("a", (0.0, 100.0), (200.0, 500.0)),
        "b": windows_for("b", (10.0, 210.0)),
        "c": [],
    }
    m = constellation_metrics(windows, 4, day_mission, "C", "S")
    assert m.accessible_ratio == 0.5
    assert m.mean_access_time_ta == pytest.approx(300.0)
    assert m.gamma == pytest.approx(300.0 / 86400.0)
    assert (m.constellation_name, m.station_name, m.total_satellites) == ("C", "S", 4)


def test_no_windows_gives_zeros(day_mission):
    m = constellation_metrics({"a": [], "b": []}, 2, day_mission)
    assert (m.accessible_ratio, m.mean_access_time_ta, m.gamma) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        constellation_metrics({}, 0, day_mission)


def test_metrics_independent_of_key_order(day_mission):
    w = {f"s{k}": windows_for(f"s{k}", (k * 0.1, k * 0.1 + 1e-3 * k + 0.3)) for k in range(50)}
    rev = dict(reversed(list(w.items())))
    assert constellation_metrics(w, 60, day_mission) == constellation_metrics(rev, 60, day_mission)


def test_shell_average_is_unweighted():
    rows = [AccessMetrics("K", "S", 10, 1.0, 100.0, 0.1), AccessMetrics("K", "S", 30, 0.0, 0.0, 0.0)]
    avg = average_metrics(rows)
    assert (avg.total_satellites, avg.accessible_ratio, avg.mean_access_time_ta, avg.gamma) == (40, 0.5, 50.0, 0.05)


# --- network union ----------------------------------------------------------


def test_disjoint_windows_from_two_stations():
    s1 = {"x": windows_for("x", (0.0, 100.0))}
    s2 = {"x": windows_for("x", (200.0, 300.0))}
    assert union_access_ratio([s1, s2], ["x"], 1000.0) == pytest.approx(0.2)
    assert union_access_ratio([s1, s1], ["x"], 1000.0) == pytest.approx(0.1)


def test_interval_union():
    assert interval_union([(5, 6), (0, 2), (1, 3), (3, 4)]) == [(0, 4), (5, 6)]
    assert interval_union([]) == []


def test_single_station_matches_constellation_metrics(epoch, day_mission):
    sats = build_constellation(load_spec("builtin:presets/iridium_like.json"), epoch)
    m = constellation_metrics(constellation_windows(CALGARY, sats, day_mission), len(sats), day_mission)
    assert m.accessible_ratio == 1.0
    ratio = network_union_metrics([CALGARY], sats, day_mission)
    assert ratio == pytest.approx(m.gamma, rel=1e-12)
    assert network_union_metrics([CALGARY, IQALUIT, CALGARY], sats, day_mission) == pytest.approx(
        network_union_metrics([CALGARY, IQALUIT], sats, day_mission), rel=1e-15)


def test_network_errors(epoch, day_mission):
    sats = build_constellation(load_spec("builtin:presets/walker_demo.json"), epoch)
    with pytest.raises(ValueError):
        network_union_metrics([], sats, day_mission)
    with pytest.raises(ValueError):
        network_union_metrics([CALGARY], [], day_mission)


spans = st.lists(st.tuples(st.floats(0, 900), st.floats(1, 100)).map(lambda p: (p[0], p[0] + p[1])), max_size=6)


@settings(max_examples=200)
@given(st.lists(st.dictionaries(st.sampled_from("abc"), spans), min_size=1, max_size=5),
       st.dictionaries(st.sampled_from("abc"), spans))
def test_adding_a_station_never_decreases_ratio(sets, extra):
    as_windows = lambda d: {k: windows_for(k, *v) for k, v in d.items()}  # noqa: E731
    base = [as_windows(d) for d in sets]
    before = union_access_ratio(base, list("abc"), 1000.0)
    after = union_access_ratio(base + [as_windows(extra)], list("abc"), 1000.0)
    again = union_access_ratio(base + [base[0]], list("abc"), 1000.0)
    assert after >= before - 1e-15
    assert again == pytest.approx(before, abs=1e-15)


# --- data volume ------------------------------------------------------------


def test_data_volume_examples():
    assert data_volume_bound(2123.6, 1.8e9) == 3.82248e12
    assert data_volume_bound(500.0, 0.0) == 0.0
    assert data_volume_bound(1.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        data_volume_bound(-1.0, 1.0)

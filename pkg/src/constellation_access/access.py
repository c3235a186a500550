"""Access windows between stations and satellites, and the metrics built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .astro import WGS84, Constants, OrbitalElements, Timestamp
from .constellation import Satellite
from .ground import GroundStation
from .search import bisect_sign_change, golden_minimize

CHUNK_SATELLITES = 128


@dataclass(frozen=True)
class MissionConfig:
    epoch: Timestamp
    duration: float = 86400.0
    sample_step: float = 10.0
    refine_tolerance: float = 0.01
    j2: bool = True

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("mission duration must be positive")
        if not 0 < self.sample_step < self.duration:
            raise ValueError("sample step must lie in (0, duration)")
        if not 0 < self.refine_tolerance < self.sample_step:
            raise ValueError("refine tolerance must lie in (0, sample_step)")

    def sample_times(self) -> np.ndarray:
        times = np.arange(0.0, self.duration, self.sample_step)
        if times[-1] < self.duration:
            times = np.append(times, self.duration)
        return times


@dataclass(frozen=True)
class AccessWindow:
    station_name: str
    satellite_id: str
    t_rise: float
    t_set: float

    @property
    def duration(self) -> float:
        return self.t_set - self.t_rise


@dataclass(frozen=True)
class AccessMetrics:
    constellation_name: str
    station_name: str
    total_satellites: int
    accessible_ratio: float
    mean_access_time_ta: float
    gamma: float


def _clean_intervals(intervals: Iterable[tuple[float, float]], tolerance: float) -> list[tuple[float, float]]:
    """Merge intervals separated by <= tolerance, then drop those shorter than tolerance."""
    merged: list[list[float]] = []
    for start, end in sorted(intervals):
        if merged and start - merged[-1][1] <= tolerance:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [(s, e) for s, e in merged if e - s >= tolerance]


def find_window_intervals(
    table: np.ndarray,
    mission: MissionConfig,
    frame: kernels.EarthFrame,
    site: kernels.Site,
    backend: kernels.Backend | None = None,
) -> list[list[tuple[float, float]]]:
    """Visibility intervals for every row of an element table.

    sin(elevation) - sin(mask) is sampled on the mission grid. Each sign change is
    bisected down to ``refine_tolerance``; each sub-threshold local maximum is
    searched with golden section so passes shorter than one step are not lost.
    """
    backend = backend or kernels.active_backend()
    times = mission.sample_times()
    tol = mission.refine_tolerance
    sin_mask = math.sin(site.mask)
    out: list[list[tuple[float, float]]] = []
    for lo_row in range(0, table.shape[0], CHUNK_SATELLITES):
        chunk = table[lo_row : lo_row + CHUNK_SATELLITES]

        def g(idx, t):
            return backend.sin_elevation_points(chunk, idx, t, frame, site) - sin_mask

        G = backend.sin_elevation_grid(chunk, times, frame, site) - sin_mask
        vis = G >= 0.0

        sat, k = np.nonzero(vis[:, :-1] != vis[:, 1:])
        crossing_t = bisect_sign_change(g, sat, times[k], times[k + 1], vis[sat, k], tol)
        crossing_rise = ~vis[sat, k]

        neg = G < 0.0
        interior = (
            neg[:, 1:-1]
            & neg[:, :-2]
            & neg[:, 2:]
            & (G[:, 1:-1] > G[:, :-2])
            & (G[:, 1:-1] >= G[:, 2:])
        )
        hs, hk = np.nonzero(interior)
        lo_k, hi_k = hk, hk + 2
        first = neg[:, 0] & neg[:, 1] & (G[:, 0] >= G[:, 1])
        last = neg[:, -1] & neg[:, -2] & (G[:, -1] > G[:, -2])
        fs, = np.nonzero(first)
        ls, = np.nonzero(last)
        n_t = times.size
        hs = np.concatenate([hs, fs, ls])
        lo_k = np.concatenate([lo_k, np.zeros_like(fs), np.full_like(ls, n_t - 2)])
        hi_k = np.concatenate([hi_k, np.ones_like(fs), np.full_like(ls, n_t - 1)])

        if hs.size:
            t_peak, neg_peak = golden_minimize(
                lambda idx, t: -g(idx, t), hs, times[lo_k], times[hi_k], tol
            )
            found = -neg_peak >= 0.0
            hs, lo_k, hi_k, t_peak = hs[found], lo_k[found], hi_k[found], t_peak[found]
            rise = bisect_sign_change(g, hs, times[lo_k], t_peak, np.zeros(hs.size, bool), tol)
            fall = bisect_sign_change(g, hs, t_peak, times[hi_k], np.ones(hs.size, bool), tol)
            sat = np.concatenate([sat, hs, hs])
            crossing_t = np.concatenate([crossing_t, rise, fall])
            crossing_rise = np.concatenate([crossing_rise, np.ones(hs.size, bool), np.zeros(hs.size, bool)])

        order = np.lexsort((crossing_t, sat))
        sat, crossing_t, crossing_rise = sat[order], crossing_t[order], crossing_rise[order]
        bounds = np.searchsorted(sat, np.arange(chunk.shape[0] + 1))
        for i in range(chunk.shape[0]):
            ts = crossing_t[bounds[i] : bounds[i + 1]]
            rs = crossing_rise[bounds[i] : bounds[i + 1]]
            starts = ts[rs].tolist()
            ends = ts[~rs].tolist()
            if vis[i, 0]:
                starts.insert(0, 0.0)
            if vis[i, -1]:
                ends.append(mission.duration)
            if len(starts) != len(ends):  # pragma: no cover - alternation is structural
                raise RuntimeError("unbalanced rise/set events")
            intervals = [
                (min(max(s, 0.0), mission.duration), min(max(e, 0.0), mission.duration))
                for s, e in zip(starts, ends)
            ]
            out.append(_clean_intervals(intervals, tol))
    return out


def constellation_windows(
    station: GroundStation,
    satellites: Sequence[Satellite],
    mission: MissionConfig,
    constants: Constants = WGS84,
    backend: kernels.Backend | None = None,
) -> dict[str, list[AccessWindow]]:
    """Windows for every satellite; every id is present, possibly with an empty list."""
    table = kernels.element_table([s.elements for s in satellites], mission.epoch, mission.j2)
    intervals = find_window_intervals(
        table, mission, kernels.EarthFrame.at(mission.epoch), station.site(constants), backend
    )
    return {
        sat.id: [AccessWindow(station.name, sat.id, s, e) for s, e in ivs]
        for sat, ivs in zip(satellites, intervals)
    }


def compute_windows(
    station: GroundStation,
    satellite: OrbitalElements,
    mission: MissionConfig,
    satellite_id: str = "sat",
    constants: Constants = WGS84,
) -> list[AccessWindow]:
    return constellation_windows(station, [Satellite(satellite_id, satellite)], mission, constants)[
        satellite_id
    ]


def constellation_metrics(
    windows: Mapping[str, Sequence[AccessWindow]],
    total_satellites: int,
    mission: MissionConfig,
    constellation_name: str = "",
    station_name: str = "",
) -> AccessMetrics:
    """Accessible ratio, mean access time per accessible satellite (T_a) and gamma = T_a / duration."""
    if total_satellites <= 0:
        raise ValueError("total_satellites must be positive")
    per_sat = {sid: math.fsum(w.duration for w in ws) for sid, ws in sorted(windows.items()) if ws}
    if len(per_sat) > total_satellites:
        raise ValueError("more accessible satellites than total_satellites")
    n_access = len(per_sat)
    ta = math.fsum(per_sat.values()) / n_access if n_access else 0.0
    return AccessMetrics(
        constellation_name,
        station_name,
        total_satellites,
        n_access / total_satellites,
        ta,
        ta / mission.duration,
    )


def average_metrics(rows: Sequence[AccessMetrics], constellation_name: str | None = None) -> AccessMetrics:
    """Unweighted mean of per-shell rows; satellite counts add."""
    if not rows:
        raise ValueError("nothing to average")
    n = len(rows)
    return AccessMetrics(
        constellation_name if constellation_name is not None else rows[0].constellation_name,
        rows[0].station_name,
        sum(r.total_satellites for r in rows),
        math.fsum(r.accessible_ratio for r in rows) / n,
        math.fsum(r.mean_access_time_ta for r in rows) / n,
        math.fsum(r.gamma for r in rows) / n,
    )


def interval_union(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [(s, e) for s, e in merged]


def union_access_ratio(
    window_sets: Sequence[Mapping[str, Sequence[AccessWindow]]],
    satellite_ids: Sequence[str],
    duration: float,
) -> float:
    """Mean over satellites of (union of their windows across all sets) / duration."""
    if not satellite_ids:
        raise ValueError("empty constellation")
    ratios = []
    for sid in satellite_ids:
        spans = [(w.t_rise, w.t_set) for ws in window_sets for w in ws.get(sid, ())]
        covered = math.fsum(e - s for s, e in interval_union(spans))
        ratios.append(covered / duration)
    return math.fsum(ratios) / len(ratios)


def network_union_metrics(
    stations: Sequence[GroundStation],
    constellation: Sequence[Satellite],
    mission: MissionConfig,
    constants: Constants = WGS84,
) -> float:
    """Per-satellite access ratio of a station network, averaged over the constellation."""
    if not stations:
        raise ValueError("station list is empty")
    if not constellation:
        raise ValueError("empty constellation")
    cache: dict[GroundStation, dict[str, list[AccessWindow]]] = {}
    for station in stations:
        if station not in cache:
            cache[station] = constellation_windows(station, constellation, mission, constants)
    return union_access_ratio(
        [cache[s] for s in stations], [sat.id for sat in constellation], mission.duration
    )


def data_volume_bound(ta: float, link_rate: float) -> float:
    """Upper bound on bits moved in ``ta`` seconds at ``link_rate`` bit/s."""
    if ta < 0 or link_rate < 0:
        raise ValueError("access time and link rate must be non-negative")
    return ta * link_rate

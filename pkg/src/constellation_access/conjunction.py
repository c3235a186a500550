"""Pairwise closest-approach screening: coarse sampling, then golden-section refinement."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .access import MissionConfig
from .astro import OrbitalElements
from .constellation import Satellite
from .search import golden_minimize

DEFAULT_COARSE_STEP = 30.0
TCA_RESOLUTION = 1e-3  # s
# slack on the two-body speed bound for the slow J2 drift of the orbit plane
_SPEED_MARGIN = 1.01


@dataclass(frozen=True)
class ConjunctionEvent:
    satellite_a: str
    satellite_b: str
    time_of_closest_approach: float  # s since interval start
    miss_distance: float  # km


def _coarse_times(interval: MissionConfig, coarse_step: float) -> np.ndarray:
    if coarse_step <= 0:
        raise ValueError("coarse_step must be positive")
    times = np.arange(0.0, interval.duration, coarse_step)
    if times[-1] < interval.duration:
        times = np.append(times, interval.duration)
    return times


def _max_speed(el: OrbitalElements) -> float:
    return math.sqrt(el.constants.mu * (2.0 / el.perigee_radius - 1.0 / el.semi_major_axis))


def _refine_pairs(
    table: np.ndarray,
    first: np.ndarray,
    second: np.ndarray,
    times: np.ndarray,
    distances: np.ndarray,
    backend: kernels.Backend,
) -> tuple[np.ndarray, np.ndarray]:
    """Global minimum (tca, miss) per pair from sampled ``distances`` (n_pairs, n_t)."""
    n_pairs, n_t = distances.shape
    best = np.argmin(distances, axis=1)  # first occurrence on ties
    rows = np.arange(n_pairs)
    tca = times[best].astype(float)
    miss = distances[rows, best].astype(float)

    D = distances
    interior = (D[:, 1:-1] < D[:, :-2]) & (D[:, 1:-1] <= D[:, 2:])
    pi, pk = np.nonzero(interior)
    lo, hi = pk, pk + 2
    at_start, = np.nonzero(D[:, 0] <= D[:, 1])
    at_end, = np.nonzero(D[:, -1] < D[:, -2])
    owner = np.concatenate([pi, at_start, at_end])
    lo = np.concatenate([lo, np.zeros_like(at_start), np.full_like(at_end, n_t - 2)])
    hi = np.concatenate([hi, np.ones_like(at_start), np.full_like(at_end, n_t - 1)])
    if owner.size == 0:
        return tca, miss

    a_idx, b_idx = first[owner], second[owner]

    def distance(c, t):
        return np.linalg.norm(
            backend.eci_points(table, a_idx[c], t) - backend.eci_points(table, b_idx[c], t), axis=1
        )

    t_ref, d_ref = golden_minimize(
        distance, np.arange(owner.size), times[lo], times[hi], TCA_RESOLUTION
    )
    # keep candidates in a fixed order so equal minima resolve to the earliest time
    order = np.lexsort((t_ref, d_ref, owner))
    for c in order:
        p = owner[c]
        if d_ref[c] < miss[p] or (d_ref[c] == miss[p] and t_ref[c] < tca[p]):
            miss[p] = d_ref[c]
            tca[p] = t_ref[c]
    return tca, miss


def _pair_distances(grid: np.ndarray, i: int, js: np.ndarray) -> np.ndarray:
    return np.linalg.norm(grid[js] - grid[i], axis=2)


def pair_min_distance(
    a: OrbitalElements,
    b: OrbitalElements,
    interval: MissionConfig,
    coarse_step: float = DEFAULT_COARSE_STEP,
    ids: tuple[str, str] = ("a", "b"),
) -> ConjunctionEvent:
    """Closest approach of two satellites over the interval, TCA resolved to 1 ms."""
    backend = kernels.active_backend()
    times = _coarse_times(interval, coarse_step)
    table = kernels.element_table([a, b], interval.epoch, interval.j2)
    grid = backend.eci_grid(table, times)
    distances = np.linalg.norm(grid[0] - grid[1], axis=1)[None, :]
    tca, miss = _refine_pairs(
        table, np.array([0]), np.array([1]), times, distances, backend
    )
    return ConjunctionEvent(ids[0], ids[1], float(tca[0]), float(miss[0]))


def altitude_bands_overlap(a: OrbitalElements, b: OrbitalElements, threshold: float) -> bool:
    return (
        a.perigee_radius - threshold <= b.apogee_radius + threshold
        and b.perigee_radius - threshold <= a.apogee_radius + threshold
    )


def screen_constellation(
    satellites: Sequence[Satellite],
    interval: MissionConfig,
    threshold: float,
    coarse_step: float = DEFAULT_COARSE_STEP,
    prefilter: bool = True,
) -> list[ConjunctionEvent]:
    """Every pair whose closest approach is below ``threshold`` km, nearest first.

    ``prefilter`` skips pairs whose radial bands cannot come within the
    threshold. A second, always-on sieve drops pairs whose sampled minimum
    minus the worst-case relative motion over half a step is still at or
    above the threshold; neither changes the result set.
    """
    if len(satellites) < 2:
        raise ValueError("screening needs at least two satellites")
    if threshold <= 0:
        return []
    backend = kernels.active_backend()
    times = _coarse_times(interval, coarse_step)
    elements = [s.elements for s in satellites]
    table = kernels.element_table(elements, interval.epoch, interval.j2)
    grid = backend.eci_grid(table, times)
    speed = np.array([_max_speed(el) for el in elements]) * _SPEED_MARGIN
    perigee = np.array([el.perigee_radius for el in elements])
    apogee = np.array([el.apogee_radius for el in elements])
    max_gap = float(np.max(np.diff(times)))

    events: list[ConjunctionEvent] = []
    n = len(satellites)
    for i in range(n - 1):
        js = np.arange(i + 1, n)
        if prefilter:
            overlap = (perigee[i] - threshold <= apogee[js] + threshold) & (
                perigee[js] - threshold <= apogee[i] + threshold
            )
            js = js[overlap]
        if js.size == 0:
            continue
        distances = _pair_distances(grid, i, js)
        reachable = distances.min(axis=1) - (speed[i] + speed[js]) * (0.5 * max_gap) < threshold
        js, distances = js[reachable], distances[reachable]
        if js.size == 0:
            continue
        tca, miss = _refine_pairs(table, np.full(js.size, i), js, times, distances, backend)
        for j, t, d in zip(js, tca, miss):
            if d < threshold:
                events.append(
                    ConjunctionEvent(satellites[i].id, satellites[j].id, float(t), float(d))
                )
    events.sort(key=lambda e: (e.miss_distance, e.satellite_a, e.satellite_b))
    return events

"""Hot numeric kernels: batched propagation, sin(elevation) and ECI positions.

Every kernel exists twice: a scalar-loop version compiled with numba and a
broadcasting numpy version. ``active_backend()`` picks numba when it is
installed and not disabled through ``CONSTELLATION_ACCESS_DISABLE_NUMBA``.

Satellites are passed as an ``(n, N_COLUMNS)`` float64 table built by
:func:`element_table`; times are seconds since the mission epoch.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _accel
from ._accel import njit
from .astro import OrbitalElements, Timestamp, gmst, gmst_rate, secular_rates

A, ECC, COSI, SINI, RAAN0, ARGP0, M0, MDOT, RAANDOT, ARGPDOT, T0 = range(11)
N_COLUMNS = 11

KEPLER_TOL = 1e-12
KEPLER_MAX_ITER = 50
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EarthFrame:
    """Linearised Earth rotation over a mission: theta(t) = theta0 + rate * t."""

    theta0: float
    rate: float

    @classmethod
    def at(cls, epoch: Timestamp) -> "EarthFrame":
        return cls(gmst(epoch), gmst_rate(epoch))


@dataclass(frozen=True)
class Site:
    """Station position and local vertical in ECEF, plus the mask in radians."""

    ecef: np.ndarray
    up: np.ndarray
    mask: float


def element_table(
    elements: Sequence[OrbitalElements], mission_epoch: Timestamp, j2_enabled: bool = True
) -> np.ndarray:
    table = np.empty((len(elements), N_COLUMNS))
    for row, el in zip(table, elements):
        raan_dot, argp_dot, m_dot = secular_rates(el, j2_enabled)
        row[:] = (
            el.semi_major_axis,
            el.eccentricity,
            math.cos(el.inclination),
            math.sin(el.inclination),
            el.raan,
            el.arg_perigee,
            el.mean_anomaly_at_epoch,
            m_dot,
            raan_dot,
            argp_dot,
            el.epoch - mission_epoch,
        )
    return table


# --------------------------------------------------------------------------
# numba loop kernels
#
# Positions are built in the node frame (x along the ascending node) and then
# rotated about z by lam. lam = RAAN gives ECI; lam = RAAN - GMST gives ECEF
# directly. Circular orbits skip Kepler and use the argument of latitude.


@njit(cache=True)
def _kepler_scalar(m, e):
    E = m if e < 0.8 else math.pi
    for _ in range(KEPLER_MAX_ITER):
        f = E - e * math.sin(E) - m
        if abs(f) <= KEPLER_TOL:
            break
        E -= f / (1.0 - e * math.cos(E))
    return E


@njit(cache=True)
def _position_scalar(row, t, theta0, rate):
    dt = t - row[T0]
    m = row[M0] + row[MDOT] * dt
    argp = row[ARGP0] + row[ARGPDOT] * dt
    lam = row[RAAN0] + row[RAANDOT] * dt - (theta0 + rate * t)
    a = row[A]
    e = row[ECC]
    if e == 0.0:
        u = m + argp
        xn = a * math.cos(u)
        yn = a * math.sin(u)
    else:
        E = _kepler_scalar(m - _TWO_PI * math.floor(m / _TWO_PI), e)
        xp = a * (math.cos(E) - e)
        yp = a * math.sqrt(1.0 - e * e) * math.sin(E)
        co = math.cos(argp)
        so = math.sin(argp)
        xn = xp * co - yp * so
        yn = xp * so + yp * co
    yc = yn * row[COSI]
    cl = math.cos(lam)
    sl = math.sin(lam)
    return cl * xn - sl * yc, sl * xn + cl * yc, yn * row[SINI]


@njit(cache=True)
def _sin_elevation_scalar(row, t, theta0, rate, site, up):
    x, y, z = _position_scalar(row, t, theta0, rate)
    dx = x - site[0]
    dy = y - site[1]
    dz = z - site[2]
    return (dx * up[0] + dy * up[1] + dz * up[2]) / math.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True)
def _sin_elevation_grid_numba(table, times, theta0, rate, site, up):
    out = np.empty((table.shape[0], times.shape[0]))
    for i in range(table.shape[0]):
        row = table[i]
        for k in range(times.shape[0]):
            out[i, k] = _sin_elevation_scalar(row, times[k], theta0, rate, site, up)
    return out


@njit(cache=True)
def _sin_elevation_points_numba(table, idx, t, theta0, rate, site, up):
    out = np.empty(idx.shape[0])
    for j in range(idx.shape[0]):
        out[j] = _sin_elevation_scalar(table[idx[j]], t[j], theta0, rate, site, up)
    return out


@njit(cache=True)
def _eci_grid_numba(table, times):
    out = np.empty((table.shape[0], times.shape[0], 3))
    for i in range(table.shape[0]):
        row = table[i]
        for k in range(times.shape[0]):
            x, y, z = _position_scalar(row, times[k], 0.0, 0.0)
            out[i, k, 0] = x
            out[i, k, 1] = y
            out[i, k, 2] = z
    return out


@njit(cache=True)
def _eci_points_numba(table, idx, t):
    out = np.empty((idx.shape[0], 3))
    for j in range(idx.shape[0]):
        x, y, z = _position_scalar(table[idx[j]], t[j], 0.0, 0.0)
        out[j, 0] = x
        out[j, 1] = y
        out[j, 2] = z
    return out


# --------------------------------------------------------------------------
# numpy broadcasting kernels


def _kepler_np(m: np.ndarray, e: np.ndarray) -> np.ndarray:
    E = np.where(e < 0.8, m, math.pi)
    active = np.ones(E.shape, dtype=bool)
    for _ in range(KEPLER_MAX_ITER):
        f = E - e * np.sin(E) - m
        active &= np.abs(f) > KEPLER_TOL
        if not active.any():
            break
        E = np.where(active, E - f / (1.0 - e * np.cos(E)), E)
    return E


def _position_np(rows: np.ndarray, t: np.ndarray, theta0: float, rate: float):
    """Same maths as ``_position_scalar``; leading axes of ``rows`` broadcast with ``t``."""
    col = lambda c: rows[..., c]  # noqa: E731
    shape = np.broadcast_shapes(rows.shape[:-1], np.shape(t))
    full = lambda v: np.broadcast_to(v, shape)  # noqa: E731
    dt = t - col(T0)
    m = full(col(M0) + col(MDOT) * dt)
    argp = full(col(ARGP0) + col(ARGPDOT) * dt)
    lam = col(RAAN0) + col(RAANDOT) * dt - (theta0 + rate * t)
    a = full(col(A))
    e = full(col(ECC))

    circ = e == 0.0
    xn = np.empty(shape)
    yn = np.empty(shape)
    u = m[circ] + argp[circ]
    xn[circ] = a[circ] * np.cos(u)
    yn[circ] = a[circ] * np.sin(u)
    ecc = ~circ
    if ecc.any():
        ae, ee, we = a[ecc], e[ecc], argp[ecc]
        me = m[ecc]
        E = _kepler_np(me - _TWO_PI * np.floor(me / _TWO_PI), ee)
        xp = ae * (np.cos(E) - ee)
        yp = ae * np.sqrt(1.0 - ee * ee) * np.sin(E)
        co, so = np.cos(we), np.sin(we)
        xn[ecc] = xp * co - yp * so
        yn[ecc] = xp * so + yp * co

    yc = yn * col(COSI)
    cl, sl = np.cos(lam), np.sin(lam)
    return cl * xn - sl * yc, sl * xn + cl * yc, yn * col(SINI)


def _sin_elevation_np(rows, t, theta0, rate, site, up):
    x, y, z = _position_np(rows, t, theta0, rate)
    dx = x - site[0]
    dy = y - site[1]
    dz = z - site[2]
    return (dx * up[0] + dy * up[1] + dz * up[2]) / np.sqrt(dx * dx + dy * dy + dz * dz)


def _sin_elevation_grid_np(table, times, theta0, rate, site, up):
    return _sin_elevation_np(table[:, None, :], times[None, :], theta0, rate, site, up)


def _sin_elevation_points_np(table, idx, t, theta0, rate, site, up):
    return _sin_elevation_np(table[idx], t, theta0, rate, site, up)


def _eci_grid_np(table, times):
    return np.stack(_position_np(table[:, None, :], times[None, :], 0.0, 0.0), axis=-1)


def _eci_points_np(table, idx, t):
    return np.stack(_position_np(table[idx], t, 0.0, 0.0), axis=-1)


# --------------------------------------------------------------------------
# dispatch


@dataclass(frozen=True)
class Backend:
    name: str
    _sin_elevation_grid: Callable
    _sin_elevation_points: Callable
    _eci_grid: Callable
    _eci_points: Callable

    def sin_elevation_grid(self, table, times, frame: EarthFrame, site: Site) -> np.ndarray:
        """sin(elevation) of every satellite at every time, shape (n_sat, n_t)."""
        return self._sin_elevation_grid(
            np.ascontiguousarray(table, dtype=float),
            np.ascontiguousarray(times, dtype=float),
            float(frame.theta0),
            float(frame.rate),
            np.ascontiguousarray(site.ecef, dtype=float),
            np.ascontiguousarray(site.up, dtype=float),
        )

    def sin_elevation_points(self, table, idx, t, frame: EarthFrame, site: Site) -> np.ndarray:
        """sin(elevation) of satellite ``idx[j]`` at time ``t[j]``."""
        return self._sin_elevation_points(
            np.ascontiguousarray(table, dtype=float),
            np.ascontiguousarray(idx, dtype=np.int64),
            np.ascontiguousarray(t, dtype=float),
            float(frame.theta0),
            float(frame.rate),
            np.ascontiguousarray(site.ecef, dtype=float),
            np.ascontiguousarray(site.up, dtype=float),
        )

    def eci_grid(self, table, times) -> np.ndarray:
        """ECI positions, shape (n_sat, n_t, 3)."""
        return self._eci_grid(
            np.ascontiguousarray(table, dtype=float), np.ascontiguousarray(times, dtype=float)
        )

    def eci_points(self, table, idx, t) -> np.ndarray:
        return self._eci_points(
            np.ascontiguousarray(table, dtype=float),
            np.ascontiguousarray(idx, dtype=np.int64),
            np.ascontiguousarray(t, dtype=float),
        )


NUMPY = Backend(
    "numpy", _sin_elevation_grid_np, _sin_elevation_points_np, _eci_grid_np, _eci_points_np
)
NUMBA = Backend(
    "numba",
    _sin_elevation_grid_numba,
    _sin_elevation_points_numba,
    _eci_grid_numba,
    _eci_points_numba,
)

_active = NUMBA if _accel.NUMBA_ENABLED else NUMPY


def active_backend() -> Backend:
    return _active


def get_backend(name: str) -> Backend:
    if name == "numpy":
        return NUMPY
    if name == "numba":
        if not _accel.NUMBA_INSTALLED:
            raise RuntimeError("numba is not installed")
        return NUMBA
    raise ValueError(f"unknown backend {name!r}")


@contextlib.contextmanager
def use_backend(name: str):
    global _active
    previous = _active
    _active = get_backend(name)
    try:
        yield _active
    finally:
        _active = previous

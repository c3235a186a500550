"""Time systems, Earth constants, frame transforms and analytic propagation.

Units are km, km/s, seconds and radians throughout; degrees appear only at
file/CLI boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone

import numpy as np

TWO_PI = 2.0 * math.pi
SECONDS_PER_DAY = 86400.0
JD_J2000 = 2451545.0
JD_UNIX_EPOCH = 2440587.5
SIDEREAL_DAY = 86164.0905


class KeplerConvergenceError(ArithmeticError):
    """Newton iteration on Kepler's equation hit its iteration cap."""


@dataclass(frozen=True)
class Constants:
    """Earth model constants (WGS84 shape, EGM gravity)."""

    mu: float = 398600.4418  # km^3/s^2
    earth_equatorial_radius: float = 6378.137  # km
    earth_polar_radius: float = 6356.7523142  # km
    j2: float = 1.08262668e-3
    earth_rotation_rate: float = 7.2921159e-5  # rad/s

    def __post_init__(self):
        if self.mu <= 0 or self.earth_equatorial_radius <= 0 or self.earth_polar_radius <= 0:
            raise ValueError("mu and Earth radii must be strictly positive")
        if self.earth_rotation_rate <= 0:
            raise ValueError("earth_rotation_rate must be strictly positive")
        # equality and j2 == 0 are allowed so tests can switch to a spherical / two-body Earth
        if self.earth_polar_radius > self.earth_equatorial_radius:
            raise ValueError("polar radius must not exceed equatorial radius")
        if self.j2 < 0:
            raise ValueError("j2 must be non-negative")

    @property
    def flattening(self) -> float:
        return 1.0 - self.earth_polar_radius / self.earth_equatorial_radius

    @property
    def eccentricity_squared(self) -> float:
        f = self.flattening
        return f * (2.0 - f)


WGS84 = Constants()


@dataclass(frozen=True, order=True)
class Timestamp:
    """A UTC instant as an anchor Julian date plus an offset in seconds.

    The anchor is normally a 0h UTC Julian date (a ``.5`` value, exactly
    representable), which keeps differences between timestamps exact to
    floating-point resolution of the seconds part.
    """

    jd_anchor: float
    seconds: float = 0.0

    @classmethod
    def from_datetime(cls, value: datetime) -> "Timestamp":
        if value.tzinfo is not None:
            value = value.astimezone(timezone.utc).replace(tzinfo=None)
        midnight = datetime(value.year, value.month, value.day)
        days = (midnight - datetime(1970, 1, 1)).days
        offset = (value - midnight).total_seconds()
        return cls(JD_UNIX_EPOCH + days, offset)

    @classmethod
    def from_iso(cls, text: str) -> "Timestamp":
        text = text.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        return cls.from_datetime(datetime.fromisoformat(text))

    @property
    def seconds_since_epoch(self) -> float:
        return self.seconds

    @property
    def julian_date_utc(self) -> float:
        return self.jd_anchor + self.seconds / SECONDS_PER_DAY

    @property
    def days_since_j2000(self) -> float:
        return (self.jd_anchor - JD_J2000) + self.seconds / SECONDS_PER_DAY

    def shift(self, seconds: float) -> "Timestamp":
        return Timestamp(self.jd_anchor, self.seconds + seconds)

    def to_datetime(self) -> datetime:
        days = self.jd_anchor - JD_UNIX_EPOCH
        base = datetime(1970, 1, 1, tzinfo=timezone.utc) + timedelta(days=days)
        return base + timedelta(seconds=self.seconds)

    def isoformat(self) -> str:
        return self.to_datetime().isoformat().replace("+00:00", "Z")

    def __sub__(self, other: "Timestamp") -> float:
        """Seconds elapsed from ``other`` to ``self``."""
        if not isinstance(other, Timestamp):
            return NotImplemented
        return (self.jd_anchor - other.jd_anchor) * SECONDS_PER_DAY + (self.seconds - other.seconds)


@dataclass(frozen=True)
class OrbitalElements:
    """Keplerian elements at ``epoch``; angles in radians, a in km."""

    semi_major_axis: float
    eccentricity: float
    inclination: float
    raan: float
    arg_perigee: float
    mean_anomaly_at_epoch: float
    epoch: Timestamp
    constants: Constants = field(default=WGS84, repr=False, compare=False)

    def __post_init__(self):
        values = (
            self.semi_major_axis,
            self.eccentricity,
            self.inclination,
            self.raan,
            self.arg_perigee,
            self.mean_anomaly_at_epoch,
        )
        if not all(math.isfinite(v) for v in values):
            raise ValueError("orbital elements must be finite")
        if self.semi_major_axis <= self.constants.earth_equatorial_radius:
            raise ValueError(
                f"semi-major axis {self.semi_major_axis:.3f} km is inside the Earth"
            )
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"eccentricity {self.eccentricity} outside [0, 1)")
        if not 0.0 <= self.inclination <= math.pi:
            raise ValueError(f"inclination {self.inclination} outside [0, pi]")
        for name in ("raan", "arg_perigee", "mean_anomaly_at_epoch"):
            object.__setattr__(self, name, normalize_angle(getattr(self, name)))

    @property
    def mean_motion(self) -> float:
        """Unperturbed mean motion (rad/s)."""
        return math.sqrt(self.constants.mu / self.semi_major_axis**3)

    @property
    def period(self) -> float:
        return orbital_period(self.semi_major_axis, self.constants)

    @property
    def perigee_radius(self) -> float:
        return self.semi_major_axis * (1.0 - self.eccentricity)

    @property
    def apogee_radius(self) -> float:
        return self.semi_major_axis * (1.0 + self.eccentricity)

    def with_constants(self, constants: Constants) -> "OrbitalElements":
        return replace(self, constants=constants)


@dataclass(frozen=True)
class StateVector:
    position_eci: np.ndarray
    velocity_eci: np.ndarray
    time: Timestamp


def normalize_angle(angle: float) -> float:
    """Wrap to [0, 2pi)."""
    wrapped = math.fmod(angle, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    if wrapped >= TWO_PI:  # fmod of a tiny negative can round up to 2pi
        wrapped = 0.0
    return wrapped


def orbital_period(semi_major_axis: float, constants: Constants = WGS84) -> float:
    return TWO_PI * math.sqrt(semi_major_axis**3 / constants.mu)


def solve_kepler(
    mean_anomaly: float, eccentricity: float, tolerance: float = 1e-12, max_iter: int = 50
) -> float:
    """Eccentric anomaly E with |E - e sin E - M| <= tolerance (Newton-Raphson)."""
    if not 0.0 <= eccentricity < 1.0:
        raise ValueError(f"eccentricity {eccentricity} outside [0, 1)")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    E = mean_anomaly if eccentricity < 0.8 else math.pi
    for _ in range(max_iter):
        residual = E - eccentricity * math.sin(E) - mean_anomaly
        if abs(residual) <= tolerance:
            return E
        E -= residual / (1.0 - eccentricity * math.cos(E))
    residual = E - eccentricity * math.sin(E) - mean_anomaly
    if abs(residual) <= tolerance:
        return E
    raise KeplerConvergenceError(
        f"no convergence after {max_iter} iterations (M={mean_anomaly!r}, e={eccentricity!r})"
    )


def secular_rates(elements: OrbitalElements, j2_enabled: bool = True) -> tuple[float, float, float]:
    """Secular (raan_dot, arg_perigee_dot, mean_anomaly_dot) in rad/s.

    Without J2 these are (0, 0, n). With J2 the standard first-order nodal
    regression, apsidal rotation and mean-motion correction are applied.
    """
    c = elements.constants
    n = elements.mean_motion
    j2 = c.j2 if j2_enabled else 0.0
    e = elements.eccentricity
    p = elements.semi_major_axis * (1.0 - e * e)
    k = j2 * (c.earth_equatorial_radius / p) ** 2 * n
    cos_i = math.cos(elements.inclination)
    cos2 = cos_i * cos_i
    raan_dot = -1.5 * k * cos_i
    argp_dot = 0.75 * k * (5.0 * cos2 - 1.0)
    m_dot = n + 0.75 * k * math.sqrt(1.0 - e * e) * (3.0 * cos2 - 1.0)
    return raan_dot, argp_dot, m_dot


def perifocal_basis(raan: float, arg_perigee: float, inclination: float):
    """Unit vectors P (to perigee) and Q (90 deg ahead in-plane) in ECI."""
    cO, sO = math.cos(raan), math.sin(raan)
    co, so = math.cos(arg_perigee), math.sin(arg_perigee)
    ci, si = math.cos(inclination), math.sin(inclination)
    P = np.array([cO * co - sO * so * ci, sO * co + cO * so * ci, so * si])
    Q = np.array([-cO * so - sO * co * ci, -sO * so + cO * co * ci, co * si])
    return P, Q


def propagate(elements: OrbitalElements, t: Timestamp, j2_enabled: bool = False) -> StateVector:
    """Analytic two-body state at ``t``, optionally with J2 secular drift of the angles."""
    dt = t - elements.epoch
    raan_dot, argp_dot, m_dot = secular_rates(elements, j2_enabled)
    raan = elements.raan + raan_dot * dt
    argp = elements.arg_perigee + argp_dot * dt
    M = normalize_angle(elements.mean_anomaly_at_epoch + m_dot * dt)

    a = elements.semi_major_axis
    e = elements.eccentricity
    E = solve_kepler(M, e)
    cos_E, sin_E = math.cos(E), math.sin(E)
    b_factor = math.sqrt(1.0 - e * e)
    x_pf = a * (cos_E - e)
    y_pf = a * b_factor * sin_E
    r = a * (1.0 - e * cos_E)
    v_scale = math.sqrt(elements.constants.mu * a) / r
    vx_pf = -v_scale * sin_E
    vy_pf = v_scale * b_factor * cos_E

    P, Q = perifocal_basis(raan, argp, elements.inclination)
    return StateVector(x_pf * P + y_pf * Q, vx_pf * P + vy_pf * Q, t)


def gmst(t: Timestamp) -> float:
    """Greenwich mean sidereal time (IAU 1982, UT1 taken as UTC), in [0, 2pi)."""
    d = t.days_since_j2000
    T = d / 36525.0
    # split the large linear term so whole days drop out before scaling
    seconds = (
        67310.54841
        + 8640184.812866 * T
        + 0.093104 * T * T
        - 6.2e-6 * T * T * T
        + (d % 1.0) * SECONDS_PER_DAY
    )
    return normalize_angle(seconds % SECONDS_PER_DAY * (TWO_PI / SECONDS_PER_DAY))


def gmst_rate(t: Timestamp) -> float:
    """Time derivative of GMST (rad/s) at ``t``."""
    T = t.days_since_j2000 / 36525.0
    sidereal_per_solar = 1.0 + (8640184.812866 + 2 * 0.093104 * T - 3 * 6.2e-6 * T * T) / (
        36525.0 * SECONDS_PER_DAY
    )
    return sidereal_per_solar * TWO_PI / SECONDS_PER_DAY


def rotate_z(vector, angle: float) -> np.ndarray:
    """Frame rotation R3(angle) applied to a 3-vector."""
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = vector
    return np.array([c * x + s * y, -s * x + c * y, z])


def eci_to_ecef(state: StateVector) -> np.ndarray:
    return rotate_z(state.position_eci, gmst(state.time))


def ecef_to_eci(position_ecef, t: Timestamp) -> np.ndarray:
    return rotate_z(position_ecef, -gmst(t))


def geodetic_to_ecef(
    latitude: float, longitude: float, altitude: float, constants: Constants = WGS84
) -> np.ndarray:
    """Geodetic (rad, rad, km) to ECEF km on the reference ellipsoid."""
    if abs(latitude) > math.pi / 2 + 1e-15:
        raise ValueError(f"latitude {latitude} outside [-pi/2, pi/2]")
    e2 = constants.eccentricity_squared
    sin_lat, cos_lat = math.sin(latitude), math.cos(latitude)
    N = constants.earth_equatorial_radius / math.sqrt(1.0 - e2 * sin_lat * sin_lat)
    return np.array(
        [
            (N + altitude) * cos_lat * math.cos(longitude),
            (N + altitude) * cos_lat * math.sin(longitude),
            (N * (1.0 - e2) + altitude) * sin_lat,
        ]
    )

"""Ground stations, the stations CSV format, and topocentric look angles."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .astro import WGS84, Constants, geodetic_to_ecef
from .kernels import Site

STATION_COLUMNS = ("name", "lat_deg", "lon_deg", "alt_km", "min_elev_deg")


class StationFileError(ValueError):
    pass


def _normalize_longitude(lon: float) -> float:
    lon = math.fmod(lon, 360.0)
    if lon > 180.0:
        lon -= 360.0
    elif lon <= -180.0:
        lon += 360.0
    return lon


@dataclass(frozen=True)
class GroundStation:
    """Geodetic site; degrees and km as in the stations file."""

    name: str
    latitude: float
    longitude: float
    altitude: float = 0.0
    min_elevation: float = 25.0

    def __post_init__(self):
        values = (self.latitude, self.longitude, self.altitude, self.min_elevation)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"{self.name}: non-finite coordinate")
        if abs(self.latitude) > 90.0:
            raise ValueError(f"{self.name}: latitude {self.latitude} outside [-90, 90]")
        if not 0.0 <= self.min_elevation < 90.0:
            raise ValueError(f"{self.name}: elevation mask {self.min_elevation} outside [0, 90)")
        object.__setattr__(self, "longitude", _normalize_longitude(self.longitude))

    def ecef(self, constants: Constants = WGS84) -> np.ndarray:
        return geodetic_to_ecef(
            math.radians(self.latitude), math.radians(self.longitude), self.altitude, constants
        )

    def enu_basis(self) -> np.ndarray:
        """Rows are the east, north and up unit vectors (geodetic normal) in ECEF."""
        lat, lon = math.radians(self.latitude), math.radians(self.longitude)
        sl, cl = math.sin(lat), math.cos(lat)
        so, co = math.sin(lon), math.cos(lon)
        return np.array(
            [
                [-so, co, 0.0],
                [-sl * co, -sl * so, cl],
                [cl * co, cl * so, sl],
            ]
        )

    def site(self, constants: Constants = WGS84) -> Site:
        return Site(self.ecef(constants), self.enu_basis()[2], math.radians(self.min_elevation))

    def with_mask(self, min_elevation: float) -> "GroundStation":
        return GroundStation(self.name, self.latitude, self.longitude, self.altitude, min_elevation)


@dataclass(frozen=True)
class LookAngles:
    elevation: float  # deg
    azimuth: float  # deg, clockwise from north
    range: float  # km


def look_angles(
    station: GroundStation, satellite_ecef, constants: Constants = WGS84
) -> LookAngles:
    d = np.asarray(satellite_ecef, dtype=float) - station.ecef(constants)
    rng = float(np.linalg.norm(d))
    if rng == 0.0:
        raise ValueError("satellite coincides with the station")
    east, north, up = station.enu_basis() @ d
    elevation = math.degrees(math.asin(max(-1.0, min(1.0, up / rng))))
    azimuth = math.degrees(math.atan2(east, north)) % 360.0
    return LookAngles(elevation, azimuth, rng)


def is_visible(station: GroundStation, satellite_ecef, constants: Constants = WGS84) -> bool:
    return look_angles(station, satellite_ecef, constants).elevation >= station.min_elevation


def load_stations(content: str) -> list[GroundStation]:
    """Parse the stations CSV (header ``name,lat_deg,lon_deg,alt_km,min_elev_deg``)."""
    reader = csv.reader(io.StringIO(content))
    header = next(reader, None)
    if header is None:
        raise StationFileError("stations file is empty (missing header)")
    if tuple(h.strip() for h in header) != STATION_COLUMNS:
        raise StationFileError(f"expected header {','.join(STATION_COLUMNS)}, found {','.join(header)}")
    stations: list[GroundStation] = []
    seen: set[str] = set()
    for row_number, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(STATION_COLUMNS):
            raise StationFileError(f"row {row_number}: expected {len(STATION_COLUMNS)} fields, found {len(row)}")
        name = row[0].strip()
        if not name:
            raise StationFileError(f"row {row_number}: empty station name")
        if name in seen:
            raise StationFileError(f"row {row_number}: duplicate station name {name!r}")
        try:
            lat, lon, alt, mask = (float(cell) for cell in row[1:])
            station = GroundStation(name, lat, lon, alt, mask)
        except ValueError as exc:
            raise StationFileError(f"row {row_number}: {exc}") from None
        seen.add(name)
        stations.append(station)
    return stations

"""Ground-station access analysis and conjunction screening for NGSO constellations."""
__version__ = "0.1.0"

from .access import (
    AccessMetrics,
    AccessWindow,
    MissionConfig,
    compute_windows,
    constellation_metrics,
    constellation_windows,
    data_volume_bound,
    network_union_metrics,
)
from .astro import (
    WGS84,
    Constants,
    OrbitalElements,
    StateVector,
    Timestamp,
    eci_to_ecef,
    geodetic_to_ecef,
    gmst,
    propagate,
    solve_kepler,
)
from .constellation import ConstellationSpec, Satellite, WalkerShell, build_constellation, generate_walker
from .ground import GroundStation, LookAngles, load_stations, look_angles
from .tle import TleRecord, parse_tle_file, tle_to_elements


"""Walker Star/Delta generation and constellation specs (synthetic shells or TLE files)."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import jsonschema

from .astro import WGS84, Constants, OrbitalElements, Timestamp
from .tle import parse_tle_file, tle_to_elements

BUILTIN_PREFIX = "builtin:"
DATA_DIR = Path(__file__).parent / "data"


class Pattern(str, enum.Enum):
    STAR = "Star"
    DELTA = "Delta"

    @property
    def raan_spread(self) -> float:
        return 180.0 if self is Pattern.STAR else 360.0


@dataclass(frozen=True)
class WalkerShell:
    """One i:t/p/f shell. Angles in degrees, altitude in km above the equatorial radius."""

    pattern: Pattern
    total_satellites: int
    planes: int
    phasing: int
    inclination: float
    altitude: float
    raan_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pattern", Pattern(self.pattern))
        if self.total_satellites <= 0 or self.planes <= 0:
            raise ValueError("total satellites and plane count must be positive")
        if self.total_satellites % self.planes:
            raise ValueError(
                f"{self.planes} planes do not divide {self.total_satellites} satellites"
            )
        if not 0 <= self.phasing < self.planes:
            raise ValueError(f"phasing {self.phasing} outside [0, {self.planes})")
        if self.altitude <= 0:
            raise ValueError("altitude must be positive")
        if not 0.0 <= self.inclination <= 180.0:
            raise ValueError("inclination must lie in [0, 180] degrees")

    @property
    def per_plane(self) -> int:
        return self.total_satellites // self.planes


@dataclass(frozen=True)
class ConstellationSpec:
    """Either a list of Walker shells or a TLE file, never both.

    ``average_shells`` reports metrics as the unweighted mean of per-shell
    results instead of pooling all satellites.
    """

    name: str
    shells: tuple[WalkerShell, ...] = ()
    tle_source: Path | None = None
    tle_retrieved: str | None = None
    average_shells: bool = False
    source_file: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "shells", tuple(self.shells))
        if bool(self.shells) == (self.tle_source is not None):
            raise ValueError(f"{self.name}: give exactly one of 'shells' or 'tle_source'")
        if self.average_shells and not self.shells:
            raise ValueError(f"{self.name}: shell averaging needs synthetic shells")

    @property
    def shell_count(self) -> int:
        return len(self.shells) if self.shells else 1


@dataclass(frozen=True)
class Satellite:
    id: str
    elements: OrbitalElements
    shell: int = 0


def _wrap_degrees(value: float) -> float:
    wrapped = math.fmod(value, 360.0)
    return wrapped + 360.0 if wrapped < 0 else wrapped


def walker_angles(shell: WalkerShell) -> list[tuple[int, int, float, float]]:
    """(plane, slot, RAAN deg, mean anomaly deg) for every satellite of ``shell``."""
    t, p, f = shell.total_satellites, shell.planes, shell.phasing
    s = shell.per_plane
    out = []
    for k in range(p):
        raan = _wrap_degrees(shell.raan_offset + k * shell.pattern.raan_spread / p)
        for j in range(s):
            out.append((k, j, raan, _wrap_degrees(j * 360.0 / s + k * f * 360.0 / t)))
    return out


def generate_walker(
    shell: WalkerShell, epoch: Timestamp, constants: Constants = WGS84
) -> list[OrbitalElements]:
    a = constants.earth_equatorial_radius + shell.altitude
    inc = math.radians(shell.inclination)
    return [
        OrbitalElements(a, 0.0, inc, math.radians(raan), 0.0, math.radians(m), epoch, constants)
        for _, _, raan, m in walker_angles(shell)
    ]


def build_constellation(
    spec: ConstellationSpec, epoch: Timestamp, constants: Constants = WGS84
) -> list[Satellite]:
    """Flatten a spec into satellites with ids ``name/shell/plane/slot`` (or ``name/catalog``)."""
    if spec.tle_source is not None:
        records = parse_tle_file(Path(spec.tle_source).read_text(encoding="utf-8"))
        return [
            Satellite(f"{spec.name}/{r.catalog_number}", tle_to_elements(r, constants))
            for r in records
        ]
    sats = []
    for index, shell in enumerate(spec.shells):
        elements = generate_walker(shell, epoch, constants)
        for (plane, slot, _, _), el in zip(walker_angles(shell), elements):
            sats.append(Satellite(f"{spec.name}/{index}/{plane}/{slot}", el, index))
    return sats


# --------------------------------------------------------------------------
# JSON spec files


@lru_cache(maxsize=None)
def _schema() -> dict:
    return json.loads((DATA_DIR / "constellation.schema.json").read_text(encoding="utf-8"))


def builtin_path(name: str) -> Path:
    """Path of a packaged data file, e.g. ``presets/kuiper.json``."""
    path = DATA_DIR / name
    if not path.is_file():
        raise FileNotFoundError(f"no builtin data file {name!r}")
    return path


def resolve_reference(ref: str, base_dir: Path | None = None) -> Path:
    """Resolve ``builtin:<name>`` or a path relative to ``base_dir``."""
    if ref.startswith(BUILTIN_PREFIX):
        return builtin_path(ref[len(BUILTIN_PREFIX) :])
    path = Path(ref)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    return path


def spec_from_dict(document: dict, base_dir: Path | None = None) -> ConstellationSpec:
    jsonschema.validate(document, _schema())
    tle_source = None
    if "tle_source" in document:
        tle_source = resolve_reference(document["tle_source"], base_dir)
    shells = [
        WalkerShell(
            pattern=s["pattern"],
            total_satellites=s["total_satellites"],
            planes=s["planes"],
            phasing=s["phasing"],
            inclination=s["inclination_deg"],
            altitude=s["altitude_km"],
            raan_offset=s.get("raan_offset_deg", 0.0),
        )
        for s in document.get("shells", [])
    ]
    return ConstellationSpec(
        name=document["name"],
        shells=tuple(shells),
        tle_source=tle_source,
        tle_retrieved=document.get("tle_retrieved"),
        average_shells=document.get("average_shells", False),
    )


def load_spec(ref: str | Path, base_dir: Path | None = None) -> ConstellationSpec:
    path = resolve_reference(str(ref), base_dir)
    spec = spec_from_dict(json.loads(path.read_text(encoding="utf-8")), path.parent)
    object.__setattr__(spec, "source_file", str(path))
    return spec

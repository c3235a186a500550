"""Run configuration, orchestration and report files (CSV, summary text, JSON manifest)."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import jsonschema

from . import __version__, kernels
from .access import (
    AccessMetrics,
    MissionConfig,
    average_metrics,
    constellation_metrics,
    constellation_windows,
    data_volume_bound,
    union_access_ratio,
)
from .astro import Timestamp
from .conjunction import DEFAULT_COARSE_STEP, ConjunctionEvent, screen_constellation
from .constellation import (
    DATA_DIR,
    ConstellationSpec,
    Satellite,
    build_constellation,
    load_spec,
    resolve_reference,
)
from .ground import GroundStation, load_stations

log = logging.getLogger(__name__)

ACCESS_COLUMNS = ("station", "constellation", "total_satellites", "accessible_ratio", "Ta_s", "gamma")
SHELL_COLUMNS = ("station", "constellation", "shell", *ACCESS_COLUMNS[2:])
NETWORK_COLUMNS = ("constellation", "n_stations", "per_satellite_access_ratio")
CONJUNCTION_COLUMNS = ("sat_a", "sat_b", "tca_s", "miss_km")


class ConfigError(Exception):
    """Invalid or unreadable run configuration (exit status 1)."""


@dataclass(frozen=True)
class ConjunctionSettings:
    threshold_km: float
    coarse_step_s: float = DEFAULT_COARSE_STEP


@dataclass
class LoadedConstellation:
    ref: str
    spec: ConstellationSpec
    satellites: list[Satellite]


@dataclass
class RunConfig:
    mission: MissionConfig
    constellations: list[LoadedConstellation]
    stations_file: str
    stations: list[GroundStation]
    network_stations_file: str | None = None
    network_stations: list[GroundStation] | None = None
    network_sizes: list[int] | None = None
    link_rate: float | None = None
    conjunction: ConjunctionSettings | None = None
    resolved: dict = field(default_factory=dict)
    input_hashes: dict[str, str] = field(default_factory=dict)


def fmt_fraction(value: float) -> str:
    return f"{value:.6g}"


def fmt_seconds(value: float) -> str:
    return f"{value:.3f}"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _run_schema() -> dict:
    return json.loads((DATA_DIR / "run_config.schema.json").read_text(encoding="utf-8"))


def load_run_config(
    path: str | Path,
    duration_s: float | None = None,
    step_s: float | None = None,
    min_elev_deg: float | None = None,
) -> RunConfig:
    """Read and validate a run config; CLI overrides are applied before validation."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    try:
        jsonschema.validate(document, _run_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {where}: {exc.message}") from None

    base = path.parent
    hashes: dict[str, str] = {}

    def resolve(ref: str) -> Path:
        try:
            resolved = resolve_reference(ref, base)
        except FileNotFoundError as exc:
            raise ConfigError(str(exc)) from None
        hashes[ref] = _sha256(resolved)
        return resolved

    m = document["mission"]
    mission_doc = {
        "epoch": m["epoch"],
        "duration_s": duration_s if duration_s is not None else m.get("duration_s", 86400.0),
        "sample_step_s": step_s if step_s is not None else m.get("sample_step_s", 10.0),
        "refine_tolerance_s": m.get("refine_tolerance_s", 0.01),
        "j2": m.get("j2", True),
    }
    try:
        mission = MissionConfig(
            Timestamp.from_iso(mission_doc["epoch"]),
            float(mission_doc["duration_s"]),
            float(mission_doc["sample_step_s"]),
            float(mission_doc["refine_tolerance_s"]),
            bool(mission_doc["j2"]),
        )
    except ValueError as exc:
        raise ConfigError(f"mission: {exc}") from None

    def stations_from(ref: str) -> list[GroundStation]:
        try:
            stations = load_stations(resolve(ref).read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ConfigError(f"{ref}: {exc}") from None
        if min_elev_deg is not None:
            try:
                stations = [s.with_mask(min_elev_deg) for s in stations]
            except ValueError as exc:
                raise ConfigError(f"--min-elev-deg: {exc}") from None
        if not stations:
            raise ConfigError(f"{ref}: no stations defined")
        return stations

    stations = stations_from(document["stations_file"])
    network_ref = document.get("network_stations_file")
    network = stations_from(network_ref) if network_ref else None
    sizes = document.get("network_sizes")
    if sizes is not None and network is not None and max(sizes) > len(network):
        raise ConfigError(f"network_sizes exceed the {len(network)} stations in {network_ref}")

    loaded = []
    for ref in document["constellations"]:
        spec_path = resolve(ref)
        try:
            spec = load_spec(spec_path)
            if spec.tle_source is not None:
                hashes[f"{ref}#tle_source"] = _sha256(Path(spec.tle_source))
            sats = build_constellation(spec, mission.epoch)
        except (ValueError, OSError, jsonschema.ValidationError) as exc:
            message = getattr(exc, "message", None) or str(exc)
            raise ConfigError(f"{ref}: {message}") from None
        if not sats:
            raise ConfigError(f"{ref}: constellation has no satellites")
        loaded.append(LoadedConstellation(ref, spec, sats))
    names = [c.spec.name for c in loaded]
    if len(set(names)) != len(names):
        raise ConfigError("constellation names must be unique")

    conj = document.get("conjunction")
    conjunction = None
    if conj is not None:
        conjunction = ConjunctionSettings(
            conj["threshold_km"], conj.get("coarse_step_s", DEFAULT_COARSE_STEP)
        )

    resolved = {
        "mission": mission_doc,
        "constellations": list(document["constellations"]),
        "stations_file": document["stations_file"],
        "network_stations_file": network_ref,
        "network_sizes": sizes,
        "link_rate_bps": document.get("link_rate_bps"),
        "conjunction": None
        if conjunction is None
        else {"threshold_km": conjunction.threshold_km, "coarse_step_s": conjunction.coarse_step_s},
        "min_elev_override_deg": min_elev_deg,
    }
    return RunConfig(
        mission=mission,
        constellations=loaded,
        stations_file=document["stations_file"],
        stations=stations,
        network_stations_file=network_ref,
        network_stations=network,
        network_sizes=sizes,
        link_rate=document.get("link_rate_bps"),
        conjunction=conjunction,
        resolved=resolved,
        input_hashes=dict(sorted(hashes.items())),
    )


# --------------------------------------------------------------------------
# writers


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(out_dir: Path, name: str, text: str, written: dict[str, str]) -> None:
    data = text.encode("utf-8")
    (out_dir / name).write_bytes(data)
    written[name] = hashlib.sha256(data).hexdigest()


def _write_manifest(out_dir: Path, command: str, config: RunConfig, written: dict[str, str]) -> None:
    snapshots = [
        {"constellation": c.spec.name, "retrieved": c.spec.tle_retrieved}
        for c in config.constellations
        if c.spec.tle_source is not None
    ]
    manifest = {
        "tool": "constellation-access",
        "version": __version__,
        "command": command,
        "kernel_backend": kernels.active_backend().name,
        "config": config.resolved,
        "inputs": config.input_hashes,
        "tle_snapshots": snapshots,
        "outputs": dict(sorted(written.items())),
    }
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out_dir / f"{command}_manifest.json").write_text(text, encoding="utf-8")


def access_rows(metrics: AccessMetrics) -> list[str]:
    return [
        metrics.station_name,
        metrics.constellation_name,
        str(metrics.total_satellites),
        fmt_fraction(metrics.accessible_ratio),
        fmt_seconds(metrics.mean_access_time_ta),
        fmt_fraction(metrics.gamma),
    ]


def station_constellation_metrics(
    station: GroundStation, loaded: LoadedConstellation, mission: MissionConfig
) -> tuple[AccessMetrics, list[AccessMetrics]]:
    """Table row for one pair plus per-shell rows (empty unless the spec averages shells)."""
    spec, sats = loaded.spec, loaded.satellites
    windows = constellation_windows(station, sats, mission)
    if not spec.average_shells:
        return constellation_metrics(windows, len(sats), mission, spec.name, station.name), []
    shell_rows = []
    for index in range(len(spec.shells)):
        members = [s.id for s in sats if s.shell == index]
        shell_rows.append(
            constellation_metrics(
                {sid: windows[sid] for sid in members}, len(members), mission, spec.name, station.name
            )
        )
    return average_metrics(shell_rows, spec.name), shell_rows


def _summary(rows: list[AccessMetrics], config: RunConfig) -> str:
    lines = [
        f"Access analysis over {config.mission.duration:.0f} s starting {config.mission.epoch.isoformat()}",
        "",
        f"{'station':<16} {'constellation':<20} {'sats':>6} {'accessible':>11} {'T_a (s)':>10} {'gamma':>9}",
    ]
    for r in rows:
        lines.append(
            f"{r.station_name:<16} {r.constellation_name:<20} {r.total_satellites:>6d} "
            f"{100 * r.accessible_ratio:>10.3f}% {r.mean_access_time_ta:>10.3f} {100 * r.gamma:>8.3f}%"
        )
    if config.link_rate is not None:
        lines += [
            "",
            f"Data-volume bound T_a * r at r = {config.link_rate:.6g} bit/s "
            "(1 Gb = 1e9 bits, 1 Tb = 1e12 bits):",
        ]
        for r in rows:
            bits = data_volume_bound(r.mean_access_time_ta, config.link_rate)
            lines.append(
                f"{r.station_name:<16} {r.constellation_name:<20} {bits:.6g} bits ({bits / 1e12:.4f} Tb)"
            )
    return "\n".join(lines) + "\n"


def run_access_analysis(config: RunConfig, out_dir: Path) -> list[AccessMetrics]:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[AccessMetrics] = []
    shell_rows: list[tuple[int, AccessMetrics]] = []
    for station in config.stations:
        for loaded in config.constellations:
            log.info("access: %s x %s", station.name, loaded.spec.name)
            row, shells = station_constellation_metrics(station, loaded, config.mission)
            rows.append(row)
            shell_rows.extend(enumerate(shells))
    written: dict[str, str] = {}
    _write(out_dir, "access_table.csv", _csv_text(ACCESS_COLUMNS, [access_rows(r) for r in rows]), written)
    if shell_rows:
        table = [access_rows(r)[:2] + [str(i)] + access_rows(r)[2:] for i, r in shell_rows]
        _write(out_dir, "access_table_shells.csv", _csv_text(SHELL_COLUMNS, table), written)
    _write(out_dir, "access_summary.txt", _summary(rows, config), written)
    _write_manifest(out_dir, "access", config, written)
    return rows


def run_network_analysis(config: RunConfig, out_dir: Path) -> list[tuple[str, int, float]]:
    if not config.network_stations:
        raise ConfigError("network analysis needs 'network_stations_file' in the config")
    out_dir.mkdir(parents=True, exist_ok=True)
    stations = config.network_stations
    sizes = config.network_sizes or list(range(1, len(stations) + 1))
    results = []
    for loaded in config.constellations:
        per_station = []
        for station in stations[: max(sizes)]:
            log.info("network: %s x %s", station.name, loaded.spec.name)
            per_station.append(constellation_windows(station, loaded.satellites, config.mission))
        ids = [s.id for s in loaded.satellites]
        for n in sizes:
            ratio = union_access_ratio(per_station[:n], ids, config.mission.duration)
            results.append((loaded.spec.name, n, ratio))
    written: dict[str, str] = {}
    rows = [[name, str(n), fmt_fraction(r)] for name, n, r in results]
    _write(out_dir, "network_ratio.csv", _csv_text(NETWORK_COLUMNS, rows), written)
    _write_manifest(out_dir, "network", config, written)
    return results


def run_conjunction_screen(config: RunConfig, out_dir: Path) -> tuple[list[ConjunctionEvent], list[str]]:
    if config.conjunction is None:
        raise ConfigError("conjunction screening needs a 'conjunction' section in the config")
    out_dir.mkdir(parents=True, exist_ok=True)
    settings = config.conjunction
    events: list[ConjunctionEvent] = []
    summary = []
    for loaded in config.constellations:
        n = len(loaded.satellites)
        found = (
            screen_constellation(
                loaded.satellites, config.mission, settings.threshold_km, settings.coarse_step_s
            )
            if n >= 2
            else []
        )
        events.extend(found)
        summary.append(f"{loaded.spec.name}: {n * (n - 1) // 2} pairs screened, {len(found)} reported")
    events.sort(key=lambda e: (e.miss_distance, e.satellite_a, e.satellite_b))
    rows = [
        [e.satellite_a, e.satellite_b, fmt_seconds(e.time_of_closest_approach), f"{e.miss_distance:.6f}"]
        for e in events
    ]
    written: dict[str, str] = {}
    _write(out_dir, "conjunctions.csv", _csv_text(CONJUNCTION_COLUMNS, rows), written)
    _write_manifest(out_dir, "conjunction", config, written)
    return events, summary

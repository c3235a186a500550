"""Two-line element set parsing, validation and serialisation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import datetime

from .astro import JD_UNIX_EPOCH, WGS84, Constants, OrbitalElements, Timestamp

log = logging.getLogger(__name__)

LINE_LENGTH = 69


class TleFormatError(ValueError):
    """A record failed validation. ``line_number`` is 1-based in the input."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(where + message)


class DecayedOrbitError(ValueError):
    pass


@dataclass(frozen=True)
class TleRecord:
    name: str | None
    catalog_number: int
    classification: str
    international_designator: str
    epoch_year: int  # four-digit
    epoch_day: float  # day of year, 1.0 = Jan 1 00:00 UTC
    mean_motion_dot: float
    mean_motion_ddot: float
    bstar: float
    ephemeris_type: int
    element_set_number: int
    inclination: float  # deg
    raan: float  # deg
    eccentricity: float
    arg_perigee: float  # deg
    mean_anomaly: float  # deg
    mean_motion: float  # rev/day
    revolution_number: int

    @property
    def epoch(self) -> Timestamp:
        return tle_epoch(self.epoch_year, self.epoch_day)


def tle_epoch(year: int, day_of_year: float) -> Timestamp:
    whole = math.floor(day_of_year)
    jan1 = (datetime(year, 1, 1) - datetime(1970, 1, 1)).days
    return Timestamp(JD_UNIX_EPOCH + jan1 + (whole - 1), (day_of_year - whole) * 86400.0)


def checksum(line: str) -> int:
    """Mod-10 sum over the first 68 columns; digits count face value, '-' counts 1."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def _field(line: str, start: int, stop: int, line_number: int, what: str, cast):
    """Columns are 1-based inclusive, as in the published layout."""
    text = line[start - 1 : stop]
    try:
        return cast(text)
    except ValueError:
        raise TleFormatError(f"bad {what} field {text!r}", line_number) from None


def _implied_decimal(text: str) -> float:
    # " 12345-3" -> 0.12345e-3 ; also accepts "-11606-4" and "+00000+0"
    text = text.strip()
    if not text:
        return 0.0
    sign = "-" if text[0] == "-" else ""
    if text[0] in "+-":
        text = text[1:]
    mantissa, exponent = text[:-2], text[-2:]
    if not mantissa.isdigit() or exponent[0] not in "+-" or not exponent[1].isdigit():
        raise ValueError(text)
    return float(f"{sign}0.{mantissa}e{exponent}")


def _ndot(text: str) -> float:
    return float(text.replace(" ", "") or "0")


def _check_line(line: str, expected: str, line_number: int) -> None:
    if len(line) != LINE_LENGTH:
        raise TleFormatError(f"expected {LINE_LENGTH} columns, found {len(line)}", line_number)
    if line[0] != expected or line[1] != " ":
        raise TleFormatError(f"line should start with '{expected} '", line_number)
    last = line[68]
    if not last.isdigit() or int(last) != checksum(line):
        raise TleFormatError(
            f"checksum mismatch (computed {checksum(line)}, found {last!r})", line_number
        )


def _eccentricity(text: str) -> float:
    if not text.isdigit():
        raise ValueError(text)
    return float("0." + text)


def _optional_int(text: str) -> int:
    return int(text) if text.strip() else 0


def parse_tle_lines(
    line1: str, line2: str, name: str | None = None, line_numbers: tuple[int, int] = (1, 2)
) -> TleRecord:
    n1, n2 = line_numbers
    _check_line(line1, "1", n1)
    _check_line(line2, "2", n2)
    cat1 = _field(line1, 3, 7, n1, "catalog number", int)
    cat2 = _field(line2, 3, 7, n2, "catalog number", int)
    if cat1 != cat2:
        raise TleFormatError(f"catalog numbers disagree ({cat1} vs {cat2})", n2)

    yy = _field(line1, 19, 20, n1, "epoch year", int)
    mean_motion = _field(line2, 53, 63, n2, "mean motion", float)
    if mean_motion <= 0:
        raise TleFormatError("mean motion must be positive", n2)

    return TleRecord(
        name=name,
        catalog_number=cat1,
        classification=line1[7],
        international_designator=line1[9:17].rstrip(),
        epoch_year=yy + (2000 if yy < 57 else 1900),
        epoch_day=_field(line1, 21, 32, n1, "epoch day", float),
        mean_motion_dot=_field(line1, 34, 43, n1, "mean motion derivative", _ndot),
        mean_motion_ddot=_field(line1, 45, 52, n1, "mean motion second derivative", _implied_decimal),
        bstar=_field(line1, 54, 61, n1, "B*", _implied_decimal),
        ephemeris_type=_field(line1, 63, 63, n1, "ephemeris type", _optional_int),
        element_set_number=_field(line1, 65, 68, n1, "element set number", _optional_int),
        inclination=_field(line2, 9, 16, n2, "inclination", float),
        raan=_field(line2, 18, 25, n2, "RAAN", float),
        eccentricity=_field(line2, 27, 33, n2, "eccentricity", _eccentricity),
        arg_perigee=_field(line2, 35, 42, n2, "argument of perigee", float),
        mean_anomaly=_field(line2, 44, 51, n2, "mean anomaly", float),
        mean_motion=mean_motion,
        revolution_number=_field(line2, 64, 68, n2, "revolution number", _optional_int),
    )


def parse_tle_lenient(content: str) -> tuple[list[TleRecord], list[TleFormatError]]:
    """Parse every well-formed record, collecting one error per rejected record."""
    lines = [(i + 1, raw.rstrip()) for i, raw in enumerate(content.splitlines())]
    lines = [(n, text) for n, text in lines if text]
    records: list[TleRecord] = []
    errors: list[TleFormatError] = []
    pos = 0
    while pos < len(lines):
        number, text = lines[pos]
        if text.startswith("2 "):
            errors.append(TleFormatError("line 2 without a preceding line 1", number))
            pos += 1
            continue
        name = None
        if not text.startswith("1 "):
            name = text[2:].strip() if text.startswith("0 ") else text.strip()
            pos += 1
            if pos >= len(lines) or not lines[pos][1].startswith("1 "):
                errors.append(TleFormatError("name line not followed by line 1", number))
                continue
        n1, line1 = lines[pos]
        if pos + 1 >= len(lines) or not lines[pos + 1][1].startswith("2 "):
            errors.append(TleFormatError("line 1 not followed by line 2", n1))
            pos += 1
            continue
        n2, line2 = lines[pos + 1]
        pos += 2
        try:
            records.append(parse_tle_lines(line1, line2, name, (n1, n2)))
        except TleFormatError as exc:
            errors.append(exc)
    return records, errors


def parse_tle_file(content: str, strict: bool = True) -> list[TleRecord]:
    """Parse 2-line or named 3-line element sets.

    In strict mode the first bad record raises :class:`TleFormatError`.
    Otherwise bad records are skipped and logged; use
    :func:`parse_tle_lenient` to get the errors back.
    """
    records, errors = parse_tle_lenient(content)
    if errors:
        if strict:
            raise errors[0]
        for err in errors:
            log.warning("skipping TLE record: %s", err)
    return records


def tle_to_elements(record: TleRecord, constants: Constants = WGS84) -> OrbitalElements:
    n = record.mean_motion * 2.0 * math.pi / 86400.0
    a = (constants.mu / (n * n)) ** (1.0 / 3.0)
    if a <= constants.earth_equatorial_radius:
        raise DecayedOrbitError(
            f"catalog {record.catalog_number}: semi-major axis {a:.1f} km is below the Earth's surface"
        )
    return OrbitalElements(
        semi_major_axis=a,
        eccentricity=record.eccentricity,
        inclination=math.radians(record.inclination),
        raan=math.radians(record.raan),
        arg_perigee=math.radians(record.arg_perigee),
        mean_anomaly_at_epoch=math.radians(record.mean_anomaly),
        epoch=record.epoch,
        constants=constants,
    )


# --------------------------------------------------------------------------
# serialisation


def _format_implied(value: float) -> str:
    if value == 0.0:
        return " 00000-0"
    sign = "-" if value < 0 else " "
    mantissa, exponent = f"{abs(value):.4e}".split("e")
    digits = mantissa.replace(".", "")
    exp = int(exponent) + 1
    if not -9 <= exp <= 9:
        raise ValueError(f"{value} cannot be written in implied-exponent form")
    return f"{sign}{digits}{'-' if exp < 0 else '+'}{abs(exp)}"


def _format_ndot(value: float) -> str:
    text = f"{abs(value):.8f}"
    if not text.startswith("0."):
        raise ValueError(f"mean motion derivative {value} out of range")
    return ("-" if value < 0 else " ") + text[1:]


def _with_checksum(body: str) -> str:
    body = body.ljust(68)
    return body + str(checksum(body))


def format_tle(record: TleRecord) -> str:
    """Fixed-width text for ``record`` (name line included when present)."""
    line1 = _with_checksum(
        f"1 {record.catalog_number:05d}{record.classification} "
        f"{record.international_designator:<8} "
        f"{record.epoch_year % 100:02d}{record.epoch_day:012.8f} "
        f"{_format_ndot(record.mean_motion_dot)} "
        f"{_format_implied(record.mean_motion_ddot)} "
        f"{_format_implied(record.bstar)} "
        f"{record.ephemeris_type:1d} "
        f"{record.element_set_number:4d}"
    )
    ecc = round(record.eccentricity * 1e7)
    line2 = _with_checksum(
        f"2 {record.catalog_number:05d} "
        f"{record.inclination:8.4f} "
        f"{record.raan:8.4f} "
        f"{ecc:07d} "
        f"{record.arg_perigee:8.4f} "
        f"{record.mean_anomaly:8.4f} "
        f"{record.mean_motion:11.8f}"
        f"{record.revolution_number:5d}"
    )
    lines = [line1, line2]
    if record.name:
        lines.insert(0, record.name[:24])
    return "\n".join(lines) + "\n"

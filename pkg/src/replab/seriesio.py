"""Series CSV persistence with a fixed, bit-exact schema.

The header and the float formatting are part of the external contract:
identical runs must produce byte-identical files so downstream plotting
and regression diffs stay trivial.  Floats are written with ``repr``
(shortest round-trip form); the cap flag is written as 0/1.
"""

from __future__ import annotations

from .evolution import TimeSeriesRecord

SERIES_HEADER = "step,t,dt,mass,energy,S,cap_active,max_u,h1_dist,l2_dist,phi_sup"
_COLUMNS = SERIES_HEADER.split(",")


class SeriesFormatError(ValueError):
    """The series file does not follow the CSV schema."""


def format_record(rec: TimeSeriesRecord) -> str:
    return ",".join([
        str(rec.step),
        repr(rec.t),
        repr(rec.dt),
        repr(rec.mass),
        repr(rec.energy),
        repr(rec.S),
        "1" if rec.cap_active else "0",
        repr(rec.max_u),
        repr(rec.h1_dist),
        repr(rec.l2_dist),
        repr(rec.phi_sup),
    ])


def write_series(path, records: list[TimeSeriesRecord]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(SERIES_HEADER + "\n")
        for rec in records:
            fh.write(format_record(rec) + "\n")


def read_series(path) -> list[TimeSeriesRecord]:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SERIES_HEADER:
        raise SeriesFormatError(
            f"bad or missing header; expected exactly '{SERIES_HEADER}'")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(_COLUMNS):
            raise SeriesFormatError(
                f"line {lineno}: expected {len(_COLUMNS)} columns, "
                f"got {len(parts)}")
        try:
            rec = TimeSeriesRecord(
                step=int(parts[0]),
                t=float(parts[1]),
                dt=float(parts[2]),
                mass=float(parts[3]),
                energy=float(parts[4]),
                S=float(parts[5]),
                cap_active=bool(int(parts[6])),
                max_u=float(parts[7]),
                h1_dist=float(parts[8]),
                l2_dist=float(parts[9]),
                phi_sup=float(parts[10]),
            )
        except ValueError as exc:
            raise SeriesFormatError(f"line {lineno}: {exc}") from exc
        records.append(rec)
    if not records:
        raise SeriesFormatError("series contains no data rows")
    return records

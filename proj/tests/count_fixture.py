#!/usr/bin/env python3
"""Independently counts the triple-size formula operands for a CDO CSV.

Prints: stations, station_feature_pairs, records, elevations, triples
where triples = sum(4 or 5 per station) + 2*pairs + 6*records.
"""
import csv
import sys

FEATURE_BY_COLUMN = {
    "PRCP": "precipitation",
    "TAVG": "temperature",
    "TMAX": "temperature",
    "TMIN": "temperature",
    "AWND": "wind_speed",
}


def main(path):
    stations = set()
    with_elevation = set()
    pairs = set()
    records = 0
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            sid = row["STATION"].strip()
            stations.add(sid)
            if row.get("ELEVATION", "").strip():
                with_elevation.add(sid)
            for column, feature in FEATURE_BY_COLUMN.items():
                if row.get(column, "").strip():
                    records += 1
                    pairs.add((sid, feature))
    triples = (
        sum(5 if s in with_elevation else 4 for s in stations)
        + 2 * len(pairs)
        + 6 * records
    )
    print(f"stations={len(stations)}")
    print(f"station_feature_pairs={len(pairs)}")
    print(f"records={records}")
    print(f"stations_with_elevation={len(with_elevation)}")
    print(f"triples={triples}")


if __name__ == "__main__":
    main(sys.argv[1])

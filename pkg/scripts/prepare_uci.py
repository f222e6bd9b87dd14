#!/usr/bin/env python3
"""Convert raw UCI benchmark downloads into the CSV layout the test suite and
CLI expect: numeric attribute columns followed by one label column, with a
header row.

Expected source files (standard names as distributed by the UCI repository):

    breast-cancer-wisconsin.data   Breast Cancer Wisconsin (Original)
    heart.dat                      Statlog Heart
    ionosphere.data                Ionosphere
    parkinsons.data                Parkinsons
    sonar.all-data                 Connectionist Bench (Sonar)

Usage:
    python3 scripts/prepare_uci.py --src /path/to/raw --out data/uci
"""

import argparse
import csv
import sys
from pathlib import Path


def write_rows(out_path: Path, header: list, rows: list) -> None:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {out_path} ({len(rows)} records, {len(header) - 1} attributes)")


def convert_bcw(src: Path, out: Path) -> None:
    """Drop the sample-id column and the 16 records with missing values."""
    rows = []
    with open(src / "breast-cancer-wisconsin.data", newline="") as fh:
        for rec in csv.reader(fh):
            if not rec:
                continue
            if "?" in rec:
                continue
            label = {"2": "benign", "4": "malignant"}[rec[-1]]
            rows.append(rec[1:-1] + [label])
    header = [f"a{i}" for i in range(1, 10)] + ["class"]
    write_rows(out / "bcw.csv", header, rows)


def convert_heart(src: Path, out: Path) -> None:
    rows = []
    with open(src / "heart.dat") as fh:
        for line in fh:
            rec = line.split()
            if not rec:
                continue
            label = {"1": "absence", "2": "presence"}[rec[-1]]
            rows.append(rec[:-1] + [label])
    header = [f"a{i}" for i in range(1, 14)] + ["class"]
    write_rows(out / "heart.csv", header, rows)


def convert_ionosphere(src: Path, out: Path) -> None:
    rows = []
    with open(src / "ionosphere.data", newline="") as fh:
        for rec in csv.reader(fh):
            if not rec:
                continue
            label = {"g": "good", "b": "bad"}[rec[-1]]
            rows.append(rec[:-1] + [label])
    header = [f"a{i}" for i in range(1, 35)] + ["class"]
    write_rows(out / "ionosphere.csv", header, rows)


def convert_parkinsons(src: Path, out: Path) -> None:
    """Drop the name column and move the status column to the end."""
    with open(src / "parkinsons.data", newline="") as fh:
        reader = csv.reader(fh)
        raw_header = next(reader)
        status_idx = raw_header.index("status")
        keep = [i for i in range(1, len(raw_header)) if i != status_idx]
        rows = []
        for rec in reader:
            if not rec:
                continue
            label = {"0": "healthy", "1": "parkinsons"}[rec[status_idx]]
            rows.append([rec[i] for i in keep] + [label])
    header = [raw_header[i] for i in keep] + ["class"]
    write_rows(out / "parkinsons.csv", header, rows)


def convert_sonar(src: Path, out: Path) -> None:
    rows = []
    with open(src / "sonar.all-data", newline="") as fh:
        for rec in csv.reader(fh):
            if not rec:
                continue
            label = {"R": "rock", "M": "mine"}[rec[-1]]
            rows.append(rec[:-1] + [label])
    header = [f"a{i}" for i in range(1, 61)] + ["class"]
    write_rows(out / "sonar.csv", header, rows)


CONVERTERS = {
    "breast-cancer-wisconsin.data": convert_bcw,
    "heart.dat": convert_heart,
    "ionosphere.data": convert_ionosphere,
    "parkinsons.data": convert_parkinsons,
    "sonar.all-data": convert_sonar,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--src", required=True, help="directory with raw UCI files")
    ap.add_argument("--out", default="data/uci", help="output directory")
    args = ap.parse_args(argv)
    src, out = Path(args.src), Path(args.out)
    converted = 0
    for name, fn in CONVERTERS.items():
        if (src / name).exists():
            fn(src, out)
            converted += 1
        else:
            print(f"skipping {name}: not found in {src}", file=sys.stderr)
    if converted == 0:
        print("error: no recognized source files found", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

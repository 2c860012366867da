#!/usr/bin/env python3
"""Convert KEEL .dat files into the header-row CSV format read by marginforge.

Usage: keel_to_csv.py input.dat output.csv

Attribute names come from the @attribute lines when present; headerless
files get a1..aN with "class" for the last column. The class attribute (the
@outputs entry, or the last attribute) is written as the last column.
"""
import csv
import sys


def convert(src, dst):
    names = []
    outputs = None
    rows = []
    in_data = False
    with open(src, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if not line.startswith("@") and not names:
                in_data = True
            if in_data:
                rows.append([tok.strip() for tok in line.split(",")])
                continue
            low = line.lower()
            if low.startswith("@attribute"):
                names.append(line.split()[1].split("{")[0].split("[")[0])
            elif low.startswith("@outputs") or low.startswith("@output"):
                outputs = line.split()[1]
            elif low.startswith("@data"):
                in_data = True
    if not names:
        width = len(rows[0])
        names = [f"a{i + 1}" for i in range(width - 1)] + ["class"]
    label = names.index(outputs) if outputs in names else len(names) - 1
    order = [i for i in range(len(names)) if i != label] + [label]
    with open(dst, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([names[i] for i in order])
        for r in rows:
            if len(r) != len(names):
                raise SystemExit(f"ragged row in {src}: {r}")
            w.writerow([r[i] for i in order])


if __name__ == "__main__":
    convert(sys.argv[1], sys.argv[2])

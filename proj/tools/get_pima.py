#!/usr/bin/env python3
"""Materialize the Pima Indians Diabetes dataset as a canonical CSV.

Usage: get_pima.py OUTPUT.csv [--from PATH]

Sources, in order:
  1. --from PATH: an existing copy (canonical CSV, headerless CSV, or KEEL
     .dat with Class positive/negative).
  2. The 'imbalanced_databases' python package, which bundles the KEEL copy.
  3. Well-known public mirrors (needs network access).

Whatever the source, the result is validated (768 rows, 8 features,
500 negative / 268 positive) and rewritten with the canonical header:
Pregnancies,Glucose,BloodPressure,SkinThickness,Insulin,BMI,
DiabetesPedigreeFunction,Age,Outcome
"""

import argparse
import os
import sys
import urllib.request

HEADER = [
    "Pregnancies", "Glucose", "BloodPressure", "SkinThickness",
    "Insulin", "BMI", "DiabetesPedigreeFunction", "Age", "Outcome",
]

URLS = [
    "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.csv",
    "https://raw.githubusercontent.com/plotly/datasets/master/diabetes.csv",
]


def parse_rows(text):
    """Accept canonical CSV, headerless CSV, or KEEL .dat; return [(feats, y)]."""
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("@", "#")):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 9:
            raise ValueError(f"expected 9 columns, got {len(cells)}: {line[:60]}")
        if not cells[0].replace(".", "", 1).lstrip("-").isdigit():
            # header line
            continue
        label_cell = cells[8].lower()
        if label_cell in ("positive", "tested_positive"):
            label = 1
        elif label_cell in ("negative", "tested_negative"):
            label = 0
        else:
            label = int(float(cells[8]))
            if label not in (0, 1):
                raise ValueError(f"bad label {cells[8]!r}")
        feats = [float(c) for c in cells[:8]]
        rows.append((feats, label))
    return rows


def from_package():
    import imbalanced_databases as imbd  # noqa: deferred import

    bundle = imbd.load_pima()
    data = bundle["data"]
    target = bundle["target"]
    return [([float(v) for v in data[i]], int(target[i])) for i in range(len(target))]


def from_url(url):
    with urllib.request.urlopen(url, timeout=15) as resp:
        return parse_rows(resp.read().decode("utf-8"))


def validate(rows):
    if len(rows) != 768:
        raise ValueError(f"expected 768 rows, got {len(rows)}")
    n_pos = sum(y for _, y in rows)
    if n_pos != 268 or len(rows) - n_pos != 500:
        raise ValueError(f"expected 500 negative / 268 positive, got "
                         f"{len(rows) - n_pos}/{n_pos}")
    for feats, _ in rows:
        if len(feats) != 8 or any(v != v or v in (float("inf"), float("-inf")) for v in feats):
            raise ValueError("non-finite or misshapen feature row")


def fmt(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_csv(rows, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(",".join(HEADER) + "\n")
        for feats, y in rows:
            f.write(",".join(fmt(v) for v in feats) + f",{y}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("output")
    ap.add_argument("--from", dest="source", default=None,
                    help="local file to convert instead of downloading")
    args = ap.parse_args()

    attempts = []
    rows = None

    if args.source:
        try:
            with open(args.source, encoding="utf-8") as f:
                rows = parse_rows(f.read())
        except Exception as e:  # noqa: keep trying other sources
            attempts.append(f"--from {args.source}: {e}")

    if rows is None:
        try:
            rows = from_package()
        except Exception as e:
            attempts.append(f"imbalanced_databases: {e}")

    if rows is None:
        for url in URLS:
            try:
                rows = from_url(url)
                break
            except Exception as e:
                attempts.append(f"{url}: {e}")

    if rows is None:
        print("could not obtain the dataset from any source:", file=sys.stderr)
        for a in attempts:
            print(f"  - {a}", file=sys.stderr)
        return 1

    validate(rows)
    write_csv(rows, args.output)
    print(f"wrote {args.output} (768 rows, 500 negative / 268 positive)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

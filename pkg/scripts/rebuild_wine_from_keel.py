"""Rebuild the UCI red-wine-quality CSV from the KEEL binarized subsets.

The KEEL repository redistributes the red-wine data as several two-class
problems. ``winequality-red-4`` keeps all 1599 rows in the original UCI
order (label: quality 4 vs rest); the other subsets split the remaining
quality levels, so matching feature rows as multisets recovers the
integer ``quality`` column.

Usage::

    pip download --no-deps imbalanced-databases==0.1.1 -d /tmp/imbdb
    python scripts/rebuild_wine_from_keel.py /tmp/imbdb/imbalanced_databases-0.1.1-py3-none-any.whl out.csv
"""
from __future__ import annotations

import sys
import zipfile
from collections import Counter

NAMES = [
    "fixed acidity", "volatile acidity", "citric acid", "residual sugar",
    "chlorides", "free sulfur dioxide", "total sulfur dioxide", "density",
    "pH", "sulphates", "alcohol", "quality",
]


def _read(zf, name):
    rows = []
    text = zf.read(f"imbalanced_databases/data/{name}/{name}.dat").decode()
    for line in text.splitlines():
        if line.startswith("@") or not line.strip():
            continue
        *x, label = line.strip().split(",")
        rows.append((tuple(v.strip() for v in x), label.strip()))
    return rows


def rebuild(wheel, out):
    zf = zipfile.ZipFile(wheel)

    def bag(name, label):
        return Counter(x for x, c in _read(zf, name) if c == label)

    pools = {
        3: bag("winequality-red-3_vs_5", "positive"),
        5: bag("winequality-red-3_vs_5", "negative"),
        6: bag("winequality-red-8_vs_6", "negative"),
        8: bag("winequality-red-8_vs_6", "positive"),
    }
    pools[7] = bag("winequality-red-8_vs_6-7", "negative") - pools[6]

    records = []
    for x, label in _read(zf, "winequality-red-4"):
        if label == "positive":
            records.append((x, 4))
            continue
        quality = next(q for q, pool in pools.items() if pool[x] > 0)
        pools[quality][x] -= 1
        records.append((x, quality))
    if any(sum(pool.values()) for pool in pools.values()):
        raise RuntimeError("unmatched rows left over; KEEL files inconsistent")

    with open(out, "w") as fh:
        fh.write(";".join(f'"{n}"' for n in NAMES) + "\n")
        for x, q in records:
            fh.write(";".join(x) + f";{q}\n")
    return len(records)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    print(rebuild(sys.argv[1], sys.argv[2]), "rows written")

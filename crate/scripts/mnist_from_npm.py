#!/usr/bin/env python3
"""Build IDX files from the digit tables shipped in the npm `mnist` package.

The package stores pixels as floats in [0, 1] rounded to three decimals,
grouped by digit class. Images are written in round-robin class order
(0, 1, ..., 9, 0, 1, ...) so any prefix of the file is class balanced.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/mnist_from_npm.py package/src/digits data --count 2000
"""
import argparse
import json
import struct
from pathlib import Path

SIDE = 28


def load(digits_dir):
    tables = []
    for d in range(10):
        raw = json.loads((digits_dir / f"{d}.json").read_text())["data"]
        n = len(raw) // (SIDE * SIDE)
        tables.append([raw[k * SIDE * SIDE:(k + 1) * SIDE * SIDE] for k in range(n)])
    return tables


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=Path)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--count", type=int, default=2000)
    args = ap.parse_args()

    tables = load(args.digits_dir)
    images, labels = [], []
    k = 0
    while len(images) < args.count:
        for d in range(10):
            if k < len(tables[d]) and len(images) < args.count:
                images.append(bytes(min(255, max(0, round(v * 255))) for v in tables[d][k]))
                labels.append(d)
        k += 1

    args.out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"mnist-npm-{len(images)}"
    with open(args.out_dir / f"{stem}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), SIDE, SIDE))
        for img in images:
            f.write(img)
    with open(args.out_dir / f"{stem}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


if __name__ == "__main__":
    main()

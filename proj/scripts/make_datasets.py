#!/usr/bin/env python3
"""Regenerates the bundled CSV domains under data/.

wine.csv        the 178x12 wine cultivar table (cultivar 1 vs rest)
iono_synth.csv  a synthetic 351x33 stand-in shaped like the ionosphere domain:
                dense linear signal spread over many features, so any small
                feature subset carries only part of it

Outputs are committed; rerunning reproduces them byte for byte.
"""

import os

import numpy as np
from sklearn.datasets import load_wine

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, os.pardir, "data")


def fmt(v: float) -> str:
    return format(float(v), ".6g")


def write_wine() -> None:
    wine = load_wine()
    names = [n.replace(" ", "_") for n in wine.feature_names]
    keep = [k for k, n in enumerate(names) if n != "ash"]  # 12-feature variant
    names = [names[k] for k in keep]
    rows = wine.data[:, keep]
    labels = ["pos" if t == 1 else "neg" for t in wine.target]
    path = os.path.join(DATA, "wine.csv")
    with open(path, "w") as out:
        out.write(",".join(names + ["target"]) + "\n")
        for row, label in zip(rows, labels):
            out.write(",".join(fmt(v) for v in row) + f",{label}\n")
    print(f"wrote {path}: {rows.shape[0]} rows, {rows.shape[1]} features")


def write_iono_synth(m: int = 351, d: int = 33, seed: int = 20240351) -> None:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((m, d))
    # a few near-binary columns make natural signature candidates
    for k in range(3):
        x[:, d - 1 - k] = (x[:, d - 1 - k] > 0).astype(float)

    weights = rng.uniform(0.4, 1.0, size=d) * rng.choice([-1.0, 1.0], size=d)
    weights[d - 3 :] *= 0.5  # signature candidates stay weakly informative
    score = x @ weights / np.sqrt(d)
    noise = rng.standard_normal(m) * 0.30
    labels = np.where(score + noise > 0, "pos", "neg")

    path = os.path.join(DATA, "iono_synth.csv")
    with open(path, "w") as out:
        out.write(",".join([f"f{k:02d}" for k in range(d)] + ["target"]) + "\n")
        for row, label in zip(x, labels):
            out.write(",".join(fmt(v) for v in row) + f",{label}\n")
    pos = int((labels == "pos").sum())
    print(f"wrote {path}: {m} rows, {d} features, {pos} positive")


if __name__ == "__main__":
    os.makedirs(DATA, exist_ok=True)
    write_wine()
    write_iono_synth()

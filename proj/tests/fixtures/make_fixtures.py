"""Regenerates the synthetic fixture tables in this directory.

The outputs are checked in; rerunning this script reproduces them exactly.
"""

import csv
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def write(name, header, rows):
    with open(os.path.join(HERE, name), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = round(float(v), 6)
    return str(int(v)) if v.is_integer() else repr(v)


def dye_data(rng):
    # Stand-in for the 8,802-object dye table: numeric descriptors and a
    # log-scale extinction coefficient that is mostly linear in them.
    n, names = 8802, ["MolWt", "LogP", "TPSA", "HBD", "HBA", "RotBonds", "Rings", "Conjugation"]
    x = np.column_stack([
        rng.normal(450, 80, n),
        rng.normal(3.0, 1.2, n),
        rng.normal(90, 25, n),
        rng.integers(0, 5, n),
        rng.integers(1, 10, n),
        rng.integers(0, 12, n),
        rng.integers(1, 7, n),
        rng.uniform(0, 1, n),
    ])
    w = np.array([0.004, 0.15, -0.006, 0.05, 0.03, -0.02, 0.35, 1.8])
    eps = 7.5 + x @ w + rng.normal(0, 0.25, n)
    write("DyeData.csv", names + ["epsilon"], [list(r) + [e] for r, e in zip(x, eps)])
    t = x[:12] * rng.uniform(0.95, 1.05, (12, len(names)))
    t[:, 3:7] = np.round(t[:, 3:7])
    write("TestData.csv", ["Tag"] + names, [[f"D{i + 1:03d}"] + list(r) for i, r in enumerate(t)])


def high_extinction():
    rows = [("T001", 250000), ("T002", 120500), ("T003", 98000), ("T004", 310000),
            ("T005", 75000), ("T006", 150000), ("T007", 88000), ("T008", 205000)]
    write("High_Extinction.csv", ["Tag", "ShouldBe"], rows)


def needs_wrangling(rng):
    # Solvent polarity was recorded with '?' for unknown entries, so the column
    # loads as categorical and cannot be used as a feature without INSPECT.
    n = 60
    x1 = rng.normal(0, 1, n)
    pol = rng.uniform(0, 1, n)
    y = 2 * x1 + 3 * pol + rng.normal(0, 0.1, n)
    rows = []
    for i in range(n):
        p = "?" if i % 7 == 3 else pol[i]
        rows.append([x1[i], p, y[i]])
    write("Solvents.csv", ["x1", "Polarity", "y"], rows)


def blobs(rng):
    centers = np.array([[0.0, 0.0], [6.0, 1.0], [2.0, 7.0]])
    rows = []
    for c in range(3):
        pts = centers[c] + rng.normal(0, 0.8, (40, 2))
        rows += [list(p) for p in pts]
    write("Blobs.csv", ["u", "v"], rows)


def flowers(rng):
    # Three well-separated classes over two measurements.
    rows = []
    for label, (a, b) in {"setosa": (1.5, 0.3), "versicolor": (4.3, 1.3), "virginica": (5.6, 2.1)}.items():
        for _ in range(30):
            rows.append([a + rng.normal(0, 0.25), b + rng.normal(0, 0.12), label])
    order = rng.permutation(len(rows))
    write("Flowers.csv", ["PetalLength", "PetalWidth", "Species"], [rows[i] for i in order])


def kmeans_1d(rng):
    # Small 1-D instances for exhaustive 2-partition checks.
    os.makedirs(os.path.join(HERE, "kmeans1d"), exist_ok=True)
    sizes = [4, 5, 6, 7, 8, 9, 10, 11, 12, 12]
    for i, n in enumerate(sizes):
        if i % 3 == 0:
            xs = np.concatenate([rng.normal(0, 1, n // 2), rng.normal(5, 1, n - n // 2)])
        elif i % 3 == 1:
            xs = rng.uniform(0, 10, n)
        else:
            xs = rng.exponential(2.0, n)
        with open(os.path.join(HERE, "kmeans1d", f"instance{i:02d}.csv"), "w", newline="") as f:
            f.write("x\n")
            for v in xs:
                f.write(fmt(v) + "\n")


def main():
    rng = np.random.default_rng(20240917)
    dye_data(rng)
    high_extinction()
    needs_wrangling(rng)
    blobs(rng)
    flowers(rng)
    kmeans_1d(rng)


if __name__ == "__main__":
    main()

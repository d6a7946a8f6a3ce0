#!/usr/bin/env python3
"""Regenerate the synthetic benchmark fixtures in this directory.

The UCI originals are not redistributed here; each fixture is generated to
match the published size and class balance of the dataset it stands in for,
with a comparable amount of class structure so that benchmark numbers land
in the same range. Generation is fully seeded: running this script always
reproduces the committed files byte for byte.
"""

import numpy as np

OUT = {
    "haberman": "haberman.csv",
    "echocardiogram": "echocardiogram.csv",
    "transfusion": "transfusion.csv",
    "separable": "separable_toy.csv",
}


def make_haberman(rng):
    # 306 patients x (age, year of operation, positive axillary nodes),
    # class 1 = survived 5+ years (225), class 2 = died within 5 years (81).
    m = 306
    age = np.clip(np.round(rng.normal(52.5, 10.8, m)), 30, 83).astype(int)
    year = rng.integers(58, 70, m)
    zero = rng.random(m) < 0.45
    nodes = np.where(zero, 0, np.exp(rng.normal(1.35, 1.05, m))).astype(int)
    nodes = np.clip(nodes, 0, 52)
    score = 0.085 * nodes + 0.016 * (age - 52) + rng.normal(0.0, 1.12, m)
    order = np.argsort(-score)
    label = np.ones(m, dtype=int)
    label[order[:81]] = 2
    rows = np.column_stack([age, year, nodes, label])
    return rows, None


def make_echocardiogram(rng):
    # 132 patients x 12 clinical measurements, binary outcome 0/1 (89 vs 43).
    m, n = 132, 12
    n_pos = 43
    y = np.zeros(m, dtype=int)
    y[:n_pos] = 1
    rng.shuffle(y)
    # Four informative directions with a solid but imperfect shift, the
    # rest pure noise; columns rescaled to uneven clinical-looking ranges.
    shift = np.zeros(n)
    shift[:4] = [2.4, 2.0, 1.6, 1.2]
    x = rng.normal(0.0, 1.0, (m, n))
    x[y == 1, :4] += shift[:4]
    # a little label noise keeps the task honest
    flip = rng.choice(m, 4, replace=False)
    y[flip] = 1 - y[flip]
    scales = np.array([12.0, 0.09, 8.0, 1.4, 2.2, 0.5, 25.0, 3.0, 1.0, 0.25, 6.0, 2.0])
    offsets = np.array([62.0, 0.22, 30.0, 4.7, 12.0, 2.0, 140.0, 10.0, 1.0, 0.75, 20.0, 5.0])
    x = x * scales + offsets
    rows = np.column_stack([np.round(x, 3), y])
    return rows, None


def make_transfusion(rng):
    # 748 donors x (recency, frequency, monetary, time), label 0/1 (570/178).
    m = 748
    freq = np.clip(np.round(np.exp(rng.normal(1.6, 0.8, m))), 1, 50).astype(int)
    recency = np.clip(np.round(np.exp(rng.normal(1.9, 0.9, m))), 0, 74).astype(int)
    time = np.clip(freq * 3 + np.round(rng.normal(20, 12, m)), 2, 98).astype(int)
    monetary = freq * 250
    score = -0.09 * recency + 0.05 * freq + rng.normal(0.0, 1.0, m)
    order = np.argsort(-score)
    label = np.zeros(m, dtype=int)
    label[order[:178]] = 1
    rows = np.column_stack([recency, freq, monetary, time, label])
    header = "Recency,Frequency,Monetary,Time,Donated"
    return rows, header


def make_separable(rng):
    # Tiny linearly separable 2-D set with literal +1/-1 labels.
    m = 20
    a = rng.normal(0.0, 0.6, (m, 2)) + [2.5, 2.5]
    b = rng.normal(0.0, 0.6, (m, 2)) + [-2.5, -2.5]
    x = np.vstack([a, b])
    y = np.array([1] * m + [-1] * m)
    rows = np.column_stack([np.round(x, 4), y])
    return rows, "x1,x2,label"


def write_csv(path, rows, header, int_cols):
    with open(path, "w") as f:
        if header:
            f.write(header + "\n")
        for row in rows:
            cells = []
            for j, v in enumerate(row):
                if j in int_cols or j == len(row) - 1:
                    cells.append(str(int(v)))
                else:
                    cells.append(format(v, "g"))
            f.write(",".join(cells) + "\n")


def main():
    rng = np.random.default_rng(20240717)
    rows, header = make_haberman(rng)
    write_csv(OUT["haberman"], rows, header, {0, 1, 2})
    rows, header = make_echocardiogram(rng)
    write_csv(OUT["echocardiogram"], rows, header, set())
    rows, header = make_transfusion(rng)
    write_csv(OUT["transfusion"], rows, header, {0, 1, 2, 3})
    rows, header = make_separable(rng)
    write_csv(OUT["separable"], rows, header, set())
    print("fixtures written")


if __name__ == "__main__":
    main()

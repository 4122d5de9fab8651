"""Regenerate the surrogate benchmark datasets under datasets/.

These CSVs are seeded synthetic stand-ins for two well-known small
imbalanced benchmarks (KEEL's abalone9-18 and yeast6), which cannot be
redistributed or downloaded here. Each surrogate matches the original's
row count, feature count, minority size and imbalance ratio, and its
class overlap was calibrated so that the Repeater + logistic-regression
baseline lands near the F1 commonly reported for the real dataset. Scores
on these files characterize the harness, not the original data.

Run from the repository root: python3 tools/make_fixtures.py
"""

from __future__ import annotations

import os

import numpy as np

OUT_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "datasets")

# (name, seed, rows, minority, features, main shift, deep fraction, deep shift)
RECIPES = [
    ("abalone9-18", 20260826, 731, 42, 8, 2.80, 0.15, 0.3),
    ("yeast6", 31415, 1484, 35, 10, 4.10, 0.25, 0.2),
]


def make_surrogate(seed: int, n_total: int, n_min: int, f: int,
                   shift: float, deep_frac: float, deep_shift: float):
    """Correlated features driven by one latent factor.

    The majority sits at the latent origin; most of the minority sits
    `shift` latent units away, while a `deep_frac` sub-population overlaps
    the majority almost completely (the hard-to-classify borderline mass).
    """
    rng = np.random.default_rng(seed)
    n_maj = n_total - n_min
    loadings = rng.uniform(0.5, 1.0, size=f)
    loadings[f - 3:] = 0.15  # weakly informative trailing features

    def sample(n, mu, sd):
        t = rng.normal(mu, sd, size=n)
        return t[:, None] * loadings[None, :] + rng.normal(0, 0.45, size=(n, f))

    n_deep = int(round(deep_frac * n_min))
    features = np.vstack(
        [
            sample(n_maj, 0.0, 1.0),
            sample(n_min - n_deep, shift, 0.55),
            sample(n_deep, deep_shift, 0.8),
        ]
    )
    labels = np.array([0] * n_maj + [1] * n_min)
    order = rng.permutation(n_total)
    return features[order], labels[order]


def write_csv(path: str, features: np.ndarray, labels: np.ndarray) -> None:
    f = features.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"v{i + 1}" for i in range(f)) + ",label\n")
        for row, label in zip(features, labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{label}\n")


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, seed, n_total, n_min, f, shift, deep_frac, deep_shift in RECIPES:
        features, labels = make_surrogate(seed, n_total, n_min, f, shift, deep_frac, deep_shift)
        path = os.path.join(OUT_DIR, f"{name}.csv")
        write_csv(path, features, labels)
        print(f"wrote {path}: {n_total} rows, {f} features, {n_min} minority")


if __name__ == "__main__":
    main()

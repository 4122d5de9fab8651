"""Comparison oversamplers: Repeater, a small vanilla GAN, two-point convex
interpolation, and an adapter for pre-generated synthetic CSV files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .data import DataError, ScaleInfo, compute_alpha, scale, unscale


def repeater_sample(minority: np.ndarray, n_synthetic: int) -> np.ndarray:
    """Sequential cyclic copies of minority rows until n_synthetic are emitted."""
    if len(minority) == 0:
        raise DataError("repeater needs a non-empty minority class")
    if n_synthetic < 0:
        raise DataError("n_synthetic must be >= 0")
    idx = np.arange(n_synthetic) % len(minority)
    return minority[idx].copy()


def interpolation_sample(minority: np.ndarray, k: int, n_synthetic: int,
                         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic rows on segments between minority points and their neighbors.

    Each row is x + u * (x_nn - x) with u ~ U[0, 1] and x_nn one of x's k
    nearest minority neighbors (self excluded). Returns (samples, pairs)
    where pairs[i] = (index of x, index of x_nn) for auditability.
    """
    if len(minority) < 2:
        raise DataError("interpolation needs at least two minority rows")
    if k < 1:
        raise DataError("k must be >= 1")
    k = min(k, len(minority) - 1)
    d2 = ((minority[:, None, :] - minority[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    neighbor_lists = np.argsort(d2, axis=1, kind="stable")[:, :k]

    samples = np.empty((n_synthetic, minority.shape[1]))
    pairs = np.empty((n_synthetic, 2), dtype=int)
    for i in range(n_synthetic):
        a = i % len(minority)
        b = int(neighbor_lists[a][rng.integers(k)])
        u = rng.uniform()
        samples[i] = minority[a] + u * (minority[b] - minority[a])
        pairs[i] = (a, b)
    return samples, pairs


@dataclass
class GanConfig:
    """Layer sizing and training settings for the vanilla GAN baseline.

    With f features: noise size 16f; generator hidden layers 32f, 4f, 2f
    (ReLU) with a softsign output of width f; discriminator hidden layers
    40f, 20f, 10f (ReLU) with a sigmoid output. Unstated training knobs
    default to Adam 1e-3, batch min(32, |minority|), uniform(-1, 1) noise,
    one discriminator step per generator step.
    """

    n_features: int
    epochs: int = 300
    seed: int = 0
    batch_size: int | None = None
    lr: float = 1e-3

    @property
    def noise_size(self) -> int:
        return 16 * self.n_features


class Gan:
    """Minority-only GAN with alpha pre-scaling so softsign covers the range."""

    def __init__(self, cfg: GanConfig) -> None:
        self.cfg = cfg
        f = cfg.n_features
        nu = cfg.noise_size
        self.generator = nn.dense_network(
            [nu, 2 * nu, 4 * f, 2 * f, f],
            ["relu", "relu", "relu", "softsign"],
            seed=cfg.seed,
        )
        self.discriminator = nn.dense_network(
            [f, 40 * f, 20 * f, 10 * f, 1],
            ["relu", "relu", "relu", "sigmoid"],
            seed=cfg.seed + 1,
        )
        self.alpha: ScaleInfo | None = None
        self.loss_history: list[tuple[float, float]] = []

    def train(self, minority: np.ndarray) -> "Gan":
        if len(minority) < 2:
            raise DataError("GAN training needs at least two minority rows")
        self.alpha = compute_alpha(minority)
        scaled = scale(minority, self.alpha)
        rng = np.random.default_rng(self.cfg.seed)
        batch = self.cfg.batch_size or min(32, len(scaled))
        self.loss_history = []

        for _ in range(self.cfg.epochs):
            order = rng.permutation(len(scaled))
            for start in range(0, len(scaled), batch):
                real = scaled[order[start:start + batch]]
                m = len(real)
                noise = rng.uniform(-1.0, 1.0, size=(m, self.cfg.noise_size))
                fake = self.generator.forward(noise)

                # discriminator step: real -> 1, fake -> 0
                d_in = np.vstack([real, fake])
                d_target = np.vstack([np.ones((m, 1)), np.zeros((m, 1))])
                d_pred = self.discriminator.forward(d_in)
                d_loss = self.discriminator.backward("bce", d_pred, d_target)
                self.discriminator.step(self.cfg.lr)

                # generator step: make fakes look real through a frozen D
                noise = rng.uniform(-1.0, 1.0, size=(m, self.cfg.noise_size))
                fake = self.generator.forward(noise)
                g_pred = self.discriminator.forward(fake)
                g_loss = nn.loss_value("bce", g_pred, np.ones((m, 1)))
                grad = nn.loss_grad("bce", g_pred, np.ones((m, 1)))
                d_input_grad = self.discriminator.backward_from(grad)
                self.discriminator.zero_grad()
                self.generator.backward_from(d_input_grad)
                self.generator.step(self.cfg.lr)

                self.loss_history.append((d_loss, g_loss))
        return self

    def generate(self, n_synthetic: int) -> np.ndarray:
        if self.alpha is None:
            raise DataError("generate before train")
        if n_synthetic == 0:
            return np.empty((0, self.cfg.n_features))
        rng = np.random.default_rng(self.cfg.seed + 2)
        noise = rng.uniform(-1.0, 1.0, size=(n_synthetic, self.cfg.noise_size))
        return unscale(self.generator.forward(noise), self.alpha)


def load_synthetic_csv(path, n_features: int) -> np.ndarray:
    """Read pre-generated synthetic minority rows (no label column)."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")

    def parse(line, lineno):
        cells = line.split(",")
        if len(cells) != n_features:
            raise DataError(f"{path}:{lineno}: expected {n_features} columns, got {len(cells)}")
        try:
            return [float(c) for c in cells]
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric cell") from None

    try:
        rows = [parse(lines[0], 1)]
    except DataError:
        rows = []  # first line is a header
    rows.extend(parse(line, i) for i, line in enumerate(lines[1:], start=2))
    if not rows:
        raise DataError(f"{path}: no synthetic rows")
    return np.array(rows, dtype=np.float64)

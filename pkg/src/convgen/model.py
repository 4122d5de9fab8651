"""The convex-coefficient generator/discriminator oversampler.

The generator maps a shuffled minority neighborhood batch (neb rows) to a
nonnegative coefficient matrix K (neb x gen) whose columns sum to 1; the
synthetic batch is K^T times the neighborhood, so every synthetic row lies
in the neighborhood's convex hull by construction. The discriminator (a
small softmax MLP) learns to separate those synthetic rows from majority
batches, and the two are trained cooperatively: several discriminator-only
passes per epoch, then one combined pass that updates the generator
through the frozen discriminator with an MSE objective on the labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .data import DataError, Dataset
from .neighborhood import knn_minority, majority_neighborhoods
from .rng import derive_seed

SIMPLEX_TOL = 1e-5
LEARNING_RATE = 1e-3
DISC_HIDDEN = (250, 125, 75)


class TrainingError(RuntimeError):
    """Raised when training goes numerically wrong, with location context."""


@dataclass(frozen=True)
class ConvGeNConfig:
    """Model settings; `neb="min"` means the whole minority class.

    gen is always equal to neb. k_prime is the row count the convolution
    reduces a neighborhood to; None means ceil(neb / 2).
    """

    neb: int | str = "min"
    disc_train_count: int = 5
    neb_epochs: int = 10
    maj_proximal: bool = False
    k_prime: int | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.neb, str) and self.neb != "min":
            raise DataError(f'neb must be an integer or "min", got {self.neb!r}')
        if isinstance(self.neb, int) and self.neb < 2:
            raise DataError("neb must be >= 2")
        if self.disc_train_count < 0 or self.neb_epochs < 0:
            raise DataError("counts must be non-negative")

    def resolve_neb(self, minority_count: int) -> int:
        if self.neb == "min":
            return minority_count
        return min(self.neb, minority_count)

    @staticmethod
    def preset(name: str, seed: int = 0) -> "ConvGeNConfig":
        """The four named settings: (5|min, maj|prox)."""
        table = {
            "5,maj": (5, False),
            "min,maj": ("min", False),
            "5,prox": (5, True),
            "min,prox": ("min", True),
        }
        if name not in table:
            raise DataError(f"unknown preset {name!r}; choose from {sorted(table)}")
        neb, prox = table[name]
        return ConvGeNConfig(neb=neb, maj_proximal=prox, seed=seed)


@dataclass(frozen=True)
class SyntheticBatch:
    """Generated rows plus the provenance needed to reconstruct them."""

    samples: np.ndarray              # (n_rows, f)
    source_neighborhood: np.ndarray  # (neb,) row ids into the training dataset
    coefficients: np.ndarray         # (neb, n_rows) simplex columns

    def reconstruction_error(self, neighborhood_rows: np.ndarray) -> float:
        """Max abs deviation between stored samples and K^T x N."""
        rebuilt = self.coefficients.T @ neighborhood_rows
        return float(np.max(np.abs(rebuilt - self.samples))) if self.samples.size else 0.0


def check_simplex(k: np.ndarray, tol: float = SIMPLEX_TOL) -> None:
    if np.any(k < 0.0):
        raise TrainingError(f"negative coefficient {k.min():.3e} in K")
    sums = k.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > tol):
        worst = sums[np.argmax(np.abs(sums - 1.0))]
        raise TrainingError(f"coefficient column sums to {worst!r}, outside tolerance")


class Generator:
    """conv1d reduction -> dense -> ReLU -> column normalization -> K."""

    def __init__(self, neb: int, n_features: int, k_prime: int, seed: int) -> None:
        if not 1 <= k_prime < neb:
            raise DataError(f"k_prime must satisfy 1 <= k_prime < neb, got {k_prime}/{neb}")
        self.neb = neb
        self.gen = neb
        self.n_features = n_features
        self.k_prime = k_prime
        rng = np.random.default_rng(seed)
        self.net = nn.Network(
            [
                nn.Conv1D(neb, k_prime, n_features, "identity", rng),
                nn.Flatten(),
                nn.Dense(k_prime * n_features, neb * self.gen, "identity", rng),
            ],
            seed=seed,
        )
        self._logits = None
        self._k = None
        self._sums = None

    def forward(self, neighborhood: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Returns (K, C) with C = K^T x neighborhood."""
        if neighborhood.shape != (self.neb, self.n_features):
            raise DataError(
                f"neighborhood must be {(self.neb, self.n_features)}, got {neighborhood.shape}"
            )
        logits = self.net.forward(neighborhood).reshape(self.neb, self.gen)
        pos = np.maximum(logits, 0.0)
        sums = pos.sum(axis=0)
        k = np.where(sums > 0.0, pos / np.where(sums > 0.0, sums, 1.0), 1.0 / self.neb)
        self._logits = logits
        self._k = k
        self._sums = sums
        check_simplex(k)
        return k, k.T @ neighborhood

    def backward_from_dk(self, dk: np.ndarray) -> None:
        """Backpropagate a gradient w.r.t. K through normalization and the net."""
        if self._logits is None:
            raise nn.NNError("generator backward before forward")
        k, sums = self._k, self._sums
        # column normalization: K = r / s  =>  dr = (dK - <dK, K>) / s
        inner = (dk * k).sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            dr = np.where(sums > 0.0, (dk - inner) / np.where(sums > 0.0, sums, 1.0), 0.0)
        dlogits = dr * (self._logits > 0.0)
        self.net.backward_from(dlogits.reshape(1, -1))

    def step(self, lr: float = LEARNING_RATE) -> None:
        self.net.step(lr)


def _build_discriminator(n_features: int, seed: int) -> nn.Network:
    sizes = [n_features, *DISC_HIDDEN, 2]
    return nn.dense_network(sizes, ["relu", "relu", "relu", "softmax"], seed=seed)


class ConvGeNModel:
    """Trainable oversampler; construct, then fit(dataset), then generate()."""

    def __init__(self, config: ConvGeNConfig) -> None:
        self.config = config
        self.dataset: Dataset | None = None
        self.generator: Generator | None = None
        self.discriminator: nn.Network | None = None
        self.epoch_losses: list[dict] = []
        self._index = None
        self._maj_neigh = None
        self._labels = None
        self._rng = None
        self._neb = None

    # -- setup -----------------------------------------------------------

    def _setup(self, dataset: Dataset) -> None:
        cfg = self.config
        self.dataset = dataset
        self._neb = cfg.resolve_neb(dataset.minority_count)
        if self._neb < 2:
            raise DataError("ConvGeN needs at least 2 minority samples")
        k_prime = cfg.k_prime if cfg.k_prime is not None else max(1, (self._neb + 1) // 2)
        k_prime = min(k_prime, self._neb - 1)
        self.generator = Generator(
            self._neb, dataset.n_features, k_prime,
            seed=derive_seed(cfg.seed, "generator"),
        )
        self.discriminator = _build_discriminator(
            dataset.n_features, seed=derive_seed(cfg.seed, "discriminator")
        )
        self._index = knn_minority(dataset, self._neb)
        self._maj_neigh = (
            majority_neighborhoods(dataset, self._neb) if cfg.maj_proximal else None
        )
        gen = self._neb
        self._labels = np.vstack(
            [np.tile([1.0, 0.0], (gen, 1)), np.tile([0.0, 1.0], (gen, 1))]
        )
        self._rng = np.random.default_rng(derive_seed(cfg.seed, "train"))

    # -- batch assembly --------------------------------------------------

    def _minority_batch(self, x_pos: int, rng) -> tuple[np.ndarray, np.ndarray]:
        """Shuffled neighborhood of minority point x_pos: (row ids, rows)."""
        positions = self._index.neighbors[x_pos].copy()
        rng.shuffle(positions)
        row_ids = self._index.minority_indices[positions]
        return row_ids, self.dataset.features[row_ids]

    def _majority_batch(self, x_pos: int, rng) -> tuple[np.ndarray, np.ndarray]:
        if self.dataset.majority_count == 0:
            raise DataError("majority class is empty")
        if self.config.maj_proximal:
            pool = self._maj_neigh[x_pos]
        else:
            pool = self.dataset.majority_indices
        replace = len(pool) < self._neb
        chosen = rng.choice(pool, size=self._neb, replace=replace)
        return chosen, self.dataset.features[chosen]

    # -- training steps --------------------------------------------------

    def discriminator_step(self, x_pos: int):
        """One Algorithm-2 step: build batches, train D once on BCE.

        Returns (concat batch, minority row ids, majority row ids, loss).
        """
        min_ids, min_rows = self._minority_batch(x_pos, self._rng)
        _, conv_samples = self.generator.forward(min_rows)
        maj_ids, maj_rows = self._majority_batch(x_pos, self._rng)
        concat = np.vstack([conv_samples, maj_rows])
        pred = self.discriminator.forward(concat)
        loss = self.discriminator.backward("bce", pred, self._labels)
        self.discriminator.step(LEARNING_RATE)
        return concat, min_ids, maj_ids, loss

    def _generator_step(self, x_pos: int) -> float:
        """Combined pass for one minority point: D trains once, then G
        updates through the frozen D against the MSE objective."""
        _, min_ids, maj_ids, _ = self.discriminator_step(x_pos)
        min_rows = self.dataset.features[min_ids]
        maj_rows = self.dataset.features[maj_ids]
        _, conv_samples = self.generator.forward(min_rows)
        concat = np.vstack([conv_samples, maj_rows])
        pred = self.discriminator.forward(concat)
        loss = nn.loss_value("mse", pred, self._labels)
        grad = nn.loss_grad("mse", pred, self._labels)
        d_input_grad = self.discriminator.backward_from(grad)
        self.discriminator.zero_grad()  # D stays frozen in this step
        dc = d_input_grad[: self._neb]
        self.generator.backward_from_dk(min_rows @ dc.T)
        self.generator.step(LEARNING_RATE)
        return loss

    def fit(self, dataset: Dataset) -> "ConvGeNModel":
        """Run the full cooperative training loop on `dataset`."""
        self._setup(dataset)
        n_min = dataset.minority_count
        self.epoch_losses = []
        for epoch in range(self.config.neb_epochs):
            disc_losses, gen_losses = [], []
            try:
                for _ in range(self.config.disc_train_count):
                    for x_pos in range(n_min):
                        disc_losses.append(self.discriminator_step(x_pos)[3])
                for x_pos in range(n_min):
                    gen_losses.append(self._generator_step(x_pos))
            except (nn.NNError, TrainingError) as exc:
                raise TrainingError(f"epoch {epoch}: {exc}") from exc
            self.epoch_losses.append(
                {
                    "epoch": epoch,
                    "disc_bce": float(np.mean(disc_losses)) if disc_losses else None,
                    "combined_mse": float(np.mean(gen_losses)) if gen_losses else None,
                }
            )
        return self

    # -- generation ------------------------------------------------------

    def _require_fitted(self) -> None:
        if self.generator is None:
            raise DataError("model is not fitted")

    def generate(self, n_synthetic: int) -> list[SyntheticBatch]:
        """Round-robin over minority neighborhoods until n_synthetic rows."""
        self._require_fitted()
        if n_synthetic < 0:
            raise DataError("n_synthetic must be >= 0")
        rng = np.random.default_rng(derive_seed(self.config.seed, "generate"))
        batches: list[SyntheticBatch] = []
        remaining = n_synthetic
        x_pos = 0
        n_min = self.dataset.minority_count
        while remaining > 0:
            min_ids, min_rows = self._minority_batch(x_pos % n_min, rng)
            k, samples = self.generator.forward(min_rows)
            take = min(remaining, len(samples))
            batches.append(
                SyntheticBatch(
                    samples=samples[:take],
                    source_neighborhood=min_ids,
                    coefficients=k[:, :take],
                )
            )
            remaining -= take
            x_pos += 1
        return batches

    def synthetic_rows(self, n_synthetic: int) -> np.ndarray:
        batches = self.generate(n_synthetic)
        if not batches:
            return np.empty((0, self.dataset.n_features))
        return np.vstack([b.samples for b in batches])

    def retrain_doc(self, epochs: int = 10, batch_size: int = 64):
        """Balance the training data and retrain a copy of D as a classifier."""
        self._require_fitted()
        n_syn = self.dataset.majority_count - self.dataset.minority_count
        synthetic = self.synthetic_rows(max(0, n_syn))
        features = np.vstack([self.dataset.features, synthetic])
        minority_flags = np.concatenate(
            [self.dataset.labels == 1, np.ones(len(synthetic), dtype=bool)]
        )
        targets = np.where(minority_flags[:, None], [[1.0, 0.0]], [[0.0, 1.0]])

        doc = self.discriminator.clone()
        doc.reset_optimizer()
        rng = np.random.default_rng(derive_seed(self.config.seed, "doc"))
        for _ in range(epochs):
            order = rng.permutation(len(features))
            for start in range(0, len(features), batch_size):
                sel = order[start:start + batch_size]
                pred = doc.forward(features[sel])
                doc.backward("bce", pred, targets[sel])
                doc.step(LEARNING_RATE)
        from .classifiers import DiscriminatorClassifier

        return DiscriminatorClassifier(doc)

    # -- checkpointing ---------------------------------------------------

    def save(self, path) -> None:
        self._require_fitted()
        payload = {
            "format": "convgen-checkpoint-v1",
            "config": {
                "neb": self.config.neb,
                "disc_train_count": self.config.disc_train_count,
                "neb_epochs": self.config.neb_epochs,
                "maj_proximal": self.config.maj_proximal,
                "k_prime": self.generator.k_prime,
                "seed": self.config.seed,
            },
            "resolved_neb": self._neb,
            "n_features": self.dataset.n_features,
            "generator": _dump_network(self.generator.net),
            "discriminator": _dump_network(self.discriminator),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)

    @staticmethod
    def load(path, dataset: Dataset) -> "ConvGeNModel":
        """Restore weights; `dataset` must be the training data the model saw."""
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "convgen-checkpoint-v1":
            raise DataError(f"{path}: not a recognized checkpoint")
        cfg = payload["config"]
        neb = cfg["neb"]
        model = ConvGeNModel(
            ConvGeNConfig(
                neb=neb if neb == "min" else int(neb),
                disc_train_count=cfg["disc_train_count"],
                neb_epochs=cfg["neb_epochs"],
                maj_proximal=cfg["maj_proximal"],
                k_prime=cfg["k_prime"],
                seed=cfg["seed"],
            )
        )
        model._setup(dataset)
        if model._neb != payload["resolved_neb"] or dataset.n_features != payload["n_features"]:
            raise DataError(f"{path}: checkpoint does not match this dataset")
        _load_network(model.generator.net, payload["generator"])
        _load_network(model.discriminator, payload["discriminator"])
        return model


def _dump_network(net: nn.Network) -> list:
    return [
        [name, p.tolist()]
        for layer in net.layers
        for name, p, _ in layer.params()
    ]


def _load_network(net: nn.Network, dumped: list) -> None:
    params = [(name, p) for layer in net.layers for name, p, _ in layer.params()]
    if len(params) != len(dumped):
        raise DataError("checkpoint parameter count mismatch")
    for (name, p), (saved_name, values) in zip(params, dumped):
        arr = np.array(values, dtype=np.float64)
        if name != saved_name or arr.shape != p.shape:
            raise DataError(f"checkpoint parameter {saved_name!r} has wrong shape")
        p[...] = arr

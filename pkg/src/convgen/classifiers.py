"""Downstream classifiers scored in the benchmark: kNN, logistic regression,
the retrained-discriminator wrapper, and an adapter for out-of-band
predictions.

All classifiers expose fit(features, labels) / predict(features) with
labels in {0, 1}, 1 = minority. Predictions are deterministic; kNN breaks
even-vote ties toward the majority class (label 0).
"""

from __future__ import annotations

import numpy as np

from .data import DataError


def _check_two_classes(labels: np.ndarray) -> None:
    if len(np.unique(labels)) < 2:
        raise DataError("training labels contain a single class")


class KNNClassifier:
    """Exact Euclidean k-nearest-neighbors with uniform majority vote, k = 5."""

    kind = "knn"

    def __init__(self, k: int = 5) -> None:
        self.k = k
        self._x = None
        self._y = None

    def fit(self, features, labels):
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=int)
        _check_two_classes(labels)
        self._x = features
        self._y = labels
        return self

    def predict(self, features) -> np.ndarray:
        if self._x is None:
            raise DataError("predict before fit")
        q = np.asarray(features, dtype=np.float64)
        if q.shape[1] != self._x.shape[1]:
            raise DataError(f"feature width {q.shape[1]} != fitted {self._x.shape[1]}")
        k = min(self.k, len(self._x))
        out = np.empty(len(q), dtype=int)
        for i, row in enumerate(q):
            d2 = ((self._x - row) ** 2).sum(axis=1)
            nearest = np.argsort(d2, kind="stable")[:k]
            votes = int(self._y[nearest].sum())
            # strict majority of minority votes required; ties go to class 0
            out[i] = 1 if 2 * votes > k else 0
        return out


class LogisticRegressionClassifier:
    """Full-batch gradient descent on L2-regularized cross-entropy.

    Fixed, reproducible settings: lr = 0.1, 2000 iterations, L2 = 1e-4,
    early stop once the loss improves by less than 1e-9.
    """

    kind = "logreg"

    def __init__(self, lr: float = 0.1, iterations: int = 2000,
                 l2: float = 1e-4, tol: float = 1e-9) -> None:
        self.lr = lr
        self.iterations = iterations
        self.l2 = l2
        self.tol = tol
        self.weights = None
        self.bias = 0.0
        self.loss_trace: list[float] = []

    @staticmethod
    def _sigmoid(z):
        return 1.0 / (1.0 + np.exp(-z))

    def fit(self, features, labels):
        x = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.float64)
        _check_two_classes(y.astype(int))
        n, f = x.shape
        self.weights = np.zeros(f)
        self.bias = 0.0
        self.loss_trace = []
        prev = np.inf
        for _ in range(self.iterations):
            p = self._sigmoid(x @ self.weights + self.bias)
            eps = 1e-12
            loss = float(
                -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
                + 0.5 * self.l2 * np.dot(self.weights, self.weights)
            )
            self.loss_trace.append(loss)
            if prev - loss < self.tol:
                break
            prev = loss
            err = p - y
            self.weights -= self.lr * (x.T @ err / n + self.l2 * self.weights)
            self.bias -= self.lr * float(err.mean())
        return self

    def predict(self, features) -> np.ndarray:
        if self.weights is None:
            raise DataError("predict before fit")
        x = np.asarray(features, dtype=np.float64)
        if x.shape[1] != len(self.weights):
            raise DataError(f"feature width {x.shape[1]} != fitted {len(self.weights)}")
        p = self._sigmoid(x @ self.weights + self.bias)
        # p == 0.5 exactly (e.g. zero weights) resolves to the majority class
        return (p > 0.5).astype(int)


class DiscriminatorClassifier:
    """Wraps a retrained ConvGeN discriminator as a 2-class predictor."""

    kind = "doc"

    def __init__(self, network) -> None:
        self.network = network

    def fit(self, features, labels):
        # retraining happens in ConvGeNModel.retrain_doc; nothing to do here
        return self

    def predict(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        probs = self.network.forward(x)
        # output node 0 is the minority node
        return (probs[:, 0] > probs[:, 1]).astype(int)


class ExternalPredictions:
    """Scores label files produced by an external tool.

    The file must hold one 0/1 label per line, aligned with the test-fold
    row order the harness exports.
    """

    kind = "external"

    def __init__(self, path) -> None:
        self.path = path

    def fit(self, features, labels):
        return self

    def predict(self, features) -> np.ndarray:
        with open(self.path, encoding="utf-8") as fh:
            labels = [int(line.strip()) for line in fh if line.strip()]
        if len(labels) != len(features):
            raise DataError(
                f"{self.path}: {len(labels)} labels for {len(features)} test rows"
            )
        arr = np.asarray(labels, dtype=int)
        if not np.isin(arr, (0, 1)).all():
            raise DataError(f"{self.path}: labels must be 0/1")
        return arr

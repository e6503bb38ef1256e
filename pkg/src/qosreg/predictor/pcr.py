"""Principal-component regression for QoS prediction.

Features are z-scored, projected onto the top ``k`` principal directions,
and every QoS target is regressed on those latent scores with a tiny
ridge term. ``k`` is picked by 5-fold cross-validation.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ..errors import DegenerateData, EmptyTestSet, TooFewRows, WidthMismatch
from ..qos import FRACTION_PROPERTIES, QoSVector
from .data import FeatureMatrix, split
from .metrics import mae, rmse

DEFAULT_RIDGE = 1e-8
MODEL_FORMAT = "qosreg-pcr/1"


@dataclass(frozen=True)
class RegressionModel:
    feature_names: tuple[str, ...]
    kept: tuple[int, ...]  # indices into feature_names that survived the constant-column drop
    feature_means: np.ndarray
    feature_stds: np.ndarray
    components: np.ndarray  # (k, len(kept)), orthonormal rows
    coefficients: np.ndarray  # (k, n_targets)
    intercepts: np.ndarray  # (n_targets,)
    target_names: tuple[str, ...]
    ridge: float = DEFAULT_RIDGE

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def width(self) -> int:
        return len(self.feature_names)

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float)[:, list(self.kept)] - self.feature_means) / self.feature_stds

    def destandardize(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z) * self.feature_stds + self.feature_means

    def predict_raw(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.width:
            raise WidthMismatch(f"expected {self.width} features, got {X.shape[1]}")
        scores = self.standardize(X) @ self.components.T
        return scores @ self.coefficients + self.intercepts

    def predict_clamped(self, X) -> np.ndarray:
        return clamp(self.predict_raw(X), self.target_names)

    # -- export -------------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "format": MODEL_FORMAT,
            "k": self.k,
            "ridge": self.ridge,
            "feature_names": list(self.feature_names),
            "kept": list(self.kept),
            "target_names": list(self.target_names),
            "feature_means": self.feature_means.tolist(),
            "feature_stds": self.feature_stds.tolist(),
            "components": self.components.tolist(),
            "coefficients": self.coefficients.tolist(),
            "intercepts": self.intercepts.tolist(),
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RegressionModel":
        doc = json.loads(text)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a {MODEL_FORMAT} document")
        k = int(doc["k"])
        n_kept = len(doc["kept"])
        n_targets = len(doc["target_names"])
        return cls(
            feature_names=tuple(doc["feature_names"]),
            kept=tuple(doc["kept"]),
            feature_means=np.array(doc["feature_means"], dtype=float),
            feature_stds=np.array(doc["feature_stds"], dtype=float),
            components=np.array(doc["components"], dtype=float).reshape(k, n_kept),
            coefficients=np.array(doc["coefficients"], dtype=float).reshape(k, n_targets),
            intercepts=np.array(doc["intercepts"], dtype=float),
            target_names=tuple(doc["target_names"]),
            ridge=float(doc["ridge"]),
        )


def clamp(values: np.ndarray, target_names: Sequence[str]) -> np.ndarray:
    """Fractions into [0, 1], everything else to >= 0."""
    out = np.maximum(np.asarray(values, dtype=float), 0.0)
    for j, name in enumerate(target_names):
        if name in FRACTION_PROPERTIES:
            out[..., j] = np.minimum(out[..., j], 1.0)
    return out


def _weighted_moments(X: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    wsum = w.sum()
    mean = (w[:, None] * X).sum(axis=0) / wsum
    var = (w[:, None] * (X - mean) ** 2).sum(axis=0) / wsum
    return mean, np.sqrt(var)


def train(
    data: FeatureMatrix,
    k: int,
    ridge: float = DEFAULT_RIDGE,
    sample_weight: Optional[Sequence[float]] = None,
) -> RegressionModel:
    """Fit the latent-variable regression with ``k`` principal directions.

    ``sample_weight`` treats row i as if it appeared ``w[i]`` times, so a
    fit on duplicated rows equals the weighted fit on unique rows.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    X, Y = data.X, data.Y
    n = X.shape[0]
    if n == 0:
        raise TooFewRows("no training rows")
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)

    mean, std = _weighted_moments(X, w)
    scale = np.maximum(np.abs(mean), 1.0)
    kept = np.flatnonzero(std > 1e-12 * scale)
    if kept.size == 0:
        raise DegenerateData("every feature is constant across the training rows")
    mean, std = mean[kept], std[kept]
    Z = (X[:, kept] - mean) / std

    sw = np.sqrt(w)[:, None]
    _, s, vt = np.linalg.svd(sw * Z, full_matrices=False)
    rank = int((s > s[0] * max(Z.shape) * np.finfo(float).eps).sum())
    if k > rank:
        warnings.warn(f"k={k} exceeds the standardized feature rank {rank}; using k={rank}", stacklevel=2)
        k = rank
    components = vt[:k].copy()
    # Fix the sign so each direction's largest-magnitude loading is positive.
    pivots = np.argmax(np.abs(components), axis=1)
    components *= np.sign(components[np.arange(k), pivots])[:, None]

    T = Z @ components.T
    ybar = (w[:, None] * Y).sum(axis=0) / w.sum()
    gram = T.T @ (w[:, None] * T) + ridge * np.eye(k)
    coefficients = np.linalg.solve(gram, T.T @ (w[:, None] * (Y - ybar)))

    return RegressionModel(
        feature_names=tuple(data.feature_names),
        kept=tuple(int(i) for i in kept),
        feature_means=mean,
        feature_stds=std,
        components=components,
        coefficients=coefficients,
        intercepts=ybar,
        target_names=tuple(data.target_names),
        ridge=ridge,
    )


def _folds(n: int, n_folds: int, seed: int) -> list[np.ndarray]:
    perm = np.random.default_rng(seed).permutation(n)
    return [perm[i::n_folds] for i in range(n_folds)]


def cv_errors(data: FeatureMatrix, k_max: int, n_folds: int = 5, seed: int = 0) -> np.ndarray:
    """Per-fold cross-validated RMSE (mean over targets) for k = 1..k_max; shape (k_max, n_folds)."""
    folds = _folds(len(data), n_folds, seed)
    errors = np.empty((k_max, n_folds))
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(len(data)), test_idx)
        fold_train, fold_test = data.take(train_idx), data.take(test_idx)
        for k in range(1, k_max + 1):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model = train(fold_train, k)
            pred = model.predict_clamped(fold_test.X)
            errors[k - 1, f] = np.mean(
                [rmse(pred[:, j], fold_test.Y[:, j]) for j in range(len(data.target_names))]
            )
    return errors


def choose_latent_count(data: FeatureMatrix, k_max: int, n_folds: int = 5, seed: int = 0) -> int:
    """Smallest k whose mean CV error is statistically tied with the best.

    Two errors tie when the difference is within one standard error of
    the best k's fold errors (plus a 1e-12 relative floor for noiseless
    data).
    """
    if len(data) < 2 * n_folds:
        raise TooFewRows(f"{n_folds}-fold cross-validation needs at least {2 * n_folds} rows")
    mean, std = _weighted_moments(data.X, np.ones(len(data)))
    n_varying = int((std > 1e-12 * np.maximum(np.abs(mean), 1.0)).sum())
    k_max = max(1, min(k_max, n_varying, len(data) - len(data) // n_folds - 1))
    if k_max == 1:
        return 1
    errors = cv_errors(data, k_max, n_folds, seed)
    means = errors.mean(axis=1)
    best = int(np.argmin(means))
    se = errors[best].std(ddof=1) / math.sqrt(n_folds)
    tolerance = se + 1e-12 * (1.0 + float(np.abs(data.Y).mean()))
    return int(np.flatnonzero(means <= means[best] + tolerance)[0]) + 1


def predict(model: RegressionModel, features) -> QoSVector:
    """One service's QoS from a full-width feature vector, or a name->value mapping.

    With a mapping, features the model uses but the mapping lacks are set
    to their training mean.
    """
    if isinstance(features, Mapping):
        row = np.zeros(model.width)
        means = dict(zip(model.kept, model.feature_means))
        for i, name in enumerate(model.feature_names):
            row[i] = float(features[name]) if name in features else means.get(i, 0.0)
    else:
        row = np.asarray(features, dtype=float).ravel()
    values = model.predict_clamped(row[None, :])[0]
    return QoSVector.from_dict(dict(zip(model.target_names, (float(v) for v in values))))


@dataclass
class EvaluationReport:
    target_names: list[str]
    mae: dict[str, float]
    rmse: dict[str, float]
    n: int
    seed: Optional[int] = None
    ratio: Optional[float] = None
    k: Optional[int] = None
    overall_mae: float = 0.0
    overall_rmse: float = 0.0
    predictions: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    observations: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["property", "mae", "rmse", "n", "k", "seed", "ratio"])
        extra = ["" if v is None else v for v in (self.k, self.seed, self.ratio)]
        for name in self.target_names:
            w.writerow([name, repr(self.mae[name]), repr(self.rmse[name]), self.n, *extra])
        w.writerow(["all", repr(self.overall_mae), repr(self.overall_rmse), self.n, *extra])
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [f"{'property':<16}{'MAE':>14}{'RMSE':>14}"]
        for name in self.target_names:
            lines.append(f"{name:<16}{self.mae[name]:>14.6g}{self.rmse[name]:>14.6g}")
        lines.append(f"{'all':<16}{self.overall_mae:>14.6g}{self.overall_rmse:>14.6g}")
        lines.append(f"N={self.n} k={self.k} seed={self.seed} ratio={self.ratio}")
        return "\n".join(lines)


def evaluate(model: RegressionModel, test: FeatureMatrix, seed=None, ratio=None) -> EvaluationReport:
    if len(test) == 0:
        raise EmptyTestSet("test partition is empty")
    pred = model.predict_clamped(test.X)
    obs = test.Y
    names = list(model.target_names)
    return EvaluationReport(
        target_names=names,
        mae={name: mae(pred[:, j], obs[:, j]) for j, name in enumerate(names)},
        rmse={name: rmse(pred[:, j], obs[:, j]) for j, name in enumerate(names)},
        n=len(test),
        seed=seed,
        ratio=ratio,
        k=model.k,
        overall_mae=mae(pred, obs),
        overall_rmse=rmse(pred, obs),
        predictions=pred,
        observations=obs,
    )


def fit_and_evaluate(
    data: FeatureMatrix, ratio: float = 0.8, seed: int = 0, k_max: Optional[int] = None
) -> tuple[RegressionModel, EvaluationReport]:
    """Split, pick k by CV on the training part, fit, and score on the held-out part."""
    train_part, test_part = split(data, ratio, seed)
    k_max = len(data.feature_names) if k_max is None else min(k_max, len(data.feature_names))
    k = choose_latent_count(train_part, k_max, seed=seed)
    model = train(train_part, k)
    return model, evaluate(model, test_part, seed=seed, ratio=ratio)

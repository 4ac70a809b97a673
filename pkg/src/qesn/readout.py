"""Linear readout trained by least squares, and the NMSE score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateNormalizationError

PINV_RCOND = 1e-10
NMSE_NORMALIZATIONS = ("target", "predicted")


@dataclass(frozen=True, eq=False)
class ReadoutWeights:
    weights: np.ndarray
    intercept: float | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)) or (self.intercept is not None and not np.isfinite(self.intercept)):
            raise ValueError("readout weights must be finite")
        object.__setattr__(self, "weights", w)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, d: dict) -> "ReadoutWeights":
        return cls(np.array(d["weights"], dtype=float), d.get("intercept"))


def train_readout(X: np.ndarray, Y: np.ndarray, intercept: bool = False) -> ReadoutWeights:
    """Minimum-norm least-squares weights ``W = pinv(X) Y``.

    Singular values below ``1e-10 * sigma_max`` are truncated, so nearly
    constant reservoir signals give a stable (minimum-norm) solution.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float).reshape(-1)
    if X.shape[0] == 0:
        raise ValueError("cannot train a readout on zero rows")
    if X.shape[0] != Y.shape[0]:
        raise ConfigurationError(f"design matrix has {X.shape[0]} rows but target has {Y.shape[0]} entries")
    if not np.all(np.isfinite(Y)) or not np.all(np.isfinite(X)):
        raise ValueError("design matrix and targets must be finite")
    if intercept:
        X = np.hstack([X, np.ones((X.shape[0], 1))])
    W = np.linalg.pinv(X, rcond=PINV_RCOND) @ Y
    if intercept:
        return ReadoutWeights(W[:-1], float(W[-1]))
    return ReadoutWeights(W)


def predict(X: np.ndarray, weights: ReadoutWeights) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != weights.weights.size:
        raise ConfigurationError(f"design matrix has {X.shape[1]} columns, readout expects {weights.weights.size}")
    y = X @ weights.weights
    if weights.intercept is not None:
        y = y + weights.intercept
    return y


def nmse(y_pred, y_target, normalize_by: str = "target") -> float:
    """Sum of squared errors over the summed squared deviation of a reference series.

    Args:
        y_pred: predicted values.
        y_target: target values.
        normalize_by: ``"target"`` (default) normalizes by the target series'
            deviation from its mean; ``"predicted"`` uses the predicted series.

    Raises:
        DegenerateNormalizationError: the normalizing series is constant.
    """
    y_pred = np.asarray(y_pred, dtype=float).reshape(-1)
    y_target = np.asarray(y_target, dtype=float).reshape(-1)
    if y_pred.shape != y_target.shape:
        raise ConfigurationError(f"length mismatch: {y_pred.size} predictions vs {y_target.size} targets")
    if y_pred.size < 2:
        raise ValueError("nmse needs at least two samples")
    if normalize_by not in NMSE_NORMALIZATIONS:
        raise ConfigurationError(f"normalize_by must be one of {NMSE_NORMALIZATIONS}")
    ref = y_target if normalize_by == "target" else y_pred
    spread = float(np.sum((ref - ref.mean()) ** 2))
    if spread <= 0.0:
        raise DegenerateNormalizationError(f"{normalize_by} series is constant; NMSE undefined")
    return float(np.sum((y_pred - y_target) ** 2) / spread)


@dataclass(frozen=True)
class SplitSpec:
    """Washout / train / test partition of a length-``L`` sequence (in steps)."""

    discard: int
    train_len: int
    test_len: int

    def __post_init__(self):
        if min(self.discard, self.train_len, self.test_len) < 0 or self.train_len == 0 or self.test_len == 0:
            raise ConfigurationError(f"invalid split {self}")

    @property
    def length(self) -> int:
        return self.discard + self.train_len + self.test_len

    def check(self, L: int) -> None:
        if self.length != L:
            raise ConfigurationError(f"split covers {self.length} steps but the sequence has {L}")

    @property
    def train_slice(self) -> slice:
        return slice(self.discard, self.discard + self.train_len)

    @property
    def test_slice(self) -> slice:
        return slice(self.discard + self.train_len, self.length)


SIMULATOR_SPLIT = SplitSpec(discard=10, train_len=35, test_len=15)
HARDWARE_SPLIT = SplitSpec(discard=4, train_len=19, test_len=7)

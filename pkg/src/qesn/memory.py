"""Short-term memory capacity: reconstruct delayed inputs from the reservoir signals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .readout import predict, train_readout
from .reservoir import ReservoirConfig, evolve_ensemble
from .tasks import generate_input

ZERO_VARIANCE = 1e-14


@dataclass(frozen=True)
class MemoryProtocolSpec:
    """Time indices are 1-based: steps ``discard+1 .. train_end`` train the
    readout and ``train_end+1 .. L`` test it."""

    L: int = 60
    discard: int = 14
    train_end: int = 45
    tau_max: int = 8

    def __post_init__(self):
        if not 0 <= self.tau_max < self.discard:
            raise ConfigurationError(f"need 0 <= tau_max < discard, got tau_max={self.tau_max}, discard={self.discard}")
        if not self.discard < self.train_end < self.L:
            raise ConfigurationError(f"need discard < train_end < L, got {self.discard}, {self.train_end}, {self.L}")

    @property
    def train_steps(self) -> np.ndarray:
        return np.arange(self.discard + 1, self.train_end + 1)

    @property
    def test_steps(self) -> np.ndarray:
        return np.arange(self.train_end + 1, self.L + 1)


@dataclass(frozen=True, eq=False)
class MemoryCurve:
    c_values: np.ndarray
    mc: float

    def __post_init__(self):
        c = np.asarray(self.c_values, dtype=float)
        if np.any(c < 0) or np.any(c > 1 + 1e-12):
            raise ValueError("correlation values must lie in [0, 1]")
        object.__setattr__(self, "c_values", c)


def delayed_target(u, tau: int, steps=None) -> np.ndarray:
    """``u(k - tau)`` for each 1-based step ``k`` in ``steps`` (default: all valid k)."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if tau < 0:
        raise ValueError(f"delay must be non-negative, got {tau}")
    steps = np.arange(tau + 1, len(u) + 1) if steps is None else np.asarray(steps, dtype=int)
    if steps.size and (steps.min() - tau < 1 or steps.max() > len(u)):
        raise ValueError(f"delay {tau} reaches outside the input sequence for steps {steps.min()}..{steps.max()}")
    return u[steps - tau - 1]


def correlation_c(y, u_tau) -> float:
    """Squared Pearson correlation; 0 when either series is (numerically) constant."""
    y = np.asarray(y, dtype=float).reshape(-1)
    t = np.asarray(u_tau, dtype=float).reshape(-1)
    if y.size != t.size or y.size < 2:
        raise ValueError("correlation needs two series of equal length >= 2")
    dy, dt = y - y.mean(), t - t.mean()
    var_y, var_t = np.mean(dy * dy), np.mean(dt * dt)
    if var_y < ZERO_VARIANCE or var_t < ZERO_VARIANCE:
        return 0.0
    c = np.mean(dy * dt) ** 2 / (var_y * var_t)
    return float(min(c, 1.0))


def memory_curve(X: np.ndarray, u, spec: MemoryProtocolSpec, intercept: bool = False) -> MemoryCurve:
    """C(tau) for tau = 0..tau_max from one design matrix, retraining the readout per delay."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] != spec.L or len(u) != spec.L:
        raise ConfigurationError(f"protocol expects length {spec.L}")
    train, test = spec.train_steps, spec.test_steps
    cs = []
    for tau in range(spec.tau_max + 1):
        w = train_readout(X[train - 1], delayed_target(u, tau, train), intercept=intercept)
        y = predict(X[test - 1], w)
        cs.append(correlation_c(y, delayed_target(u, tau, test)))
    cs = np.array(cs)
    return MemoryCurve(cs, float(cs.sum()))


def run_mc_protocol(
    config: ReservoirConfig,
    spec: MemoryProtocolSpec,
    rng: np.random.Generator,
    intercept: bool = False,
    return_inputs: bool = False,
):
    """Drive the reservoir once with random input and score every delay."""
    u = generate_input(spec.L, rng)
    X = evolve_ensemble(u, config)
    curve = memory_curve(X, u, spec, intercept=intercept)
    if return_inputs:
        return curve, u
    return curve

"""Benchmark target generators.

* Tasks I/II: ``z(k) = A z(k-1) + u(k) c`` with a quadratic scalar readout
  ``h(z) = d0 + d1.z + d2.(z*z)``; ``A`` dense with sigma_max 0.5 (Task I) or
  95% sparse with sigma_max 0.99 (Task II).
* Task III: planar aircraft sideslip/yaw ODE driven by the rudder
  deflection, sampled once per unit time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigurationError, StepSizeUnderflowError

MATRIX_KINDS = {"dense": 0.5, "sparse95": 0.99}
SPARSE_ZERO_PROB = 0.95
RUDDER_MAPPINGS = ("paper-literal", "range-consistent")


def generate_input(L: int, rng: np.random.Generator) -> np.ndarray:
    """``L`` i.i.d. uniform values in [0, 1)."""
    if L < 1:
        raise ValueError(f"input length must be >= 1, got {L}")
    return rng.uniform(0.0, 1.0, size=L)


def power_iteration_sigma_max(
    A: np.ndarray,
    rng: np.random.Generator | None = None,
    rtol: float = 1e-9,
    max_iter: int = 100_000,
) -> float:
    """Largest singular value of ``A`` by power iteration on ``A^T A``.

    Stops when successive estimates differ by less than ``rtol`` relative.
    """
    A = np.asarray(A, dtype=float)
    rng = rng if rng is not None else np.random.default_rng(0)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        Av = A @ v
        new_sigma = float(np.linalg.norm(Av))
        if new_sigma == 0.0:
            # v landed in the null space; restart from a fresh direction
            v = rng.standard_normal(A.shape[1])
            v /= np.linalg.norm(v)
            continue
        w = A.T @ Av
        v = w / np.linalg.norm(w)
        if abs(new_sigma - sigma) <= rtol * new_sigma:
            # one more Rayleigh evaluation on the updated vector
            return float(np.linalg.norm(A @ v))
        sigma = new_sigma
    raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")


def build_matrix_A(kind: str, n: int, target_sigma_max: float | None, rng: np.random.Generator) -> np.ndarray:
    """Random ``n x n`` matrix rescaled to a prescribed largest singular value."""
    if kind not in MATRIX_KINDS:
        raise ConfigurationError(f"matrix kind must be one of {tuple(MATRIX_KINDS)}, got {kind!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    target = MATRIX_KINDS[kind] if target_sigma_max is None else float(target_sigma_max)
    if target <= 0:
        raise ValueError(f"target sigma_max must be positive, got {target}")
    while True:
        A = rng.uniform(-1.0, 1.0, size=(n, n))
        if kind == "sparse95":
            A[rng.random((n, n)) < SPARSE_ZERO_PROB] = 0.0
        if np.any(A):
            break
    sigma = power_iteration_sigma_max(A, rng)
    return A * (target / sigma)


@dataclass(frozen=True, eq=False)
class LinearMapTask:
    A: np.ndarray
    c: np.ndarray
    d0: float
    d1: np.ndarray
    d2: np.ndarray
    z0: np.ndarray | None = None
    kind: str = "dense"

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.c.shape != (n,) or self.d1.shape != (n,) or self.d2.shape != (n,):
            raise ConfigurationError("inconsistent linear-map task dimensions")
        if self.z0 is None:
            object.__setattr__(self, "z0", np.zeros(n))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def readout(self, z: np.ndarray) -> float:
        return float(self.d0 + self.d1 @ z + self.d2 @ (z * z))


def make_linear_map_task(
    kind: str, n: int, rng: np.random.Generator, target_sigma_max: float | None = None
) -> LinearMapTask:
    """Draw ``A``, ``c`` and all readout coefficients (uniform in [-1, 1])."""
    A = build_matrix_A(kind, n, target_sigma_max, rng)
    c = rng.uniform(-1.0, 1.0, n)
    d0 = float(rng.uniform(-1.0, 1.0))
    d1 = rng.uniform(-1.0, 1.0, n)
    d2 = rng.uniform(-1.0, 1.0, n)
    return LinearMapTask(A, c, d0, d1, d2, kind=kind)


def run_linear_map(task: LinearMapTask, inputs) -> np.ndarray:
    u = np.asarray(inputs, dtype=float).reshape(-1)
    z = np.array(task.z0, dtype=float)
    out = np.empty(len(u))
    for k, uk in enumerate(u):
        z = task.A @ z + uk * task.c
        out[k] = task.readout(z)
    return out


def aircraft_derivative(x1: float, x2: float, u_tilde: float) -> tuple[float, float]:
    """Right-hand side of the sideslip (x1) / yaw (x2) equations."""
    cx = np.cos(x1)
    dx1 = x2 - 0.1 * (5 * x1 - 4 * x1**3 + x1**5) * cx - 0.5 * u_tilde * cx
    dx2 = -65 * x1 + 50 * x1**3 - 15 * x1**5 - x2 - 100 * u_tilde
    return dx1, dx2


def map_input_to_rudder(u: float, mode: str = "paper-literal") -> float:
    """Rudder deflection for input ``u``: ``0.5u - 1`` (paper-literal) or ``u - 0.5``."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"input u must be in [0, 1], got {u}")
    if mode == "paper-literal":
        return 0.5 * u - 1.0
    if mode == "range-consistent":
        return u - 0.5
    raise ConfigurationError(f"rudder mapping must be one of {RUDDER_MAPPINGS}, got {mode!r}")


@dataclass(frozen=True)
class AircraftTask:
    input_mapping: str = "paper-literal"
    initial_state: tuple[float, float] = (0.0, 0.0)
    sample_interval: float = 1.0
    solver_rel_tol: float = 1e-8
    solver_abs_tol: float = 1e-10

    def __post_init__(self):
        if self.input_mapping not in RUDDER_MAPPINGS:
            raise ConfigurationError(f"input_mapping must be one of {RUDDER_MAPPINGS}")
        if self.sample_interval <= 0:
            raise ConfigurationError("sample_interval must be positive")
        object.__setattr__(self, "initial_state", tuple(float(x) for x in self.initial_state))


def _aircraft_rhs(t, x, u_tilde):
    return aircraft_derivative(x[0], x[1], u_tilde)


def integrate_aircraft(task: AircraftTask, inputs, return_states: bool = False):
    """Sample ``x1`` at t = 1..L under zero-order-hold rudder input.

    Each interval ``[k-1, k)`` is integrated separately with a Dormand-Prince
    4(5) pair, so the piecewise-constant input never sits inside a step.
    """
    u = np.asarray(inputs, dtype=float).reshape(-1)
    x = np.array(task.initial_state, dtype=float)
    dt = task.sample_interval
    states = np.empty((len(u), 2))
    for k, uk in enumerate(u):
        u_tilde = map_input_to_rudder(float(uk), task.input_mapping)
        t0, t1 = k * dt, (k + 1) * dt
        sol = solve_ivp(
            _aircraft_rhs,
            (t0, t1),
            x,
            method="RK45",
            args=(u_tilde,),
            rtol=task.solver_rel_tol,
            atol=task.solver_abs_tol,
        )
        if sol.status != 0:
            raise StepSizeUnderflowError(t0, t1, sol.message)
        x = sol.y[:, -1]
        states[k] = x
    if return_states:
        return states[:, 0].copy(), states
    return states[:, 0].copy()

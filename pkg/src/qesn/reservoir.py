"""Reset-rate reservoir: stochastic ensemble evolution and the exact averaged channel.

At each step a reservoir either applies ``U0`` (probability ``(1-eps) u``),
applies ``U1`` (probability ``(1-eps)(1-u)``), or is reset to ``sigma``
(probability ``eps``).  :func:`evolve_ensemble` samples this process over
``N_c`` pure-state circuit copies; :func:`evolve_channel` propagates the
density matrix under the averaged map and serves as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import rng as rngs
from .errors import ConfigurationError
from .quantum import (
    DensityMatrix,
    StateVector,
    UnitaryCircuit,
    apply_circuit,
    z_signs,
)

MEASUREMENT_MODES = ("exact", "shots")


@dataclass(frozen=True, eq=False)
class ReservoirConfig:
    num_qubits: int
    epsilon: float
    u0: UnitaryCircuit
    u1: UnitaryCircuit
    ensemble_size: int = 1024
    measurement_mode: str = "exact"
    shots: int = 4000
    master_seed: int = 0
    reset_state: DensityMatrix | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigurationError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.ensemble_size < 1:
            raise ConfigurationError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if self.measurement_mode not in MEASUREMENT_MODES:
            raise ConfigurationError(f"measurement_mode must be one of {MEASUREMENT_MODES}")
        if self.measurement_mode == "shots" and self.shots < 1:
            raise ConfigurationError(f"shots must be >= 1, got {self.shots}")
        for label, c in (("u0", self.u0), ("u1", self.u1)):
            if c.num_qubits != self.num_qubits:
                raise ConfigurationError(f"{label} acts on {c.num_qubits} qubits, reservoir has {self.num_qubits}")
        if self.reset_state is None:
            object.__setattr__(self, "reset_state", DensityMatrix.zeros(self.num_qubits))
        elif self.reset_state.num_qubits != self.num_qubits:
            raise ConfigurationError("reset_state dimension does not match num_qubits")

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @cached_property
    def u0_matrix(self) -> np.ndarray:
        return self.u0.unitary()

    @cached_property
    def u1_matrix(self) -> np.ndarray:
        return self.u1.unitary()

    @cached_property
    def _reset_decomposition(self) -> tuple[np.ndarray, np.ndarray]:
        lam, vecs = np.linalg.eigh(self.reset_state.entries)
        keep = lam > 1e-12
        lam, vecs = lam[keep], vecs[:, keep].T
        return lam / lam.sum(), vecs

    def reset_is_pure(self) -> bool:
        return len(self._reset_decomposition[0]) == 1


class BranchProbabilities(NamedTuple):
    p0: float
    p1: float
    p_reset: float


def branch_probabilities(u: float, epsilon: float) -> BranchProbabilities:
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"input u must be in [0, 1], got {u}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    keep = 1.0 - epsilon
    return BranchProbabilities(keep * u, keep * (1.0 - u), epsilon)


def _check_inputs(inputs: Sequence[float]) -> np.ndarray:
    u = np.asarray(inputs, dtype=float).reshape(-1)
    if u.size == 0:
        raise ValueError("input sequence is empty")
    if np.any(~np.isfinite(u)) or u.min() < 0.0 or u.max() > 1.0:
        raise ValueError("every input value must lie in [0, 1]")
    return u


def _choose_branch(r: np.ndarray | float, probs: BranchProbabilities):
    """0 -> U0, 1 -> U1, 2 -> reset, for uniform draw(s) ``r`` in [0, 1)."""
    return np.where(r < probs.p0, 0, np.where(r < probs.p0 + probs.p1, 1, 2))


def _reset_amplitudes(config: ReservoirConfig, draws: np.ndarray) -> np.ndarray:
    lam, vecs = config._reset_decomposition
    if len(lam) == 1:
        return np.broadcast_to(vecs[0], (len(draws), config.dim))
    idx = np.minimum(np.searchsorted(np.cumsum(lam), draws, side="right"), len(lam) - 1)
    return vecs[idx]


def step_member(
    state: StateVector,
    u: float,
    config: ReservoirConfig,
    rng: np.random.Generator,
    reset_rng: np.random.Generator | None = None,
) -> StateVector:
    """Advance one circuit copy by one time step.

    Consumes exactly one uniform draw from ``rng``.  ``reset_rng`` is only
    consulted when ``reset_state`` is mixed, to pick the pure component to
    reset into.
    """
    branch = int(_choose_branch(rng.random(), branch_probabilities(u, config.epsilon)))
    if branch == 0:
        return apply_circuit(state, config.u0)
    if branch == 1:
        return apply_circuit(state, config.u1)
    if config.reset_is_pure():
        return StateVector(config.num_qubits, _reset_amplitudes(config, np.zeros(1))[0])
    if reset_rng is None:
        raise ConfigurationError("a mixed reset_state requires reset_rng")
    return StateVector(config.num_qubits, _reset_amplitudes(config, np.array([reset_rng.random()]))[0])


@dataclass
class EnsembleState:
    """``N_c`` circuit copies stored as rows of one amplitude array."""

    amplitudes: np.ndarray
    num_qubits: int
    member_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.member_ids is None:
            self.member_ids = np.arange(self.amplitudes.shape[0])

    @classmethod
    def initial(cls, num_qubits: int, size: int) -> "EnsembleState":
        amps = np.zeros((size, 2**num_qubits), dtype=complex)
        amps[:, 0] = 1.0
        return cls(amps, num_qubits)

    @property
    def members(self) -> list[StateVector]:
        return [StateVector(self.num_qubits, a) for a in self.amplitudes]

    def z_values(self) -> np.ndarray:
        """``(N_c, N)`` per-member <Z_i>."""
        return (np.abs(self.amplitudes) ** 2) @ z_signs(self.num_qubits)


def branch_draws(config: ReservoirConfig, length: int) -> np.ndarray:
    """``(N_c, L)`` uniforms; entry ``[m, k]`` decides member ``m`` at step ``k``."""
    return np.stack(
        [rngs.member_stream(config.master_seed, rngs.BRANCH, m).random(length) for m in range(config.ensemble_size)]
    )


def evolve_ensemble(
    inputs: Sequence[float],
    config: ReservoirConfig,
    *,
    with_stderr: bool = False,
):
    """Monte Carlo design matrix: mean over circuit copies of <Z_i> after each step.

    Args:
        inputs: ``L`` values in [0, 1].
        config: reservoir definition; ``measurement_mode`` selects exact
            per-copy expectations or ``shots``-sample estimates.
        with_stderr: also return the ``(L, N)`` standard error of each entry
            (sample std over copies divided by sqrt(N_c)).

    Returns:
        ``(L, N)`` array, or ``(matrix, stderr)`` when ``with_stderr``.
    """
    u = _check_inputs(inputs)
    L, n_c, n = len(u), config.ensemble_size, config.num_qubits
    draws = branch_draws(config, L)
    mixed_reset = not config.reset_is_pure()
    if mixed_reset:
        reset_streams = [rngs.member_stream(config.master_seed, rngs.RESET, m) for m in range(n_c)]
    if config.measurement_mode == "shots":
        shot_streams = [rngs.member_stream(config.master_seed, rngs.SHOTS, m) for m in range(n_c)]

    ens = EnsembleState.initial(n, n_c)
    u0t, u1t = config.u0_matrix.T, config.u1_matrix.T
    signs = z_signs(n)
    out = np.empty((L, n))
    err = np.empty((L, n))
    for k in range(L):
        branch = _choose_branch(draws[:, k], branch_probabilities(u[k], config.epsilon))
        amps = ens.amplitudes
        sel0, sel1, selr = branch == 0, branch == 1, branch == 2
        if sel0.any():
            amps[sel0] = amps[sel0] @ u0t
        if sel1.any():
            amps[sel1] = amps[sel1] @ u1t
        if selr.any():
            idx = np.flatnonzero(selr)
            r = np.array([reset_streams[m].random() for m in idx]) if mixed_reset else np.zeros(len(idx))
            amps[selr] = _reset_amplitudes(config, r)

        probs = np.abs(amps) ** 2
        if config.measurement_mode == "exact":
            z = probs @ signs
        else:
            probs = probs / probs.sum(axis=1, keepdims=True)
            counts = np.stack([shot_streams[m].multinomial(config.shots, probs[m]) for m in range(n_c)])
            z = counts @ signs / config.shots
        out[k] = z.mean(axis=0)
        err[k] = z.std(axis=0, ddof=1) / np.sqrt(n_c) if n_c > 1 else np.inf
    if with_stderr:
        return out, err
    return out


def _channel_step_array(rho: np.ndarray, u: float, config: ReservoirConfig) -> np.ndarray:
    p = branch_probabilities(u, config.epsilon)
    u0, u1 = config.u0_matrix, config.u1_matrix
    out = p.p_reset * config.reset_state.entries
    if p.p0:
        out = out + p.p0 * (u0 @ rho @ u0.conj().T)
    if p.p1:
        out = out + p.p1 * (u1 @ rho @ u1.conj().T)
    return out


def channel_step(rho: DensityMatrix, u: float, config: ReservoirConfig) -> DensityMatrix:
    """One step of the averaged map ``p0 U0 rho U0^+ + p1 U1 rho U1^+ + eps sigma``."""
    if rho.num_qubits != config.num_qubits:
        raise ConfigurationError(f"state has {rho.num_qubits} qubits, reservoir has {config.num_qubits}")
    return DensityMatrix(config.num_qubits, _channel_step_array(rho.entries, u, config))


def evolve_channel(
    inputs: Sequence[float],
    config: ReservoirConfig,
    initial: DensityMatrix | None = None,
    *,
    return_states: bool = False,
):
    """Exact expected design matrix, ``Tr[Z_i rho(k)]`` for every step.

    ``initial`` defaults to |0...0><0...0|.  With ``return_states`` the list of
    ``rho(k)`` arrays is returned as well.
    """
    u = _check_inputs(inputs)
    rho = (initial or DensityMatrix.zeros(config.num_qubits)).entries
    signs = z_signs(config.num_qubits)
    rows = np.empty((len(u), config.num_qubits))
    states = []
    for k, uk in enumerate(u):
        rho = _channel_step_array(rho, float(uk), config)
        rows[k] = np.real(np.diag(rho)) @ signs
        if return_states:
            states.append(rho)
    if return_states:
        return rows, states
    return rows

"""Dense statevector / density-matrix kernel.

Conventions used throughout the package:

* qubit 0 is the leftmost tensor factor, so in a basis index ``b`` qubit 0 is
  the most significant bit;
* ``RX(t) = exp(-i t X / 2)`` and likewise for ``RY`` and ``RZ``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError

MAX_QUBITS = 12

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}

ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = ("CNOT",) + ROTATION_KINDS


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """2x2 matrix of a half-angle single-qubit rotation."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=complex)
    raise ConfigurationError(f"unknown rotation kind {kind!r}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of ``num_qubits`` qubits. Amplitudes are read-only."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.num_qubits:
            raise ConfigurationError(
                f"expected {2**self.num_qubits} amplitudes for {self.num_qubits} qubits, got {amps.size}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def zeros(cls, num_qubits: int) -> "StateVector":
        """The all-zero computational basis state |0...0>."""
        return cls.basis(num_qubits, 0)

    @classmethod
    def basis(cls, num_qubits: int, index: int | str) -> "StateVector":
        if isinstance(index, str):
            index = int(index, 2)
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex], normalize: bool = True) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise ConfigurationError(f"amplitude count {amps.size} is not a power of two")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state of ``num_qubits`` qubits.

    Construction checks unit trace, hermiticity and positivity; pass
    ``validate=False`` to wrap an arbitrary operator (e.g. a difference of states).
    """

    num_qubits: int
    entries: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        dim = 2**self.num_qubits
        rho = np.asarray(self.entries, dtype=complex)
        if rho.shape != (dim, dim):
            raise ConfigurationError(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
        if self.validate:
            tr = np.trace(rho)
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"trace must be 1, got {tr!r}")
            if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
                raise ValueError("density matrix is not Hermitian")
            lam_min = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
            if lam_min < -1e-9:
                raise ValueError(f"density matrix has negative eigenvalue {lam_min!r}")
        object.__setattr__(self, "entries", _frozen(rho))

    @classmethod
    def zeros(cls, num_qubits: int) -> "DensityMatrix":
        rho = np.zeros((2**num_qubits, 2**num_qubits), dtype=complex)
        rho[0, 0] = 1.0
        return cls(num_qubits, rho)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


@dataclass(frozen=True)
class GateOp:
    kind: str
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ConfigurationError(f"unsupported gate kind {self.kind!r}")
        if self.target < 0:
            raise ConfigurationError(f"negative target index {self.target}")
        if self.kind == "CNOT":
            if self.control is None or self.control < 0:
                raise ConfigurationError("CNOT requires a non-negative control index")
            if self.control == self.target:
                raise ConfigurationError(f"CNOT control and target coincide ({self.target})")
            if self.angle is not None:
                raise ConfigurationError("CNOT takes no angle")
        else:
            if self.control is not None:
                raise ConfigurationError(f"{self.kind} takes no control qubit")
            if self.angle is None or not np.isfinite(self.angle):
                raise ConfigurationError(f"{self.kind} requires a finite angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) if self.control is None else (self.control, self.target)

    def inverse(self) -> "GateOp":
        if self.kind == "CNOT":
            return self
        return GateOp(self.kind, self.target, angle=-self.angle)

    def to_line(self) -> str:
        if self.kind == "CNOT":
            return f"CNOT {self.control} {self.target}"
        return f"{self.kind} {self.target} {self.angle!r}"


@dataclass(frozen=True)
class UnitaryCircuit:
    num_qubits: int
    gates: tuple[GateOp, ...] = ()
    name: str = ""

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if max(g.qubits) >= self.num_qubits:
                raise ConfigurationError(
                    f"gate {g.to_line()!r} addresses a qubit outside a {self.num_qubits}-qubit circuit"
                )
        object.__setattr__(self, "gates", gates)

    def inverse(self) -> "UnitaryCircuit":
        return UnitaryCircuit(self.num_qubits, tuple(g.inverse() for g in reversed(self.gates)), self.name + "^-1")

    def to_text(self) -> str:
        return "".join(g.to_line() + "\n" for g in self.gates)

    def unitary(self) -> np.ndarray:
        """Dense ``2^N x 2^N`` matrix of the whole circuit."""
        dim = 2**self.num_qubits
        # Row j of the batch is U|j>, so the batch is U transposed.
        cols = _apply_gates_batch(np.eye(dim, dtype=complex), self.gates, self.num_qubits)
        return cols.T.copy()


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        letters = "".join(self.letters).upper()
        if not letters or set(letters) - set("IXYZ"):
            raise ConfigurationError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, (PAULI_MATRICES[c] for c in self.letters))

    @classmethod
    def single(cls, num_qubits: int, qubit: int, letter: str) -> "PauliString":
        return cls("I" * qubit + letter + "I" * (num_qubits - qubit - 1))


def all_pauli_strings(num_qubits: int) -> list[PauliString]:
    """All 4^N Pauli strings; the all-identity string comes first."""
    return [PauliString("".join(p)) for p in itertools.product("IXYZ", repeat=num_qubits)]


def _apply_1q(batch: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    m = batch.shape[0]
    t = batch.reshape(m, 2**qubit, 2, 2 ** (n - qubit - 1))
    return np.einsum("ab,ibj->iaj", mat, t.reshape(m * 2**qubit, 2, -1)).reshape(m, -1)


def _apply_cnot(batch: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    t = batch.reshape((batch.shape[0],) + (2,) * n).copy()
    sel = [slice(None)] * (n + 1)
    sel[1 + control] = 1
    sub = t[tuple(sel)]
    # dropping the control axis shifts later axes left by one
    axis = target if target < control else target - 1
    t[tuple(sel)] = np.flip(sub, axis=1 + axis)
    return t.reshape(batch.shape[0], -1)


def _apply_gates_batch(batch: np.ndarray, gates: Iterable[GateOp], n: int) -> np.ndarray:
    out = np.asarray(batch, dtype=complex)
    for g in gates:
        if g.kind == "CNOT":
            out = _apply_cnot(out, g.control, g.target, n)
        else:
            out = _apply_1q(out, rotation_matrix(g.kind, g.angle), g.target, n)
    return out


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    if max(gate.qubits) >= state.num_qubits:
        raise ConfigurationError(f"gate {gate.to_line()!r} out of range for {state.num_qubits} qubits")
    out = _apply_gates_batch(state.amplitudes[None, :], [gate], state.num_qubits)
    return StateVector(state.num_qubits, out[0])


def apply_circuit(state: StateVector, circuit: UnitaryCircuit) -> StateVector:
    if circuit.num_qubits != state.num_qubits:
        raise ConfigurationError(
            f"circuit acts on {circuit.num_qubits} qubits but state has {state.num_qubits}"
        )
    out = _apply_gates_batch(state.amplitudes[None, :], circuit.gates, state.num_qubits)
    return StateVector(state.num_qubits, out[0])


def z_signs(num_qubits: int) -> np.ndarray:
    """``(2^N, N)`` table of Z eigenvalues: entry ``[b, i]`` is ``(-1)^{bit i of b}``."""
    idx = np.arange(2**num_qubits)
    bits = (idx[:, None] >> (num_qubits - 1 - np.arange(num_qubits))[None, :]) & 1
    return 1.0 - 2.0 * bits


def expect_z(state: StateVector, qubit: int) -> float:
    if not 0 <= qubit < state.num_qubits:
        raise ConfigurationError(f"qubit {qubit} out of range for {state.num_qubits} qubits")
    return float(state.probabilities @ z_signs(state.num_qubits)[:, qubit])


def expect_z_all(state: StateVector) -> np.ndarray:
    return state.probabilities @ z_signs(state.num_qubits)


def sample_bitstrings(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``shots`` measurement outcomes in the computational basis.

    Returns:
        Integer histogram of length ``2^N``; entry ``b`` counts outcome ``b``
        (qubit 0 is the most significant bit, see :func:`format_bitstring`).
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = state.probabilities
    return rng.multinomial(shots, p / p.sum())


def format_bitstring(index: int, num_qubits: int) -> str:
    return format(index, f"0{num_qubits}b")


def z_from_counts(counts: np.ndarray, num_qubits: int) -> np.ndarray:
    """Per-qubit ``(#0 - #1) / shots`` estimate of <Z_i> from a histogram."""
    counts = np.asarray(counts)
    return counts @ z_signs(num_qubits) / counts.sum()


def density_from_statevector(state: StateVector) -> DensityMatrix:
    a = state.amplitudes
    return DensityMatrix(state.num_qubits, np.outer(a, a.conj()))


def _check_pauli_dims(rho: DensityMatrix, p: PauliString) -> None:
    if p.num_qubits != rho.num_qubits:
        raise ConfigurationError(f"Pauli string has {p.num_qubits} letters, state has {rho.num_qubits} qubits")


def pauli_expectation(rho: DensityMatrix, p: PauliString) -> float:
    """Unscaled ``Tr(P rho)``."""
    _check_pauli_dims(rho, p)
    return float(np.real(np.trace(p.matrix() @ rho.entries)))


def pauli_node_value(rho: DensityMatrix, p: PauliString) -> float:
    """Node coordinate ``2^-N Tr(P rho)``.

    With this scaling ``rho == sum_P node(P) * P`` exactly, and the identity
    coordinate equals ``2^-N`` (not 1).
    """
    return pauli_expectation(rho, p) / 2**rho.num_qubits


def pauli_node_vector(rho: DensityMatrix) -> np.ndarray:
    return np.array([pauli_node_value(rho, p) for p in all_pauli_strings(rho.num_qubits)])


def reconstruct_from_nodes(nodes: np.ndarray, num_qubits: int) -> np.ndarray:
    return sum(x * p.matrix() for x, p in zip(nodes, all_pauli_strings(num_qubits)))

import numpy as np
import pytest

from qesn.circuits import load_pair
from qesn.quantum import DensityMatrix, GateOp, UnitaryCircuit
from qesn.reservoir import ReservoirConfig


def random_state_amplitudes(rng, num_qubits):
    a = rng.standard_normal(2**num_qubits) + 1j * rng.standard_normal(2**num_qubits)
    return a / np.linalg.norm(a)


def random_density(rng, num_qubits, rank=None):
    dim = 2**num_qubits
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(num_qubits, rho / np.trace(rho))


def random_circuit(rng, num_qubits, num_gates):
    gates = []
    for _ in range(num_gates):
        if num_qubits > 1 and rng.random() < 0.4:
            c, t = rng.choice(num_qubits, size=2, replace=False)
            gates.append(GateOp("CNOT", target=int(t), control=int(c)))
        else:
            kind = ("RX", "RY", "RZ")[rng.integers(3)]
            gates.append(GateOp(kind, target=int(rng.integers(num_qubits)), angle=float(rng.uniform(-np.pi, np.pi))))
    return UnitaryCircuit(num_qubits, tuple(gates))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pair3():
    return load_pair(3)


@pytest.fixture(scope="session")
def pair5():
    return load_pair(5)


def make_config(pair, epsilon, **kw):
    return ReservoirConfig(pair.u0.num_qubits, epsilon, pair.u0, pair.u1, **kw)


ACCEPTANCE_LINES: dict[int, str] = {}


def report_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

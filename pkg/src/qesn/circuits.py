"""Circuit definition files.

One gate per line::

    # comment
    CNOT 0 1        # control target
    RX 2 4.26       # qubit angle (radians)

Shipped reservoirs live in ``qesn/circuits`` as ``u0_<N>q.circ`` and
``u1_<N>q.circ`` for N in {3, 5, 7}.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError
from .quantum import GateOp, ROTATION_KINDS, UnitaryCircuit

SHIPPED_QUBIT_COUNTS = (3, 5, 7)

# RX(a) RY(b) RZ(c) per qubit, in this order, for the rotation unitary U1.
ROTATION_CONVENTION = "RX-RY-RZ"
U1_ANGLES = (
    (4.26, -1.14, 0.198),
    (-1.84, 3.54, -2.07),
    (5.34, 0.186, 2.96),
    (-3.31, 4.03, -3.7),
    (3.69, -3.84, -3.92),
    (-2.21, 3.04, 2.5),
    (1.69, -2.34, 2.51),
)


def parse_circuit(text: str, num_qubits: int, name: str = "") -> UnitaryCircuit:
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        try:
            if kind == "CNOT":
                if len(parts) != 3:
                    raise ValueError("expected 'CNOT control target'")
                gates.append(GateOp("CNOT", target=int(parts[2]), control=int(parts[1])))
            elif kind in ROTATION_KINDS:
                if len(parts) != 3:
                    raise ValueError(f"expected '{kind} qubit angle'")
                gates.append(GateOp(kind, target=int(parts[1]), angle=float(parts[2])))
            else:
                raise ValueError(f"unknown gate {parts[0]!r}")
        except (ValueError, ConfigurationError) as exc:
            where = f"{name}:{lineno}" if name else f"line {lineno}"
            raise ConfigurationError(f"{where}: {exc}") from None
    return UnitaryCircuit(num_qubits, tuple(gates), name)


def circuit_filename(which: str, num_qubits: int) -> str:
    if which not in ("u0", "u1"):
        raise ConfigurationError(f"circuit must be 'u0' or 'u1', got {which!r}")
    return f"{which}_{num_qubits}q.circ"


def load_circuit(which: str, num_qubits: int, circuit_dir: str | Path | None = None) -> UnitaryCircuit:
    """Load ``u0``/``u1`` for ``num_qubits`` from ``circuit_dir`` or the shipped set."""
    fname = circuit_filename(which, num_qubits)
    if circuit_dir is not None:
        path = Path(circuit_dir) / fname
        if not path.is_file():
            raise ConfigurationError(f"circuit file not found: {path}")
        text = path.read_text()
    else:
        res = resources.files("qesn") / "circuits" / fname
        if not res.is_file():
            raise ConfigurationError(
                f"no shipped circuit {fname}; shipped qubit counts are {SHIPPED_QUBIT_COUNTS}, "
                "supply circuit_dir for others"
            )
        text = res.read_text()
    return parse_circuit(text, num_qubits, name=fname.removesuffix(".circ"))


@dataclass(frozen=True)
class CircuitPair:
    u0: UnitaryCircuit
    u1: UnitaryCircuit
    source: str

    def identifiers(self) -> dict:
        """Names and content hashes, for result records."""
        return {
            "u0": self.u0.name,
            "u1": self.u1.name,
            "u0_sha256": hashlib.sha256(self.u0.to_text().encode()).hexdigest(),
            "u1_sha256": hashlib.sha256(self.u1.to_text().encode()).hexdigest(),
            "source": self.source,
            "rotation_convention": ROTATION_CONVENTION,
        }


def load_pair(num_qubits: int, circuit_dir: str | Path | None = None) -> CircuitPair:
    return CircuitPair(
        load_circuit("u0", num_qubits, circuit_dir),
        load_circuit("u1", num_qubits, circuit_dir),
        source="shipped" if circuit_dir is None else str(circuit_dir),
    )


def cnot_ladder_u0(num_qubits: int) -> UnitaryCircuit:
    """CNOT-only U0: nearest-neighbour ladder down the register, then back up.

    Three qubits use the plain two-CNOT chain 0->1, 1->2.
    """
    down = [GateOp("CNOT", target=q + 1, control=q) for q in range(num_qubits - 1)]
    if num_qubits <= 3:
        return UnitaryCircuit(num_qubits, tuple(down), f"u0_{num_qubits}q")
    up = [GateOp("CNOT", target=q, control=q + 1) for q in reversed(range(num_qubits - 2))]
    return UnitaryCircuit(num_qubits, tuple(down + up), f"u0_{num_qubits}q")


def rotation_u1(num_qubits: int) -> UnitaryCircuit:
    if num_qubits > len(U1_ANGLES):
        raise ConfigurationError(f"only {len(U1_ANGLES)} published angle triples are available")
    gates = []
    for q in range(num_qubits):
        for kind, angle in zip(ROTATION_KINDS, U1_ANGLES[q]):
            gates.append(GateOp(kind, target=q, angle=angle))
    return UnitaryCircuit(num_qubits, tuple(gates), f"u1_{num_qubits}q")

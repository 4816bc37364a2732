"""Initial ion orderings: the identity baseline (OAI) and the common-ion order (CIO)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .qasm_io import Circuit, Gate, lower_toffolis


@dataclass
class CommonIonSet:
    common_ion: int
    gate_run: list[Gate] = field(default_factory=list)
    ion_list: list[int] = field(default_factory=list)

    def partner(self, gate: Gate) -> int:
        a, b = gate.qubits
        return b if a == self.common_ion else a


@dataclass(frozen=True)
class Ordering:
    placement: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.placement) != list(range(len(self.placement))):
            raise ValueError("ordering must be a permutation of 0..M-1")

    def __iter__(self):
        return iter(self.placement)

    def __len__(self) -> int:
        return len(self.placement)

    def as_list(self) -> list[int]:
        return list(self.placement)


def two_qubit_view(circuit: Circuit) -> list[Gate]:
    """Two-qubit gates of the circuit, Toffolis lowered pairwise first."""
    if circuit.toffoli_count:
        circuit = lower_toffolis(circuit, "pairwise")
    return [g for g in circuit.gates if g.arity == 2]


def _shared(a: Gate, b: Gate) -> int | None:
    common = set(a.qubits) & set(b.qubits)
    # two shared ions: lower id wins
    return min(common) if common else None


def identify_common_ions(gates: Sequence[Gate]) -> list[CommonIonSet]:
    """Split the gate list into maximal runs that share one ion."""

    def seed(i: int) -> int:
        ion = _shared(gates[i], gates[i + 1]) if i + 1 < len(gates) else None
        return gates[i].qubits[0] if ion is None else ion

    if not gates:
        return []
    current = CommonIonSet(seed(0))
    sets = [current]
    for i, g in enumerate(gates):
        if current.common_ion in g.qubits:
            current.gate_run.append(g)
        else:
            current = CommonIonSet(seed(i), [g])
            sets.append(current)
    return sets


def place_ions(sets: Sequence[CommonIonSet], num_ions: int) -> Ordering:
    """Lay the ions out set by set, each common ion heading its own block."""
    placed: set[int] = set()
    order: list[int] = []

    def put(ion: int, z: CommonIonSet) -> None:
        if ion not in placed:
            placed.add(ion)
            order.append(ion)
            z.ion_list.append(ion)

    for z in sets:
        z.ion_list.clear()
        put(z.common_ion, z)
        for g in z.gate_run:
            put(z.partner(g), z)
    order.extend(i for i in range(num_ions) if i not in placed)
    return Ordering(tuple(order))


def cio(circuit: Circuit) -> Ordering:
    return place_ions(identify_common_ions(two_qubit_view(circuit)), circuit.num_qubits)


def oai(circuit: Circuit) -> Ordering:
    return Ordering(tuple(range(circuit.num_qubits)))


METHODS = {"cio": cio, "oai": oai}


def order(circuit: Circuit, method: str = "cio") -> Ordering:
    try:
        return METHODS[method](circuit)
    except KeyError:
        raise ValueError(f"unknown ordering method {method!r}") from None

"""Circuit data model and a small OPENQASM 2.0 reader/writer.

Only the subset needed by the benchmark circuits is understood: a single
``qreg``, the standard one- and two-qubit gates of ``qelib1.inc`` and ``ccx``.
Gate angles are kept as the source text; the shuttling compiler only looks
at gate arity and operands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import QasmSyntaxError, RegisterError, UnsupportedFeature

ONE_QUBIT = frozenset({"h", "x", "y", "z", "s", "sdg", "t", "tdg", "rx", "ry", "rz"})
TWO_QUBIT = frozenset({"cx", "cz", "cp", "swap"})
THREE_QUBIT = frozenset({"ccx"})
PARAMETRIC = frozenset({"rx", "ry", "rz", "cp"})
ALIASES = {"cu1": "cp"}

_ARITY = {**{g: 1 for g in ONE_QUBIT}, **{g: 2 for g in TWO_QUBIT}, **{g: 3 for g in THREE_QUBIT}}

_UNSUPPORTED_KEYWORDS = {"if", "gate", "opaque", "reset", "U", "CX"}

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


@dataclass(frozen=True)
class Gate:
    index: int
    name: str
    qubits: tuple[int, ...]
    params: str | None = None

    def __post_init__(self) -> None:
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate {self.name} has repeated operands {self.qubits}")
        if len(self.qubits) not in (1, 2, 3):
            raise ValueError(f"gate {self.name} must act on 1-3 qubits")

    @property
    def kind(self) -> str:
        return {1: "one_qubit", 2: "two_qubit", 3: "toffoli"}[len(self.qubits)]

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class Circuit:
    name: str
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        for i, g in enumerate(self.gates):
            if g.index != i:
                raise ValueError(f"gate #{i} carries index {g.index}")
            if any(q < 0 or q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {i} touches a qubit outside 0..{self.num_qubits - 1}")

    @classmethod
    def from_ops(
        cls,
        name: str,
        num_qubits: int,
        ops: Iterable[tuple[str, Sequence[int]] | tuple[str, Sequence[int], str | None]],
    ) -> "Circuit":
        """Build a circuit from ``(name, qubits[, params])`` tuples, numbering gates in order."""
        gates = []
        for i, op in enumerate(ops):
            params = op[2] if len(op) > 2 else None
            gates.append(Gate(i, op[0], tuple(op[1]), params))
        return cls(name, num_qubits, tuple(gates))

    @property
    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.arity == 2)

    @property
    def toffoli_count(self) -> int:
        return sum(1 for g in self.gates if g.arity == 3)

    def __len__(self) -> int:
        return len(self.gates)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_ident = r"[A-Za-z_][A-Za-z0-9_]*"
_re_qreg = re.compile(rf"^(qreg|creg)\s+({_ident})\s*\[\s*(\d+)\s*\]$")
_re_call = re.compile(rf"^({_ident})\s*(?:\((.*)\))?\s*(.*)$", re.S)
_re_arg = re.compile(rf"^({_ident})\s*\[\s*(\d+)\s*\]$")
_re_name = re.compile(r"^//\s*circuit:\s*(\S+)\s*$")


def _statements(text: str) -> Iterator[tuple[int, str]]:
    """Yield ``(line, statement)`` pairs with comments removed."""
    buf: list[str] = []
    start_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0]
        for chunk in re.split(r"(;)", line):
            if chunk == ";":
                stmt = " ".join(buf).strip()
                buf = []
                if not stmt:
                    raise QasmSyntaxError(lineno, "empty statement")
                yield start_line, stmt
            elif chunk.strip():
                if not buf:
                    start_line = lineno
                buf.append(chunk.strip())
    if buf:
        raise QasmSyntaxError(start_line, f"missing ';' after {' '.join(buf)!r}")


def parse(text: str) -> Circuit:
    """Parse OPENQASM 2.0 source into a :class:`Circuit`.

    Classical registers, ``measure`` and ``barrier`` are accepted and dropped;
    each drop is noted in ``Circuit.warnings``.
    """
    name = "circuit"
    for raw in text.splitlines():
        m = _re_name.match(raw.strip())
        if m:
            name = m.group(1)
            break

    warnings: list[str] = []
    qreg: tuple[str, int] | None = None
    seen_version = False
    ops: list[tuple[str, tuple[int, ...], str | None]] = []

    for line, stmt in _statements(text):
        head = stmt.split(None, 1)[0].split("(", 1)[0]
        if stmt.startswith("OPENQASM"):
            if not re.fullmatch(r"OPENQASM\s+2\.0", stmt):
                raise UnsupportedFeature(stmt, line)
            seen_version = True
            continue
        if not seen_version:
            raise QasmSyntaxError(line, "program must start with 'OPENQASM 2.0;'")
        if head == "include":
            if not re.fullmatch(r'include\s+"qelib1\.inc"', stmt):
                raise UnsupportedFeature(stmt, line)
            continue
        if head in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(head, line)
        if head in ("qreg", "creg"):
            m = _re_qreg.match(stmt)
            if not m:
                raise QasmSyntaxError(line, f"malformed register declaration {stmt!r}")
            if head == "creg":
                warnings.append(f"line {line}: classical register {m.group(2)} dropped")
                continue
            if qreg is not None:
                raise RegisterError(f"line {line}: only one qreg is supported")
            size = int(m.group(3))
            if size < 1:
                raise RegisterError(f"line {line}: qreg must hold at least one qubit")
            qreg = (m.group(2), size)
            continue
        if head in ("measure", "barrier"):
            warnings.append(f"line {line}: {head} dropped")
            continue

        m = _re_call.match(stmt)
        if not m:
            raise QasmSyntaxError(line, f"cannot parse {stmt!r}")
        gname, params, args = m.group(1), m.group(2), m.group(3)
        gname = ALIASES.get(gname, gname)
        if gname not in _ARITY:
            raise UnsupportedFeature(f"gate {gname}", line)
        if qreg is None:
            raise RegisterError(f"line {line}: gate used before any qreg declaration")
        if (gname in PARAMETRIC) != (params is not None):
            raise QasmSyntaxError(line, f"gate {gname} parameter list mismatch")
        if params is not None:
            params = params.strip()
            if not params or "," in params:
                raise QasmSyntaxError(line, f"gate {gname} takes exactly one parameter")
        qubits = []
        for arg in (a.strip() for a in args.split(",")):
            am = _re_arg.match(arg)
            if not am:
                if re.fullmatch(_ident, arg):
                    raise UnsupportedFeature(f"register broadcast '{arg}'", line)
                raise QasmSyntaxError(line, f"bad qubit argument {arg!r}")
            if am.group(1) != qreg[0]:
                raise RegisterError(f"line {line}: unknown register {am.group(1)!r}")
            idx = int(am.group(2))
            if idx >= qreg[1]:
                raise RegisterError(f"line {line}: {arg} out of range for {qreg[0]}[{qreg[1]}]")
            qubits.append(idx)
        if len(qubits) != _ARITY[gname]:
            raise QasmSyntaxError(line, f"gate {gname} expects {_ARITY[gname]} operands")
        if len(set(qubits)) != len(qubits):
            raise QasmSyntaxError(line, f"gate {gname} repeats an operand")
        ops.append((gname, tuple(qubits), params))

    if not seen_version:
        raise QasmSyntaxError(1, "program must start with 'OPENQASM 2.0;'")
    if qreg is None:
        raise RegisterError("no qreg declared")
    circ = Circuit.from_ops(name, qreg[1], ops)
    return Circuit(circ.name, circ.num_qubits, circ.gates, tuple(warnings))


def emit(circuit: Circuit, register: str = "q") -> str:
    lines = [HEADER.rstrip("\n"), f"// circuit: {circuit.name}", f"qreg {register}[{circuit.num_qubits}];"]
    for g in circuit.gates:
        name = ALIASES.get(g.name, g.name)
        head = f"{name}({g.params})" if g.params is not None else name
        args = ",".join(f"{register}[{q}]" for q in g.qubits)
        lines.append(f"{head} {args};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# toffoli lowering
# ---------------------------------------------------------------------------

def _cnot6(a: int, b: int, c: int) -> list[tuple[str, tuple[int, ...]]]:
    # textbook decomposition: controls a, b; target c
    return [
        ("h", (c,)), ("cx", (b, c)), ("tdg", (c,)), ("cx", (a, c)), ("t", (c,)),
        ("cx", (b, c)), ("tdg", (c,)), ("cx", (a, c)), ("t", (b,)), ("t", (c,)),
        ("h", (c,)), ("cx", (a, b)), ("t", (a,)), ("tdg", (b,)), ("cx", (a, b)),
    ]


def lower_toffolis(circuit: Circuit, mode: str = "pairwise") -> Circuit:
    """Replace every ``ccx`` by one- and two-qubit gates.

    ``pairwise`` keeps only the interaction pattern (a,b), (b,c), (a,c);
    ``cnot6`` uses the standard 6-CNOT construction.
    """
    if mode not in ("pairwise", "cnot6"):
        raise ValueError(f"unknown lowering mode {mode!r}")
    if circuit.toffoli_count == 0:
        return circuit
    ops: list[tuple[str, tuple[int, ...], str | None]] = []
    for g in circuit.gates:
        if g.arity != 3:
            ops.append((g.name, g.qubits, g.params))
            continue
        a, b, c = g.qubits
        if mode == "pairwise":
            ops.extend(("cx", pair, None) for pair in ((a, b), (b, c), (a, c)))
        else:
            ops.extend((n, q, None) for n, q in _cnot6(a, b, c))
    lowered = Circuit.from_ops(circuit.name, circuit.num_qubits, ops)
    return Circuit(lowered.name, lowered.num_qubits, lowered.gates, circuit.warnings)

"""Parameterised generators for the benchmark circuit families.

QFT, Carry and Adder follow their textbook constructions.  Yoyo, Shift and
Comparator are only known from drawings, so each generator documents the
construction it uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import InvalidSize
from .qasm_io import Circuit

Op = tuple  # (name, qubits[, params])


def _qft_ops(qubits: list[int], inverse: bool = False) -> list[Op]:
    ops: list[Op] = []
    for i, qi in enumerate(qubits):
        ops.append(("h", (qi,)))
        for j in range(i + 1, len(qubits)):
            ops.append(("cp", (qi, qubits[j]), f"pi/{2 ** (j - i)}"))
    if inverse:
        ops = [(o[0], o[1], "-" + o[2]) if len(o) > 2 else o for o in reversed(ops)]
    return ops


def gen_qft(n: int) -> Circuit:
    if n < 2:
        raise InvalidSize(f"qft needs n >= 2, got {n}")
    return Circuit.from_ops(f"qft{n}", n, _qft_ops(list(range(n))))


def _carry(c: int, a: int, b: int, c1: int) -> list[Op]:
    return [("ccx", (a, b, c1)), ("cx", (a, b)), ("ccx", (c, b, c1))]


def _carry_dg(c: int, a: int, b: int, c1: int) -> list[Op]:
    return list(reversed(_carry(c, a, b, c1)))


def _sum(c: int, a: int, b: int) -> list[Op]:
    return [("cx", (a, b)), ("cx", (c, b))]


def _bit(i: int) -> tuple[int, int, int, int]:
    # interleaved layout c0 a0 b0 c1 a1 b1 ... cn
    return 3 * i, 3 * i + 1, 3 * i + 2, 3 * i + 3


def gen_carry(n: int) -> Circuit:
    """Ripple carry chain on 3n+1 qubits: CARRY blocks up, then undo all but the top one."""
    if n < 1:
        raise InvalidSize(f"carry needs n >= 1, got {n}")
    ops: list[Op] = []
    for i in range(n):
        ops += _carry(*_bit(i))
    for i in range(n - 2, -1, -1):
        ops += _carry_dg(*_bit(i))
    return Circuit.from_ops(f"carry{n}", 3 * n + 1, ops)


def gen_adder(n: int) -> Circuit:
    """Plain ripple-carry adder (CARRY/SUM blocks) on 3n+1 qubits."""
    if n < 1:
        raise InvalidSize(f"adder needs n >= 1, got {n}")
    ops: list[Op] = []
    for i in range(n):
        ops += _carry(*_bit(i))
    c, a, b, _ = _bit(n - 1)
    ops.append(("cx", (a, b)))
    ops += _sum(c, a, b)
    for i in range(n - 2, -1, -1):
        ops += _carry_dg(*_bit(i))
        ops += _sum(*_bit(i)[:3])
    return Circuit.from_ops(f"adder{n}", 3 * n + 1, ops)


def _bounce(partners: list[int]) -> list[int]:
    """Alternate between the far and near ends: p[-1], p[0], p[-2], p[1], ..."""
    out: list[int] = []
    lo, hi = 0, len(partners) - 1
    while lo <= hi:
        out.append(partners[hi])
        if lo < hi:
            out.append(partners[lo])
        lo, hi = lo + 1, hi - 1
    return out


def gen_yoyo(n: int, repeats: int = 2) -> Circuit:
    """Qubit 0 bounces between the far and near ends of the register.

    One sweep pairs qubit 0 with n-1, 1, n-2, 2, ... so every interaction
    reaches across the register.  Later sweeps run the bounce in the other
    direction and skip the two partners just met at the turning point.
    """
    if n < 2 or n % 2:
        raise InvalidSize(f"yoyo needs an even n >= 2, got {n}")
    if repeats < 1:
        raise InvalidSize("repeats must be >= 1")
    sweep = _bounce(list(range(1, n)))
    ops: list[Op] = []
    for k in range(repeats):
        seq = sweep if k % 2 == 0 else sweep[::-1]
        if k:
            seq = seq[2:]
        ops += [("cx", (0, j)) for j in seq]
    return Circuit.from_ops(f"yoyo{n}", n, ops)


def gen_shift(n: int, repeats: int = 2) -> Circuit:
    """Toffoli-only circuit: the block {0, 1, 2} acts on every other qubit.

    For each target t = 3..n-1 one Toffoli fires, its control pair cycling
    through (0,1), (1,2), (0,2); the sweep runs ``repeats`` times.
    """
    if n < 4:
        raise InvalidSize(f"shift needs n >= 4, got {n}")
    cycle = ((0, 1), (1, 2), (0, 2))
    ops: list[Op] = []
    for _ in range(repeats):
        for k, t in enumerate(range(3, n)):
            c1, c2 = cycle[k % 3]
            ops.append(("ccx", (c1, c2, t)))
    return Circuit.from_ops(f"shift{n}", n, ops)


def gen_comparator(n: int) -> Circuit:
    """QFT-based comparator on 2n+1 qubits.

    Layout: register A = 0..n-1, ancilla = n, register B = n+1..2n.  A and the
    ancilla go to Fourier space, B subtracts through a controlled-phase
    cascade, the inverse QFT brings the sign into the ancilla and a Toffoli
    chain reads it out against B.
    """
    if n < 2:
        raise InvalidSize(f"comparator needs n >= 2, got {n}")
    work = list(range(n + 1))
    b = [n + 1 + k for k in range(n)]
    ops: list[Op] = _qft_ops(work)
    for j in range(n + 1):
        for k in range(min(j + 1, n)):
            ops.append(("cp", (b[k], work[j]), f"-pi/{2 ** (j - k)}"))
    ops += _qft_ops(work, inverse=True)
    for k in range(n):
        ops.append(("ccx", (n, k, b[k])))
    return Circuit.from_ops(f"comparator{n}", 2 * n + 1, ops)


def gen_pairing(n: int) -> Circuit:
    if n < 2 or n % 2:
        raise InvalidSize(f"pairing needs an even n >= 2, got {n}")
    return Circuit.from_ops(f"pairing{n}", n, [("cx", (i, i + 1)) for i in range(0, n, 2)])


@dataclass(frozen=True)
class Family:
    name: str
    build: Callable[[int], Circuit]
    qubits: Callable[[int], int]
    min_size: int
    even: bool = False

    def size_for_qubits(self, q: int) -> int | None:
        """Largest size parameter whose circuit has at most ``q`` qubits, or None."""
        best = None
        s = self.min_size
        while self.qubits(s) <= q:
            if not self.even or s % 2 == 0:
                best = s
            s += 1
        return best


FAMILIES: dict[str, Family] = {
    "qft": Family("qft", gen_qft, lambda s: s, 2),
    "carry": Family("carry", gen_carry, lambda s: 3 * s + 1, 1),
    "yoyo": Family("yoyo", gen_yoyo, lambda s: s, 2, even=True),
    "shift": Family("shift", gen_shift, lambda s: s, 4),
    "comparator": Family("comparator", gen_comparator, lambda s: 2 * s + 1, 2),
    "adder": Family("adder", gen_adder, lambda s: 3 * s + 1, 1),
    "pairing": Family("pairing", gen_pairing, lambda s: s, 2, even=True),
}


def generate(family: str, size: int) -> Circuit:
    try:
        fam = FAMILIES[family]
    except KeyError:
        raise InvalidSize(f"unknown circuit family {family!r}") from None
    return fam.build(size)

"""Independent reference implementations used by the tests."""

from __future__ import annotations

from collections import deque
from functools import reduce

import numpy as np

State = tuple[frozenset, ...]


def canon(crystals) -> State:
    return tuple(frozenset(c) for c in crystals)


def exchange_neighbours(state: State):
    for i in range(len(state) - 1):
        for x in state[i]:
            for y in state[i + 1]:
                t = list(state)
                t[i] = (state[i] - {x}) | {y}
                t[i + 1] = (state[i + 1] - {y}) | {x}
                yield tuple(t)


def min_exchanges(start, goal) -> int:
    """Fewest single-ion swaps between neighbouring crystals turning ``start`` into ``goal``."""
    start, goal = canon(start), canon(goal)
    dist = {start: 0}
    q = deque([start])
    while q:
        s = q.popleft()
        if s == goal:
            return dist[s]
        for t in exchange_neighbours(s):
            if t not in dist:
                dist[t] = dist[s] + 1
                q.append(t)
    raise ValueError("goal unreachable")


def min_exchanges_to_meet(crystals, a: int, b: int) -> int:
    """Fewest exchanges after which ``a`` and ``b`` share a crystal.

    Every other ion is interchangeable here, so states are multisets of labels.
    """
    def label(i):
        return "a" if i == a else "b" if i == b else "-"

    start = tuple(tuple(sorted(label(i) for i in c)) for c in crystals)
    dist = {start: 0}
    q = deque([start])
    while q:
        s = q.popleft()
        if any("a" in c and "b" in c for c in s):
            return dist[s]
        for i in range(len(s) - 1):
            for x in set(s[i]):
                for y in set(s[i + 1]):
                    left, right = list(s[i]), list(s[i + 1])
                    left.remove(x)
                    right.remove(y)
                    t = list(s)
                    t[i], t[i + 1] = tuple(sorted(left + [y])), tuple(sorted(right + [x]))
                    t = tuple(t)
                    if t not in dist:
                        dist[t] = dist[s] + 1
                        q.append(t)
    raise ValueError("unreachable")


# -- tiny state-vector simulator ------------------------------------------

_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
_T = np.diag([1, np.exp(1j * np.pi / 4)])
_ONE = {"h": _H, "t": _T, "tdg": _T.conj().T, "x": np.array([[0, 1], [1, 0]])}


def _embed(op: np.ndarray, q: int, n: int) -> np.ndarray:
    mats = [op if k == q else np.eye(2) for k in range(n)]
    return reduce(np.kron, mats)


def _controlled_x(controls: tuple[int, ...], target: int, n: int) -> np.ndarray:
    dim = 2 ** n
    u = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if all(bits[c] for c in controls):
            bits[target] ^= 1
        j = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        u[j, i] = 1
    return u


def unitary(gates, n: int) -> np.ndarray:
    """Unitary of a list of ``Gate``-like objects (h, t, tdg, x, cx, ccx)."""
    u = np.eye(2 ** n, dtype=complex)
    for g in gates:
        if g.name in _ONE:
            m = _embed(_ONE[g.name], g.qubits[0], n)
        elif g.name in ("cx", "ccx"):
            m = _controlled_x(tuple(g.qubits[:-1]), g.qubits[-1], n)
        else:
            raise ValueError(g.name)
        u = m @ u
    return u

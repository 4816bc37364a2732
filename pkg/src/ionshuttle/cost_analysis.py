"""Circuit fit, cost decomposition and the closed-form displacement bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyCircuit
from .initial_ordering import identify_common_ions
from .qasm_io import Circuit, lower_toffolis
from .shuttle_engine import ShuttleTrace, exchange_adjacent
from .trap_model import CostModel, load, new_uni

FIT_MODES = ("split_merge", "all", "split_merge_count")


def circuit_fit(trace: ShuttleTrace, denominator: int, mode: str = "split_merge") -> float:
    """Mean cost per gate.

    ``split_merge`` sums split and merge costs, ``all`` sums every op and
    ``split_merge_count`` counts split and merge ops regardless of weight.
    """
    if mode not in FIT_MODES:
        raise ValueError(f"mode must be one of {FIT_MODES}")
    if denominator <= 0:
        raise EmptyCircuit("circuit fit needs at least one gate")
    if mode == "all":
        total = trace.total_cost
    elif mode == "split_merge":
        k = trace.cost_by_kind
        total = k["split"] + k["merge"]
    else:
        c = trace.counts()
        total = c["split"] + c["merge"]
    return total / denominator


@dataclass
class FitReport:
    """Per-run metrics; ``denominator`` says whether fits divide by ``n_gates`` or ``n_2q``."""

    circuit: str
    num_qubits: int
    n_gates: int
    n_2q: int
    fit_splitmerge: float
    fit_all: float
    fit_splitmerge_count: float
    decomposition: dict[str, float] = field(default_factory=dict)
    op_counts: dict[str, int] = field(default_factory=dict)
    exchanges: int = 0
    max_cd: int = 0
    mean_cd: float = 0.0
    reorg_events: int = 0
    denominator: str = "all"

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def total_cost(self) -> float:
        return sum(self.decomposition.values())

    def summary(self) -> dict:
        """Flat record used for the JSON report."""
        c = self.op_counts
        return {
            "circuit": self.circuit,
            "n_qubits": self.num_qubits,
            "n_gates": self.n_gates,
            "n_2q": self.n_2q,
            "splits": c["split"],
            "merges": c["merge"],
            "rotations": c["rotation"],
            "displacements": c["displacement"],
            "exchanges": self.exchanges,
            "total_cost": self.total_cost,
            "fit_splitmerge": self.fit_splitmerge,
            "fit_all": self.fit_all,
            "reorg_count": self.reorg_events,
        }


DENOMINATORS = ("all", "two_qubit")


def build_report(circuit: Circuit, trace: ShuttleTrace, denominator: str = "all") -> FitReport:
    """Summarise a trace of ``circuit`` (the circuit as executed, Toffolis lowered).

    ``denominator='two_qubit'`` divides by the multi-qubit gate count only.
    """
    if denominator not in DENOMINATORS:
        raise ValueError(f"denominator must be one of {DENOMINATORS}")
    n_2q = sum(1 for g in circuit.gates if g.arity >= 2)
    n = len(circuit.gates) if denominator == "all" else n_2q
    counts = trace.counts()
    cds = trace.cd_series
    return FitReport(
        circuit=circuit.name,
        num_qubits=circuit.num_qubits,
        n_gates=len(circuit.gates),
        n_2q=n_2q,
        fit_splitmerge=circuit_fit(trace, n, "split_merge"),
        fit_all=circuit_fit(trace, n, "all"),
        fit_splitmerge_count=circuit_fit(trace, n, "split_merge_count"),
        decomposition=trace.cost_by_kind,
        op_counts={k: counts.get(k, 0) for k in ("displacement", "rotation", "split", "merge", "gate_exec")},
        exchanges=trace.exchanges,
        max_cd=max(cds, default=0),
        mean_cd=sum(cds) / len(cds) if cds else 0.0,
        reorg_events=len(trace.reorg_events),
        denominator=denominator,
    )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def worst_case_uni(K: int, alpha: float = 1, P: float = 0) -> float:
    """Cost of carrying one ion across ``K`` crystals past a single LIZ."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return alpha * K * (K - 1) + P * (K - 1)


def theoretical_min(K: int, alpha: float = 1, P: float = 0) -> float:
    """Lower bound on the displacement cost of any circuit on ``K`` crystals."""
    return worst_case_uni(K, alpha, P)


def pairing_fit_bound(N: int, alpha: float = 1) -> float:
    if N < 2 or N % 2:
        raise ValueError("N must be even and >= 2")
    return alpha * (N / 2 - 1)


def section_size(K: int, L: int) -> tuple[int, bool]:
    """Crystals per section and whether ``L`` divides ``K`` exactly."""
    if L < 1 or K < 1:
        raise ValueError("K and L must be >= 1")
    return math.ceil(K / L), K % L == 0


def worst_case_multi(K: int, L: int, alpha: float = 1, P: float = 0) -> float:
    """End-to-end worst case over ``L`` LIZ sections.

    When ``L`` does not divide ``K`` the section size is rounded up; use
    :func:`section_size` to see whether that happened.
    """
    k, _ = section_size(K, L)
    return 2 * alpha * (K - 1) + alpha * K * (k - 1) + P * (K - 1)


def mean_gates_per_common_ion(circuit: Circuit, count: str = "two_qubit",
                              lowering: str = "pairwise") -> float:
    """Gates per common-ion set.

    ``count='all'`` also counts the single-qubit gates of the lowered
    circuit; ``lowering`` picks how Toffolis are decomposed first.
    """
    if count not in ("two_qubit", "all"):
        raise ValueError("count must be 'two_qubit' or 'all'")
    lowered = lower_toffolis(circuit, lowering)
    two = [g for g in lowered.gates if g.arity == 2]
    sets = identify_common_ions(two)
    if not sets:
        raise EmptyCircuit("circuit has no two-qubit gates")
    num = len(two) if count == "two_qubit" else len(lowered.gates)
    return num / len(sets)


def measure_P(alpha: int = 1, cost_model: CostModel | None = None, crystals: int = 2) -> float:
    """Displacement cost of one adjacent exchange at the LIZ, chain shifts excluded."""
    if crystals < 2:
        raise ValueError("need at least two crystals")
    trap = new_uni(alpha * (crystals + 1), 0, alpha, cost_model)
    load(trap, list(range(2 * crystals)))
    ops = exchange_adjacent(trap, 0, alpha, 1, 2)
    return sum(op.cost for op in ops if op.kind == "displacement")


def growth_fit(xs: Sequence[float], ys: Sequence[float], degree: int = 3) -> tuple[np.ndarray, float]:
    """Least-squares polynomial fit; returns coefficients (highest first) and R squared."""
    x, y = np.asarray(xs, float), np.asarray(ys, float)
    if len(x) <= degree:
        raise ValueError(f"need more than {degree} points for a degree-{degree} fit")
    coeffs = np.polyfit(x, y, degree)
    resid = y - np.polyval(coeffs, x)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid ** 2).sum()) / ss_tot
    return coeffs, r2

"""Shuttling sequence generation on a segmented trap.

Crystals keep a fixed left-to-right order; only ions move between them,
one adjacent exchange at a time.  An exchange is performed at a LIZ: the
partner crystal is displaced into the LIZ, both crystals are split, the two
inner ions form a temporary crystal (where a gate between them may run),
that crystal is rotated and split, and the outer pairs are merged back.

The stored chain is rigid: bringing a crystal to a LIZ shifts the whole
chain (or, in a multi-LIZ trap, the whole section) by the required number
of segments.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Sequence

from .errors import IllegalOp, Stuck
from .initial_ordering import Ordering, cio, order
from .qasm_io import Circuit, Gate, lower_toffolis
from .trap_model import (
    CostModel,
    ShuttleOp,
    TrapState,
    apply,
    auto_uni,
    from_spec,
    chain_shift,
    crystal_distance,
    load,
    new_multi,
    write_jsonl,
)

log = logging.getLogger(__name__)

MOVER_RULES = ("fewest_exchanges", "first_operand", "closer_to_end")


@dataclass(frozen=True)
class EngineConfig:
    reorg_enabled: bool = False
    window: int = 8
    break_divisor: float = 12.0
    liz_selection: str = "nearest"
    mover_rule: str = "fewest_exchanges"

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.break_divisor <= 0:
            raise ValueError("break_divisor must be > 0")
        if self.mover_rule not in MOVER_RULES:
            raise ValueError(f"mover_rule must be one of {MOVER_RULES}")
        if self.liz_selection != "nearest":
            raise ValueError("only 'nearest' LIZ selection is supported")


@dataclass
class ShuttleTrace:
    ops: list[ShuttleOp] = field(default_factory=list)
    cd_series: list[int] = field(default_factory=list)
    cd_gates: list[int] = field(default_factory=list)
    gates_executed: int = 0
    exchanges: int = 0
    reorg_events: list[tuple[int, float]] = field(default_factory=list)

    @property
    def cost_by_kind(self) -> dict[str, float]:
        out: dict[str, float] = {"displacement": 0.0, "rotation": 0.0, "split": 0.0, "merge": 0.0}
        for op in self.ops:
            if op.kind != "gate_exec":
                out[op.kind] += op.cost
        return out

    @property
    def total_cost(self) -> float:
        return sum(op.cost for op in self.ops)

    def counts(self) -> Counter:
        return Counter(op.kind for op in self.ops)

    def phase_counts(self, kind: str = "displacement") -> Counter:
        return Counter(op.phase for op in self.ops if op.kind == kind)

    def write_jsonl(self, fh: IO[str]) -> float:
        return write_jsonl(self.ops, fh)


def spectator_padded(ordering: Sequence[int]) -> list[int]:
    """Append a spectator ion when the count is odd so every crystal holds two ions."""
    placement = list(ordering)
    if len(placement) % 2:
        placement.append(len(placement))
    return placement


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def _emit(trap: TrapState, ops: list[ShuttleOp], op: ShuttleOp) -> None:
    apply(trap, op)
    ops.append(op)


def exchange_adjacent(
    trap: TrapState,
    left_seg: int,
    right_seg: int,
    left_ion: int,
    right_ion: int,
    gates: Sequence[Gate] = (),
) -> list[ShuttleOp]:
    """Swap ``left_ion`` and ``right_ion`` between two neighbouring crystals.

    One of the two segments must be a LIZ; the other crystal is displaced
    into it and back.  Always 3 splits and 3 merges.  ``gates`` run on the
    temporary crystal formed by the two travelling ions.  Ops are applied to
    ``trap`` and returned.
    """
    topo, cm = trap.topology, trap.cost_model
    if right_seg <= left_seg:
        raise IllegalOp("exchange", "left crystal must lie left of the right crystal")
    if any(left_seg < s < right_seg for s in trap.occupied()):
        raise IllegalOp("exchange", "crystals are not adjacent in the chain")
    if len(trap.segments[left_seg]) != 1 or len(trap.segments[right_seg]) != 1:
        raise IllegalOp("exchange", "each segment must hold exactly one crystal")
    lc, rc = trap.segments[left_seg][0], trap.segments[right_seg][0]
    if len(lc) != 2 or len(rc) != 2:
        raise IllegalOp("exchange", "exchange needs two two-ion crystals")
    if left_ion not in lc.ions or right_ion not in rc.ions:
        raise IllegalOp("exchange", "ions are not in the given crystals")
    if topo.is_liz(left_seg):
        liz, visitor, step = left_seg, right_seg, -1
    elif topo.is_liz(right_seg):
        liz, visitor, step = right_seg, left_seg, 1
    else:
        raise IllegalOp("exchange", "neither crystal sits at a LIZ")

    ops: list[ShuttleOp] = []
    if lc.ions[1] != left_ion:
        _emit(trap, ops, cm.op("rotation", left_seg))
    if rc.ions[0] != right_ion:
        _emit(trap, ops, cm.op("rotation", right_seg))
    for s in range(visitor, liz, step):
        _emit(trap, ops, cm.op("displacement", s, to=s + step, phase="exchange"))
    # LIZ now holds [left, right]
    _emit(trap, ops, cm.op("split", liz, slot=0))
    _emit(trap, ops, cm.op("split", liz, slot=2))
    _emit(trap, ops, cm.op("merge", liz, slot=1))
    for g in gates:
        _emit(trap, ops, cm.op("gate_exec", liz, gate=g.index, ions=g.qubits))
    _emit(trap, ops, cm.op("rotation", liz, slot=1))
    _emit(trap, ops, cm.op("split", liz, slot=1))
    _emit(trap, ops, cm.op("merge", liz, slot=0))
    _emit(trap, ops, cm.op("merge", liz, slot=1))
    for s in range(liz, visitor, -step):
        _emit(trap, ops, cm.op("displacement", s, to=s - step, phase="exchange"))
    return ops


class Shuttler:
    """Drives one trap; every generated op is applied immediately and recorded."""

    def __init__(self, trap: TrapState, config: EngineConfig | None = None) -> None:
        self.trap = trap
        self.config = config or EngineConfig()
        self.trace = ShuttleTrace()

    # -- helpers ---------------------------------------------------------

    def _push(self, ops: Sequence[ShuttleOp]) -> None:
        self.trace.ops.extend(ops)

    def emit(self, op: ShuttleOp) -> None:
        apply(self.trap, op)
        self.trace.ops.append(op)

    def _chain(self) -> list[tuple[int, list[int]]]:
        return [(s, c.ions) for s, _, c in self.trap.chain()]

    def _section(self, seg: int) -> int:
        return self.trap.topology.section_of(seg)

    def _liz_for(self, seg: int) -> int:
        return self.trap.topology.liz_positions[self._section(seg)]

    def align(self, pos: int) -> None:
        """Shift the chain (or section) so crystal ``pos`` sits on its LIZ."""
        chain = self._chain()
        seg = chain[pos][0]
        sec = self._section(seg)
        liz = self.trap.topology.liz_positions[sec]
        if seg == liz:
            return
        run = [s for s, _ in chain if self._section(s) == sec]
        direction = "left" if seg > liz else "right"
        try:
            ops = chain_shift(self.trap, run, direction, abs(seg - liz))
        except IllegalOp as exc:
            raise Stuck(f"cannot bring crystal {pos} to LIZ {liz}: {exc.reason}") from exc
        for op in ops:
            self.emit(op)

    def hop(self, pos: int, left_ion: int, right_ion: int, gates: Sequence[Gate] = ()) -> None:
        """Exchange between chain positions ``pos`` and ``pos + 1``."""
        chain = self._chain()
        lseg, rseg = chain[pos][0], chain[pos + 1][0]
        topo, cm = self.trap.topology, self.trap.cost_model
        if self._section(lseg) == self._section(rseg):
            self.align(pos)
            lseg, rseg = self._chain()[pos][0], self._chain()[pos + 1][0]
            self._push(exchange_adjacent(self.trap, lseg, rseg, left_ion, right_ion, gates))
        else:
            self.align(pos)
            self.align(pos + 1)
            chain = self._chain()
            home, rseg = chain[pos][0], chain[pos + 1][0]
            dock = rseg - self.trap.alpha
            for s in range(home, dock):
                self.emit(cm.op("displacement", s, to=s + 1, phase="transport"))
            self._push(exchange_adjacent(self.trap, dock, rseg, left_ion, right_ion, gates))
            for s in range(dock, home, -1):
                self.emit(cm.op("displacement", s, to=s - 1, phase="transport"))
        self.trace.exchanges += 1

    def execute_here(self, gates: Sequence[Gate]) -> None:
        """Run ``gates`` on a crystal that already holds all their operands."""
        pos = self.trap.chain_index(gates[0].qubits[0])
        self.align(pos)
        liz = self._chain()[pos][0]
        for g in gates:
            self.emit(self.trap.cost_model.op("gate_exec", liz, gate=g.index, ions=g.qubits))

    def choose_mover(self, a: int, b: int, first: int) -> tuple[int, int]:
        pa, pb = self.trap.chain_index(a), self.trap.chain_index(b)
        left, right = (a, b) if pa <= pb else (b, a)
        rule = self.config.mover_rule
        if rule == "first_operand":
            return (first, b if first == a else a)
        if rule == "closer_to_end":
            n = len(self._chain())
            pl, pr = min(pa, pb), max(pa, pb)
            if n - 1 - pr < pl:
                return right, left
            return left, right
        # equal exchange counts either way; the left ion travels right
        return left, right

    def bring_together(self, a: int, b: int, gates: Sequence[Gate] = (), final: str = "target",
                       first: int | None = None) -> None:
        """Route ``a`` and ``b`` into one crystal at a LIZ and run ``gates`` there.

        ``final='target'`` runs the gates in the temporary crystal of the
        last exchange; ``final='partner'`` lets the mover swap with the
        target's crystal-mate, then aligns that crystal and runs them.
        """
        if final not in ("target", "partner"):
            raise ValueError("final must be 'target' or 'partner'")
        pa, pb = self.trap.chain_index(a), self.trap.chain_index(b)
        if pa == pb:
            if gates:
                self.execute_here(gates)
            else:
                self.align(pa)
            return
        mover, target = self.choose_mover(a, b, a if first is None else first)
        pm, pt = self.trap.chain_index(mover), self.trap.chain_index(target)

        def last_pick(p: int) -> int:
            ions = self._chain()[p][1]
            if final == "target":
                return target
            return ions[0] if ions[1] == target else ions[1]

        if pm < pt:
            for p in range(pm, pt):
                nxt = self._chain()[p + 1][1]
                last = p + 1 == pt
                y = last_pick(p + 1) if last else nxt[0]
                self.hop(p, mover, y, gates if last and final == "target" else ())
        else:
            for p in range(pm, pt, -1):
                prev = self._chain()[p - 1][1]
                last = p - 1 == pt
                x = last_pick(p - 1) if last else prev[1]
                self.hop(p - 1, x, mover, gates if last and final == "target" else ())
        if final == "partner" and gates:
            self.execute_here(gates)
        elif final == "partner":
            self.align(self.trap.chain_index(mover))

    # -- reorganisation --------------------------------------------------

    def reorganize(self, remaining: Sequence[Gate], num_qubits: int) -> int:
        """Re-sort the chain into the CIO order of the gates still to run.

        Returns the number of exchanges spent.
        """
        if not remaining:
            return 0
        sub = Circuit.from_ops("remaining", num_qubits, [(g.name, g.qubits, g.params) for g in remaining])
        placement = list(cio(sub).placement)
        placement += [i for i in self.trap.ions() if i >= num_qubits]
        target = [placement[i:i + 2] for i in range(0, len(placement), 2)]
        return self.sort_chain(target)

    def sort_chain(self, target: Sequence[Sequence[int]]) -> int:
        """Bring every ion into its target crystal by adjacent exchanges, then fix orientation."""
        want = {ion: p for p, ions in enumerate(target) for ion in ions}
        before = self.trace.exchanges
        for p, desired in enumerate(target):
            # nearer ion first, otherwise the second one can cost an extra exchange
            for ion in sorted(desired, key=self.trap.chain_index):
                q = self.trap.chain_index(ion)
                while q > p:
                    left_ions = self._chain()[q - 1][1]
                    if q - 1 == p:
                        left_ions = [i for i in left_ions if i not in desired]
                    # send back the ion that belongs furthest to the right
                    x = max(left_ions, key=lambda i: (want[i], -i))
                    self.hop(q - 1, x, ion)
                    q -= 1
        for p, desired in enumerate(target):
            seg, ions = self._chain()[p]
            if len(desired) == 2 and list(ions) != list(desired):
                self.emit(self.trap.cost_model.op("rotation", seg))
        return self.trace.exchanges - before

    # -- main loop ---------------------------------------------------------

    def execute(self, circuit: Circuit) -> ShuttleTrace:
        if circuit.toffoli_count:
            circuit = lower_toffolis(circuit, "pairwise")
        gates = circuit.gates
        missing = set(range(circuit.num_qubits)) - set(self.trap.ions())
        if missing:
            raise ValueError(f"trap is missing ions {sorted(missing)}")
        break_distance = (circuit.num_qubits / 2) / self.config.break_divisor
        since_reorg = 0
        i = 0
        while i < len(gates):
            g = gates[i]
            if g.arity == 1:
                seg = self.trap.locate(g.qubits[0])[0]
                self.emit(self.trap.cost_model.op("gate_exec", seg, gate=g.index, ions=g.qubits))
                self.trace.gates_executed += 1
                i += 1
                continue
            pair = set(g.qubits)
            j = i + 1
            while j < len(gates) and set(gates[j].qubits) <= pair:
                j += 1
            run = gates[i:j]
            a, b = g.qubits
            self.trace.cd_series.append(crystal_distance(self.trap, a, b))
            self.trace.cd_gates.append(g.index)
            self.bring_together(a, b, run)
            self.trace.gates_executed += len(run)
            i = j
            if self.config.reorg_enabled:
                recent = self.trace.cd_series[since_reorg:][-self.config.window:]
                if len(recent) == self.config.window:
                    mean = sum(recent) / len(recent)
                    if mean > break_distance:
                        self.trace.reorg_events.append((g.index, mean))
                        self.reorganize(gates[i:], circuit.num_qubits)
                        since_reorg = len(self.trace.cd_series)
        return self.trace


# ---------------------------------------------------------------------------
# module-level entry points
# ---------------------------------------------------------------------------

def bring_together(trap: TrapState, ion_a: int, ion_b: int, config: EngineConfig | None = None,
                   final: str = "target") -> list[ShuttleOp]:
    s = Shuttler(trap, config)
    s.bring_together(ion_a, ion_b, final=final)
    return s.trace.ops


def execute(circuit: Circuit, ordering: Ordering | Sequence[int], trap: TrapState,
            config: EngineConfig | None = None) -> ShuttleTrace:
    """Run ``circuit`` on a trap already loaded with ``ordering``."""
    placement = list(ordering)
    loaded = [i for _, ions in ((s, c.ions) for s, _, c in trap.chain()) for i in ions]
    if sorted(loaded) != sorted(spectator_padded(placement)) and sorted(loaded) != sorted(placement):
        raise ValueError("trap must be freshly loaded with the ordering")
    return Shuttler(trap, config).execute(circuit)


def reorganize(trap: TrapState, remaining: Sequence[Gate], num_qubits: int,
               config: EngineConfig | None = None) -> list[ShuttleOp]:
    s = Shuttler(trap, config)
    s.reorganize(remaining, num_qubits)
    return s.trace.ops


def prepare_trap(circuit: Circuit, ordering: Ordering | Sequence[int], trap: TrapState | None = None,
                 alpha: int = 1, cost_model: CostModel | None = None) -> TrapState:
    placement = spectator_padded(ordering)
    if trap is None:
        trap = auto_uni(len(placement), alpha, cost_model)
    return load(trap, placement)


@dataclass
class Compilation:
    circuit: Circuit
    ordering: Ordering
    trap: TrapState
    trace: ShuttleTrace


def compile_circuit(circuit: Circuit, method: str = "cio", trap: str | TrapState = "uni:auto",
                    config: EngineConfig | None = None, alpha: int = 1,
                    cost_model: CostModel | None = None, lowering: str = "pairwise") -> Compilation:
    """Lower, order, load and execute ``circuit`` in one go."""
    if circuit.toffoli_count:
        circuit = lower_toffolis(circuit, lowering)
    ordering = order(circuit, method)
    placement = spectator_padded(ordering)
    if isinstance(trap, str):
        trap = from_spec(trap, len(placement), alpha, cost_model)
    load(trap, placement)
    trace = Shuttler(trap, config).execute(circuit)
    return Compilation(circuit, ordering, trap, trace)


# ---------------------------------------------------------------------------
# worst-case scenarios
# ---------------------------------------------------------------------------

@dataclass
class WorstCase:
    crystals: int
    sections: int
    exchanges: int
    shift_displacements: int
    exchange_displacements: int
    transport_displacements: int
    displacement_cost: float
    total_cost: float
    trace: ShuttleTrace = field(repr=False)

    @property
    def displacements(self) -> int:
        return self.shift_displacements + self.exchange_displacements + self.transport_displacements


def _worstcase(trap: TrapState, crystals: int, sections: int) -> WorstCase:
    load(trap, list(range(2 * crystals)))
    mover, target = 1, (2 * crystals - 1 if crystals > 1 else 0)
    s = Shuttler(trap)
    gate = Gate(0, "cx", (mover, target))
    s.bring_together(mover, target, [gate], final="partner")
    phases = s.trace.phase_counts()
    return WorstCase(
        crystals=crystals,
        sections=sections,
        exchanges=s.trace.exchanges,
        shift_displacements=phases["shift"],
        exchange_displacements=phases["exchange"],
        transport_displacements=phases["transport"],
        displacement_cost=s.trace.cost_by_kind["displacement"],
        total_cost=s.trace.total_cost,
        trace=s.trace,
    )


def run_worstcase_uni(K: int, alpha: int = 1, cost_model: CostModel | None = None) -> WorstCase:
    """Mover at the LIZ, its partner in the last of ``K`` crystals."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return _worstcase(auto_uni(2 * K, alpha, cost_model), K, 1)


def run_worstcase_multi(K: int, k: int, alpha: int = 1, cost_model: CostModel | None = None) -> WorstCase:
    """End-to-end worst case over ``ceil(K/k)`` sections of ``k`` crystals."""
    if K < 1 or k < 1:
        raise ValueError("K and k must be >= 1")
    sections = -(-K // k)
    trap = new_multi(sections * 2 * alpha * k, k, alpha, cost_model)
    return _worstcase(trap, K, sections)

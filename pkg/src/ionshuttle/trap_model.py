"""Segmented linear trap: topology, occupancy and primitive shuttling operations.

A trap is an array of segments.  An ordinary segment holds at most one
crystal; a LIZ segment may transiently hold up to four ions as several
crystals, which is where splits, merges and the temporary crystal of an ion
exchange live.  Stored crystals respect a minimum pitch of ``alpha``
segments; pairs involving a LIZ are exempt so crystals can approach it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import BadTopology, CapacityExceeded, IllegalOp, UnknownIon

KINDS = ("displacement", "rotation", "split", "merge", "gate_exec")
LIZ_ION_CAPACITY = 4


@dataclass(frozen=True)
class CostModel:
    displacement: float = 2.0
    rotation: float = 10.0
    split: float = 50.0
    merge: float = 50.0

    def __post_init__(self) -> None:
        for k in ("displacement", "rotation", "split", "merge"):
            if getattr(self, k) < 0:
                raise ValueError(f"cost weight {k} must be >= 0")

    @classmethod
    def default(cls) -> "CostModel":
        return cls()

    @classmethod
    def normalized(cls) -> "CostModel":
        """Displacement set to 1, the other weights kept in the same ratio."""
        return cls().scaled(0.5)

    @classmethod
    def counting(cls) -> "CostModel":
        """Every primitive costs 1; totals become operation counts."""
        return cls(1.0, 1.0, 1.0, 1.0)

    @classmethod
    def named(cls, name: str) -> "CostModel":
        presets = {"default": cls.default, "normalized": cls.normalized, "counting": cls.counting}
        try:
            return presets[name]()
        except KeyError:
            raise ValueError(f"unknown cost model {name!r}") from None

    def scaled(self, factor: float) -> "CostModel":
        return CostModel(self.displacement * factor, self.rotation * factor,
                         self.split * factor, self.merge * factor)

    def weight(self, kind: str) -> float:
        if kind == "gate_exec":
            return 0.0
        if kind not in KINDS:
            raise ValueError(f"unknown op kind {kind!r}")
        return getattr(self, kind)

    def op(self, kind: str, seg: int, **kw) -> "ShuttleOp":
        return ShuttleOp(kind, seg, cost=self.weight(kind), **kw)


@dataclass(frozen=True)
class ShuttleOp:
    """One primitive action.

    ``slot`` picks a crystal inside a multi-crystal (LIZ) segment; for a merge
    it is the left one of the two singletons.  ``phase`` tags displacements
    with their purpose (``shift``, ``exchange``, ``transport``) for analysis.
    """

    kind: str
    seg: int
    to: int | None = None
    slot: int = 0
    gate: int | None = None
    ions: tuple[int, ...] = ()
    cost: float = 0.0
    phase: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown op kind {self.kind!r}")
        if self.kind == "displacement" and (self.to is None or abs(self.to - self.seg) != 1):
            raise ValueError("displacement must move to an adjacent segment")

    def as_record(self, cum: float) -> dict:
        rec: dict = {"op": self.kind, "seg": self.seg}
        if self.kind == "displacement":
            rec["to"] = self.to
        if self.kind in ("rotation", "split", "merge"):
            rec["slot"] = self.slot
        if self.kind == "gate_exec":
            rec["gate"] = self.gate
            rec["ions"] = list(self.ions)
        if self.phase:
            rec["phase"] = self.phase
        rec["cost"] = _num(self.cost)
        rec["cum"] = _num(cum)
        return rec


def _num(x: float) -> int | float:
    return int(x) if float(x).is_integer() else x


@dataclass
class Crystal:
    ions: list[int]

    def __post_init__(self) -> None:
        if len(self.ions) not in (1, 2):
            raise ValueError("a crystal holds one or two ions")

    def __len__(self) -> int:
        return len(self.ions)


@dataclass(frozen=True)
class Topology:
    num_segments: int
    liz_positions: tuple[int, ...]
    alpha: int = 1
    k: int | None = None
    sections: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.num_segments < 1:
            raise BadTopology("trap needs at least one segment")
        if self.alpha < 1:
            raise BadTopology("alpha must be a positive integer")
        if not self.liz_positions:
            raise BadTopology("trap needs at least one LIZ")
        if any(b <= a for a, b in zip(self.liz_positions, self.liz_positions[1:])):
            raise BadTopology("LIZ positions must be strictly increasing")
        if not all(0 <= p < self.num_segments for p in self.liz_positions):
            raise BadTopology(f"LIZ outside 0..{self.num_segments - 1}")
        if not self.sections:
            object.__setattr__(self, "sections", ((0, self.num_segments),))
        if len(self.sections) != len(self.liz_positions):
            raise BadTopology("one section per LIZ required")

    @property
    def is_multi(self) -> bool:
        return self.k is not None

    def is_liz(self, seg: int) -> bool:
        return seg in self.liz_positions

    def section_of(self, seg: int) -> int:
        for i, (lo, hi) in enumerate(self.sections):
            if lo <= seg < hi:
                return i
        raise IndexError(f"segment {seg} outside any section")


class TrapState:
    """Mutable machine model; single writer."""

    def __init__(self, topology: Topology, cost_model: CostModel | None = None) -> None:
        self.topology = topology
        self.cost_model = cost_model or CostModel.default()
        self.segments: list[list[Crystal]] = [[] for _ in range(topology.num_segments)]
        self.ion_seg: dict[int, int] = {}
        self.ledger = 0.0
        self._occupied: set[int] = set()

    # -- queries -----------------------------------------------------------

    @property
    def alpha(self) -> int:
        return self.topology.alpha

    def is_empty(self) -> bool:
        return not self.ion_seg

    def occupied(self) -> list[int]:
        return sorted(self._occupied)

    def chain(self) -> list[tuple[int, int, Crystal]]:
        """All crystals left to right as ``(segment, slot, crystal)``."""
        return [(s, i, c) for s in sorted(self._occupied) for i, c in enumerate(self.segments[s])]

    def locate(self, ion: int) -> tuple[int, int, int]:
        """Return ``(segment, slot, position)`` of an ion."""
        try:
            seg = self.ion_seg[ion]
        except KeyError:
            raise UnknownIon(f"ion {ion} is not in the trap") from None
        for slot, c in enumerate(self.segments[seg]):
            if ion in c.ions:
                return seg, slot, c.ions.index(ion)
        raise AssertionError("ion index out of sync")  # pragma: no cover

    def crystal_of(self, ion: int) -> Crystal:
        seg, slot, _ = self.locate(ion)
        return self.segments[seg][slot]

    def chain_index(self, ion: int) -> int:
        seg, slot, _ = self.locate(ion)
        idx = 0
        for s in sorted(self._occupied):
            if s == seg:
                return idx + slot
            idx += len(self.segments[s])
        raise AssertionError("ion index out of sync")  # pragma: no cover

    def ions(self) -> list[int]:
        return sorted(self.ion_seg)

    def layout(self) -> list[tuple[int, tuple[int, ...]]]:
        return [(s, tuple(c.ions)) for s, _, c in self.chain()]

    def copy(self) -> "TrapState":
        new = TrapState(self.topology, self.cost_model)
        new.segments = [[Crystal(list(c.ions)) for c in seg] for seg in self.segments]
        new.ion_seg = dict(self.ion_seg)
        new.ledger = self.ledger
        new._occupied = set(self._occupied)
        return new

    def spacing_ok(self) -> bool:
        occ = self.occupied()
        for a, b in zip(occ, occ[1:]):
            if b - a < self.alpha and not (self.topology.is_liz(a) or self.topology.is_liz(b)):
                return False
        for s in occ:
            n = len(self.segments[s])
            if not self.topology.is_liz(s) and n > 1:
                return False
        return True

    # -- internal mutation ------------------------------------------------

    def _place(self, seg: int, slot: int, crystal: Crystal) -> None:
        self.segments[seg].insert(slot, crystal)
        self._occupied.add(seg)
        for ion in crystal.ions:
            self.ion_seg[ion] = seg

    def _take(self, seg: int, slot: int) -> Crystal:
        c = self.segments[seg].pop(slot)
        if not self.segments[seg]:
            self._occupied.discard(seg)
        return c


def new_uni(num_segments: int = 32, liz: int = 19, alpha: int = 1,
            cost_model: CostModel | None = None) -> TrapState:
    if not 0 <= liz < num_segments:
        raise BadTopology(f"LIZ {liz} outside 0..{num_segments - 1}")
    return TrapState(Topology(num_segments, (liz,), alpha), cost_model)


def new_multi(num_segments: int, k: int, alpha: int = 1,
              cost_model: CostModel | None = None) -> TrapState:
    """Sections of ``2*alpha*k`` segments, each with its LIZ in the middle."""
    if k < 1 or alpha < 1:
        raise BadTopology("k and alpha must be positive")
    span = 2 * alpha * k
    n_liz = num_segments // span
    if n_liz < 1:
        raise BadTopology(f"{num_segments} segments cannot host one section of {span}")
    lizs = tuple(j * span + alpha * k for j in range(n_liz))
    sections = tuple((j * span, (j + 1) * span) for j in range(n_liz))
    return TrapState(Topology(num_segments, lizs, alpha, k, sections), cost_model)


def auto_uni(num_ions: int, alpha: int = 1, cost_model: CostModel | None = None) -> TrapState:
    """Uni-LIZ trap just large enough to slide a full chain across the LIZ."""
    k = max(1, (num_ions + 1) // 2)
    return new_uni(2 * alpha * k + 1, alpha * k, alpha, cost_model)


def load(trap: TrapState, ordering: Sequence[int]) -> TrapState:
    """Pair consecutive ions into crystals and place them starting at the LIZ."""
    if not trap.is_empty():
        raise CapacityExceeded("trap already loaded")
    if sorted(ordering) != list(range(len(ordering))):
        raise ValueError("ordering must be a permutation of 0..M-1")
    crystals = [Crystal(list(ordering[i:i + 2])) for i in range(0, len(ordering), 2)]
    topo, a = trap.topology, trap.alpha
    if topo.is_multi:
        k = topo.k
        if len(crystals) > k * len(topo.liz_positions):
            raise CapacityExceeded(
                f"{len(crystals)} crystals exceed {len(topo.liz_positions)} sections of {k}")
        for i, c in enumerate(crystals):
            sec, j = divmod(i, k)
            trap._place(topo.liz_positions[sec] + a * j, 0, c)
    else:
        liz = topo.liz_positions[0]
        last = liz + a * (len(crystals) - 1)
        if last >= topo.num_segments:
            raise CapacityExceeded(
                f"{len(crystals)} crystals need segment {last}, trap has {topo.num_segments}")
        for i, c in enumerate(crystals):
            trap._place(liz + a * i, 0, c)
    return trap


def _check_spacing_at(trap: TrapState, seg: int) -> None:
    if trap.topology.is_liz(seg):
        return
    for s in range(max(0, seg - trap.alpha + 1), min(trap.topology.num_segments, seg + trap.alpha)):
        if s != seg and trap.segments[s] and not trap.topology.is_liz(s):
            raise IllegalOp("displacement", f"segment {seg} within {trap.alpha} of occupied segment {s}")


def apply(trap: TrapState, op: ShuttleOp) -> float:
    """Apply one primitive to ``trap`` in place and return its cost."""
    topo = trap.topology
    if op.cost != trap.cost_model.weight(op.kind):
        raise IllegalOp(op.kind, f"cost {op.cost} does not match the cost model")
    if not 0 <= op.seg < topo.num_segments:
        raise IllegalOp(op.kind, f"segment {op.seg} outside the trap")
    here = trap.segments[op.seg]

    if op.kind == "displacement":
        to = op.to
        if not 0 <= to < topo.num_segments:
            raise IllegalOp("displacement", f"target segment {to} outside the trap")
        if not here:
            raise IllegalOp("displacement", f"segment {op.seg} is empty")
        slot = len(here) - 1 if to > op.seg else 0
        moving = here[slot]
        dest = trap.segments[to]
        if dest:
            if not topo.is_liz(to):
                raise IllegalOp("displacement", f"segment {to} is occupied")
            if sum(len(c) for c in dest) + len(moving) > LIZ_ION_CAPACITY:
                raise IllegalOp("displacement", f"LIZ {to} would exceed {LIZ_ION_CAPACITY} ions")
        dest_slot = 0 if to > op.seg else len(dest)
        crystal = trap._take(op.seg, slot)
        trap._place(to, dest_slot, crystal)
        try:
            _check_spacing_at(trap, to)
        except IllegalOp:
            trap._take(to, dest_slot)
            trap._place(op.seg, slot, crystal)
            raise
    elif op.kind == "rotation":
        if op.slot >= len(here):
            raise IllegalOp("rotation", f"no crystal at segment {op.seg} slot {op.slot}")
        c = here[op.slot]
        if len(c) != 2:
            raise IllegalOp("rotation", "cannot rotate a single ion")
        c.ions.reverse()
    elif op.kind == "split":
        if not topo.is_liz(op.seg):
            raise IllegalOp("split", f"segment {op.seg} is not a LIZ")
        if op.slot >= len(here) or len(here[op.slot]) != 2:
            raise IllegalOp("split", "split needs a two-ion crystal")
        c = trap._take(op.seg, op.slot)
        trap._place(op.seg, op.slot, Crystal([c.ions[1]]))
        trap._place(op.seg, op.slot, Crystal([c.ions[0]]))
    elif op.kind == "merge":
        if not topo.is_liz(op.seg):
            raise IllegalOp("merge", f"segment {op.seg} is not a LIZ")
        if op.slot + 1 >= len(here) or len(here[op.slot]) != 1 or len(here[op.slot + 1]) != 1:
            raise IllegalOp("merge", "merge needs two neighbouring single ions")
        right = trap._take(op.seg, op.slot + 1)
        left = trap._take(op.seg, op.slot)
        trap._place(op.seg, op.slot, Crystal(left.ions + right.ions))
    elif op.kind == "gate_exec":
        if not op.ions:
            raise IllegalOp("gate_exec", "gate without operands")
        segs = {trap.locate(i)[:2] for i in op.ions}
        if len(op.ions) > 1:
            if len(segs) != 1:
                raise IllegalOp("gate_exec", f"ions {op.ions} are not in one crystal")
            if not topo.is_liz(op.seg) or next(iter(segs))[0] != op.seg:
                raise IllegalOp("gate_exec", f"crystal is not at LIZ {op.seg}")
    trap.ledger += op.cost
    return op.cost


def crystal_distance(trap: TrapState, ion_a: int, ion_b: int) -> int:
    """Number of crystals strictly between the crystals holding the two ions."""
    ia, ib = trap.chain_index(ion_a), trap.chain_index(ion_b)
    return max(0, abs(ia - ib) - 1)


def chain_shift(trap: TrapState, segments: Iterable[int], direction: str, distance: int,
                phase: str = "shift") -> list[ShuttleOp]:
    """Displacement ops moving the crystals on ``segments`` together.

    The ops are returned, not applied; the leading crystal moves first so
    every intermediate state stays legal.
    """
    segs = sorted(set(segments))
    if direction not in ("left", "right"):
        raise ValueError("direction must be 'left' or 'right'")
    if not segs or distance == 0:
        return []
    if distance < 0:
        raise ValueError("distance must be non-negative")
    step = -1 if direction == "left" else 1
    topo = trap.topology
    moved = set(segs)
    for s in segs:
        if len(trap.segments[s]) != 1:
            raise IllegalOp("displacement", f"segment {s} does not hold exactly one crystal")
    for s in segs:
        p = s + step * distance
        if not 0 <= p < topo.num_segments:
            raise IllegalOp("displacement", f"shift moves a crystal to segment {p}, outside the trap")
        lo, hi = min(s, p), max(s, p)
        for other in trap.occupied():
            if other in moved:
                continue
            if lo <= other <= hi:
                raise IllegalOp("displacement", f"path from {s} to {p} crosses occupied segment {other}")
            if abs(other - p) < trap.alpha and not (topo.is_liz(other) or topo.is_liz(p)):
                raise IllegalOp("displacement", f"segment {p} too close to occupied segment {other}")
    order = segs if direction == "left" else segs[::-1]
    ops = []
    for s in order:
        for d in range(distance):
            a = s + step * d
            ops.append(trap.cost_model.op("displacement", a, to=a + step, phase=phase))
    return ops


def write_jsonl(ops: Iterable[ShuttleOp], fh: IO[str]) -> float:
    cum = 0.0
    for op in ops:
        cum += op.cost
        fh.write(json.dumps(op.as_record(cum)) + "\n")
    return cum


def read_jsonl(fh: IO[str], cost_model: CostModel | None = None) -> list[ShuttleOp]:
    ops = []
    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        ops.append(ShuttleOp(
            rec["op"], rec["seg"], to=rec.get("to"), slot=rec.get("slot", 0),
            gate=rec.get("gate"), ions=tuple(rec.get("ions", ())), cost=rec["cost"],
            phase=rec.get("phase", ""),
        ))
    return ops


def from_spec(spec: str, num_ions: int, alpha: int = 1,
              cost_model: CostModel | None = None) -> TrapState:
    """Build an empty trap from ``uni:auto``, ``uni:SEGS:LIZ`` or ``multi:SEGS:K``."""
    parts = spec.split(":")
    try:
        if parts == ["uni", "auto"] or parts == ["uni"]:
            return auto_uni(num_ions, alpha, cost_model)
        if parts[0] == "uni" and len(parts) == 3:
            return new_uni(int(parts[1]), int(parts[2]), alpha, cost_model)
        if parts[0] == "multi" and len(parts) == 3:
            return new_multi(int(parts[1]), int(parts[2]), alpha, cost_model)
    except ValueError as exc:
        if isinstance(exc, BadTopology):
            raise
        raise BadTopology(f"bad trap spec {spec!r}") from None
    raise BadTopology(f"bad trap spec {spec!r}; expected uni:auto, uni:SEGS:LIZ or multi:SEGS:K")

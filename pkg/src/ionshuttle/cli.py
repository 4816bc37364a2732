"""Command-line front end: ``ionshuttle {gen,order,compile,worstcase,sweep}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import circuit_gen, cost_analysis
from .errors import IonShuttleError
from .initial_ordering import order
from .qasm_io import emit, parse
from .shuttle_engine import EngineConfig, compile_circuit, run_worstcase_multi, run_worstcase_uni
from .trap_model import CostModel

log = logging.getLogger("ionshuttle")

SCHEMA = 1
SWEEP_COLUMNS = (
    "family", "size", "n_qubits", "ordering", "trap", "reorg",
    "n_gates", "n_2q", "splits", "merges", "rotations", "displacements", "exchanges",
    "total_cost", "fit_splitmerge", "fit_all", "fit_splitmerge_count",
    "max_cd", "mean_cd", "reorg_count", "error",
)
WORSTCASE_COLUMNS = ("K", "L", "k", "exact", "analytic", "simulated", "delta")


class UsageError(Exception):
    pass


def int_list(text: str) -> list[int]:
    """``8``, ``4,8,16``, ``2..32`` or ``2..32:2`` (inclusive)."""
    out: list[int] = []
    try:
        for part in filter(None, text.split(",")):
            if ".." in part:
                rng, _, step = part.partition(":")
                lo, hi = (int(x) for x in rng.split(".."))
                out += range(lo, hi + 1, int(step) if step else 1)
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    return out


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _write_csv(rows: Sequence[Sequence], columns: Sequence[str], path: str | None) -> None:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _read_circuit(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    circ = parse(text)
    for w in circ.warnings:
        log.warning(w)
    return circ


def _engine_config(args) -> EngineConfig:
    try:
        return EngineConfig(reorg_enabled=args.reorg == "on", window=args.window,
                            break_divisor=args.break_divisor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    circ = circuit_gen.generate(args.circuit, args.size)
    text = emit(circ)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_order(args) -> int:
    circ = _read_circuit(args.inp)
    print(json.dumps(order(circ, args.method).as_list()))
    return 0


def cmd_compile(args) -> int:
    circ = _read_circuit(args.inp)
    comp = compile_circuit(circ, args.ordering, args.trap, _engine_config(args), args.alpha,
                           CostModel.named(args.cost_model), args.lowering)
    report = cost_analysis.build_report(comp.circuit, comp.trace, args.fit_denominator).summary()
    if args.trace:
        with open(args.trace, "w") as fh:
            comp.trace.write_jsonl(fh)
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def worstcase_rows(Ks: Sequence[int], Ls: Sequence[int], alpha: int = 1,
                   P: float | None = None) -> list[tuple]:
    """Analytic vs simulated worst case, in displacement units."""
    cm = CostModel.normalized()
    if P is None:
        P = cost_analysis.measure_P(alpha, cm)
    rows = []
    for K in Ks:
        for L in Ls:
            k, exact = cost_analysis.section_size(K, L)
            if L == 1:
                analytic = cost_analysis.worst_case_uni(K, alpha, P)
                sim = run_worstcase_uni(K, alpha, cm).displacement_cost
            else:
                analytic = cost_analysis.worst_case_multi(K, L, alpha, P)
                sim = run_worstcase_multi(K, k, alpha, cm).displacement_cost
            rows.append((K, L, k, int(exact), analytic, sim, sim - analytic))
    return rows


def cmd_worstcase(args) -> int:
    if any(K < 1 for K in args.K) or any(L < 1 for L in args.L):
        raise UsageError("K and L must be >= 1")
    try:
        P = None if args.P == "auto" else float(args.P)
    except ValueError:
        raise UsageError(f"--P must be 'auto' or a number, got {args.P!r}") from None
    _write_csv(worstcase_rows(args.K, args.L, args.alpha, P), WORSTCASE_COLUMNS, args.csv)
    return 0


@dataclass(frozen=True)
class SweepJob:
    family: str
    size: int
    ordering: str
    trap: str
    reorg: bool
    alpha: int
    cost_model: str
    cd_dir: str | None = None
    denominator: str = "all"


def run_job(job: SweepJob) -> tuple:
    fam = circuit_gen.FAMILIES[job.family]
    head = (job.family, job.size, fam.qubits(job.size), job.ordering, job.trap, "on" if job.reorg else "off")
    try:
        circ = circuit_gen.generate(job.family, job.size)
        comp = compile_circuit(circ, job.ordering, job.trap, EngineConfig(reorg_enabled=job.reorg),
                               job.alpha, CostModel.named(job.cost_model))
        rep = cost_analysis.build_report(comp.circuit, comp.trace, job.denominator)
    except IonShuttleError as exc:
        return head + ("",) * (len(SWEEP_COLUMNS) - len(head) - 1) + (f"{exc.code}: {exc}",)
    if job.cd_dir:
        name = f"{job.family}_{job.size}_{job.ordering}_{'reorg' if job.reorg else 'plain'}.csv"
        with open(Path(job.cd_dir) / name, "w") as fh:
            fh.write("gate,cd\n")
            fh.writelines(f"{g},{d}\n" for g, d in zip(comp.trace.cd_gates, comp.trace.cd_series))
    s = rep.summary()
    return head + (
        s["n_gates"], s["n_2q"], s["splits"], s["merges"], s["rotations"], s["displacements"],
        s["exchanges"], s["total_cost"], rep.fit_splitmerge, rep.fit_all, rep.fit_splitmerge_count,
        rep.max_cd, rep.mean_cd, s["reorg_count"], "",
    )


def sweep_jobs(families: Sequence[str], qubits: Sequence[int], orderings: Sequence[str],
               traps: Sequence[str], reorgs: Sequence[bool], alpha: int = 1,
               cost_model: str = "default", cd_dir: str | None = None,
               denominator: str = "all") -> list[SweepJob]:
    jobs = []
    for name in families:
        if name not in circuit_gen.FAMILIES:
            raise UsageError(f"unknown circuit family {name!r}")
        fam = circuit_gen.FAMILIES[name]
        sizes: list[int] = []
        for q in qubits:
            s = fam.size_for_qubits(q)
            if s is None:
                log.warning("%s: no legal size for %d qubits, skipped", name, q)
                continue
            if fam.qubits(s) != q:
                log.warning("%s: %d qubits snapped to %d", name, q, fam.qubits(s))
            if s not in sizes:
                sizes.append(s)
        for s in sizes:
            for o in orderings:
                for t in traps:
                    for r in reorgs:
                        jobs.append(SweepJob(name, s, o, t, r, alpha, cost_model, cd_dir, denominator))
    return jobs


def run_sweep(jobs: Sequence[SweepJob], workers: int = 1) -> list[tuple]:
    cap = os.environ.get("ION_SHUTTLE_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            log.warning("ignoring ION_SHUTTLE_THREADS=%r", cap)
    if workers <= 1 or len(jobs) <= 1:
        return [run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs))


def cmd_sweep(args) -> int:
    for o in args.ordering:
        if o not in ("cio", "oai"):
            raise UsageError(f"unknown ordering {o!r}")
    reorgs = []
    for r in args.reorg:
        if r not in ("on", "off"):
            raise UsageError("--reorg takes on/off values")
        reorgs.append(r == "on")
    if args.cd_dir:
        Path(args.cd_dir).mkdir(parents=True, exist_ok=True)
    jobs = sweep_jobs(args.circuit, args.sizes, args.ordering, args.trap, reorgs,
                      args.alpha, args.cost_model, args.cd_dir, args.fit_denominator)
    _write_csv(run_sweep(jobs, args.jobs), SWEEP_COLUMNS, args.csv)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ionshuttle", description="Shuttling compiler for segmented ion traps.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a benchmark circuit as OPENQASM 2.0")
    g.add_argument("--circuit", required=True, choices=sorted(circuit_gen.FAMILIES))
    g.add_argument("--size", required=True, type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("order", help="print an initial ordering as a JSON array")
    o.add_argument("--in", dest="inp", required=True)
    o.add_argument("--method", choices=("cio", "oai"), default="cio")
    o.set_defaults(func=cmd_order)

    c = sub.add_parser("compile", help="compile one circuit and report its costs")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--ordering", choices=("cio", "oai"), default="cio")
    c.add_argument("--trap", default="uni:auto", help="uni:auto, uni:SEGS:LIZ or multi:SEGS:K")
    c.add_argument("--alpha", type=int, default=1)
    c.add_argument("--reorg", choices=("on", "off"), default="off")
    c.add_argument("--window", type=int, default=8)
    c.add_argument("--break-divisor", type=float, default=12.0)
    c.add_argument("--cost-model", choices=("default", "normalized", "counting"), default="default")
    c.add_argument("--lowering", choices=("pairwise", "cnot6"), default="pairwise")
    c.add_argument("--fit-denominator", choices=cost_analysis.DENOMINATORS, default="all")
    c.add_argument("--trace")
    c.add_argument("--report")
    c.add_argument("--seed", type=int, help="accepted for compatibility; the engine is deterministic")
    c.set_defaults(func=cmd_compile)

    w = sub.add_parser("worstcase", help="analytic vs simulated worst-case displacement cost")
    w.add_argument("--K", type=int_list, required=True)
    w.add_argument("--L", type=int_list, default=[1])
    w.add_argument("--alpha", type=int, default=1)
    w.add_argument("--P", default="auto", help="'auto' measures it from one exchange")
    w.add_argument("--csv")
    w.set_defaults(func=cmd_worstcase)

    s = sub.add_parser("sweep", help="parameter sweep written as CSV")
    s.add_argument("--circuit", type=lambda t: t.split(","), required=True)
    s.add_argument("--sizes", type=int_list, required=True, help="qubit counts, e.g. 4..32:4")
    s.add_argument("--ordering", type=lambda t: t.split(","), default=["cio", "oai"])
    s.add_argument("--trap", type=lambda t: t.split(","), default=["uni:auto"])
    s.add_argument("--reorg", type=lambda t: t.split(","), default=["off"])
    s.add_argument("--alpha", type=int, default=1)
    s.add_argument("--cost-model", choices=("default", "normalized", "counting"), default="default")
    s.add_argument("--fit-denominator", choices=cost_analysis.DENOMINATORS, default="all")
    s.add_argument("--cd-dir", help="write one gate,cd file per run here")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--csv")
    s.add_argument("--seed", type=int, help="accepted for compatibility; the engine is deterministic")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ionshuttle: usage error: {exc}", file=sys.stderr)
        return 2
    except IonShuttleError as exc:
        print(f"ionshuttle: {exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Tables behind each CLI subcommand, and their CSV/JSON serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import __version__, memory, oracles, protocols
from .bell import syndrome_of
from .memory import PUBLISHED_T_W, ScenarioSpec, TimingParams
from .protocols import Protocol, TargetUnreachable
from .statevector import ImpossibleOutcomeError, parse_circuit

__all__ = [
    "RunConfig",
    "TableArtifact",
    "cmd_curves",
    "cmd_decay",
    "cmd_iterate",
    "cmd_tables",
    "cmd_verify",
    "COMMANDS",
]

FORMATS = ("csv", "json")

# published chain results: (f_in, f_target, protocol) -> (rounds, pairs, p_pass)
PUBLISHED_TABLE2 = {
    (0.8, 0.9, Protocol.BBPSSW): (3, 16, 0.0401),
    (0.8, 0.9, Protocol.EDC): (1, 4, 0.4669),
    (0.85, 0.9, Protocol.BBPSSW): (2, 8, 0.3324),
    (0.85, 0.9, Protocol.EDC): (1, 4, 0.5572),
    (0.9, 0.95, Protocol.BBPSSW): (3, 16, 0.2029),
    (0.9, 0.95, Protocol.EDC): (1, 4, 0.6731),
}
PUBLISHED_THRESHOLD = 0.6323
PUBLISHED_CROSSOVER = 0.6675

EXPECTED_CLASS_COUNTS = {0: (1, 1), 1: (0, 0), 2: (18, 4), 3: (24, 4), 4: (21, 7)}


@dataclass
class RunConfig:
    command: str = "curves"
    grid: tuple[float, float, float] = (0.5, 1.0, 0.005)
    scenarios: tuple[ScenarioSpec, ...] = memory.SCENARIOS
    timing: TimingParams = field(default_factory=TimingParams)
    fmt: str = "csv"
    out: str | None = None
    seed: int = 20240601
    f0s: tuple[float, ...] = (0.65, 0.70, 0.75, 0.80)
    rounds: int = 5
    t_grid: tuple[float, float, float] = (0.0, 0.1, 0.001)
    circuit: str | None = None
    experimental: bool = False

    def __post_init__(self) -> None:
        for name in ("grid", "t_grid"):
            start, stop, step = getattr(self, name)
            if not step > 0 or not start < stop:
                raise ValueError(f"{name} needs start < stop and step > 0, got {start},{stop},{step}")
        if self.fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.fmt!r}")
        if self.rounds < 0:
            raise ValueError("rounds must be non-negative")

    def meta(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "grid": list(self.grid),
            "scenarios": [[s.f_in, s.f_target] for s in self.scenarios],
            "timing": {
                "t_s": self.timing.t_s,
                "t_d": self.timing.t_d,
                "t_m": self.timing.t_m,
                "t_cc": self.timing.t_cc,
            },
            "seed": self.seed,
            "f0": list(self.f0s),
            "rounds": self.rounds,
            "t_grid": list(self.t_grid),
            "circuit": self.circuit,
            "experimental": self.experimental,
            "version": __version__,
        }


def grid_points(start: float, stop: float, step: float) -> list[float]:
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _display(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.6g}")
    return "" if value is None else value


def _csv_cell(value: Any) -> str:
    value = _display(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


@dataclass
class TableArtifact:
    name: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)
    failed: bool = False

    def add(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} cells, table {self.name} has {len(self.columns)} columns")
        self.rows.append(list(values))

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        def raw(v: Any) -> Any:
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        doc = {
            "meta": {"name": self.name, **self.meta},
            "columns": self.columns,
            "rows": [[_display(v) for v in row] for row in self.rows],
            "raw": [[raw(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _artifact(cfg: RunConfig, name: str, columns: list[str]) -> TableArtifact:
    return TableArtifact(name, columns + ["provenance"], meta=cfg.meta())


def cmd_curves(cfg: RunConfig) -> TableArtifact:
    table = _artifact(cfg, "curves", ["f_in", "f_out_edc", "f_out_bbpssw", "y_edc", "y_bbpssw"])

    def row(f: float, note: str) -> None:
        edc, bb = protocols.edc_step(f), protocols.bbpssw_step(f)
        table.add(f, edc.f_out, bb.f_out, 0.5 * edc.p_pass, 0.5 * bb.p_pass**2, note)

    for f in grid_points(*cfg.grid):
        if 0.0 <= f <= 1.0:
            row(f, "computed")
    threshold = protocols.find_purification_threshold()
    crossover = protocols.find_crossover()
    row(threshold, f"computed: EDC purification threshold; published {PUBLISHED_THRESHOLD}")
    row(crossover, f"computed: EDC/BBPSSW crossover; published {PUBLISHED_CROSSOVER}")
    return table


def cmd_iterate(cfg: RunConfig) -> TableArtifact:
    table = _artifact(cfg, "iterate", ["f0", "round", "f_edc", "f_bbpssw"])
    for f0 in cfg.f0s:
        edc = protocols.iterate(Protocol.EDC, f0, cfg.rounds)
        bb = protocols.iterate(Protocol.BBPSSW, f0, cfg.rounds)
        for r, (fe, fb) in enumerate(zip(edc.fidelities, bb.fidelities)):
            table.add(f0, r, fe, fb, "computed")
    return table


def cmd_tables(cfg: RunConfig) -> TableArtifact:
    table = _artifact(
        cfg,
        "tables",
        ["table", "f_in", "f_target", "protocol", "rounds", "pairs", "k",
         "value", "published_value", "t_k", "advantage"],
    )
    for sc in cfg.scenarios:
        for proto in (Protocol.BBPSSW, Protocol.EDC):
            printed = PUBLISHED_TABLE2.get((sc.f_in, sc.f_target, proto))
            published_p = printed[2] if printed else None
            try:
                plan = protocols.chain_plan(proto, sc.f_in, sc.f_target)
            except TargetUnreachable as exc:
                table.add("table2", sc.f_in, sc.f_target, proto.value, None, None, None,
                          None, published_p, None, None, f"error: {exc}")
                continue
            if printed is None:
                note = "computed"
            elif abs(plan.joint_pass_prob - published_p) <= 1e-4:
                note = "both: computed matches published"
            else:
                note = (f"computed {plan.joint_pass_prob:.4f}; published {published_p} differs "
                        "(all tree nodes must pass)")
            table.add("table2", sc.f_in, sc.f_target, proto.value, plan.rounds,
                      plan.pairs_required, None, plan.joint_pass_prob, published_p, None, None, note)

    report, deadlines = memory.reproduce_table3(cfg.timing, cfg.scenarios)
    for sc, k, threshold in report.rows:
        ds = deadlines[(sc.f_in, sc.f_target)]
        t_k = ds.t_k[k]
        adv = memory.advantage_condition(memory.t_w_edc(t_k, k, cfg.timing), ds.t_w_bbpssw)
        printed = memory.PUBLISHED_TABLE3[(sc.f_in, sc.f_target)][k]
        table.add("table3", sc.f_in, sc.f_target, "EDC", None, None, k, threshold, printed,
                  t_k, adv, "both: t_k inverted from published threshold, threshold recomputed")
    for sc in cfg.scenarios:
        if (sc.f_in, sc.f_target) not in memory.PUBLISHED_TABLE3:
            table.add("table3", sc.f_in, sc.f_target, "EDC", None, None, None, None, None,
                      None, None, "no published thresholds for this scenario")
        if cfg.experimental:
            _experimental_rows(table, sc, cfg.timing)
    return table


def _experimental_rows(table: TableArtifact, sc: ScenarioSpec, timing: TimingParams) -> None:
    try:
        ds = memory.experimental_deadlines(sc)
    except (ValueError, TargetUnreachable) as exc:
        table.add("table3-model", sc.f_in, sc.f_target, "EDC", None, None, None, None, None,
                  None, None, f"error: {exc}")
        return
    for k, t_k in sorted(ds.t_k.items()):
        threshold = memory.tcc_threshold(t_k, k, ds.t_w_bbpssw, timing)
        adv = memory.advantage_condition(memory.t_w_edc(t_k, k, timing), ds.t_w_bbpssw)
        table.add("table3-model", sc.f_in, sc.f_target, "EDC", None, None, k, threshold, None,
                  t_k, adv, "experimental: model-based deadline, not comparable to published values")


def cmd_decay(cfg: RunConfig) -> TableArtifact:
    table = _artifact(cfg, "decay", ["f_in", "f_target", "series", "t", "fidelity"])
    times = grid_points(*cfg.t_grid)
    logical = memory.decay_curve("logical", 1.0, times)
    for sc in cfg.scenarios:
        try:
            plan = protocols.chain_plan(Protocol.BBPSSW, sc.f_in, sc.f_target)
            t_w = memory.t_w_bbpssw(sc)
        except (TargetUnreachable, ValueError) as exc:
            table.add(sc.f_in, sc.f_target, "error", None, None, f"error: {exc}")
            continue
        for t, f in memory.decay_curve("physical", plan.final_fidelity, times):
            table.add(sc.f_in, sc.f_target, "physical", t, f, "computed")
        for t, f in logical:
            table.add(sc.f_in, sc.f_target, "logical", t, f, "experimental: 8-qubit dephasing model")
        printed = PUBLISHED_T_W.get((sc.f_in, sc.f_target))
        note = f"computed {t_w:.8f} (display {t_w:.4f})"
        if printed is not None:
            note += f"; published {printed}"
        table.add(sc.f_in, sc.f_target, "marker:T_W", t_w, sc.f_target, note)
        thresholds = memory.PUBLISHED_TABLE3.get((sc.f_in, sc.f_target))
        if thresholds:
            ds = memory.deadlines_from_table3(sc, sorted(thresholds.items()), cfg.timing, t_w)
            for k, t_k in sorted(ds.t_k.items()):
                table.add(sc.f_in, sc.f_target, f"marker:t_{k}", t_k, None,
                          "derived: inverted from published threshold")
        if cfg.experimental:
            try:
                ds = memory.experimental_deadlines(sc)
            except ValueError as exc:
                table.add(sc.f_in, sc.f_target, "error", None, None, f"error: {exc}")
            else:
                for k, t_k in sorted(ds.t_k.items()):
                    table.add(sc.f_in, sc.f_target, f"model:t_{k}", t_k, None,
                              "experimental: model-based deadline")
    return table


def cmd_verify(cfg: RunConfig) -> TableArtifact:
    table = _artifact(cfg, "verify", ["check", "passed", "max_error", "tolerance"])

    def check(name: str, error: float, tol: float, detail: str) -> None:
        ok = bool(error <= tol)
        table.failed |= not ok
        table.add(name, ok, error, tol, detail)

    counts = oracles.enumerate_edc_oracle(0.5).by_weight()
    mismatch = sum(counts.get(w, (0, 0)) != v for w, v in EXPECTED_CLASS_COUNTS.items())
    shown = ", ".join(f"w{w}: {p}/{c}" for w, (p, c) in counts.items())
    check("enumeration_class_counts", float(mismatch), 0.0, f"computed {shown}; published coefficients 1, 18/4, 24/4, 21/7")

    worst = 0.0
    for f in np.linspace(0.0, 1.0, 101):
        res = oracles.enumerate_edc_oracle(float(f))
        step = protocols.edc_step(float(f))
        worst = max(worst, abs(res.pass_prob - step.p_pass), abs(res.correct_prob - step.p_correct))
    check("enumeration_vs_closed_form", worst, 1e-12, "computed: 101-point grid on [0, 1]")

    bad = sum(
        tuple(syndrome_of(c.pattern)) != (c.s0, c.s1) for c in oracles.classify_patterns()
    )
    check("syndrome_vs_simulated_parity", float(bad), 0.0, "computed: 256 patterns")

    if cfg.circuit is not None:
        with open(cfg.circuit, encoding="utf-8") as fh:
            gates = parse_circuit(fh.read())
        source = cfg.circuit
    else:
        gates = parse_circuit(oracles.PREPARATION_CIRCUIT)
        source = "built-in preparation circuit"
    try:
        prepared = oracles.run_encoding_circuit(gates)
    except ImpossibleOutcomeError as exc:
        check("circuit_vs_logical_state", 1.0, 1e-10, f"computed: {source}: {exc}")
    else:
        fid = prepared.fidelity(oracles.build_logical_state())
        check("circuit_vs_logical_state", 1.0 - fid, 1e-10, f"computed: {source}")

    decoded = oracles.decode(oracles.build_logical_state())
    check("decode_logical_state", 1.0 - oracles.two_bell_pair_fidelity(decoded), 1e-10,
          "computed: inverse encoder yields two Phi+ pairs")

    unitaries = oracles.random_unitaries(50, cfg.seed)
    failures = sum(not oracles.transpose_identity_check(u) for u in unitaries)
    check("transpose_identity", float(failures), 0.0, f"computed: 50 Haar unitaries, seed {cfg.seed}")

    ts = [0.01 * i for i in range(0, 21)]
    fl = [oracles.dephase_logical_state(t) for t in ts]
    not_falling = sum(b >= a for a, b in zip(fl, fl[1:]))
    check("logical_decay_monotone", float(not_falling), 0.0, "computed: strict decrease on t = 0, 0.01, ..., 0.2")
    return table


COMMANDS = {
    "curves": cmd_curves,
    "iterate": cmd_iterate,
    "tables": cmd_tables,
    "decay": cmd_decay,
    "verify": cmd_verify,
}

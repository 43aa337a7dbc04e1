"""The fuzzing loop: select, mutate, execute everywhere, score, feed back."""
from __future__ import annotations

import json
import logging
import os
import random
import shutil
import statistics
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from ..abi import AbiSignature, encode_call
from ..harness.metrics import DiffReport, aggregate, crash_vector, refine
from ..harness.runner import BackendHandle, Limits, run_all
from ..inputgen import ValuePool, coerce_value, gen_params
from ..lang.emit import emit_source
from ..lang.parser import ParseError, parse
from ..mutation import (
    ALL_MUTATORS,
    MutationOutcome,
    MutatorWeights,
    NothingMutated,
    StrategyChoice,
    apply_sequence,
    resolve_all,
    select_mutators,
    update_weights,
)
from ..scheduler import SeedPool, admit, prioritize, save_pool
from ..vm.compiler import CompileError, compile_contract
from .config import CampaignConfig, ConfigError, SeedSpec
from .findings import FindingStore, InconsistencyRecord, is_finding, load_finding
from .report import render_text

log = logging.getLogger(__name__)

WEIGHTS_FILE = "weights.json"
REPORT_JSON = "report.json"
REPORT_TXT = "report.txt"
FINDINGS_DIR = "findings"
POOL_DIR = "pool"
MAX_RESELECT = 8


class NoViableSeeds(Exception):
    pass


@dataclass(frozen=True)
class Lineage:
    name: str
    function: str
    signature: AbiSignature
    args: tuple
    calldata: bytes


@dataclass
class CampaignReport:
    seed: int
    strategy: str
    iterations_run: int = 0
    mutants: int = 0
    divergent: int = 0
    out_vul: int = 0
    findings_raw: int = 0
    findings_unique: int = 0
    admissions: int = 0
    compile_failures: int = 0
    reselections: int = 0
    classifications: Dict[str, int] = field(default_factory=dict)
    sub_strategies: Dict[str, int] = field(default_factory=dict)
    ind_table: Dict[str, List[int]] = field(default_factory=dict)
    series: Dict[str, List[float]] = field(default_factory=dict)
    final_weights: Dict[str, float] = field(default_factory=dict)
    first_divergence: Optional[int] = None
    first_gas_divergence: Optional[int] = None
    first_trace_only: Optional[int] = None
    first_finding: Optional[int] = None
    initial_seeds: List[dict] = field(default_factory=list)
    skipped_seeds: List[dict] = field(default_factory=list)
    pool_size: int = 0
    record: float = 0.0
    stopped: str = "budget"
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignReport":
        return cls(**d)


def _load_seed(spec: SeedSpec, cfg: CampaignConfig, pool: ValuePool, rng: random.Random):
    tree = parse(spec.read())
    compiled = compile_contract(tree, spec.function)
    fn = tree.function(compiled.signature.name)
    sig = compiled.signature
    if spec.args is not None:
        if len(spec.args) != len(sig.params):
            raise ConfigError(f"{spec.lineage}: {fn.name} takes {len(sig.params)} arguments, got {len(spec.args)}")
        args = tuple(coerce_value(t, v) for t, v in zip(sig.params, spec.args))
        calldata = encode_call(sig, list(args))
    else:
        values, calldata = gen_params(sig, rng, pool)
        args = tuple(values)
    return tree, Lineage(spec.lineage, fn.name, sig, args, calldata)


def _mutate(entry_tree, weights, choice, rng, report: CampaignReport) -> Tuple[MutationOutcome, str]:
    """Strategy pick plus reselection when nothing in the pick applies."""
    for _ in range(MAX_RESELECT):
        sub = resolve_all(rng) if choice is StrategyChoice.ALL else choice
        selected = select_mutators(weights.ordered(), sub, rng)
        try:
            return apply_sequence(entry_tree, selected, rng), sub.value
        except NothingMutated:
            report.reselections += 1
    # last resort: any single mutator that applies, in random order
    order = list(ALL_MUTATORS)
    rng.shuffle(order)
    for m in order:
        try:
            return apply_sequence(entry_tree, [m], rng), "fallback"
        except NothingMutated:
            continue
    raise NothingMutated(order)


def run_campaign(
    cfg: CampaignConfig,
    handles: Optional[Sequence[BackendHandle]] = None,
    weights: Optional[MutatorWeights] = None,
) -> CampaignReport:
    started = time.perf_counter()
    rng = random.Random(cfg.seed)
    vpool = cfg.value_pool()
    limits = cfg.limits
    own_handles = handles is None
    handles = list(handles) if handles is not None else cfg.handles()
    if len(handles) < 2:
        raise ConfigError("at least 2 backends are required")
    roster = tuple(h.describe() for h in handles)
    report = CampaignReport(cfg.seed, cfg.strategy.value)
    persist = cfg.persist
    findings_dir = os.path.join(cfg.corpus, FINDINGS_DIR) if persist else None
    store = FindingStore(findings_dir)
    if persist:
        os.makedirs(cfg.corpus, exist_ok=True)
        wpath = os.path.join(cfg.corpus, WEIGHTS_FILE)
        if weights is None and os.path.exists(wpath):
            weights = MutatorWeights.load(wpath)
    weights = weights or MutatorWeights.uniform()

    try:
        pool = SeedPool(cap=cfg.pool_cap)
        lineages: Dict[str, Lineage] = {}
        for spec in cfg.seeds:
            try:
                tree, lin = _load_seed(spec, cfg, vpool, rng)
            except (ParseError, CompileError, OSError, KeyError) as exc:
                report.skipped_seeds.append({"seed": spec.lineage, "error": str(exc)})
                continue
            if lin.name in lineages:
                raise ConfigError(f"two seeds share the lineage name {lin.name!r}")
            lineages[lin.name] = lin
            records = run_all(handles, compile_contract(tree, lin.function).code, lin.calldata, limits)
            diff = aggregate(records)
            pool = admit(pool, tree, diff.aggregate_diff, 0, lin.name, force=True)
            report.initial_seeds.append({
                "lineage": lin.name,
                "function": lin.function,
                "args": [a.hex() if isinstance(a, bytes) else a for a in lin.args],
                "aggregate_diff": diff.aggregate_diff,
                "classification": diff.classification.value,
            })
        if not lineages:
            raise NoViableSeeds(f"none of {len(cfg.seeds)} seeds parsed and compiled: {report.skipped_seeds}")

        best = 0.0
        series: List[float] = []
        vectors = []
        classes: Counter = Counter()
        subs: Counter = Counter()
        deadline = None if cfg.wall_clock is None else time.monotonic() + cfg.wall_clock
        for it in range(1, cfg.iterations + 1):
            if deadline is not None and time.monotonic() > deadline:
                report.stopped = "wall-clock"
                break
            entry, pool = prioritize(pool)
            lin = lineages[entry.lineage]
            outcome, sub = _mutate(entry.contract, weights, cfg.strategy, rng, report)
            subs[sub] += 1
            report.mutants += 1
            report.iterations_run = it
            mutant = outcome.mutated
            try:
                code = compile_contract(mutant, lin.function).code
            except CompileError as exc:
                log.warning("iteration %d: mutant does not compile: %s", it, exc)
                report.compile_failures += 1
                series.append(best)
                continue
            calldata = lin.calldata
            if cfg.regenerate_inputs:
                calldata = gen_params(lin.signature, rng, vpool)[1]
            records = run_all(handles, code, calldata, limits)
            diff = aggregate(records)
            classes[diff.classification.value] += 1
            vectors.append(crash_vector(records))
            value = diff.aggregate_diff
            best = max(best, value)
            series.append(best)

            if value > 0:
                report.divergent += 1
                if report.first_divergence is None:
                    report.first_divergence = it
            if diff.max_gas_diff > 0 and report.first_gas_divergence is None:
                report.first_gas_divergence = it
            if diff.max_op_diff > 0 and not diff.out_vul and report.first_trace_only is None:
                report.first_trace_only = it
            if diff.out_vul:
                report.out_vul += 1
            if is_finding(diff):
                if report.first_finding is None:
                    report.first_finding = it
                store.add(InconsistencyRecord(
                    emit_source(mutant), lin.function, calldata, tuple(records), diff, it, lin.name,
                    roster, asdict(limits),
                ))

            delta = value - entry.diff
            weights = update_weights(weights, outcome.applied, delta, value, cfg.alpha)
            before = len(pool.entries), pool.record
            pool = admit(pool, mutant, value, it, lin.name)
            if pool.record != before[1]:
                report.admissions += 1

            if _should_stop(cfg.stop_on, report):
                report.stopped = cfg.stop_on
                break

        names = [h.backend_id for h in handles]
        table = refine(vectors) if vectors else [(0, 0)] * len(names)
        report.ind_table = {n: [a, b] for n, (a, b) in zip(names, table)}
        report.classifications = dict(sorted(classes.items()))
        report.sub_strategies = dict(sorted(subs.items()))
        report.series = {cfg.strategy.value: series}
        report.final_weights = {str(k): v for k, v in weights.as_dict().items()}
        report.findings_raw = store.raw_count
        report.findings_unique = len(store)
        report.pool_size = len(pool.entries)
        report.record = pool.record
        report.wall_time = time.perf_counter() - started
        if persist:
            store.write_index()
            weights.save(os.path.join(cfg.corpus, WEIGHTS_FILE))
            save_pool(pool, os.path.join(cfg.corpus, POOL_DIR), report.iterations_run)
            write_report(cfg, report)
        return report
    finally:
        if own_handles:
            for h in handles:
                h.close()


def _should_stop(stop_on: Optional[str], report: CampaignReport) -> bool:
    if stop_on == "divergence":
        return report.first_divergence is not None
    if stop_on == "gas-divergence":
        return report.first_gas_divergence is not None
    if stop_on == "finding":
        return report.first_finding is not None
    return False


def write_report(cfg: CampaignConfig, report: CampaignReport) -> None:
    os.makedirs(cfg.corpus, exist_ok=True)
    payload = {"config": cfg.to_dict(), "report": report.to_dict()}
    with open(os.path.join(cfg.corpus, REPORT_JSON), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(cfg.corpus, REPORT_TXT), "w") as fh:
        fh.write(render_text(report))


# -- strategy comparison -----------------------------------------------------


def trial_seed(base: int, trial: int) -> int:
    """Campaign seed for one trial; shared by every strategy in that trial."""
    return random.Random(f"{base}/{trial}").getrandbits(63)


@dataclass
class StrategyComparison:
    strategies: List[str]
    trials: int
    iterations: int
    series: Dict[str, List[List[float]]]  # strategy -> per-trial best-so-far
    first_divergence: Dict[str, List[Optional[int]]]
    first_finding: Dict[str, List[Optional[int]]]

    def median_series(self, strategy: str) -> List[float]:
        runs = self.series[strategy]
        width = max(len(r) for r in runs)
        padded = [r + [r[-1] if r else 0.0] * (width - len(r)) for r in runs]
        return [statistics.median(col) for col in zip(*padded)]

    def median_iterations_to_first(self, strategy: str, which: str = "divergence") -> float:
        """Median over trials; a trial that never diverged counts as budget + 1."""
        values = self.first_divergence[strategy] if which == "divergence" else self.first_finding[strategy]
        return statistics.median(self.iterations + 1 if v is None else v for v in values)

    def table(self) -> List[dict]:
        rows = []
        medians = {s: self.median_series(s) for s in self.strategies}
        for k in range(max(len(m) for m in medians.values())):
            row = {"iteration": k + 1}
            for s in self.strategies:
                m = medians[s]
                row[s] = m[k] if k < len(m) else m[-1]
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        d = asdict(self)
        d["median_iterations_to_first_divergence"] = {
            s: self.median_iterations_to_first(s) for s in self.strategies
        }
        return d


def compare_strategies(
    cfg: CampaignConfig,
    strategies: Sequence[StrategyChoice],
    trials: int,
) -> StrategyComparison:
    """Run the same campaign per strategy per trial and collect best-so-far series."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    names = [StrategyChoice(s).value for s in strategies]
    out = StrategyComparison(names, trials, cfg.iterations, {n: [] for n in names},
                             {n: [] for n in names}, {n: [] for n in names})
    for t in range(trials):
        seed = trial_seed(cfg.seed, t)
        for s, name in zip(strategies, names):
            run_cfg = replace(cfg, strategy=StrategyChoice(s), seed=seed, persist=False)
            rep = run_campaign(run_cfg)
            out.series[name].append(rep.series[name])
            out.first_divergence[name].append(rep.first_divergence)
            out.first_finding[name].append(rep.first_finding)
    return out


# -- replay ------------------------------------------------------------------


class StaleFinding(Exception):
    """The backends a finding was recorded against are not available."""


def replay(
    finding_path: str,
    handles: Optional[Sequence[BackendHandle]] = None,
    limits: Optional[Limits] = None,
) -> Tuple[DiffReport, dict]:
    """Re-run a stored finding; returns the fresh report and the stored data.

    Without ``handles`` the roster is rebuilt from the finding itself.
    """
    data = load_finding(finding_path)
    stored_ids = [b["id"] for b in data["backends"]]
    own = handles is None
    if own:
        handles = []
        for b in data["backends"]:
            if b["kind"] == "external" and not (os.path.exists(b["argv"][0]) or shutil.which(b["argv"][0])):
                raise StaleFinding(f"adapter {b['argv'][0]!r} for backend {b['id']!r} is not available")
            try:
                handles.append(BackendHandle.from_description(b))
            except (ValueError, KeyError) as exc:
                raise StaleFinding(f"backend {b.get('id')!r}: {exc}") from None
    by_id = {h.backend_id: h for h in handles}
    missing = [i for i in stored_ids if i not in by_id]
    if missing:
        raise StaleFinding(f"backends {missing} from the finding are not in the roster")
    roster = [by_id[i] for i in stored_ids]
    try:
        tree = parse(data["source"])
        code = compile_contract(tree, data["function"]).code
        lim = limits or Limits(**data["limits"])
        records = run_all(roster, code, bytes.fromhex(data["calldata"]), lim)
        return aggregate(records), data
    finally:
        if own:
            for h in roster:
                h.close()


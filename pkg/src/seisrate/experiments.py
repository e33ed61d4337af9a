"""Multi-seed experiment campaigns: convergence traces, summary statistics
and gateway-sizing sweeps, emitted as CSV.

All randomness derives from a single master seed: the channel of
replication r uses SeedSequence((master, r)) and each (algorithm, budget,
replication) run uses SeedSequence((master, r, algo_index, budget_index)).
Campaigns are therefore exactly reproducible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CapacityLimitError, InstanceFormatError
from .model import ChannelMatrix, generate_rayleigh, load_instance
from .rates import ORDER_FIXED, ORDER_LP, EvaluationMode, search_space_size
from .search import (
    AcoParams,
    HEURISTIC_GW_AVERAGE,
    HEURISTIC_GW_AVERAGE_DEACTIVATION,
    HEURISTIC_NONE,
    PsoParams,
    SearchBudget,
    exhaustive_search,
    run_algorithm,
)

KNOWN_ALGORITHMS = ("es", "dpso", "ampso", "as", "mmas", "sa", "baseline")

TRACE_HEADER = ["algorithm", "budget_m", "budget_i", "replication",
                "iteration", "best_sum_rate"]
SUMMARY_HEADER = ["algorithm", "budget_m", "budget_i", "replications",
                  "mean_final", "std_final", "mse_vs_es"]
SIZING_HEADER = ["algorithm", "num_gws", "num_gps", "replications",
                 "mean_sum_rate", "mean_gp_rate_kbps", "bandwidth_khz"]


def _seed_from(parts):
    return int(np.random.SeedSequence(tuple(parts)).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentSpec:
    """Stage-1 campaign description (see README for the JSON layout)."""

    algorithms: tuple
    budgets: tuple                      # (M, I) pairs
    replications: int = 1
    master_seed: int = 0
    scenario: int = 1
    evaluator: str = ORDER_FIXED
    instance_path: str | None = None
    num_gps: int | None = None
    num_gws: int | None = None
    gp_power: float = 1e-3
    noise_power: float = 1e-3
    output_dir: str = "."
    aco_heuristic: str | None = None    # default: adapted per scenario
    es_cap: int = 2 ** 24

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for algo in self.algorithms:
            if algo not in KNOWN_ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
        if self.instance_path is None and (self.num_gps is None or self.num_gws is None):
            raise ValueError("either instance_path or num_gps/num_gws is required")

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            return cls(
                algorithms=tuple(doc["algorithms"]),
                budgets=tuple((int(m), int(i)) for m, i in doc["budgets"]),
                replications=int(doc.get("replications", 1)),
                master_seed=int(doc.get("master_seed", 0)),
                scenario=int(doc.get("scenario", 1)),
                evaluator=doc.get("evaluator", ORDER_FIXED),
                instance_path=doc.get("instance"),
                num_gps=doc.get("num_gps"),
                num_gws=doc.get("num_gws"),
                gp_power=doc.get("gp_power_mw", 1.0) / 1000.0,
                noise_power=doc.get("noise_power_mw", 1.0) / 1000.0,
                output_dir=doc.get("output_dir", "."),
                aco_heuristic=doc.get("aco_heuristic"),
                es_cap=int(doc.get("es_cap", 2 ** 24)),
            )
        except KeyError as exc:
            raise InstanceFormatError(f"experiment spec missing field {exc}")

    def mode(self):
        policy = ORDER_LP if self.evaluator in (ORDER_LP, "lp") else ORDER_FIXED
        return EvaluationMode.scenario(self.scenario, policy)

    def aco_params(self):
        mode = self.aco_heuristic
        if mode is None:
            mode = (HEURISTIC_GW_AVERAGE if self.scenario == 1
                    else HEURISTIC_GW_AVERAGE_DEACTIVATION)
        return AcoParams(heuristic_mode=mode)

    def channel_for(self, replication):
        if self.instance_path is not None:
            instance = load_instance(self.instance_path)
            if not isinstance(instance, ChannelMatrix):
                raise InstanceFormatError("stage-1 experiments need a channel instance")
            return instance
        return generate_rayleigh(
            self.num_gps, self.num_gws, self.gp_power, self.noise_power,
            _seed_from((self.master_seed, replication)),
        )


def run_experiment(spec, write_traces=True):
    """Execute the campaign; returns summary rows and writes CSV files.

    The mean-squared error column compares each algorithm's final value
    with the per-replication exhaustive optimum and is omitted (empty)
    when the search space exceeds the enumeration cap.
    """
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    mode = spec.mode()
    aco = spec.aco_params()
    pso = PsoParams()

    channels = [spec.channel_for(r) for r in range(spec.replications)]
    es_available = (
        search_space_size(channels[0].num_gps, channels[0].num_gws) <= spec.es_cap
    )
    es_values = None
    if es_available:
        es_values = np.array([exhaustive_search(ch, mode, cap=spec.es_cap)[1]
                              for ch in channels])

    trace_rows = []
    summary_rows = []
    for ai, algo in enumerate(spec.algorithms):
        for bi, (m, i) in enumerate(spec.budgets):
            finals = np.empty(spec.replications)
            for r in range(spec.replications):
                budget = SearchBudget(m, i, seed=_seed_from(
                    (spec.master_seed, r, ai, bi)))
                if algo == "es" and not es_available:
                    raise CapacityLimitError(
                        "exhaustive search requested beyond the enumeration cap"
                    )
                trace = run_algorithm(algo, channels[r], budget, mode,
                                      pso_params=pso, aco_params=aco)
                finals[r] = trace.best_sum_rate
                for it, val in enumerate(trace.best_per_iteration):
                    trace_rows.append([algo, m, i, r, it, repr(float(val))])
            mse = ""
            if es_values is not None:
                mse = repr(float(np.mean((finals - es_values) ** 2)))
            summary_rows.append([
                algo, m, i, spec.replications,
                repr(float(finals.mean())), repr(float(finals.std())), mse,
            ])

    if write_traces:
        _write_csv(outdir / "traces.csv", TRACE_HEADER, trace_rows)
    _write_csv(outdir / "summary.csv", SUMMARY_HEADER, summary_rows)
    return summary_rows


@dataclass(frozen=True)
class GwSizingSpec:
    """Sweep of geophone counts against gateway counts.

    Rates convert from bps/Hz to kbps through the configured bandwidth;
    a deployment cell "supports" its geophones when the average per-GP
    rate stays at or above the required kbps.
    """

    gp_counts: tuple
    gw_counts: tuple
    algorithm: str = "as"
    budget: tuple = (30, 30)
    replications: int = 10
    master_seed: int = 0
    scenario: int = 1
    required_kbps: float = 144.0
    bandwidth_khz: float = 200.0
    gp_power: float = 1e-3
    noise_power: float = 1e-3
    output_dir: str = "."

    def __post_init__(self):
        if not self.gp_counts or not self.gw_counts:
            raise ValueError("gp_counts and gw_counts must be nonempty")
        if min(self.gp_counts) < 1 or min(self.gw_counts) < 1:
            raise ValueError("counts must be positive")
        if self.required_kbps <= 0 or self.bandwidth_khz <= 0:
            raise ValueError("required_kbps and bandwidth_khz must be positive")
        if self.algorithm not in KNOWN_ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            return cls(
                gp_counts=tuple(doc["gp_counts"]),
                gw_counts=tuple(doc["gw_counts"]),
                algorithm=doc.get("algorithm", "as"),
                budget=tuple(doc.get("budget", (30, 30))),
                replications=int(doc.get("replications", 10)),
                master_seed=int(doc.get("master_seed", 0)),
                scenario=int(doc.get("scenario", 1)),
                required_kbps=float(doc.get("required_kbps", 144.0)),
                bandwidth_khz=float(doc.get("bandwidth_khz", 200.0)),
                gp_power=doc.get("gp_power_mw", 1.0) / 1000.0,
                noise_power=doc.get("noise_power_mw", 1.0) / 1000.0,
                output_dir=doc.get("output_dir", "."),
            )
        except KeyError as exc:
            raise InstanceFormatError(f"sizing spec missing field {exc}")


def run_gw_sizing(spec):
    """Run the sweep; returns (rows, supported) where supported maps each
    gateway count to the largest geophone count meeting the threshold."""
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    mode = EvaluationMode.scenario(spec.scenario)
    heuristic = (HEURISTIC_GW_AVERAGE if spec.scenario == 1
                 else HEURISTIC_GW_AVERAGE_DEACTIVATION)
    aco = AcoParams(heuristic_mode=heuristic)
    m, i = spec.budget
    rows = []
    supported = {}
    for n in spec.gw_counts:
        supported[n] = None
        for k in spec.gp_counts:
            sums = np.empty(spec.replications)
            for r in range(spec.replications):
                channel = generate_rayleigh(
                    k, n, spec.gp_power, spec.noise_power,
                    _seed_from((spec.master_seed, n, k, r)),
                )
                budget = SearchBudget(m, i, seed=_seed_from(
                    (spec.master_seed, n, k, r, 1)))
                trace = run_algorithm(spec.algorithm, channel, budget, mode,
                                      aco_params=aco)
                sums[r] = trace.best_sum_rate
            mean_sum = float(sums.mean())
            gp_rate_kbps = mean_sum / k * spec.bandwidth_khz
            rows.append([spec.algorithm, n, k, spec.replications,
                         repr(mean_sum), repr(gp_rate_kbps),
                         repr(spec.bandwidth_khz)])
            if gp_rate_kbps >= spec.required_kbps:
                supported[n] = max(supported[n] or 0, k)
    _write_csv(outdir / "gw_sizing.csv", SIZING_HEADER, rows)
    with open(outdir / "gw_sizing_supported.json", "w", encoding="utf-8") as fh:
        json.dump({"required_kbps": spec.required_kbps,
                   "bandwidth_khz": spec.bandwidth_khz,
                   "max_supported_gps": {str(n): supported[n] for n in supported}},
                  fh, indent=2)
        fh.write("\n")
    return rows, supported


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)

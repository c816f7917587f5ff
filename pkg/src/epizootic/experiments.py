"""Monte-Carlo experiment campaigns over the outbreak model.

A scenario bundles the landscape, parameter sampling ranges, seeding
rules, intervention mode and replicate count. Each replicate draws its
own parameters (and optionally per-center carrying capacities), builds
its intervention configuration, runs the chosen engine and reduces the
trajectory to the three severity metrics. Replicate seeds derive from
the master seed and the replicate index alone, so two campaigns that
differ only in intervention mode are paired run-for-run (common random
numbers), and any campaign is exactly reproducible from its manifest.

Supported intervention modes: none, random/optimal vaccination,
random/optimal dilution, and random/optimal both. Random modes scatter
the default budgets (one dose per individual; a 5% cull) over centers
by a uniform multinomial; optimal modes place the same budgets with the
allocation search.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .abm import SimConfig, WorldSpec, run_simulation
from .core import (EnvironmentGraph, ModelParams, ParamRanges,
                   ValidationError, sample_params)
from .eip import (DilutionSchedule, EipConfiguration, VaccinationSchedule)
from .metrics import build_report
from .ode import integrate
from .optimize import (Allocation, AllocationProblem, OptimizationResult,
                       optimize)

EIP_MODES = ("none", "random-vaccination", "random-dilution", "random-both",
             "optimal-vaccination", "optimal-dilution", "optimal-both")


class ConfigError(ValueError):
    """Bad scenario, graph, ranges or temperature input."""


# ---------------------------------------------------------------------------
# Temperature ingestion
# ---------------------------------------------------------------------------

@dataclass
class TemperatureSeries:
    """Hourly ambient temperatures driving bait-potency decay."""

    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or len(self.values) == 0:
            raise ConfigError("temperature series must be a nonempty vector")
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise ConfigError(f"non-finite temperature at hour {bad}")

    def require_hours(self, horizon: float) -> None:
        if len(self.values) < horizon:
            raise ConfigError(
                f"temperature series covers {len(self.values)} hours, "
                f"horizon needs {horizon:g}")

    @classmethod
    def constant(cls, value: float = 20.0,
                 hours: int = 8760) -> "TemperatureSeries":
        return cls(np.full(hours, float(value)), provenance="constant")


def load_temperature(path) -> TemperatureSeries:
    """Read an hourly (or daily) temperature CSV.

    Expected columns: ``hour,temperature`` or ``day,temperature``. A
    daily file (365/366 rows, or a ``day`` column) is expanded by
    repeating each value for 24 hours.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"{path}: empty temperature file")
        header = [h.strip().lower() for h in header]
        if len(header) < 2 or header[1] != "temperature" \
                or header[0] not in ("hour", "day"):
            raise ConfigError(
                f"{path}: expected columns hour,temperature or "
                f"day,temperature, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2 or not row[1].strip():
                raise ConfigError(f"{path}: missing value on row {lineno}")
            try:
                value = float(row[1])
            except ValueError:
                raise ConfigError(
                    f"{path}: bad temperature {row[1]!r} on row {lineno}")
            if not math.isfinite(value):
                raise ConfigError(f"{path}: non-finite value on row {lineno}")
            rows.append(value)
    if not rows:
        raise ConfigError(f"{path}: no temperature rows")
    values = np.asarray(rows, dtype=float)
    daily = header[0] == "day" or len(values) in (365, 366)
    if daily:
        values = np.repeat(values, 24)
    return TemperatureSeries(values, provenance=str(path))


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------

_SCENARIO_DEFAULTS = {
    "engine": "abs",
    "eip_mode": "none",
    "replicates": 100,
    "seed": 0,
    "horizon": 8760.0,
    "dt": 1.0,
    "seeding": {"initial_infected": 1, "infected_center": "random",
                "occupancy": 0.8},
    "initial_food_fraction": 0.5,
    "initial_stock": 0.0,
    "budgets": {"vaccines_per_individual": 1.0, "dilution_portion": 0.05},
    "eip_time": 0.0,
    "resample_kappa": True,
    "food_balance_ratio": None,
    "population_multiplier": 1.0,
    "movement_multiplier": 1.0,
    "abs_mode": "counts",
    "pdi_mode": "disease",
    "arn_variant": "rabies",
    "strict_uptake_removal": False,
    "workers": 1,
    "optimizer": {"search_replicates": 3, "search_horizon": None,
                  "unit_size": None, "objective": "arn",
                  "alternation_rounds": 2},
}


@dataclass
class Scenario:
    """Fully resolved campaign configuration (inline inputs included)."""

    graph: dict
    ranges: dict = field(default_factory=dict)
    temperature: list | float = 20.0
    engine: str = "abs"
    eip_mode: str = "none"
    replicates: int = 100
    seed: int = 0
    horizon: float = 8760.0
    dt: float = 1.0
    seeding: dict = field(default_factory=lambda: dict(
        _SCENARIO_DEFAULTS["seeding"]))
    initial_food_fraction: float = 0.5
    initial_stock: float = 0.0
    budgets: dict = field(default_factory=lambda: dict(
        _SCENARIO_DEFAULTS["budgets"]))
    eip_time: float = 0.0
    resample_kappa: bool = True
    food_balance_ratio: float | None = None
    population_multiplier: float = 1.0
    movement_multiplier: float = 1.0
    abs_mode: str = "counts"
    pdi_mode: str = "disease"
    arn_variant: str = "rabies"
    strict_uptake_removal: bool = False
    workers: int = 1
    optimizer: dict = field(default_factory=lambda: dict(
        _SCENARIO_DEFAULTS["optimizer"]))

    def __post_init__(self):
        if self.engine not in ("ode", "abs"):
            raise ConfigError(f"engine must be ode or abs, got {self.engine!r}")
        if self.eip_mode not in EIP_MODES:
            raise ConfigError(f"eip_mode must be one of {EIP_MODES}, "
                              f"got {self.eip_mode!r}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.abs_mode not in ("counts", "agents"):
            raise ConfigError("abs_mode must be counts or agents")
        merged_opt = dict(_SCENARIO_DEFAULTS["optimizer"])
        merged_opt.update(self.optimizer)
        self.optimizer = merged_opt
        merged_seed = dict(_SCENARIO_DEFAULTS["seeding"])
        merged_seed.update(self.seeding)
        self.seeding = merged_seed
        merged_budget = dict(_SCENARIO_DEFAULTS["budgets"])
        merged_budget.update(self.budgets)
        self.budgets = merged_budget

    # -- loading ------------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "Scenario":
        data = dict(data)
        if "scenario" in data:  # a manifest wraps the scenario it ran
            inner = dict(data["scenario"])
            inner.setdefault("seed", data.get("master_seed", 0))
            data = inner
        base = Path(base_dir) if base_dir else Path(".")

        def _resolve(key, loader):
            value = data.get(key)
            if isinstance(value, str):
                path = Path(value)
                if not path.is_absolute():
                    path = base / path
                return loader(path)
            return value

        graph = _resolve("graph", lambda p: json.load(open(p)))
        if graph is None:
            raise ConfigError("scenario must name a graph")
        EnvironmentGraph.from_dict(graph)  # validate eagerly
        ranges = _resolve("ranges", lambda p: json.load(open(p))) or {}
        ParamRanges.from_dict(ranges)
        temperature = data.get("temperature", 20.0)
        if isinstance(temperature, str):
            path = Path(temperature)
            if not path.is_absolute():
                path = base / path
            temperature = load_temperature(path).values.tolist()
        known = {f.name for f in cls.__dataclass_fields__.values()}
        extra = {k for k in data if k not in known}
        if extra:
            raise ConfigError(f"unknown scenario keys: {sorted(extra)}")
        kwargs = {k: v for k, v in data.items()
                  if k in known and k not in ("graph", "ranges", "temperature")}
        return cls(graph=graph, ranges=ranges, temperature=temperature,
                   **kwargs)

    def to_dict(self) -> dict:
        out = {
            "graph": self.graph, "ranges": self.ranges,
            "temperature": self.temperature,
        }
        for name in ("engine", "eip_mode", "replicates", "seed", "horizon",
                     "dt", "seeding", "initial_food_fraction",
                     "initial_stock", "budgets", "eip_time",
                     "resample_kappa", "food_balance_ratio",
                     "population_multiplier", "movement_multiplier",
                     "abs_mode", "pdi_mode", "arn_variant",
                     "strict_uptake_removal", "workers", "optimizer"):
            out[name] = getattr(self, name)
        return out

    def with_(self, **changes) -> "Scenario":
        data = self.to_dict()
        for key, value in changes.items():
            if key in ("budgets", "seeding", "optimizer"):
                merged = dict(data[key])
                merged.update(value)
                data[key] = merged
            else:
                data[key] = value
        return Scenario.from_dict(data)


def load_scenario(path, **overrides) -> Scenario:
    path = Path(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}")
    scenario = Scenario.from_dict(data, base_dir=path.parent)
    return scenario.with_(**overrides) if overrides else scenario


# ---------------------------------------------------------------------------
# Replicate machinery
# ---------------------------------------------------------------------------

def world_from_graph(graph: EnvironmentGraph) -> WorldSpec:
    pts = graph.centroids()
    w = max(1.0, float(pts[:, 0].max()) * 1.05 + 1.0)
    h = max(1.0, float(pts[:, 1].max()) * 1.05 + 1.0)
    return WorldSpec(w=w, h=h, graph=graph)


def _replicate_entropy(master_seed: int, index: int) -> np.random.SeedSequence:
    """Seed root for one replicate; depends only on (master, index), so
    campaigns differing in intervention mode share randomness run-for-run."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))


def nominal_initial_population(scenario: Scenario) -> int:
    graph = EnvironmentGraph.from_dict(scenario.graph)
    occupancy = scenario.seeding["occupancy"]
    mult = scenario.population_multiplier
    return int(sum(round(spec.kappa * mult * occupancy)
                   for spec in graph.centers))


def _budget(scenario: Scenario, kind: str) -> int:
    j0 = nominal_initial_population(scenario)
    if kind == "vaccination":
        return int(round(j0 * scenario.budgets["vaccines_per_individual"]))
    return int(round(j0 * scenario.budgets["dilution_portion"]))


@dataclass
class ReplicateSetup:
    graph: EnvironmentGraph
    params: ModelParams
    counts: np.ndarray
    food: np.ndarray
    stock: np.ndarray
    sim_seed: int
    eip_rng: np.random.Generator


def _build_setup(scenario: Scenario, base_graph: EnvironmentGraph,
                 ranges: ParamRanges,
                 entropy: int | np.random.SeedSequence) -> ReplicateSetup:
    """Sample one replicate's parameters, landscape and initial state."""
    ss = (entropy if isinstance(entropy, np.random.SeedSequence)
          else np.random.SeedSequence(entropy))
    param_word, sim_word, eip_word, seeding_word = (
        int(w) for w in ss.generate_state(4, dtype=np.uint64))
    param_rng = np.random.default_rng(param_word)
    params = sample_params(ranges, param_rng)
    params = params.with_(
        m_s=params.m_s * scenario.movement_multiplier,
        m_e=params.m_e * scenario.movement_multiplier,
        m_i=params.m_i * scenario.movement_multiplier,
        strict_uptake_removal=scenario.strict_uptake_removal,
    )

    mult = scenario.population_multiplier
    centers = []
    for spec in base_graph.centers:
        kappa = spec.kappa
        if scenario.resample_kappa:
            kappa = ranges.draw("kappa", param_rng)
        kappa *= mult
        lam = spec.lam
        if scenario.food_balance_ratio is not None:
            lam = scenario.food_balance_ratio * params.c_s * kappa
        centers.append(type(spec)(kappa=kappa, lam=lam, xi=spec.xi,
                                  centroid=spec.centroid))
    graph = EnvironmentGraph(centers, base_graph.edges,
                             base_graph.edge_scales)

    seeding_rng = np.random.default_rng(seeding_word)
    occupancy = scenario.seeding["occupancy"]
    counts = np.zeros((graph.n_centers, 4), dtype=np.int64)
    for k, spec in enumerate(graph.centers):
        counts[k, 0] = int(round(spec.kappa * occupancy))
    target = scenario.seeding["infected_center"]
    if target == "random":
        target = int(seeding_rng.integers(graph.n_centers))
    n_inf = int(scenario.seeding["initial_infected"])
    seeded = min(n_inf, int(counts[target, 0]))
    counts[target, 0] -= seeded
    counts[target, 2] += seeded

    food = scenario.initial_food_fraction * graph.xis()
    stock = np.full(graph.n_centers, float(scenario.initial_stock))
    return ReplicateSetup(graph=graph, params=params, counts=counts,
                          food=food, stock=stock, sim_seed=sim_word,
                          eip_rng=np.random.default_rng(eip_word))


def _random_spread(total: int, n_centers: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Uniform multinomial placement of a budget over centers."""
    if total <= 0:
        return np.zeros(n_centers)
    return rng.multinomial(total, np.full(n_centers, 1.0 / n_centers)
                           ).astype(float)


def _build_eip(scenario: Scenario, setup: ReplicateSetup,
               fixed: dict[str, Allocation] | None) -> EipConfiguration:
    """The intervention for one replicate under the scenario's mode."""
    mode = scenario.eip_mode
    n = setup.graph.n_centers
    at = scenario.eip_time
    vacc_events, dil_events = [], []
    fixed = fixed or {}
    if mode in ("random-vaccination", "random-both"):
        vacc_events.append((at, _random_spread(
            _budget(scenario, "vaccination"), n, setup.eip_rng)))
    if mode in ("random-dilution", "random-both"):
        dil_events.append((at, _random_spread(
            _budget(scenario, "dilution"), n, setup.eip_rng)))
    if mode in ("optimal-vaccination", "optimal-both"):
        alloc = fixed["vaccination"]
        vacc_events.append((alloc.tau, np.asarray(alloc.amounts, dtype=float)))
    if mode in ("optimal-dilution", "optimal-both"):
        alloc = fixed["dilution"]
        dil_events.append((alloc.tau, np.asarray(alloc.amounts, dtype=float)))
    return EipConfiguration(
        vaccination=VaccinationSchedule(vacc_events),
        dilution=DilutionSchedule(dil_events))


def _run_setup(scenario: Scenario, setup: ReplicateSetup,
               eip: EipConfiguration, horizon: float | None = None):
    """Run one replicate and reduce it to an EpizooticReport."""
    horizon = scenario.horizon if horizon is None else horizon
    temperature = scenario.temperature
    if not np.isscalar(temperature):
        TemperatureSeries(np.asarray(temperature)).require_hours(horizon)
    if scenario.engine == "ode":
        from .core import CenterState

        initial = [CenterState(S=float(setup.counts[k, 0]),
                               E=float(setup.counts[k, 1]),
                               I=float(setup.counts[k, 2]),
                               V=float(setup.counts[k, 3]),
                               F=float(setup.food[k]),
                               C=float(setup.stock[k]))
                   for k in range(setup.graph.n_centers)]
        traj = integrate(initial, setup.graph, setup.params, eip,
                         temperature, horizon=horizon, dt=scenario.dt)
        return build_report(traj, pdi_mode=scenario.pdi_mode,
                            arn_variant=scenario.arn_variant)
    config = SimConfig(rng_seed=setup.sim_seed,
                       initial_counts=setup.counts,
                       initial_food=setup.food,
                       initial_stock=setup.stock,
                       params=setup.params, eip=eip)
    return run_simulation(config, world_from_graph(setup.graph),
                          temperature_series=temperature,
                          horizon=horizon, dt=scenario.dt,
                          mode=scenario.abs_mode,
                          pdi_mode=scenario.pdi_mode)


def run_replicate(scenario: Scenario, index: int,
                  fixed_allocations: dict[str, Allocation] | None = None,
                  eip_override: EipConfiguration | None = None,
                  horizon: float | None = None) -> dict:
    """One full replicate; returns the metrics row."""
    base_graph = EnvironmentGraph.from_dict(scenario.graph)
    ranges = ParamRanges.from_dict(scenario.ranges)
    setup = _build_setup(scenario, base_graph, ranges,
                         _replicate_entropy(scenario.seed, index))
    eip = (eip_override if eip_override is not None
           else _build_eip(scenario, setup, fixed_allocations))
    report = _run_setup(scenario, setup, eip, horizon=horizon)
    return {
        "run_id": index,
        "seed": setup.sim_seed,
        "scenario": scenario.eip_mode,
        "arn": report.arn,
        "mi": report.mi,
        "pdi": report.pdi,
        "arn_raw": report.arn_raw,
        "arn_full_horizon": report.arn_full_horizon,
        "pdi_all": report.pdi_all,
        "flags": "|".join(report.flags),
        "error": "",
    }


# ---------------------------------------------------------------------------
# Allocation search wiring
# ---------------------------------------------------------------------------

def _objective_value(report, objective) -> float:
    if isinstance(objective, dict):
        return sum(weight * _objective_value(report, name)
                   for name, weight in objective.items())
    if objective in ("arn", "mi", "pdi"):
        return getattr(report, objective)
    raise ConfigError(f"unknown objective {objective!r}")


def _eip_from_amounts(scenario: Scenario, kind: str, amounts,
                      fixed: dict[str, Allocation]) -> EipConfiguration:
    at = scenario.eip_time
    vacc_events, dil_events = [], []
    if kind == "vaccination":
        vacc_events.append((at, np.asarray(amounts, dtype=float)))
    else:
        dil_events.append((at, np.asarray(amounts, dtype=float)))
    for other_kind, alloc in (fixed or {}).items():
        if other_kind == kind:
            continue
        event = (alloc.tau, np.asarray(alloc.amounts, dtype=float))
        (vacc_events if other_kind == "vaccination" else dil_events).append(
            event)
    return EipConfiguration(vaccination=VaccinationSchedule(vacc_events),
                            dilution=DilutionSchedule(dil_events))


def _auto_unit(budget: int, n_centers: int, max_units: int = 32) -> int:
    """Allocation granularity keeping greedy searches at desk scale."""
    if budget <= max_units:
        return 1
    return int(math.ceil(budget / max_units))


def make_allocation_problem(scenario: Scenario, kind: str,
                            fixed: dict[str, Allocation] | None = None
                            ) -> tuple[AllocationProblem, int]:
    """Search instance for one intervention kind; returns (problem, unit)."""
    budget_total = _budget(scenario, kind)
    n = EnvironmentGraph.from_dict(scenario.graph).n_centers
    unit = scenario.optimizer["unit_size"] or _auto_unit(budget_total, n)
    b_units = int(round(budget_total / unit)) if budget_total else 0
    base_graph = EnvironmentGraph.from_dict(scenario.graph)
    ranges = ParamRanges.from_dict(scenario.ranges)
    search_horizon = (scenario.optimizer["search_horizon"]
                      or scenario.horizon)
    objective = scenario.optimizer["objective"]
    fixed = dict(fixed or {})

    def simulator(amounts, seed):
        doses = [a * unit for a in amounts]
        setup = _build_setup(scenario, base_graph, ranges, seed)
        eip = _eip_from_amounts(scenario, kind, doses, fixed)
        report = _run_setup(scenario, setup, eip, horizon=search_horizon)
        return _objective_value(report, objective)

    problem = AllocationProblem(
        budget=b_units, n_centers=n, eip_kind=kind, objective=str(objective),
        replicates=int(scenario.optimizer["search_replicates"]),
        base_seed=scenario.seed, event_time=scenario.eip_time,
        unit_size=unit, simulator=simulator)
    return problem, unit


def optimize_allocation(scenario: Scenario, kind: str,
                        fixed: dict[str, Allocation] | None = None
                        ) -> tuple[Allocation, OptimizationResult]:
    """Run the search for one kind; returns the dose-level allocation."""
    problem, unit = make_allocation_problem(scenario, kind, fixed)
    if problem.budget == 0:
        zeros = Allocation((0,) * problem.n_centers, tau=scenario.eip_time)
        result = OptimizationResult(allocation=zeros, value=math.nan,
                                    method="empty", evaluations=0)
        return zeros, result
    result = optimize(problem)
    doses = Allocation(tuple(a * unit for a in result.allocation.amounts),
                       tau=scenario.eip_time)
    return doses, result


def plan_interventions(scenario: Scenario
                       ) -> tuple[dict[str, Allocation], dict]:
    """Precompute optimal allocations for the scenario's mode.

    ``optimal-both`` alternates coordinate-wise: vaccination is placed
    first with no dilution, dilution is placed against it, then each is
    re-optimized once against the other's latest answer.
    """
    mode = scenario.eip_mode
    fixed: dict[str, Allocation] = {}
    manifests: dict = {}
    if mode == "optimal-vaccination":
        fixed["vaccination"], result = optimize_allocation(
            scenario, "vaccination")
        manifests["vaccination"] = result.to_dict()
    elif mode == "optimal-dilution":
        fixed["dilution"], result = optimize_allocation(scenario, "dilution")
        manifests["dilution"] = result.to_dict()
    elif mode == "optimal-both":
        rounds = int(scenario.optimizer["alternation_rounds"])
        manifests["rounds"] = []
        for _ in range(max(1, rounds)):
            vacc, vres = optimize_allocation(
                scenario, "vaccination",
                {k: v for k, v in fixed.items() if k == "dilution"})
            fixed["vaccination"] = vacc
            dil, dres = optimize_allocation(
                scenario, "dilution",
                {k: v for k, v in fixed.items() if k == "vaccination"})
            fixed["dilution"] = dil
            manifests["rounds"].append({"vaccination": vres.to_dict(),
                                        "dilution": dres.to_dict()})
    return fixed, manifests


# ---------------------------------------------------------------------------
# Campaign
# ---------------------------------------------------------------------------

_ROW_FIELDS = ("run_id", "seed", "scenario", "arn", "mi", "pdi", "arn_raw",
               "arn_full_horizon", "pdi_all", "flags", "error")


def _failed_row(scenario: Scenario, index: int, error: str) -> dict:
    return {"run_id": index, "seed": "", "scenario": scenario.eip_mode,
            "arn": math.nan, "mi": math.nan, "pdi": math.nan,
            "arn_raw": math.nan, "arn_full_horizon": math.nan,
            "pdi_all": math.nan, "flags": "", "error": error}


def _campaign_worker(args) -> dict:
    scenario, index, fixed = args
    try:
        return run_replicate(scenario, index, fixed_allocations=fixed)
    except Exception as exc:  # replicate failures must not sink the campaign
        return _failed_row(scenario, index, repr(exc))


@dataclass
class CampaignResult:
    scenario: Scenario
    rows: list[dict]
    summary: list[dict]
    optimizer_manifest: dict
    failed: int

    def metric_mean(self, metric: str) -> float:
        for entry in self.summary:
            if entry["metric"] == metric:
                return entry["mean"]
        raise KeyError(metric)

    def metric_values(self, metric: str) -> np.ndarray:
        return np.array([row[metric] for row in self.rows if not row["error"]])


def summarize_rows(rows: list[dict], label: str) -> list[dict]:
    good = [row for row in rows if not row["error"]]
    summary = []
    for metric in ("arn", "mi", "pdi"):
        values = np.array([row[metric] for row in good], dtype=float)
        summary.append({
            "scenario": label,
            "metric": metric,
            "mean": float(values.mean()) if len(values) else math.nan,
            "std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            "replicates": len(good),
            "failed": len(rows) - len(good),
        })
    return summary


def run_campaign(scenario: Scenario, out_dir=None) -> CampaignResult:
    """All replicates of one scenario: sample, intervene, simulate, score.

    Replicate failures are recorded in their row and do not stop the
    campaign. Row order follows the replicate index no matter how many
    workers ran them.
    """
    fixed, opt_manifest = plan_interventions(scenario)
    jobs = [(scenario, r, fixed) for r in range(scenario.replicates)]
    if scenario.workers > 1:
        with ProcessPoolExecutor(max_workers=scenario.workers) as pool:
            rows = list(pool.map(_campaign_worker, jobs))
    else:
        rows = [_campaign_worker(job) for job in jobs]
    summary = summarize_rows(rows, scenario.eip_mode)
    result = CampaignResult(scenario=scenario, rows=rows, summary=summary,
                            optimizer_manifest=opt_manifest,
                            failed=sum(1 for row in rows if row["error"]))
    if out_dir is not None:
        write_campaign_outputs(result, out_dir)
    return result


def write_rows_csv(path, rows: list[dict], fieldnames) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def manifest_dict(scenario: Scenario, extra: dict | None = None) -> dict:
    out = {"version": __version__, "master_seed": scenario.seed,
           "scenario": scenario.to_dict()}
    if extra:
        out.update(extra)
    return out


def write_campaign_outputs(result: CampaignResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(out / "runs.csv", result.rows, _ROW_FIELDS)
    write_rows_csv(out / "summary.csv", result.summary,
                   ("scenario", "metric", "mean", "std", "replicates",
                    "failed"))
    extra = {}
    if result.optimizer_manifest:
        extra["optimizer"] = result.optimizer_manifest
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest_dict(result.scenario, extra), fh, indent=2,
                  sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Sweeps and sensitivity
# ---------------------------------------------------------------------------

def _apply_axis(scenario: Scenario, name: str, value: float) -> Scenario:
    if name == "population_multiplier":
        return scenario.with_(population_multiplier=value)
    if name == "movement_multiplier":
        return scenario.with_(movement_multiplier=value)
    if name == "vaccines_per_individual":
        return scenario.with_(budgets={"vaccines_per_individual": value})
    if name == "dilution_portion":
        return scenario.with_(budgets={"dilution_portion": value})
    if name.startswith("param:"):
        key = name.split(":", 1)[1]
        ranges = ParamRanges.from_dict(scenario.ranges)
        if key not in ranges.intervals:
            raise ConfigError(f"unknown parameter axis {key!r}")
        return scenario.with_(ranges=ranges.scaled(key, value).to_dict())
    raise ConfigError(f"unknown sweep axis {name!r}")


@dataclass
class SweepSpec:
    """One or two named axes swept over a fixed base scenario."""

    axes: list[tuple[str, list[float]]]
    scenario: Scenario

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("sweep needs 1 or 2 axes")
        for name, values in self.axes:
            if not len(values):
                raise ConfigError(f"axis {name!r} has no grid values")


def run_sweep(spec: SweepSpec, out_dir=None) -> list[dict]:
    """Grid of campaigns; one output row per cell per metric."""
    names = [name for name, _ in spec.axes]
    grids = [values for _, values in spec.axes]
    cells = ([(a,) for a in grids[0]] if len(grids) == 1
             else [(a, b) for a in grids[0] for b in grids[1]])
    rows = []
    failed = 0
    for cell in cells:
        cell_scenario = spec.scenario
        for name, value in zip(names, cell):
            cell_scenario = _apply_axis(cell_scenario, name, value)
        result = run_campaign(cell_scenario)
        failed += result.failed
        for entry in result.summary:
            row = {name: value for name, value in zip(names, cell)}
            row.update({"metric": entry["metric"], "mean": entry["mean"],
                        "std": entry["std"],
                        "replicates": entry["replicates"],
                        "failed": entry["failed"]})
            rows.append(row)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        fieldnames = names + ["metric", "mean", "std", "replicates", "failed"]
        write_rows_csv(out / "grid.csv", rows, fieldnames)
        with open(out / "manifest.json", "w") as fh:
            json.dump(manifest_dict(spec.scenario,
                                    {"axes": [[n, list(v)] for n, v
                                              in spec.axes]}),
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
    return rows


SENSITIVITY_MULTIPLIERS = (0.5, 0.75, 1.0, 1.25, 1.5)


def run_sensitivity(parameter: str, scenario: Scenario,
                    multipliers=SENSITIVITY_MULTIPLIERS,
                    out_dir=None) -> list[dict]:
    """1-D no-intervention sweep of one rate at 50%..150% of its value."""
    ranges = ParamRanges.from_dict(scenario.ranges)
    if parameter not in ranges.intervals:
        raise ConfigError(
            f"unknown sensitivity parameter {parameter!r}; known: "
            f"{sorted(ranges.intervals)}")
    base = scenario.with_(eip_mode="none")
    rows = []
    for mult in multipliers:
        scaled = ranges.scaled(parameter, mult)
        lo, hi = scaled.interval(parameter)
        cell = base.with_(ranges=scaled.to_dict())
        result = run_campaign(cell)
        entry = next(e for e in result.summary if e["metric"] == "arn")
        rows.append({"parameter": parameter, "multiplier": mult,
                     "value_lo": lo, "value_hi": hi,
                     "arn_mean": entry["mean"], "arn_std": entry["std"],
                     "replicates": entry["replicates"],
                     "failed": entry["failed"]})
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows_csv(out / f"sensitivity_{parameter}.csv", rows,
                       ("parameter", "multiplier", "value_lo", "value_hi",
                        "arn_mean", "arn_std", "replicates", "failed"))
    return rows

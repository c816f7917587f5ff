"""Core types for the activity-center rabies model.

The landscape is a graph of activity centers (nodes) holding jackal
sub-populations; edges mark which centers share a border and therefore
permit dispersal. Each center tracks four epidemiological compartments
(susceptible S, exposed E, infected I, vaccinated V), standing food F
(kg) and oral-vaccine stock C (doses). All rates are per hour; the
simulation clock is in hours.

Parameter defaults follow the fitted/literature values used throughout
this project (see ``DEFAULT_RANGES``); ranged parameters are sampled
uniformly per Monte-Carlo repetition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

HOURS_PER_YEAR = 8760.0

#: Annual fraction of vaccinated jackals whose immunity lapses.
ANNUAL_WANING_FRACTION = 0.28


class ValidationError(ValueError):
    """Raised when a state, graph or configuration violates an invariant.

    ``violations`` carries one human-readable message per problem found.
    """

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def waning_rate_from_annual_fraction(fraction: float,
                                     hours_per_year: float = HOURS_PER_YEAR) -> float:
    """Convert an annual immunity-loss fraction to a continuous hourly rate.

    A fraction of 0.28/year gives the hourly rate omega such that
    1 - exp(-omega * 8760) = 0.28.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"annual fraction must be in [0, 1), got {fraction}")
    return -math.log(1.0 - fraction) / hours_per_year


#: Hourly immunity-waning rate implied by the 28%/year lapse fraction.
OMEGA_HOURLY = waning_rate_from_annual_fraction(ANNUAL_WANING_FRACTION)


# ---------------------------------------------------------------------------
# Environment graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CenterSpec:
    """Static description of one activity center.

    kappa    carrying capacity, individuals
    lam      food production rate, kg/hour (active while F < xi)
    xi       standing-food cap, kg
    centroid planar (x, y) coordinates, arbitrary length units; used
             only by the agent engine for nearest-center assignment
    """

    kappa: float
    lam: float
    xi: float
    centroid: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        problems = []
        if not self.kappa > 0:
            problems.append(f"kappa must be > 0, got {self.kappa}")
        if self.lam < 0:
            problems.append(f"lambda must be >= 0, got {self.lam}")
        if not self.xi > 0:
            problems.append(f"xi must be > 0, got {self.xi}")
        if problems:
            raise ValidationError(problems)


class EnvironmentGraph:
    """Activity centers plus the adjacency that permits dispersal.

    Movement between centers i and j is possible only if {i, j} is an
    edge; absent edges mean the centers do not share a border. Each edge
    may carry a movement-rate multiplier (default 1.0) so sweeps can
    perturb individual corridors.
    """

    def __init__(self, centers: Sequence[CenterSpec],
                 edges: Iterable[tuple[int, int]],
                 edge_scales: Mapping[tuple[int, int], float] | None = None):
        self.centers = list(centers)
        if not self.centers:
            raise ValidationError(["graph must have at least one center"])
        n = len(self.centers)
        problems = []
        canon = set()
        for i, j in edges:
            if i == j:
                problems.append(f"self-edge on center {i}")
                continue
            if not (0 <= i < n and 0 <= j < n):
                problems.append(f"edge ({i}, {j}) references a missing center")
                continue
            canon.add((min(i, j), max(i, j)))
        if problems:
            raise ValidationError(problems)
        self.edges = frozenset(canon)
        self.edge_scales = {}
        for pair, scale in (edge_scales or {}).items():
            key = (min(pair), max(pair))
            if key not in self.edges:
                raise ValidationError([f"scale given for non-edge {key}"])
            self.edge_scales[key] = float(scale)

    @property
    def n_centers(self) -> int:
        return len(self.centers)

    def neighbors(self, k: int) -> list[int]:
        out = []
        for i, j in self.edges:
            if i == k:
                out.append(j)
            elif j == k:
                out.append(i)
        return sorted(out)

    def edge_scale(self, i: int, j: int) -> float:
        return self.edge_scales.get((min(i, j), max(i, j)), 1.0)

    # Arrays used by the engines: one row per directed edge.
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src, dst, scale) arrays with both directions of every edge."""
        src, dst, scale = [], [], []
        for i, j in sorted(self.edges):
            s = self.edge_scale(i, j)
            src += [i, j]
            dst += [j, i]
            scale += [s, s]
        return (np.asarray(src, dtype=np.intp),
                np.asarray(dst, dtype=np.intp),
                np.asarray(scale, dtype=float))

    def kappas(self) -> np.ndarray:
        return np.array([c.kappa for c in self.centers], dtype=float)

    def lams(self) -> np.ndarray:
        return np.array([c.lam for c in self.centers], dtype=float)

    def xis(self) -> np.ndarray:
        return np.array([c.xi for c in self.centers], dtype=float)

    def centroids(self) -> np.ndarray:
        return np.array([c.centroid for c in self.centers], dtype=float)

    def to_dict(self) -> dict:
        return {
            "centers": [
                {"id": k, "kappa": c.kappa, "lambda": c.lam, "xi": c.xi,
                 "centroid": list(c.centroid)}
                for k, c in enumerate(self.centers)
            ],
            "edges": [
                [i, j] if self.edge_scale(i, j) == 1.0
                else [i, j, self.edge_scale(i, j)]
                for i, j in sorted(self.edges)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "EnvironmentGraph":
        try:
            raw_centers = data["centers"]
            raw_edges = data.get("edges", [])
        except (KeyError, TypeError) as exc:
            raise ValidationError([f"graph file missing section: {exc}"])
        by_id = {}
        for entry in raw_centers:
            cid = int(entry["id"])
            if cid in by_id:
                raise ValidationError([f"duplicate center id {cid}"])
            by_id[cid] = CenterSpec(
                kappa=float(entry["kappa"]),
                lam=float(entry["lambda"]),
                xi=float(entry["xi"]),
                centroid=tuple(float(v) for v in entry.get("centroid", (0.0, 0.0))),
            )
        if sorted(by_id) != list(range(len(by_id))):
            raise ValidationError(["center ids must be 0..n-1"])
        centers = [by_id[k] for k in range(len(by_id))]
        edges, scales = [], {}
        for entry in raw_edges:
            i, j = int(entry[0]), int(entry[1])
            edges.append((i, j))
            if len(entry) > 2:
                scales[(min(i, j), max(i, j))] = float(entry[2])
        return cls(centers, edges, scales)


def load_graph(path) -> EnvironmentGraph:
    """Read an environment graph from a JSON file."""
    with open(path) as fh:
        return EnvironmentGraph.from_dict(json.load(fh))


def save_graph(graph: EnvironmentGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph.to_dict(), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Per-center state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CenterState:
    """Snapshot of one center: compartments, food and vaccine stock.

    Counts are real-valued; the deterministic engine evolves them as
    densities while the agent engine derives them by counting agents.
    """

    S: float = 0.0
    E: float = 0.0
    I: float = 0.0
    V: float = 0.0
    F: float = 0.0
    C: float = 0.0

    @property
    def J(self) -> float:
        """Total living population S + E + I + V."""
        return self.S + self.E + self.I + self.V


def validate_state(state: Sequence[CenterState],
                   graph: EnvironmentGraph) -> list[str]:
    """Check every per-center invariant; return the violations found.

    An empty list means the state is valid. Negative compartments, food
    or stock, and food above the center's cap are each reported with the
    offending center index. Length mismatch with the graph is a usage
    error and raises instead.
    """
    if len(state) != graph.n_centers:
        raise ValueError(
            f"state has {len(state)} centers, graph has {graph.n_centers}")
    violations = []
    for k, (st, spec) in enumerate(zip(state, graph.centers)):
        for name in ("S", "E", "I", "V", "F", "C"):
            value = getattr(st, name)
            if value < 0:
                violations.append(f"negative {name} at center {k}: {value}")
            if not math.isfinite(value):
                violations.append(f"non-finite {name} at center {k}")
        if st.F > spec.xi:
            violations.append(
                f"food exceeds cap at center {k}: {st.F} > xi={spec.xi}")
    return violations


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Flow rates of the coupled population/food/vaccine dynamics.

    The three epidemiological classes share field families (movement m,
    consumption c, natural death nu, vaccine uptake rho); the fitted
    values are identical across classes but the fields stay separate for
    sensitivity sweeps. ``m_v`` is the movement rate of vaccinated
    individuals; None means they travel at the susceptible rate.
    """

    beta: float = 0.15              # pairwise infection rate, 1/hour
    phi: float = 5.9e-3             # exposed -> infected, 1/hour
    gamma: float = 9.9e-4           # rabies death, 1/hour
    nu_s: float = 1.4e-5            # natural death rates, 1/hour
    nu_e: float = 1.4e-5
    nu_i: float = 1.4e-5
    m_s: float = 0.017              # per-edge movement rates, 1/hour
    m_e: float = 0.017
    m_i: float = 0.017
    c_s: float = 7.9e-3             # food consumption, kg/hour
    c_e: float = 7.9e-3
    c_i: float = 7.9e-3
    rho_s: float = 0.30             # vaccine uptake rates, 1/hour
    rho_e: float = 0.30
    rho_i: float = 0.30
    omega: float = OMEGA_HOURLY     # immunity waning, 1/hour
    vaccine_lifetime: float = 420.0  # bait potency half-life, hours
    T: float = 8760.0               # simulation horizon, hours
    dt: float = 1.0                 # step size, hours
    m_v: float | None = None        # vaccinated movement override
    strict_uptake_removal: bool = False  # uptake by E/I removes the host too

    def __post_init__(self):
        problems = []
        rate_fields = ("beta", "phi", "gamma", "nu_s", "nu_e", "nu_i",
                       "m_s", "m_e", "m_i", "c_s", "c_e", "c_i",
                       "rho_s", "rho_e", "rho_i", "omega")
        for name in rate_fields:
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0")
        if not self.vaccine_lifetime > 0:
            problems.append("vaccine_lifetime must be > 0")
        if not self.dt > 0:
            problems.append("dt must be > 0")
        if self.T < self.dt:
            problems.append("T must be >= dt")
        if self.m_v is not None and self.m_v < 0:
            problems.append("m_v must be >= 0")
        if problems:
            raise ValidationError(problems)

    @property
    def vaccinated_movement(self) -> float:
        return self.m_s if self.m_v is None else self.m_v

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


#: Uniform-sampling intervals for every ranged parameter. Family keys
#: (nu, m, c, rho) draw once and apply to all three classes unless a
#: per-class key overrides them. ``kappa`` is drawn per center by the
#: scenario machinery, not by ``sample_params``.
DEFAULT_RANGES: dict[str, tuple[float, float]] = {
    "beta": (0.15, 0.15),
    "phi": (5.9e-3, 5.9e-3),
    "gamma": (9.9e-4, 9.9e-4),
    "nu": (1.4e-5, 1.4e-5),
    "m": (0.017, 0.017),
    "c": (7.9e-3, 7.9e-3),
    "rho": (0.10, 0.50),
    "omega": (OMEGA_HOURLY, OMEGA_HOURLY),
    "vaccine_lifetime": (120.0, 720.0),
    "kappa": (20.0, 150.0),
}

_FAMILIES = {
    "nu": ("nu_s", "nu_e", "nu_i"),
    "m": ("m_s", "m_e", "m_i"),
    "c": ("c_s", "c_e", "c_i"),
    "rho": ("rho_s", "rho_e", "rho_i"),
}

# Fixed draw order keeps sampling reproducible across runs and versions.
_DRAW_ORDER = (
    "beta", "phi", "gamma",
    "nu", "nu_s", "nu_e", "nu_i",
    "m", "m_s", "m_e", "m_i",
    "c", "c_s", "c_e", "c_i",
    "rho", "rho_s", "rho_e", "rho_i",
    "omega", "vaccine_lifetime",
)


@dataclass
class ParamRanges:
    """Inclusive [lo, hi] sampling intervals keyed by parameter name.

    Point values are encoded as lo == hi. Unspecified names fall back to
    ``DEFAULT_RANGES``.
    """

    intervals: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        merged = dict(DEFAULT_RANGES)
        merged.update({k: (float(lo), float(hi))
                       for k, (lo, hi) in self.intervals.items()})
        problems = [f"range for {k} has lo > hi: {v}"
                    for k, v in merged.items() if v[0] > v[1]]
        if problems:
            raise ValidationError(problems)
        self.intervals = merged

    def interval(self, name: str) -> tuple[float, float]:
        return self.intervals[name]

    def draw(self, name: str, rng: np.random.Generator) -> float:
        lo, hi = self.intervals[name]
        return float(rng.uniform(lo, hi)) if hi > lo else lo

    def scaled(self, name: str, factor: float) -> "ParamRanges":
        """Copy with one interval multiplied by ``factor`` (sensitivity mode)."""
        lo, hi = self.intervals[name]
        out = dict(self.intervals)
        out[name] = (lo * factor, hi * factor)
        return ParamRanges(out)

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in sorted(self.intervals.items())}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ParamRanges":
        intervals = {}
        for key, value in data.items():
            if isinstance(value, (int, float)):
                intervals[key] = (float(value), float(value))
            else:
                lo, hi = value
                intervals[key] = (float(lo), float(hi))
        return cls(intervals)


def load_param_ranges(path) -> ParamRanges:
    """Read sampling intervals from a JSON file; missing keys use defaults."""
    with open(path) as fh:
        return ParamRanges.from_dict(json.load(fh))


def sample_params(ranges: ParamRanges,
                  rng_seed: int | np.random.Generator) -> ModelParams:
    """Draw one parameter set uniformly from the configured intervals.

    Family keys (nu, m, c, rho) draw a single value shared by the three
    epidemiological classes; an explicit per-class key replaces the
    family value for that class. The same seed always yields the same
    parameters.
    """
    rng = (rng_seed if isinstance(rng_seed, np.random.Generator)
           else np.random.default_rng(rng_seed))
    draws: dict[str, float] = {}
    for name in _DRAW_ORDER:
        if name in ranges.intervals:
            draws[name] = ranges.draw(name, rng)
    values: dict[str, float] = {}
    for name in ("beta", "phi", "gamma", "omega", "vaccine_lifetime"):
        if name in draws:
            values[name] = draws[name]
    for family, members in _FAMILIES.items():
        for member in members:
            if member in draws:
                values[member] = draws[member]
            elif family in draws:
                values[member] = draws[family]
    return ModelParams(**values)


def params_to_dict(params: ModelParams) -> dict:
    out = {}
    for f in fields(params):
        out[f.name] = getattr(params, f.name)
    return out

"""Stochastic engine: individual jackals on a continuous map.

Agents carry a position, an epidemiological state and the activity
center nearest to them (L2 distance, ties to the lowest index). Within
a center contacts are well mixed, so every per-agent transition hazard
depends only on (center, class); a rate h converts to a per-step
probability 1 - exp(-h * dt). Each agent resolves at most one
epidemiological transition per step, chosen competitively by the
normalized hazards. Dispersal teleports an agent to the destination
centroid, since positions only matter for center assignment.

Step order (events -> transitions -> births -> migration -> food) is
fixed; interventions act on the population that existed at their
scheduled hour.

Two execution modes share one stochastic process. ``counts`` mode draws
per-center outcome counts (binomial/multinomial/hypergeometric) from a
dedicated stream; ``agents`` mode draws the same counts from the same
stream and then picks which individuals realize them using a second
stream. Count trajectories are therefore bitwise identical across
modes, and the count distributions are exactly those of per-agent
i.i.d. draws because agents within a (center, class) group are
exchangeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

import numpy as np

from .core import (CenterState, EnvironmentGraph, ModelParams,
                   ValidationError)
from .eip import EipConfiguration, decay_rate
from .metrics import EpizooticReport, build_report
from .ode import _index_events, temperature_at
from .trajectory import Trajectory, allocate


class EpiState(IntEnum):
    SUSCEPTIBLE = 0
    EXPOSED = 1
    INFECTED = 2
    VACCINATED = 3


@dataclass(frozen=True)
class WorldSpec:
    """Map dimensions plus the activity-center graph."""

    w: float
    h: float
    graph: EnvironmentGraph

    def __post_init__(self):
        problems = []
        if not (self.w > 0 and self.h > 0):
            problems.append(f"map dimensions must be positive, got "
                            f"({self.w}, {self.h})")
        seen = {}
        for k, spec in enumerate(self.graph.centers):
            x, y = spec.centroid
            if not (0 <= x <= self.w and 0 <= y <= self.h):
                problems.append(f"centroid of center {k} outside map: "
                                f"({x}, {y})")
            if (x, y) in seen:
                problems.append(f"centers {seen[(x, y)]} and {k} share a "
                                f"centroid; assignment would be ambiguous")
            seen[(x, y)] = k
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class Agent:
    """One jackal: unique id, position, state, current activity center."""

    id: int
    x: float
    y: float
    eta: EpiState
    center: int


@dataclass
class SimConfig:
    """Initial conditions and model inputs for one stochastic run."""

    rng_seed: int
    initial_counts: np.ndarray          # (n_centers, 4) ints: S, E, I, V
    initial_food: np.ndarray            # kg per center
    initial_stock: np.ndarray           # doses per center
    params: ModelParams = field(default_factory=ModelParams)
    eip: EipConfiguration = field(default_factory=EipConfiguration)

    def __post_init__(self):
        counts = np.asarray(self.initial_counts)
        if counts.ndim != 2 or counts.shape[1] != 4:
            raise ValidationError(["initial_counts must be (n_centers, 4)"])
        if np.any(counts < 0) or np.any(counts != np.floor(counts)):
            raise ValidationError(
                ["initial counts must be nonnegative integers"])
        self.initial_counts = counts.astype(np.int64)
        self.initial_food = np.asarray(self.initial_food, dtype=float)
        self.initial_stock = np.asarray(self.initial_stock, dtype=float)
        if np.any(self.initial_food < 0) or np.any(self.initial_stock < 0):
            raise ValidationError(["initial food and stock must be >= 0"])


def assign_center(position: Sequence[float], graph: EnvironmentGraph) -> int:
    """Index of the nearest activity center; ties go to the lowest index."""
    if graph.n_centers == 0:
        raise ValidationError(["cannot assign a center in an empty graph"])
    centroids = graph.centroids()
    dx = centroids[:, 0] - position[0]
    dy = centroids[:, 1] - position[1]
    return int(np.argmin(dx * dx + dy * dy))


# ---------------------------------------------------------------------------
# Internal population containers
# ---------------------------------------------------------------------------

_CLASS_ORDER = (EpiState.SUSCEPTIBLE, EpiState.EXPOSED,
                EpiState.INFECTED, EpiState.VACCINATED)


@dataclass
class AgentArrays:
    """Column-wise agent storage; one row per living agent."""

    ids: np.ndarray
    eta: np.ndarray
    center: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def keep(self, mask: np.ndarray) -> None:
        self.ids = self.ids[mask]
        self.eta = self.eta[mask]
        self.center = self.center[mask]
        self.x = self.x[mask]
        self.y = self.y[mask]

    def append(self, ids, eta, center, x, y) -> None:
        self.ids = np.concatenate([self.ids, ids])
        self.eta = np.concatenate([self.eta, eta])
        self.center = np.concatenate([self.center, center])
        self.x = np.concatenate([self.x, x])
        self.y = np.concatenate([self.y, y])

    def to_agents(self) -> list[Agent]:
        return [Agent(int(i), float(px), float(py), EpiState(int(e)), int(c))
                for i, px, py, e, c in zip(self.ids, self.x, self.y,
                                           self.eta, self.center)]


@dataclass
class _Population:
    counts: np.ndarray        # (c, 4) int64 in _CLASS_ORDER
    F: np.ndarray
    C: np.ndarray
    agents: AgentArrays | None = None
    next_id: int = 0

    def J(self) -> np.ndarray:
        return self.counts.sum(axis=1)


@dataclass
class _StepTallies:
    infections: int = 0
    births: int = 0
    natural_deaths: int = 0
    rabies_deaths: int = 0
    diluted: int = 0
    diluted_infected: int = 0
    dose_drops: float = 0.0
    doses_taken: int = 0
    doses_wasted: int = 0
    dose_decay: float = 0.0
    strict_removals: int = 0


def _members(pop: _Population, center: int, state: EpiState) -> np.ndarray:
    """Agent row indices of one (center, class) group, in id order."""
    rows = np.flatnonzero((pop.agents.center == center)
                          & (pop.agents.eta == int(state)))
    return rows[np.argsort(pop.agents.ids[rows], kind="stable")]


def _stochastic_round(expected: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
    """Unbiased integer realization: floor plus Bernoulli on the fraction."""
    base = np.floor(expected)
    frac = expected - base
    extra = rng.random(expected.shape) < frac
    return (base + extra).astype(np.int64)


class _Engine:
    """One stochastic run; owns the RNG streams and the scratch state."""

    def __init__(self, config: SimConfig, world: WorldSpec,
                 mode: str = "counts"):
        if mode not in ("counts", "agents"):
            raise ValidationError([f"unknown mode {mode!r}"])
        self.config = config
        self.world = world
        self.graph = world.graph
        self.params = config.params
        self.eip = config.eip
        self.mode = mode
        c = self.graph.n_centers
        if config.initial_counts.shape[0] != c:
            raise ValidationError(
                [f"initial_counts lists {config.initial_counts.shape[0]} "
                 f"centers, graph has {c}"])
        self.eip.check_center_count(c)
        counts_ss, assign_ss = np.random.SeedSequence(
            config.rng_seed).spawn(2)
        self.counts_rng = np.random.default_rng(counts_ss)
        self.assign_rng = np.random.default_rng(assign_ss)
        self.src, self.dst, self.edge_scale = self.graph.directed_edges()
        self.kappa = self.graph.kappas()
        self.lam = self.graph.lams()
        self.xi = self.graph.xis()
        self.centroids = self.graph.centroids()
        # Hot-loop constants.
        p = self.params
        self._m_vec = np.array([p.m_s, p.m_e, p.m_i,
                                p.vaccinated_movement])[:, None]
        self._cons_w = np.array([p.c_s, p.c_e, p.c_i, p.c_s])
        self._nu_vec = np.array([p.nu_s, p.nu_e, p.nu_i, p.nu_s])
        self._out_edges = [np.flatnonzero(self.src == k)
                           for k in range(c)]
        self.pop = self._initial_population()

    def _initial_population(self) -> _Population:
        counts = self.config.initial_counts.copy()
        agents = None
        next_id = int(counts.sum())
        if self.mode == "agents":
            ids, eta, center = [], [], []
            cursor = 0
            for k in range(self.graph.n_centers):
                for col, state in enumerate(_CLASS_ORDER):
                    n = int(counts[k, col])
                    ids.append(np.arange(cursor, cursor + n, dtype=np.int64))
                    eta.append(np.full(n, int(state), dtype=np.int8))
                    center.append(np.full(n, k, dtype=np.intp))
                    cursor += n
            ids = np.concatenate(ids) if ids else np.empty(0, dtype=np.int64)
            eta = np.concatenate(eta) if eta else np.empty(0, dtype=np.int8)
            center = (np.concatenate(center) if center
                      else np.empty(0, dtype=np.intp))
            agents = AgentArrays(
                ids=ids, eta=eta, center=center,
                x=self.centroids[center, 0].astype(float),
                y=self.centroids[center, 1].astype(float))
        return _Population(counts=counts,
                           F=self.config.initial_food.astype(float).copy(),
                           C=self.config.initial_stock.astype(float).copy(),
                           agents=agents, next_id=next_id)

    # -- stage 1: scheduled interventions ---------------------------------

    def _apply_events(self, events: dict, tally: _StepTallies) -> None:
        pop = self.pop
        for kind in self.eip.event_order:
            for amounts in events.get(kind, ()):
                if kind == "vaccination":
                    pop.C += amounts
                    tally.dose_drops += float(np.sum(amounts))
                    continue
                for k in np.flatnonzero(np.asarray(amounts) > 0):
                    take = int(min(int(amounts[k]), pop.counts[k].sum()))
                    if take == 0:
                        continue
                    removed = self.counts_rng.multivariate_hypergeometric(
                        pop.counts[k], take)
                    pop.counts[k] -= removed
                    tally.diluted += take
                    tally.diluted_infected += int(
                        removed[int(EpiState.INFECTED)])
                    if pop.agents is not None:
                        self._remove_members(k, removed)

    def _remove_members(self, center: int, removed: np.ndarray) -> None:
        doomed = []
        for col, state in enumerate(_CLASS_ORDER):
            n = int(removed[col])
            if n == 0:
                continue
            rows = _members(self.pop, center, state)
            pick = self.assign_rng.permutation(len(rows))[:n]
            doomed.append(rows[pick])
        if doomed:
            mask = np.ones(len(self.pop.agents.ids), dtype=bool)
            mask[np.concatenate(doomed)] = False
            self.pop.agents.keep(mask)

    # -- stage 2: epidemiological transitions ------------------------------

    def _transitions(self, temp: float, dt: float,
                     tally: _StepTallies) -> None:
        pop, p = self.pop, self.params
        c = self.graph.n_centers
        snap = pop.counts.T.copy()          # (4, c) class-major snapshot
        S, E, I, V = snap
        J = snap.sum(axis=0)
        has_stock = bool(pop.C.any())
        stock_ratio = pop.C / np.maximum(J, 1) if has_stock else None

        strict = p.strict_uptake_removal
        # Competing hazards per class: at most one exclusive transition
        # per agent per step. One batched draw decides how many agents
        # of each class transition at all; further batched draws split
        # them across that class's hazards. Division guards rely on the
        # numerator being a component of the denominator, so 0/eps = 0
        # and the ratio never exceeds 1.
        hazards = np.empty((4, c))
        h_inf = hazards[0]
        np.multiply(p.beta, I, out=h_inf)
        lam = np.empty((4, c))
        lam[0] = h_inf + p.nu_s
        lam[1] = p.phi + p.nu_e
        lam[2] = p.gamma + p.nu_i
        lam[3] = p.omega + p.nu_s
        if has_stock:
            h_upt = p.rho_s * stock_ratio
            lam[0] += h_upt
            if strict:
                lam[1] += p.rho_e * stock_ratio
                lam[2] += p.rho_i * stock_ratio
        n_any = self.counts_rng.binomial(
            snap.reshape(-1), -np.expm1(lam.reshape(-1) * (-dt)))

        # First split: the primary hazard of each class (infection,
        # progression, rabies death, waning).
        hazards[1] = p.phi
        hazards[2] = p.gamma
        hazards[3] = p.omega
        p_first = hazards.reshape(-1) / np.maximum(lam.reshape(-1), 1e-300)
        n_first = self.counts_rng.binomial(n_any, p_first)
        rest = (n_any - n_first).reshape(4, c)
        n_first = n_first.reshape(4, c)
        n_inf, n_prog, n_rab, n_wane = n_first
        n_nde, n_ndi, n_ndv = rest[1], rest[2], rest[3]
        n_nds = rest[0]
        zeros = np.zeros(c, dtype=np.int64)
        n_upt = n_rem_e = n_rem_i = w_e = w_i = zeros

        if has_stock:
            if strict:
                # Three-hazard classes need one more split each.
                sec_h = np.concatenate([h_upt, p.rho_e * stock_ratio,
                                        p.rho_i * stock_ratio])
                sec_lam = np.concatenate([lam[0] - h_inf, lam[1] - p.phi,
                                          lam[2] - p.gamma])
                drawn = self.counts_rng.binomial(
                    rest[:3].reshape(-1),
                    sec_h / np.maximum(sec_lam, 1e-300)).reshape(3, c)
                n_upt, n_rem_e, n_rem_i = drawn
                n_nds = rest[0] - n_upt
                n_nde = rest[1] - n_rem_e
                n_ndi = rest[2] - n_rem_i
            else:
                n_upt = self.counts_rng.binomial(
                    rest[0], h_upt / np.maximum(lam[0] - h_inf, 1e-300))
                n_nds = rest[0] - n_upt
                # Bait consumption by E/I wastes doses without changing
                # state, so it is drawn independently of the exclusive
                # transitions.
                waste_rate = np.concatenate([p.rho_e * stock_ratio,
                                             p.rho_i * stock_ratio])
                wasted = self.counts_rng.binomial(
                    snap[1:3].reshape(-1),
                    -np.expm1(waste_rate * (-dt))).reshape(2, c)
                w_e, w_i = wasted

        if has_stock:
            # Whole doses only: cap consumption at the available stock,
            # in the fixed order S uptake, E, then I. Unbacked events
            # fizzle.
            avail = np.floor(pop.C).astype(np.int64)
            n_upt = np.minimum(n_upt, avail)
            avail = avail - n_upt
            first_e = np.minimum(n_rem_e if strict else w_e, avail)
            avail = avail - first_e
            first_i = np.minimum(n_rem_i if strict else w_i, avail)
            if strict:
                n_rem_e, n_rem_i = first_e, first_i
            w_e, w_i = first_e, first_i
            pop.C = pop.C - (n_upt + w_e + w_i)
            tally.doses_taken += int(n_upt.sum())
            tally.doses_wasted += int((w_e + w_i).sum())
            tally.strict_removals += int((n_rem_e + n_rem_i).sum())

        pop.counts[:, 0] = S - n_inf - n_upt - n_nds + n_wane
        pop.counts[:, 1] = E + n_inf - n_prog - n_nde - n_rem_e
        pop.counts[:, 2] = I + n_prog - n_rab - n_ndi - n_rem_i
        pop.counts[:, 3] = V + n_upt - n_wane - n_ndv

        tally.infections += int(n_inf.sum())
        tally.natural_deaths += int((n_nds + n_nde + n_ndi + n_ndv).sum())
        tally.rabies_deaths += int(n_rab.sum())

        if pop.agents is not None:
            dead_rows = []
            for k in range(c):
                # Snapshot the four groups before mutating any eta: the
                # outcome counts were drawn against the pre-transition
                # state, so the just-infected must not be progression
                # candidates within the same step.
                rows_s = _members(pop, k, EpiState.SUSCEPTIBLE)
                rows_e = _members(pop, k, EpiState.EXPOSED)
                rows_i = _members(pop, k, EpiState.INFECTED)
                rows_v = _members(pop, k, EpiState.VACCINATED)

                order = self.assign_rng.permutation(len(rows_s))
                a, b, d = int(n_inf[k]), int(n_upt[k]), int(n_nds[k])
                pop.agents.eta[rows_s[order[:a]]] = int(EpiState.EXPOSED)
                pop.agents.eta[rows_s[order[a:a + b]]] = int(
                    EpiState.VACCINATED)
                dead_rows.append(rows_s[order[a + b:a + b + d]])

                order = self.assign_rng.permutation(len(rows_e))
                a, d, r = int(n_prog[k]), int(n_nde[k]), int(n_rem_e[k])
                pop.agents.eta[rows_e[order[:a]]] = int(EpiState.INFECTED)
                dead_rows.append(rows_e[order[a:a + d + r]])

                order = self.assign_rng.permutation(len(rows_i))
                a, d, r = int(n_rab[k]), int(n_ndi[k]), int(n_rem_i[k])
                dead_rows.append(rows_i[order[:a + d + r]])

                order = self.assign_rng.permutation(len(rows_v))
                a, d = int(n_wane[k]), int(n_ndv[k])
                pop.agents.eta[rows_v[order[:a]]] = int(EpiState.SUSCEPTIBLE)
                dead_rows.append(rows_v[order[a:a + d]])
            dead_rows = [r for r in dead_rows if len(r)]
            if dead_rows:
                mask = np.ones(len(pop.agents.ids), dtype=bool)
                mask[np.concatenate(dead_rows)] = False
                pop.agents.keep(mask)

    # -- stage 3: births ----------------------------------------------------

    def _births(self, dt: float, tally: _StepTallies) -> None:
        pop = self.pop
        S = pop.counts[:, 0]
        J = pop.J()
        expected = pop.F * S * (1.0 - J / self.kappa) * dt
        if not expected.any():
            return
        realized = _stochastic_round(np.abs(expected), self.counts_rng)
        born = np.where(expected >= 0, realized, 0)
        # A crowded center (J above kappa) sheds susceptibles instead of
        # breeding; the decline is booked as natural mortality.
        lost = np.where(expected < 0, np.minimum(realized, S), 0)
        pop.counts[:, 0] += born - lost
        tally.births += int(born.sum())
        tally.natural_deaths += int(lost.sum())
        if pop.agents is not None:
            for k in np.flatnonzero(lost):
                rows = _members(pop, k, EpiState.SUSCEPTIBLE)
                pick = self.assign_rng.permutation(len(rows))[:int(lost[k])]
                mask = np.ones(len(pop.agents.ids), dtype=bool)
                mask[rows[pick]] = False
                pop.agents.keep(mask)
            total_born = int(born.sum())
            if total_born:
                centers = np.repeat(np.arange(self.graph.n_centers),
                                    born).astype(np.intp)
                ids = np.arange(pop.next_id, pop.next_id + total_born,
                                dtype=np.int64)
                pop.agents.append(
                    ids, np.full(total_born, int(EpiState.SUSCEPTIBLE),
                                 dtype=np.int8),
                    centers, self.centroids[centers, 0],
                    self.centroids[centers, 1])
        pop.next_id += int(born.sum())

    # -- stage 4: dispersal ---------------------------------------------------

    def _migration(self, dt: float) -> None:
        pop = self.pop
        if len(self.src) == 0:
            return
        J = pop.J().astype(float)
        F = pop.F
        denom = J[self.dst] * F[self.dst]
        grad = F[self.dst] - F[self.src]
        base = np.where(
            (denom > 0.0) & (grad > 0.0),
            self.edge_scale * grad / np.where(denom > 0.0, denom, 1.0), 0.0)
        if not base.any():
            return
        c = self.graph.n_centers
        lam_base = np.zeros(c)
        np.add.at(lam_base, self.src, base)
        # The per-agent leave hazard is m_class * lam_base[center]; the
        # destination odds are class-independent (the rate cancels).
        p_move = -np.expm1(-self._m_vec * (lam_base * dt))
        movers = self.counts_rng.binomial(pop.counts.T, p_move)
        if not movers.any():
            return
        for col, state in enumerate(_CLASS_ORDER):
            row = movers[col]
            for k in np.flatnonzero(row):
                out_edges = self._out_edges[k]
                weights = base[out_edges]
                parts = self.counts_rng.multinomial(
                    int(row[k]), weights / weights.sum())
                pop.counts[k, col] -= int(row[k])
                dests = self.dst[out_edges]
                np.add.at(pop.counts[:, col], dests, parts)
                if pop.agents is not None:
                    rows = _members(pop, k, state)
                    pick = self.assign_rng.permutation(len(rows))[
                        :int(row[k])]
                    chosen = rows[pick]
                    new_center = np.repeat(dests, parts)
                    pop.agents.center[chosen] = new_center
                    pop.agents.x[chosen] = self.centroids[new_center, 0]
                    pop.agents.y[chosen] = self.centroids[new_center, 1]

    # -- stage 5: food and stock weathering ----------------------------------

    def _food(self, temp: float, dt: float, tally: _StepTallies) -> None:
        pop, p = self.pop, self.params
        production = np.where(pop.F < self.xi, self.lam, 0.0)
        consumption = pop.counts @ self._cons_w
        pop.F = np.clip(pop.F + (production - consumption) * dt, 0.0, self.xi)
        r = decay_rate(temp, self.eip.decay, p.vaccine_lifetime)
        decayed = np.minimum(r * pop.C * dt, pop.C)
        pop.C = pop.C - decayed
        tally.dose_decay += float(decayed.sum())

    # -- driver ---------------------------------------------------------------

    def advance(self, events: dict | None, temp: float,
                dt: float) -> _StepTallies:
        tally = _StepTallies()
        if events:
            self._apply_events(events, tally)
        self._transitions(temp, dt, tally)
        self._births(dt, tally)
        self._migration(dt)
        self._food(temp, dt, tally)
        return tally

    def check_agent_consistency(self) -> None:
        pop = self.pop
        if pop.agents is None:
            return
        derived = np.zeros_like(pop.counts)
        for col, state in enumerate(_CLASS_ORDER):
            sel = pop.agents.eta == int(state)
            derived[:, col] = np.bincount(
                pop.agents.center[sel], minlength=self.graph.n_centers)
        if not np.array_equal(derived, pop.counts):
            raise AssertionError("agent bookkeeping diverged from counts")


def step(population: list[Agent], center_states: Sequence[CenterState],
         graph: EnvironmentGraph, params: ModelParams,
         eip: EipConfiguration, t: float, temperature: float,
         rng: np.random.Generator | int,
         world: WorldSpec | None = None,
         dt: float | None = None) -> tuple[list[Agent], list[CenterState]]:
    """Advance an explicit agent list by one step.

    Convenience wrapper over the engine for single-step use; agents'
    ``center`` fields must agree with their positions. Scheduled events
    whose timestamp falls inside [t, t + dt) fire first. Returns the new
    agent list and per-center states.
    """
    dt = params.dt if dt is None else dt
    if world is None:
        xs = [s.centroid[0] for s in graph.centers] or [0.0]
        ys = [s.centroid[1] for s in graph.centers] or [0.0]
        world = WorldSpec(w=max(max(xs), 1.0), h=max(max(ys), 1.0),
                          graph=graph)
    c = graph.n_centers
    counts = np.zeros((c, 4), dtype=np.int64)
    for agent in population:
        expected = assign_center((agent.x, agent.y), graph)
        if agent.center != expected:
            raise ValidationError(
                [f"agent {agent.id} lists center {agent.center} but is "
                 f"nearest to {expected}"])
        counts[agent.center, int(agent.eta)] += 1
    seed = rng if isinstance(rng, int) else None
    config = SimConfig(
        rng_seed=seed if seed is not None else 0,
        initial_counts=counts,
        initial_food=np.array([s.F for s in center_states], dtype=float),
        initial_stock=np.array([s.C for s in center_states], dtype=float),
        params=params, eip=eip)
    engine = _Engine(config, world, mode="agents")
    if not isinstance(rng, int) and rng is not None:
        engine.counts_rng = rng
        engine.assign_rng = rng
    # Adopt the caller's agents verbatim so identities survive the step.
    agents = AgentArrays(
        ids=np.array([a.id for a in population], dtype=np.int64),
        eta=np.array([int(a.eta) for a in population], dtype=np.int8),
        center=np.array([a.center for a in population], dtype=np.intp),
        x=np.array([a.x for a in population], dtype=float),
        y=np.array([a.y for a in population], dtype=float))
    engine.pop.agents = agents
    engine.pop.next_id = 1 + max((a.id for a in population), default=-1)
    events: dict[str, list] = {"vaccination": [], "dilution": []}
    for kind, sched in (("vaccination", eip.vaccination.events),
                        ("dilution", eip.dilution.events)):
        for tau, amounts in sched:
            if t <= tau < t + dt:
                events[kind].append(amounts)
    engine.advance(events if (events["vaccination"] or events["dilution"])
                   else None, temperature, dt)
    engine.check_agent_consistency()
    new_states = [CenterState(S=float(engine.pop.counts[k, 0]),
                              E=float(engine.pop.counts[k, 1]),
                              I=float(engine.pop.counts[k, 2]),
                              V=float(engine.pop.counts[k, 3]),
                              F=float(engine.pop.F[k]),
                              C=float(engine.pop.C[k]))
                  for k in range(c)]
    return engine.pop.agents.to_agents(), new_states


def run_simulation(config: SimConfig, world: WorldSpec,
                   temperature_series=20.0, horizon: float | None = None,
                   dt: float | None = None, mode: str = "counts",
                   snapshot_path=None, check_consistency: bool = False,
                   pdi_mode: str = "disease") -> EpizooticReport:
    """Full stochastic run; bitwise reproducible for a given seed.

    ``mode='agents'`` materializes individual jackals (required for
    per-agent snapshots); ``mode='counts'`` evolves the same stochastic
    process on per-center counts only and produces an identical count
    trajectory for the same seed, at a fraction of the cost.
    """
    params = config.params
    horizon = params.T if horizon is None else float(horizon)
    dt = params.dt if dt is None else float(dt)
    n_steps = int(round(horizon / dt))
    if abs(n_steps * dt - horizon) > 1e-9 * max(1.0, horizon):
        raise ValidationError(
            [f"horizon {horizon} is not a multiple of dt {dt}"])
    config.eip.validate_against_horizon(horizon)
    engine = _Engine(config, world, mode=mode)
    if snapshot_path is not None and mode != "agents":
        raise ValidationError(
            ["per-agent snapshots require mode='agents'"])

    traj = allocate(n_steps, world.graph.n_centers, dt, engine="abs",
                    seed=config.rng_seed)
    traj.meta["mode"] = mode
    per_step_events, final_events = _index_events(config.eip, dt, n_steps)

    snap_fh = None
    snap_writer = None
    if snapshot_path is not None:
        import csv

        snap_fh = open(snapshot_path, "w", newline="")
        snap_writer = csv.writer(snap_fh)
        snap_writer.writerow(["t", "id", "x", "y", "eta", "center"])

    def record(row):
        traj.S[row] = engine.pop.counts[:, 0]
        traj.E[row] = engine.pop.counts[:, 1]
        traj.I[row] = engine.pop.counts[:, 2]
        traj.V[row] = engine.pop.counts[:, 3]
        traj.F[row] = engine.pop.F
        traj.C[row] = engine.pop.C

    def snapshot(t):
        if snap_writer is None:
            return
        ag = engine.pop.agents
        for i in range(len(ag.ids)):
            snap_writer.writerow([t, int(ag.ids[i]), float(ag.x[i]),
                                  float(ag.y[i]),
                                  EpiState(int(ag.eta[i])).name.lower(),
                                  int(ag.center[i])])

    record(0)
    snapshot(0.0)
    cum = {name: 0.0 for name in traj.tallies}
    try:
        for step_idx in range(n_steps):
            t = step_idx * dt
            temp = temperature_at(temperature_series, t)
            tally = engine.advance(per_step_events.get(step_idx), temp, dt)
            if check_consistency:
                engine.check_agent_consistency()
            cum["infections"] += tally.infections
            cum["births"] += tally.births
            cum["natural_deaths"] += tally.natural_deaths
            cum["rabies_deaths"] += tally.rabies_deaths
            cum["diluted"] += tally.diluted
            cum["diluted_infected"] += tally.diluted_infected
            cum["dose_drops"] += tally.dose_drops
            cum["doses_taken"] += tally.doses_taken
            cum["doses_wasted"] += tally.doses_wasted
            cum["dose_decay"] += tally.dose_decay
            cum["strict_removals"] += tally.strict_removals
            row = step_idx + 1
            record(row)
            snapshot(row * dt)
            for name, value in cum.items():
                traj.tallies[name][row] = value
        if final_events["vaccination"] or final_events["dilution"]:
            tally = _StepTallies()
            engine._apply_events(final_events, tally)
            cum["diluted"] += tally.diluted
            cum["diluted_infected"] += tally.diluted_infected
            cum["dose_drops"] += tally.dose_drops
            record(n_steps)
            for name, value in cum.items():
                traj.tallies[name][n_steps] = value
    finally:
        if snap_fh is not None:
            snap_fh.close()

    traj.meta["params"] = params
    if mode == "agents":
        traj.meta["final_agents"] = engine.pop.agents
    return build_report(traj, pdi_mode=pdi_mode)

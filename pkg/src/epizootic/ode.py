"""Deterministic engine: coupled compartment/food/vaccine flows.

Each center evolves susceptible, exposed, infected and vaccinated
counts together with standing food and bait stock. Within a center the
contacts are well mixed; between adjacent centers individuals disperse
toward better per-capita food (ideal free distribution), with flux

    m * X_src * (F_dst - F_src) / (J_dst * F_dst)

clamped to the uphill direction. Degenerate denominators (no food or no
individuals at the destination) contribute zero flux, which keeps the
right-hand side finite everywhere.

Integration is forward Euler on an hourly grid. Scheduled interventions
(vaccine drops, culls) are instantaneous state changes applied at the
start of the step whose interval contains their timestamp, before that
step's continuous flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (CenterState, EnvironmentGraph, ModelParams,
                   ValidationError, validate_state)
from .eip import EipConfiguration, decay_rate, dilution_removals
from .trajectory import Trajectory, allocate


def movement_flux(class_rate: float, source_count: float, F_dest: float,
                  F_source: float, J_dest: float) -> float:
    """Dispersal flux (individuals/hour) from one center toward another.

    Positive only when the destination holds more food; the reverse
    direction is handled by the symmetric call with the roles swapped.
    A destination without food or without individuals attracts nothing.
    """
    if F_dest <= 0.0 or J_dest <= 0.0:
        return 0.0
    flux = class_rate * source_count * (F_dest - F_source) / (J_dest * F_dest)
    return max(0.0, flux)


def food_production(F: float, lam: float, xi: float) -> float:
    """Food regeneration rate: lam while below the cap, else zero."""
    return lam if F < xi else 0.0


def dirac_allocation(t: float, schedule: Sequence[tuple[float, float]],
                     dt: float = 1.0):
    """Total scheduled amount landing in the step starting at ``t``.

    An event at tau belongs to the unique step whose interval
    [t, t + dt) contains tau; simultaneous drops add up. Amounts may be
    scalars or per-center arrays.
    """
    total = None
    for tau, amount in schedule:
        if t <= tau < t + dt:
            total = amount if total is None else total + amount
    if total is None:
        return 0.0
    return total


@dataclass
class Derivative:
    """Per-center time derivatives of the six state fields."""

    dS: np.ndarray
    dE: np.ndarray
    dI: np.ndarray
    dV: np.ndarray
    dF: np.ndarray
    dC: np.ndarray


def _movement_terms(X: np.ndarray, rate: float, F: np.ndarray, J: np.ndarray,
                    src: np.ndarray, dst: np.ndarray,
                    scale: np.ndarray) -> np.ndarray:
    """Net dispersal derivative for one class over every directed edge."""
    dX = np.zeros_like(X)
    if len(src) == 0 or rate == 0.0:
        return dX
    denom = J[dst] * F[dst]
    with np.errstate(divide="ignore", invalid="ignore"):
        flux = rate * scale * X[src] * (F[dst] - F[src]) / denom
    flux = np.where((denom > 0.0) & (flux > 0.0), flux, 0.0)
    np.add.at(dX, dst, flux)
    np.subtract.at(dX, src, flux)
    return dX


def _rhs_arrays(S, E, I, V, F, C, graph_arrays, params: ModelParams,
                eip: EipConfiguration, temperature: float):
    """Continuous-flow derivatives plus the per-flow totals for tallies."""
    kappa, lam, xi, src, dst, scale = graph_arrays
    J = S + E + I + V
    safeJ = np.where(J > 0.0, J, 1.0)
    occupied = J > 0.0

    growth = F * S * (1.0 - J / kappa)
    infection = params.beta * S * I
    progression = params.phi * E
    rabies = params.gamma * I
    deaths_s = params.nu_s * S
    deaths_e = params.nu_e * E
    deaths_i = params.nu_i * I
    deaths_v = params.nu_s * V
    waning = params.omega * V

    stock_ratio = np.where(occupied, C / safeJ, 0.0)
    uptake_s = params.rho_s * stock_ratio * S
    uptake_e = params.rho_e * stock_ratio * E
    uptake_i = params.rho_i * stock_ratio * I

    dS = (growth - infection - deaths_s - uptake_s + waning
          + _movement_terms(S, params.m_s, F, J, src, dst, scale))
    dE = (infection - progression - deaths_e
          + _movement_terms(E, params.m_e, F, J, src, dst, scale))
    dI = (progression - rabies - deaths_i
          + _movement_terms(I, params.m_i, F, J, src, dst, scale))
    dV = (uptake_s - waning - deaths_v
          + _movement_terms(V, params.vaccinated_movement, F, J, src, dst,
                            scale))
    if params.strict_uptake_removal:
        dE = dE - uptake_e
        dI = dI - uptake_i

    production = np.where(F < xi, lam, 0.0)
    consumption = (params.c_s * (S + V) + params.c_e * E + params.c_i * I)
    dF = production - consumption

    r = decay_rate(temperature, eip.decay, params.vaccine_lifetime)
    decay_loss = r * C
    dC = -(uptake_s + uptake_e + uptake_i) - decay_loss

    flows = {
        "infections": infection,
        "births": np.maximum(growth, 0.0),
        "crowding": np.maximum(-growth, 0.0),
        "natural": deaths_s + deaths_e + deaths_i + deaths_v,
        "rabies": rabies,
        "taken": uptake_s,
        "wasted_e": uptake_e,
        "wasted_i": uptake_i,
        "decay": decay_loss,
    }
    return Derivative(dS, dE, dI, dV, dF, dC), flows


def _graph_arrays(graph: EnvironmentGraph):
    src, dst, scale = graph.directed_edges()
    return (graph.kappas(), graph.lams(), graph.xis(), src, dst, scale)


def _state_arrays(state: Sequence[CenterState]):
    get = lambda name: np.array([getattr(s, name) for s in state], dtype=float)
    return get("S"), get("E"), get("I"), get("V"), get("F"), get("C")


def rhs(state: Sequence[CenterState], graph: EnvironmentGraph,
        params: ModelParams, eip: EipConfiguration, t: float,
        temperature: float) -> Derivative:
    """Continuous-flow derivative of the full system at time ``t``.

    Scheduled interventions are impulses handled by :func:`integrate`,
    not part of the continuous derivative. Raises ValidationError
    (carrying the violation list) on an invalid input state.
    """
    violations = validate_state(state, graph)
    if violations:
        raise ValidationError(violations)
    arrays = _state_arrays(state)
    deriv, _ = _rhs_arrays(*arrays, _graph_arrays(graph), params, eip,
                           temperature)
    return deriv


def temperature_at(series, t: float) -> float:
    """Hourly temperature lookup; scalars mean a constant climate."""
    if np.isscalar(series):
        return float(series)
    arr = np.asarray(series, dtype=float)
    idx = min(int(t), len(arr) - 1)
    return float(arr[idx])


def _index_events(eip: EipConfiguration, dt: float, n_steps: int):
    """Bucket events by step index; events at the horizon apply post-run."""
    per_step: dict[int, dict[str, list[np.ndarray]]] = {}
    final: dict[str, list[np.ndarray]] = {"vaccination": [], "dilution": []}
    for kind, sched in (("vaccination", eip.vaccination),
                        ("dilution", eip.dilution)):
        for tau, amounts in sched.events:
            idx = int(math.floor(tau / dt + 1e-12))
            if idx >= n_steps:
                final[kind].append(amounts)
            else:
                per_step.setdefault(idx, {"vaccination": [],
                                          "dilution": []})[kind].append(amounts)
    return per_step, final


def _apply_events(S, E, I, V, C, events: dict, order, tally):
    """Instantaneous drops and culls; returns updated compartments."""
    for kind in order:
        for amounts in events.get(kind, ()):
            if kind == "vaccination":
                C += amounts
                tally["dose_drops"] += float(np.sum(amounts))
            else:
                for k in range(len(S)):
                    if amounts[k] <= 0:
                        continue
                    removed = dilution_removals(
                        amounts[k], (S[k], E[k], I[k], V[k]))
                    S[k] -= removed[0]
                    E[k] -= removed[1]
                    I[k] -= removed[2]
                    V[k] -= removed[3]
                    tally["diluted"] += float(removed.sum())
                    tally["diluted_infected"] += float(removed[2])
    return S, E, I, V, C


def integrate(initial: Sequence[CenterState], graph: EnvironmentGraph,
              params: ModelParams, eip: EipConfiguration | None,
              temperature_series, horizon: float | None = None,
              dt: float | None = None) -> Trajectory:
    """Forward-Euler trajectory over ``horizon`` hours.

    Produces horizon/dt + 1 snapshots. After every step compartments
    are floored at zero (activations counted in the ``clamp_events``
    tally) and food is capped at each center's xi. Vaccine-stock
    outflows are rescaled within a step if they would overdraw the
    stock, so dose accounting stays exact.
    """
    eip = eip or EipConfiguration.none()
    horizon = params.T if horizon is None else float(horizon)
    dt = params.dt if dt is None else float(dt)
    n_steps = int(round(horizon / dt))
    if abs(n_steps * dt - horizon) > 1e-9 * max(1.0, horizon):
        raise ValidationError(
            [f"horizon {horizon} is not a multiple of dt {dt}"])
    violations = validate_state(initial, graph)
    if violations:
        raise ValidationError(violations)
    eip.check_center_count(graph.n_centers)
    eip.validate_against_horizon(horizon)

    graph_arrays = _graph_arrays(graph)
    xi = graph_arrays[2]
    traj = allocate(n_steps, graph.n_centers, dt, engine="ode")
    S, E, I, V, F, C = (np.array(a, dtype=float)
                        for a in _state_arrays(initial))
    per_step_events, final_events = _index_events(eip, dt, n_steps)

    def record(row):
        traj.S[row], traj.E[row], traj.I[row] = S, E, I
        traj.V[row], traj.F[row], traj.C[row] = V, F, C

    record(0)
    cum = {name: 0.0 for name in traj.tallies}
    for step in range(n_steps):
        t = step * dt
        if step in per_step_events:
            S, E, I, V, C = _apply_events(S, E, I, V, C,
                                          per_step_events[step],
                                          eip.event_order, cum)
        temp = temperature_at(temperature_series, t)
        deriv, flows = _rhs_arrays(S, E, I, V, F, C, graph_arrays, params,
                                   eip, temp)

        # Rescale stock outflows where the step would overdraw C, so the
        # drop = taken + wasted + decay + residual identity holds exactly;
        # unbacked uptake also immunizes (or, in strict mode, removes)
        # nobody, so the compartment flows scale with it.
        wasted_all = flows["wasted_e"] + flows["wasted_i"]
        outflow = (flows["taken"] + wasted_all + flows["decay"]) * dt
        scale = np.where(outflow > C, np.divide(
            C, outflow, out=np.ones_like(C), where=outflow > 0.0), 1.0)
        taken = flows["taken"] * scale * dt
        wasted = wasted_all * scale * dt
        decayed = flows["decay"] * scale * dt
        unbacked = flows["taken"] * (1.0 - scale)

        S = S + (deriv.dS + unbacked) * dt
        E = E + deriv.dE * dt
        I = I + deriv.dI * dt
        V = V + (deriv.dV - unbacked) * dt
        if params.strict_uptake_removal:
            E = E + flows["wasted_e"] * (1.0 - scale) * dt
            I = I + flows["wasted_i"] * (1.0 - scale) * dt
        F = F + deriv.dF * dt
        C = C - (taken + wasted + decayed)

        clamped = 0
        for arr in (S, E, I, V):
            neg = arr < 0.0
            clamped += int(np.count_nonzero(neg))
            arr[neg] = 0.0
        np.clip(F, 0.0, xi, out=F)

        cum["infections"] += float(flows["infections"].sum()) * dt
        cum["births"] += float(flows["births"].sum()) * dt
        cum["natural_deaths"] += float(
            (flows["natural"] + flows["crowding"]).sum()) * dt
        cum["rabies_deaths"] += float(flows["rabies"].sum()) * dt
        cum["doses_taken"] += float(taken.sum())
        cum["doses_wasted"] += float(wasted.sum())
        cum["dose_decay"] += float(decayed.sum())
        if params.strict_uptake_removal:
            cum["strict_removals"] += float(wasted.sum())
        cum["clamp_events"] += clamped

        row = step + 1
        record(row)
        for name, value in cum.items():
            traj.tallies[name][row] = value

    if final_events["vaccination"] or final_events["dilution"]:
        S, E, I, V, C = _apply_events(S, E, I, V, C, final_events,
                                      eip.event_order, cum)
        record(n_steps)
        for name, value in cum.items():
            traj.tallies[name][n_steps] = value

    traj.meta["params"] = params
    return traj

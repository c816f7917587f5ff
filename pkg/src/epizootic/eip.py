"""Intervention policies: timed vaccine drops and population dilution.

A vaccination event adds whole bait doses to a center's stock; baits
lose potency over time at a temperature-dependent rate and are consumed
by all epidemiological classes, but only susceptible consumers gain
immunity (doses taken by exposed/infected animals are wasted). Dilution
(culling) removes a fixed number of individuals from a center without
regard to their epidemiological state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ValidationError


@dataclass(frozen=True)
class DecayModel:
    """Temperature-driven potency loss of deployed baits.

    The base rate is the half-life rate ln(2)/lifetime; a linear factor
    1 + sensitivity * (T - reference) modulates it (floored at zero), so
    warmer weather spoils baits faster. ``lifetime`` of None defers to
    the sampled ``ModelParams.vaccine_lifetime``.
    """

    lifetime: float | None = None          # hours
    reference_temperature: float = 20.0    # deg C
    temperature_sensitivity: float = 0.0   # per deg C

    def __post_init__(self):
        if self.lifetime is not None and not self.lifetime > 0:
            raise ValidationError([f"lifetime must be > 0, got {self.lifetime}"])

    def effective_lifetime(self, default: float) -> float:
        return default if self.lifetime is None else self.lifetime


def decay_rate(temperature: float, decay: DecayModel,
               default_lifetime: float = 420.0) -> float:
    """Hourly potency-loss rate at the given ambient temperature."""
    lifetime = decay.effective_lifetime(default_lifetime)
    if not lifetime > 0:
        raise ValidationError([f"lifetime must be > 0, got {lifetime}"])
    modifier = 1.0 + decay.temperature_sensitivity * (
        temperature - decay.reference_temperature)
    return (math.log(2.0) / lifetime) * max(0.0, modifier)


def _check_events(events, what: str) -> list[tuple[float, np.ndarray]]:
    cleaned = []
    problems = []
    for tau, amounts in events:
        arr = np.asarray(amounts, dtype=float)
        if tau < 0:
            problems.append(f"{what} event at negative time {tau}")
        if np.any(arr < 0):
            problems.append(f"{what} event at t={tau} has negative amounts")
        if np.any(arr != np.floor(arr)):
            problems.append(f"{what} event at t={tau} has non-integer amounts")
        cleaned.append((float(tau), arr))
    if problems:
        raise ValidationError(problems)
    return sorted(cleaned, key=lambda ev: ev[0])


@dataclass
class VaccinationSchedule:
    """Timed per-center dose drops: list of (tau, doses-per-center)."""

    events: list[tuple[float, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        self.events = _check_events(self.events, "vaccination")

    def __bool__(self):
        return bool(self.events)


@dataclass
class DilutionSchedule:
    """Timed per-center removals: list of (tau, removals-per-center)."""

    events: list[tuple[float, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        self.events = _check_events(self.events, "dilution")

    def __bool__(self):
        return bool(self.events)


@dataclass
class EipConfiguration:
    """One complete policy: vaccination plus dilution schedules.

    ``event_order`` fixes how simultaneous events resolve; the default
    drops vaccines before culling so a same-hour cull acts on the
    freshly stocked population.
    """

    vaccination: VaccinationSchedule = field(default_factory=VaccinationSchedule)
    dilution: DilutionSchedule = field(default_factory=DilutionSchedule)
    decay: DecayModel = field(default_factory=DecayModel)
    event_order: tuple[str, ...] = ("vaccination", "dilution")

    def __post_init__(self):
        if sorted(self.event_order) != ["dilution", "vaccination"]:
            raise ValidationError(
                [f"event_order must permute (vaccination, dilution), "
                 f"got {self.event_order}"])

    def validate_against_horizon(self, horizon: float) -> None:
        late = [tau for tau, _ in self.vaccination.events if tau > horizon]
        late += [tau for tau, _ in self.dilution.events if tau > horizon]
        if late:
            raise ValidationError(
                [f"EIP event at t={tau} is beyond the horizon {horizon}"
                 for tau in late])

    def check_center_count(self, n_centers: int) -> None:
        for label, sched in (("vaccination", self.vaccination),
                             ("dilution", self.dilution)):
            for tau, amounts in sched.events:
                if len(amounts) != n_centers:
                    raise ValidationError(
                        [f"{label} event at t={tau} lists {len(amounts)} "
                         f"centers, graph has {n_centers}"])

    @classmethod
    def none(cls) -> "EipConfiguration":
        return cls()

    def to_dict(self) -> dict:
        return {
            "vaccination": [[tau, [float(a) for a in amounts]]
                            for tau, amounts in self.vaccination.events],
            "dilution": [[tau, [float(a) for a in amounts]]
                         for tau, amounts in self.dilution.events],
            "decay": {
                "lifetime": self.decay.lifetime,
                "reference_temperature": self.decay.reference_temperature,
                "temperature_sensitivity": self.decay.temperature_sensitivity,
            },
            "event_order": list(self.event_order),
        }

    @classmethod
    def from_dict(cls, data) -> "EipConfiguration":
        decay = data.get("decay", {})
        return cls(
            vaccination=VaccinationSchedule(
                [(t, np.asarray(a, dtype=float))
                 for t, a in data.get("vaccination", [])]),
            dilution=DilutionSchedule(
                [(t, np.asarray(a, dtype=float))
                 for t, a in data.get("dilution", [])]),
            decay=DecayModel(
                lifetime=decay.get("lifetime"),
                reference_temperature=decay.get("reference_temperature", 20.0),
                temperature_sensitivity=decay.get("temperature_sensitivity", 0.0),
            ),
            event_order=tuple(data.get("event_order",
                                       ("vaccination", "dilution"))),
        )


def uptake_flow(C: float, X: float, J: float, rho_x: float) -> float:
    """Baits consumed per hour by a class of X individuals.

    Flow is rho_x * C * X / J; an empty center (J == 0) consumes
    nothing. Only the susceptible flow creates vaccinated individuals;
    uptake by other classes burns stock with no epidemiological effect.
    """
    if J <= 0 or C <= 0 or X <= 0:
        return 0.0
    return rho_x * C * X / J


def dilution_removals(psi_k: float, center_counts: Sequence[float],
                      rng: np.random.Generator | None = None
                      ) -> np.ndarray:
    """Split one cull of ``psi_k`` individuals across the classes.

    At most the living population is removed. Without an rng the split
    is proportional to class shares (the deterministic engine's rule);
    with an rng it samples the removed individuals uniformly without
    replacement across the whole center, which is the non-selective cull
    of the agent engine (multivariate hypergeometric on class counts).
    """
    counts = np.asarray(center_counts, dtype=float)
    if np.any(counts < 0) or psi_k < 0:
        raise ValidationError(["dilution inputs must be nonnegative"])
    total = counts.sum()
    removed_total = min(float(psi_k), total)
    if removed_total <= 0 or total <= 0:
        return np.zeros_like(counts)
    if rng is None:
        return counts * (removed_total / total)
    int_counts = np.rint(counts).astype(np.int64)
    take = int(round(min(removed_total, int_counts.sum())))
    return rng.multivariate_hypergeometric(int_counts, take).astype(float)


def default_vaccination_budget(initial_population: float,
                               vaccines_per_individual: float = 1.0) -> int:
    """Total default dose budget: one bait per individual."""
    return int(round(initial_population * vaccines_per_individual))


def default_dilution_budget(initial_population: float,
                            dilution_portion: float = 0.05) -> int:
    """Total default cull budget: 5% of the initial population."""
    return int(round(initial_population * dilution_portion))


def per_center_default_eip(initial_counts: Sequence[float],
                           vaccines_per_individual: float = 1.0,
                           dilution_portion: float = 0.05,
                           vaccinate: bool = True,
                           dilute: bool = True,
                           at: float = 0.0) -> EipConfiguration:
    """The stock policy: one event per EIP at t=``at`` sized per center."""
    counts = np.asarray(initial_counts, dtype=float)
    vacc = VaccinationSchedule()
    dil = DilutionSchedule()
    if vaccinate:
        doses = np.rint(counts * vaccines_per_individual)
        vacc = VaccinationSchedule([(at, doses)])
    if dilute:
        removals = np.rint(counts * dilution_portion)
        dil = DilutionSchedule([(at, removals)])
    return EipConfiguration(vaccination=vacc, dilution=dil)

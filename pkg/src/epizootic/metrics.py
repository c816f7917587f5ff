"""Outbreak severity metrics computed from a finished trajectory.

Three summaries describe one run: the average reproduction number (how
many follow-up infections the average infected individual produced, as
the mean of stepwise ratios), the maximum simultaneous infected count
relative to the starting population, and the portion of individuals
that died out of everyone that ever lived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .trajectory import Trajectory


def r_t(I_prev: float, I_curr: float,
        removed_delta: float) -> float | None:
    """Stepwise reproduction ratio (I_t - I_{t-1} + R_t - R_{t-1}) / I_{t-1}.

    Undefined (None) when nobody was infected at the previous step; such
    steps are excluded from averaging rather than counted as zero.
    """
    if I_prev <= 0:
        return None
    return (I_curr - I_prev + removed_delta) / I_prev


def _removed_series(traj: Trajectory, variant: str) -> np.ndarray:
    """Cumulative epidemic removals feeding the R(t) term.

    The model has no recovered class (rabies is fatal), so removals are
    deaths from the virus; the ``with_dilution`` variant also counts
    culled infected individuals.
    """
    removed = traj.tally("rabies_deaths")
    if variant == "with_dilution":
        removed = removed + traj.tally("diluted_infected")
    elif variant != "rabies":
        raise ValueError(f"unknown removal variant {variant!r}")
    return removed


@dataclass
class ArnSummary:
    """Windowed and full-horizon averages of the stepwise ratios."""

    windowed: float          # mean over steps with I(t-1) > 0, floored at 0
    raw: float               # same mean before flooring
    full_horizon: float      # undefined steps counted as zero
    n_defined: int
    no_infection: bool


def arn_summary(traj: Trajectory, variant: str = "rabies") -> ArnSummary:
    I = traj.total("I")
    removed = _removed_series(traj, variant)
    values = []
    for t in range(1, len(I)):
        value = r_t(I[t - 1], I[t], removed[t] - removed[t - 1])
        if value is not None:
            values.append(value)
    if not values:
        return ArnSummary(windowed=0.0, raw=0.0, full_horizon=0.0,
                          n_defined=0, no_infection=True)
    raw = float(np.mean(values))
    total_steps = len(I) - 1
    return ArnSummary(windowed=max(0.0, raw), raw=raw,
                      full_horizon=max(0.0, float(np.sum(values)) / total_steps),
                      n_defined=len(values), no_infection=False)


def arn(traj: Trajectory, variant: str = "rabies") -> float:
    """Average reproduction number over the outbreak window, floored at 0."""
    return arn_summary(traj, variant).windowed


def mi(traj: Trajectory, J0: float | None = None) -> float:
    """Largest simultaneous infected count over the initial population."""
    J0 = traj.initial_population if J0 is None else float(J0)
    if J0 <= 0:
        raise ValueError("initial population must be positive")
    return float(traj.total("I").max()) / J0


def pdi(traj: Trajectory, J0: float | None = None,
        mode: str = "disease") -> float:
    """Portion of dead individuals among everyone that ever lived.

    ``disease`` counts rabies deaths only; ``all`` adds natural deaths
    and culled individuals (the accounting used when interventions are
    compared, since a cull is a death regardless of the epidemic's net
    effect). The denominator includes births, so the value stays in
    [0, 1].
    """
    J0 = traj.initial_population if J0 is None else float(J0)
    if J0 <= 0:
        raise ValueError("initial population must be positive")
    deaths = traj.final_tally("rabies_deaths")
    if mode == "all":
        deaths += (traj.final_tally("natural_deaths")
                   + traj.final_tally("diluted")
                   + traj.final_tally("strict_removals"))
    elif mode != "disease":
        raise ValueError(f"unknown pdi mode {mode!r}")
    ever_alive = J0 + traj.final_tally("births")
    return deaths / ever_alive


@dataclass
class EpizooticReport:
    """Trajectory plus the three severity summaries for one run."""

    trajectory: Trajectory
    arn: float
    mi: float
    pdi: float
    arn_raw: float
    arn_full_horizon: float
    pdi_disease: float
    pdi_all: float
    flags: list[str] = field(default_factory=list)

    def to_row(self) -> dict:
        return {"arn": self.arn, "mi": self.mi, "pdi": self.pdi,
                "flags": "|".join(self.flags)}


def build_report(traj: Trajectory, pdi_mode: str = "disease",
                 arn_variant: str = "rabies") -> EpizooticReport:
    summary = arn_summary(traj, arn_variant)
    flags = []
    if summary.no_infection:
        flags.append("no-infection")
    if summary.raw < 0:
        flags.append("arn-floored")
    clamps = traj.final_tally("clamp_events")
    if clamps > 0:
        flags.append(f"clamped:{int(clamps)}")
    pdi_disease = pdi(traj, mode="disease")
    pdi_all = pdi(traj, mode="all")
    return EpizooticReport(
        trajectory=traj,
        arn=summary.windowed,
        mi=mi(traj),
        pdi=pdi_disease if pdi_mode == "disease" else pdi_all,
        arn_raw=summary.raw,
        arn_full_horizon=summary.full_horizon,
        pdi_disease=pdi_disease,
        pdi_all=pdi_all,
        flags=flags,
    )

"""Simulation output container shared by both engines.

A trajectory holds one snapshot per step per center for the six state
fields plus running tallies of the flows that matter for bookkeeping
and the epizootic metrics (births, deaths by cause, culled individuals,
vaccine-dose fates).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

#: Cumulative flow tallies carried along the trajectory, all per whole
#: population (summed over centers).
TALLY_NAMES = (
    "infections",
    "births",
    "natural_deaths",
    "rabies_deaths",
    "diluted",
    "diluted_infected",
    "dose_drops",
    "doses_taken",      # consumed by susceptibles (create immunity)
    "doses_wasted",     # consumed by exposed/infected (no effect)
    "dose_decay",       # potency lost to weathering
    "strict_removals",  # hosts removed by strict uptake mode
    "clamp_events",     # post-step floor/cap activations (ODE only)
)


@dataclass
class Trajectory:
    """Per-step, per-center states plus cumulative tallies.

    State arrays have shape (n_steps + 1, n_centers); row 0 is the
    initial condition. Tally arrays have shape (n_steps + 1,) and are
    nondecreasing.
    """

    times: np.ndarray
    S: np.ndarray
    E: np.ndarray
    I: np.ndarray
    V: np.ndarray
    F: np.ndarray
    C: np.ndarray
    tallies: dict[str, np.ndarray]
    engine: str
    dt: float
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def n_centers(self) -> int:
        return self.S.shape[1]

    def J(self) -> np.ndarray:
        """Per-step, per-center living population."""
        return self.S + self.E + self.I + self.V

    def total(self, name: str) -> np.ndarray:
        """Per-step population-wide sum of one state field."""
        return getattr(self, name).sum(axis=1)

    @property
    def initial_population(self) -> float:
        return float(self.J()[0].sum())

    def tally(self, name: str) -> np.ndarray:
        return self.tallies[name]

    def final_tally(self, name: str) -> float:
        return float(self.tallies[name][-1])

    def state_at(self, step: int):
        from .core import CenterState

        return [CenterState(S=float(self.S[step, k]), E=float(self.E[step, k]),
                            I=float(self.I[step, k]), V=float(self.V[step, k]),
                            F=float(self.F[step, k]), C=float(self.C[step, k]))
                for k in range(self.n_centers)]

    def to_csv(self, path) -> None:
        """Write one row per (step, center): t, center_id, S, E, I, V, F, C."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "center_id", "S", "E", "I", "V", "F", "C"])
            for row in range(len(self.times)):
                t = self.times[row]
                for k in range(self.n_centers):
                    writer.writerow([
                        t, k,
                        self.S[row, k], self.E[row, k], self.I[row, k],
                        self.V[row, k], self.F[row, k], self.C[row, k],
                    ])


def allocate(n_steps: int, n_centers: int, dt: float, engine: str,
             seed: int | None = None) -> Trajectory:
    """Pre-size a trajectory; engines fill rows in place."""
    shape = (n_steps + 1, n_centers)
    return Trajectory(
        times=np.arange(n_steps + 1, dtype=float) * dt,
        S=np.zeros(shape), E=np.zeros(shape), I=np.zeros(shape),
        V=np.zeros(shape), F=np.zeros(shape), C=np.zeros(shape),
        tallies={name: np.zeros(n_steps + 1) for name in TALLY_NAMES},
        engine=engine, dt=dt, seed=seed,
    )

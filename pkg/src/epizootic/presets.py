"""Bundled defaults: a small valley landscape and a stock scenario.

The default graph is a six-center chain with two shortcut corridors,
loosely shaped like a narrow agricultural valley. Carrying capacities
span the plausible 20-150 range; food production is set slightly below
what each center's full population would eat, which keeps standing food
scarce and makes dispersal respond to population perturbations (the
regime where culling measurably redistributes animals).
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import CenterSpec, EnvironmentGraph
from .experiments import Scenario

#: Food production as a fraction of the consumption of a full center.
DEFAULT_FOOD_BALANCE = 0.75

_DEFAULT_KAPPAS = (60.0, 95.0, 130.0, 75.0, 45.0, 110.0)
_DEFAULT_CENTROIDS = ((2.0, 3.0), (7.0, 6.0), (13.0, 4.0),
                      (18.0, 8.0), (23.0, 3.0), (28.0, 6.0))
_DEFAULT_EDGES = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (2, 4))


def default_graph(food_balance: float = DEFAULT_FOOD_BALANCE,
                  xi: float = 1.0,
                  consumption_rate: float = 7.9e-3) -> EnvironmentGraph:
    """The stock six-center valley landscape."""
    centers = [
        CenterSpec(kappa=kappa, lam=food_balance * consumption_rate * kappa,
                   xi=xi, centroid=centroid)
        for kappa, centroid in zip(_DEFAULT_KAPPAS, _DEFAULT_CENTROIDS)
    ]
    return EnvironmentGraph(centers, _DEFAULT_EDGES)


def default_scenario(**overrides) -> Scenario:
    """The stock campaign configuration on the default landscape."""
    base = Scenario(
        graph=default_graph().to_dict(),
        ranges={},
        temperature=20.0,
        food_balance_ratio=DEFAULT_FOOD_BALANCE,
    )
    return base.with_(**overrides) if overrides else base


def seasonal_temperature(hours: int = 8760, mean: float = 21.0,
                         amplitude: float = 8.0,
                         coldest_hour: float = 360.0) -> np.ndarray:
    """Smooth annual temperature cycle (deg C), hottest mid-year."""
    t = np.arange(hours, dtype=float)
    phase = 2.0 * math.pi * (t - coldest_hour) / 8760.0
    return mean - amplitude * np.cos(phase)


def write_temperature_csv(path, values=None, daily: bool = False) -> None:
    values = seasonal_temperature() if values is None else np.asarray(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day" if daily else "hour", "temperature"])
        for i, value in enumerate(values):
            writer.writerow([i, float(value)])


def write_default_inputs(directory) -> dict[str, Path]:
    """Materialize graph/ranges/temperature/scenario files for the CLI."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "graph": directory / "graph.json",
        "ranges": directory / "ranges.json",
        "temperature": directory / "temperature.csv",
        "scenario": directory / "scenario.json",
    }
    with open(paths["graph"], "w") as fh:
        json.dump(default_graph().to_dict(), fh, indent=2)
        fh.write("\n")
    with open(paths["ranges"], "w") as fh:
        json.dump({}, fh)
        fh.write("\n")
    write_temperature_csv(paths["temperature"])
    scenario = default_scenario().to_dict()
    scenario["graph"] = "graph.json"
    scenario["ranges"] = "ranges.json"
    scenario["temperature"] = "temperature.csv"
    with open(paths["scenario"], "w") as fh:
        json.dump(scenario, fh, indent=2)
        fh.write("\n")
    return paths

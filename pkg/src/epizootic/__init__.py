"""Metapopulation rabies-outbreak simulator with intervention optimization.

The package couples an SEI+V compartment model on a graph of activity
centers with food-driven dispersal, in two interchangeable engines (a
deterministic forward-Euler system and a stochastic agent simulation),
adds timed vaccination/culling policies, severity metrics, budget
allocation search, and a Monte-Carlo campaign runner.
"""

__version__ = "0.1.0"

from .core import (CenterSpec, CenterState, EnvironmentGraph, ModelParams,
                   ParamRanges, ValidationError, load_graph,
                   load_param_ranges, sample_params, save_graph,
                   validate_state)
from .eip import (DecayModel, DilutionSchedule, EipConfiguration,
                  VaccinationSchedule, decay_rate, dilution_removals,
                  uptake_flow)
from .ode import (Derivative, dirac_allocation, food_production, integrate,
                  movement_flux, rhs)
from .abm import (Agent, EpiState, SimConfig, WorldSpec, assign_center,
                  run_simulation, step)
from .metrics import (EpizooticReport, arn, arn_summary, build_report, mi,
                      pdi, r_t)
from .optimize import (Allocation, AllocationProblem, OptimizationResult,
                       brute_force, composition_count, enumerate_allocations,
                       evaluate, greedy, optimize, random_allocation)
from .experiments import (CampaignResult, ConfigError, Scenario, SweepSpec,
                          TemperatureSeries, load_scenario, load_temperature,
                          run_campaign, run_replicate, run_sensitivity,
                          run_sweep)
from .trajectory import Trajectory

__all__ = [name for name in dir() if not name.startswith("_")]

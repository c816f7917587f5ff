"""Budget allocation search for intervention policies.

A policymaker holds ``b`` identical units (vaccine doses or cull
removals) to distribute over the activity centers; every distribution
is a composition of b into n nonnegative parts. Small search spaces are
enumerated outright; otherwise a greedy pass places one unit per round
at the center whose marginal effect on the objective is best, costing
b * n evaluations in total. A uniform-random allocation serves as the
null baseline.

Objectives are noisy simulation outputs, so competing allocations are
always scored under common random numbers: one fixed seed per replicate,
shared by every allocation, which makes the argmin meaningful at small
replicate counts and the whole search deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .core import ValidationError


def composition_count(b: int, n: int) -> int:
    """Number of ways to split b identical units over n centers."""
    if b < 0 or n < 0:
        raise ValueError("budget and center count must be nonnegative")
    if n == 0:
        return 1 if b == 0 else 0
    return math.comb(b + n - 1, n - 1)


def enumerate_allocations(b: int, n_centers: int) -> Iterator[tuple[int, ...]]:
    """All compositions of b into n_centers parts, each exactly once.

    Deterministic order: the first coordinate descends, then recursively
    the rest, e.g. (2,0), (1,1), (0,2).
    """
    if b < 0 or n_centers < 0:
        raise ValueError("budget and center count must be nonnegative")
    if n_centers == 0:
        if b == 0:
            yield ()
        return
    if n_centers == 1:
        yield (b,)
        return
    for first in range(b, -1, -1):
        for rest in enumerate_allocations(b - first, n_centers - 1):
            yield (first,) + rest


def random_composition(b: int, n_centers: int,
                       rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform draw over compositions via random bar placement."""
    if n_centers == 0:
        if b != 0:
            raise ValueError("cannot place a positive budget on 0 centers")
        return ()
    if n_centers == 1:
        return (b,)
    if b == 0:
        return (0,) * n_centers
    slots = b + n_centers - 1
    bars = np.sort(rng.choice(slots, size=n_centers - 1, replace=False))
    bounds = np.concatenate([[-1], bars, [slots]])
    parts = np.diff(bounds) - 1
    return tuple(int(v) for v in parts)


@dataclass(frozen=True)
class Allocation:
    """Per-center unit amounts (summing to the budget) and event time."""

    amounts: tuple[int, ...]
    tau: float = 0.0

    def __post_init__(self):
        if any(a < 0 for a in self.amounts):
            raise ValidationError(["allocation amounts must be >= 0"])

    @property
    def budget(self) -> int:
        return int(sum(self.amounts))


@dataclass
class AllocationProblem:
    """One search instance: budget, landscape size, objective machinery.

    Exactly one of ``objective_fn`` (deterministic synthetic objective,
    used by verification tests) or ``simulator`` must be provided. The
    simulator maps (amounts, replicate_seed) to one noisy objective
    sample; :func:`evaluate` averages it over ``replicates`` common
    seeds derived from ``base_seed``.
    """

    budget: int
    n_centers: int
    eip_kind: str = "vaccination"           # or "dilution"
    objective: str = "arn"                  # metric the simulator reports
    replicates: int = 5
    base_seed: int = 0
    event_time: float = 0.0
    unit_size: int = 1                      # doses/removals per unit
    brute_force_threshold: int = 1000
    objective_fn: Callable[[Sequence[int]], float] | None = None
    simulator: Callable[[Sequence[int], int], float] | None = None

    def __post_init__(self):
        if self.budget < 0:
            raise ValidationError(["budget must be >= 0"])
        if self.n_centers < 1:
            raise ValidationError(["need at least one center"])
        if self.replicates < 1:
            raise ValidationError(["replicates must be >= 1"])
        if (self.objective_fn is None) == (self.simulator is None):
            raise ValidationError(
                ["provide exactly one of objective_fn or simulator"])
        if self.eip_kind not in ("vaccination", "dilution"):
            raise ValidationError([f"unknown eip_kind {self.eip_kind!r}"])

    def seed_set(self) -> list[int]:
        """The common-random-number seeds shared by every allocation."""
        words = np.random.SeedSequence(self.base_seed).generate_state(
            self.replicates, dtype=np.uint64)
        return [int(w) for w in words]


@dataclass
class OptimizationResult:
    allocation: Allocation
    value: float
    method: str
    evaluations: int
    trace: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation.amounts),
            "tau": self.allocation.tau,
            "value": self.value,
            "method": self.method,
            "evaluations": self.evaluations,
            "trace": self.trace,
        }


def evaluate(allocation: Allocation | Sequence[int],
             problem: AllocationProblem) -> float:
    """Objective value of one allocation under common random numbers."""
    amounts = (allocation.amounts if isinstance(allocation, Allocation)
               else tuple(int(a) for a in allocation))
    if len(amounts) != problem.n_centers:
        raise ValidationError(
            [f"allocation lists {len(amounts)} centers, problem has "
             f"{problem.n_centers}"])
    if problem.objective_fn is not None:
        return float(problem.objective_fn(amounts))
    values = []
    for seed in problem.seed_set():
        try:
            values.append(float(problem.simulator(amounts, seed)))
        except Exception as exc:
            raise RuntimeError(
                f"simulation failed for allocation {amounts}: {exc}") from exc
    return float(np.mean(values))


class BruteForceRefusal(RuntimeError):
    """Search space too large to enumerate; use the greedy heuristic."""


def brute_force(problem: AllocationProblem,
                record_trace: bool = False) -> OptimizationResult:
    """Exact argmin over every composition; ties keep enumeration order."""
    count = composition_count(problem.budget, problem.n_centers)
    if count >= problem.brute_force_threshold:
        raise BruteForceRefusal(
            f"{count} allocations >= threshold "
            f"{problem.brute_force_threshold}; use greedy() instead")
    best_alloc = None
    best_value = math.inf
    trace = []
    evaluations = 0
    for amounts in enumerate_allocations(problem.budget, problem.n_centers):
        value = evaluate(amounts, problem)
        evaluations += 1
        if record_trace:
            trace.append({"amounts": list(amounts), "value": value})
        if value < best_value:
            best_value = value
            best_alloc = amounts
    return OptimizationResult(
        allocation=Allocation(best_alloc, tau=problem.event_time),
        value=best_value, method="brute_force", evaluations=evaluations,
        trace=trace)


def greedy(problem: AllocationProblem) -> OptimizationResult:
    """Place one unit per round at the center with the best marginal value.

    Runs budget rounds of n_centers evaluations each; ties go to the
    lowest center index. The final value is the last winning round's.
    """
    current = [0] * problem.n_centers
    evaluations = 0
    trace = []
    value = evaluate(current, problem) if problem.budget == 0 else math.nan
    for round_idx in range(problem.budget):
        best_center = -1
        best_value = math.inf
        for k in range(problem.n_centers):
            current[k] += 1
            candidate_value = evaluate(current, problem)
            evaluations += 1
            current[k] -= 1
            if candidate_value < best_value:
                best_value = candidate_value
                best_center = k
        current[best_center] += 1
        value = best_value
        trace.append({"round": round_idx, "center": best_center,
                      "value": best_value})
    return OptimizationResult(
        allocation=Allocation(tuple(current), tau=problem.event_time),
        value=float(value), method="greedy", evaluations=evaluations,
        trace=trace)


def random_allocation(problem: AllocationProblem,
                      seed: int) -> OptimizationResult:
    """Null baseline: a uniform draw over all compositions, then scored."""
    rng = np.random.default_rng(seed)
    amounts = random_composition(problem.budget, problem.n_centers, rng)
    value = evaluate(amounts, problem)
    return OptimizationResult(
        allocation=Allocation(amounts, tau=problem.event_time),
        value=value, method="random", evaluations=1, trace=[])


def optimize(problem: AllocationProblem,
             record_trace: bool = False) -> OptimizationResult:
    """Brute force when the composition count is under the threshold,
    otherwise greedy; the chosen method is recorded in the result."""
    count = composition_count(problem.budget, problem.n_centers)
    if count < problem.brute_force_threshold:
        return brute_force(problem, record_trace=record_trace)
    return greedy(problem)

"""Independent oracles for validating the analytic engines.

These deliberately avoid the solver machinery: ``enumerate_histories``
expands the full interaction tree with no memoization,
``brute_force_optimal`` evaluates every deterministic plan through that
expansion, and ``simulate`` runs seeded Monte Carlo rollouts.  The random
generator is Python's Mersenne Twister; a fixed seed gives bit-identical
estimates on every run.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .env import _check_couplable
from .errors import BudgetExceeded
from .machine import Machine, Prob
from .plans import PlanTree, enumerate_plan_trees, plan_count, plan_to_machine

HISTORY_BUDGET = 10**7
PLAN_BUDGET = 10**6


@dataclass(frozen=True)
class SimEstimate:
    """Monte Carlo estimate of the success probability within a horizon."""

    mean: float
    stderr: float
    runs: int
    horizon: int
    seed: int


def simulate(policy: Machine, env, horizon: int, runs: int, seed: int) -> SimEstimate:
    """Estimate P(success within ``horizon``) from seeded coupled rollouts."""
    if horizon < 1 or runs < 1:
        raise ValueError("horizon and runs must be >= 1")
    _check_couplable(policy, env)
    rng = random.Random(seed)
    successes = 0
    for _ in range(runs):
        qp = policy.initial
        qe = env.initial
        for _ in range(horizon):
            a = _draw(rng, policy.emit[qp])
            s, g = _draw(rng, env.emissions(qe))
            if g:
                successes += 1
                break
            qp = policy.trans[(qp, s, a)]
            qe = env.successor(qe, a, (s, False))
    mean = successes / runs
    stderr = math.sqrt(mean * (1.0 - mean) / runs)
    return SimEstimate(mean, stderr, runs, horizon, seed)


def _draw(rng: random.Random, dist) -> object:
    u = rng.random()
    acc = 0.0
    last = None
    for sym, p in dist.items():
        acc += float(p)
        last = sym
        if u < acc:
            return sym
    return last


def enumerate_histories(policy: Machine, env, depth: int) -> Prob:
    """Exact P(success within ``depth``) by exhaustive tree expansion."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    _check_couplable(policy, env)
    branching = len(policy.outputs) * len(env.sensors) * 2
    if branching**depth > HISTORY_BUDGET:
        raise BudgetExceeded(f"history tree of {branching}^{depth} nodes exceeds the budget of {HISTORY_BUDGET}")
    exact = policy.exact and env.exact
    zero: Prob = Fraction(0) if exact else 0.0

    def expand(qp: str, qe: str, remaining: int) -> Prob:
        if remaining == 0:
            return zero
        total = zero
        emissions = env.emissions(qe)
        for a, pa in policy.emit[qp].items():
            for (s, g), pe in emissions.items():
                if g:
                    total += pa * pe
                else:
                    total += pa * pe * expand(policy.trans[(qp, s, a)], env.successor(qe, a, (s, False)), remaining - 1)
        return total

    return expand(policy.initial, env.initial, depth)


def brute_force_optimal(env, depth: int, budget: int = PLAN_BUDGET) -> tuple[PlanTree, Prob]:
    """Best depth-``depth`` deterministic plan, by exhaustive evaluation.

    Every plan is converted to a policy machine and scored with
    :func:`enumerate_histories`; ties go to the first plan in lexicographic
    action order.
    """
    total = plan_count(len(env.actions), len(env.sensors), depth)
    if total > budget:
        raise BudgetExceeded(f"{total} plans exceed the budget of {budget}")
    best_plan = None
    best_value = None
    for plan in enumerate_plan_trees(env.actions, len(env.sensors), depth, budget):
        machine = plan_to_machine(plan, env.sensors, env.actions)
        value = enumerate_histories(machine, env, depth)
        if best_value is None or value > best_value:
            best_plan, best_value = plan, value
    return best_plan, best_value

"""Specifying environments for deterministic policies, and mixture analysis.

``specify`` builds, for a deterministic policy, an environment in which the
policy is uniquely optimal: every step offers a fixed chance of success, any
deviation from the prescribed action drops into a dead state, so only exact
compliance keeps the success probability at one.  ``decompose_stochastic``
writes a stochastic policy's finite-horizon behavior as a convex mixture of
deterministic plans, which is why no properly stochastic policy can be
uniquely optimal for anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .env import TeleoEnvironment, build_environment
from .errors import BadSensorDist, BudgetExceeded, NotDeterministic
from .machine import Machine, Prob, is_deterministic
from .optimality import is_t_decidable
from .plans import PLAN_BUDGET, PlanTree, enumerate_plan_trees, plan_count, plan_value


def specify(
    policy: Machine,
    beta: Prob = Fraction(1, 2),
    sensor_dist: Mapping[str, Prob] | None = None,
) -> TeleoEnvironment:
    """An environment for which the deterministic ``policy`` is uniquely optimal.

    Every live state emits each sensor with ``sensor_dist``'s probability and
    succeeds with probability ``beta`` per step, independently.  Playing the
    prescribed action keeps the gate alive forever (value one in the limit);
    any other action moves to a dead state that never succeeds.  Which plans
    are maximal does not depend on the choice of ``beta`` in (0, 1).
    """
    if not is_deterministic(policy):
        raise NotDeterministic("specify needs a deterministic policy")
    if not 0 < beta < 1:
        raise ValueError("beta must be strictly between 0 and 1")
    sensors = policy.inputs
    actions = policy.outputs
    if sensor_dist is None:
        sensor_dist = {s: Fraction(1, len(sensors)) for s in sensors.symbols}
    else:
        missing = [s for s in sensors.symbols if not sensor_dist.get(s)]
        if missing or set(sensor_dist) - set(sensors.symbols):
            raise BadSensorDist(f"sensor distribution must cover exactly {sensors.symbols}")
        total = sum(sensor_dist.values())
        if total != 1 and abs(float(total) - 1.0) > 1e-9:
            raise BadSensorDist(f"sensor distribution sums to {total}")
        sensor_dist = {s: p / total for s, p in sensor_dist.items()}

    def alive(q: str) -> str:
        return f"alive:{q}"

    dead = "dead"
    deviation_possible = len(actions) > 1
    states = [alive(q) for q in policy.states] + ([dead] if deviation_possible else [])
    emit: dict[str, dict] = {}
    trans: dict[tuple, str] = {}
    for q in policy.states:
        prescribed = next(iter(policy.emit[q]))
        emit[alive(q)] = {}
        for s in sensors.symbols:
            emit[alive(q)][(s, False)] = sensor_dist[s] * (1 - beta)
            emit[alive(q)][(s, True)] = sensor_dist[s] * beta
        for a in actions.symbols:
            for s in sensors.symbols:
                for flag in (False, True):
                    if a == prescribed:
                        target = alive(policy.trans[(q, s, a)])
                    else:
                        target = dead
                    trans[(alive(q), a, (s, flag))] = target
    if deviation_possible:
        emit[dead] = {(s, False): sensor_dist[s] for s in sensors.symbols}
        for a in actions.symbols:
            for s in sensors.symbols:
                trans[(dead, a, (s, False))] = dead

    return build_environment(actions, sensors, states, emit, trans, alive(policy.initial))


@dataclass(frozen=True)
class UniqueOptimalityResult:
    """Whether exactly the policy-conforming plans attain the maximal value.

    ``exact_horizon`` records whether the environment was decidable at the
    requested depth; when it is not, the verdict is a depth-limited
    approximation.  Uniqueness is asserted modulo behavior on histories of
    probability zero under the coupling.
    """

    unique: bool
    exact_horizon: bool
    optimal_value: Prob
    n_maximal: int
    n_agreeing: int

    def __bool__(self) -> bool:
        return self.unique


def verify_unique_optimality(env, policy: Machine, depth: int, budget: int = PLAN_BUDGET) -> UniqueOptimalityResult:
    """Check that the maximal depth-``depth`` plans are exactly those matching ``policy``.

    Plans are scored with the optimistic horizon bonus (collected success
    mass plus whatever an extension could still win), so they are ranked by
    the best value any continuation of the plan can reach; for environments
    decidable at this depth the bonus vanishes and the score is the plain
    depth value.  A plan matches the policy when it plays the policy's action
    at every node reachable with positive probability under the coupling.  A
    properly stochastic policy never matches any single plan, so the result
    is immediately non-unique for those.
    """
    total = plan_count(len(env.actions), len(env.sensors), depth)
    if total > budget:
        raise BudgetExceeded(f"{total} plans exceed the budget of {budget}")
    exact_horizon = is_t_decidable(env, depth)
    plans = enumerate_plan_trees(env.actions, len(env.sensors), depth, budget)
    memo: dict = {}
    values = [plan_value(plan, env, memo, horizon_bonus=True) for plan in plans]
    best = max(values)
    tol = 0 if env.exact and policy.exact else 1e-12
    maximal = {k for k, v in enumerate(values) if v >= best - tol}

    if not is_deterministic(policy):
        return UniqueOptimalityResult(False, exact_horizon, best, len(maximal), 0)

    sensors = env.sensors.symbols

    def agrees(plan: PlanTree) -> bool:
        stack = [(plan, policy.initial, frozenset({env.initial}))]
        while stack:
            node, qp, env_states = stack.pop()
            action = next(iter(policy.emit[qp]))
            if node.action != action:
                return False
            if not node.children:
                continue
            for k, s in enumerate(sensors):
                succ_env = set()
                for e in env_states:
                    for flag in (False, True):
                        if env.emissions(e).get((s, flag)):
                            succ_env.add(env.successor(e, action, (s, flag)))
                if succ_env:
                    stack.append((node.children[k], policy.trans[(qp, s, action)], frozenset(succ_env)))
        return True

    agreeing = {k for k, plan in enumerate(plans) if agrees(plan)}
    unique = bool(agreeing) and maximal == agreeing
    return UniqueOptimalityResult(unique, exact_horizon, best, len(maximal), len(agreeing))


def decompose_stochastic(policy: Machine, depth: int, budget: int = PLAN_BUDGET) -> list[tuple[PlanTree, Prob]]:
    """The policy's depth-``depth`` behavior as a mixture of deterministic plans.

    A plan's weight is the product, over the sensor-history nodes it can
    reach, of the probability the policy assigns to the plan's action there.
    Weights are positive and sum to one.
    """
    if depth < 1:
        raise ValueError("decomposition needs depth >= 1")
    sensors = policy.inputs.symbols

    counts: dict[tuple[str, int], int] = {}

    def count(q: str, d: int) -> int:
        key = (q, d)
        found = counts.get(key)
        if found is not None:
            return found
        total = 0
        for a in policy.emit[q]:
            branch = 1
            if d > 1:
                for s in sensors:
                    branch *= count(policy.trans[(q, s, a)], d - 1)
            total += branch
        counts[key] = total
        return total

    if count(policy.initial, depth) > budget:
        raise BudgetExceeded(f"{count(policy.initial, depth)} positive-weight plans exceed the budget of {budget}")

    memo: dict[tuple[str, int], list[tuple[PlanTree, Prob]]] = {}

    def expand(q: str, d: int) -> list[tuple[PlanTree, Prob]]:
        key = (q, d)
        found = memo.get(key)
        if found is not None:
            return found
        out: list[tuple[PlanTree, Prob]] = []
        for a, pa in policy.emit[q].items():
            if d == 1:
                out.append((PlanTree(a, ()), pa))
                continue
            combos: list[tuple[tuple[PlanTree, ...], Prob]] = [((), pa)]
            for s in sensors:
                children = expand(policy.trans[(q, s, a)], d - 1)
                combos = [
                    (built + (child,), w * cw)
                    for built, w in combos
                    for child, cw in children
                ]
            out.extend((PlanTree(a, built), w) for built, w in combos)
        memo[key] = out
        return out

    return expand(policy.initial, depth)

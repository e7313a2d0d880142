"""Optimal value bounds, optimality verdicts and the filtering-theorem harness.

The optimal value of an environment is the supremum, over all policies, of
the probability of succeeding at least once.  Backward induction to depth T
over the no-success branch gives a certified interval: the lower bound is
the best depth-T plan value, the upper bound adds the mass still alive at
the depth-T leaves.  When every state reachable at depth T is doomed the
interval closes and optimality is exactly decidable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .env import success_probability, top_mass
from .errors import BudgetExceeded, NotDecidable
from .machine import Machine, Prob, build_machine

DEFAULT_APPROX_TOL = 1e-9
NODE_BUDGET = 10**6


@dataclass(frozen=True)
class ValueInterval:
    """Certified bounds on the optimal success probability."""

    lower: Prob
    upper: Prob

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper <= 1):
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> Prob:
        return self.upper - self.lower


@dataclass(frozen=True)
class Verdict:
    """Outcome of an optimality check: optimal, suboptimal or undecided."""

    kind: str  # "optimal" | "suboptimal" | "undecided"
    value: Prob
    interval: ValueInterval
    gap: Prob | None = None

    @property
    def is_optimal(self) -> bool:
        return self.kind == "optimal"

    @property
    def is_suboptimal(self) -> bool:
        return self.kind == "suboptimal"

    @property
    def is_undecided(self) -> bool:
        return self.kind == "undecided"

    def __str__(self) -> str:
        if self.kind == "optimal":
            return "OPTIMAL"
        if self.kind == "suboptimal":
            return f"SUBOPTIMAL gap={self.gap}"
        return f"UNDECIDED [{self.interval.lower}, {self.interval.upper}]"


class _BoundsTable:
    """Memoized backward induction over (state, remaining depth).

    Lower values start from zero at the horizon; upper values start from the
    state's not-surely-doomed mass, which caps whatever could still be won
    after the horizon.  Maximizing actions may differ between the two.
    """

    def __init__(self, env, node_budget: int = NODE_BUDGET):
        self.env = env
        self.zero: Prob = Fraction(0) if env.exact else 0.0
        self.memo: dict[tuple[str, int], tuple[Prob, Prob]] = {}
        self.node_budget = node_budget

    def bounds(self, state: str, depth: int) -> tuple[Prob, Prob]:
        key = (state, depth)
        found = self.memo.get(key)
        if found is not None:
            return found
        if len(self.memo) >= self.node_budget:
            raise BudgetExceeded(f"value recursion exceeds {self.node_budget} nodes")
        if depth == 0:
            result = (self.zero, self.env.alive_mass(state))
        else:
            env = self.env
            dist = env.emissions(state)
            ptop = top_mass(env, state)
            best_low = best_up = None
            for a in env.actions.symbols:
                low = up = self.zero
                for s in env.sensors.symbols:
                    pbot = dist.get((s, False))
                    if pbot:
                        child_low, child_up = self.bounds(env.successor(state, a, (s, False)), depth - 1)
                        low += pbot * child_low
                        up += pbot * child_up
                if best_low is None or low > best_low:
                    best_low = low
                if best_up is None or up > best_up:
                    best_up = up
            result = (ptop + best_low, ptop + best_up)
        self.memo[key] = result
        return result

    def action_scores(self, state: str, depth: int) -> list[tuple[str, Prob, Prob]]:
        """Per-action (lower, upper) continuation values at a node, canonical order."""
        env = self.env
        dist = env.emissions(state)
        out = []
        for a in env.actions.symbols:
            low = up = self.zero
            for s in env.sensors.symbols:
                pbot = dist.get((s, False))
                if pbot:
                    child_low, child_up = self.bounds(env.successor(state, a, (s, False)), depth - 1)
                    low += pbot * child_low
                    up += pbot * child_up
            out.append((a, low, up))
        return out


def optimal_value_bounds(env, depth: int, *, node_budget: int = NODE_BUDGET) -> ValueInterval:
    """Certified [lower, upper] bounds on the optimal success probability.

    The lower bound is nondecreasing and the upper bound nonincreasing in
    ``depth``; they coincide exactly when everything reachable at the horizon
    is doomed.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    table = _BoundsTable(env, node_budget)
    low, up = table.bounds(env.initial, depth)
    return ValueInterval(low, min(up, Fraction(1) if env.exact else 1.0))


def is_t_decidable(env, depth: int) -> bool:
    """True iff every state reachable at depth >= ``depth`` is doomed.

    Reachability quantifies over all action sequences and all
    positive-probability outputs, success emissions included.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    frontier = {env.initial}
    for _ in range(depth):
        nxt = set()
        for q in frontier:
            if env.surely_dead(q):
                nxt.add(q)
                continue
            for o in env.emissions(q):
                for a in env.actions.symbols:
                    nxt.add(env.successor(q, a, o))
        frontier = nxt
    return all(env.surely_doomed(q) for q in frontier)


def check_optimal(policy: Machine, env, depth: int, tol: Prob | None = None) -> Verdict:
    """Compare a policy's value against depth-``depth`` optimal value bounds.

    In exact mode (default tolerance zero) the policy is declared optimal
    only when its value meets the upper bound and the environment is
    decidable at this depth; otherwise the verdict stays undecided even if
    the value happens to touch the bound.
    """
    exact = policy.exact and env.exact
    if tol is None:
        tol = Fraction(0) if exact else DEFAULT_APPROX_TOL
    value = success_probability(policy, env)
    interval = optimal_value_bounds(env, depth)
    if exact and tol == 0:
        if value == interval.upper and is_t_decidable(env, depth):
            return Verdict("optimal", value, interval)
        if value < interval.lower:
            return Verdict("suboptimal", value, interval, gap=interval.lower - value)
        return Verdict("undecided", value, interval)
    if value >= interval.upper - tol:
        return Verdict("optimal", value, interval)
    if value < interval.lower - tol:
        return Verdict("suboptimal", value, interval, gap=interval.lower - value)
    return Verdict("undecided", value, interval)


def synthesize_optimal_policy(env, depth: int, *, require_decidable: bool = True) -> Machine:
    """Read an optimal deterministic policy off the backward induction.

    At each node the action maximizing the lower continuation value is
    chosen, preferring larger upper values among ties and finally the action
    alphabet order.  Behavior below the horizon falls back to the first
    action.  With ``require_decidable`` (the default) the environment must be
    decidable at ``depth``, and the result is certified optimal; pass
    ``False`` to accept the depth-limited greedy policy for environments
    whose bounds do not close.
    """
    decidable = is_t_decidable(env, depth)
    if require_decidable and not decidable:
        raise NotDecidable(f"environment is not decidable at depth {depth}")
    table = _BoundsTable(env)
    sensors = env.sensors
    actions = env.actions
    one: Prob = Fraction(1) if env.exact else 1.0

    sink = "halt"
    names: dict[tuple[str, int], str] = {}
    order: list[tuple[str, int]] = []

    def name_for(key: tuple[str, int]) -> str:
        if key not in names:
            names[key] = f"n{len(names)}"
            order.append(key)
        return names[key]

    emit: dict[str, dict[str, Prob]] = {}
    trans: dict[tuple, str] = {}
    root = name_for((env.initial, depth))
    idx = 0
    while idx < len(order):
        key = order[idx]
        idx += 1
        state, remaining = key
        node = names[key]
        scores = table.action_scores(state, remaining)
        best = max(scores, key=lambda t: (t[1], t[2]))
        action = next(a for a, low, up in scores if (low, up) == (best[1], best[2]))
        emit[node] = {action: one}
        dist = env.emissions(state)
        for s in sensors.symbols:
            pbot = dist.get((s, False))
            if pbot and remaining > 1:
                target = name_for((env.successor(state, action, (s, False)), remaining - 1))
            else:
                target = sink
            trans[(node, s, action)] = target

    emit[sink] = {actions.symbols[0]: one}
    for s in sensors.symbols:
        trans[(sink, s, actions.symbols[0])] = sink

    states = [names[key] for key in order] + [sink]
    return build_machine(sensors, actions, states, emit, trans, root)


@dataclass(frozen=True)
class FilteringEntry:
    """One node of the filtering-theorem check: the trace taken and its verdict."""

    trace: tuple[tuple[str, str], ...]
    verdict: Verdict


@dataclass
class FilteringReport:
    """Verdicts for a policy/environment pair under every feasible evolution."""

    root: Verdict
    entries: list[FilteringEntry] = field(default_factory=list)

    @property
    def all_optimal(self) -> bool:
        return self.root.is_optimal and all(e.verdict.is_optimal for e in self.entries)

    @property
    def undecided(self) -> list[FilteringEntry]:
        return [e for e in self.entries if e.verdict.is_undecided]

    @property
    def failures(self) -> list[FilteringEntry]:
        return [e for e in self.entries if e.verdict.is_suboptimal]


def check_filtering_theorem(policy: Machine, env, depth: int, tol: Prob | None = None) -> FilteringReport:
    """Check that optimality survives evolution by every feasible step.

    For each (action, sensor) pair with positive probability under the
    coupling and no success (and recursively, down to the given depth), the
    policy evolved by (sensor, action) is checked against the environment
    evolved by (action, (sensor, no success))).  Undecided verdicts are
    reported as distinct entries, not failures.
    """
    report = FilteringReport(root=check_optimal(policy, env, depth, tol))

    def recurse(qp: str, env_node, remaining: int, trace: tuple) -> None:
        if remaining <= 0:
            return
        dist = env_node.emissions(env_node.initial)
        for a in policy.emit[qp]:
            for s in env_node.sensors.symbols:
                pbot = dist.get((s, False))
                if not pbot:
                    continue
                qp2 = policy.trans[(qp, s, a)]
                env2 = env_node.rooted_at(env_node.successor(env_node.initial, a, (s, False)))
                verdict = check_optimal(replace(policy, initial=qp2), env2, remaining - 1, tol)
                step_trace = trace + ((a, s),)
                report.entries.append(FilteringEntry(step_trace, verdict))
                recurse(qp2, env2, remaining - 1, step_trace)

    recurse(policy.initial, env, depth, ())
    return report

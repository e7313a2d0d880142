"""Depth-T deterministic decision trees over a sensor alphabet.

A plan fixes an action at the root and a subtree per sensor value; leaves
sit at the horizon.  Plans are the common currency of exhaustive policy
enumeration: the brute-force optimum, uniqueness checks and stochastic
policy decomposition all quantify over them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import BudgetExceeded
from .machine import Alphabet, Machine, build_machine

PLAN_BUDGET = 10**6


@dataclass(frozen=True)
class PlanTree:
    """An action plus one subtree per sensor value; no children at the horizon."""

    action: str
    children: tuple["PlanTree", ...]

    @property
    def depth(self) -> int:
        return 1 if not self.children else 1 + self.children[0].depth

    def child(self, sensor_index: int) -> "PlanTree":
        return self.children[sensor_index]

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)


def plan_count(n_actions: int, n_sensors: int, depth: int) -> int:
    """Number of distinct depth-``depth`` plans."""
    nodes = sum(n_sensors**k for k in range(depth))
    return n_actions**nodes


def enumerate_plan_trees(actions: Alphabet, n_sensors: int, depth: int, budget: int = PLAN_BUDGET) -> list[PlanTree]:
    """All depth-``depth`` plans in lexicographic action order (root first).

    Subtrees are shared between plans, so the list is cheap to hold even
    though plan values must still be computed per plan.
    """
    if depth < 1:
        raise ValueError("plans need depth >= 1")
    total = plan_count(len(actions), n_sensors, depth)
    if total > budget:
        raise BudgetExceeded(f"{total} plans exceed the budget of {budget}")
    level = [PlanTree(a, ()) for a in actions.symbols]
    for _ in range(depth - 1):
        level = [
            PlanTree(a, combo)
            for a in actions.symbols
            for combo in product(level, repeat=n_sensors)
        ]
    return level


def plan_to_machine(plan: PlanTree, sensors: Alphabet, actions: Alphabet) -> Machine:
    """A deterministic policy machine that plays the plan, then repeats the first action."""
    one = Fraction(1)
    sink = "halt"
    names: dict[int, str] = {}
    order: list[PlanTree] = []

    def visit(node: PlanTree) -> str:
        key = id(node)
        if key not in names:
            names[key] = f"n{len(names)}"
            order.append(node)
        return names[key]

    emit: dict[str, dict[str, Fraction]] = {}
    trans: dict[tuple, str] = {}
    root = visit(plan)
    idx = 0
    while idx < len(order):
        node = order[idx]
        idx += 1
        name = names[id(node)]
        emit[name] = {node.action: one}
        for k, s in enumerate(sensors.symbols):
            target = visit(node.children[k]) if node.children else sink
            trans[(name, s, node.action)] = target
    emit[sink] = {actions.symbols[0]: one}
    for s in sensors.symbols:
        trans[(sink, s, actions.symbols[0])] = sink
    states = [names[id(node)] for node in order] + [sink]
    return build_machine(sensors, actions, states, emit, trans, root)


def plan_value(plan: PlanTree, env, memo: dict | None = None, *, horizon_bonus: bool = False):
    """Probability of success within the plan's horizon when playing it against ``env``.

    With ``horizon_bonus`` the zero continuation at the horizon is replaced
    by the successor's not-surely-doomed mass, i.e. the most any extension of
    the plan could still win.  That makes the plan's final actions count (a
    deviation whose penalty lands one step past the horizon still loses the
    bonus) and adds nothing for environments that are decidable at this
    depth.

    Shared subtrees are memoized by identity, which keeps exhaustive
    enumeration over all plans close to linear in distinct (subtree, state)
    pairs.
    """
    if memo is None:
        memo = {}
    zero = Fraction(0) if env.exact else 0.0

    def value(node: PlanTree, state: str):
        key = (id(node), state)
        found = memo.get(key)
        if found is not None:
            return found
        dist = env.emissions(state)
        total = sum((p for (_, g), p in dist.items() if g), zero)
        for k, s in enumerate(env.sensors.symbols):
            pbot = dist.get((s, False))
            if not pbot:
                continue
            succ = env.successor(state, node.action, (s, False))
            if node.children:
                total += pbot * value(node.children[k], succ)
            elif horizon_bonus:
                total += pbot * env.alive_mass(succ)
        memo[key] = total
        return total

    return value(plan, env.initial)

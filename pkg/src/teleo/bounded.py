"""Optimality within constrained policy classes (bounded rationality).

A policy can fail to be optimal outright while still being the best member
of a limited class, such as the one-state (memoryless) machines.  For such
classes the optimality-preserving update rule can break down: the
absent-minded driver's best memoryless policy is properly stochastic, and
after one step it is no longer the best memoryless policy for the filtered
environment.  Classes closed under trajectory splicing do not suffer this;
the memoryless class is not closed, and a counterexample is easy to find.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable

from .env import success_probability
from .errors import BudgetExceeded, UnsupportedClass
from .fixtures import AMD_ACTIONS, AMD_SENSORS, amd_memoryless, env_amd
from .machine import (
    Alphabet,
    Machine,
    Prob,
    TrajectorySpec,
    as_alphabet,
    behaviorally_equivalent,
    build_machine,
    minimize,
    splice,
)

GOLDEN = (math.sqrt(5) - 1) / 2
KSTATE_BUDGET = 10**6


@dataclass(frozen=True)
class MemorylessStochastic:
    """All one-state policies over the given alphabets."""

    inputs: Alphabet
    outputs: Alphabet


@dataclass(frozen=True)
class KState:
    """All policies presentable with at most ``k`` states."""

    k: int
    inputs: Alphabet
    outputs: Alphabet

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class ExplicitFiniteSet:
    """An explicit, nonempty list of candidate policies sharing alphabets."""

    machines: tuple[Machine, ...]

    def __post_init__(self):
        if not self.machines:
            raise ValueError("explicit class must be nonempty")
        first = self.machines[0]
        for m in self.machines[1:]:
            if m.inputs.symbols != first.inputs.symbols or m.outputs.symbols != first.outputs.symbols:
                raise ValueError("explicit class members must share alphabets")


ConstrainedClass = MemorylessStochastic | KState | ExplicitFiniteSet


def memoryless_machine(inputs: Alphabet | Iterable[str], outputs: Alphabet | Iterable[str], weights: dict[str, Prob]) -> Machine:
    """One-state machine emitting actions with the given weights."""
    inputs = as_alphabet(inputs)
    outputs = as_alphabet(outputs)
    dist = {a: p for a, p in weights.items() if p}
    trans = {("q0", s, a): "q0" for s in inputs.symbols for a in dist}
    return build_machine(inputs, outputs, ["q0"], {"q0": dist}, trans, "q0")


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-9) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi] to within ``tol`` on the argument."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    x = (a + b) / 2
    return x, f(x)


def _optimize_memoryless(env, cls: MemorylessStochastic, grid_step: float) -> tuple[Machine, Prob]:
    actions = cls.outputs.symbols
    if len(actions) > 3:
        raise UnsupportedClass("memoryless optimization supports at most 3 actions")

    def machine_for(weights: list[float]) -> Machine:
        return memoryless_machine(cls.inputs, cls.outputs, dict(zip(actions, weights)))

    def value(weights: list[float]) -> float:
        return float(success_probability(machine_for(weights), env))

    if len(actions) == 1:
        m = machine_for([1.0])
        return m, success_probability(m, env)

    steps = max(1, round(1.0 / grid_step))
    if len(actions) == 2:
        best_p, best_v = 0.0, value([0.0, 1.0])
        for k in range(1, steps + 1):
            p = min(1.0, k * grid_step)
            v = value([p, 1.0 - p])
            if v > best_v:
                best_p, best_v = p, v
        lo, hi = max(0.0, best_p - grid_step), min(1.0, best_p + grid_step)
        p, v = golden_section_max(lambda x: value([x, 1.0 - x]), lo, hi)
        if v < best_v:
            p, v = best_p, best_v
        m = machine_for([p, 1.0 - p])
        return m, success_probability(m, env)

    best = (0.0, 0.0)
    best_v = value([0.0, 0.0, 1.0])
    for i in range(steps + 1):
        x = min(1.0, i * grid_step)
        for j in range(steps - i + 1):
            y = min(1.0 - x, j * grid_step)
            v = value([x, y, 1.0 - x - y])
            if v > best_v:
                best, best_v = (x, y), v
    x, y = best
    for _ in range(3):
        hi_x = min(1.0 - y, x + grid_step)
        x, _ = golden_section_max(lambda t: value([t, y, 1.0 - t - y]), max(0.0, x - grid_step), hi_x)
        hi_y = min(1.0 - x, y + grid_step)
        y, _ = golden_section_max(lambda t: value([x, t, 1.0 - x - t]), max(0.0, y - grid_step), hi_y)
    m = machine_for([x, y, 1.0 - x - y])
    return m, success_probability(m, env)


def enumerate_k_state_deterministic(k: int, inputs: Alphabet, outputs: Alphabet, budget: int = KSTATE_BUDGET) -> list[Machine]:
    """All valid deterministic machines on exactly ``k`` states, canonical order.

    Machines whose extra states are unreachable are skipped; every behavior
    presentable with at most ``k`` states still appears, since any smaller
    machine can be padded into a reachable ``k``-state presentation.
    """
    n_assign = len(outputs) ** k
    n_trans = k ** (k * len(inputs))
    if n_assign * n_trans > budget:
        raise BudgetExceeded(f"{n_assign * n_trans} k-state machines exceed the budget of {budget}")
    states = [f"q{i}" for i in range(k)]
    machines = []
    for assignment in product(outputs.symbols, repeat=k):
        for targets in product(range(k), repeat=k * len(inputs)):
            emit = {q: {assignment[i]: Fraction(1)} for i, q in enumerate(states)}
            trans = {}
            pos = 0
            for i, q in enumerate(states):
                for s in inputs.symbols:
                    trans[(q, s, assignment[i])] = states[targets[pos]]
                    pos += 1
            reachable = {states[0]}
            frontier = [states[0]]
            while frontier:
                q = frontier.pop()
                for s in inputs.symbols:
                    succ = trans[(q, s, next(iter(emit[q])))]
                    if succ not in reachable:
                        reachable.add(succ)
                        frontier.append(succ)
            if len(reachable) != k:
                continue
            machines.append(build_machine(inputs, outputs, states, emit, trans, states[0]))
    return machines


def optimize_in_class(env, cls: ConstrainedClass, *, grid_step: float = 1e-3) -> tuple[Machine, Prob]:
    """Best policy within a constrained class, with its success probability.

    One-state stochastic classes are optimized by grid search followed by
    golden-section refinement per coordinate; finite classes are evaluated
    exhaustively, with ties resolved by enumeration order.
    """
    if isinstance(cls, MemorylessStochastic):
        return _optimize_memoryless(env, cls, grid_step)
    if isinstance(cls, ExplicitFiniteSet):
        members = cls.machines
    elif isinstance(cls, KState):
        members = []
        for k in range(1, cls.k + 1):
            members.extend(enumerate_k_state_deterministic(k, cls.inputs, cls.outputs))
    else:
        raise UnsupportedClass(f"unsupported class {cls!r}")
    best_m, best_v = None, None
    for m in members:
        v = success_probability(m, env)
        if best_v is None or v > best_v:
            best_m, best_v = m, v
    return best_m, best_v


def _class_membership(cls: ConstrainedClass) -> Callable[[Machine], bool]:
    if isinstance(cls, MemorylessStochastic):
        return lambda m: len(minimize(m).states) == 1
    if isinstance(cls, KState):
        return lambda m: len(minimize(m).states) <= cls.k
    if isinstance(cls, ExplicitFiniteSet):
        return lambda m: any(behaviorally_equivalent(m, member) for member in cls.machines)
    raise UnsupportedClass(f"unsupported class {cls!r}")


def _sample_member(cls: ConstrainedClass, rng: random.Random) -> Machine:
    if isinstance(cls, ExplicitFiniteSet):
        return rng.choice(cls.machines)
    if isinstance(cls, MemorylessStochastic):
        k, inputs, outputs = 1, cls.inputs, cls.outputs
    else:
        k, inputs, outputs = rng.randint(1, cls.k), cls.inputs, cls.outputs
    from .generate import random_policy

    return random_policy(rng, inputs, outputs, n_states=k)


def splice_closure_counterexample(
    cls: ConstrainedClass,
    samples: int = 100,
    seed: int = 0,
    max_traj_len: int = 3,
) -> tuple[Machine, Machine, TrajectorySpec] | None:
    """Search for a splice of class members that leaves the class.

    Samples member pairs and short trajectories feasible under the base
    member; returns the first (base, patch, trajectory) whose splice is not
    behaviorally presentable inside the class, or ``None`` once the sample
    budget is spent.  Finding nothing is not a closure proof.
    """
    member = _class_membership(cls)
    rng = random.Random(seed)
    for _ in range(samples):
        base = _sample_member(cls, rng)
        patch = _sample_member(cls, rng)
        length = rng.randint(1, max_traj_len)
        steps = []
        q = base.initial
        for _ in range(length):
            i = rng.choice(base.inputs.symbols)
            o = rng.choice(tuple(base.emit[q]))
            steps.append((i, o))
            q = base.trans[(q, i, o)]
        traj = TrajectorySpec.of(steps)
        spliced = splice(base, patch, traj)
        if not member(spliced):
            return base, patch, traj
    return None


@dataclass(frozen=True)
class AmdReport:
    """Numbers behind the absent-minded driver's broken update rule.

    The best memoryless driver continues with probability ``p_star`` and is
    worth ``value``.  After surviving one intersection, the best memoryless
    policy for the filtered environment exits outright (worth
    ``filtered_optimal_value``), but the evolved policy is the same one-state
    machine and is only worth ``evolved_value`` there.
    """

    p_star: float
    value: float
    filtered_optimal_value: float
    evolved_value: float

    @property
    def bellman_holds(self) -> bool:
        return self.evolved_value >= self.filtered_optimal_value - 1e-9


def check_bellman_failure_amd(grid_step: float = 1e-3) -> AmdReport:
    """Demonstrate the update-rule failure on the absent-minded driver.

    The one-state optimum is properly stochastic; evolving it by one
    successful continue step leaves the same machine, which is strictly
    worse than the best one-state policy for the filtered environment.
    """
    env = env_amd()
    cls = MemorylessStochastic(as_alphabet(AMD_SENSORS), as_alphabet(AMD_ACTIONS))
    best, value = optimize_in_class(env, cls, grid_step=grid_step)
    p_star = float(best.emit["q0"].get("CONT", 0))

    filtered = env.evolved("CONT", AMD_SENSORS[0], False)
    _, filtered_value = optimize_in_class(filtered, cls, grid_step=grid_step)
    evolved_value = float(success_probability(amd_memoryless(p_star), filtered))
    return AmdReport(p_star, float(value), float(filtered_value), evolved_value)

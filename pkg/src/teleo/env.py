"""Teleo-environments and the policy/environment coupling.

A teleo-environment is a machine whose inputs are actions and whose outputs
are (sensor value, success flag) pairs; the flag is the unobservable per-step
success signal.  Coupling a policy with an environment yields a Markov chain
over product states, and the value of the pair is the probability that the
success flag fires at least once.

Every environment class in this package exposes the same small surface, so
the analyses work on lazily materialized environments too:

``actions``/``sensors``/``initial``/``exact``
    alphabets, root state and arithmetic mode;
``emissions(state)``
    mapping from (sensor, flag) to probability, positive entries only;
``successor(state, action, output)``
    deterministic transition;
``surely_dead(state)``
    structurally success-free and absorbing, safe to leave unexpanded;
``surely_doomed(state)``
    no reachable state can emit success (always implied by surely_dead);
``alive_mass(state)``
    probability mass under the state that is not surely doomed;
``rooted_at(state)``
    the same environment re-rooted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import AlphabetMismatch, StateCapExceeded, ValidationError
from .linsolve import solve_reach_probability
from .machine import Alphabet, Machine, Prob, Symbol, as_alphabet, build_machine

# Output symbols of an environment machine: (sensor, success?) pairs.
EnvOutput = tuple


def env_output_alphabet(sensors: Alphabet | Iterable[str]) -> Alphabet:
    """The canonical output alphabet: per sensor, the no-success pair then the success pair."""
    sensors = as_alphabet(sensors)
    symbols: list[Symbol] = []
    for s in sensors.symbols:
        symbols.append((s, False))
        symbols.append((s, True))
    return Alphabet(tuple(symbols))


@dataclass(frozen=True)
class TeleoEnvironment:
    """A machine from actions to (sensor, success flag) pairs."""

    machine: Machine

    def __post_init__(self):
        seen: dict[str, None] = {}
        for sym in self.machine.outputs.symbols:
            if not (isinstance(sym, tuple) and len(sym) == 2 and isinstance(sym[1], bool)):
                raise ValidationError(f"environment output {sym!r} is not a (sensor, flag) pair")
            seen.setdefault(sym[0])
        expected = env_output_alphabet(tuple(seen))
        if self.machine.outputs.symbols != expected.symbols:
            raise ValidationError("environment outputs must list (sensor, no-success) then (sensor, success) per sensor")

    @cached_property
    def sensors(self) -> Alphabet:
        return Alphabet(tuple(dict.fromkeys(s for s, _ in self.machine.outputs.symbols)))

    @property
    def actions(self) -> Alphabet:
        return self.machine.inputs

    @property
    def states(self) -> tuple[str, ...]:
        return self.machine.states

    @property
    def initial(self) -> str:
        return self.machine.initial

    @property
    def exact(self) -> bool:
        return self.machine.exact

    def emissions(self, state: str) -> Mapping[EnvOutput, Prob]:
        return self.machine.emit[state]

    def successor(self, state: str, action: str, output: EnvOutput) -> str:
        return self.machine.trans[(state, action, output)]

    def surely_dead(self, state: str) -> bool:
        return False

    @cached_property
    def _doomed(self) -> frozenset[str]:
        return doomed_states(self)

    def surely_doomed(self, state: str) -> bool:
        return state in self._doomed

    def alive_mass(self, state: str) -> Prob:
        if self.surely_doomed(state):
            return Fraction(0) if self.exact else 0.0
        return Fraction(1) if self.exact else 1.0

    def rooted_at(self, state: str) -> "TeleoEnvironment":
        return TeleoEnvironment(replace(self.machine, initial=state))

    def evolved(self, action: str, sensor: str, success: bool) -> "TeleoEnvironment":
        """The environment after emitting (sensor, success) on input ``action``."""
        return self.rooted_at(self.successor(self.initial, action, (sensor, success)))


def build_environment(
    actions: Alphabet | Iterable[str],
    sensors: Alphabet | Iterable[str],
    states: Sequence[str],
    emit: Mapping[str, Mapping[EnvOutput, Prob]],
    trans: Mapping[tuple[str, str, EnvOutput], str],
    initial: str,
) -> TeleoEnvironment:
    """Validate and wrap an environment description."""
    machine = build_machine(as_alphabet(actions), env_output_alphabet(sensors), states, emit, trans, initial)
    return TeleoEnvironment(machine)


def top_mass(env, state) -> Prob:
    """Probability that ``state`` emits the success flag this step."""
    zero: Prob = Fraction(0) if env.exact else 0.0
    return sum((p for (_, g), p in env.emissions(state).items() if g), zero)


def _check_couplable(policy: Machine, env) -> None:
    if policy.inputs.symbols != env.sensors.symbols or policy.outputs.symbols != env.actions.symbols:
        raise AlphabetMismatch(
            "policy must read the environment's sensors and emit its actions "
            f"(policy {policy.inputs.symbols}/{policy.outputs.symbols}, "
            f"environment {env.sensors.symbols}/{env.actions.symbols})"
        )


@dataclass
class CoupledChain:
    """The Markov chain of simultaneous policy/environment interaction.

    ``moves`` holds, per product state, the full kernel as
    (action, sensor, flag, probability, successor) tuples; ``immediate`` is
    the per-state probability of emitting success this step.  Product states
    whose environment side is surely dead are listed in ``pruned`` and not
    expanded.
    """

    policy: Machine
    env: object
    initial: tuple[str, str]
    states: list[tuple[str, str]]
    immediate: dict[tuple[str, str], Prob]
    moves: dict[tuple[str, str], list[tuple[str, str, bool, Prob, tuple[str, str]]]]
    pruned: frozenset[tuple[str, str]]
    exact: bool

    def bot_rows(self) -> dict[tuple[str, str], dict[tuple[str, str], Prob]]:
        """Continuation kernel restricted to no-success steps, aggregated per successor."""
        rows: dict[tuple[str, str], dict[tuple[str, str], Prob]] = {}
        for x, edges in self.moves.items():
            row: dict[tuple[str, str], Prob] = {}
            for _, _, flag, p, y in edges:
                if not flag:
                    row[y] = row.get(y, Fraction(0) if self.exact else 0.0) + p
            rows[x] = row
        return rows


def couple(policy: Machine, env, *, max_states: int = 200_000) -> CoupledChain:
    """Product chain of a policy and a couple-compatible environment.

    Both sides emit simultaneously: the policy draws an action from its
    state, the environment draws a (sensor, flag) pair from its state, then
    the policy steps on (sensor, action) and the environment on
    (action, (sensor, flag)).
    """
    _check_couplable(policy, env)
    exact = policy.exact and env.exact
    zero: Prob = Fraction(0) if exact else 0.0

    initial = (policy.initial, env.initial)
    states: list[tuple[str, str]] = [initial]
    seen = {initial}
    immediate: dict[tuple[str, str], Prob] = {}
    moves: dict[tuple[str, str], list] = {}
    pruned: set[tuple[str, str]] = set()
    idx = 0
    while idx < len(states):
        x = states[idx]
        idx += 1
        qp, qe = x
        if env.surely_dead(qe):
            immediate[x] = zero
            moves[x] = []
            pruned.add(x)
            continue
        dist_e = env.emissions(qe)
        immediate[x] = sum((p for (_, g), p in dist_e.items() if g), zero)
        edges = []
        for a, pa in policy.emit[qp].items():
            for (s, g), pe in dist_e.items():
                y = (policy.trans[(qp, s, a)], env.successor(qe, a, (s, g)))
                prob = pa * pe
                if not exact:
                    prob = float(prob)
                edges.append((a, s, g, prob, y))
                if y not in seen:
                    if len(seen) >= max_states:
                        raise StateCapExceeded(f"coupled chain exceeds {max_states} product states")
                    seen.add(y)
                    states.append(y)
        moves[x] = edges
    if not exact:
        immediate = {x: float(v) for x, v in immediate.items()}
    return CoupledChain(policy, env, initial, states, immediate, moves, frozenset(pruned), exact)


def success_probability(policy: Machine, env) -> Prob:
    """Probability that success occurs at least once in the coupled chain.

    Computed as the least fixed point of v = c + M v, where c is the
    immediate success mass and M keeps only no-success continuations; product
    states that cannot reach any success emission get value zero.
    """
    chain = couple(policy, env)
    values = solve_reach_probability(chain.states, chain.immediate, chain.bot_rows(), chain.exact)
    return values[chain.initial]


def success_probability_within(policy: Machine, env, depth: int) -> Prob:
    """Probability that success occurs within the first ``depth`` steps."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    chain = couple(policy, env)
    rows = chain.bot_rows()
    zero: Prob = Fraction(0) if chain.exact else 0.0
    values = {x: zero for x in chain.states}
    for _ in range(depth):
        values = {
            x: chain.immediate[x] + sum((p * values[y] for y, p in rows[x].items()), zero)
            for x in chain.states
        }
    return values[chain.initial]


def doomed_states(env, *, max_states: int = 100_000) -> frozenset:
    """States from which no success emission is reachable.

    Inputs are quantified existentially: an edge exists for every action and
    every positive-probability output.  For a statically materialized
    environment the check covers all declared states; for lazy environments
    it covers the states reachable from the root, leaving surely-dead states
    unexpanded.
    """
    if isinstance(env, TeleoEnvironment):
        nodes = list(env.states)
    else:
        nodes = [env.initial]
        seen = set(nodes)
        k = 0
        while k < len(nodes):
            q = nodes[k]
            k += 1
            if env.surely_dead(q):
                continue
            for (s, g), _ in env.emissions(q).items():
                for a in env.actions.symbols:
                    succ = env.successor(q, a, (s, g))
                    if succ not in seen:
                        if len(seen) >= max_states:
                            raise StateCapExceeded(f"doomed-state search exceeds {max_states} states")
                        seen.add(succ)
                        nodes.append(succ)

    reverse: dict = {q: [] for q in nodes}
    emitters = []
    for q in nodes:
        if env.surely_dead(q):
            continue
        if top_mass(env, q) > 0:
            emitters.append(q)
        for (s, g), _ in env.emissions(q).items():
            for a in env.actions.symbols:
                succ = env.successor(q, a, (s, g))
                if succ in reverse:
                    reverse[succ].append(q)

    alive = set(emitters)
    frontier = list(emitters)
    while frontier:
        q = frontier.pop()
        for prev in reverse[q]:
            if prev not in alive:
                alive.add(prev)
                frontier.append(prev)
    return frozenset(q for q in nodes if q not in alive)

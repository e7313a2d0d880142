"""Belief updates over environments, and environments built from beliefs.

Two update rules are provided.  ``bayes_filter`` conditions on the observed
action/sensor pair alone, marginalizing the unobservable success flag; it is
the update an outside observer of the interaction would use.
``value_laden_filter`` additionally conditions on the success flag being
absent, which is the update that preserves optimality of the evolved policy:
futures in which success already happened no longer bear on what the agent
should do.

``truncate`` builds the single-success form of an environment: identical
behavior until the first success, after which every later success signal is
muted.  Its post-success states carry a belief over the base environment's
states (the success/no-success distinction is collapsed, so the underlying
state becomes uncertain) and are materialized lazily under a cap.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .env import TeleoEnvironment, env_output_alphabet, build_environment
from .errors import StateCapExceeded, UnknownSymbol, ValidationError, ZeroProbabilityEvidence
from .machine import Alphabet, Prob

BELIEF_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Belief:
    """A probability distribution over environment states.

    Entries are positive, sum to one and are kept sorted by state name, so
    equal beliefs compare and hash equal.
    """

    items: tuple[tuple[str, Prob], ...]

    @classmethod
    def from_mapping(cls, probs: Mapping[str, Prob]) -> "Belief":
        positive = {q: p for q, p in probs.items() if p > 0}
        if not positive:
            raise ValidationError("belief must have non-empty support")
        total = sum(positive.values())
        return cls(tuple((q, p / total) for q, p in sorted(positive.items())))

    @classmethod
    def point(cls, state: str, exact: bool = True) -> "Belief":
        return cls(((state, Fraction(1) if exact else 1.0),))

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(q for q, _ in self.items)

    def prob(self, state: str) -> Prob:
        for q, p in self.items:
            if q == state:
                return p
        return Fraction(0)

    def quantized(self) -> tuple:
        """Dedup key with approximate probabilities rounded to the comparison tolerance."""
        return tuple((q, p if isinstance(p, Fraction) else round(p, 12)) for q, p in self.items)


def _check_evidence(env, action: str, sensor: str) -> None:
    if action not in env.actions:
        raise UnknownSymbol(f"unknown action {action!r}")
    if sensor not in env.sensors:
        raise UnknownSymbol(f"unknown sensor {sensor!r}")


def value_laden_filter(env, belief: Belief, action: str, sensor: str) -> Belief:
    """Posterior given the sensor value and the absence of the success flag."""
    _check_evidence(env, action, sensor)
    posterior: dict[str, Prob] = {}
    for q, p in belief.items:
        pe = env.emissions(q).get((sensor, False))
        if pe:
            succ = env.successor(q, action, (sensor, False))
            posterior[succ] = posterior.get(succ, Fraction(0)) + p * pe
    if not posterior:
        raise ZeroProbabilityEvidence(
            f"no state in the belief's support can emit ({sensor!r}, no success)"
        )
    return Belief.from_mapping(posterior)


def bayes_filter(env, belief: Belief, action: str, sensor: str) -> Belief:
    """Posterior given the sensor value alone, marginalizing the success flag."""
    _check_evidence(env, action, sensor)
    posterior: dict[str, Prob] = {}
    for q, p in belief.items:
        for flag in (False, True):
            pe = env.emissions(q).get((sensor, flag))
            if pe:
                succ = env.successor(q, action, (sensor, flag))
                posterior[succ] = posterior.get(succ, Fraction(0)) + p * pe
    if not posterior:
        raise ZeroProbabilityEvidence(f"no state in the belief's support can emit sensor {sensor!r}")
    return Belief.from_mapping(posterior)


def filter_trace(
    env,
    steps: Iterable[tuple[str, str]],
    mode: str = "value-laden",
    belief: Belief | None = None,
) -> Belief:
    """Iterate a filter along (action, sensor) steps from the initial belief.

    Raises :class:`ZeroProbabilityEvidence` with the 1-based step index when
    the trace becomes impossible.
    """
    if mode not in ("value-laden", "bayes"):
        raise ValueError(f"unknown filter mode {mode!r}")
    update = value_laden_filter if mode == "value-laden" else bayes_filter
    b = belief if belief is not None else Belief.point(env.initial, env.exact)
    for k, (action, sensor) in enumerate(steps, start=1):
        try:
            b = update(env, b, action, sensor)
        except ZeroProbabilityEvidence as exc:
            raise ZeroProbabilityEvidence(f"step {k}: {exc}", step=k) from None
    return b


class _BeliefRegistry:
    """Interns beliefs under a shared cap; equal beliefs get equal ids."""

    def __init__(self, cap: int):
        self.cap = cap
        self.beliefs: list[Belief] = []
        self._ids: dict[tuple, int] = {}

    def intern(self, belief: Belief) -> int:
        key = belief.quantized()
        found = self._ids.get(key)
        if found is not None:
            return found
        if len(self.beliefs) >= self.cap:
            raise StateCapExceeded(f"materialized belief states exceed cap {self.cap}")
        self._ids[key] = len(self.beliefs)
        self.beliefs.append(belief)
        return len(self.beliefs) - 1


class BeliefEnvironment:
    """Single-success truncation of an environment.

    States are either ``fresh:q`` (pre-success, behaving exactly like the
    base state q) or ``muted:k`` (post-success, carrying belief k over base
    states).  Muted states emit each sensor with the base mixture's full
    probability mass but never the success flag, and update their belief by
    plain Bayesian filtering.  The transition table is materialized lazily;
    exceeding the cap on distinct beliefs raises :class:`StateCapExceeded`.
    """

    def __init__(self, base, cap: int = 10_000):
        self.base = base
        self._registry = _BeliefRegistry(cap)
        self._emit_cache: dict[str, dict] = {}
        self._succ_cache: dict[tuple, str] = {}
        self.initial = f"fresh:{base.initial}"

    @property
    def actions(self) -> Alphabet:
        return self.base.actions

    @property
    def sensors(self) -> Alphabet:
        return self.base.sensors

    @property
    def exact(self) -> bool:
        return self.base.exact

    def muted_belief(self, state: str) -> Belief:
        return self._registry.beliefs[int(state.split(":", 1)[1])]

    def _muted_name(self, belief: Belief) -> str:
        return f"muted:{self._registry.intern(belief)}"

    def emissions(self, state: str) -> Mapping[tuple, Prob]:
        cached = self._emit_cache.get(state)
        if cached is not None:
            return cached
        if state.startswith("fresh:"):
            dist = dict(self.base.emissions(state[6:]))
        else:
            belief = self.muted_belief(state)
            dist = {}
            for q, p in belief.items:
                for (s, _), pe in self.base.emissions(q).items():
                    key = (s, False)
                    dist[key] = dist.get(key, Fraction(0)) + p * pe
            if not self.exact:
                dist = {o: float(p) for o, p in dist.items()}
        self._emit_cache[state] = dist
        return dist

    def successor(self, state: str, action: str, output: tuple) -> str:
        key = (state, action, output)
        cached = self._succ_cache.get(key)
        if cached is not None:
            return cached
        sensor, flag = output
        if state.startswith("fresh:"):
            q = state[6:]
            succ = self.base.successor(q, action, output)
            target = self._muted_name(Belief.point(succ, self.exact)) if flag else f"fresh:{succ}"
        else:
            if flag:
                raise UnknownSymbol("muted states never emit the success flag")
            target = self._muted_name(bayes_filter(self.base, self.muted_belief(state), action, sensor))
        self._succ_cache[key] = target
        return target

    def surely_dead(self, state: str) -> bool:
        return state.startswith("muted:")

    def surely_doomed(self, state: str) -> bool:
        return state.startswith("muted:") or self.base.surely_doomed(state[6:])

    def alive_mass(self, state: str) -> Prob:
        if self.surely_doomed(state):
            return Fraction(0) if self.exact else 0.0
        return Fraction(1) if self.exact else 1.0

    def rooted_at(self, state: str) -> "BeliefEnvironment":
        out = copy.copy(self)
        out.initial = state
        return out


def truncate(env, cap: int = 10_000) -> BeliefEnvironment:
    """The single-success form of ``env``.

    Success-at-least-once probabilities agree with ``env`` for every policy,
    but at most one success is ever emitted, so plain Bayesian updating of
    the truncated environment carries the same information as value-laden
    updating of the original.
    """
    return BeliefEnvironment(env, cap)


class BeliefRootedEnvironment:
    """An environment whose states are beliefs over a base environment.

    The behavior is the belief mixture of the base: emissions average the
    support's emissions, and the transition conditions the belief on the
    emitted (sensor, flag) pair.  Rooting one of these at a non-point belief
    is how an environment is evolved by a filtered posterior.
    """

    def __init__(self, base, root: Belief, cap: int = 10_000):
        self.base = base
        self._registry = _BeliefRegistry(cap)
        self._emit_cache: dict[str, dict] = {}
        self._succ_cache: dict[tuple, str] = {}
        self.initial = self._name(root)

    def _name(self, belief: Belief) -> str:
        return f"b:{self._registry.intern(belief)}"

    def belief(self, state: str) -> Belief:
        return self._registry.beliefs[int(state.split(":", 1)[1])]

    @property
    def actions(self) -> Alphabet:
        return self.base.actions

    @property
    def sensors(self) -> Alphabet:
        return self.base.sensors

    @property
    def exact(self) -> bool:
        return self.base.exact

    def emissions(self, state: str) -> Mapping[tuple, Prob]:
        cached = self._emit_cache.get(state)
        if cached is not None:
            return cached
        dist: dict[tuple, Prob] = {}
        for q, p in self.belief(state).items:
            for o, pe in self.base.emissions(q).items():
                dist[o] = dist.get(o, Fraction(0)) + p * pe
        if not self.exact:
            dist = {o: float(p) for o, p in dist.items()}
        self._emit_cache[state] = dist
        return dist

    def successor(self, state: str, action: str, output: tuple) -> str:
        key = (state, action, output)
        cached = self._succ_cache.get(key)
        if cached is not None:
            return cached
        posterior: dict[str, Prob] = {}
        for q, p in self.belief(state).items:
            pe = self.base.emissions(q).get(output)
            if pe:
                succ = self.base.successor(q, action, output)
                posterior[succ] = posterior.get(succ, Fraction(0)) + p * pe
        if not posterior:
            raise ZeroProbabilityEvidence(f"belief cannot emit {output!r}")
        target = self._name(Belief.from_mapping(posterior))
        self._succ_cache[key] = target
        return target

    def surely_dead(self, state: str) -> bool:
        return all(self.base.surely_doomed(q) for q in self.belief(state).support)

    surely_doomed = surely_dead

    def alive_mass(self, state: str) -> Prob:
        zero: Prob = Fraction(0) if self.exact else 0.0
        return sum((p for q, p in self.belief(state).items if not self.base.surely_doomed(q)), zero)

    def rooted_at(self, state: str) -> "BeliefRootedEnvironment":
        out = copy.copy(self)
        out.initial = state
        return out


def belief_rooted(env, belief: Belief, cap: int = 10_000) -> BeliefRootedEnvironment:
    """The environment ``env`` seen from an uncertain state."""
    return BeliefRootedEnvironment(env, belief, cap)


def materialize(env, cap: int = 10_000) -> TeleoEnvironment:
    """Expand a lazily defined environment into a static one.

    Walks every state reachable from the root (surely-dead states included;
    this is a faithful expansion, not a value-preserving quotient) and
    rebuilds the machine.  Raises :class:`StateCapExceeded` when the
    reachable state set grows past ``cap``.
    """
    states = [env.initial]
    seen = {env.initial}
    emit: dict[str, dict] = {}
    trans: dict[tuple, str] = {}
    idx = 0
    while idx < len(states):
        q = states[idx]
        idx += 1
        emit[q] = dict(env.emissions(q))
        for o in emit[q]:
            for a in env.actions.symbols:
                succ = env.successor(q, a, o)
                trans[(q, a, o)] = succ
                if succ not in seen:
                    if len(seen) >= cap:
                        raise StateCapExceeded(f"materialized environment exceeds cap {cap}")
                    seen.add(succ)
                    states.append(succ)
    return build_environment(env.actions, env.sensors, states, emit, trans, env.initial)

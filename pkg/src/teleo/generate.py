"""Seeded random policies and environments for tests and stress runs.

Probabilities come out as small rationals so everything downstream stays on
the exact arithmetic path.  Horizon-decidable environments are built in
layers: each step moves strictly one layer forward, and the final layer is a
single dead state, so everything reachable at the horizon is doomed by
construction.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable

from .env import TeleoEnvironment, build_environment
from .machine import Alphabet, Machine, as_alphabet, build_machine



def rational_distribution(
    rng: random.Random,
    symbols: tuple,
    max_weight: int = 5,
    full_support: bool = False,
) -> dict:
    """Random distribution with small rational probabilities, possibly sparse."""
    low = 1 if full_support else 0
    while True:
        weights = [rng.randint(low, max_weight) for _ in symbols]
        total = sum(weights)
        if total:
            return {sym: Fraction(w, total) for sym, w in zip(symbols, weights) if w}


def _prune_unreachable(states, emit, trans, initial, inputs):
    reachable = {initial}
    frontier = [initial]
    while frontier:
        q = frontier.pop()
        for i in inputs:
            for o in emit[q]:
                succ = trans[(q, i, o)]
                if succ not in reachable:
                    reachable.add(succ)
                    frontier.append(succ)
    states = [q for q in states if q in reachable]
    emit = {q: emit[q] for q in states}
    trans = {k: v for k, v in trans.items() if k[0] in reachable}
    return states, emit, trans


def random_policy(
    rng: random.Random,
    sensors: Alphabet | Iterable[str],
    actions: Alphabet | Iterable[str],
    n_states: int | None = None,
    deterministic: bool = False,
) -> Machine:
    """Random policy on up to ``n_states`` states (unreachable ones pruned)."""
    sensors = as_alphabet(sensors)
    actions = as_alphabet(actions)
    if n_states is None:
        n_states = rng.randint(1, 3)
    states = [f"q{i}" for i in range(n_states)]
    emit = {}
    trans = {}
    for q in states:
        if deterministic:
            emit[q] = {rng.choice(actions.symbols): Fraction(1)}
        else:
            emit[q] = rational_distribution(rng, actions.symbols)
        for s in sensors.symbols:
            for a in emit[q]:
                trans[(q, s, a)] = rng.choice(states)
    states, emit, trans = _prune_unreachable(states, emit, trans, "q0", sensors.symbols)
    return build_machine(sensors, actions, states, emit, trans, "q0")


def random_environment(
    rng: random.Random,
    sensors: Alphabet | Iterable[str],
    actions: Alphabet | Iterable[str],
    n_states: int | None = None,
    top_weight: int = 2,
) -> TeleoEnvironment:
    """Random environment on up to ``n_states`` states; success mass is sparse."""
    sensors = as_alphabet(sensors)
    actions = as_alphabet(actions)
    if n_states is None:
        n_states = rng.randint(1, 4)
    states = [f"q{i}" for i in range(n_states)]
    emit = {}
    trans = {}
    for q in states:
        outputs = []
        for s in sensors.symbols:
            outputs.append(((s, False), rng.randint(0, 5)))
            outputs.append(((s, True), rng.randint(0, top_weight)))
        total = sum(w for _, w in outputs)
        if not total:
            outputs[0] = (outputs[0][0], 1)
            total = 1
        emit[q] = {o: Fraction(w, total) for o, w in outputs if w}
        for a in actions.symbols:
            for o in emit[q]:
                trans[(q, a, o)] = rng.choice(states)
    states, emit, trans = _prune_unreachable(states, emit, trans, "q0", actions.symbols)
    return build_environment(actions, sensors, states, emit, trans, "q0")


def random_t_decidable_environment(
    rng: random.Random,
    sensors: Alphabet | Iterable[str],
    actions: Alphabet | Iterable[str],
    depth: int,
    max_states: int = 6,
) -> TeleoEnvironment:
    """Random environment in which every state reachable at ``depth`` is doomed.

    States form layers 0..depth-1 plus one absorbing dead state; transitions
    only ever move one layer forward (or straight to the dead state), so the
    horizon closes the value bounds exactly.  At least one layer state emits
    the success flag.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if max_states < depth + 1:
        raise ValueError("need at least depth + 1 states (one per layer plus the dead state)")
    sensors = as_alphabet(sensors)
    actions = as_alphabet(actions)
    budget = max_states - 1 - depth
    sizes = [1] + [1 + (rng.randint(0, budget) if budget > 0 else 0) for _ in range(depth - 1)]
    while sum(sizes) > max_states - 1:
        k = rng.randrange(1, depth) if depth > 1 else 0
        if k and sizes[k] > 1:
            sizes[k] -= 1

    layers = [[f"l{k}_{j}" for j in range(sizes[k])] for k in range(depth)]
    dead = "end"
    states = [q for layer in layers for q in layer] + [dead]

    emit: dict = {}
    trans: dict = {}
    has_top = False
    for k, layer in enumerate(layers):
        nxt = layers[k + 1] if k + 1 < depth else [dead]
        for q in layer:
            weights = []
            for s in sensors.symbols:
                weights.append(((s, False), rng.randint(0, 5)))
                w_top = rng.randint(0, 3) if rng.random() < 0.6 else 0
                weights.append(((s, True), w_top))
            total = sum(w for _, w in weights)
            if not total:
                weights[0] = (weights[0][0], 1)
                total = 1
            emit[q] = {o: Fraction(w, total) for o, w in weights if w}
            has_top = has_top or any(g for (_, g) in emit[q])
            for a in actions.symbols:
                for o in emit[q]:
                    trans[(q, a, o)] = rng.choice(nxt) if rng.random() < 0.85 else dead
    if not has_top:
        q = layers[0][0]
        s0 = sensors.symbols[0]
        emit[q] = {(s0, False): Fraction(1, 2), (s0, True): Fraction(1, 2)}
        nxt = layers[1] if depth > 1 else [dead]
        for a in actions.symbols:
            for o in emit[q]:
                trans[(q, a, o)] = rng.choice(nxt)

    emit[dead] = {(s, False): Fraction(1, len(sensors)) for s in sensors.symbols}
    for a in actions.symbols:
        for s in sensors.symbols:
            trans[(dead, a, (s, False))] = dead

    states, emit, trans = _prune_unreachable(states, emit, trans, layers[0][0], actions.symbols)
    return build_environment(actions, sensors, states, emit, trans, layers[0][0])

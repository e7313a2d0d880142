"""Small named environments and policy builders.

These are the worked examples the test suite (and the command line's ``amd``
sweep) lean on: an environment that never succeeds, a one-shot chance, a
repeated coin, the two-branch X/Y environment whose optimal play ignores the
likelier branch, and the absent-minded driver.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .env import TeleoEnvironment, build_environment
from .machine import Machine, Prob, build_machine


def policy_constant(action: str, sensors: Iterable[str], actions: Iterable[str]) -> Machine:
    """One-state policy that always plays ``action``."""
    sensors = tuple(sensors)
    actions = tuple(actions)
    emit = {"q0": {action: Fraction(1)}}
    trans = {("q0", s, action): "q0" for s in sensors}
    return build_machine(sensors, actions, ["q0"], emit, trans, "q0")


def policy_memoryless(dist: Mapping[str, Prob], sensors: Iterable[str], actions: Iterable[str]) -> Machine:
    """One-state policy drawing every action from ``dist``."""
    sensors = tuple(sensors)
    actions = tuple(actions)
    emit = {"q0": dict(dist)}
    trans = {("q0", s, a): "q0" for s in sensors for a in actions if dist.get(a)}
    return build_machine(sensors, actions, ["q0"], emit, trans, "q0")


def policy_then(first: str, rest: str, sensors: Iterable[str], actions: Iterable[str]) -> Machine:
    """Two-state policy: play ``first`` once, then ``rest`` forever."""
    sensors = tuple(sensors)
    actions = tuple(actions)
    emit = {"q0": {first: Fraction(1)}, "q1": {rest: Fraction(1)}}
    trans: dict[tuple, str] = {}
    for s in sensors:
        trans[("q0", s, first)] = "q1"
        trans[("q1", s, rest)] = "q1"
    return build_machine(sensors, actions, ["q0", "q1"], emit, trans, "q0")


def policy_alternator(sensors: Iterable[str] = ("s0",), actions: Iterable[str] = ("a0", "a1")) -> Machine:
    """Two-state policy alternating between the first two actions."""
    sensors = tuple(sensors)
    a0, a1 = tuple(actions)[:2]
    emit = {"q0": {a0: Fraction(1)}, "q1": {a1: Fraction(1)}}
    trans: dict[tuple, str] = {}
    for s in sensors:
        trans[("q0", s, a0)] = "q1"
        trans[("q1", s, a1)] = "q0"
    return build_machine(sensors, tuple(actions), ["q0", "q1"], emit, trans, "q0")


def env_never(sensors: Iterable[str] = ("s0",), actions: Iterable[str] = ("a0", "a1")) -> TeleoEnvironment:
    """Success never occurs."""
    sensors = tuple(sensors)
    actions = tuple(actions)
    share = Fraction(1, len(sensors))
    emit = {"q0": {(s, False): share for s in sensors}}
    trans = {("q0", a, (s, False)): "q0" for a in actions for s in sensors}
    return build_environment(actions, sensors, ["q0"], emit, trans, "q0")


def env_oneshot(
    p: Prob = Fraction(1, 2),
    sensors: Iterable[str] = ("s0",),
    actions: Iterable[str] = ("a0", "a1"),
) -> TeleoEnvironment:
    """One chance of success, probability ``p``, at the first step only."""
    sensors = tuple(sensors)
    actions = tuple(actions)
    share = Fraction(1, len(sensors))
    emit = {
        "go": {},
        "done": {(s, False): share for s in sensors},
    }
    for s in sensors:
        emit["go"][(s, True)] = share * p
        if p != 1:
            emit["go"][(s, False)] = share * (1 - p)
    trans: dict[tuple, str] = {}
    for a in actions:
        for s in sensors:
            trans[("go", a, (s, True))] = "done"
            trans[("go", a, (s, False))] = "done"
            trans[("done", a, (s, False))] = "done"
    return build_environment(actions, sensors, ["go", "done"], emit, trans, "go")


def env_coin(
    p: Prob = Fraction(1, 3),
    sensors: Iterable[str] = ("s0",),
    actions: Iterable[str] = ("a0", "a1"),
) -> TeleoEnvironment:
    """Success with probability ``p`` on every step, forever, whatever is played."""
    sensors = tuple(sensors)
    actions = tuple(actions)
    share = Fraction(1, len(sensors))
    emit = {"q0": {}}
    for s in sensors:
        emit["q0"][(s, True)] = share * p
        if p != 1:
            emit["q0"][(s, False)] = share * (1 - p)
    trans = {("q0", a, (s, g)): "q0" for a in actions for s in sensors for g in (False, True)}
    return build_environment(actions, sensors, ["q0"], emit, trans, "q0")


XY_SENSORS = ("s0",)
XY_ACTIONS = ("A", "B")


def env_xy() -> TeleoEnvironment:
    """Branching environment where the likelier branch should be ignored.

    The entry state succeeds immediately with probability 9/10 and moves to
    branch X, else moves to branch Y.  Branch X pays again only for action A,
    branch Y only for action B, and the sensor cannot tell them apart.  Since
    a second success is worthless, optimal play takes B regardless of how
    likely X is: the optimal value is 9/10 + 1/10 = 1.
    """
    s0 = XY_SENSORS[0]
    emit = {
        "entry": {(s0, False): Fraction(1, 10), (s0, True): Fraction(9, 10)},
        "X": {(s0, False): Fraction(1)},
        "Y": {(s0, False): Fraction(1)},
        "winX": {(s0, True): Fraction(1)},
        "winY": {(s0, True): Fraction(1)},
        "trap": {(s0, False): Fraction(1)},
    }
    trans: dict[tuple, str] = {}
    for a in XY_ACTIONS:
        trans[("entry", a, (s0, True))] = "X"
        trans[("entry", a, (s0, False))] = "Y"
        trans[("X", a, (s0, False))] = "winX" if a == "A" else "trap"
        trans[("Y", a, (s0, False))] = "winY" if a == "B" else "trap"
        trans[("winX", a, (s0, True))] = "trap"
        trans[("winY", a, (s0, True))] = "trap"
        trans[("trap", a, (s0, False))] = "trap"
    return build_environment(XY_ACTIONS, XY_SENSORS, ["entry", "X", "Y", "winX", "winY", "trap"], emit, trans, "entry")


AMD_SENSORS = ("road",)
AMD_ACTIONS = ("CONT", "EXIT")


def env_amd() -> TeleoEnvironment:
    """The absent-minded driver, normalized to success probabilities.

    Two indistinguishable intersections.  Exiting at the first is worthless;
    exiting at the second succeeds surely; continuing past both succeeds with
    probability 1/4 (the classic 0/4/1 payoffs scaled by their maximum).  The
    best one-state policy continues with probability 2/3 and is properly
    stochastic.
    """
    road = AMD_SENSORS[0]
    emit = {
        "x1": {(road, False): Fraction(1)},
        "x2": {(road, False): Fraction(1)},
        "win": {(road, True): Fraction(1)},
        "home": {(road, False): Fraction(3, 4), (road, True): Fraction(1, 4)},
        "out": {(road, False): Fraction(1)},
    }
    trans: dict[tuple, str] = {}
    trans[("x1", "CONT", (road, False))] = "x2"
    trans[("x1", "EXIT", (road, False))] = "out"
    trans[("x2", "CONT", (road, False))] = "home"
    trans[("x2", "EXIT", (road, False))] = "win"
    for a in AMD_ACTIONS:
        trans[("win", a, (road, True))] = "out"
        trans[("home", a, (road, False))] = "out"
        trans[("home", a, (road, True))] = "out"
        trans[("out", a, (road, False))] = "out"
    return build_environment(AMD_ACTIONS, AMD_SENSORS, ["x1", "x2", "win", "home", "out"], emit, trans, "x1")


def amd_memoryless(p: Prob) -> Machine:
    """One-state driver that continues with probability ``p``."""
    dist: dict[str, Prob] = {}
    if p:
        dist["CONT"] = p
    if p != 1:
        dist["EXIT"] = 1 - p
    return policy_memoryless(dist, AMD_SENSORS, AMD_ACTIONS)

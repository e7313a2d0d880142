"""Finite-state stochastic transducers.

A machine carries, for every state, a probability distribution over output
symbols and a deterministic transition table indexed by (state, input,
output).  Emissions never depend on the current input: the output is drawn
simultaneously with the arrival of the input, and only the transition sees
both.  This is what lets two machines with opposite interfaces be coupled
step for step.

Probabilities are ``fractions.Fraction`` on the exact path and ``float``
otherwise.  A machine is marked exact only when every probability is
rational; a single decimal probability switches the whole machine (and
everything computed from it) to approximate mode.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    AlphabetMismatch,
    BadDistribution,
    ImpossibleOutput,
    ImpossibleTrajectory,
    LengthMismatch,
    MissingTransition,
    UnknownSymbol,
    UnreachableState,
    ValidationError,
)

# Environments use (sensor, success-flag) pairs as output symbols.
Symbol = Union[str, tuple]
Prob = Union[Fraction, float]

# Slack allowed on a distribution's sum before renormalization (approximate
# mode only) and the tolerance used when comparing approximate probabilities.
SUM_TOLERANCE = 1e-9
COMPARE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbols; declaration order is canonical.

    The order is used for tie-breaking wherever a canonical choice is needed
    (argmax ties, serialization, enumeration order).
    """

    symbols: tuple[Symbol, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValidationError("alphabet must be non-empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationError(f"alphabet has duplicate symbols: {self.symbols!r}")

    @cached_property
    def _index(self) -> dict[Symbol, int]:
        return {sym: k for k, sym in enumerate(self.symbols)}

    def index(self, symbol: Symbol) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownSymbol(f"symbol {symbol!r} not in alphabet") from None

    def __contains__(self, symbol: Symbol) -> bool:
        return symbol in self._index

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


def as_alphabet(value: Alphabet | Iterable[Symbol]) -> Alphabet:
    if isinstance(value, Alphabet):
        return value
    return Alphabet(tuple(value))


@dataclass(frozen=True)
class Machine:
    """A validated stochastic transducer.

    ``emit`` maps each state to its output distribution (positive entries
    only) and ``trans`` maps (state, input, output) to the successor state.
    Instances are immutable; evolution returns a new machine sharing the
    same tables with a different initial state.
    """

    inputs: Alphabet
    outputs: Alphabet
    states: tuple[str, ...]
    emit: Mapping[str, Mapping[Symbol, Prob]]
    trans: Mapping[tuple[str, Symbol, Symbol], str]
    initial: str
    exact: bool

    def support(self, state: str) -> tuple[Symbol, ...]:
        """Outputs with positive probability at ``state``, canonical order."""
        return tuple(self.emit[state])

    @cached_property
    def _state_index(self) -> dict[str, int]:
        return {q: k for k, q in enumerate(self.states)}


def _normalize_distribution(dist: Mapping[Symbol, Prob], where: str) -> tuple[dict[Symbol, Prob], bool]:
    """Validate and normalize one emission distribution.

    Returns the cleaned distribution (zero entries dropped) and whether it is
    exact.  Exact distributions must sum to one on the nose; approximate ones
    may be off by up to ``SUM_TOLERANCE`` and are renormalized.
    """
    exact = all(isinstance(p, (Fraction, int)) and not isinstance(p, bool) for p in dist.values())
    if exact:
        cleaned = {o: Fraction(p) for o, p in dist.items() if p != 0}
        total = sum(cleaned.values(), Fraction(0))
        if any(p < 0 for p in cleaned.values()) or total != 1:
            raise BadDistribution(f"{where}: probabilities sum to {total}, expected exactly 1")
    else:
        cleaned = {o: float(p) for o, p in dist.items() if float(p) != 0.0}
        total = sum(cleaned.values())
        if any(p < 0 for p in cleaned.values()) or abs(total - 1.0) > SUM_TOLERANCE:
            raise BadDistribution(f"{where}: probabilities sum to {total!r}, expected 1 within {SUM_TOLERANCE}")
        cleaned = {o: p / total for o, p in cleaned.items()}
    if not cleaned:
        raise BadDistribution(f"{where}: distribution has no positive entries")
    return cleaned, exact


def build_machine(
    inputs: Alphabet | Iterable[Symbol],
    outputs: Alphabet | Iterable[Symbol],
    states: Sequence[str],
    emit: Mapping[str, Mapping[Symbol, Prob]],
    trans: Mapping[tuple[str, Symbol, Symbol], str],
    initial: str,
) -> Machine:
    """Validate a raw machine description and return the canonical machine.

    Checks symbol membership, distribution normalization, transition totality
    on every positive-probability (state, input, output) triple, and
    reachability of every state from the initial one.  Transition entries on
    zero-probability outputs are allowed and preserved.
    """
    inputs = as_alphabet(inputs)
    outputs = as_alphabet(outputs)
    states = tuple(states)
    if not states:
        raise ValidationError("machine needs at least one state")
    if len(set(states)) != len(states):
        raise ValidationError("duplicate state names")
    state_set = set(states)
    if initial not in state_set:
        raise UnknownSymbol(f"initial state {initial!r} is not a declared state")

    for q in emit:
        if q not in state_set:
            raise UnknownSymbol(f"emission given for unknown state {q!r}")

    clean_emit: dict[str, dict[Symbol, Prob]] = {}
    all_exact = True
    for q in states:
        if q not in emit:
            raise BadDistribution(f"state {q!r} has no emission distribution")
        for o in emit[q]:
            if o not in outputs:
                raise UnknownSymbol(f"state {q!r} emits unknown output {o!r}")
        dist, exact = _normalize_distribution(emit[q], f"state {q!r}")
        # canonical output order
        clean_emit[q] = {o: dist[o] for o in outputs.symbols if o in dist}
        all_exact = all_exact and exact

    if not all_exact:
        clean_emit = {q: {o: float(p) for o, p in d.items()} for q, d in clean_emit.items()}

    clean_trans: dict[tuple[str, Symbol, Symbol], str] = {}
    for (q, i, o), target in trans.items():
        if q not in state_set:
            raise UnknownSymbol(f"transition from unknown state {q!r}")
        if i not in inputs:
            raise UnknownSymbol(f"transition on unknown input {i!r}")
        if o not in outputs:
            raise UnknownSymbol(f"transition on unknown output {o!r}")
        if target not in state_set:
            raise UnknownSymbol(f"transition from {q!r} targets unknown state {target!r}")
    for q in states:
        for i in inputs.symbols:
            for o in outputs.symbols:
                if (q, i, o) in trans:
                    clean_trans[(q, i, o)] = trans[(q, i, o)]
                elif o in clean_emit[q]:
                    raise MissingTransition(f"state {q!r} has no successor for input {i!r}, output {o!r}")

    reachable = {initial}
    frontier = [initial]
    while frontier:
        q = frontier.pop()
        for i in inputs.symbols:
            for o in clean_emit[q]:
                succ = clean_trans[(q, i, o)]
                if succ not in reachable:
                    reachable.add(succ)
                    frontier.append(succ)
    unreachable = [q for q in states if q not in reachable]
    if unreachable:
        raise UnreachableState(f"states unreachable from {initial!r}: {unreachable}")

    return Machine(inputs, outputs, states, clean_emit, clean_trans, initial, all_exact)


def is_deterministic(m: Machine) -> bool:
    """True iff every state emits a single output with probability one."""
    return all(len(dist) == 1 for dist in m.emit.values())


def evolve(m: Machine, i: Symbol, o: Symbol) -> Machine:
    """The machine after receiving input ``i`` and emitting output ``o``."""
    if i not in m.inputs:
        raise UnknownSymbol(f"unknown input {i!r}")
    if o not in m.outputs:
        raise UnknownSymbol(f"unknown output {o!r}")
    if o not in m.emit[m.initial]:
        raise ImpossibleOutput(f"output {o!r} has zero probability at state {m.initial!r}")
    return replace(m, initial=m.trans[(m.initial, i, o)])


@dataclass(frozen=True)
class TrajectorySpec:
    """A finite paired input/output sequence used by splicing and evolution."""

    steps: tuple[tuple[Symbol, Symbol], ...]

    def __post_init__(self):
        if not self.steps:
            raise ValidationError("trajectory must contain at least one step")

    def __len__(self) -> int:
        return len(self.steps)

    @classmethod
    def of(cls, pairs: Iterable[tuple[Symbol, Symbol]]) -> "TrajectorySpec":
        return cls(tuple((i, o) for i, o in pairs))


def _as_steps(traj: TrajectorySpec | Iterable[tuple[Symbol, Symbol]]) -> tuple[tuple[Symbol, Symbol], ...]:
    if isinstance(traj, TrajectorySpec):
        return traj.steps
    return TrajectorySpec.of(traj).steps


def evolve_seq(m: Machine, traj: TrajectorySpec | Iterable[tuple[Symbol, Symbol]]) -> Machine:
    """Left fold of :func:`evolve` over the trajectory's steps."""
    out = m
    for k, (i, o) in enumerate(_as_steps(traj), start=1):
        try:
            out = evolve(out, i, o)
        except ImpossibleOutput as exc:
            raise ImpossibleOutput(f"step {k}: {exc}", step=k) from None
    return out


def output_sequence_probability(m: Machine, inputs_seq: Sequence[Symbol], outputs_seq: Sequence[Symbol]) -> Prob:
    """Probability that ``m`` produces ``outputs_seq`` when fed ``inputs_seq``.

    The probability of the outputs up to time t depends only on inputs up to
    time t-1, since each step's emission is drawn before the input is seen.
    """
    if len(inputs_seq) != len(outputs_seq):
        raise LengthMismatch(f"{len(inputs_seq)} inputs vs {len(outputs_seq)} outputs")
    zero: Prob = Fraction(0) if m.exact else 0.0
    one: Prob = Fraction(1) if m.exact else 1.0
    q = m.initial
    prob = one
    for i, o in zip(inputs_seq, outputs_seq):
        if i not in m.inputs:
            raise UnknownSymbol(f"unknown input {i!r}")
        if o not in m.outputs:
            raise UnknownSymbol(f"unknown output {o!r}")
        p = m.emit[q].get(o)
        if not p:
            return zero
        prob = prob * p
        q = m.trans[(q, i, o)]
    return prob


def _emission_key(m: Machine, q: str) -> tuple:
    items = []
    for o in m.outputs.symbols:
        p = m.emit[q].get(o)
        if p is not None:
            key = p if isinstance(p, Fraction) else round(p, 12)
            items.append((m.outputs.index(o), key))
    return tuple(items)


def _refine_partition(machines: Sequence[Machine]) -> dict[tuple[int, str], int]:
    """Coarsest bisimulation partition over the disjoint union of ``machines``.

    All machines must share alphabets.  Two states end in the same block iff
    they have equal emission distributions and, for every positive
    (input, output) pair, successors in the same block.
    """
    nodes = [(mi, q) for mi, m in enumerate(machines) for q in m.states]
    block: dict[tuple[int, str], int] = {}
    by_key: dict[tuple, int] = {}
    for mi, q in nodes:
        key = _emission_key(machines[mi], q)
        if key not in by_key:
            by_key[key] = len(by_key)
        block[(mi, q)] = by_key[key]

    n_blocks = len(by_key)
    while True:
        signatures: dict[tuple[int, str], tuple] = {}
        for mi, q in nodes:
            m = machines[mi]
            parts = [block[(mi, q)]]
            for i in m.inputs.symbols:
                for o in m.emit[q]:
                    parts.append(block[(mi, m.trans[(q, i, o)])])
            signatures[(mi, q)] = tuple(parts)
        fresh: dict[tuple, int] = {}
        for node in nodes:
            sig = signatures[node]
            if sig not in fresh:
                fresh[sig] = len(fresh)
            block[node] = fresh[sig]
        if len(fresh) == n_blocks:
            return block
        n_blocks = len(fresh)


def _require_same_alphabets(m1: Machine, m2: Machine) -> None:
    if m1.inputs.symbols != m2.inputs.symbols or m1.outputs.symbols != m2.outputs.symbols:
        raise AlphabetMismatch("machines do not share input/output alphabets")


def behaviorally_equivalent(m1: Machine, m2: Machine) -> bool:
    """True iff the initial states are bisimilar.

    Transitions are deterministic given the (input, output) pair, so
    bisimilarity coincides with equality of all trace probabilities.
    """
    _require_same_alphabets(m1, m2)
    block = _refine_partition([m1, m2])
    return block[(0, m1.initial)] == block[(1, m2.initial)]


def minimize(m: Machine) -> Machine:
    """Quotient by the bisimulation partition.

    The result is behaviorally equivalent to ``m`` and has the minimum state
    count among equivalent machines.  State names are taken from the first
    member of each block in declaration order.
    """
    block = _refine_partition([m])
    rep_for_block: dict[int, str] = {}
    for q in m.states:
        rep_for_block.setdefault(block[(0, q)], q)
    reps = [rep_for_block[b] for b in dict.fromkeys(block[(0, q)] for q in m.states)]
    emit = {q: dict(m.emit[q]) for q in reps}
    trans = {
        (q, i, o): rep_for_block[block[(0, m.trans[(q, i, o)])]]
        for q in reps
        for i in m.inputs.symbols
        for o in m.emit[q]
    }
    initial = rep_for_block[block[(0, m.initial)]]
    return build_machine(m.inputs, m.outputs, reps, emit, trans, initial)


def splice(
    base: Machine,
    patch: Machine,
    traj: TrajectorySpec | Iterable[tuple[Symbol, Symbol]],
) -> Machine:
    """Graft ``patch``'s continuation onto ``base`` along a fixed trajectory.

    The result behaves exactly like ``base`` unless its first n inputs and
    its own first n outputs both equal the trajectory's, in which case it
    continues as ``patch`` evolved by the trajectory.  Any mismatch at any
    step permanently reverts to plain base behavior; matching never restarts.

    If the trajectory's outputs have zero probability under ``base`` the
    machine is still constructed (the patched region is unreachable) and an
    :class:`ImpossibleTrajectory` warning is issued.
    """
    _require_same_alphabets(base, patch)
    steps = _as_steps(traj)
    for i, o in steps:
        if i not in base.inputs:
            raise UnknownSymbol(f"unknown input {i!r} in trajectory")
        if o not in base.outputs:
            raise UnknownSymbol(f"unknown output {o!r} in trajectory")
    n = len(steps)

    # Continuation state: the patch evolved by the trajectory.  Where the
    # patch's table has no entry (zero-probability output) the state is held,
    # so the continuation is defined even for trajectories the patch itself
    # could not have produced.
    p_state = patch.initial
    for i, o in steps:
        p_state = patch.trans.get((p_state, i, o), p_state)

    q = base.initial
    feasible = True
    for i, o in steps:
        if o not in base.emit[q]:
            feasible = False
            break
        q = base.trans[(q, i, o)]
    if not feasible:
        warnings.warn(
            "trajectory has zero probability under the base machine; the splice point is unreachable",
            ImpossibleTrajectory,
            stacklevel=2,
        )

    def name(key: tuple) -> str:
        kind = key[0]
        if kind == "t":
            return f"t{key[1]}:{key[2]}"
        if kind == "d":
            return f"div:{key[1]}"
        return f"patch:{key[1]}"

    start = ("t", 0, base.initial)
    order: list[tuple] = [start]
    seen = {start}
    emit: dict[str, dict[Symbol, Prob]] = {}
    trans: dict[tuple[str, Symbol, Symbol], str] = {}
    idx = 0
    while idx < len(order):
        key = order[idx]
        idx += 1
        kind = key[0]
        src = patch if kind == "p" else base
        state = key[2] if kind == "t" else key[1]
        emit[name(key)] = dict(src.emit[state])
        for i in src.inputs.symbols:
            for o in src.emit[state]:
                succ = src.trans[(state, i, o)]
                if kind == "t":
                    k = key[1]
                    if (i, o) == steps[k]:
                        target = ("p", p_state) if k == n - 1 else ("t", k + 1, succ)
                    else:
                        target = ("d", succ)
                elif kind == "d":
                    target = ("d", succ)
                else:
                    target = ("p", succ)
                trans[(name(key), i, o)] = name(target)
                if target not in seen:
                    seen.add(target)
                    order.append(target)

    return build_machine(
        base.inputs,
        base.outputs,
        [name(key) for key in order],
        emit,
        trans,
        name(start),
    )


def canonical_key(m: Machine) -> tuple:
    """Hashable key identifying ``m``'s behavior.

    Minimizes, renames states in breadth-first discovery order and flattens
    the tables; two machines over the same alphabets get equal keys iff they
    are behaviorally equivalent.
    """
    mm = minimize(m)
    order: dict[str, int] = {mm.initial: 0}
    queue = [mm.initial]
    while queue:
        q = queue.pop(0)
        for i in mm.inputs.symbols:
            for o in mm.emit[q]:
                succ = mm.trans[(q, i, o)]
                if succ not in order:
                    order[succ] = len(order)
                    queue.append(succ)
    emit_part = tuple(
        tuple((mm.outputs.index(o), p if isinstance(p, Fraction) else round(p, 12)) for o, p in mm.emit[q].items())
        for q in order
    )
    trans_part = tuple(
        tuple(order[mm.trans[(q, i, o)]] for i in mm.inputs.symbols for o in mm.emit[q]) for q in order
    )
    return (emit_part, trans_part)

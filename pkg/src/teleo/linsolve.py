"""Least fixed point of v = c + M v over a finite chain.

Used for reach-at-least-once probabilities: ``c`` is the immediate event
mass at each node and ``M`` the sub-stochastic continuation kernel.  Nodes
from which no positive immediate mass is reachable are pinned to zero; the
rest is solved per strongly connected component in reverse topological
order, by exact Gaussian elimination over rationals or by float elimination
with partial pivoting.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .errors import TeleoError

Node = Hashable


def _tarjan_sccs(nodes: Sequence[Node], succ: Mapping[Node, list[Node]]) -> list[list[Node]]:
    """Strongly connected components, emitted before any component that can reach them."""
    index: dict[Node, int] = {}
    lowlink: dict[Node, int] = {}
    on_stack: set[Node] = set()
    stack: list[Node] = []
    sccs: list[list[Node]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in index:
                    index[child] = lowlink[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(succ.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    lowlink[node] = min(lowlink[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
    return sccs


def gaussian_solve(a: list[list[Prob]], b: list["Prob"], exact: bool) -> list["Prob"]:
    """Solve A x = b in place; exact mode pivots on the first nonzero entry."""
    n = len(b)
    rows = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = None
        if exact:
            for r in range(col, n):
                if rows[r][col] != 0:
                    pivot = r
                    break
        else:
            best = 0.0
            for r in range(col, n):
                if abs(rows[r][col]) > best:
                    best = abs(rows[r][col])
                    pivot = r
        if pivot is None:
            raise TeleoError("singular linear system in success-probability solve")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] / inv
            if factor:
                for k in range(col, n + 1):
                    rows[r][k] -= factor * rows[col][k]
    x: list[Prob] = [Fraction(0) if exact else 0.0] * n
    for r in range(n - 1, -1, -1):
        acc = rows[r][n]
        for k in range(r + 1, n):
            acc -= rows[r][k] * x[k]
        x[r] = acc / rows[r][r]
    return x


Prob = Fraction | float


def solve_reach_probability(
    nodes: Sequence[Node],
    immediate: Mapping[Node, Prob],
    moves: Mapping[Node, Mapping[Node, Prob]],
    exact: bool,
) -> dict[Node, Prob]:
    """Least solution of v = immediate + moves . v.

    ``moves`` holds the continuation kernel rows (positive entries only).
    Nodes that cannot reach positive immediate mass get value zero exactly.
    """
    zero: Prob = Fraction(0) if exact else 0.0

    reverse: dict[Node, list[Node]] = {x: [] for x in nodes}
    for x in nodes:
        for y in moves.get(x, {}):
            reverse[y].append(x)
    alive: set[Node] = set()
    frontier = [x for x in nodes if immediate.get(x, zero) > 0]
    alive.update(frontier)
    while frontier:
        y = frontier.pop()
        for x in reverse[y]:
            if x not in alive:
                alive.add(x)
                frontier.append(x)

    values: dict[Node, Prob] = {x: zero for x in nodes}
    if not alive:
        return values

    alive_order = [x for x in nodes if x in alive]
    succ = {x: [y for y in moves.get(x, {}) if y in alive] for x in alive_order}
    for comp in _tarjan_sccs(alive_order, succ):
        if len(comp) == 1:
            x = comp[0]
            row = moves.get(x, {})
            self_mass = row.get(x, zero)
            rhs = immediate.get(x, zero) + sum(
                (p * values[y] for y, p in row.items() if y != x and y not in comp), zero
            )
            denom = 1 - self_mass
            if denom == 0:
                raise TeleoError("success-probability system has a probability-1 self loop with positive target mass")
            values[x] = rhs / denom
        else:
            pos = {x: k for k, x in enumerate(comp)}
            one: Prob = Fraction(1) if exact else 1.0
            a = [[one if r == c else zero for c in range(len(comp))] for r in range(len(comp))]
            b: list[Prob] = []
            for x in comp:
                row = moves.get(x, {})
                rhs = immediate.get(x, zero)
                for y, p in row.items():
                    if y in pos:
                        a[pos[x]][pos[y]] -= p
                    else:
                        rhs += p * values[y]
                b.append(rhs)
            solution = gaussian_solve(a, b, exact)
            for x, v in zip(comp, solution):
                values[x] = v
    return values

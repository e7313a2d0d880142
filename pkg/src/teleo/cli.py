"""Command-line interface.

Exit codes: 0 success, 1 validation or domain error, 2 undecided optimality
verdict, 3 I/O or internal failure.  All output is line oriented and stable
across runs for fixed inputs in exact mode.
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction

from . import machinefile
from .env import TeleoEnvironment, success_probability
from .errors import TeleoError, ValidationError
from .filtering import filter_trace, materialize, truncate
from .fixtures import amd_memoryless, env_amd
from .machine import Machine, Prob, TrajectorySpec, splice
from .machinefile import parse_prob
from .optimality import check_optimal, optimal_value_bounds, synthesize_optimal_policy
from .oracles import simulate
from .specify import specify

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2
EXIT_IO = 3


def _format_value(value: Prob, exact: bool) -> str:
    if exact and isinstance(value, Fraction):
        return str(value)
    return format(float(value), ".12g")


def _load(path: str, want: str):
    obj = machinefile.load(path)
    if want == "policy" and not isinstance(obj, Machine):
        raise ValidationError(f"{path} holds an environment, expected a policy")
    if want == "environment" and not isinstance(obj, TeleoEnvironment):
        raise ValidationError(f"{path} holds a policy, expected an environment")
    return obj


def _parse_trace(text: str) -> list[tuple[str, str]]:
    steps = []
    for k, chunk in enumerate(text.split(","), start=1):
        parts = chunk.strip().split("/")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValidationError(f"trace step {k}: expected 'first/second', got {chunk!r}")
        steps.append((parts[0], parts[1]))
    return steps


def cmd_validate(args) -> int:
    obj = _load(args.file, "any")
    sys.stdout.write(machinefile.dumps(obj))
    return EXIT_OK


def cmd_eval(args) -> int:
    policy = _load(args.policy, "policy")
    env = _load(args.env, "environment")
    if args.exact and not (policy.exact and env.exact):
        raise ValidationError("--exact requires rational probabilities in both files")
    value = success_probability(policy, env)
    print(_format_value(value, args.exact))
    return EXIT_OK


def cmd_bounds(args) -> int:
    env = _load(args.env, "environment")
    interval = optimal_value_bounds(env, args.depth)
    exact = env.exact
    print(f"[{_format_value(interval.lower, exact)}, {_format_value(interval.upper, exact)}]")
    return EXIT_OK


def cmd_check(args) -> int:
    policy = _load(args.policy, "policy")
    env = _load(args.env, "environment")
    tol = parse_prob(args.tol, "--tol") if args.tol is not None else None
    verdict = check_optimal(policy, env, args.depth, tol)
    exact = policy.exact and env.exact
    if verdict.is_optimal:
        print("OPTIMAL")
        return EXIT_OK
    if verdict.is_suboptimal:
        print(f"SUBOPTIMAL gap={_format_value(verdict.gap, exact)}")
        return EXIT_OK
    low = _format_value(verdict.interval.lower, exact)
    up = _format_value(verdict.interval.upper, exact)
    print(f"UNDECIDED [{low},{up}]")
    return EXIT_UNDECIDED


def cmd_filter(args) -> int:
    env = _load(args.env, "environment")
    belief = filter_trace(env, _parse_trace(args.trace), args.mode)
    for state, p in belief.items:
        print(f"{state}: {_format_value(p, env.exact)}")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    env = _load(args.env, "environment")
    policy = synthesize_optimal_policy(env, args.depth)
    machinefile.save(policy, args.output)
    print(f"wrote policy with {len(policy.states)} states to {args.output}")
    return EXIT_OK


def cmd_truncate(args) -> int:
    env = _load(args.env, "environment")
    flat = materialize(truncate(env, cap=args.cap), cap=args.cap)
    machinefile.save(flat, args.output)
    print(f"wrote environment with {len(flat.states)} states to {args.output}")
    return EXIT_OK


def cmd_specify(args) -> int:
    policy = _load(args.policy, "policy")
    beta = parse_prob(args.beta, "--beta")
    env = specify(policy, beta)
    machinefile.save(env, args.output)
    print(f"wrote environment with {len(env.states)} states to {args.output}")
    return EXIT_OK


def cmd_splice(args) -> int:
    base = machinefile.load(args.base)
    patch = machinefile.load(args.patch)
    if isinstance(base, TeleoEnvironment) != isinstance(patch, TeleoEnvironment):
        raise ValidationError("base and patch must be the same kind of machine")
    steps = _parse_trace(args.traj)
    if isinstance(base, TeleoEnvironment):
        # action/sensor steps; the success flag is read as 'no success'
        traj = TrajectorySpec.of((a, (s, False)) for a, s in steps)
        result = splice(base.machine, patch.machine, traj)
        out = TeleoEnvironment(result)
    else:
        traj = TrajectorySpec.of(steps)
        out = splice(base, patch, traj)
    machinefile.save(out, args.output)
    n = len(out.machine.states) if isinstance(out, TeleoEnvironment) else len(out.states)
    print(f"wrote machine with {n} states to {args.output}")
    return EXIT_OK


def cmd_amd(args) -> int:
    grid = float(args.grid)
    if not 0 < grid <= 0.5:
        raise ValidationError("--grid must be in (0, 0.5]")
    env = env_amd()
    steps = max(1, round(1.0 / grid))
    best_p, best_v = 0.0, None
    with open(args.output, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["p", "value"])
        for k in range(steps + 1):
            p = min(1.0, k * grid)
            value = float(success_probability(amd_memoryless(p), env))
            writer.writerow([format(p, ".12g"), format(value, ".12g")])
            if best_v is None or value > best_v:
                best_p, best_v = p, value
    print(f"p*={format(best_p, '.12g')} value={format(best_v, '.12g')}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    policy = _load(args.policy, "policy")
    env = _load(args.env, "environment")
    est = simulate(policy, env, args.horizon, args.runs, args.seed)
    print(f"mean={format(est.mean, '.12g')} stderr={format(est.stderr, '.12g')} "
          f"runs={est.runs} horizon={est.horizon} seed={est.seed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleo",
        description="Interpret finite stochastic machines as goal-directed agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a machine file and echo its canonical form")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="success probability of a policy in an environment")
    p.add_argument("--policy", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--exact", action="store_true", help="print an exact rational")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bounds", help="optimal value bounds at a depth")
    p.add_argument("--env", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("check", help="optimality verdict for a policy")
    p.add_argument("--policy", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--tol", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("filter", help="posterior belief after an action/sensor trace")
    p.add_argument("--env", required=True)
    p.add_argument("--trace", required=True, help="comma-separated action/sensor steps")
    p.add_argument("--mode", choices=["value-laden", "bayes"], default="value-laden")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("synthesize", help="synthesize an optimal policy for a decidable environment")
    p.add_argument("--env", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("truncate", help="write the single-success form of an environment")
    p.add_argument("--env", required=True)
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("specify", help="environment for which a deterministic policy is uniquely optimal")
    p.add_argument("--policy", required=True)
    p.add_argument("--beta", default="1/2", help="per-step success probability while compliant")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_specify)

    p = sub.add_parser("splice", help="graft a patch machine onto a base along a trajectory")
    p.add_argument("--base", required=True)
    p.add_argument("--patch", required=True)
    p.add_argument("--traj", required=True, help="comma-separated input/output steps")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_splice)

    p = sub.add_parser("amd", help="absent-minded driver sweep over continue probabilities")
    p.add_argument("--grid", default="1e-3")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_amd)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the success probability")
    p.add_argument("--policy", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TeleoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""On-disk machine format: JSON with explicit probability strings.

Probabilities are written as "num/den" strings (exact) or decimal strings
(approximate); integers count as exact.  Rational strings survive a
round-trip unchanged, decimals are written with ``repr`` so they parse back
to the identical float.  Environment outputs keep the success flag as a
boolean field instead of mangling it into a symbol name.  Unknown keys are
rejected.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

from .env import TeleoEnvironment, env_output_alphabet
from .errors import ValidationError
from .machine import Machine, Prob, build_machine

_INT_RE = re.compile(r"^[+-]?\d+$")
_RATIONAL_RE = re.compile(r"^[+-]?\d+\s*/\s*\d+$")


def parse_prob(raw: Any, where: str) -> Prob:
    """Parse a probability: rationals and integers are exact, decimals are not."""
    if isinstance(raw, bool):
        raise ValidationError(f"{where}: probability must be a number or string, got a boolean")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        text = raw.strip()
        if _RATIONAL_RE.match(text):
            return Fraction(text.replace(" ", ""))
        if _INT_RE.match(text):
            return Fraction(int(text))
        try:
            return float(text)
        except ValueError:
            raise ValidationError(f"{where}: cannot parse probability {raw!r}") from None
    raise ValidationError(f"{where}: cannot parse probability {raw!r}")


def prob_to_str(p: Prob) -> str:
    if isinstance(p, Fraction):
        return str(p)
    return repr(float(p))


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ValidationError(f"{where}: missing keys {sorted(missing)}")


def _name_list(raw: Any, where: str) -> tuple[str, ...]:
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise ValidationError(f"{where}: expected a list of names")
    return tuple(raw)


def from_dict(doc: dict) -> Machine | TeleoEnvironment:
    """Validate a parsed machine file and build the machine or environment."""
    _require_keys(doc, {"kind", "sensors", "actions", "states", "initial"},
                  {"kind", "sensors", "actions", "states", "initial"}, "machine file")
    kind = doc["kind"]
    if kind not in ("policy", "environment"):
        raise ValidationError(f"kind must be 'policy' or 'environment', got {kind!r}")
    sensors = _name_list(doc["sensors"], "sensors")
    actions = _name_list(doc["actions"], "actions")
    if not isinstance(doc["states"], dict) or not doc["states"]:
        raise ValidationError("states: expected a non-empty object")
    if not isinstance(doc["initial"], str):
        raise ValidationError("initial: expected a state name")

    is_policy = kind == "policy"
    emit: dict[str, dict] = {}
    trans: dict[tuple, str] = {}
    states = list(doc["states"])
    for name, body in doc["states"].items():
        where = f"state {name!r}"
        _require_keys(body, {"emit", "next"}, {"emit", "next"}, where)
        if not isinstance(body["emit"], list) or not isinstance(body["next"], list):
            raise ValidationError(f"{where}: emit and next must be lists")
        dist: dict = {}
        for k, outcome in enumerate(body["emit"]):
            spot = f"{where} emit[{k}]"
            if is_policy:
                _require_keys(outcome, {"action", "p"}, {"action", "p"}, spot)
                if not isinstance(outcome["action"], str):
                    raise ValidationError(f"{spot}: action must be a name")
                key = outcome["action"]
            else:
                _require_keys(outcome, {"sensor", "success", "p"}, {"sensor", "success", "p"}, spot)
                if not isinstance(outcome["sensor"], str) or not isinstance(outcome["success"], bool):
                    raise ValidationError(f"{spot}: sensor must be a name and success a boolean")
                key = (outcome["sensor"], outcome["success"])
            if key in dist:
                raise ValidationError(f"{spot}: duplicate outcome {key!r}")
            dist[key] = parse_prob(outcome["p"], spot)
        emit[name] = dist
        for k, edge in enumerate(body["next"]):
            spot = f"{where} next[{k}]"
            _require_keys(edge, {"on_input", "on_output", "to"}, {"on_input", "on_output", "to"}, spot)
            if not isinstance(edge["on_input"], str) or not isinstance(edge["to"], str):
                raise ValidationError(f"{spot}: on_input and to must be names")
            if is_policy:
                if not isinstance(edge["on_output"], str):
                    raise ValidationError(f"{spot}: on_output must be an action name")
                out = edge["on_output"]
            else:
                _require_keys(edge["on_output"], {"sensor", "success"}, {"sensor", "success"}, f"{spot} on_output")
                if not isinstance(edge["on_output"]["sensor"], str) or not isinstance(edge["on_output"]["success"], bool):
                    raise ValidationError(f"{spot}: on_output needs a sensor name and a boolean success")
                out = (edge["on_output"]["sensor"], edge["on_output"]["success"])
            key = (name, edge["on_input"], out)
            if key in trans:
                raise ValidationError(f"{spot}: duplicate transition for {key!r}")
            trans[key] = edge["to"]

    if is_policy:
        machine = build_machine(sensors, actions, states, emit, trans, doc["initial"])
        return machine
    machine = build_machine(actions, env_output_alphabet(sensors), states, emit, trans, doc["initial"])
    return TeleoEnvironment(machine)


def to_dict(obj: Machine | TeleoEnvironment) -> dict:
    """Serialize a policy machine or an environment to the file layout."""
    if isinstance(obj, TeleoEnvironment):
        machine = obj.machine
        kind = "environment"
        sensors = list(obj.sensors.symbols)
        actions = list(obj.actions.symbols)
    else:
        machine = obj
        kind = "policy"
        sensors = list(machine.inputs.symbols)
        actions = list(machine.outputs.symbols)

    states: dict[str, dict] = {}
    for q in machine.states:
        if kind == "policy":
            emit = [{"action": a, "p": prob_to_str(p)} for a, p in machine.emit[q].items()]
        else:
            emit = [
                {"sensor": s, "success": g, "p": prob_to_str(p)}
                for (s, g), p in machine.emit[q].items()
            ]
        edges = []
        for (src, i, o), target in machine.trans.items():
            if src != q:
                continue
            on_output = o if kind == "policy" else {"sensor": o[0], "success": o[1]}
            edges.append({"on_input": i, "on_output": on_output, "to": target})
        states[q] = {"emit": emit, "next": edges}
    return {
        "kind": kind,
        "sensors": sensors,
        "actions": actions,
        "initial": machine.initial,
        "states": states,
    }


def dumps(obj: Machine | TeleoEnvironment) -> str:
    return json.dumps(to_dict(obj), indent=2) + "\n"


def loads(text: str) -> Machine | TeleoEnvironment:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from None
    return from_dict(doc)


def save(obj: Machine | TeleoEnvironment, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(obj))


def load(path) -> Machine | TeleoEnvironment:
    with open(path, "r", encoding="utf-8") as handle:
        return loads(handle.read())

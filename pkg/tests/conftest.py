import json
import random

import pytest

from pathmark.model import Model, ModelObject, parse_model_json


def _obj(oid, cls, attrs=None, refs=None):
    return {
        "id": oid,
        "class": cls,
        **({"attrs": attrs} if attrs else {}),
        **({"refs": refs} if refs else {}),
    }


def state_machine(model_type, machine_name, states, transitions, initial=True):
    """Canonical-JSON state machine: states is {id: name}, transitions is
    a list of (id, name or None, kind, source, target)."""
    objects = [
        _obj("sm", "StateMachine", {"name": [machine_name]}, {"region": ["rg"]}),
        _obj("rg", "Region",
             refs={"subvertex": (["ps"] if initial else []) + list(states),
                   "transition": [t[0] for t in transitions]}),
    ]
    if initial:
        objects.append(_obj("ps", "PseudoState", {"kind": ["initial"]}))
    for sid, name in states.items():
        objects.append(_obj(sid, "State", {"name": [name]}))
    for tid, name, kind, source, target in transitions:
        attrs = {"kind": [kind]}
        if name:
            attrs["name"] = [name]
        objects.append(_obj(tid, "Transition", attrs,
                            {"source": [source], "target": [target], "container": ["rg"]}))
    return {"modelType": model_type, "objects": objects}


@pytest.fixture
def phone_repo_model() -> Model:
    """The repository-side phone-call state machine of the running example."""
    doc = state_machine(
        "uml", "Phone call",
        {"s_idle": "Idle", "s_dial": "Dialing", "s_wait": "Waiting to answer",
         "s_talk": "Talking"},
        [
            ("t0", None, "initial", "ps", "s_idle"),
            ("t1", "dial", "external", "s_idle", "s_dial"),
            ("t2", "call connected", "external", "s_dial", "s_talk"),
            ("t3", "incoming call", "external", "s_idle", "s_wait"),
            ("t4", "answer call", "external", "s_wait", "s_talk"),
            ("t5", "hang up", "external", "s_talk", "s_idle"),
        ],
    )
    return parse_model_json(json.dumps(doc).encode())


@pytest.fixture
def phone_query_model() -> Model:
    """The example query: only the reception of calls, different styling."""
    doc = state_machine(
        "uml", "Phone call",
        {"s_wait": "Wait", "s_pick": "Waiting to pick up", "s_talk": "Talking"},
        [
            ("t0", None, "initial", "ps", "s_wait"),
            ("t1", "incoming call", "external", "s_wait", "s_pick"),
            ("t2", "answer call", "external", "s_pick", "s_talk"),
        ],
    )
    return parse_model_json(json.dumps(doc).encode())


_DISTRACTOR_WORDS = [
    "red", "green", "amber", "blinking", "fault", "coin", "vending", "brewing",
    "grinding", "door", "opened", "closed", "locked", "jammed", "heating",
    "cooling", "spinning", "rinsing", "paused", "empty", "full", "charging",
    "standby", "active", "error", "reset", "armed", "triggered", "silent",
    "loud", "slow", "fast",
]


def distractor_machines(count: int, seed: int = 7, model_type: str = "uml"):
    """State machines over a vocabulary disjoint from the phone-call example."""
    rng = random.Random(seed)
    models = []
    for i in range(count):
        n_states = rng.randint(3, 6)
        words = rng.sample(_DISTRACTOR_WORDS, n_states + 2)
        states = {f"s{j}": words[j].capitalize() for j in range(n_states)}
        transitions = [("t0", None, "initial", "ps", "s0")]
        for j in range(1, n_states):
            transitions.append(
                (f"t{j}", f"{words[n_states]} {words[n_states + 1]}", "external",
                 f"s{rng.randrange(j)}", f"s{j}")
            )
        doc = state_machine(model_type, f"{words[0].capitalize()} machine",
                            states, transitions)
        models.append((f"distractor-{i:02d}", parse_model_json(json.dumps(doc).encode())))
    return models

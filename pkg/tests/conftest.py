"""Shared fixtures: the engine-governor walkthrough plus random generators.

The fixture narrative: an emission-control governor (ECG) receives a
torque demand from a driver-assistance system (ADAS) and governs engine
torque. Two simple sentences seed the use-case model; two event-driven
refinements complete the activity model; the change scenario adds a
parallel "determine Engine speed" action and maps it to a new use case.
"""

from __future__ import annotations

import random

import pytest

from msync.model import (
    Direction,
    EntityKind,
    Initiator,
    Metamodel,
    Model,
    RelationKind,
    Stage,
)
from msync.project import (
    Project,
    new_project,
    run_dependency,
    run_interpret_alpha,
    run_interpret_beta,
    run_transform,
    set_requirements,
)
from msync.requirements import ElaborationLink, RequirementSet
from msync.sync import ChangeSet

ALPHA_TEXTS = [
    ("R1", "ECG shall receive torque demand from ADAS"),
    ("R2", "ECG shall govern engine torque"),
]

BETA_TEXTS = [
    (
        "R1p",
        "When ADAS makes a torque demand, the ECG shall receive this torque "
        "demand from ADAS.",
    ),
    (
        "R2p",
        "When ECG receives torque demand from ADAS, it shall determine an "
        "Engine torque for the engine to calibrate against.",
    ),
]

ELABORATION_PAIRS = [("R1", "R1p"), ("R2", "R2p")]

ENGINE_SPEED_CHANGESET = [
    {
        "op": "create_entity",
        "model": "beta",
        "kind": "action",
        "label": "determine Engine speed",
    },
    {
        "op": "create_relation",
        "model": "beta",
        "kind": "allocation",
        "source": "a5",
        "target": "LS",
    },
    {
        "op": "create_relation",
        "model": "beta",
        "kind": "precedence",
        "source": "a2",
        "target": "a5",
    },
    {
        "op": "create_relation",
        "model": "beta",
        "kind": "precedence",
        "source": "a5",
        "target": "a4",
    },
]


def make_alpha_set() -> RequirementSet:
    rs = RequirementSet(id="w_alpha", system="ECG")
    for req_id, text in ALPHA_TEXTS:
        rs.add_text(req_id, text)
    return rs


def make_beta_set() -> RequirementSet:
    rs = RequirementSet(id="w_beta", system="ECG")
    for req_id, text in BETA_TEXTS:
        rs.add_text(req_id, text)
    return rs


def elaboration_links() -> list[ElaborationLink]:
    return [ElaborationLink(a, b) for a, b in ELABORATION_PAIRS]


def build_project(upto: str = "dependency") -> Project:
    """Golden project built up to a named pipeline stage.

    Stages in order: "init", "reqs", "alpha", "skeleton", "complete",
    "dependency".
    """
    project = new_project("ecg-governor", "ECG")
    if upto == "init":
        return project
    set_requirements(project, "alpha", make_alpha_set())
    set_requirements(project, "beta", make_beta_set())
    if upto == "reqs":
        return project
    run_interpret_alpha(project)
    if upto == "alpha":
        return project
    run_transform(project)
    if upto == "skeleton":
        return project
    run_interpret_beta(project)
    if upto == "complete":
        return project
    run_dependency(project, elaboration_links())
    return project


def engine_speed_changeset() -> ChangeSet:
    return ChangeSet.from_doc(ENGINE_SPEED_CHANGESET)


@pytest.fixture
def w_alpha() -> RequirementSet:
    return make_alpha_set()


@pytest.fixture
def w_beta() -> RequirementSet:
    return make_beta_set()


@pytest.fixture
def golden_project() -> Project:
    return build_project("dependency")


# ---------------------------------------------------------------------------
# random model generators (seeded by the caller)
# ---------------------------------------------------------------------------

_WORDS = [
    "monitor",
    "filter",
    "dispatch",
    "log",
    "scale",
    "sample",
    "archive",
    "publish",
    "throttle",
    "balance",
]


def random_usecase_model(rng: random.Random, with_initiators: bool = True) -> Model:
    """A conformant use-case model of the shape the rules expect:

    one system, 1..4 actors, 1..6 use cases each associated with
    exactly one actor and allocated to the system.
    """
    model = Model(metamodel=Metamodel.USE_CASE, stage=Stage.POPULATED)
    system = model.add_entity(EntityKind.SYSTEM, "Controller")
    actors = [
        model.add_entity(EntityKind.ACTOR, f"Peer{i}")
        for i in range(1, rng.randint(2, 5))
    ]
    for i in range(rng.randint(1, 6)):
        verb = rng.choice(_WORDS)
        uc = model.add_entity(EntityKind.USE_CASE, f"{verb.capitalize()} Feed {i}")
        actor = rng.choice(actors)
        initiator = (
            rng.choice((Initiator.ACTOR, Initiator.SYSTEM)) if with_initiators else None
        )
        model.add_relation(
            RelationKind.ASSOCIATION, actor, uc, "associated with", initiator=initiator
        )
        model.add_relation(RelationKind.ALLOCATION, uc, system, "allocated to")
    return model


def random_activity_model(rng: random.Random) -> Model:
    """A conformant activity model: lanes, allocated actions, forward flows."""
    model = Model(metamodel=Metamodel.ACTIVITY, stage=Stage.POPULATED)
    lanes = [
        model.add_entity(EntityKind.SWIMLANE, f"Lane {i}")
        for i in range(rng.randint(1, 4))
    ]
    actions = []
    for i in range(rng.randint(1, 8)):
        action = model.add_entity(
            EntityKind.ACTION, f"{rng.choice(_WORDS)} item {i}"
        )
        model.add_relation(
            RelationKind.ALLOCATION, action, rng.choice(lanes), "allocated to"
        )
        actions.append(action)
    rng.shuffle(actions)
    for a, b in zip(actions, actions[1:]):
        if rng.random() < 0.7:
            model.add_relation(
                RelationKind.PRECEDENCE, a, b, "precedes", direction=Direction.FORWARD
            )
    return model

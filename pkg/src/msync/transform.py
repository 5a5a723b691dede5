"""Structure transformation from use-case models to activity skeletons.

Three built-in rules, applied entities-before-relations:

1. the System and each Actor become a Swimlane;
2. each UseCase becomes a pair of unlabeled Actions, one allocated to
   the associated Actor's lane and one to the System lane (a starting
   point - domain knowledge may later grow the set);
3. the pair is joined by a precedence whose flow direction is left
   undecided, preserving the association without ever drawing an
   action-to-foreign-lane dependency the activity metamodel forbids.

The pair's creation order follows who initiates the interaction (the
association's initiator annotation): actor-initiated pairs start in the
actor's lane, system-initiated pairs in the system lane. The follow-up
composition step copies the source entities' names onto the lanes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MissingTraceLink, NonConformantSource, OrphanUseCase
from .model import (
    Direction,
    EntityKind,
    Initiator,
    Metamodel,
    Model,
    RelationKind,
    Stage,
)
from .rosetta import TraceMatrix


@dataclass(frozen=True)
class TransformRule:
    name: str
    source_pattern: str
    production: str


RULESET: tuple[TransformRule, ...] = (
    TransformRule(
        "lanes",
        "System or Actor entity",
        "one Swimlane per entity, trace-linked one-to-one",
    ),
    TransformRule(
        "action-pairs",
        "UseCase with its Association(s)",
        "two unlabeled Actions (actor lane / system lane), allocated, "
        "trace-linked one-to-many from the UseCase",
    ),
    TransformRule(
        "pairing-precedence",
        "the Association of a UseCase",
        "an undecided-direction precedence joining the action pair",
    ),
)


def semantic_transform(source: Model) -> tuple[Model, TraceMatrix]:
    """Apply the rule set to a conformant use-case model.

    Returns the activity skeleton (clean: no labels, undecided flows)
    and the seeded trace matrix.
    """
    if source.metamodel is not Metamodel.USE_CASE:
        raise NonConformantSource(
            [v for v in source.check_conformance()]
            or [_violation("metamodel", "source is not a use-case model")]
        )
    violations = source.check_conformance()
    use_cases = source.entities_of_kind(EntityKind.USE_CASE)
    systems = source.entities_of_kind(EntityKind.SYSTEM)
    if use_cases and len(systems) != 1:
        violations = violations + [
            _violation("system_multiplicity", "use cases require exactly one system")
        ]
    if violations:
        raise NonConformantSource(violations)

    target = Model(metamodel=Metamodel.ACTIVITY, stage=Stage.SKELETON)
    q = TraceMatrix()

    lane_for: dict[str, str] = {}
    for entity in source.entities.values():
        if entity.kind in (EntityKind.SYSTEM, EntityKind.ACTOR):
            lane = target.add_entity(EntityKind.SWIMLANE, "", tag=f"L{entity.id}")
            lane_for[entity.id] = lane
            q.add(entity.id, lane)

    system_lane = lane_for[systems[0].id] if systems else None
    for uc in use_cases:
        associations = [
            rel
            for rel in source.relations.values()
            if rel.kind is RelationKind.ASSOCIATION and rel.target == uc.id
        ]
        if not associations:
            raise OrphanUseCase(
                f"use case {uc.id} has no association; nothing determines its lanes"
            )
        orientation = associations[0].initiator or Initiator.ACTOR

        def _action(lane: str) -> str:
            action = target.add_entity(EntityKind.ACTION, "")
            target.add_relation(RelationKind.ALLOCATION, action, lane, "allocated to")
            q.add(uc.id, action)
            return action

        if orientation is Initiator.ACTOR:
            actor_actions = [_action(lane_for[a.source]) for a in associations]
            system_action = _action(system_lane)
            for act in actor_actions:
                target.add_relation(
                    RelationKind.PRECEDENCE,
                    act,
                    system_action,
                    "precedes",
                    direction=Direction.UNDECIDED,
                )
        else:
            system_action = _action(system_lane)
            actor_actions = [_action(lane_for[a.source]) for a in associations]
            for act in actor_actions:
                target.add_relation(
                    RelationKind.PRECEDENCE,
                    system_action,
                    act,
                    "precedes",
                    direction=Direction.UNDECIDED,
                )
    return target, q


def compose_with_interpretation(
    skeleton: Model, source: Model, q: TraceMatrix
) -> Model:
    """Name the skeleton's swimlanes after their trace preimages.

    Actions stay unlabeled; everything else is untouched. Raises
    :class:`MissingTraceLink` for a lane with no preimage.
    """
    composed = skeleton.copy()
    for entity in composed.entities.values():
        if entity.kind is not EntityKind.SWIMLANE:
            continue
        preimages = [s for s in q.sources_of(entity.id) if s in source.entities]
        if not preimages:
            raise MissingTraceLink(f"swimlane {entity.id} has no trace preimage")
        entity.label = source.entities[preimages[0]].label
    return composed


def _violation(code: str, message: str):
    from .model import Violation

    return Violation(code, "", message)

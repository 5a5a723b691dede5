"""Rule-based transformation to the activity skeleton and lane naming."""

import json
import random

import pytest

from msync.errors import MissingTraceLink, NonConformantSource, OrphanUseCase
from msync.interpret import interpret_usecase
from msync.model import (
    Direction,
    EntityKind,
    Initiator,
    Metamodel,
    Model,
    RelationKind,
    Stage,
)
from msync.transform import RULESET, compose_with_interpretation, semantic_transform

from conftest import make_alpha_set, random_usecase_model


@pytest.fixture
def alpha_model():
    model, _ = interpret_usecase(make_alpha_set())
    return model


def lanes_of(model):
    return {e.id: e.label for e in model.entities.values() if e.kind is EntityKind.SWIMLANE}


def actions_of(model):
    return [e for e in model.entities.values() if e.kind is EntityKind.ACTION]


def lane_of(model, action_id):
    for rel in model.relations.values():
        if rel.kind is RelationKind.ALLOCATION and rel.source == action_id:
            return rel.target
    return None


class TestSemanticTransform:
    def test_golden_skeleton_shape(self, alpha_model):
        skeleton, q = semantic_transform(alpha_model)
        assert skeleton.stage is Stage.SKELETON
        assert set(lanes_of(skeleton)) == {"LS", "LA1", "LA2"}
        assert all(label == "" for label in lanes_of(skeleton).values())
        actions = actions_of(skeleton)
        assert [a.id for a in actions] == ["a1", "a2", "a3", "a4"]
        assert all(a.label == "" for a in actions)
        allocations = [
            r for r in skeleton.relations.values() if r.kind is RelationKind.ALLOCATION
        ]
        precedences = [
            r for r in skeleton.relations.values() if r.kind is RelationKind.PRECEDENCE
        ]
        assert len(allocations) == 4
        assert [(p.source, p.target, p.direction) for p in precedences] == [
            ("a1", "a2", Direction.UNDECIDED),
            ("a3", "a4", Direction.UNDECIDED),
        ]

    def test_golden_pair_orientation_follows_initiator(self, alpha_model):
        # actor-initiated pair starts in the actor's lane; system-initiated
        # pair starts in the system lane
        skeleton, _ = semantic_transform(alpha_model)
        assert lane_of(skeleton, "a1") == "LA1"
        assert lane_of(skeleton, "a2") == "LS"
        assert lane_of(skeleton, "a3") == "LS"
        assert lane_of(skeleton, "a4") == "LA2"

    def test_golden_trace_seed(self, alpha_model):
        _, q = semantic_transform(alpha_model)
        assert q.links[:3] == [("S", "LS"), ("A1", "LA1"), ("A2", "LA2")]
        assert q.images_of("U1") == ["a1", "a2"]
        assert q.images_of("U2") == ["a3", "a4"]
        # trace totality: every source entity has at least one link
        assert {a for a, _ in q.links} == {"S", "A1", "A2", "U1", "U2"}

    def test_system_only_model(self):
        model = Model(metamodel=Metamodel.USE_CASE, stage=Stage.POPULATED)
        model.add_entity(EntityKind.SYSTEM, "ECG")
        skeleton, q = semantic_transform(model)
        assert len(lanes_of(skeleton)) == 1
        assert actions_of(skeleton) == []
        assert q.links == [("S", "LS")]

    def test_one_actor_two_use_cases_share_lane(self):
        model = Model(metamodel=Metamodel.USE_CASE, stage=Stage.POPULATED)
        s = model.add_entity(EntityKind.SYSTEM, "ECG")
        a = model.add_entity(EntityKind.ACTOR, "ADAS")
        for label in ("Accept Demand", "Report Status"):
            u = model.add_entity(EntityKind.USE_CASE, label)
            model.add_relation(
                RelationKind.ASSOCIATION, a, u, initiator=Initiator.ACTOR
            )
            model.add_relation(RelationKind.ALLOCATION, u, s)
        skeleton, _ = semantic_transform(model)
        assert len(lanes_of(skeleton)) == 2
        actions = actions_of(skeleton)
        assert len(actions) == 4
        actor_side = [x.id for x in actions if lane_of(skeleton, x.id) == "LA1"]
        assert actor_side == ["a1", "a3"]

    def test_skeleton_conformant(self, alpha_model):
        skeleton, _ = semantic_transform(alpha_model)
        assert skeleton.check_conformance() == []

    def test_orphan_use_case_is_error(self):
        model = Model(metamodel=Metamodel.USE_CASE, stage=Stage.POPULATED)
        s = model.add_entity(EntityKind.SYSTEM, "ECG")
        u = model.add_entity(EntityKind.USE_CASE, "Orphan")
        model.add_relation(RelationKind.ALLOCATION, u, s)
        with pytest.raises(OrphanUseCase):
            semantic_transform(model)

    def test_nonconformant_source_rejected(self):
        model = Model(metamodel=Metamodel.USE_CASE, stage=Stage.POPULATED)
        model.add_entity(EntityKind.SYSTEM, "one")
        model.add_entity(EntityKind.SYSTEM, "two")
        with pytest.raises(NonConformantSource):
            semantic_transform(model)
        with pytest.raises(NonConformantSource):
            semantic_transform(Model(metamodel=Metamodel.ACTIVITY))

    def test_cardinalities_on_random_sources(self):
        rng = random.Random(20260809)
        for _ in range(100):
            source = random_usecase_model(rng)
            skeleton, q = semantic_transform(source)
            n_actors = len(source.entities_of_kind(EntityKind.ACTOR))
            n_ucs = len(source.entities_of_kind(EntityKind.USE_CASE))
            assert len(lanes_of(skeleton)) == 1 + n_actors
            assert len(actions_of(skeleton)) == 2 * n_ucs
            allocations = [
                r
                for r in skeleton.relations.values()
                if r.kind is RelationKind.ALLOCATION
            ]
            undecided = [
                r
                for r in skeleton.relations.values()
                if r.kind is RelationKind.PRECEDENCE
                and r.direction is Direction.UNDECIDED
            ]
            assert len(allocations) == 2 * n_ucs
            assert len(undecided) == n_ucs
            assert skeleton.check_conformance() == []
            # trace totality
            assert {a for a, _ in q.links} == set(source.entities)

    def test_determinism_byte_for_byte(self, alpha_model):
        one = semantic_transform(alpha_model)
        two = semantic_transform(alpha_model.copy())
        assert json.dumps(one[0].to_doc(), sort_keys=True) == json.dumps(
            two[0].to_doc(), sort_keys=True
        )
        assert one[1].links == two[1].links


class TestComposeWithInterpretation:
    def test_lanes_named_after_preimages(self, alpha_model):
        skeleton, q = semantic_transform(alpha_model)
        composed = compose_with_interpretation(skeleton, alpha_model, q)
        assert lanes_of(composed) == {"LS": "ECG", "LA1": "ADAS", "LA2": "Engine"}
        assert all(a.label == "" for a in actions_of(composed))

    def test_rename_source_then_recompose(self, alpha_model):
        skeleton, q = semantic_transform(alpha_model)
        alpha_model.update_label("A1", "Pilot Assist")
        composed = compose_with_interpretation(skeleton, alpha_model, q)
        assert lanes_of(composed)["LA1"] == "Pilot Assist"

    def test_missing_trace_link(self, alpha_model):
        skeleton, q = semantic_transform(alpha_model)
        q.remove("A1", "LA1")
        with pytest.raises(MissingTraceLink):
            compose_with_interpretation(skeleton, alpha_model, q)

    def test_skeleton_untouched_otherwise(self, alpha_model):
        skeleton, q = semantic_transform(alpha_model)
        composed = compose_with_interpretation(skeleton, alpha_model, q)
        assert list(composed.relations) == list(skeleton.relations)
        assert composed.stage is Stage.SKELETON


def test_ruleset_is_ordered_entities_before_relations():
    names = [rule.name for rule in RULESET]
    assert names == ["lanes", "action-pairs", "pairing-precedence"]

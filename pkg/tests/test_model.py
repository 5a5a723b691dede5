"""Typed-graph model: mutation ops, conformance, identifier discipline."""

import itertools

import pytest

from msync.errors import (
    DanglingEndpoint,
    DuplicateRelation,
    EmptyLabel,
    KindMismatch,
    SignatureViolation,
    UnknownEntity,
)
from msync.model import (
    Direction,
    ENTITY_KINDS,
    EntityKind,
    Metamodel,
    Model,
    RELATION_SIGNATURES,
    RelationKind,
    Stage,
    kind_from_tag,
)

from conftest import build_project, engine_speed_changeset
from msync.sync import apply_changeset


def usecase_model() -> Model:
    return Model(metamodel=Metamodel.USE_CASE)


def activity_model() -> Model:
    return Model(metamodel=Metamodel.ACTIVITY)


class TestAddEntity:
    def test_actor_gets_a_tag(self):
        model = usecase_model()
        assert model.add_entity(EntityKind.ACTOR, "ADAS") == "A1"

    def test_action_tags_count_up(self):
        model = activity_model()
        for expected in ("a1", "a2", "a3"):
            assert model.add_entity(EntityKind.ACTION, "determine Engine speed") == expected

    def test_system_tag_is_bare_s(self):
        model = usecase_model()
        assert model.add_entity(EntityKind.SYSTEM, "ECG") == "S"

    def test_kind_outside_metamodel_rejected(self):
        model = usecase_model()
        with pytest.raises(KindMismatch):
            model.add_entity(EntityKind.SWIMLANE, "X")
        with pytest.raises(KindMismatch):
            activity_model().add_entity(EntityKind.ACTOR, "X")

    def test_tags_never_reused_after_deletion(self):
        model = usecase_model()
        model.add_entity(EntityKind.ACTOR, "one")
        a2 = model.add_entity(EntityKind.ACTOR, "two")
        model.remove_entity(a2)
        assert model.add_entity(EntityKind.ACTOR, "three") == "A3"

    def test_explicit_tag_keeps_counter_ahead(self):
        model = usecase_model()
        model.add_entity(EntityKind.USE_CASE, "x", tag="U3")
        assert model.add_entity(EntityKind.USE_CASE, "y") == "U4"


class TestAddRelation:
    def test_allocation_between_usecase_and_system(self):
        model = usecase_model()
        s = model.add_entity(EntityKind.SYSTEM, "ECG")
        u = model.add_entity(EntityKind.USE_CASE, "Receive Torque Demand")
        model.add_relation(RelationKind.ALLOCATION, u, s, "allocated to")
        assert model.check_conformance() == []

    def test_association_canonicalized_actor_first(self):
        model = usecase_model()
        a = model.add_entity(EntityKind.ACTOR, "ADAS")
        u = model.add_entity(EntityKind.USE_CASE, "Receive Torque Demand")
        rel_id = model.add_relation(RelationKind.ASSOCIATION, u, a, "associated with")
        rel = model.relations[rel_id]
        assert (rel.source, rel.target) == (a, u)

    def test_precedence_between_use_cases_rejected(self):
        model = usecase_model()
        model.add_entity(EntityKind.SYSTEM, "ECG")
        u1 = model.add_entity(EntityKind.USE_CASE, "one")
        u2 = model.add_entity(EntityKind.USE_CASE, "two")
        with pytest.raises(SignatureViolation):
            model.add_relation(RelationKind.PRECEDENCE, u1, u2, "precedes")

    def test_dangling_endpoint(self):
        model = activity_model()
        a = model.add_entity(EntityKind.ACTION, "x")
        with pytest.raises(DanglingEndpoint):
            model.add_relation(RelationKind.PRECEDENCE, a, "a99", "precedes")

    def test_self_relation_rejected(self):
        model = activity_model()
        a = model.add_entity(EntityKind.ACTION, "x")
        with pytest.raises(SignatureViolation):
            model.add_relation(RelationKind.PRECEDENCE, a, a, "precedes")

    def test_second_relation_between_same_pair_rejected(self):
        model = activity_model()
        a = model.add_entity(EntityKind.ACTION, "x")
        b = model.add_entity(EntityKind.ACTION, "y")
        model.add_relation(RelationKind.PRECEDENCE, a, b, "precedes")
        with pytest.raises(DuplicateRelation):
            model.add_relation(RelationKind.PRECEDENCE, a, b, "precedes")

    @pytest.mark.parametrize("metamodel", list(Metamodel))
    def test_every_illegal_kind_pair_rejected(self, metamodel):
        """Exhaustive sweep over relation kind x endpoint kinds."""
        kinds = sorted(ENTITY_KINDS[metamodel], key=lambda k: k.value)
        for rel_kind, src_kind, tgt_kind in itertools.product(
            RelationKind, kinds, kinds
        ):
            model = Model(metamodel=metamodel)
            src = model.add_entity(src_kind, "one")
            tgt = model.add_entity(tgt_kind, "two")
            legal = (rel_kind, src_kind, tgt_kind) in RELATION_SIGNATURES[metamodel]
            if rel_kind is RelationKind.ASSOCIATION and (src_kind, tgt_kind) == (
                EntityKind.USE_CASE,
                EntityKind.ACTOR,
            ):
                legal = True  # canonicalized to (Actor, UseCase)
            if legal:
                model.add_relation(rel_kind, src, tgt, "s")
                assert model.check_conformance() == []
            else:
                with pytest.raises(SignatureViolation):
                    model.add_relation(rel_kind, src, tgt, "s")


class TestRemoveEntity:
    def test_unknown_entity(self):
        with pytest.raises(UnknownEntity):
            usecase_model().remove_entity("A1")

    def test_isolated_actor_cascades_nothing(self):
        model = usecase_model()
        a = model.add_entity(EntityKind.ACTOR, "ADAS")
        assert model.remove_entity(a) == []

    def test_cascade_removes_incident_relations(self):
        project = build_project()
        apply_changeset(project, engine_speed_changeset())
        beta = project.model_beta.copy()
        cascade = beta.remove_entity("a5")
        assert len(cascade) == 3
        assert beta.check_conformance() == []

    def test_no_dangling_after_cascade(self):
        model = usecase_model()
        s = model.add_entity(EntityKind.SYSTEM, "ECG")
        u = model.add_entity(EntityKind.USE_CASE, "Receive Torque Demand")
        a = model.add_entity(EntityKind.ACTOR, "ADAS")
        model.add_relation(RelationKind.ALLOCATION, u, s)
        model.add_relation(RelationKind.ASSOCIATION, a, u)
        model.remove_entity(u)
        codes = {v.code for v in model.check_conformance()}
        assert "dangling_endpoint" not in codes


class TestUpdateLabel:
    def test_rename_keeps_id(self):
        model = usecase_model()
        u = model.add_entity(EntityKind.USE_CASE, "Receive Torque Demand")
        model.update_label(u, "Accept Torque Demand")
        assert model.entities[u].label == "Accept Torque Demand"
        assert u == "U1"

    def test_unknown_id(self):
        with pytest.raises(UnknownEntity):
            usecase_model().update_label("U9", "x")

    def test_same_label_is_idempotent(self):
        model = usecase_model()
        s = model.add_entity(EntityKind.SYSTEM, "ECG")
        model.update_label(s, "ECG")
        assert model.entities[s].label == "ECG"

    def test_empty_label_rejected(self):
        model = usecase_model()
        s = model.add_entity(EntityKind.SYSTEM, "ECG")
        with pytest.raises(EmptyLabel):
            model.update_label(s, "")


class TestConformance:
    def test_golden_activity_model_clean(self, golden_project):
        assert golden_project.model_beta.check_conformance() == []

    def test_populated_stage_flags_undecided(self):
        model = activity_model()
        a = model.add_entity(EntityKind.ACTION, "x")
        b = model.add_entity(EntityKind.ACTION, "y")
        c = model.add_entity(EntityKind.ACTION, "z")
        model.add_relation(
            RelationKind.PRECEDENCE, a, b, "precedes", direction=Direction.UNDECIDED
        )
        model.add_relation(
            RelationKind.PRECEDENCE, b, c, "precedes", direction=Direction.UNDECIDED
        )
        assert model.check_conformance() == []  # skeleton stage: exempt
        model.stage = Stage.POPULATED
        codes = [v.code for v in model.check_conformance()]
        assert codes.count("undecided_precedence") == 2

    def test_populated_stage_flags_empty_labels(self):
        model = activity_model()
        model.add_entity(EntityKind.ACTION, "")
        model.stage = Stage.POPULATED
        assert [v.code for v in model.check_conformance()] == ["empty_label"]

    def test_second_system_flagged(self):
        model = usecase_model()
        model.add_entity(EntityKind.SYSTEM, "ECG")
        model.add_entity(EntityKind.SYSTEM, "other")
        assert "multiple_systems" in {v.code for v in model.check_conformance()}

    def test_violations_are_data_not_errors(self):
        model = usecase_model()
        model.stage = Stage.POPULATED
        model.add_entity(EntityKind.ACTOR, "")
        report = model.check_conformance()
        assert report and all(hasattr(v, "code") for v in report)


class TestCopyAndEquality:
    def test_copy_is_structural_equal_but_independent(self, golden_project):
        model = golden_project.model_alpha
        clone = model.copy()
        assert clone == model
        clone.update_label("U1", "Changed")
        assert clone != model

    def test_counters_excluded_from_equality(self):
        one, two = usecase_model(), usecase_model()
        a = one.add_entity(EntityKind.ACTOR, "x")
        one.remove_entity(a)
        one.add_entity(EntityKind.ACTOR, "y")  # A2
        two.add_entity(EntityKind.ACTOR, "y", tag="A2")
        assert one == two


def test_kind_from_tag_scheme():
    assert kind_from_tag("S") is EntityKind.SYSTEM
    assert kind_from_tag("A2") is EntityKind.ACTOR
    assert kind_from_tag("U3") is EntityKind.USE_CASE
    assert kind_from_tag("a5") is EntityKind.ACTION
    assert kind_from_tag("LS") is EntityKind.SWIMLANE
    assert kind_from_tag("LA1") is EntityKind.SWIMLANE

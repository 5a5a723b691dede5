"""Acceptance suite: golden-fixture reproduction plus property checks.

One test per criterion; each prints a PASS line when its assertions
hold (run with ``pytest tests/test_acceptance.py -v -s``). All checks
are exact unless stated otherwise.
"""

import json
import random
from pathlib import Path

import pytest

from msync.errors import ChangesetAborted
from msync.interpret import interpret_usecase, verify_composition
from msync.model import Direction, EntityKind, RelationKind
from msync.project import dumps_project, load_project, save_project
from msync.requirements import DependencyKind
from msync.rosetta import forward_witness, matrix_to_model, model_to_matrix
from msync.sync import (
    ChangeSet,
    DecisionKind,
    DecisionResolution,
    apply_changeset,
    pending_decisions,
    resolve_decision,
)
from msync.transform import compose_with_interpretation, semantic_transform

from conftest import (
    build_project,
    engine_speed_changeset,
    make_alpha_set,
    random_activity_model,
    random_usecase_model,
)
from test_cli import run_walkthrough
from test_rosetta import _candidate_set, _oracle


def _ok(number: int, title: str) -> None:
    print(f"acceptance criterion {number} ({title}): PASS")


def test_criterion_1_source_model_reproduction():
    model, _ = interpret_usecase(make_alpha_set())
    assert {(e.id, e.kind, e.label) for e in model.entities.values()} == {
        ("S", EntityKind.SYSTEM, "ECG"),
        ("A1", EntityKind.ACTOR, "ADAS"),
        ("A2", EntityKind.ACTOR, "Engine"),
        ("U1", EntityKind.USE_CASE, "Receive Torque Demand"),
        ("U2", EntityKind.USE_CASE, "Govern Engine Torque"),
    }
    assert {(r.kind, r.source, r.target) for r in model.relations.values()} == {
        (RelationKind.ASSOCIATION, "A1", "U1"),
        (RelationKind.ASSOCIATION, "A2", "U2"),
        (RelationKind.ALLOCATION, "U1", "S"),
        (RelationKind.ALLOCATION, "U2", "S"),
    }
    _ok(1, "use-case model from the two sentences")


def test_criterion_2_skeleton_and_composition():
    alpha, _ = interpret_usecase(make_alpha_set())
    skeleton, q = semantic_transform(alpha)
    composed = compose_with_interpretation(skeleton, alpha, q)
    lanes = {
        e.id: e.label
        for e in composed.entities.values()
        if e.kind is EntityKind.SWIMLANE
    }
    assert lanes == {"LS": "ECG", "LA1": "ADAS", "LA2": "Engine"}
    actions = [e for e in composed.entities.values() if e.kind is EntityKind.ACTION]
    assert [a.id for a in actions] == ["a1", "a2", "a3", "a4"]
    assert all(a.label == "" for a in actions)
    kinds = [r.kind for r in composed.relations.values()]
    assert kinds.count(RelationKind.ALLOCATION) == 4
    undecided = [
        r
        for r in composed.relations.values()
        if r.kind is RelationKind.PRECEDENCE and r.direction is Direction.UNDECIDED
    ]
    assert len(undecided) == 2
    assert q.links[:3] == [("S", "LS"), ("A1", "LA1"), ("A2", "LA2")]
    assert q.images_of("U1") == ["a1", "a2"]
    assert q.images_of("U2") == ["a3", "a4"]
    assert len(q.links) == 7
    _ok(2, "activity skeleton with named lanes and seeded trace")


def test_criterion_3_completion_and_matrices():
    project = build_project("complete")
    n, m = project.matrices()
    assert m.size() == 7
    allocations = [p for p, c in m.cells.items() if c.kind is RelationKind.ALLOCATION]
    precedences = [
        (p, c) for p, c in m.cells.items() if c.kind is RelationKind.PRECEDENCE
    ]
    assert len(allocations) == 4
    assert {p for p, _ in precedences} == {("a1", "a2"), ("a2", "a3"), ("a3", "a4")}
    assert all(c.direction is Direction.FORWARD for _, c in precedences)
    assert n.size() == 5 and len(n.filled()) == 4
    witness = forward_witness(n, project.q, m, ("U1", "S"))
    assert witness is not None
    assert witness.q_links == (("U1", "a2"), ("S", "LS"))
    assert witness.m_relation == ("a2", "LS")
    report = project.verify()
    assert report.synchronized and report.failures == []
    _ok(3, "completed activity model, matrices and synchronization")


def test_criterion_4_dependency_and_composition_check():
    project = build_project()
    dep = project.dependency()
    assert dep.kind is DependencyKind.SUBSET_ALPHA_IN_BETA
    report = verify_composition(
        dep, project.trace_alpha(), project.trace_beta(), project.q
    )
    assert report.passed
    broken = project.q.copy()
    broken.remove("U1", "a2")
    failing = verify_composition(
        dep, project.trace_alpha(), project.trace_beta(), broken
    )
    assert not failing.passed
    assert failing.failures == [("R1", "U1")]
    _ok(4, "elaboration dependency and its verification")


def test_criterion_5_change_scenario_end_to_end():
    project = build_project()
    apply_changeset(project, engine_speed_changeset())
    queue = pending_decisions(project)
    assert len(queue) == 1 and queue[0].kind is DecisionKind.MAP_OR_CREATE
    assert not project.verify().synchronized
    report = resolve_decision(
        project, DecisionResolution("d1", "create_new", "Determine Engine Speed")
    )
    alpha = project.model_alpha
    assert alpha.entities["U3"].label == "Determine Engine Speed"
    assert alpha.relation_between("U3", "S").kind is RelationKind.ALLOCATION
    flow = alpha.relation_between("A2", "U3")
    assert flow.kind is RelationKind.ASSOCIATION and flow.semantics == "functional flow"
    dropped = report.dropped()
    assert len(dropped) == 1
    assert dropped[0].reason == "metamodel_out_of_scope"
    assert (dropped[0].source, dropped[0].target) == ("U1", "U3")
    assert report.verification.synchronized
    n, _ = project.matrices()
    rebuilt = matrix_to_model(n)
    assert [u.id for u in rebuilt.entities_of_kind(EntityKind.USE_CASE)] == [
        "U1",
        "U2",
        "U3",
    ]
    assert rebuilt == alpha
    _ok(5, "engine-speed change, one decision, one drop, resynchronized")


def test_criterion_6_round_trip_identities(tmp_path):
    rng = random.Random(6)
    for _ in range(200):
        model = random_usecase_model(rng)
        assert matrix_to_model(model_to_matrix(model)) == model
    for _ in range(200):
        model = random_activity_model(rng)
        assert matrix_to_model(model_to_matrix(model)) == model
    project = build_project()
    path = tmp_path / "p.json"
    save_project(project, path)
    first = path.read_bytes()
    save_project(load_project(path), path)
    assert path.read_bytes() == first
    _ok(6, "model/matrix round trips and byte-stable persistence")


def test_criterion_7a_transform_cardinalities():
    rng = random.Random(71)
    for _ in range(100):
        source = random_usecase_model(rng)
        skeleton, q = semantic_transform(source)
        n_ucs = len(source.entities_of_kind(EntityKind.USE_CASE))
        n_actors = len(source.entities_of_kind(EntityKind.ACTOR))
        actions = [
            e for e in skeleton.entities.values() if e.kind is EntityKind.ACTION
        ]
        lanes = [
            e for e in skeleton.entities.values() if e.kind is EntityKind.SWIMLANE
        ]
        allocations = [
            r for r in skeleton.relations.values() if r.kind is RelationKind.ALLOCATION
        ]
        undecided = [
            r
            for r in skeleton.relations.values()
            if r.kind is RelationKind.PRECEDENCE
            and r.direction is Direction.UNDECIDED
        ]
        assert len(actions) == 2 * n_ucs
        assert len(lanes) == 1 + n_actors
        assert len(allocations) == 2 * n_ucs
        assert len(undecided) == n_ucs
    _ok(7, "a: transformation cardinalities on random sources")


def test_criterion_7b_backward_candidates_oracle():
    project = build_project()
    apply_changeset(project, engine_speed_changeset())
    resolve_decision(
        project, DecisionResolution("d1", "create_new", "Determine Engine Speed")
    )
    _, m = project.matrices()
    for cell in m.filled():
        assert _candidate_set(m, project.q, cell) == _oracle(m, project.q, cell)
    rng = random.Random(72)
    for _ in range(100):
        source = random_usecase_model(rng)
        skeleton, q = semantic_transform(source)
        matrix = model_to_matrix(skeleton)
        for cell in matrix.filled():
            assert _candidate_set(matrix, q, cell) == _oracle(matrix, q, cell)
    _ok(7, "b: backward candidates match the brute-force enumeration")


def test_criterion_7c_atomicity():
    project = build_project()
    before = dumps_project(project)
    bad = ChangeSet.from_doc(
        [
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
                "source": "a5",
                "target": "missing",
            },
        ]
    )
    with pytest.raises(ChangesetAborted):
        apply_changeset(project, bad)
    assert dumps_project(project) == before
    _ok(7, "c: failed changesets leave the project byte-identical")


def test_criterion_7d_reversibility():
    golden = build_project()
    project = build_project()
    apply_changeset(project, engine_speed_changeset())
    resolve_decision(
        project, DecisionResolution("d1", "create_new", "Determine Engine Speed")
    )
    apply_changeset(
        project,
        ChangeSet.from_doc([{"op": "delete_entity", "model": "beta", "target": "a5"}]),
    )
    (orphan,) = pending_decisions(project)
    assert orphan.kind is DecisionKind.CASCADE_ORPHAN and orphan.subjects == ["U3"]
    resolve_decision(project, DecisionResolution(orphan.id, "delete"))
    assert project.model_alpha == golden.model_alpha
    assert project.model_beta == golden.model_beta
    assert project.q.links == golden.q.links
    assert project.verify().synchronized
    _ok(7, "d: create then delete restores the synchronized state")


def test_criterion_7e_empty_queue_implies_synchronized():
    rng = random.Random(73)
    for _ in range(100):
        project = build_project()
        ops = [
            {
                "op": "create_entity",
                "model": "beta",
                "kind": "action",
                "label": f"{rng.choice(['compute', 'check', 'log'])} value",
            },
            {
                "op": "create_relation",
                "model": "beta",
                "kind": "allocation",
                "source": "a5",
                "target": "LS",
            },
        ]
        for other in rng.sample(["a1", "a2", "a3", "a4"], k=rng.randint(0, 2)):
            pair = ("a5", other) if rng.random() < 0.5 else (other, "a5")
            ops.append(
                {
                    "op": "create_relation",
                    "model": "beta",
                    "kind": "precedence",
                    "source": pair[0],
                    "target": pair[1],
                }
            )
        apply_changeset(project, ChangeSet.from_doc(ops))
        (request,) = pending_decisions(project)
        choice = rng.choice([c.key for c in request.candidates])
        report = resolve_decision(
            project, DecisionResolution(request.id, choice, label="Computed Value")
        )
        assert pending_decisions(project) == []
        assert report.verification.synchronized
    _ok(7, "e: an empty decision queue implies synchronization")


def test_criterion_8_cli_replay(tmp_path):
    one = run_walkthrough(tmp_path / "one", with_change=True)
    two = run_walkthrough(tmp_path / "two", with_change=True)
    assert one.read_bytes() == two.read_bytes()
    doc = json.loads(Path(one).read_text(encoding="utf-8"))
    labels = {e["id"]: e["label"] for e in doc["model_alpha"]["entities"]}
    assert labels["U3"] == "Determine Engine Speed"
    _ok(8, "scripted walkthrough replays byte-identically")

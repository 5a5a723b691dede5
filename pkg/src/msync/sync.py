"""Change application and cross-model propagation with a decision queue.

Changes (create/update/delete at model level) are applied atomically to
one model, then propagated to the other through the trace matrix:

* rule-determined consequences are committed automatically (lane for a
  new actor, counterpart relations whose reinterpretation is definite);
* genuine design choices - mapping a new element onto the other model,
  directing an undecided flow, orphaned counterparts after a delete -
  are enqueued as decision requests for the engineer, with ranked
  candidates; propagation of relations touching an undecided element is
  deferred until its request is resolved.

Every backward candidate examined ends up in the report exactly once:
committed, dropped with a reason, or pending a decision. Dropped
candidates are also written to the audit trail - the drop itself is
analysis output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .errors import (
    ChangesetAborted,
    InvalidResolution,
    KindMismatch,
    MsyncError,
    ParseError,
    StaleRequest,
    UnknownEntity,
    UnknownRequest,
)
from .model import (
    Direction,
    EntityKind,
    Initiator,
    Model,
    RelationKind,
    Relation,
)
from .requirements import smart_title
from .rosetta import (
    DropReason,
    SyncVerification,
    backward_candidates,
    canonical_pair,
    model_to_matrix,
    reinterpret_candidate,
    verify_synchronized,
)

if TYPE_CHECKING:  # pragma: no cover
    from .project import Project


class Side(str, Enum):
    ALPHA = "alpha"
    BETA = "beta"


class ChangeOpKind(str, Enum):
    CREATE_ENTITY = "create_entity"
    CREATE_RELATION = "create_relation"
    DELETE_ENTITY = "delete_entity"
    DELETE_RELATION = "delete_relation"
    UPDATE_LABEL = "update_label"


@dataclass
class ChangeOp:
    op: ChangeOpKind
    side: Side
    kind: str | None = None
    label: str | None = None
    source: str | None = None
    target: str | None = None
    semantics: str | None = None
    direction: str | None = None

    @classmethod
    def from_doc(cls, doc: dict) -> ChangeOp:
        if not isinstance(doc, dict):
            raise ParseError(f"changeset op must be an object, got {type(doc).__name__}")
        try:
            op = ChangeOpKind(doc["op"])
            side = Side(doc["model"])
        except KeyError as exc:
            raise ParseError(f"changeset op is missing {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
        return cls(
            op=op,
            side=side,
            kind=doc.get("kind"),
            label=doc.get("label"),
            source=doc.get("source"),
            target=doc.get("target"),
            semantics=doc.get("semantics"),
            direction=doc.get("direction"),
        )

    def describe(self) -> str:
        bits = [self.op.value, self.side.value]
        for name in ("kind", "source", "target", "label"):
            value = getattr(self, name)
            if value:
                bits.append(f"{name}={value}")
        return " ".join(bits)


@dataclass
class ChangeSet:
    ops: list[ChangeOp] = field(default_factory=list)
    origin: str = ""

    @classmethod
    def from_doc(cls, doc) -> ChangeSet:
        if isinstance(doc, dict):
            return cls(
                ops=[ChangeOp.from_doc(d) for d in doc.get("ops", [])],
                origin=doc.get("origin", ""),
            )
        if not isinstance(doc, list):
            raise ParseError("changeset must be a list of ops or {ops: [...]}")
        return cls(ops=[ChangeOp.from_doc(d) for d in doc])


class DecisionKind(str, Enum):
    MAP_OR_CREATE = "map_or_create"
    DIRECT_PRECEDENCE = "direct_precedence"
    MATCH_CLAUSE = "match_clause"
    CASCADE_ORPHAN = "cascade_orphan"


@dataclass
class Candidate:
    key: str
    description: str


@dataclass
class DecisionRequest:
    id: str
    kind: DecisionKind
    side: Side
    subjects: list[str]
    prompt: str
    candidates: list[Candidate]
    issued_version: int = 0
    deferred_cells: list[tuple[str, str]] = field(default_factory=list)
    context: dict[str, str] = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "side": self.side.value,
            "subjects": list(self.subjects),
            "prompt": self.prompt,
            "candidates": [
                {"key": c.key, "description": c.description} for c in self.candidates
            ],
            "issued_version": self.issued_version,
            "deferred_cells": [[a, b] for a, b in self.deferred_cells],
            "context": dict(sorted(self.context.items())),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> DecisionRequest:
        return cls(
            id=doc["id"],
            kind=DecisionKind(doc["kind"]),
            side=Side(doc["side"]),
            subjects=list(doc["subjects"]),
            prompt=doc["prompt"],
            candidates=[Candidate(c["key"], c["description"]) for c in doc["candidates"]],
            issued_version=doc.get("issued_version", 0),
            deferred_cells=[(a, b) for a, b in doc.get("deferred_cells", [])],
            context=dict(doc.get("context", {})),
        )


@dataclass
class DecisionResolution:
    request_id: str
    choose: str
    label: str | None = None


@dataclass
class CandidateOutcome:
    cell: tuple[str, str]
    source: str | None
    target: str | None
    disposition: str  # "committed" | "dropped" | "pending"
    reason: str | None = None
    kind: str | None = None
    semantics: str | None = None
    note: str = ""

    def to_doc(self) -> dict:
        doc: dict = {
            "cell": list(self.cell),
            "candidate": [self.source, self.target]
            if self.source is not None
            else None,
            "disposition": self.disposition,
        }
        if self.reason:
            doc["reason"] = self.reason
        if self.kind:
            doc["kind"] = self.kind
        if self.semantics:
            doc["semantics"] = self.semantics
        if self.note:
            doc["note"] = self.note
        return doc


@dataclass
class SyncReport:
    applied: list[str] = field(default_factory=list)
    propagated: list[str] = field(default_factory=list)
    outcomes: list[CandidateOutcome] = field(default_factory=list)
    pending: list[DecisionRequest] = field(default_factory=list)
    verification: SyncVerification | None = None

    def committed(self) -> list[CandidateOutcome]:
        return [o for o in self.outcomes if o.disposition == "committed"]

    def dropped(self) -> list[CandidateOutcome]:
        return [o for o in self.outcomes if o.disposition == "dropped"]

    def to_doc(self) -> dict:
        return {
            "applied": list(self.applied),
            "propagated": list(self.propagated),
            "outcomes": [o.to_doc() for o in self.outcomes],
            "pending": [r.to_doc() for r in self.pending],
            "verification": {
                "synchronized": self.verification.synchronized,
                "failures": [
                    {"category": f.category, "subject": f.subject, "detail": f.detail}
                    for f in self.verification.failures
                ],
            }
            if self.verification
            else None,
        }


# ---------------------------------------------------------------------------
# changeset application
# ---------------------------------------------------------------------------

def apply_changeset(project: "Project", changeset: ChangeSet) -> SyncReport:
    """Apply a changeset atomically and propagate its consequences.

    On any per-op failure the project is left untouched and
    :class:`ChangesetAborted` is raised.
    """
    work = project.copy()
    seq = project.version + 1
    report = SyncReport()
    created_entities: list[tuple[Side, str]] = []
    created_relations: list[tuple[Side, str]] = []
    deleted_entities: list[tuple[Side, str]] = []
    updated_labels: list[tuple[Side, str]] = []
    try:
        for op in changeset.ops:
            _apply_op(
                work,
                op,
                created_entities,
                created_relations,
                deleted_entities,
                updated_labels,
            )
            work.log(seq, "op_applied", op.describe())
            report.applied.append(op.describe())
    except MsyncError as exc:
        raise ChangesetAborted(f"changeset aborted: {exc}", cause=exc) from exc

    _withdraw_stale_requests(work, seq)
    _propagate_deletions(work, seq, deleted_entities, report)
    _propagate_creates(work, seq, created_entities, report)
    _propagate_relations(work, seq, created_relations, report)
    _propagate_labels(work, seq, updated_labels, report)

    _finish(work, seq, report)
    project.replace_with(work)
    return report


def _apply_op(work, op, created_entities, created_relations, deleted_entities, updated_labels):
    model = _model_for(work, op.side)
    if op.op is ChangeOpKind.CREATE_ENTITY:
        kind = _parse_enum(EntityKind, op.kind, "entity kind")
        eid = model.add_entity(kind, op.label or "")
        created_entities.append((op.side, eid))
    elif op.op is ChangeOpKind.CREATE_RELATION:
        kind = _parse_enum(RelationKind, op.kind, "relation kind")
        direction = (
            _parse_enum(Direction, op.direction, "direction") if op.direction else None
        )
        rel_id = model.add_relation(
            kind,
            op.source,
            op.target,
            op.semantics or _default_semantics(kind),
            direction=direction,
        )
        created_relations.append((op.side, rel_id))
    elif op.op is ChangeOpKind.DELETE_ENTITY:
        model.remove_entity(op.target)
        deleted_entities.append((op.side, op.target))
    elif op.op is ChangeOpKind.DELETE_RELATION:
        if op.source and op.target:
            rel = model.relation_between(op.source, op.target)
            if rel is None:
                raise UnknownEntity(
                    f"no relation between {op.source!r} and {op.target!r}"
                )
            model.remove_relation(rel.id)
        else:
            model.remove_relation(op.target)
    elif op.op is ChangeOpKind.UPDATE_LABEL:
        model.update_label(op.target, op.label or "")
        updated_labels.append((op.side, op.target))


def _parse_enum(enum_cls, value, what: str):
    try:
        return enum_cls(value)
    except ValueError as exc:
        raise KindMismatch(f"unknown {what} {value!r}") from exc


def _default_semantics(kind: RelationKind) -> str:
    return {
        RelationKind.ALLOCATION: "allocated to",
        RelationKind.PRECEDENCE: "precedes",
        RelationKind.ASSOCIATION: "associated with",
    }[kind]


def _model_for(work, side: Side) -> Model:
    model = work.model_alpha if side is Side.ALPHA else work.model_beta
    if model is None:
        raise UnknownEntity(f"the {side.value} model does not exist yet")
    return model


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------

def _propagate_deletions(work, seq, deleted_entities, report):
    for side, eid in deleted_entities:
        removed = work.q.discard_entity(eid)
        for link in removed:
            work.log(seq, "trace_link_removed", f"({link[0]}, {link[1]})")
        counterparts = []
        for a, b in removed:
            counterparts.append(b if side is Side.ALPHA else a)
        for other in dict.fromkeys(counterparts):
            if side is Side.BETA:
                alive = work.model_alpha is not None and other in work.model_alpha.entities
                images = [
                    x
                    for x in work.q.images_of(other)
                    if work.model_beta is not None and x in work.model_beta.entities
                ]
                if alive and not images:
                    _enqueue_orphan(work, seq, Side.ALPHA, other, eid, report)
            else:
                alive = work.model_beta is not None and other in work.model_beta.entities
                sources = [
                    y
                    for y in work.q.sources_of(other)
                    if work.model_alpha is not None and y in work.model_alpha.entities
                ]
                if alive and not sources:
                    _enqueue_orphan(work, seq, Side.BETA, other, eid, report)


def _enqueue_orphan(work, seq, side, entity_id, deleted_id, report):
    model = _model_for(work, side)
    label = model.entities[entity_id].label
    req = _enqueue(
        work,
        seq,
        DecisionKind.CASCADE_ORPHAN,
        side,
        [entity_id],
        f"{entity_id} ('{label}') lost its last trace link when {deleted_id} "
        "was deleted: delete it too, or keep it?",
        [
            Candidate("delete", f"Delete {entity_id} and its relations"),
            Candidate("keep", f"Keep {entity_id} without a counterpart"),
        ],
    )
    report.pending.append(req)


def _propagate_creates(work, seq, created_entities, report):
    for side, eid in created_entities:
        model = _model_for(work, side)
        entity = model.entities[eid]
        if side is Side.ALPHA and entity.kind in (EntityKind.SYSTEM, EntityKind.ACTOR):
            lane = _ensure_lane(work, seq, eid)
            report.propagated.append(f"swimlane {lane} spawned for {eid}")
        elif side is Side.ALPHA and entity.kind is EntityKind.USE_CASE:
            if not work.q.images_of(eid):
                _enqueue_map_or_create_alpha(work, seq, eid, report)
        elif side is Side.BETA and entity.kind is EntityKind.ACTION:
            if not work.q.sources_of(eid):
                _enqueue_map_or_create_beta(work, seq, eid, report)
        elif side is Side.BETA and entity.kind is EntityKind.SWIMLANE:
            if not work.q.sources_of(eid):
                _enqueue_map_lane(work, seq, eid, report)


def _lane_of_action(model: Model, action_id: str) -> str | None:
    for rel in model.relations.values():
        if rel.kind is RelationKind.ALLOCATION and rel.source == action_id:
            return rel.target
    return None


def _enqueue_map_or_create_beta(work, seq, action_id, report):
    beta = work.model_beta
    alpha = work.model_alpha
    neighbors = {
        rel.target if rel.source == action_id else rel.source
        for rel in beta.relations_of(action_id)
    }
    scored = []
    for idx, uc in enumerate(alpha.entities_of_kind(EntityKind.USE_CASE)):
        image = work.q.images_of(uc.id)
        lanes = {_lane_of_action(beta, x) for x in image} - {None}
        score = sum(1 for nb in neighbors if nb in image or nb in lanes)
        scored.append((-score, idx, uc))
    scored.sort(key=lambda t: (t[0], t[1]))
    label = beta.entities[action_id].label
    candidates = [
        Candidate(f"map:{uc.id}", f"Map {action_id} to use case {uc.id} ('{uc.label}')")
        for _, _, uc in scored
    ]
    candidates.append(
        Candidate("create_new", f"Create a new use case traced to {action_id}")
    )
    req = _enqueue(
        work,
        seq,
        DecisionKind.MAP_OR_CREATE,
        Side.BETA,
        [action_id],
        f"New action {action_id} ('{label}') has no counterpart in the source "
        "model: map it to an existing use case or create a new one?",
        candidates,
    )
    report.pending.append(req)


def _enqueue_map_lane(work, seq, lane_id, report):
    alpha = work.model_alpha
    beta = work.model_beta
    label = beta.entities[lane_id].label
    candidates = [
        Candidate(f"map:{e.id}", f"Map {lane_id} to {e.kind.value} {e.id} ('{e.label}')")
        for e in alpha.entities.values()
        if e.kind in (EntityKind.SYSTEM, EntityKind.ACTOR)
    ]
    candidates.append(Candidate("create_new", f"Create a new actor for {lane_id}"))
    req = _enqueue(
        work,
        seq,
        DecisionKind.MAP_OR_CREATE,
        Side.BETA,
        [lane_id],
        f"New swimlane {lane_id} ('{label}') has no counterpart: map it or "
        "create a new actor?",
        candidates,
    )
    report.pending.append(req)


def _enqueue_map_or_create_alpha(work, seq, uc_id, report):
    alpha = work.model_alpha
    beta = work.model_beta
    uc_neighbors = {
        rel.target if rel.source == uc_id else rel.source
        for rel in alpha.relations_of(uc_id)
    }
    scored = []
    for idx, action in enumerate(beta.entities_of_kind(EntityKind.ACTION) if beta else []):
        reachable: set[str] = set()
        for rel in beta.relations_of(action.id):
            other = rel.target if rel.source == action.id else rel.source
            reachable.update(work.q.sources_of(other))
        lane = _lane_of_action(beta, action.id)
        if lane:
            reachable.update(work.q.sources_of(lane))
        score = len(uc_neighbors & reachable)
        scored.append((-score, idx, action))
    scored.sort(key=lambda t: (t[0], t[1]))
    label = alpha.entities[uc_id].label
    candidates = [
        Candidate(f"map:{a.id}", f"Map {uc_id} to action {a.id} ('{a.label}')")
        for _, _, a in scored
    ]
    candidates.append(
        Candidate("create_new", f"Spawn the rule-produced action pair for {uc_id}")
    )
    req = _enqueue(
        work,
        seq,
        DecisionKind.MAP_OR_CREATE,
        Side.ALPHA,
        [uc_id],
        f"New use case {uc_id} ('{label}') has no counterpart in the target "
        "model: map it to an existing action or spawn new actions?",
        candidates,
    )
    report.pending.append(req)


def _pending_request_for(work, entity_id: str) -> DecisionRequest | None:
    for req in work.decision_queue:
        if entity_id in req.subjects:
            return req
    return None


def _propagate_relations(work, seq, created_relations, report):
    for side, rel_id in created_relations:
        model = _model_for(work, side)
        rel = model.relations.get(rel_id)
        if rel is None:
            continue
        if side is Side.BETA:
            _process_backward_cell(work, seq, (rel.source, rel.target), report)
        else:
            _process_forward_relation(work, seq, rel, report)


def _process_backward_cell(work, seq, cell, report):
    beta = work.model_beta
    for endpoint in cell:
        entity = beta.entities.get(endpoint)
        if entity is None:
            return
        if entity.kind in (EntityKind.ACTION, EntityKind.SWIMLANE) and not work.q.sources_of(
            endpoint
        ):
            req = _pending_request_for(work, endpoint)
            if req is not None:
                if cell not in req.deferred_cells:
                    req.deferred_cells.append(cell)
                report.outcomes.append(
                    CandidateOutcome(
                        cell=cell,
                        source=None,
                        target=None,
                        disposition="pending",
                        note=f"deferred until {req.id} is resolved",
                    )
                )
            else:
                report.outcomes.append(
                    CandidateOutcome(
                        cell=cell,
                        source=None,
                        target=None,
                        disposition="pending",
                        note=f"endpoint {endpoint} has no trace preimage",
                    )
                )
            return
    m = model_to_matrix(beta)
    if cell not in m.cells:
        return
    for candidate in backward_candidates(m, work.q, cell):
        outcome = reinterpret_candidate(candidate)
        if outcome.commit:
            pair = canonical_pair(
                outcome.kind,
                candidate.source,
                candidate.target,
                candidate.source_kind,
                candidate.target_kind,
            )
            existing = work.model_alpha.relation_between(*pair)
            if existing is not None:
                report.outcomes.append(
                    CandidateOutcome(
                        cell=cell,
                        source=candidate.source,
                        target=candidate.target,
                        disposition="committed",
                        kind=existing.kind.value,
                        semantics=existing.semantics,
                        note="already present",
                    )
                )
                continue
            work.model_alpha.add_relation(
                outcome.kind, pair[0], pair[1], outcome.semantics
            )
            work.log(
                seq,
                "counterpart_committed",
                f"({pair[0]}, {pair[1]}) {outcome.kind.value} '{outcome.semantics}' "
                f"from cell ({cell[0]}, {cell[1]})",
            )
            report.propagated.append(
                f"({pair[0]}, {pair[1]}) {outcome.kind.value} '{outcome.semantics}'"
            )
            report.outcomes.append(
                CandidateOutcome(
                    cell=cell,
                    source=candidate.source,
                    target=candidate.target,
                    disposition="committed",
                    kind=outcome.kind.value,
                    semantics=outcome.semantics,
                )
            )
        else:
            work.log(
                seq,
                "candidate_dropped",
                f"({candidate.source}, {candidate.target}) for cell "
                f"({cell[0]}, {cell[1]}): {outcome.reason.value}",
            )
            report.outcomes.append(
                CandidateOutcome(
                    cell=cell,
                    source=candidate.source,
                    target=candidate.target,
                    disposition="dropped",
                    reason=outcome.reason.value,
                )
            )
            if outcome.reason is DropReason.NO_RULE:
                req = _enqueue(
                    work,
                    seq,
                    DecisionKind.MATCH_CLAUSE,
                    Side.BETA,
                    [cell[0], cell[1]],
                    f"No reinterpretation rule covers ({candidate.source}, "
                    f"{candidate.target}) derived from cell ({cell[0]}, {cell[1]}): "
                    "keep the target relation unrepresented, or delete it?",
                    [
                        Candidate("keep", "Keep the target relation as-is"),
                        Candidate("delete_relation", "Delete the target relation"),
                    ],
                    context={"cell_source": cell[0], "cell_target": cell[1]},
                )
                report.pending.append(req)


def _ensure_lane(work, seq, alpha_id: str) -> str:
    beta = work.model_beta
    for x in work.q.images_of(alpha_id):
        entity = beta.entities.get(x)
        if entity is not None and entity.kind is EntityKind.SWIMLANE:
            return x
    tag = f"L{alpha_id}"
    if tag in beta.entities:
        tag = None
    lane = beta.add_entity(
        EntityKind.SWIMLANE, work.model_alpha.entities[alpha_id].label, tag=tag
    )
    work.q.add(alpha_id, lane)
    work.log(seq, "lane_spawned", f"{lane} for {alpha_id}")
    return lane


def _ensure_fragment(work, seq, uc_id: str, report) -> None:
    """Incrementally realize the action pair the rules prescribe."""
    alpha = work.model_alpha
    beta = work.model_beta
    systems = alpha.entities_of_kind(EntityKind.SYSTEM)
    if not systems:
        return
    sys_lane = _ensure_lane(work, seq, systems[0].id)
    u_actions = [
        x
        for x in work.q.images_of(uc_id)
        if x in beta.entities and beta.entities[x].kind is EntityKind.ACTION
    ]
    created = False

    def _find(lane: str) -> str | None:
        for x in u_actions:
            if _lane_of_action(beta, x) == lane:
                return x
        return None

    sys_action = _find(sys_lane)
    if sys_action is None:
        sys_action = beta.add_entity(EntityKind.ACTION, "")
        beta.add_relation(RelationKind.ALLOCATION, sys_action, sys_lane, "allocated to")
        work.q.add(uc_id, sys_action)
        u_actions.append(sys_action)
        created = True
    associations = [
        rel
        for rel in alpha.relations.values()
        if rel.kind is RelationKind.ASSOCIATION and rel.target == uc_id
    ]
    for assoc in associations:
        actor_lane = _ensure_lane(work, seq, assoc.source)
        actor_action = _find(actor_lane)
        if actor_action is None:
            actor_action = beta.add_entity(EntityKind.ACTION, "")
            beta.add_relation(
                RelationKind.ALLOCATION, actor_action, actor_lane, "allocated to"
            )
            work.q.add(uc_id, actor_action)
            u_actions.append(actor_action)
            created = True
        if (
            beta.relation_between(actor_action, sys_action) is None
            and beta.relation_between(sys_action, actor_action) is None
        ):
            orientation = assoc.initiator or Initiator.ACTOR
            pair = (
                (actor_action, sys_action)
                if orientation is Initiator.ACTOR
                else (sys_action, actor_action)
            )
            beta.add_relation(
                RelationKind.PRECEDENCE,
                pair[0],
                pair[1],
                "precedes",
                direction=Direction.UNDECIDED,
            )
            created = True
    if created:
        from .model import Stage

        beta.stage = Stage.SKELETON
        work.log(seq, "fragment_spawned", f"target actions realized for {uc_id}")
        report.propagated.append(f"action fragment spawned for {uc_id}")


def _process_forward_relation(work, seq, rel: Relation, report):
    for endpoint in (rel.source, rel.target):
        req = _pending_request_for(work, endpoint)
        if req is not None and req.side is Side.ALPHA:
            cell = (rel.source, rel.target)
            if cell not in req.deferred_cells:
                req.deferred_cells.append(cell)
            report.outcomes.append(
                CandidateOutcome(
                    cell=cell,
                    source=None,
                    target=None,
                    disposition="pending",
                    note=f"deferred until {req.id} is resolved",
                )
            )
            return
    if rel.kind is RelationKind.ASSOCIATION:
        _ensure_fragment(work, seq, rel.target, report)
    elif rel.kind is RelationKind.ALLOCATION:
        # allocation to the system: make sure a system-lane action exists
        _ensure_fragment(work, seq, rel.source, report)


def _propagate_labels(work, seq, updated_labels, report):
    for side, eid in updated_labels:
        model = _model_for(work, side)
        entity = model.entities.get(eid)
        if entity is None:
            continue
        if side is Side.ALPHA and entity.kind in (EntityKind.SYSTEM, EntityKind.ACTOR):
            for lane in work.q.images_of(eid):
                target = work.model_beta.entities.get(lane)
                if target is not None and target.kind is EntityKind.SWIMLANE:
                    target.label = entity.label
                    work.log(seq, "label_propagated", f"{eid} -> {lane} '{entity.label}'")
                    report.propagated.append(f"lane {lane} renamed to '{entity.label}'")
        elif side is Side.BETA and entity.kind is EntityKind.SWIMLANE:
            for src in work.q.sources_of(eid):
                counterpart = work.model_alpha.entities.get(src)
                if counterpart is not None:
                    counterpart.label = entity.label
                    work.log(seq, "label_propagated", f"{eid} -> {src} '{entity.label}'")
                    report.propagated.append(f"{src} renamed to '{entity.label}'")
        elif side is Side.ALPHA and entity.kind is EntityKind.USE_CASE:
            images = work.q.images_of(eid)
            if images:
                req = _enqueue(
                    work,
                    seq,
                    DecisionKind.MATCH_CLAUSE,
                    Side.ALPHA,
                    [eid],
                    f"Use case {eid} was renamed to '{entity.label}'; action labels "
                    f"come from the target-side knowledge and were kept "
                    f"({', '.join(images)}): review them",
                    [Candidate("keep", "Keep the current action labels")],
                )
                report.pending.append(req)


# ---------------------------------------------------------------------------
# decisions
# ---------------------------------------------------------------------------

def pending_decisions(project: "Project") -> list[DecisionRequest]:
    """Snapshot of the queue in issuance order."""
    return list(project.decision_queue)


def resolve_decision(
    project: "Project",
    resolution: DecisionResolution,
    expected_version: int | None = None,
) -> SyncReport:
    """Apply one human decision and propagate everything it unblocks."""
    request = None
    for req in project.decision_queue:
        if req.id == resolution.request_id:
            request = req
            break
    if request is None:
        raise UnknownRequest(f"no pending decision {resolution.request_id!r}")
    if resolution.choose not in {c.key for c in request.candidates}:
        raise InvalidResolution(
            f"candidate {resolution.choose!r} was not offered by {request.id}"
        )
    if expected_version is not None and expected_version != project.version:
        raise StaleRequest(
            f"project is at version {project.version}, resolution expected "
            f"{expected_version}"
        )
    _check_liveness(project, request, resolution)

    work = project.copy()
    seq = project.version + 1
    report = SyncReport()
    work.decision_queue = [r for r in work.decision_queue if r.id != request.id]
    handler = {
        DecisionKind.MAP_OR_CREATE: _resolve_map_or_create,
        DecisionKind.CASCADE_ORPHAN: _resolve_cascade_orphan,
        DecisionKind.DIRECT_PRECEDENCE: _resolve_direct_precedence,
        DecisionKind.MATCH_CLAUSE: _resolve_match_clause,
    }[request.kind]
    handler(work, seq, request, resolution, report)
    work.log(
        seq,
        "decision_resolved",
        f"{request.id} {request.kind.value}: chose {resolution.choose}"
        + (f" '{resolution.label}'" if resolution.label else ""),
    )
    _withdraw_stale_requests(work, seq)
    _maybe_promote_stage(work)
    _finish(work, seq, report)
    project.replace_with(work)
    return report


def _check_liveness(project, request, resolution):
    for subject in request.subjects:
        side_model = (
            project.model_alpha if request.side is Side.ALPHA else project.model_beta
        )
        if side_model is None or subject not in side_model.entities:
            raise StaleRequest(
                f"subject {subject} of {request.id} no longer exists"
            )
    if resolution.choose.startswith("map:"):
        target = resolution.choose.split(":", 1)[1]
        other = (
            project.model_beta if request.side is Side.ALPHA else project.model_alpha
        )
        if other is None or target not in other.entities:
            raise StaleRequest(f"map target {target} no longer exists")


def _resolve_map_or_create(work, seq, request, resolution, report):
    subject = request.subjects[0]
    if request.side is Side.BETA:
        beta_entity = work.model_beta.entities[subject]
        if resolution.choose == "create_new":
            if beta_entity.kind is EntityKind.SWIMLANE:
                label = resolution.label or beta_entity.label
                if not label:
                    raise InvalidResolution("a label for the new actor is required")
                new_id = work.model_alpha.add_entity(EntityKind.ACTOR, label)
            else:
                label = resolution.label or smart_title(beta_entity.label)
                if not label:
                    raise InvalidResolution("a label for the new use case is required")
                new_id = work.model_alpha.add_entity(EntityKind.USE_CASE, label)
            work.q.add(new_id, subject)
            work.log(seq, "counterpart_created", f"{new_id} '{label}' traced to {subject}")
            report.propagated.append(f"{new_id} '{label}' created and traced to {subject}")
        else:
            target = resolution.choose.split(":", 1)[1]
            work.q.add(target, subject)
            work.log(seq, "trace_link_added", f"({target}, {subject})")
            report.propagated.append(f"{subject} mapped to {target}")
        for cell in request.deferred_cells:
            _process_backward_cell(work, seq, cell, report)
    else:
        if resolution.choose == "create_new":
            _ensure_fragment(work, seq, subject, report)
        else:
            target = resolution.choose.split(":", 1)[1]
            work.q.add(subject, target)
            work.log(seq, "trace_link_added", f"({subject}, {target})")
            report.propagated.append(f"{subject} mapped to {target}")
        for cell in request.deferred_cells:
            rel = work.model_alpha.relation_between(*cell)
            if rel is not None:
                _process_forward_relation(work, seq, rel, report)


def _resolve_cascade_orphan(work, seq, request, resolution, report):
    subject = request.subjects[0]
    if resolution.choose == "keep":
        report.propagated.append(f"{subject} kept without a counterpart")
        return
    model = _model_for(work, request.side)
    cascade = model.remove_entity(subject)
    removed_links = work.q.discard_entity(subject)
    for link in removed_links:
        work.log(seq, "trace_link_removed", f"({link[0]}, {link[1]})")
    work.log(
        seq,
        "counterpart_deleted",
        f"{subject} deleted with {len(cascade)} cascaded relations",
    )
    report.propagated.append(
        f"{subject} deleted ({len(cascade)} relations cascaded)"
    )


def _resolve_direct_precedence(work, seq, request, resolution, report):
    rel_id = request.context.get("relation", request.subjects[0])
    rel = work.model_beta.relations.get(rel_id)
    if rel is None:
        raise StaleRequest(f"precedence {rel_id} no longer exists")
    if resolution.choose == "reverse":
        rel.source, rel.target = rel.target, rel.source
    rel.direction = Direction.FORWARD
    work.log(seq, "precedence_directed", f"{rel.id}: {rel.source} -> {rel.target}")
    report.propagated.append(f"precedence {rel.id} directed {rel.source} -> {rel.target}")


def _resolve_match_clause(work, seq, request, resolution, report):
    if resolution.choose == "keep":
        report.propagated.append("kept as-is")
        return
    if resolution.choose == "delete_relation":
        cell = (request.context["cell_source"], request.context["cell_target"])
        rel = work.model_beta.relation_between(*cell)
        if rel is not None:
            work.model_beta.remove_relation(rel.id)
            work.log(seq, "relation_deleted", f"({cell[0]}, {cell[1]})")
            report.propagated.append(f"target relation ({cell[0]}, {cell[1]}) deleted")
        return
    if resolution.choose.startswith("map:"):
        action_id = resolution.choose.split(":", 1)[1]
        label = request.context.get("label", "")
        if label:
            work.model_beta.update_label(action_id, label)
            work.log(seq, "action_labeled", f"{action_id} '{label}'")
            report.propagated.append(f"action {action_id} labeled '{label}'")
        return
    if resolution.choose == "create_new":
        lane = request.context.get("lane", "")
        label = resolution.label or request.context.get("label", "")
        uc = request.context.get("use_case", "")
        action = work.model_beta.add_entity(EntityKind.ACTION, label)
        if lane:
            work.model_beta.add_relation(
                RelationKind.ALLOCATION, action, lane, "allocated to"
            )
        if uc:
            work.q.add(uc, action)
        else:
            # no use-case context: the mapping is itself a design choice
            _enqueue_map_or_create_beta(work, seq, action, report)
        work.log(seq, "action_created", f"{action} '{label}' in {lane or 'no lane'}")
        report.propagated.append(f"action {action} created")


def _withdraw_stale_requests(work, seq):
    still_valid = []
    for req in work.decision_queue:
        model = work.model_alpha if req.side is Side.ALPHA else work.model_beta
        alive = model is not None and all(s in model.entities for s in req.subjects)
        if alive:
            still_valid.append(req)
        else:
            work.log(seq, "request_withdrawn", f"{req.id}: subject no longer exists")
    work.decision_queue = still_valid


def _maybe_promote_stage(work):
    from .model import Stage

    beta = work.model_beta
    if beta is None or work.decision_queue:
        return
    undecided = any(
        rel.direction is Direction.UNDECIDED for rel in beta.relations.values()
    )
    unlabeled = any(not e.label for e in beta.entities.values())
    if not undecided and not unlabeled:
        beta.stage = Stage.POPULATED


def _enqueue(work, seq, kind, side, subjects, prompt, candidates, context=None):
    number = work.next_decision_number()
    request = DecisionRequest(
        id=f"d{number}",
        kind=kind,
        side=side,
        subjects=list(subjects),
        prompt=prompt,
        candidates=list(candidates),
        issued_version=seq,
        context=dict(context or {}),
    )
    work.decision_queue.append(request)
    work.log(seq, "decision_enqueued", f"{request.id} {kind.value}: {prompt}")
    return request


def _finish(work, seq, report):
    report.pending = list(work.decision_queue)
    n, m = work.matrices()
    report.verification = verify_synchronized(n, m, work.q)

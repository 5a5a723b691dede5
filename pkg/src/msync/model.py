"""Typed-graph models and the two built-in metamodels.

A model is a set of entities plus labeled relations between them,
conforming to one of two metamodel fragments:

* use-case metamodel: System, Actor, UseCase entities; Association
  (Actor - UseCase, undirected) and Allocation (UseCase -> System).
* activity metamodel: Swimlane and Action entities; Allocation
  (Action -> Swimlane) and Precedence (Action -> Action, directed,
  possibly with a not-yet-decided direction at skeleton stage).

Entity identifiers are human-readable tags ("S", "A1", "U2", "a5",
"LA1") assigned in creation order and never reused after deletion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    DanglingEndpoint,
    DuplicateRelation,
    EmptyLabel,
    KindMismatch,
    SignatureViolation,
    UnknownEntity,
)


class Metamodel(str, Enum):
    USE_CASE = "use_case"
    ACTIVITY = "activity"


class Stage(str, Enum):
    SKELETON = "skeleton"
    POPULATED = "populated"


class EntityKind(str, Enum):
    SYSTEM = "system"
    ACTOR = "actor"
    USE_CASE = "use_case"
    SWIMLANE = "swimlane"
    ACTION = "action"


class RelationKind(str, Enum):
    ASSOCIATION = "association"
    ALLOCATION = "allocation"
    PRECEDENCE = "precedence"


class Direction(str, Enum):
    """Precedence flow state; undecided exists only in skeleton models."""

    FORWARD = "forward"
    UNDECIDED = "undecided"


class Initiator(str, Enum):
    """Which side of an association starts the interaction it models."""

    ACTOR = "actor"
    SYSTEM = "system"


ENTITY_KINDS: dict[Metamodel, frozenset[EntityKind]] = {
    Metamodel.USE_CASE: frozenset(
        {EntityKind.SYSTEM, EntityKind.ACTOR, EntityKind.USE_CASE}
    ),
    Metamodel.ACTIVITY: frozenset({EntityKind.SWIMLANE, EntityKind.ACTION}),
}

# The three legal relation signatures, per metamodel. Associations are
# undirected but canonically stored (Actor, UseCase).
RELATION_SIGNATURES: dict[Metamodel, frozenset[tuple[RelationKind, EntityKind, EntityKind]]] = {
    Metamodel.USE_CASE: frozenset(
        {
            (RelationKind.ASSOCIATION, EntityKind.ACTOR, EntityKind.USE_CASE),
            (RelationKind.ALLOCATION, EntityKind.USE_CASE, EntityKind.SYSTEM),
        }
    ),
    Metamodel.ACTIVITY: frozenset(
        {
            (RelationKind.ALLOCATION, EntityKind.ACTION, EntityKind.SWIMLANE),
            (RelationKind.PRECEDENCE, EntityKind.ACTION, EntityKind.ACTION),
        }
    ),
}

TAG_PREFIX = {
    EntityKind.SYSTEM: "S",
    EntityKind.ACTOR: "A",
    EntityKind.USE_CASE: "U",
    EntityKind.ACTION: "a",
    EntityKind.SWIMLANE: "L",
}


def kind_from_tag(tag: str) -> EntityKind:
    """Recover the entity kind encoded in an identifier tag.

    The tag scheme is normative for this artifact: "S"/"S2" system,
    "A<n>" actor, "U<n>" use case, "a<n>" action, "L..." swimlane.
    """
    head = tag[:1]
    for kind, prefix in TAG_PREFIX.items():
        if head == prefix:
            return kind
    raise UnknownEntity(f"tag {tag!r} does not follow the identifier scheme")


@dataclass
class Entity:
    id: str
    kind: EntityKind
    label: str = ""


@dataclass
class Relation:
    id: str
    kind: RelationKind
    source: str
    target: str
    semantics: str = ""
    direction: Direction | None = None
    initiator: Initiator | None = None


@dataclass(frozen=True)
class Violation:
    """One conformance finding; violations are data, not exceptions."""

    code: str
    subject: str
    message: str


def _tag_number(tag: str) -> int | None:
    digits = "".join(ch for ch in tag if ch.isdigit())
    if not digits:
        return 1 if tag == "S" else None
    return int(digits)


@dataclass(eq=False)
class Model:
    """A typed graph conforming to one of the two metamodels.

    Entities and relations are kept in creation order (insertion order
    of the dicts); counters record the highest identifier number handed
    out per kind so tags are never reused, even across deletions.

    Equality is structural: metamodel, stage, entities and relations.
    Counter state is bookkeeping and intentionally excluded.
    """

    metamodel: Metamodel
    stage: Stage = Stage.SKELETON
    entities: dict[str, Entity] = field(default_factory=dict)
    relations: dict[str, Relation] = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=dict)

    # -- identity ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.metamodel == other.metamodel
            and self.stage == other.stage
            and self.entities == other.entities
            and self.relations == other.relations
        )

    # -- mutation ----------------------------------------------------------

    def add_entity(self, kind: EntityKind, label: str = "", tag: str | None = None) -> str:
        if kind not in ENTITY_KINDS[self.metamodel]:
            raise KindMismatch(
                f"kind {kind.value!r} is not part of the {self.metamodel.value} metamodel"
            )
        if tag is None:
            tag = self._next_tag(kind)
        elif tag in self.entities:
            raise DuplicateRelation(f"entity tag {tag!r} already in use")
        else:
            self._absorb_tag(kind, tag)
        self.entities[tag] = Entity(id=tag, kind=kind, label=label)
        return tag

    def add_relation(
        self,
        kind: RelationKind,
        source: str,
        target: str,
        semantics: str = "",
        direction: Direction | None = None,
        initiator: Initiator | None = None,
        rel_id: str | None = None,
    ) -> str:
        src = self.entities.get(source)
        tgt = self.entities.get(target)
        if src is None or tgt is None:
            missing = source if src is None else target
            raise DanglingEndpoint(f"relation endpoint {missing!r} does not exist")
        if kind is RelationKind.ASSOCIATION and (src.kind, tgt.kind) == (
            EntityKind.USE_CASE,
            EntityKind.ACTOR,
        ):
            # undirected: store once in canonical (Actor, UseCase) order
            src, tgt = tgt, src
            source, target = target, source
        if source == target:
            raise SignatureViolation(f"self relation on {source!r} is not allowed")
        if (kind, src.kind, tgt.kind) not in RELATION_SIGNATURES[self.metamodel]:
            raise SignatureViolation(
                f"{kind.value}({src.kind.value}, {tgt.kind.value}) is not a legal "
                f"signature in the {self.metamodel.value} metamodel"
            )
        for rel in self.relations.values():
            if (rel.source, rel.target) == (source, target):
                raise DuplicateRelation(
                    f"a relation between {source!r} and {target!r} already exists"
                )
        if kind is RelationKind.PRECEDENCE:
            direction = direction or Direction.FORWARD
        elif direction is not None:
            raise SignatureViolation("direction is only meaningful on precedences")
        if initiator is not None and kind is not RelationKind.ASSOCIATION:
            raise SignatureViolation("initiator is only meaningful on associations")
        if rel_id is None:
            rel_id = self._next_rel_id()
        elif rel_id in self.relations:
            raise DuplicateRelation(f"relation id {rel_id!r} already in use")
        else:
            num = _tag_number(rel_id)
            if num is not None:
                self.counters["relation"] = max(self.counters.get("relation", 0), num)
        self.relations[rel_id] = Relation(
            id=rel_id,
            kind=kind,
            source=source,
            target=target,
            semantics=semantics,
            direction=direction,
            initiator=initiator,
        )
        return rel_id

    def remove_entity(self, entity_id: str) -> list[str]:
        """Remove an entity and every incident relation.

        Returns the removed relation ids, in creation order, so change
        propagation can account for the cascade.
        """
        if entity_id not in self.entities:
            raise UnknownEntity(f"no entity {entity_id!r}")
        cascade = [
            rel.id
            for rel in self.relations.values()
            if entity_id in (rel.source, rel.target)
        ]
        for rel_id in cascade:
            del self.relations[rel_id]
        del self.entities[entity_id]
        return cascade

    def remove_relation(self, rel_id: str) -> Relation:
        if rel_id not in self.relations:
            raise UnknownEntity(f"no relation {rel_id!r}")
        return self.relations.pop(rel_id)

    def update_label(self, entity_id: str, label: str) -> None:
        if entity_id not in self.entities:
            raise UnknownEntity(f"no entity {entity_id!r}")
        if not label:
            raise EmptyLabel(f"label of {entity_id!r} may not be cleared")
        self.entities[entity_id].label = label

    # -- queries -----------------------------------------------------------

    def entity_order(self) -> list[str]:
        return list(self.entities)

    def entities_of_kind(self, kind: EntityKind) -> list[Entity]:
        return [e for e in self.entities.values() if e.kind is kind]

    def relations_of(self, entity_id: str) -> list[Relation]:
        return [
            rel
            for rel in self.relations.values()
            if entity_id in (rel.source, rel.target)
        ]

    def relation_between(self, source: str, target: str) -> Relation | None:
        for rel in self.relations.values():
            if (rel.source, rel.target) == (source, target):
                return rel
        return None

    def check_conformance(self) -> list[Violation]:
        """Full conformance report; empty iff the model is well-formed.

        Skeleton-stage models are exempt from the empty-label and
        undecided-precedence rules; populated models are not.
        """
        violations: list[Violation] = []
        legal_kinds = ENTITY_KINDS[self.metamodel]
        for entity in self.entities.values():
            if entity.kind not in legal_kinds:
                violations.append(
                    Violation(
                        "kind_mismatch",
                        entity.id,
                        f"{entity.id}: kind {entity.kind.value} not in metamodel",
                    )
                )
            if self.stage is Stage.POPULATED and not entity.label:
                violations.append(
                    Violation("empty_label", entity.id, f"{entity.id}: label is empty")
                )
        if self.metamodel is Metamodel.USE_CASE:
            systems = self.entities_of_kind(EntityKind.SYSTEM)
            if len(systems) > 1:
                violations.append(
                    Violation(
                        "multiple_systems",
                        systems[1].id,
                        f"{len(systems)} system entities; exactly one subject is allowed",
                    )
                )
        seen_pairs: set[tuple[str, str]] = set()
        for rel in self.relations.values():
            src = self.entities.get(rel.source)
            tgt = self.entities.get(rel.target)
            if src is None or tgt is None:
                violations.append(
                    Violation(
                        "dangling_endpoint",
                        rel.id,
                        f"{rel.id}: endpoint missing",
                    )
                )
                continue
            if rel.source == rel.target:
                violations.append(
                    Violation("self_relation", rel.id, f"{rel.id}: source equals target")
                )
                continue
            if (rel.kind, src.kind, tgt.kind) not in RELATION_SIGNATURES[self.metamodel]:
                violations.append(
                    Violation(
                        "signature",
                        rel.id,
                        f"{rel.id}: {rel.kind.value}({src.kind.value}, {tgt.kind.value}) "
                        "violates the metamodel",
                    )
                )
            if (rel.source, rel.target) in seen_pairs:
                violations.append(
                    Violation(
                        "duplicate_cell",
                        rel.id,
                        f"{rel.id}: second relation between {rel.source} and {rel.target}",
                    )
                )
            seen_pairs.add((rel.source, rel.target))
            if rel.kind is RelationKind.PRECEDENCE:
                if rel.direction is None:
                    violations.append(
                        Violation(
                            "direction_missing",
                            rel.id,
                            f"{rel.id}: precedence without direction state",
                        )
                    )
                elif rel.direction is Direction.UNDECIDED and self.stage is Stage.POPULATED:
                    violations.append(
                        Violation(
                            "undecided_precedence",
                            rel.id,
                            f"{rel.id}: undecided direction in a populated model",
                        )
                    )
            elif rel.direction is not None:
                violations.append(
                    Violation(
                        "misplaced_direction",
                        rel.id,
                        f"{rel.id}: direction on a {rel.kind.value}",
                    )
                )
            if rel.initiator is not None and rel.kind is not RelationKind.ASSOCIATION:
                violations.append(
                    Violation(
                        "misplaced_initiator",
                        rel.id,
                        f"{rel.id}: initiator on a {rel.kind.value}",
                    )
                )
        return violations

    # -- copying / serialization -------------------------------------------

    def copy(self) -> Model:
        clone = Model(metamodel=self.metamodel, stage=self.stage)
        clone.entities = {
            eid: Entity(e.id, e.kind, e.label) for eid, e in self.entities.items()
        }
        clone.relations = {
            rid: Relation(
                r.id, r.kind, r.source, r.target, r.semantics, r.direction, r.initiator
            )
            for rid, r in self.relations.items()
        }
        clone.counters = dict(self.counters)
        return clone

    def to_doc(self) -> dict:
        entities = [
            {"id": e.id, "kind": e.kind.value, "label": e.label}
            for e in self.entities.values()
        ]
        relations = []
        for r in self.relations.values():
            doc: dict = {
                "id": r.id,
                "kind": r.kind.value,
                "source": r.source,
                "target": r.target,
                "semantics": r.semantics,
            }
            if r.direction is not None:
                doc["direction"] = r.direction.value
            if r.initiator is not None:
                doc["initiator"] = r.initiator.value
            relations.append(doc)
        return {
            "metamodel": self.metamodel.value,
            "stage": self.stage.value,
            "entities": entities,
            "relations": relations,
            "counters": dict(sorted(self.counters.items())),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> Model:
        model = cls(metamodel=Metamodel(doc["metamodel"]), stage=Stage(doc["stage"]))
        for e in doc["entities"]:
            model.entities[e["id"]] = Entity(e["id"], EntityKind(e["kind"]), e["label"])
        for r in doc["relations"]:
            model.relations[r["id"]] = Relation(
                id=r["id"],
                kind=RelationKind(r["kind"]),
                source=r["source"],
                target=r["target"],
                semantics=r.get("semantics", ""),
                direction=Direction(r["direction"]) if "direction" in r else None,
                initiator=Initiator(r["initiator"]) if "initiator" in r else None,
            )
        model.counters = dict(doc.get("counters", {}))
        return model

    # -- internals ----------------------------------------------------------

    def _next_tag(self, kind: EntityKind) -> str:
        n = self.counters.get(kind.value, 0) + 1
        self.counters[kind.value] = n
        if kind is EntityKind.SYSTEM and n == 1:
            return "S"
        return f"{TAG_PREFIX[kind]}{n}"

    def _absorb_tag(self, kind: EntityKind, tag: str) -> None:
        # explicit tags (e.g. "LS" from the transformation, "U3" from a
        # matrix) must keep the counter ahead so fresh tags never collide
        num = _tag_number(tag)
        if num is not None and tag[:1] == TAG_PREFIX[kind]:
            self.counters[kind.value] = max(self.counters.get(kind.value, 0), num)

    def _next_rel_id(self) -> str:
        n = self.counters.get("relation", 0) + 1
        self.counters["relation"] = n
        return f"r{n}"


def check_conformance(model: Model) -> list[Violation]:
    """Module-level alias for :meth:`Model.check_conformance`."""
    return model.check_conformance()

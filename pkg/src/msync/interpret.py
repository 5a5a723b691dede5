"""Interpretation of structured requirements into the two models.

Three concerns live here:

* seeding the use-case model from simple sentences: the subject is the
  system under design, each object derives an actor, each verb phrase a
  use case associated with its actor and allocated to the system;
* completing the activity skeleton from event-driven sentences: trigger
  and response clauses name (or match by label) actions in the lanes of
  their subjects, deciding the skeleton's open flow directions and
  adding cross-pair flows as requirements chain into each other; a
  trailing purpose clause names a follow-up action in the beneficiary's
  lane;
* verifying the elaboration relationship between the two requirement
  sets against the trace: every entity a source sentence produced must
  be trace-linked to something its elaborating sentence produced.

Where a clause cannot be matched mechanically, a decision request is
emitted instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NonSystemSubject, ParseError, UnknownLane, UnsupportedDependencyKind
from .model import (
    Direction,
    EntityKind,
    Initiator,
    Metamodel,
    Model,
    RelationKind,
    Stage,
)
from .requirements import (
    DependencyKind,
    DomainDependency,
    Form,
    Requirement,
    RequirementSet,
    base_verb,
    clause_overlap,
    drop_determiners,
    past_participle,
    smart_title,
    tokenize,
)
from .rosetta import TraceMatrix
from .sync import Candidate, DecisionKind, DecisionRequest, Side

CHAIN_OVERLAP_THRESHOLD = 0.6

_TRAILING_PREPOSITIONS = {"against", "with", "to", "from", "on", "for", "into", "onto"}


@dataclass
class TraceEntry:
    """Entities a requirement produced; ``response`` is the normative
    subset used for verification (trigger-side context is excluded)."""

    produced: set[str] = field(default_factory=set)
    response: set[str] = field(default_factory=set)


@dataclass
class InterpretationTrace:
    entries: dict[str, TraceEntry] = field(default_factory=dict)
    manually_added: set[str] = field(default_factory=set)

    def produced_by(self, req_id: str) -> set[str]:
        entry = self.entries.get(req_id)
        return set(entry.produced) if entry else set()

    def response_of(self, req_id: str) -> set[str]:
        entry = self.entries.get(req_id)
        return set(entry.response) if entry else set()


# ---------------------------------------------------------------------------
# source model interpretation
# ---------------------------------------------------------------------------

def interpret_usecase(w: RequirementSet) -> tuple[Model, InterpretationTrace]:
    """Build the use-case model from a set of simple sentences.

    One system (the set's declared system), one actor per distinct
    object (case-insensitive dedup), one use case per sentence (verb
    phrase, title-cased with determiners dropped), an association per
    sentence and an allocation of every use case to the system.
    """
    if not w.system:
        raise NonSystemSubject(f"requirement set {w.id!r} declares no system")
    model = Model(metamodel=Metamodel.USE_CASE, stage=Stage.POPULATED)
    trace = InterpretationTrace()
    system_id = model.add_entity(EntityKind.SYSTEM, w.system)
    actors: dict[str, str] = {}
    for req in w:
        if req.form is not Form.SVO:
            raise NonSystemSubject(
                f"{req.id}: only simple subject-verb-object sentences seed the "
                "use-case model"
            )
        if req.subject.casefold() != w.system.casefold():
            raise NonSystemSubject(
                f"{req.id}: subject {req.subject!r} is not the declared system "
                f"{w.system!r}"
            )
        actor_label = smart_title(req.object)
        actor_key = actor_label.casefold()
        if actor_key in actors:
            actor_id = actors[actor_key]
        else:
            actor_id = model.add_entity(EntityKind.ACTOR, actor_label)
            actors[actor_key] = actor_id
        uc_label = smart_title(" ".join(drop_determiners(tokenize(req.verb_phrase))))
        uc_id = model.add_entity(EntityKind.USE_CASE, uc_label)
        initiator = (
            Initiator.ACTOR if req.object_origin == "from" else Initiator.SYSTEM
        )
        model.add_relation(
            RelationKind.ASSOCIATION,
            actor_id,
            uc_id,
            "associated with",
            initiator=initiator,
        )
        model.add_relation(RelationKind.ALLOCATION, uc_id, system_id, "allocated to")
        produced = {system_id, actor_id, uc_id}
        trace.entries[req.id] = TraceEntry(produced=set(produced), response=set(produced))
    return model, trace


# ---------------------------------------------------------------------------
# target model completion
# ---------------------------------------------------------------------------

@dataclass
class CompletionResult:
    model: Model
    q: TraceMatrix
    trace: InterpretationTrace
    decisions: list[DecisionRequest]


def derive_trigger(trigger: str) -> tuple[str, str]:
    """Split a trigger clause into its subject and an action label.

    The verb loses its third-person inflection, determiners are dropped
    and a trailing from/to phrase is cut: "ECG receives torque demand
    from ADAS" names the action "receive torque demand" of lane ECG.
    """
    tokens = tokenize(trigger)
    if len(tokens) < 2:
        raise ParseError(
            f"trigger clause {trigger!r} needs at least a subject and a verb",
            0,
            "subject + verb",
        )
    subject = tokens[0]
    verb = base_verb(tokens[1])
    rest = tokens[2:]
    for i in range(len(rest) - 1, -1, -1):
        if rest[i].lower() in ("from", "to") and i + 1 < len(rest):
            rest = rest[:i]
            break
    return subject, " ".join([verb] + drop_determiners(rest))


def response_label(req: Requirement) -> str:
    return " ".join(drop_determiners(tokenize(req.verb_phrase)))


def purpose_label(req: Requirement) -> str | None:
    """Action label for a purpose clause, if the requirement has one.

    A purpose verb phrase ending in a bare preposition refers to the
    main action's result; the reference is completed as
    "<participle of main verb> value": "...determine an Engine torque
    for the engine to calibrate against" yields "calibrate against
    determined value".
    """
    if not req.purpose_action:
        return None
    tokens = drop_determiners(tokenize(req.purpose_action))
    if tokens and tokens[-1].lower() in _TRAILING_PREPOSITIONS:
        main_verb = base_verb(tokenize(req.verb_phrase)[0])
        tokens = tokens + [past_participle(main_verb), "value"]
    return " ".join(tokens)


class _Completion:
    def __init__(self, skeleton: Model, w_beta: RequirementSet, q: TraceMatrix):
        self.model = skeleton.copy()
        self.q = q.copy()
        self.w_beta = w_beta
        self.trace = InterpretationTrace()
        self.decisions: list[DecisionRequest] = []

    # lanes ---------------------------------------------------------------

    def lane_for(self, name: str) -> str:
        key = name.casefold()
        for entity in self.model.entities.values():
            if entity.kind is EntityKind.SWIMLANE and entity.label.casefold() == key:
                return entity.id
        raise UnknownLane(f"no swimlane matches {name!r}")

    def lane_for_optional(self, name: str) -> str | None:
        try:
            return self.lane_for(name)
        except UnknownLane:
            return None

    def lane_of(self, action_id: str) -> str | None:
        for rel in self.model.relations.values():
            if rel.kind is RelationKind.ALLOCATION and rel.source == action_id:
                return rel.target
        return None

    # actions ---------------------------------------------------------------

    def actions_in(self, lane_id: str):
        return [
            e
            for e in self.model.entities.values()
            if e.kind is EntityKind.ACTION and self.lane_of(e.id) == lane_id
        ]

    def undecided_partner(self, action_id: str) -> str | None:
        for rel in self.model.relations.values():
            if (
                rel.kind is RelationKind.PRECEDENCE
                and rel.direction is Direction.UNDECIDED
                and action_id in (rel.source, rel.target)
            ):
                return rel.target if rel.source == action_id else rel.source
        return None

    def resolve_action(
        self, lane_id: str, label: str, partner_of: str | None = None
    ) -> str | None:
        """Find the action a clause names, labeling skeleton actions.

        Match order: exact label, then content-word overlap above the
        chaining threshold, then the unlabeled partner of the clause's
        other action, then the first unlabeled action in the lane, then
        a freshly created action traced to the partner's use case.
        Returns None when nothing applies (caller emits a decision).
        """
        in_lane = self.actions_in(lane_id)
        for action in in_lane:
            if action.label and action.label.casefold() == label.casefold():
                return action.id
        best = None
        best_score = CHAIN_OVERLAP_THRESHOLD
        for action in in_lane:
            if not action.label:
                continue
            score = clause_overlap(action.label, label)
            if score >= best_score:
                best, best_score = action, score
        if best is not None:
            return best.id
        if partner_of is not None:
            partner = self.undecided_partner(partner_of)
            if partner is not None:
                entity = self.model.entities[partner]
                if not entity.label and self.lane_of(partner) == lane_id:
                    entity.label = label
                    return partner
        for action in in_lane:
            if not action.label:
                action.label = label
                return action.id
        if partner_of is not None:
            context_ucs = self.q.sources_of(partner_of)
            if context_ucs:
                action_id = self.model.add_entity(EntityKind.ACTION, label)
                self.model.add_relation(
                    RelationKind.ALLOCATION, action_id, lane_id, "allocated to"
                )
                self.q.add(context_ucs[0], action_id)
                return action_id
        return None

    def direct(self, from_id: str, to_id: str) -> None:
        rel = self.model.relation_between(from_id, to_id) or self.model.relation_between(
            to_id, from_id
        )
        if rel is None:
            self.model.add_relation(
                RelationKind.PRECEDENCE,
                from_id,
                to_id,
                "precedes",
                direction=Direction.FORWARD,
            )
            return
        if rel.direction is Direction.UNDECIDED:
            rel.source, rel.target = from_id, to_id
            rel.direction = Direction.FORWARD
            return
        if (rel.source, rel.target) != (from_id, to_id):
            self.decisions.append(
                DecisionRequest(
                    id="",
                    kind=DecisionKind.DIRECT_PRECEDENCE,
                    side=Side.BETA,
                    subjects=[rel.source, rel.target],
                    prompt=(
                        f"knowledge implies {from_id} -> {to_id} but the flow is "
                        f"already directed {rel.source} -> {rel.target}: keep or reverse?"
                    ),
                    candidates=[
                        Candidate("keep", f"Keep {rel.source} -> {rel.target}"),
                        Candidate("reverse", f"Reverse to {from_id} -> {to_id}"),
                    ],
                    context={"relation": rel.id},
                )
            )

    def unmatched_clause(self, lane_id: str, label: str, use_case: str = "") -> None:
        labeled = [a for a in self.actions_in(lane_id) if a.label]
        candidates = [
            Candidate(f"map:{a.id}", f"Relabel {a.id} ('{a.label}') as '{label}'")
            for a in labeled
        ]
        candidates.append(Candidate("create_new", f"Create a new action '{label}'"))
        self.decisions.append(
            DecisionRequest(
                id="",
                kind=DecisionKind.MATCH_CLAUSE,
                side=Side.BETA,
                subjects=[lane_id],
                prompt=f"clause '{label}' matches no action in lane {lane_id}",
                candidates=candidates,
                context={"lane": lane_id, "label": label, "use_case": use_case},
            )
        )


def interpret_activity_completion(
    skeleton: Model, w_beta: RequirementSet, q: TraceMatrix
) -> CompletionResult:
    """Fill the activity skeleton from event-driven requirements.

    The skeleton is only ever labeled, directed and extended - nothing
    is removed. The result is populated when no undecided flows or
    unlabeled actions remain and no decisions were emitted.
    """
    state = _Completion(skeleton, w_beta, q)
    for req in w_beta:
        entry = TraceEntry()
        trigger_action: str | None = None
        if req.form is Form.EARS:
            t_subject, t_label = derive_trigger(req.trigger)
            t_lane = state.lane_for(t_subject)
            trigger_action = state.resolve_action(t_lane, t_label)
            if trigger_action is None:
                state.unmatched_clause(t_lane, t_label)
            else:
                entry.produced |= {t_lane, trigger_action}
            response = req.response
        else:
            response = req
        r_lane = state.lane_for(response.subject)
        r_label = response_label(response)
        r_action = state.resolve_action(r_lane, r_label, partner_of=trigger_action)
        if r_action is None:
            state.unmatched_clause(r_lane, r_label)
        else:
            entry.produced |= {r_lane, r_action}
            entry.response |= {r_lane, r_action}
            if trigger_action is not None and trigger_action != r_action:
                state.direct(trigger_action, r_action)
        object_lane = state.lane_for_optional(smart_title(response.object))
        if object_lane is not None:
            entry.produced.add(object_lane)
            entry.response.add(object_lane)
        p_label = purpose_label(response)
        if p_label is not None and response.purpose_actor:
            p_lane = state.lane_for(smart_title(response.purpose_actor))
            p_action = state.resolve_action(p_lane, p_label, partner_of=r_action)
            if p_action is None:
                state.unmatched_clause(p_lane, p_label)
            else:
                entry.produced |= {p_lane, p_action}
                entry.response |= {p_lane, p_action}
                if r_action is not None and r_action != p_action:
                    state.direct(r_action, p_action)
        state.trace.entries[req.id] = entry

    for rel in state.model.relations.values():
        if rel.kind is RelationKind.PRECEDENCE and rel.direction is Direction.UNDECIDED:
            state.decisions.append(
                DecisionRequest(
                    id="",
                    kind=DecisionKind.DIRECT_PRECEDENCE,
                    side=Side.BETA,
                    subjects=[rel.source, rel.target],
                    prompt=(
                        f"flow direction between {rel.source} and {rel.target} "
                        "is undecided"
                    ),
                    candidates=[
                        Candidate("forward", f"{rel.source} -> {rel.target}"),
                        Candidate("reverse", f"{rel.target} -> {rel.source}"),
                    ],
                    context={"relation": rel.id},
                )
            )

    undecided = any(
        rel.direction is Direction.UNDECIDED
        for rel in state.model.relations.values()
    )
    unlabeled = any(not e.label for e in state.model.entities.values())
    if not undecided and not unlabeled and not state.decisions:
        state.model.stage = Stage.POPULATED
    return CompletionResult(
        model=state.model, q=state.q, trace=state.trace, decisions=state.decisions
    )


def reconstruct_beta_trace(model: Model, w_beta: RequirementSet) -> InterpretationTrace:
    """Recover the completion trace from a finished activity model.

    Labels are a deterministic function of the requirement text, so the
    entities a requirement produced can be found again by label: used
    after loading a project, which persists models but not traces.
    """
    helper = _Completion(model, w_beta, TraceMatrix())
    helper.model = model  # read-only use
    trace = InterpretationTrace()

    def _find(lane_id: str, label: str) -> str | None:
        for action in helper.actions_in(lane_id):
            if action.label.casefold() == label.casefold():
                return action.id
        return None

    for req in w_beta:
        entry = TraceEntry()
        if req.form is Form.EARS:
            try:
                t_subject, t_label = derive_trigger(req.trigger)
                t_lane = helper.lane_for(t_subject)
            except (ParseError, UnknownLane):
                t_lane = None
            if t_lane is not None:
                entry.produced.add(t_lane)
                found = _find(t_lane, t_label)
                if found:
                    entry.produced.add(found)
            response = req.response
        else:
            response = req
        r_lane = helper.lane_for_optional(response.subject)
        if r_lane is not None:
            entry.produced.add(r_lane)
            entry.response.add(r_lane)
            found = _find(r_lane, response_label(response))
            if found:
                entry.produced.add(found)
                entry.response.add(found)
        object_lane = helper.lane_for_optional(smart_title(response.object))
        if object_lane is not None:
            entry.produced.add(object_lane)
            entry.response.add(object_lane)
        p_label = purpose_label(response)
        if p_label is not None and response.purpose_actor:
            p_lane = helper.lane_for_optional(smart_title(response.purpose_actor))
            if p_lane is not None:
                entry.produced.add(p_lane)
                entry.response.add(p_lane)
                found = _find(p_lane, p_label)
                if found:
                    entry.produced.add(found)
                    entry.response.add(found)
        trace.entries[req.id] = entry
    return trace


# ---------------------------------------------------------------------------
# composition verification
# ---------------------------------------------------------------------------

@dataclass
class CompositionReport:
    passed: bool
    failures: list[tuple[str, str]] = field(default_factory=list)  # (req, entity)


def verify_composition(
    w_dep: DomainDependency,
    trace_alpha: InterpretationTrace,
    trace_beta: InterpretationTrace,
    q: TraceMatrix,
) -> CompositionReport:
    """Check the elaboration relationship against the trace matrix.

    For every elaboration link, every entity the source sentence
    produced must be trace-linked to at least one entity the
    elaborating sentence's normative (response) part produced.
    """
    if w_dep.kind is not DependencyKind.SUBSET_ALPHA_IN_BETA:
        raise UnsupportedDependencyKind(
            f"verification supports only the source-subset dependency, got "
            f"{w_dep.kind.value}"
        )
    failures: list[tuple[str, str]] = []
    for link in w_dep.links:
        alpha_entities = sorted(trace_alpha.produced_by(link.source))
        witness_set = trace_beta.response_of(link.target)
        for entity in alpha_entities:
            images = q.images_of(entity)
            if not any(img in witness_set for img in images):
                failures.append((link.source, entity))
    return CompositionReport(passed=not failures, failures=failures)

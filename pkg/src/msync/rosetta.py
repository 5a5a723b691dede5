"""Matrix view of the two models and their cross-model trace.

The source model is held in the N-matrix, the target model in the
M-matrix (square adjacency matrices, row-to-column convention, one cell
per relation carrying the relation's semantics). The Q-matrix holds the
entity-to-entity trace links between them: System/Actor -> Swimlane and
UseCase -> set of Actions (one-to-many).

A relation of the source model is *preserved* in the target when its
endpoints' trace images are themselves related: (y_i, y_j) filled in N
with (y_i, x_k), (y_j, x_l) in Q demands (x_k, x_l) filled in M with
compatible semantics. ``forward_witness`` finds such a realization
(existentially - one witnessing choice of trace links suffices), and
``backward_candidates`` runs the rule in reverse to propose source
relations for a target relation. ``verify_synchronized`` combines both
directions into the synchronization check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import IllegalCell, MsyncError
from .model import (
    Direction,
    EntityKind,
    Initiator,
    Metamodel,
    Model,
    RelationKind,
    Stage,
    kind_from_tag,
)


@dataclass(frozen=True)
class AxisEntry:
    """One row/column header: the entity's tag, kind and label."""

    id: str
    kind: EntityKind
    label: str


@dataclass(frozen=True)
class CellLabel:
    """Matrix cell content: the relation's kind and semantics statement.

    Direction, initiator and the relation id ride along so that a
    matrix is lossless with respect to the model it was taken from.
    """

    kind: RelationKind
    semantics: str
    direction: Direction | None = None
    initiator: Initiator | None = None
    relation_id: str | None = None


@dataclass
class AdjacencyMatrix:
    metamodel: Metamodel
    stage: Stage
    axis: list[AxisEntry] = field(default_factory=list)
    cells: dict[tuple[str, str], CellLabel] = field(default_factory=dict)

    def ids(self) -> list[str]:
        return [e.id for e in self.axis]

    def entry(self, entity_id: str) -> AxisEntry | None:
        for e in self.axis:
            if e.id == entity_id:
                return e
        return None

    def kind_of(self, entity_id: str) -> EntityKind | None:
        e = self.entry(entity_id)
        return e.kind if e else None

    def filled(self) -> list[tuple[str, str]]:
        return list(self.cells)

    def lane_of(self, action_id: str) -> str | None:
        """The swimlane an action is allocated to, if any."""
        for (src, tgt), cell in self.cells.items():
            if src == action_id and cell.kind is RelationKind.ALLOCATION:
                return tgt
        return None

    def size(self) -> int:
        return len(self.axis)


def model_to_matrix(model: Model) -> AdjacencyMatrix:
    """Represent a model as a square adjacency matrix (lossless)."""
    matrix = AdjacencyMatrix(metamodel=model.metamodel, stage=model.stage)
    matrix.axis = [AxisEntry(e.id, e.kind, e.label) for e in model.entities.values()]
    for rel in model.relations.values():
        matrix.cells[(rel.source, rel.target)] = CellLabel(
            kind=rel.kind,
            semantics=rel.semantics,
            direction=rel.direction,
            initiator=rel.initiator,
            relation_id=rel.id,
        )
    return matrix


def matrix_to_model(matrix: AdjacencyMatrix) -> Model:
    """Rebuild the model a matrix represents.

    Inverse of :func:`model_to_matrix`; raises :class:`IllegalCell` when
    a cell's relation kind violates the matrix's metamodel.
    """
    model = Model(metamodel=matrix.metamodel, stage=matrix.stage)
    for entry in matrix.axis:
        model.add_entity(entry.kind, entry.label, tag=entry.id)
    for (src, tgt), cell in matrix.cells.items():
        try:
            model.add_relation(
                cell.kind,
                src,
                tgt,
                cell.semantics,
                direction=cell.direction,
                initiator=cell.initiator,
                rel_id=cell.relation_id,
            )
        except MsyncError as exc:
            raise IllegalCell(f"cell ({src}, {tgt}): {exc}") from exc
    return model


# ---------------------------------------------------------------------------
# trace matrix
# ---------------------------------------------------------------------------

@dataclass
class TraceMatrix:
    """Entity-to-entity links from source-model to target-model elements."""

    links: list[tuple[str, str]] = field(default_factory=list)

    def add(self, source_id: str, target_id: str) -> None:
        pair = (source_id, target_id)
        if pair not in self.links:
            self.links.append(pair)

    def remove(self, source_id: str, target_id: str) -> None:
        self.links.remove((source_id, target_id))

    def discard_entity(self, entity_id: str) -> list[tuple[str, str]]:
        """Drop every link touching the entity; returns what was removed."""
        removed = [l for l in self.links if entity_id in l]
        self.links = [l for l in self.links if entity_id not in l]
        return removed

    def images_of(self, source_id: str) -> list[str]:
        return [b for (a, b) in self.links if a == source_id]

    def sources_of(self, target_id: str) -> list[str]:
        return [a for (a, b) in self.links if b == target_id]

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self.links

    def __len__(self) -> int:
        return len(self.links)

    def copy(self) -> TraceMatrix:
        return TraceMatrix(links=list(self.links))

    def to_doc(self) -> list[list[str]]:
        return [[a, b] for (a, b) in self.links]

    @classmethod
    def from_doc(cls, doc: list) -> TraceMatrix:
        return cls(links=[(a, b) for a, b in doc])


# ---------------------------------------------------------------------------
# relational transformation, forward
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    """A realization of one source relation in the target matrix.

    ``q_links`` are the two trace links used; for associations the
    actor's leg goes through its swimlane rather than an action.
    """

    n_relation: tuple[str, str]
    q_links: tuple[tuple[str, str], tuple[str, str]]
    m_relation: tuple[str, str]


def _iter_witnesses(
    n: AdjacencyMatrix,
    q: TraceMatrix,
    m: AdjacencyMatrix,
    n_rel: tuple[str, str],
):
    cell = n.cells.get(n_rel)
    if cell is None:
        return
    yi, yj = n_rel
    if cell.kind is RelationKind.ALLOCATION:
        # UseCase -> System maps to Action -> system swimlane
        for x in q.images_of(yi):
            for lane in q.images_of(yj):
                target = m.cells.get((x, lane))
                if target is not None and target.kind is RelationKind.ALLOCATION:
                    yield Witness(n_rel, ((yi, x), (yj, lane)), (x, lane))
    elif cell.kind is RelationKind.ASSOCIATION:
        # Actor - UseCase maps to a precedence (either direction) between
        # an action of the use case and an action in the actor's lane.
        lanes = set(q.images_of(yi))
        actions = set(q.images_of(yj))
        for (p, r), target in m.cells.items():
            if target.kind is not RelationKind.PRECEDENCE:
                continue
            for a, b in ((p, r), (r, p)):
                if a in actions:
                    lane_b = m.lane_of(b)
                    if lane_b in lanes:
                        yield Witness(n_rel, ((yi, lane_b), (yj, a)), (p, r))
                        break


def forward_witness(
    n: AdjacencyMatrix,
    q: TraceMatrix,
    m: AdjacencyMatrix,
    n_rel: tuple[str, str],
) -> Witness | None:
    """First witness realizing a filled N cell in M, or None."""
    return next(_iter_witnesses(n, q, m, n_rel), None)


# ---------------------------------------------------------------------------
# relational transformation, backward
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateRelation:
    """A source-model relation proposed for a target-model cell.

    ``via_lane`` marks candidates whose downstream endpoint was escalated
    from an action to its swimlane's preimage: a cross-lane flow reaches
    into another entity's scope, so the counterpart relation involves
    that entity (Actor or System), not the action's own use case.
    """

    source: str
    target: str
    source_kind: EntityKind
    target_kind: EntityKind
    via_lane: bool
    cell: tuple[str, str]
    cell_kind: RelationKind
    semantics: str


def backward_candidates(
    m: AdjacencyMatrix,
    q: TraceMatrix,
    m_rel: tuple[str, str],
) -> list[CandidateRelation]:
    """Enumerate source-relation candidates for a filled M cell.

    Allocations map straight through the trace preimages of both
    endpoints. Precedences between actions in the same lane keep both
    direct preimages; a precedence crossing lanes escalates the
    downstream action to its lane's preimage. Candidates are not yet
    filtered for legality - that is the change-synchronization step.
    """
    cell = m.cells.get(m_rel)
    if cell is None:
        return []
    xk, xl = m_rel
    out: list[CandidateRelation] = []

    def _mk(yi: str, yj: str, via: bool) -> CandidateRelation:
        return CandidateRelation(
            source=yi,
            target=yj,
            source_kind=kind_from_tag(yi),
            target_kind=kind_from_tag(yj),
            via_lane=via,
            cell=m_rel,
            cell_kind=cell.kind,
            semantics=cell.semantics,
        )

    if cell.kind is RelationKind.ALLOCATION:
        for yi in q.sources_of(xk):
            for yj in q.sources_of(xl):
                out.append(_mk(yi, yj, False))
        return out
    if cell.kind is not RelationKind.PRECEDENCE:
        return out

    lane_k = m.lane_of(xk)
    lane_l = m.lane_of(xl)
    if lane_k is not None and lane_l is not None and lane_k != lane_l:
        targets = [(yj, True) for yj in q.sources_of(lane_l)]
        if not targets:
            targets = [(yj, False) for yj in q.sources_of(xl)]
    else:
        targets = [(yj, False) for yj in q.sources_of(xl)]
    for yi in q.sources_of(xk):
        for yj, via in targets:
            out.append(_mk(yi, yj, via))
    return out


# ---------------------------------------------------------------------------
# reinterpretation of backward candidates
# ---------------------------------------------------------------------------

class DropReason(str, Enum):
    METAMODEL_OUT_OF_SCOPE = "metamodel_out_of_scope"
    INTRA_SYSTEM_FLOW = "intra_system_flow"
    SELF_RELATION = "self_relation"
    NO_RULE = "no_rule"


@dataclass(frozen=True)
class Reinterpretation:
    """Disposition of one backward candidate: commit it or drop it."""

    commit: bool
    kind: RelationKind | None = None
    semantics: str | None = None
    reason: DropReason | None = None


def reinterpret_candidate(candidate: CandidateRelation) -> Reinterpretation:
    """Table-driven semantics mapping for backward candidates.

    * precedence between two use cases: not representable in the
      use-case metamodel, dropped;
    * cross-lane precedence escalated to an actor: an association
      carrying functional-flow semantics;
    * cross-lane precedence escalated to the system: flow into the
      subject itself, nothing to add;
    * allocation of an action to the system lane: an allocation of the
      use case to the system;
    * anything else has no rule and is surfaced for a human decision.
    """
    if candidate.source == candidate.target:
        return Reinterpretation(False, reason=DropReason.SELF_RELATION)
    sk, tk = candidate.source_kind, candidate.target_kind
    if candidate.cell_kind is RelationKind.ALLOCATION:
        if (sk, tk) == (EntityKind.USE_CASE, EntityKind.SYSTEM):
            return Reinterpretation(True, RelationKind.ALLOCATION, "allocated to")
        return Reinterpretation(False, reason=DropReason.NO_RULE)
    if candidate.cell_kind is RelationKind.PRECEDENCE:
        if not candidate.via_lane:
            if sk is EntityKind.USE_CASE and tk is EntityKind.USE_CASE:
                return Reinterpretation(
                    False, reason=DropReason.METAMODEL_OUT_OF_SCOPE
                )
            return Reinterpretation(False, reason=DropReason.NO_RULE)
        if sk is EntityKind.USE_CASE and tk is EntityKind.ACTOR:
            return Reinterpretation(True, RelationKind.ASSOCIATION, "functional flow")
        if sk is EntityKind.USE_CASE and tk is EntityKind.SYSTEM:
            return Reinterpretation(False, reason=DropReason.INTRA_SYSTEM_FLOW)
        return Reinterpretation(False, reason=DropReason.NO_RULE)
    return Reinterpretation(False, reason=DropReason.NO_RULE)


def canonical_pair(
    kind: RelationKind, source: str, target: str, source_kind: EntityKind, target_kind: EntityKind
) -> tuple[str, str]:
    """Storage orientation for a committed candidate's counterpart."""
    if kind is RelationKind.ASSOCIATION and (source_kind, target_kind) == (
        EntityKind.USE_CASE,
        EntityKind.ACTOR,
    ):
        return (target, source)
    return (source, target)


# ---------------------------------------------------------------------------
# synchronization verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyncFailure:
    category: str
    subject: str
    detail: str


@dataclass
class SyncVerification:
    synchronized: bool
    failures: list[SyncFailure] = field(default_factory=list)


def verify_synchronized(
    n: AdjacencyMatrix, m: AdjacencyMatrix, q: TraceMatrix
) -> SyncVerification:
    """Check that the two matrices agree through the trace.

    Three conditions: (a) every filled N cell has a forward witness in
    M; (b) every trace link references live entities on both sides;
    (c) every M allocation or precedence is accounted for - it realizes
    some witness, stays inside one use case's trace image, or every
    backward candidate for it either reinterprets to an already-present
    N relation or is dropped by a definite rule. An endpoint with no
    trace preimage leaves its relations unaccounted (its mapping is an
    open decision).
    """
    failures: list[SyncFailure] = []

    for n_rel in sorted(n.filled()):
        if forward_witness(n, q, m, n_rel) is None:
            failures.append(
                SyncFailure(
                    "unwitnessed_source_relation",
                    f"({n_rel[0]}, {n_rel[1]})",
                    "no target relation realizes this cell through the trace",
                )
            )

    n_ids = set(n.ids())
    m_ids = set(m.ids())
    for a, b in q.links:
        if a not in n_ids or b not in m_ids:
            failures.append(
                SyncFailure(
                    "dead_trace_link",
                    f"({a}, {b})",
                    "trace link references a missing entity",
                )
            )

    witness_cells: set[tuple[str, str]] = set()
    for n_rel in n.filled():
        for w in _iter_witnesses(n, q, m, n_rel):
            witness_cells.add(w.m_relation)

    for m_rel in sorted(m.filled()):
        cell = m.cells[m_rel]
        if cell.kind not in (RelationKind.ALLOCATION, RelationKind.PRECEDENCE):
            continue
        xk, xl = m_rel
        unmapped = [
            x
            for x in (xk, xl)
            if m.kind_of(x) in (EntityKind.ACTION, EntityKind.SWIMLANE)
            and not q.sources_of(x)
        ]
        if unmapped:
            failures.append(
                SyncFailure(
                    "unwitnessed_target_relation",
                    f"({xk}, {xl})",
                    f"endpoint {unmapped[0]} has no trace preimage",
                )
            )
            continue
        if m_rel in witness_cells:
            continue
        if cell.kind is RelationKind.ALLOCATION:
            # a traced action's own lane allocation is image furniture
            continue
        if set(q.sources_of(xk)) & set(q.sources_of(xl)):
            continue  # elaboration inside one use case's image
        accounted = True
        detail = ""
        candidates = backward_candidates(m, q, m_rel)
        if not candidates:
            accounted = False
            detail = "no backward candidates"
        for c in candidates:
            r = reinterpret_candidate(c)
            if r.commit:
                pair = canonical_pair(r.kind, c.source, c.target, c.source_kind, c.target_kind)
                present = n.cells.get(pair)
                if present is None or present.kind is not r.kind:
                    accounted = False
                    detail = f"counterpart ({pair[0]}, {pair[1]}) missing in the source model"
            elif r.reason is DropReason.NO_RULE:
                accounted = False
                detail = f"no reinterpretation rule for ({c.source}, {c.target})"
        if not accounted:
            failures.append(
                SyncFailure("unwitnessed_target_relation", f"({xk}, {xl})", detail)
            )

    return SyncVerification(synchronized=not failures, failures=failures)


# ---------------------------------------------------------------------------
# display
# ---------------------------------------------------------------------------

EMPTY_CELL = "·"


def format_matrix_grid(matrix: AdjacencyMatrix) -> str:
    """Dense text grid: tag headers, semantics statements, dots for holes."""
    ids = matrix.ids()
    headers = [""] + ids
    rows: list[list[str]] = [headers]
    for r in ids:
        row = [r]
        for c in ids:
            cell = matrix.cells.get((r, c))
            row.append(cell.semantics if cell else EMPTY_CELL)
        rows.append(row)
    return _align(rows)


def format_trace_grid(q: TraceMatrix, row_ids: list[str], col_ids: list[str]) -> str:
    rows: list[list[str]] = [[""] + col_ids]
    for r in row_ids:
        rows.append(
            [r] + [("maps to" if (r, c) in q else EMPTY_CELL) for c in col_ids]
        )
    return _align(rows)


def _align(rows: list[list[str]]) -> str:
    widths = [
        max(len(row[i]) for row in rows) for i in range(len(rows[0]))
    ] if rows and rows[0] else []
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)

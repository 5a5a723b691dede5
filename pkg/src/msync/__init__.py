"""msync: joint-cognitive synchronization of use-case and activity models.

Structured requirements are interpreted into a use-case model, the
model is transformed into an activity skeleton, event-driven
requirements complete it, and both models plus their cross-model trace
live in matrix form so changes on either side can be propagated -
automatically where the rules decide, through an engineer's decision
queue where they do not.
"""

from .errors import MsyncError
from .model import (
    Direction,
    Entity,
    EntityKind,
    Initiator,
    Metamodel,
    Model,
    Relation,
    RelationKind,
    Stage,
    Violation,
    check_conformance,
)
from .requirements import (
    DependencyKind,
    DomainDependency,
    ElaborationLink,
    Form,
    Requirement,
    RequirementSet,
    derive_domain_dependency,
    parse_ears,
    parse_requirement,
    parse_svo,
)
from .interpret import (
    CompletionResult,
    CompositionReport,
    InterpretationTrace,
    interpret_activity_completion,
    interpret_usecase,
    verify_composition,
)
from .transform import (
    RULESET,
    TransformRule,
    compose_with_interpretation,
    semantic_transform,
)
from .rosetta import (
    AdjacencyMatrix,
    CandidateRelation,
    CellLabel,
    DropReason,
    SyncFailure,
    SyncVerification,
    TraceMatrix,
    Witness,
    backward_candidates,
    forward_witness,
    format_matrix_grid,
    format_trace_grid,
    matrix_to_model,
    model_to_matrix,
    reinterpret_candidate,
    verify_synchronized,
)
from .sync import (
    Candidate,
    CandidateOutcome,
    ChangeOp,
    ChangeOpKind,
    ChangeSet,
    DecisionKind,
    DecisionRequest,
    DecisionResolution,
    Side,
    SyncReport,
    apply_changeset,
    pending_decisions,
    resolve_decision,
)
from .project import (
    Project,
    load_project,
    new_project,
    run_dependency,
    run_interpret_alpha,
    run_interpret_beta,
    run_transform,
    save_project,
    set_requirements,
)
from .render import render

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

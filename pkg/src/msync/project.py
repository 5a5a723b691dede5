"""Project workspace: both models, requirements, trace, decisions, audit.

A project serializes to a single JSON document with sorted keys, fixed
list orders and LF line endings, so equal projects save byte-identically
and replayed sessions produce byte-identical files. The audit trail is
append-only and carries no timestamps for exactly that reason; its last
sequence number doubles as the project's mutation version.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IntegrityError, SchemaVersionMismatch
from .interpret import (
    CompletionResult,
    InterpretationTrace,
    interpret_activity_completion,
    interpret_usecase,
    reconstruct_beta_trace,
)
from .model import Model
from .requirements import (
    DomainDependency,
    ElaborationLink,
    RequirementSet,
    derive_domain_dependency,
)
from .rosetta import (
    AdjacencyMatrix,
    SyncVerification,
    TraceMatrix,
    model_to_matrix,
    verify_synchronized,
)
from .sync import DecisionRequest
from .transform import compose_with_interpretation, semantic_transform
from .model import Metamodel, Stage

SCHEMA_VERSION = 1


@dataclass
class AuditEvent:
    seq: int
    event: str
    detail: str


@dataclass
class Project:
    name: str
    system: str
    w_alpha: RequirementSet | None = None
    w_beta: RequirementSet | None = None
    elaborations: list[ElaborationLink] = field(default_factory=list)
    model_alpha: Model | None = None
    model_beta: Model | None = None
    q: TraceMatrix = field(default_factory=TraceMatrix)
    decision_queue: list[DecisionRequest] = field(default_factory=list)
    audit: list[AuditEvent] = field(default_factory=list)

    # -- bookkeeping ---------------------------------------------------------

    @property
    def version(self) -> int:
        return self.audit[-1].seq if self.audit else 0

    def log(self, seq: int, event: str, detail: str) -> None:
        self.audit.append(AuditEvent(seq=seq, event=event, detail=detail))

    def next_decision_number(self) -> int:
        return 1 + sum(1 for e in self.audit if e.event == "decision_enqueued")

    def copy(self) -> Project:
        clone = Project(name=self.name, system=self.system)
        clone.w_alpha = (
            RequirementSet.from_doc(self.w_alpha.to_doc())
            if self.w_alpha is not None
            else None
        )
        clone.w_beta = (
            RequirementSet.from_doc(self.w_beta.to_doc())
            if self.w_beta is not None
            else None
        )
        clone.elaborations = list(self.elaborations)
        clone.model_alpha = self.model_alpha.copy() if self.model_alpha else None
        clone.model_beta = self.model_beta.copy() if self.model_beta else None
        clone.q = self.q.copy()
        clone.decision_queue = [DecisionRequest.from_doc(r.to_doc()) for r in self.decision_queue]
        clone.audit = [AuditEvent(e.seq, e.event, e.detail) for e in self.audit]
        return clone

    def replace_with(self, other: Project) -> None:
        self.name = other.name
        self.system = other.system
        self.w_alpha = other.w_alpha
        self.w_beta = other.w_beta
        self.elaborations = other.elaborations
        self.model_alpha = other.model_alpha
        self.model_beta = other.model_beta
        self.q = other.q
        self.decision_queue = other.decision_queue
        self.audit = other.audit

    # -- derived views --------------------------------------------------------

    def matrices(self) -> tuple[AdjacencyMatrix, AdjacencyMatrix]:
        n = (
            model_to_matrix(self.model_alpha)
            if self.model_alpha
            else AdjacencyMatrix(Metamodel.USE_CASE, Stage.SKELETON)
        )
        m = (
            model_to_matrix(self.model_beta)
            if self.model_beta
            else AdjacencyMatrix(Metamodel.ACTIVITY, Stage.SKELETON)
        )
        return n, m

    def verify(self) -> SyncVerification:
        n, m = self.matrices()
        return verify_synchronized(n, m, self.q)

    def dependency(self) -> DomainDependency | None:
        if self.w_alpha is None or self.w_beta is None or not self.elaborations:
            return None
        return derive_domain_dependency(self.w_alpha, self.w_beta, self.elaborations)

    def trace_alpha(self) -> InterpretationTrace:
        if self.w_alpha is None:
            return InterpretationTrace()
        _, trace = interpret_usecase(self.w_alpha)
        return trace

    def trace_beta(self) -> InterpretationTrace:
        if self.w_beta is None or self.model_beta is None:
            return InterpretationTrace()
        return reconstruct_beta_trace(self.model_beta, self.w_beta)


def new_project(name: str, system: str) -> Project:
    project = Project(name=name, system=system)
    project.log(1, "project_created", f"{name} (system {system})")
    return project


# ---------------------------------------------------------------------------
# pipeline steps
# ---------------------------------------------------------------------------

def set_requirements(
    project: Project,
    side: str,
    reqset: RequirementSet,
    links: list[ElaborationLink] | None = None,
) -> None:
    seq = project.version + 1
    if side == "alpha":
        project.w_alpha = reqset
    elif side == "beta":
        project.w_beta = reqset
    else:
        raise ValueError(f"unknown side {side!r}")
    for link in links or []:
        if link not in project.elaborations:
            project.elaborations.append(link)
    project.log(
        seq,
        "requirements_added",
        f"{side}: {len(reqset)} requirements" + (f", {len(links)} links" if links else ""),
    )


def run_interpret_alpha(project: Project) -> Model:
    if project.w_alpha is None:
        raise IntegrityError("no source requirement set loaded")
    seq = project.version + 1
    model, _ = interpret_usecase(project.w_alpha)
    project.model_alpha = model
    project.log(seq, "alpha_interpreted", f"{len(model.entities)} entities")
    _prune_after_rebuild(project, seq)
    return model


def run_transform(project: Project) -> Model:
    if project.model_alpha is None:
        raise IntegrityError("interpret the source requirements first")
    seq = project.version + 1
    skeleton, q = semantic_transform(project.model_alpha)
    composed = compose_with_interpretation(skeleton, project.model_alpha, q)
    project.model_beta = composed
    project.q = q
    project.log(
        seq,
        "transformed",
        f"{len(composed.entities)} target entities, {len(q)} trace links",
    )
    _prune_after_rebuild(project, seq)
    return composed


def run_interpret_beta(project: Project) -> CompletionResult:
    if project.model_beta is None:
        raise IntegrityError("transform the source model first")
    if project.w_beta is None:
        raise IntegrityError("no target requirement set loaded")
    seq = project.version + 1
    result = interpret_activity_completion(project.model_beta, project.w_beta, project.q)
    project.model_beta = result.model
    project.q = result.q
    project.log(seq, "beta_interpreted", f"stage {result.model.stage.value}")
    for seed in result.decisions:
        seed.id = f"d{project.next_decision_number()}"
        seed.issued_version = seq
        project.decision_queue.append(seed)
        project.log(seq, "decision_enqueued", f"{seed.id} {seed.kind.value}: {seed.prompt}")
    return result


def _prune_after_rebuild(project: Project, seq: int) -> None:
    """Drop state stranded by rebuilding a model from its requirements.

    Pipeline steps replace whole models, so trace links and decision
    requests may reference entities that no longer exist; they are
    removed with an audit record rather than left to corrupt saves.
    """
    alive_alpha = set(project.model_alpha.entities) if project.model_alpha else set()
    alive_beta = set(project.model_beta.entities) if project.model_beta else set()
    kept = []
    for a, b in project.q.links:
        if a in alive_alpha and b in alive_beta:
            kept.append((a, b))
        else:
            project.log(seq, "trace_link_removed", f"({a}, {b})")
    project.q.links = kept
    remaining = []
    for request in project.decision_queue:
        alive = alive_alpha if request.side.value == "alpha" else alive_beta
        if all(s in alive for s in request.subjects):
            remaining.append(request)
        else:
            project.log(
                seq, "request_withdrawn", f"{request.id}: subject no longer exists"
            )
    project.decision_queue = remaining


def run_dependency(
    project: Project, links: list[ElaborationLink] | None = None
) -> DomainDependency:
    if project.w_alpha is None or project.w_beta is None:
        raise IntegrityError("both requirement sets must be loaded")
    seq = project.version + 1
    for link in links or []:
        if link not in project.elaborations:
            project.elaborations.append(link)
    dependency = derive_domain_dependency(
        project.w_alpha, project.w_beta, project.elaborations
    )
    project.log(seq, "dependency_derived", dependency.kind.value)
    return dependency


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def dumps_project(project: Project) -> str:
    doc = {
        "version": SCHEMA_VERSION,
        "name": project.name,
        "system": project.system,
        "w_alpha": project.w_alpha.to_doc() if project.w_alpha is not None else None,
        "w_beta": project.w_beta.to_doc() if project.w_beta is not None else None,
        "elaborations": [
            {"source": l.source, "target": l.target} for l in project.elaborations
        ],
        "model_alpha": project.model_alpha.to_doc() if project.model_alpha else None,
        "model_beta": project.model_beta.to_doc() if project.model_beta else None,
        "q_links": project.q.to_doc(),
        "decisions_pending": [r.to_doc() for r in project.decision_queue],
        "audit": [
            {"seq": e.seq, "event": e.event, "detail": e.detail} for e in project.audit
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_project(project: Project, path: str | Path) -> None:
    import fcntl

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        fh.write(dumps_project(project))
        fh.flush()
        fcntl.flock(fh, fcntl.LOCK_UN)


def loads_project(text: str) -> Project:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise IntegrityError("project file must hold a JSON object")
    found = doc.get("version")
    if found != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"project file schema version {found!r}; this build reads {SCHEMA_VERSION}"
        )
    try:
        project = Project(name=doc["name"], system=doc["system"])
    except KeyError as exc:
        raise IntegrityError(f"project file is missing {exc.args[0]!r}") from exc
    if doc.get("w_alpha") is not None:
        project.w_alpha = RequirementSet.from_doc(doc["w_alpha"])
    if doc.get("w_beta") is not None:
        project.w_beta = RequirementSet.from_doc(doc["w_beta"])
    project.elaborations = [
        ElaborationLink(l["source"], l["target"]) for l in doc.get("elaborations", [])
    ]
    if doc.get("model_alpha"):
        project.model_alpha = Model.from_doc(doc["model_alpha"])
    if doc.get("model_beta"):
        project.model_beta = Model.from_doc(doc["model_beta"])
    project.q = TraceMatrix.from_doc(doc.get("q_links", []))
    project.decision_queue = [
        DecisionRequest.from_doc(r) for r in doc.get("decisions_pending", [])
    ]
    project.audit = [
        AuditEvent(e["seq"], e["event"], e["detail"]) for e in doc.get("audit", [])
    ]
    _check_integrity(project)
    return project


def load_project(path: str | Path) -> Project:
    import fcntl

    with open(path, "r", encoding="utf-8") as fh:
        fcntl.flock(fh, fcntl.LOCK_SH)
        text = fh.read()
        fcntl.flock(fh, fcntl.LOCK_UN)
    return loads_project(text)


def _check_integrity(project: Project) -> None:
    for model, name in ((project.model_alpha, "alpha"), (project.model_beta, "beta")):
        if model is None:
            continue
        for rel in model.relations.values():
            for endpoint in (rel.source, rel.target):
                if endpoint not in model.entities:
                    raise IntegrityError(
                        f"model {name}: relation {rel.id} references missing {endpoint!r}"
                    )
    for a, b in project.q.links:
        if project.model_alpha is None or a not in project.model_alpha.entities:
            raise IntegrityError(f"trace link ({a}, {b}) references missing {a!r}")
        if project.model_beta is None or b not in project.model_beta.entities:
            raise IntegrityError(f"trace link ({a}, {b}) references missing {b!r}")
    alpha_ids = set(project.w_alpha.ids()) if project.w_alpha else set()
    beta_ids = set(project.w_beta.ids()) if project.w_beta else set()
    for link in project.elaborations:
        if link.source not in alpha_ids or link.target not in beta_ids:
            raise IntegrityError(
                f"elaboration ({link.source} -> {link.target}) references a "
                "missing requirement"
            )
    for req in project.decision_queue:
        model = project.model_alpha if req.side.value == "alpha" else project.model_beta
        for subject in req.subjects:
            if model is None or subject not in model.entities:
                raise IntegrityError(
                    f"decision {req.id} references missing entity {subject!r}"
                )

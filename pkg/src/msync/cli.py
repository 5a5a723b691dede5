"""msync command line: the full interpretation/transformation pipeline,
change application, decision handling, matrix display and rendering.

Exit codes: 0 success, 1 usage or environment, 2 requirement/file parse
errors, 3 model conformance errors, 4 verification found the models out
of sync, 5 verification passed but decisions are pending.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import (
    ChangesetAborted,
    DanglingEndpoint,
    DanglingLink,
    DuplicateRelation,
    IllegalCell,
    IntegrityError,
    KindMismatch,
    MsyncError,
    NonConformantSource,
    NonSystemSubject,
    OrphanUseCase,
    ParseError,
    SignatureViolation,
    UnknownLane,
    UnsupportedEarsPattern,
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
from .render import render as render_model
from .requirements import ElaborationLink, RequirementSet
from .rosetta import format_matrix_grid, format_trace_grid
from .sync import (
    ChangeSet,
    DecisionResolution,
    SyncReport,
    apply_changeset,
    pending_decisions,
    resolve_decision,
)

EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_CONFORMANCE = 3
EXIT_NOT_SYNCHRONIZED = 4
EXIT_PENDING_DECISIONS = 5

_PARSE_ERRORS = (ParseError, UnsupportedEarsPattern, DanglingLink, json.JSONDecodeError)
_CONFORMANCE_ERRORS = (
    KindMismatch,
    SignatureViolation,
    DuplicateRelation,
    DanglingEndpoint,
    NonConformantSource,
    OrphanUseCase,
    NonSystemSubject,
    UnknownLane,
    IllegalCell,
    IntegrityError,
)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map domain errors onto the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ChangesetAborted as exc:
            cause = exc.cause
            if isinstance(cause, _PARSE_ERRORS):
                _fail(EXIT_PARSE, str(exc))
            elif isinstance(cause, _CONFORMANCE_ERRORS):
                _fail(EXIT_CONFORMANCE, str(exc))
            _fail(EXIT_USAGE, str(exc))
        except _PARSE_ERRORS as exc:
            _fail(EXIT_PARSE, str(exc))
        except _CONFORMANCE_ERRORS as exc:
            _fail(EXIT_CONFORMANCE, str(exc))
        except MsyncError as exc:
            _fail(EXIT_USAGE, str(exc))
        except OSError as exc:
            _fail(EXIT_USAGE, str(exc))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _load(path: Path) -> Project:
    if not path.exists():
        _fail(EXIT_USAGE, f"no project file at {path} (run 'msync init' first)")
    return load_project(path)


def _parse_links(doc) -> list[ElaborationLink]:
    links = []
    for entry in doc:
        if not isinstance(entry, dict) or "source" not in entry or "target" not in entry:
            raise ParseError("each elaboration link needs 'source' and 'target'")
        links.append(ElaborationLink(entry["source"], entry["target"]))
    return links


def _report_lines(report: SyncReport) -> list[str]:
    lines = []
    for item in report.applied:
        lines.append(f"applied: {item}")
    for item in report.propagated:
        lines.append(f"propagated: {item}")
    for outcome in report.outcomes:
        cell = f"({outcome.cell[0]}, {outcome.cell[1]})"
        if outcome.disposition == "committed":
            note = f" [{outcome.note}]" if outcome.note else ""
            lines.append(
                f"committed: {cell} -> ({outcome.source}, {outcome.target}) "
                f"{outcome.kind} '{outcome.semantics}'{note}"
                if outcome.source
                else f"committed: {cell}{note}"
            )
        elif outcome.disposition == "dropped":
            lines.append(
                f"dropped: ({outcome.source}, {outcome.target}) from {cell}: "
                f"{outcome.reason}"
            )
        else:
            lines.append(f"pending: {cell} {outcome.note}")
    for request in report.pending:
        lines.append(f"decision pending: {request.id} {request.prompt}")
    if report.verification is not None:
        state = "synchronized" if report.verification.synchronized else "NOT synchronized"
        lines.append(f"verification: {state}")
    return lines


@click.group()
@click.option(
    "--project",
    "-p",
    "project_path",
    default="project.msync.json",
    show_default=True,
    type=click.Path(path_type=Path),
    help="Project file to operate on.",
)
@click.pass_context
def cli(ctx: click.Context, project_path: Path) -> None:
    """Joint-cognitive model synchronization workbench."""
    ctx.obj = project_path


@cli.command()
@click.argument("name")
@click.option("--system", required=True, help="Name of the system under design.")
@click.pass_obj
@guarded
def init(project_path: Path, name: str, system: str) -> None:
    """Create a new project."""
    if project_path.exists():
        _fail(EXIT_USAGE, f"{project_path} already exists")
    project = new_project(name, system)
    save_project(project, project_path)
    click.echo(f"initialized {name} (system {system}) at {project_path}")


@cli.group()
def req() -> None:
    """Requirement set management."""


@req.command("add")
@click.option("--set", "which", type=click.Choice(["alpha", "beta"]), required=True)
@click.option("--file", "file_", type=click.Path(path_type=Path), required=True)
@click.pass_obj
@guarded
def req_add(project_path: Path, which: str, file_: Path) -> None:
    """Parse a requirement file into the project."""
    project = _load(project_path)
    doc = json.loads(file_.read_text(encoding="utf-8"))
    reqset = RequirementSet.from_doc(doc)
    links = _parse_links(doc.get("elaborates", []))
    set_requirements(project, which, reqset, links)
    save_project(project, project_path)
    click.echo(f"{which}: {len(reqset)} requirements loaded")


@cli.command()
@click.argument("side", type=click.Choice(["alpha", "beta"]))
@click.pass_obj
@guarded
def interpret(project_path: Path, side: str) -> None:
    """Interpret domain knowledge into a model."""
    project = _load(project_path)
    if side == "alpha":
        model = run_interpret_alpha(project)
        click.echo(f"source model: {len(model.entities)} entities")
    else:
        result = run_interpret_beta(project)
        click.echo(
            f"target model completed (stage {result.model.stage.value}, "
            f"{len(result.decisions)} decisions pending)"
        )
    save_project(project, project_path)


@cli.command()
@click.pass_obj
@guarded
def transform(project_path: Path) -> None:
    """Transform the source model into the target skeleton."""
    project = _load(project_path)
    model = run_transform(project)
    save_project(project, project_path)
    click.echo(
        f"target skeleton: {len(model.entities)} entities, "
        f"{len(project.q)} trace links"
    )


@cli.command()
@click.option("--links", "links_file", type=click.Path(path_type=Path))
@click.pass_obj
@guarded
def dependency(project_path: Path, links_file: Path | None) -> None:
    """Derive the relationship between the two requirement sets."""
    project = _load(project_path)
    links = []
    if links_file is not None:
        doc = json.loads(Path(links_file).read_text(encoding="utf-8"))
        links = _parse_links(doc)
    dep = run_dependency(project, links)
    save_project(project, project_path)
    click.echo(f"domain dependency: {dep.kind.value}")


@cli.command()
@click.pass_obj
@guarded
def verify(project_path: Path) -> None:
    """Check cross-model synchronization and the elaboration composition."""
    project = _load(project_path)
    sync_report = project.verify()
    composition_ok = True
    dep = project.dependency()
    if dep is not None:
        from .interpret import verify_composition

        comp = verify_composition(
            dep, project.trace_alpha(), project.trace_beta(), project.q
        )
        composition_ok = comp.passed
        for req_id, entity in comp.failures:
            click.echo(f"composition: {req_id} not witnessed through {entity}")
        click.echo(f"composition: {'pass' if comp.passed else 'FAIL'}")
    for failure in sync_report.failures:
        click.echo(f"{failure.category}: {failure.subject} ({failure.detail})")
    click.echo(
        f"synchronization: {'pass' if sync_report.synchronized else 'FAIL'}"
    )
    if not sync_report.synchronized or not composition_ok:
        sys.exit(EXIT_NOT_SYNCHRONIZED)
    if project.decision_queue:
        click.echo(f"{len(project.decision_queue)} decisions pending")
        sys.exit(EXIT_PENDING_DECISIONS)


@cli.group()
def change() -> None:
    """Model change application."""


@change.command("apply")
@click.option("--file", "file_", type=click.Path(path_type=Path), required=True)
@click.pass_obj
@guarded
def change_apply(project_path: Path, file_: Path) -> None:
    """Apply a changeset file and propagate its consequences."""
    project = _load(project_path)
    doc = json.loads(file_.read_text(encoding="utf-8"))
    report = apply_changeset(project, ChangeSet.from_doc(doc))
    save_project(project, project_path)
    for line in _report_lines(report):
        click.echo(line)


@cli.group()
def decisions() -> None:
    """Joint-cognitive decision queue."""


@decisions.command("list")
@click.pass_obj
@guarded
def decisions_list(project_path: Path) -> None:
    """Show pending decision requests."""
    project = _load(project_path)
    queue = pending_decisions(project)
    if not queue:
        click.echo("no pending decisions")
        return
    for request in queue:
        click.echo(f"{request.id} [{request.kind.value}] {request.prompt}")
        for i, candidate in enumerate(request.candidates, start=1):
            click.echo(f"  {i}. {candidate.key}: {candidate.description}")


@decisions.command("resolve")
@click.option("--id", "request_id", help="Decision request id (e.g. d1).")
@click.option("--choose", help="Candidate key or 1-based index.")
@click.option("--label", help="Label for create-new resolutions.")
@click.option("--script", type=click.Path(path_type=Path), help="Scripted resolutions.")
@click.pass_obj
@guarded
def decisions_resolve(
    project_path: Path,
    request_id: str | None,
    choose: str | None,
    label: str | None,
    script: Path | None,
) -> None:
    """Resolve one decision, or replay a decision script headlessly."""
    project = _load(project_path)
    if script is not None:
        entries = json.loads(script.read_text(encoding="utf-8"))
        for entry in entries:
            request = _match_scripted(project, entry)
            report = resolve_decision(
                project,
                DecisionResolution(
                    request_id=request.id,
                    choose=entry["choose"],
                    label=entry.get("label"),
                ),
            )
            click.echo(f"resolved {request.id} -> {entry['choose']}")
            for line in _report_lines(report):
                click.echo(line)
    else:
        if not request_id or not choose:
            _fail(EXIT_USAGE, "--id and --choose are required without --script")
        queue = {r.id: r for r in pending_decisions(project)}
        request = queue.get(request_id)
        if request is not None and choose.isdigit():
            index = int(choose) - 1
            if 0 <= index < len(request.candidates):
                choose = request.candidates[index].key
        report = resolve_decision(
            project, DecisionResolution(request_id=request_id, choose=choose, label=label)
        )
        for line in _report_lines(report):
            click.echo(line)
    save_project(project, project_path)


def _match_scripted(project: Project, entry: dict):
    from .errors import UnknownRequest

    for request in pending_decisions(project):
        if entry.get("request_kind") and request.kind.value != entry["request_kind"]:
            continue
        if entry.get("subject_tag") and entry["subject_tag"] not in request.subjects:
            continue
        return request
    raise UnknownRequest(
        f"no pending decision matches {entry.get('request_kind')}/"
        f"{entry.get('subject_tag')}"
    )


@cli.group()
def matrix() -> None:
    """Matrix views of the project."""


@matrix.command("show")
@click.argument("which", type=click.Choice(["n", "m", "q"]))
@click.pass_obj
@guarded
def matrix_show(project_path: Path, which: str) -> None:
    """Print a matrix as a dense grid."""
    project = _load(project_path)
    n, m = project.matrices()
    if which == "n":
        click.echo(format_matrix_grid(n))
    elif which == "m":
        click.echo(format_matrix_grid(m))
    else:
        click.echo(format_trace_grid(project.q, n.ids(), m.ids()))


@cli.command("render")
@click.argument("side", type=click.Choice(["alpha", "beta"]))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["dot", "plantuml"]),
    default="plantuml",
    show_default=True,
)
@click.option("-o", "--output", type=click.Path(path_type=Path))
@click.pass_obj
@guarded
def render_cmd(project_path: Path, side: str, fmt: str, output: Path | None) -> None:
    """Render a model as diagram text."""
    project = _load(project_path)
    model = project.model_alpha if side == "alpha" else project.model_beta
    if model is None:
        _fail(EXIT_USAGE, f"the {side} model does not exist yet")
    text = render_model(model, fmt)
    if output is None:
        click.echo(text, nl=False)
    else:
        output.write_text(text, encoding="utf-8")
        click.echo(f"wrote {output}")


@cli.command()
@click.option("--port", default=8787, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--ui-dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Directory of built UI assets to serve at /.",
)
@click.pass_obj
@guarded
def serve(project_path: Path, port: int, host: str, ui_dir: Path | None) -> None:
    """Start the HTTP service for the browser companion."""
    import uvicorn

    from .service import ProjectStore, create_app

    store = ProjectStore(project_path)
    app = create_app(store, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.Abort:
        sys.exit(EXIT_USAGE)
    return 0


if __name__ == "__main__":
    sys.exit(main())

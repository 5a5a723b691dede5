"""Diagram text generation (Graphviz DOT and PlantUML) for both models.

Output is ordered by identifier tag, not insertion order, so renders
are stable under entity reordering.
"""

from __future__ import annotations

import re

from .model import Direction, EntityKind, Metamodel, Model, RelationKind


def _tag_key(tag: str):
    m = re.match(r"([A-Za-z]+)(\d*)$", tag)
    if not m:
        return (tag, 0)
    return (m.group(1), int(m.group(2) or 0))


def _sorted_entities(model: Model, kinds: tuple[EntityKind, ...] | None = None):
    entities = [
        e for e in model.entities.values() if kinds is None or e.kind in kinds
    ]
    return sorted(entities, key=lambda e: _tag_key(e.id))


def _sorted_relations(model: Model):
    return sorted(model.relations.values(), key=lambda r: _tag_key(r.id))


def render(model: Model, fmt: str) -> str:
    if fmt == "dot":
        return render_dot(model)
    if fmt == "plantuml":
        return render_plantuml(model)
    raise ValueError(f"unknown render format {fmt!r}")


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------

_DOT_SHAPES = {
    EntityKind.SYSTEM: "box",
    EntityKind.ACTOR: "house",
    EntityKind.USE_CASE: "ellipse",
    EntityKind.ACTION: "box",
}


def render_dot(model: Model) -> str:
    lines = ["digraph model {", "  rankdir=LR;"]
    if model.metamodel is Metamodel.ACTIVITY:
        for lane in _sorted_entities(model, (EntityKind.SWIMLANE,)):
            lines.append(f"  subgraph cluster_{lane.id} {{")
            lines.append(f'    label="{lane.label or lane.id}";')
            for rel in _sorted_relations(model):
                if rel.kind is RelationKind.ALLOCATION and rel.target == lane.id:
                    action = model.entities[rel.source]
                    lines.append(
                        f'    "{action.id}" [shape=box, style=rounded, '
                        f'label="{action.label or action.id}"];'
                    )
            lines.append("  }")
        for rel in _sorted_relations(model):
            if rel.kind is RelationKind.PRECEDENCE:
                style = (
                    " [style=dotted, dir=none]"
                    if rel.direction is Direction.UNDECIDED
                    else ""
                )
                lines.append(f'  "{rel.source}" -> "{rel.target}"{style};')
    else:
        for entity in _sorted_entities(model):
            shape = _DOT_SHAPES.get(entity.kind, "box")
            extra = ", style=bold" if entity.kind is EntityKind.SYSTEM else ""
            lines.append(
                f'  "{entity.id}" [shape={shape}{extra}, '
                f'label="{entity.label or entity.id}"];'
            )
        for rel in _sorted_relations(model):
            if rel.kind is RelationKind.ASSOCIATION:
                lines.append(f'  "{rel.source}" -> "{rel.target}" [dir=none];')
            elif rel.kind is RelationKind.ALLOCATION:
                lines.append(f'  "{rel.source}" -> "{rel.target}" [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# PlantUML
# ---------------------------------------------------------------------------

def render_plantuml(model: Model) -> str:
    if model.metamodel is Metamodel.USE_CASE:
        return _plantuml_usecase(model)
    return _plantuml_activity(model)


def _plantuml_usecase(model: Model) -> str:
    lines = ["@startuml"]
    for actor in _sorted_entities(model, (EntityKind.ACTOR,)):
        lines.append(f'actor "{actor.label or actor.id}" as {actor.id}')
    allocated = {
        rel.source
        for rel in model.relations.values()
        if rel.kind is RelationKind.ALLOCATION
    }
    for system in _sorted_entities(model, (EntityKind.SYSTEM,)):
        lines.append(
            f'rectangle "{system.label or system.id}" <<subsystem>> as {system.id} {{'
        )
        for uc in _sorted_entities(model, (EntityKind.USE_CASE,)):
            if uc.id in allocated:
                lines.append(f'  usecase "{uc.label or uc.id}" as {uc.id}')
        lines.append("}")
    for uc in _sorted_entities(model, (EntityKind.USE_CASE,)):
        if uc.id not in allocated:
            lines.append(f'usecase "{uc.label or uc.id}" as {uc.id}')
    for rel in _sorted_relations(model):
        if rel.kind is RelationKind.ASSOCIATION:
            note = f" : {rel.semantics}" if rel.semantics not in ("", "associated with") else ""
            lines.append(f"{rel.source} -- {rel.target}{note}")
    lines.append("@enduml")
    return "\n".join(lines) + "\n"


def _plantuml_activity(model: Model) -> str:
    lines = ["@startuml"]
    lane_of: dict[str, str] = {}
    for rel in model.relations.values():
        if rel.kind is RelationKind.ALLOCATION:
            lane_of[rel.source] = rel.target

    def lane_label(lane_id: str) -> str:
        entity = model.entities.get(lane_id)
        return (entity.label or entity.id) if entity else lane_id

    actions = [e.id for e in _sorted_entities(model, (EntityKind.ACTION,))]
    preds: dict[str, set[str]] = {a: set() for a in actions}
    succs: dict[str, list[str]] = {a: [] for a in actions}
    for rel in _sorted_relations(model):
        if rel.kind is RelationKind.PRECEDENCE and rel.direction is Direction.FORWARD:
            preds[rel.target].add(rel.source)
            succs[rel.source].append(rel.target)

    # deterministic topological walk, ties broken by tag
    emitted: list[str] = []
    remaining = set(actions)
    while remaining:
        ready = sorted(
            (a for a in remaining if not (preds[a] & remaining)), key=_tag_key
        )
        if not ready:  # cycle: fall back to tag order
            ready = sorted(remaining, key=_tag_key)
        nxt = ready[0]
        emitted.append(nxt)
        remaining.discard(nxt)

    current_lane = None
    lines.append("start")
    for action in emitted:
        lane = lane_of.get(action)
        if lane != current_lane and lane is not None:
            lines.append(f"|{lane_label(lane)}|")
            current_lane = lane
        entity = model.entities[action]
        lines.append(f":{entity.label or entity.id};")
    lines.append("stop")
    lines.append("@enduml")
    return "\n".join(lines) + "\n"

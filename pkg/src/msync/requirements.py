"""Structured requirement sentences and elaboration links between sets.

Two sentence forms are accepted:

* simple subject-verb-object: ``<Subject> shall <verb phrase> [from|to <NP>]``
* event-driven: ``When <trigger clause>, [the] <subject> shall <response clause>``

The response clause of an event-driven requirement is itself parsed as
an SVO clause. A trailing purpose clause ``for <NP> to <verb phrase>``
is split off either form so the verb phrase stays clean; it names a
beneficiary and what the beneficiary does with the result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import DanglingLink, ParseError, UnsupportedEarsPattern

DETERMINERS = {"a", "an", "the", "this", "that", "these", "those"}

# words ignored when comparing clauses by content
STOPWORDS = DETERMINERS | {
    "shall",
    "from",
    "to",
    "of",
    "for",
    "and",
    "or",
    "it",
    "its",
    "in",
    "on",
    "with",
    "against",
    "when",
}

_PASSIVE_VERBS = {"be", "been", "being", "is", "are", "was", "were"}


class Form(str, Enum):
    SVO = "svo"
    EARS = "ears"


@dataclass
class Requirement:
    id: str
    raw: str
    form: Form
    subject: str
    verb_phrase: str
    object: str
    object_origin: str = "complement"  # "from" | "to" | "complement"
    trigger: str | None = None
    response: "Requirement | None" = None
    purpose_actor: str | None = None
    purpose_action: str | None = None


# ---------------------------------------------------------------------------
# token helpers (shared with the interpretation rules)
# ---------------------------------------------------------------------------

def tokenize(text: str) -> list[str]:
    return text.split()


def drop_determiners(tokens: list[str]) -> list[str]:
    return [t for t in tokens if t.lower() not in DETERMINERS]


def content_words(text: str) -> frozenset[str]:
    """Casefolded token set with determiners and fillers removed."""
    return frozenset(
        t for t in (w.lower().strip(".,") for w in text.split()) if t and t not in STOPWORDS
    )


def clause_overlap(a: str, b: str) -> float:
    """Jaccard overlap of the clauses' content words, in [0, 1]."""
    wa, wb = content_words(a), content_words(b)
    if not wa and not wb:
        return 1.0
    if not wa or not wb:
        return 0.0
    return len(wa & wb) / len(wa | wb)


def base_verb(verb: str) -> str:
    """Strip third-person-singular inflection: makes -> make."""
    lower = verb.lower()
    if lower.endswith("ies") and len(lower) > 3:
        return verb[:-3] + "y"
    if lower.endswith(("sses", "shes", "ches", "xes", "zes")):
        return verb[:-2]
    if lower.endswith("s") and not lower.endswith("ss"):
        return verb[:-1]
    return verb


def past_participle(verb: str) -> str:
    lower = verb.lower()
    if lower.endswith("e"):
        return verb + "d"
    if lower.endswith("y") and len(lower) > 1 and lower[-2] not in "aeiou":
        return verb[:-1] + "ied"
    return verb + "ed"


def smart_title(text: str) -> str:
    """Title-case a phrase, preserving words that already carry capitals."""
    out = []
    for word in text.split():
        out.append(word if any(ch.isupper() for ch in word) else word.capitalize())
    return " ".join(out)


# ---------------------------------------------------------------------------
# clause parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Clause:
    verb_phrase: str
    object: str
    object_origin: str
    purpose_actor: str | None
    purpose_action: str | None


def _parse_clause(clause: str, base_col: int) -> _Clause:
    tokens = tokenize(clause)
    if not tokens:
        raise ParseError("missing clause after 'shall'", base_col, "verb phrase")
    if tokens[0].lower() in _PASSIVE_VERBS:
        raise ParseError("passive voice is not supported", base_col, "active verb")

    purpose_actor: str | None = None
    purpose_action: str | None = None
    # trailing purpose clause: "... for <NP> to <verb phrase>"
    for i in range(len(tokens) - 1, 0, -1):
        if tokens[i].lower() != "for":
            continue
        try:
            j = next(
                k for k in range(i + 2, len(tokens)) if tokens[k].lower() == "to"
            )
        except StopIteration:
            continue
        if j + 1 < len(tokens):
            purpose_actor = " ".join(drop_determiners(tokens[i + 1 : j]))
            purpose_action = " ".join(tokens[j + 1 :])
            tokens = tokens[:i]
        break

    marker = None
    for i in range(len(tokens) - 1, 0, -1):
        if tokens[i].lower() in ("from", "to") and i + 1 < len(tokens):
            marker = i
            break
    if marker is not None:
        object_tokens = drop_determiners(tokens[marker + 1 :])
        obj = " ".join(object_tokens)
        verb_phrase = " ".join(tokens[:marker])
        origin = tokens[marker].lower()
    else:
        complement = drop_determiners(tokens[1:])
        if not complement:
            raise ParseError(
                "verb phrase has no complement",
                base_col + len(tokens[0]),
                "object noun phrase",
            )
        obj = complement[0].strip(".,")
        verb_phrase = " ".join(tokens)
        origin = "complement"
    if not obj:
        raise ParseError("empty object noun phrase", base_col, "object noun phrase")
    return _Clause(verb_phrase, obj, origin, purpose_actor, purpose_action)


_SHALL = re.compile(r"\bshall\b", re.IGNORECASE)


def parse_svo(raw: str, req_id: str = "") -> Requirement:
    """Parse ``<Subject> shall <verb phrase> [from|to <NP>]``."""
    text = raw.strip().rstrip(".")
    m = _SHALL.search(text)
    if m is None:
        raise ParseError("no 'shall' keyword found", len(text), "shall")
    subject = text[: m.start()].strip()
    if not subject:
        raise ParseError("missing subject before 'shall'", 0, "subject")
    clause = _parse_clause(text[m.end() :].strip(), m.end())
    return Requirement(
        id=req_id,
        raw=raw.strip(),
        form=Form.SVO,
        subject=subject,
        verb_phrase=clause.verb_phrase,
        object=clause.object,
        object_origin=clause.object_origin,
        purpose_actor=clause.purpose_actor,
        purpose_action=clause.purpose_action,
    )


def parse_ears(raw: str, system: str | None = None, req_id: str = "") -> Requirement:
    """Parse the event-driven template, resolving "it" to the system name."""
    text = raw.strip()
    first = text.split(None, 1)[0].rstrip(",") if text else ""
    if first.lower() in ("while", "if", "where"):
        raise UnsupportedEarsPattern(
            f"only the event-driven 'When ...' template is supported, got {first!r}"
        )
    if first.lower() != "when":
        raise ParseError("event-driven requirement must start with 'When'", 0, "When")
    comma = text.find(",")
    if comma < 0:
        raise ParseError("no ',' terminating the trigger clause", len(text), ",")
    trigger = text[len(first) : comma].strip()
    if not trigger:
        raise ParseError("empty trigger clause", len(first), "trigger clause")
    rest = text[comma + 1 :].strip().rstrip(".")
    m = _SHALL.search(rest)
    if m is None:
        raise ParseError("no 'shall' in the response", comma + 1, "shall")
    subject = rest[: m.start()].strip()
    if subject.lower().startswith("the "):
        subject = subject[4:].strip()
    if not subject:
        raise ParseError("missing response subject", comma + 1, "subject")
    if subject.lower() == "it":
        if not system:
            raise ParseError(
                "cannot resolve 'it' without a declared system name",
                comma + 1,
                "system name",
            )
        subject = system
    clause_text = rest[m.end() :].strip()
    clause = _parse_clause(clause_text, comma + 1 + m.end())
    response = Requirement(
        id=f"{req_id}/response" if req_id else "",
        raw=f"{subject} shall {clause_text}",
        form=Form.SVO,
        subject=subject,
        verb_phrase=clause.verb_phrase,
        object=clause.object,
        object_origin=clause.object_origin,
        purpose_actor=clause.purpose_actor,
        purpose_action=clause.purpose_action,
    )
    return Requirement(
        id=req_id,
        raw=text,
        form=Form.EARS,
        subject=subject,
        verb_phrase=clause.verb_phrase,
        object=clause.object,
        object_origin=clause.object_origin,
        trigger=trigger,
        response=response,
        purpose_actor=clause.purpose_actor,
        purpose_action=clause.purpose_action,
    )


def parse_requirement(text: str, system: str | None = None, req_id: str = "") -> Requirement:
    """Dispatch on the sentence's leading keyword."""
    first = text.strip().split(None, 1)[0] if text.strip() else ""
    if first.lower() in ("when", "while", "if", "where"):
        return parse_ears(text, system=system, req_id=req_id)
    return parse_svo(text, req_id=req_id)


# ---------------------------------------------------------------------------
# requirement sets and elaboration
# ---------------------------------------------------------------------------

@dataclass
class RequirementSet:
    id: str
    system: str = ""
    requirements: list[Requirement] = field(default_factory=list)

    def add(self, requirement: Requirement) -> None:
        if requirement.id in self.ids():
            raise DanglingLink(f"duplicate requirement id {requirement.id!r}")
        self.requirements.append(requirement)

    def add_text(self, req_id: str, text: str) -> Requirement:
        req = parse_requirement(text, system=self.system, req_id=req_id)
        self.add(req)
        return req

    def get(self, req_id: str) -> Requirement:
        for req in self.requirements:
            if req.id == req_id:
                return req
        raise DanglingLink(f"no requirement {req_id!r} in set {self.id!r}")

    def ids(self) -> list[str]:
        return [r.id for r in self.requirements]

    def __iter__(self):
        return iter(self.requirements)

    def __len__(self) -> int:
        return len(self.requirements)

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "system": self.system,
            "requirements": [{"id": r.id, "text": r.raw} for r in self.requirements],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> RequirementSet:
        if not isinstance(doc, dict) or "id" not in doc:
            raise ParseError("requirement set document needs an 'id'")
        rs = cls(id=doc["id"], system=doc.get("system", ""))
        for entry in doc.get("requirements", []):
            if "id" not in entry or "text" not in entry:
                raise ParseError("each requirement needs 'id' and 'text'")
            rs.add_text(entry["id"], entry["text"])
        return rs


@dataclass(frozen=True)
class ElaborationLink:
    source: str  # requirement id in the source set
    target: str  # requirement id in the elaborating set


class DependencyKind(str, Enum):
    SUBSET_ALPHA_IN_BETA = "subset_alpha_in_beta"
    SUBSET_BETA_IN_ALPHA = "subset_beta_in_alpha"
    UNRELATED = "unrelated"


@dataclass
class DomainDependency:
    kind: DependencyKind
    links: list[ElaborationLink] = field(default_factory=list)


def derive_domain_dependency(
    w_alpha: RequirementSet,
    w_beta: RequirementSet,
    links: list[ElaborationLink],
) -> DomainDependency:
    """Classify the relationship between two requirement sets.

    The first set is a subset of the second when every one of its
    sentences is elaborated by at least one link; the symmetric case
    holds when every sentence of the second set is the target of a
    link. Anything else is unrelated.
    """
    alpha_ids = set(w_alpha.ids())
    beta_ids = set(w_beta.ids())
    for link in links:
        if link.source not in alpha_ids:
            raise DanglingLink(f"link source {link.source!r} not in {w_alpha.id!r}")
        if link.target not in beta_ids:
            raise DanglingLink(f"link target {link.target!r} not in {w_beta.id!r}")
    sources = {l.source for l in links}
    targets = {l.target for l in links}
    if alpha_ids <= sources:
        kind = DependencyKind.SUBSET_ALPHA_IN_BETA
    elif beta_ids <= targets:
        kind = DependencyKind.SUBSET_BETA_IN_ALPHA
    else:
        kind = DependencyKind.UNRELATED
    return DomainDependency(kind=kind, links=list(links))

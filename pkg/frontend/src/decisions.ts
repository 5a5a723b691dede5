// Decision inbox: pending requests with ranked candidates, a free-text
// label for create-new choices, and the resolution payload builder.

import { escapeHtml } from "./grids.js";
import type { DecisionDoc, DecisionsDoc, ResolutionBody } from "./types.js";

export function renderDecision(request: DecisionDoc): string {
  const candidates = request.candidates
    .map((candidate, index) => {
      const checked = index === 0 ? " checked" : "";
      return (
        `<label class="candidate"><input type="radio" name="choose-${escapeHtml(request.id)}" ` +
        `value="${escapeHtml(candidate.key)}"${checked}> ` +
        `<code>${escapeHtml(candidate.key)}</code> ${escapeHtml(candidate.description)}</label>`
      );
    })
    .join("");
  const needsLabel = request.candidates.some((c) => c.key === "create_new");
  const labelField = needsLabel
    ? `<input type="text" class="label-input" data-request="${escapeHtml(request.id)}" ` +
      `placeholder="Label for a newly created element">`
    : "";
  return (
    `<article class="decision" data-request="${escapeHtml(request.id)}">` +
    `<header><span class="decision-id">${escapeHtml(request.id)}</span>` +
    `<span class="decision-kind">${escapeHtml(request.kind)}</span>` +
    `<span class="decision-subjects">${request.subjects.map(escapeHtml).join(", ")}</span></header>` +
    `<p class="prompt">${escapeHtml(request.prompt)}</p>` +
    `<div class="candidates">${candidates}</div>` +
    labelField +
    `<button class="resolve" data-request="${escapeHtml(request.id)}">Resolve</button>` +
    `</article>`
  );
}

export function renderDecisionInbox(doc: DecisionsDoc): string {
  if (doc.decisions.length === 0) {
    return `<p class="empty">No pending decisions.</p>`;
  }
  return doc.decisions.map(renderDecision).join("");
}

// Resolutions always carry the queue version the client saw, so a
// concurrent mutation surfaces as a conflict instead of being merged.
export function resolutionBody(
  choose: string,
  label: string,
  version: number,
): ResolutionBody {
  const body: ResolutionBody = { choose, expected_version: version };
  const trimmed = label.trim();
  if (trimmed) {
    body.label = trimmed;
  }
  return body;
}

// Propagation report panel: what a mutation committed, dropped (and
// why), or left pending.

import { escapeHtml } from "./grids.js";
import type { OutcomeDoc, ReportDoc } from "./types.js";

const DROP_REASONS: Record<string, string> = {
  metamodel_out_of_scope:
    "precedence between use cases is outside the use-case metamodel",
  intra_system_flow: "flow into the system lane is internal to the subject",
  self_relation: "an element cannot relate to itself",
  no_rule: "no reinterpretation rule covers this pair",
};

export function dropReasonText(reason: string | undefined): string {
  if (!reason) return "";
  return DROP_REASONS[reason] ?? reason;
}

export function describeOutcome(outcome: OutcomeDoc): string {
  const cell = `(${outcome.cell[0]}, ${outcome.cell[1]})`;
  const pair = outcome.candidate
    ? `(${outcome.candidate[0]}, ${outcome.candidate[1]})`
    : "";
  if (outcome.disposition === "committed") {
    const note = outcome.note ? ` [${outcome.note}]` : "";
    return `${cell} → ${pair} ${outcome.kind ?? ""} '${outcome.semantics ?? ""}'${note}`;
  }
  if (outcome.disposition === "dropped") {
    return `${pair} from ${cell}: ${dropReasonText(outcome.reason)}`;
  }
  return `${cell} ${outcome.note ?? "awaiting a decision"}`;
}

export function renderReport(report: ReportDoc | null): string {
  if (!report) {
    return `<p class="empty">No propagation yet.</p>`;
  }
  const group = (title: string, cls: string, items: string[]) =>
    items.length
      ? `<h4>${escapeHtml(title)}</h4><ul class="${cls}">` +
        items.map((i) => `<li>${escapeHtml(i)}</li>`).join("") +
        `</ul>`
      : "";
  const committed = report.outcomes
    .filter((o) => o.disposition === "committed")
    .map(describeOutcome);
  const dropped = report.outcomes
    .filter((o) => o.disposition === "dropped")
    .map(describeOutcome);
  const pending = report.outcomes
    .filter((o) => o.disposition === "pending")
    .map(describeOutcome);
  const verification = report.verification
    ? `<p class="verdict ${report.verification.synchronized ? "ok" : "bad"}">` +
      (report.verification.synchronized
        ? "models synchronized"
        : `NOT synchronized: ${report.verification.failures
            .map((f) => `${f.category} ${f.subject}`)
            .join("; ")}`) +
      `</p>`
    : "";
  return (
    group("Applied", "applied", report.applied) +
    group("Propagated", "propagated", report.propagated) +
    group("Committed", "committed", committed) +
    group("Dropped", "dropped", dropped) +
    group("Pending", "pending", pending) +
    verification
  );
}

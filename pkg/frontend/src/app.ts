// Bootstrap: fetch state, render, subscribe to the event stream, wire
// the decision inbox. No optimistic updates - every transition is a
// refetch after a confirmed server response.

import {
  ApiError,
  fetchDecisions,
  fetchMatrices,
  fetchRender,
  fetchVerify,
  postResolution,
} from "./api.js";
import { renderDecisionInbox, resolutionBody } from "./decisions.js";
import { renderMatrices } from "./grids.js";
import { renderReport } from "./report.js";
import type { DecisionsDoc, MatricesDoc, ReportDoc } from "./types.js";

interface AppState {
  matrices: MatricesDoc | null;
  previous: MatricesDoc | null;
  decisions: DecisionsDoc | null;
  report: ReportDoc | null;
  notice: string;
}

const state: AppState = {
  matrices: null,
  previous: null,
  decisions: null,
  report: null,
  notice: "",
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing container #${id}`);
  return node;
}

async function refresh(): Promise<void> {
  const [matrices, decisions, verify] = await Promise.all([
    fetchMatrices(),
    fetchDecisions(),
    fetchVerify(),
  ]);
  state.previous = state.matrices;
  state.matrices = matrices;
  state.decisions = decisions;
  el("matrices").innerHTML = renderMatrices(matrices, state.previous);
  el("decisions").innerHTML = renderDecisionInbox(decisions);
  const badge = el("sync-badge");
  badge.textContent = verify.synchronized
    ? verify.pending_decisions > 0
      ? `synchronized, ${verify.pending_decisions} decisions pending`
      : "synchronized"
    : "not synchronized";
  badge.className = verify.synchronized ? "badge ok" : "badge bad";
  for (const side of ["alpha", "beta"] as const) {
    try {
      el(`diagram-${side}`).textContent = await fetchRender(side, "plantuml");
    } catch {
      el(`diagram-${side}`).textContent = "(model not built yet)";
    }
  }
  el("report").innerHTML = renderReport(state.report);
  el("notice").textContent = state.notice;
}

async function resolveClicked(requestId: string): Promise<void> {
  const root = document.querySelector(`article[data-request="${requestId}"]`);
  if (!root || !state.decisions) return;
  const chosen = root.querySelector<HTMLInputElement>(
    `input[name="choose-${requestId}"]:checked`,
  );
  if (!chosen) return;
  const labelInput = root.querySelector<HTMLInputElement>(".label-input");
  const body = resolutionBody(
    chosen.value,
    labelInput?.value ?? "",
    state.decisions.version,
  );
  try {
    state.report = await postResolution(requestId, body);
    state.notice = "";
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      state.notice =
        "The project changed while you decided; the queue was reloaded - please retry.";
    } else if (error instanceof ApiError) {
      state.notice = `${error.code}: ${error.message}`;
    } else {
      state.notice = String(error);
    }
  }
  await refresh();
}

function subscribe(): void {
  const source = new EventSource("/api/events");
  const banner = el("connection-banner");
  source.onopen = () => {
    banner.hidden = true;
  };
  source.onerror = () => {
    banner.hidden = false;
  };
  for (const kind of ["change_applied", "decision_resolved"]) {
    source.addEventListener(kind, () => {
      void refresh();
    });
  }
}

export function start(): void {
  el("decisions").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("button.resolve")) {
      const requestId = target.getAttribute("data-request");
      if (requestId) void resolveClicked(requestId);
    }
  });
  subscribe();
  void refresh();
}

if (typeof document !== "undefined" && document.getElementById("matrices")) {
  start();
}

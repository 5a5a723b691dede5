// Shapes of the service's JSON payloads. The client renders these
// verbatim: every displayed value originates from an API response.

export interface GridHeader {
  id: string;
  kind: string;
  label: string;
}

export interface GridCell {
  row: string;
  col: string;
  semantics: string;
  kind?: string;
  direction?: string | null;
}

export interface MatrixDoc {
  metamodel: string;
  headers: GridHeader[];
  cells: GridCell[];
}

export interface TraceDoc {
  headers_rows: GridHeader[];
  headers_cols: GridHeader[];
  cells: GridCell[];
}

export interface MatricesDoc {
  n: MatrixDoc;
  m: MatrixDoc;
  q: TraceDoc;
}

export interface CandidateDoc {
  key: string;
  description: string;
}

export interface DecisionDoc {
  id: string;
  kind: string;
  side: string;
  subjects: string[];
  prompt: string;
  candidates: CandidateDoc[];
  issued_version: number;
  deferred_cells: [string, string][];
  context: Record<string, string>;
}

export interface DecisionsDoc {
  version: number;
  decisions: DecisionDoc[];
}

export interface OutcomeDoc {
  cell: [string, string];
  candidate: [string, string] | null;
  disposition: "committed" | "dropped" | "pending";
  reason?: string;
  kind?: string;
  semantics?: string;
  note?: string;
}

export interface VerificationDoc {
  synchronized: boolean;
  failures: { category: string; subject: string; detail: string }[];
}

export interface ReportDoc {
  applied: string[];
  propagated: string[];
  outcomes: OutcomeDoc[];
  pending: DecisionDoc[];
  verification: VerificationDoc | null;
}

export interface ResolutionBody {
  choose: string;
  label?: string;
  expected_version?: number;
}

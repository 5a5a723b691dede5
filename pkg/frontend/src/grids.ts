// Matrix grid rendering with change highlighting. Cells show the
// service's semantics text exactly; holes render as a middle dot.

import type { GridCell, GridHeader, MatricesDoc, MatrixDoc, TraceDoc } from "./types.js";

export const EMPTY_CELL = "·";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#039;");
}

export function cellKey(row: string, col: string): string {
  return `${row}|${col}`;
}

export interface GridDiff {
  newRows: Set<string>;
  newCols: Set<string>;
  newCells: Set<string>;
}

interface GridShape {
  rows: GridHeader[];
  cols: GridHeader[];
  cells: GridCell[];
}

export function asShape(doc: MatrixDoc | TraceDoc): GridShape {
  if ("headers" in doc) {
    return { rows: doc.headers, cols: doc.headers, cells: doc.cells };
  }
  return { rows: doc.headers_rows, cols: doc.headers_cols, cells: doc.cells };
}

// What appeared since the previous snapshot: new row/column headers and
// newly filled cells (the grids' change-highlight convention).
export function diffGrid(prev: GridShape | null, next: GridShape): GridDiff {
  const diff: GridDiff = {
    newRows: new Set(),
    newCols: new Set(),
    newCells: new Set(),
  };
  const prevRows = new Set((prev?.rows ?? []).map((h) => h.id));
  const prevCols = new Set((prev?.cols ?? []).map((h) => h.id));
  const prevCells = new Set(
    (prev?.cells ?? []).map((c) => cellKey(c.row, c.col)),
  );
  for (const header of next.rows) {
    if (prev && !prevRows.has(header.id)) diff.newRows.add(header.id);
  }
  for (const header of next.cols) {
    if (prev && !prevCols.has(header.id)) diff.newCols.add(header.id);
  }
  for (const cell of next.cells) {
    if (prev && !prevCells.has(cellKey(cell.row, cell.col))) {
      diff.newCells.add(cellKey(cell.row, cell.col));
    }
  }
  return diff;
}

export function renderGrid(shape: GridShape, diff?: GridDiff): string {
  const byKey = new Map<string, GridCell>();
  for (const cell of shape.cells) byKey.set(cellKey(cell.row, cell.col), cell);
  const head = shape.cols
    .map((c) => {
      const cls = diff?.newCols.has(c.id) ? ' class="hl-new"' : "";
      return `<th${cls} title="${escapeHtml(c.label)}">${escapeHtml(c.id)}</th>`;
    })
    .join("");
  const body = shape.rows
    .map((r) => {
      const rowCls = diff?.newRows.has(r.id) ? ' class="hl-new"' : "";
      const cells = shape.cols
        .map((c) => {
          const key = cellKey(r.id, c.id);
          const cell = byKey.get(key);
          const classes: string[] = [];
          if (cell) classes.push("filled");
          if (diff?.newCells.has(key)) classes.push("hl-cell");
          const cls = classes.length ? ` class="${classes.join(" ")}"` : "";
          return `<td${cls}>${cell ? escapeHtml(cell.semantics) : EMPTY_CELL}</td>`;
        })
        .join("");
      return `<tr><th${rowCls} title="${escapeHtml(r.label)}">${escapeHtml(r.id)}</th>${cells}</tr>`;
    })
    .join("");
  return `<table class="grid"><thead><tr><th></th>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderMatrices(
  doc: MatricesDoc,
  prev: MatricesDoc | null,
): string {
  const sections: [string, MatrixDoc | TraceDoc, MatrixDoc | TraceDoc | null][] = [
    ["N matrix (source model)", doc.n, prev?.n ?? null],
    ["M matrix (target model)", doc.m, prev?.m ?? null],
    ["Q matrix (cross-model trace)", doc.q, prev?.q ?? null],
  ];
  return sections
    .map(([title, grid, prevGrid]) => {
      const shape = asShape(grid);
      const diff = diffGrid(prevGrid ? asShape(prevGrid) : null, shape);
      return `<section class="matrix"><h3>${escapeHtml(title)}</h3>${renderGrid(shape, diff)}</section>`;
    })
    .join("");
}

// Grid contents as row/col/text triples, for parity checks against the
// API document.
export function gridContents(doc: MatrixDoc | TraceDoc): [string, string, string][] {
  return asShape(doc).cells.map((c) => [c.row, c.col, c.semantics]);
}

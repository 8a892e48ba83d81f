/**
 * Ranked bug table. Renders one GET /bugs page exactly as the API returned
 * it; re-sorting, filtering, and paging all go through the handlers so the
 * owner can issue a fresh query (the table never re-orders rows itself).
 */

import type { BugPage, BugSummary, SortKey } from "./api.js";

export const SORT_KEYS: SortKey[] = ["frequency", "uncertainty", "recency"];

export interface BugTableState {
  sort: SortKey;
  status: string | null;
}

export interface BugTableHandlers {
  onOpen(id: string): void;
  onSort(key: SortKey): void;
  onStatus(status: string | null): void;
  onPage(offset: number): void;
}

const STATUSES = [
  "detected",
  "graded",
  "attributed",
  "fix_proposed",
  "fix_applied",
  "verified",
  "recurred",
];

const COLUMNS = [
  "id",
  "utterance",
  "status",
  "uncertainty",
  "frequency",
  "last update",
  "failure reason",
  "suggested action",
];

function cellValues(bug: BugSummary): string[] {
  return [
    bug.id,
    bug.utterance,
    bug.status,
    bug.uncertainty.toFixed(3),
    String(bug.frequency),
    bug.last_update,
    bug.category ?? "",
    bug.suggested_action ?? "",
  ];
}

export function renderBugTable(
  container: HTMLElement,
  page: BugPage,
  state: BugTableState,
  handlers: BugTableHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.classList.add("bug-table");

  const controls = doc.createElement("div");
  controls.className = "table-controls";

  const sortSelect = doc.createElement("select");
  sortSelect.className = "sort-select";
  for (const key of SORT_KEYS) {
    const option = doc.createElement("option");
    option.value = key;
    option.textContent = `sort: ${key}`;
    option.selected = key === state.sort;
    sortSelect.appendChild(option);
  }
  sortSelect.addEventListener("change", () => {
    handlers.onSort(sortSelect.value as SortKey);
  });
  controls.appendChild(sortSelect);

  const statusSelect = doc.createElement("select");
  statusSelect.className = "status-select";
  const all = doc.createElement("option");
  all.value = "";
  all.textContent = "all statuses";
  statusSelect.appendChild(all);
  for (const status of STATUSES) {
    const option = doc.createElement("option");
    option.value = status;
    option.textContent = status;
    option.selected = status === state.status;
    statusSelect.appendChild(option);
  }
  statusSelect.addEventListener("change", () => {
    handlers.onStatus(statusSelect.value === "" ? null : statusSelect.value);
  });
  controls.appendChild(statusSelect);
  container.appendChild(controls);

  if (page.bugs.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty";
    empty.textContent = "No bugs in the ledger.";
    container.appendChild(empty);
    return;
  }

  const table = doc.createElement("table");
  const thead = doc.createElement("thead");
  const headRow = doc.createElement("tr");
  for (const column of COLUMNS) {
    const th = doc.createElement("th");
    th.textContent = column;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = doc.createElement("tbody");
  for (const bug of page.bugs) {
    const tr = doc.createElement("tr");
    tr.className = "bug-row";
    tr.dataset.bugId = bug.id;
    for (const value of cellValues(bug)) {
      const td = doc.createElement("td");
      td.textContent = value;
      tr.appendChild(td);
    }
    tr.addEventListener("click", () => handlers.onOpen(bug.id));
    tbody.appendChild(tr);
  }
  table.appendChild(tbody);
  container.appendChild(table);

  const pager = doc.createElement("div");
  pager.className = "pager";

  const prev = doc.createElement("button");
  prev.textContent = "prev";
  prev.disabled = page.offset === 0;
  prev.addEventListener("click", () => {
    handlers.onPage(Math.max(0, page.offset - page.limit));
  });
  pager.appendChild(prev);

  const label = doc.createElement("span");
  label.className = "page-label";
  const first = page.offset + 1;
  const last = page.offset + page.bugs.length;
  label.textContent = `${first}-${last} of ${page.total}`;
  pager.appendChild(label);

  const next = doc.createElement("button");
  next.textContent = "next";
  next.disabled = page.offset + page.limit >= page.total;
  next.addEventListener("click", () => {
    handlers.onPage(page.offset + page.limit);
  });
  pager.appendChild(next);

  container.appendChild(pager);
}

/** Bug ids in rendered row order, for order assertions against the API. */
export function renderedBugIds(container: HTMLElement): string[] {
  return [...container.querySelectorAll(".bug-row")].map(
    (row) => (row as HTMLElement).dataset.bugId ?? "",
  );
}

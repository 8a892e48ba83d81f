/**
 * Fix-history dashboard over GET /report: per-status counts as a bar
 * chart, headline totals, and the list of bugs whose fixes regressed.
 * Every number is taken verbatim from the report payload.
 */

import type { Report } from "./api.js";

export interface DashboardHandlers {
  onWindow?(start: string | null, end: string | null): void;
}

export function renderDashboard(
  container: HTMLElement,
  report: Report,
  handlers: DashboardHandlers = {},
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.classList.add("dashboard");

  const totals = doc.createElement("div");
  totals.className = "totals";
  const entries: [string, string, number][] = [
    ["total-bugs", "bugs tracked", report.total],
    ["total-fixes", "fixes verified", report.fixes],
    ["total-recurrences", "recurrences", report.recurrences.length],
  ];
  for (const [cls, label, value] of entries) {
    const box = doc.createElement("div");
    box.className = `stat ${cls}`;
    const num = doc.createElement("span");
    num.className = "stat-value";
    num.textContent = String(value);
    const caption = doc.createElement("span");
    caption.className = "stat-label";
    caption.textContent = label;
    box.append(num, caption);
    totals.appendChild(box);
  }
  container.appendChild(totals);

  const windowBar = doc.createElement("form");
  windowBar.className = "window-bar";
  const start = doc.createElement("input");
  start.type = "text";
  start.name = "window_start";
  start.placeholder = "window start (ISO)";
  start.value = report.window_start ?? "";
  const end = doc.createElement("input");
  end.type = "text";
  end.name = "window_end";
  end.placeholder = "window end (ISO)";
  end.value = report.window_end ?? "";
  const apply = doc.createElement("button");
  apply.type = "submit";
  apply.textContent = "apply window";
  windowBar.append(start, end, apply);
  windowBar.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onWindow?.(start.value || null, end.value || null);
  });
  container.appendChild(windowBar);

  const chart = doc.createElement("div");
  chart.className = "status-chart";
  const statuses = Object.keys(report.counts).sort();
  const peak = Math.max(1, ...Object.values(report.counts));
  for (const status of statuses) {
    const count = report.counts[status] ?? 0;
    const row = doc.createElement("div");
    row.className = "chart-row";
    row.dataset.status = status;
    row.dataset.count = String(count);
    const label = doc.createElement("span");
    label.className = "chart-label";
    label.textContent = status;
    const track = doc.createElement("div");
    track.className = "chart-track";
    const bar = doc.createElement("div");
    bar.className = "chart-bar";
    bar.style.width = `${(count / peak) * 100}%`;
    track.appendChild(bar);
    const value = doc.createElement("span");
    value.className = "chart-value";
    value.textContent = String(count);
    row.append(label, track, value);
    chart.appendChild(row);
  }
  container.appendChild(chart);

  if (report.total === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty";
    empty.textContent = "Nothing tracked yet.";
    container.appendChild(empty);
  }

  if (report.recurrences.length > 0) {
    const section = doc.createElement("div");
    section.className = "recurrences";
    const heading = doc.createElement("h3");
    heading.textContent = "recurred after a fix";
    section.appendChild(heading);
    const list = doc.createElement("ul");
    for (const bugId of report.recurrences) {
      const item = doc.createElement("li");
      const link = doc.createElement("a");
      link.href = `#/bugs/${bugId}`;
      link.textContent = bugId;
      item.appendChild(link);
      list.appendChild(item);
    }
    section.appendChild(list);
    container.appendChild(section);
  }
}

/** Status counts as rendered, for equality checks against the report. */
export function renderedCounts(container: HTMLElement): Record<string, number> {
  const counts: Record<string, number> = {};
  for (const row of container.querySelectorAll(".chart-row")) {
    const element = row as HTMLElement;
    counts[element.dataset.status ?? ""] = Number(element.dataset.count ?? "0");
  }
  return counts;
}

/** The three headline numbers as rendered: total, fixes, recurrences. */
export function renderedTotals(
  container: HTMLElement,
): { total: number; fixes: number; recurrences: number } {
  const read = (cls: string): number => {
    const node = container.querySelector(`.${cls} .stat-value`);
    return Number(node?.textContent ?? "0");
  };
  return {
    total: read("total-bugs"),
    fixes: read("total-fixes"),
    recurrences: read("total-recurrences"),
  };
}

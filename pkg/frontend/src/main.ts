/**
 * Entry point: a small hash router over four views (bug table, bug detail
 * with diff, review queue, dashboard). All view state lives in the URL
 * hash, so a reload reproduces the same screen from fresh API reads.
 *
 * Configuration is the API base URL, taken from the ?api= query parameter
 * when present (default http://127.0.0.1:8080).
 */

import { ApiClient, ApiError } from "./api.js";
import type { BugDetail, SortKey } from "./api.js";
import { renderBugTable, SORT_KEYS } from "./bugTable.js";
import { renderDiffView, renderNotFound } from "./diffView.js";
import { renderDashboard } from "./dashboard.js";
import { ReviewQueue } from "./reviewQueue.js";

const PAGE_SIZE = 25;

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? "http://127.0.0.1:8080";
}

const client = new ApiClient(apiBase());

function view(): HTMLElement {
  const node = document.getElementById("view");
  if (!node) throw new Error("missing #view container");
  return node;
}

function showError(error: unknown): void {
  const container = view();
  container.textContent = "";
  const box = document.createElement("div");
  box.className = "error-box";
  if (error instanceof ApiError) {
    box.textContent = `${error.status} ${error.code}: ${error.message}`;
  } else {
    box.textContent = String(error);
  }
  container.appendChild(box);
}

interface BugListParams {
  sort: SortKey;
  status: string | null;
  offset: number;
}

function parseListParams(query: string): BugListParams {
  const params = new URLSearchParams(query);
  const sort = params.get("sort") as SortKey | null;
  return {
    sort: sort && SORT_KEYS.includes(sort) ? sort : "frequency",
    status: params.get("status"),
    offset: Math.max(0, Number(params.get("offset") ?? "0") || 0),
  };
}

function listHash(params: BugListParams): string {
  const query = new URLSearchParams();
  if (params.sort !== "frequency") query.set("sort", params.sort);
  if (params.status) query.set("status", params.status);
  if (params.offset > 0) query.set("offset", String(params.offset));
  const qs = query.toString();
  return qs ? `#/bugs?${qs}` : "#/bugs";
}

async function showBugList(query: string): Promise<void> {
  const params = parseListParams(query);
  const page = await client.listBugs({
    sort: params.sort,
    status: params.status ?? undefined,
    offset: params.offset,
    limit: PAGE_SIZE,
  });
  renderBugTable(view(), page, { sort: params.sort, status: params.status }, {
    onOpen(id) {
      window.location.hash = `#/bugs/${id}`;
    },
    onSort(key) {
      window.location.hash = listHash({ ...params, sort: key, offset: 0 });
    },
    onStatus(status) {
      window.location.hash = listHash({ ...params, status, offset: 0 });
    },
    onPage(offset) {
      window.location.hash = listHash({ ...params, offset });
    },
  });
}

function detailHeader(bug: BugDetail): HTMLElement {
  const header = document.createElement("div");
  header.className = "bug-detail-header";
  const title = document.createElement("h2");
  title.textContent = `${bug.id}: ${bug.utterance}`;
  header.appendChild(title);
  const facts = document.createElement("dl");
  const pairs: [string, string][] = [
    ["status", bug.status],
    ["uncertainty", bug.uncertainty.toFixed(3)],
    ["frequency", String(bug.frequency)],
    ["failure reason", bug.category ?? "not attributed yet"],
    ["suggested action", bug.suggested_action ?? "none"],
  ];
  for (const [term, value] of pairs) {
    const dt = document.createElement("dt");
    dt.textContent = term;
    const dd = document.createElement("dd");
    dd.textContent = value;
    facts.append(dt, dd);
  }
  header.appendChild(facts);
  return header;
}

async function showBugDetail(bugId: string): Promise<void> {
  const container = view();
  let bug: BugDetail;
  try {
    bug = await client.getBug(bugId);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      renderNotFound(container, bugId);
      return;
    }
    throw error;
  }
  container.textContent = "";
  container.appendChild(detailHeader(bug));

  const diffMount = document.createElement("div");
  container.appendChild(diffMount);
  if (bug.has_golden) {
    const diff = await client.getDiff(bugId);
    renderDiffView(diffMount, diff);
  } else {
    const note = document.createElement("p");
    note.className = "no-golden";
    note.textContent = "No golden parse recorded yet, so there is no diff.";
    diffMount.appendChild(note);
  }

  const history = document.createElement("div");
  history.className = "history";
  const heading = document.createElement("h3");
  heading.textContent = "history";
  history.appendChild(heading);
  const list = document.createElement("ol");
  for (const entry of bug.history) {
    const item = document.createElement("li");
    item.textContent = `${entry.timestamp} ${entry.status} (${entry.actor})`;
    list.appendChild(item);
  }
  history.appendChild(list);
  container.appendChild(history);
}

async function showQueue(): Promise<void> {
  const queue = new ReviewQueue(view(), {
    pendingProposals: async () =>
      (await client.listProposals("pending")).proposals,
    review: (id, action) => client.review(id, action),
  });
  await queue.load();
}

async function showDashboard(query: string): Promise<void> {
  const params = new URLSearchParams(query);
  const windowStart = params.get("window_start") ?? undefined;
  const windowEnd = params.get("window_end") ?? undefined;
  const report = await client.report({
    window_start: windowStart,
    window_end: windowEnd,
  });
  const container = view();
  renderDashboard(container, report, {
    onWindow(start, end) {
      const next = new URLSearchParams();
      if (start) next.set("window_start", start);
      if (end) next.set("window_end", end);
      const qs = next.toString();
      window.location.hash = qs ? `#/dashboard?${qs}` : "#/dashboard";
    },
  });

  const actions = document.createElement("div");
  actions.className = "pipeline-actions";
  const retrain = document.createElement("button");
  retrain.textContent = "retrain model";
  retrain.addEventListener("click", () => {
    void client
      .retrain()
      .then((result) => {
        retrain.textContent =
          `retrained: ${result.examples} examples, ` +
          `${result.exact_entries} exact, ${result.patterns} patterns`;
      })
      .catch(showError);
  });
  const verify = document.createElement("button");
  verify.textContent = "run verification sweep";
  verify.addEventListener("click", () => {
    void client
      .verify()
      .then((result) => {
        verify.textContent =
          `swept ${result.swept}: ${result.verified.length} verified, ` +
          `${result.recurred.length} recurred`;
      })
      .catch(showError);
  });
  actions.append(retrain, verify);
  container.appendChild(actions);
}

async function route(): Promise<void> {
  const hash = window.location.hash || "#/bugs";
  const [path, query = ""] = hash.replace(/^#\/?/, "").split("?", 2);
  const segments = (path ?? "").split("/").filter((s) => s.length > 0);

  for (const link of document.querySelectorAll("nav a")) {
    const target = link.getAttribute("href") ?? "";
    link.classList.toggle(
      "active",
      target.replace(/^#\/?/, "") === (segments[0] ?? "bugs"),
    );
  }

  if (segments.length === 0 || segments[0] === "bugs") {
    if (segments.length > 1) {
      await showBugDetail(segments[1]!);
    } else {
      await showBugList(query);
    }
  } else if (segments[0] === "queue") {
    await showQueue();
  } else if (segments[0] === "dashboard") {
    await showDashboard(query);
  } else {
    renderNotFound(view(), path ?? "");
  }
}

function start(): void {
  window.addEventListener("hashchange", () => {
    route().catch(showError);
  });
  route().catch(showError);
}

start();

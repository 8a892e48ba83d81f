import { beforeEach, describe, expect, it, vi } from "vitest";

import type { SortKey } from "../src/api.js";
import {
  renderBugTable,
  renderedBugIds,
  type BugTableHandlers,
} from "../src/bugTable.js";
import { bugPage, bugSummary, TWO_BUG_PAGE } from "./fixtures.js";

function handlers(): BugTableHandlers {
  return {
    onOpen: vi.fn(),
    onSort: vi.fn(),
    onStatus: vi.fn(),
    onPage: vi.fn(),
  };
}

describe("renderBugTable", () => {
  let container: HTMLElement;

  beforeEach(() => {
    container = document.createElement("div");
    document.body.replaceChildren(container);
  });

  it("renders rows in exactly the order the API returned", () => {
    renderBugTable(
      container,
      TWO_BUG_PAGE,
      { sort: "frequency", status: null },
      handlers(),
    );
    expect(renderedBugIds(container)).toEqual(["bug-000002", "bug-000001"]);
    const freqs = [...container.querySelectorAll(".bug-row")].map(
      (row) => row.children[4]?.textContent,
    );
    expect(freqs).toEqual(["9", "5"]);
  });

  it("never re-orders rows itself, even when handed unsorted data", () => {
    const shuffled = bugPage([
      bugSummary({ id: "bug-000001", frequency: 5 }),
      bugSummary({ id: "bug-000003", frequency: 7 }),
      bugSummary({ id: "bug-000002", frequency: 9 }),
    ]);
    renderBugTable(
      container,
      shuffled,
      { sort: "frequency", status: null },
      handlers(),
    );
    expect(renderedBugIds(container)).toEqual([
      "bug-000001",
      "bug-000003",
      "bug-000002",
    ]);
  });

  it("shows an empty state message on an empty ledger", () => {
    renderBugTable(
      container,
      bugPage([]),
      { sort: "frequency", status: null },
      handlers(),
    );
    expect(container.querySelector("table")).toBeNull();
    expect(container.querySelector(".empty")?.textContent).toBe(
      "No bugs in the ledger.",
    );
  });

  it("surfaces failure reason and suggested action columns", () => {
    renderBugTable(
      container,
      TWO_BUG_PAGE,
      { sort: "frequency", status: null },
      handlers(),
    );
    const cells = [...container.querySelectorAll(".bug-row")][0]!.children;
    expect(cells[6]?.textContent).toBe("low_training_data");
    expect(cells[7]?.textContent).toBe("Generate Data");
  });

  it("reports row clicks through onOpen", () => {
    const h = handlers();
    renderBugTable(container, TWO_BUG_PAGE, { sort: "frequency", status: null }, h);
    (container.querySelector(".bug-row") as HTMLElement).click();
    expect(h.onOpen).toHaveBeenCalledWith("bug-000002");
  });

  it("issues a new query when the sort key changes", () => {
    const h = handlers();
    renderBugTable(container, TWO_BUG_PAGE, { sort: "frequency", status: null }, h);
    const select = container.querySelector(".sort-select") as HTMLSelectElement;
    select.value = "uncertainty" satisfies SortKey;
    select.dispatchEvent(new Event("change"));
    expect(h.onSort).toHaveBeenCalledWith("uncertainty");
  });

  it("pages forward and back by the page limit", () => {
    const h = handlers();
    const page = {
      ...bugPage(
        [bugSummary({ id: "bug-000030" })],
        80,
      ),
      offset: 25,
      limit: 25,
    };
    renderBugTable(container, page, { sort: "frequency", status: null }, h);
    const [prev, next] = container.querySelectorAll(".pager button");
    (next as HTMLButtonElement).click();
    expect(h.onPage).toHaveBeenCalledWith(50);
    (prev as HTMLButtonElement).click();
    expect(h.onPage).toHaveBeenCalledWith(0);
  });

  it("disables paging at the edges", () => {
    renderBugTable(
      container,
      TWO_BUG_PAGE,
      { sort: "frequency", status: null },
      handlers(),
    );
    const [prev, next] = container.querySelectorAll(".pager button");
    expect((prev as HTMLButtonElement).disabled).toBe(true);
    expect((next as HTMLButtonElement).disabled).toBe(true);
  });
});

/**
 * Proposal review queue with optimistic updates.
 *
 * Accepting or rejecting removes the card immediately and fires exactly one
 * POST /proposals/{id}/review; a 409 (someone already reviewed it) rolls
 * the card back and raises a conflict toast. Examples are listed on each
 * card for inspection, but review happens per proposal because that is the
 * service's unit of acceptance.
 */

import { ApiError } from "./api.js";
import type { Proposal, ReviewAction, ReviewResult } from "./api.js";

export interface ReviewApi {
  pendingProposals(): Promise<Proposal[]>;
  review(id: string, action: ReviewAction): Promise<ReviewResult>;
}

export class ReviewQueue {
  applied = 0;
  rejected = 0;

  private proposals: Proposal[] = [];
  private readonly doc: Document;

  constructor(
    private readonly container: HTMLElement,
    private readonly api: ReviewApi,
    private readonly onReviewed?: (result: ReviewResult) => void,
  ) {
    this.doc = container.ownerDocument;
  }

  async load(): Promise<void> {
    // copy so optimistic splices never alias the caller's array
    this.proposals = [...(await this.api.pendingProposals())];
    this.render();
  }

  pendingCount(): number {
    return this.proposals.length;
  }

  private async act(id: string, action: ReviewAction): Promise<void> {
    const index = this.proposals.findIndex((p) => p.id === id);
    if (index < 0) return;

    // optimistic: drop the card and bump the counter before the API answers
    const [removed] = this.proposals.splice(index, 1);
    if (action === "accept") {
      this.applied += 1;
    } else {
      this.rejected += 1;
    }
    this.render();

    try {
      const result = await this.api.review(id, action);
      this.toast(
        `${result.proposal.id} ${action}ed: bug ${result.bug_id} is now ` +
          `${result.bug_status}, training set has ${result.training_size} examples`,
        "ok",
      );
      this.onReviewed?.(result);
    } catch (error) {
      // roll the optimistic update back
      if (action === "accept") {
        this.applied -= 1;
      } else {
        this.rejected -= 1;
      }
      if (removed) this.proposals.splice(index, 0, removed);
      this.render();
      if (error instanceof ApiError && error.status === 409) {
        this.toast(`conflict: ${error.message}`, "conflict");
      } else {
        this.toast(`review failed: ${String(error)}`, "error");
      }
    }
  }

  private toast(message: string, kind: "ok" | "conflict" | "error"): void {
    const region = this.container.querySelector(".toasts");
    if (!region) return;
    const note = this.doc.createElement("div");
    note.className = `toast toast-${kind}`;
    note.textContent = message;
    region.appendChild(note);
  }

  private render(): void {
    const doc = this.doc;
    this.container.textContent = "";
    this.container.classList.add("review-queue");

    const counters = doc.createElement("div");
    counters.className = "counters";
    const pending = doc.createElement("span");
    pending.className = "pending-count";
    pending.textContent = `pending: ${this.proposals.length}`;
    const applied = doc.createElement("span");
    applied.className = "applied-count";
    applied.textContent = `applied: ${this.applied}`;
    const rejected = doc.createElement("span");
    rejected.className = "rejected-count";
    rejected.textContent = `rejected: ${this.rejected}`;
    counters.append(pending, applied, rejected);
    this.container.appendChild(counters);

    const toasts = doc.createElement("div");
    toasts.className = "toasts";
    this.container.appendChild(toasts);

    if (this.proposals.length === 0) {
      const empty = doc.createElement("p");
      empty.className = "empty";
      empty.textContent = "No proposals waiting for review.";
      this.container.appendChild(empty);
      return;
    }

    for (const proposal of this.proposals) {
      this.container.appendChild(this.card(proposal));
    }
  }

  private card(proposal: Proposal): HTMLElement {
    const doc = this.doc;
    const card = doc.createElement("article");
    card.className = "proposal-card";
    card.dataset.proposalId = proposal.id;

    const head = doc.createElement("header");
    const title = doc.createElement("strong");
    title.textContent = proposal.id;
    const meta = doc.createElement("span");
    meta.className = "meta";
    meta.textContent = `${proposal.strategy}, ${proposal.example_count} examples`;
    const source = doc.createElement("a");
    source.className = "source-bug";
    source.href = `#/bugs/${proposal.source_bug_id}`;
    source.textContent = proposal.source_bug_id;
    head.append(title, meta, source);
    card.appendChild(head);

    const list = doc.createElement("ul");
    list.className = "examples";
    for (const example of proposal.examples) {
      const item = doc.createElement("li");
      item.className = "example";
      const utterance = doc.createElement("span");
      utterance.className = "example-utterance";
      utterance.textContent = example.utterance;
      const frame = doc.createElement("code");
      frame.className = "example-frame";
      frame.textContent = example.frame;
      const weight = doc.createElement("span");
      weight.className = "example-weight";
      weight.textContent = `w=${example.weight}`;
      item.append(utterance, frame, weight);
      list.appendChild(item);
    }
    card.appendChild(list);

    const actions = doc.createElement("div");
    actions.className = "actions";
    const accept = doc.createElement("button");
    accept.className = "accept";
    accept.textContent = "accept";
    accept.addEventListener("click", () => {
      void this.act(proposal.id, "accept");
    });
    const reject = doc.createElement("button");
    reject.className = "reject";
    reject.textContent = "reject";
    reject.addEventListener("click", () => {
      void this.act(proposal.id, "reject");
    });
    actions.append(accept, reject);
    card.appendChild(actions);
    return card;
  }
}

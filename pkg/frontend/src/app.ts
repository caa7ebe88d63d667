// Run view controller: wires the API client, polling, review form, and
// edit/resume into a root element. The page is stateless beyond drafts:
// every refresh re-reads the persisted run from the GET endpoints.

import { ApiClient, ApiError, Manifest, StepResponse } from "./api.js";
import { FeedbackController } from "./forms.js";
import { lintArtifact } from "./lint.js";
import { awaitingCard, projectRunView } from "./model.js";
import { pollRun } from "./poll.js";
import {
  renderCards,
  renderNotFound,
  renderRetryBanner,
  renderStatusBar,
} from "./render.js";

export class RunPage {
  private feedback = new FeedbackController();
  private poller: { stop(): void } | null = null;

  constructor(
    readonly root: HTMLElement,
    readonly client: ApiClient,
    readonly runId: string,
  ) {}

  async load(): Promise<void> {
    try {
      const manifest = await this.client.getRun(this.runId);
      await this.render(manifest);
      this.watch(manifest);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.root.replaceChildren(renderNotFound(this.runId));
        return;
      }
      throw err;
    }
  }

  dispose(): void {
    this.poller?.stop();
    this.poller = null;
  }

  private watch(manifest: Manifest): void {
    this.poller?.stop();
    if (manifest.status !== "running") return;
    this.poller = pollRun(
      this.client,
      this.runId,
      (updated) => {
        void this.render(updated);
        if (updated.status !== "running") this.poller?.stop();
        if (updated.status === "awaiting-human-feedback" || updated.status === "done") {
          this.watch(updated);
        }
      },
      (down) => this.toggleRetryBanner(down),
    );
  }

  private toggleRetryBanner(down: boolean): void {
    const existing = this.root.querySelector("#retry-banner");
    if (down && !existing) this.root.prepend(renderRetryBanner());
    if (!down && existing) existing.remove();
  }

  async render(manifest: Manifest): Promise<void> {
    const view = projectRunView(manifest);
    awaitingCard(view); // asserts the single-awaiting invariant
    const steps = new Map<number, StepResponse>();
    for (const card of view.cards) {
      if (card.status === "pending" || card.status === "skipped") continue;
      try {
        steps.set(card.number, await this.client.getStep(this.runId, card.number));
      } catch (err) {
        if (err instanceof ApiError && (err.status === 409 || err.status === 404)) {
          continue; // not reached yet
        }
        if (err instanceof ApiError && err.status === 0) {
          this.toggleRetryBanner(true);
          return;
        }
        throw err;
      }
    }

    const callbacks = {
      onApprove: (step: number, pending: import("./api.js").PendingReview) => {
        this.feedback.markConsumed(step, pending);
        // Optimistic: show the card as done immediately, reconcile on poll.
        this.optimisticallyComplete(step);
        void this.submit(step, { approve: true });
      },
      onFeedback: (step: number, pending: import("./api.js").PendingReview, text: string) => {
        this.feedback.markConsumed(step, pending);
        void this.submit(step, { text });
      },
      onResume: (step: number, artifact: string) => {
        void this.resume(step, artifact);
      },
      lint: lintArtifact,
      feedbackConsumed: (step: number, pending: import("./api.js").PendingReview) =>
        this.feedback.isConsumed(step, pending),
    };

    const container = document.createElement("div");
    container.className = "run-page";
    const title = document.createElement("h2");
    title.textContent = `Run ${manifest.run_id}`;
    const description = document.createElement("p");
    description.className = "muted";
    description.textContent = manifest.description;
    container.append(title, description, renderStatusBar(manifest));
    container.append(renderCards(view, steps, callbacks));
    this.root.replaceChildren(container);
  }

  private optimisticallyComplete(step: number): void {
    const card = this.root.querySelector(`.card[data-step="${step}"]`);
    if (card) {
      card.classList.remove("card-awaiting-you");
      card.classList.add("card-done");
      const status = card.querySelector(".card-status");
      if (status) status.textContent = "submitted";
    }
  }

  private async submit(step: number, body: { approve?: boolean; text?: string }): Promise<void> {
    try {
      const manifest = await this.client.submitFeedback(this.runId, step, body);
      await this.render(manifest);
      this.watch(manifest);
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 422)) {
        this.showInlineError(step, `${err.code}: ${err.message}`);
        return;
      }
      throw err;
    }
  }

  private async resume(step: number, artifact: string): Promise<void> {
    try {
      const manifest = await this.client.resume(this.runId, step, artifact);
      this.feedback.reset(); // downstream reviews start over after an edit
      await this.render(manifest);
      this.watch(manifest);
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.showInlineError(step, `${err.code}: ${err.message}`);
        return;
      }
      throw err;
    }
  }

  private showInlineError(step: number, message: string): void {
    const card = this.root.querySelector(`.card[data-step="${step}"]`);
    const slot = card?.querySelector(".inline-error");
    if (slot) {
      slot.textContent = message;
      return;
    }
    const banner = document.createElement("div");
    banner.className = "inline-error";
    banner.textContent = message;
    (card ?? this.root).append(banner);
  }
}

// Draft state: which review units were already submitted (the client
// side of the one-round-per-step rule) and in-flight feedback text.

import type { PendingReview } from "./api.js";

export function reviewKey(step: number, pending: PendingReview): string {
  return `${step}:${pending.action_name ?? "artifact"}`;
}

export class FeedbackController {
  private consumed = new Set<string>();

  isConsumed(step: number, pending: PendingReview): boolean {
    return this.consumed.has(reviewKey(step, pending));
  }

  markConsumed(step: number, pending: PendingReview): void {
    this.consumed.add(reviewKey(step, pending));
  }

  reset(): void {
    this.consumed.clear();
  }
}

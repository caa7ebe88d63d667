import { describe, expect, it } from "vitest";

import type { Manifest } from "../src/api.js";
import { awaitingCard, projectRunView } from "../src/model.js";

function manifest(overrides: Partial<Manifest>): Manifest {
  return {
    run_id: "r1",
    created: "2026-01-01T00:00:00Z",
    description: "demo",
    status: "running",
    current_step: 1,
    error: null,
    degraded: false,
    files: {},
    config: { start_step: "type_extraction" },
    ...overrides,
  };
}

describe("projectRunView", () => {
  it("marks cards around the current step", () => {
    const view = projectRunView(manifest({ status: "running", current_step: 3 }));
    expect(view.cards.map((c) => c.status)).toEqual([
      "done", "done", "running", "pending", "pending", "pending",
    ]);
  });

  it("marks exactly one awaiting card", () => {
    const view = projectRunView(
      manifest({ status: "awaiting-human-feedback", current_step: 2 }),
    );
    expect(view.cards[1].status).toBe("awaiting-you");
    expect(awaitingCard(view)?.number).toBe(2);
    expect(view.cards.filter((c) => c.status === "awaiting-you")).toHaveLength(1);
  });

  it("marks everything done on a finished run", () => {
    const view = projectRunView(manifest({ status: "done", current_step: 6 }));
    expect(new Set(view.cards.map((c) => c.status))).toEqual(new Set(["done"]));
  });

  it("skips steps before the start step (domain reuse)", () => {
    const view = projectRunView(
      manifest({ status: "done", current_step: 6, config: { start_step: "task_extraction" } }),
    );
    expect(view.cards.map((c) => c.status)).toEqual([
      "skipped", "skipped", "skipped", "skipped", "done", "done",
    ]);
  });

  it("flags the failing step", () => {
    const view = projectRunView(manifest({ status: "failed", current_step: 4 }));
    expect(view.cards[3].status).toBe("failed");
    expect(view.cards[4].status).toBe("pending");
  });
});

// Pure projection of a run manifest into the card strip the UI renders.

import type { Manifest } from "./api.js";

export const STEP_TITLES = [
  "Type Extraction",
  "Hierarchy Construction",
  "Action Extraction",
  "Action Construction",
  "Task Extraction",
  "Planning",
] as const;

export const STEP_IDS = [
  "type_extraction",
  "hierarchy_construction",
  "action_extraction",
  "action_construction",
  "task_extraction",
  "planning",
] as const;

export type CardStatus =
  | "pending"
  | "running"
  | "done"
  | "awaiting-you"
  | "failed"
  | "skipped";

export interface StepCard {
  number: number;
  id: string;
  title: string;
  status: CardStatus;
}

export interface RunView {
  manifest: Manifest;
  cards: StepCard[];
}

export function projectRunView(manifest: Manifest): RunView {
  const start = STEP_IDS.indexOf(
    manifest.config.start_step as (typeof STEP_IDS)[number],
  ) + 1;
  const cards: StepCard[] = [];
  for (let number = 1; number <= 6; number += 1) {
    let status: CardStatus;
    if (number < start) {
      status = "skipped";
    } else if (manifest.status === "done") {
      status = "done";
    } else if (number < manifest.current_step) {
      status = "done";
    } else if (number > manifest.current_step) {
      status = "pending";
    } else if (manifest.status === "awaiting-human-feedback") {
      status = "awaiting-you";
    } else if (manifest.status === "failed") {
      status = "failed";
    } else {
      status = "running";
    }
    cards.push({
      number,
      id: STEP_IDS[number - 1],
      title: STEP_TITLES[number - 1],
      status,
    });
  }
  return { manifest, cards };
}

export function awaitingCard(view: RunView): StepCard | null {
  const cards = view.cards.filter((c) => c.status === "awaiting-you");
  // Invariant: at most one card awaits the reviewer at any time.
  if (cards.length > 1) {
    throw new Error("more than one card is awaiting review");
  }
  return cards[0] ?? null;
}

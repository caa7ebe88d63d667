// DOM rendering for the run view: the card strip, artifact views,
// review form, and edit/resume affordances. No framework; plain nodes.

import type { Manifest, PendingReview, StepRecord, StepResponse } from "./api.js";
import { highlightPddl } from "./highlight.js";
import type { RunView, StepCard } from "./model.js";

export interface CardCallbacks {
  onApprove(step: number, pending: PendingReview): void;
  onFeedback(step: number, pending: PendingReview, text: string): void;
  onResume(step: number, artifact: string): void;
  lint(step: number, text: string): { ok: boolean; message: string };
  feedbackConsumed(step: number, pending: PendingReview): boolean;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function renderStatusBar(manifest: Manifest): HTMLElement {
  const bar = el("div", `status-bar status-${manifest.status}`);
  bar.append(el("span", "status-label", manifest.status));
  if (manifest.degraded) bar.append(el("span", "badge badge-warn", "degraded"));
  if (manifest.error) bar.append(el("span", "status-error", manifest.error));
  return bar;
}

export function renderRetryBanner(): HTMLElement {
  const banner = el("div", "retry-banner", "Connection lost; retrying…");
  banner.id = "retry-banner";
  return banner;
}

export function renderNotFound(runId: string): HTMLElement {
  const box = el("div", "not-found");
  box.append(el("h2", "", "Run not found"));
  box.append(el("p", "", `No run named '${runId}' exists on this server.`));
  return box;
}

// ---------------------------------------------------------------------------
// Artifact views


function renderTypeList(record: StepRecord): HTMLElement {
  const list = el("ul", "type-list");
  const entries = (record.artifact?.entries ?? []) as Array<[string, string]>;
  for (const [name, desc] of entries) {
    const item = el("li");
    item.append(el("strong", "", name));
    if (desc) item.append(el("span", "muted", ` — ${desc}`));
    list.append(item);
  }
  return list;
}

function renderHierarchyTree(record: StepRecord): HTMLElement {
  const parent = (record.artifact?.parent ?? {}) as Record<string, string>;
  const description = (record.artifact?.description ?? {}) as Record<string, string>;
  const children = new Map<string, string[]>();
  for (const [child, par] of Object.entries(parent)) {
    const siblings = children.get(par) ?? [];
    siblings.push(child);
    children.set(par, siblings);
  }
  function subtree(name: string): HTMLElement {
    const list = el("ul", "tree");
    for (const child of children.get(name) ?? []) {
      const item = el("li");
      item.append(el("strong", "", child));
      const desc = description[child];
      if (desc) item.append(el("span", "muted", ` — ${desc}`));
      item.append(subtree(child));
      list.append(item);
    }
    return list;
  }
  const root = el("div", "hierarchy");
  root.append(el("div", "muted", "object"));
  root.append(subtree("object"));
  return root;
}

function renderActionCards(record: StepRecord): HTMLElement {
  const wrap = el("div", "action-cards");
  const actions = (record.artifact?.actions ?? []) as Array<{
    name: string;
    description: string;
    usage: string;
  }>;
  for (const action of actions) {
    const card = el("div", "action-card");
    card.append(el("h4", "", action.name));
    card.append(el("p", "", action.description));
    card.append(el("p", "muted", `e.g. ${action.usage}`));
    wrap.append(card);
  }
  return wrap;
}

function renderPddl(text: string): HTMLElement {
  const pre = el("pre", "pddl");
  pre.innerHTML = highlightPddl(text);
  return pre;
}

function renderConstruction(record: StepRecord): HTMLElement {
  const wrap = el("div");
  if (record.artifact?.domain_pddl) {
    wrap.append(renderPddl(record.artifact.domain_pddl as string));
  }
  const passes = record.construction?.passes ?? [];
  const second = passes[1]?.actions ?? [];
  for (const entry of second) {
    if (entry.feedback && entry.feedback.status === "revised") {
      const note = el("div", "feedback-note");
      note.append(el("strong", "", `${entry.name}: revised after feedback`));
      if (entry.feedback.text) note.append(el("p", "muted", entry.feedback.text));
      const pre = el("pre", "pddl artifact-block", entry.block);
      note.append(pre);
      wrap.append(note);
    }
    if (entry.accepted_flawed) {
      wrap.append(el("div", "badge badge-warn", `${entry.name}: accepted flawed`));
    }
  }
  return wrap;
}

function renderPlan(record: StepRecord): HTMLElement {
  const wrap = el("div");
  const outcome = record.artifact?.outcome;
  if (outcome === "plan") {
    const header = el("div", "plan-header");
    header.append(el("span", "badge badge-ok", "validated plan"));
    header.append(
      el("span", "muted", ` cost ${String(record.artifact?.cost ?? "?")}`),
    );
    wrap.append(header);
    const list = el("ol", "plan-steps");
    for (const line of String(record.artifact?.plan ?? "").split("\n")) {
      if (line.startsWith("(")) list.append(el("li", "", line));
    }
    wrap.append(list);
  } else {
    wrap.append(el("div", "banner banner-unsolvable", "No plan found"));
  }
  return wrap;
}

export function renderArtifact(record: StepRecord): HTMLElement {
  switch (record.number) {
    case 1:
      return renderTypeList(record);
    case 2:
      return renderHierarchyTree(record);
    case 3:
      return renderActionCards(record);
    case 4:
      return renderConstruction(record);
    case 5:
      return record.artifact?.problem_pddl
        ? renderPddl(record.artifact.problem_pddl as string)
        : el("pre", "pddl artifact-block", record.artifact_text);
    case 6:
      return renderPlan(record);
    default:
      return el("pre", "", record.artifact_text);
  }
}

// ---------------------------------------------------------------------------
// Review form and editing


export function renderReviewForm(
  card: StepCard,
  pending: PendingReview,
  callbacks: CardCallbacks,
): HTMLElement {
  const form = el("div", "review-form");
  form.append(el("h4", "", pending.action_name
    ? `Review action '${pending.action_name}'`
    : `Review ${card.title}`));
  form.append(el("pre", "pddl artifact-block", pending.artifact_text));

  if (callbacks.feedbackConsumed(card.number, pending)) {
    form.append(
      el("div", "notice", "One feedback round per step: this review is already submitted."),
    );
    return form;
  }

  const controls = el("div", "review-controls");
  const approve = el("button", "btn btn-approve", "Approve");
  approve.addEventListener("click", () => {
    approve.disabled = true;
    send.disabled = true;
    callbacks.onApprove(card.number, pending);
  });
  const textarea = el("textarea", "feedback-text");
  textarea.placeholder = "Feedback for one regeneration… (or approve as is)";
  const send = el("button", "btn btn-feedback", "Send feedback");
  const error = el("div", "inline-error");
  send.addEventListener("click", () => {
    const text = textarea.value.trim();
    if (!text) {
      error.textContent = "Feedback text must not be empty.";
      return;
    }
    approve.disabled = true;
    send.disabled = true;
    callbacks.onFeedback(card.number, pending, text);
  });
  controls.append(approve, send);
  form.append(controls, textarea, error);
  return form;
}

export function renderEditControls(
  card: StepCard,
  record: StepRecord,
  callbacks: CardCallbacks,
): HTMLElement {
  const wrap = el("div", "edit-wrap");
  const toggle = el("button", "btn btn-edit", "Edit");
  const editor = el("div", "editor hidden");
  const textarea = el("textarea", "edit-text");
  textarea.value =
    (record.artifact?.domain_pddl as string | undefined) ??
    (record.artifact?.problem_pddl as string | undefined) ??
    record.artifact_text;
  const error = el("div", "inline-error");
  const submit = el("button", "btn btn-resume", "Resume from here");
  submit.addEventListener("click", () => {
    const lint = callbacks.lint(card.number, textarea.value);
    if (!lint.ok) {
      error.textContent = lint.message;
      return; // lint failure: no request leaves the browser
    }
    error.textContent = "";
    submit.disabled = true;
    callbacks.onResume(card.number, textarea.value);
  });
  toggle.addEventListener("click", () => editor.classList.toggle("hidden"));
  editor.append(textarea, error, submit);
  wrap.append(toggle, editor);
  return wrap;
}

// ---------------------------------------------------------------------------
// The card strip


export function renderCards(
  view: RunView,
  steps: Map<number, StepResponse>,
  callbacks: CardCallbacks,
): HTMLElement {
  const strip = el("div", "cards");
  for (const card of view.cards) {
    const node = el("section", `card card-${card.status}`);
    node.dataset.step = String(card.number);
    const head = el("header", "card-head");
    head.append(el("span", "card-number", String(card.number)));
    head.append(el("h3", "", card.title));
    head.append(el("span", `card-status card-status-${card.status}`, card.status));
    node.append(head);

    const detail = steps.get(card.number);
    const record = detail?.step ?? null;
    if (record?.complete) {
      node.append(renderArtifact(record));
      if (record.feedback && record.feedback.status === "revised") {
        const note = el("div", "feedback-note");
        note.append(el("strong", "", "Revised after feedback"));
        if (record.feedback.text) note.append(el("p", "muted", record.feedback.text));
        node.append(note);
      }
      if (card.number <= 5 && view.manifest.status !== "running") {
        node.append(renderEditControls(card, record, callbacks));
      }
    }
    if (card.status === "awaiting-you" && view.manifest.pending_review) {
      node.append(renderReviewForm(card, view.manifest.pending_review, callbacks));
    }
    for (const old of detail?.superseded ?? []) {
      const dimmed = el("details", "superseded");
      dimmed.append(el("summary", "", "superseded version"));
      dimmed.append(el("pre", "pddl artifact-block", old.artifact_text));
      node.append(dimmed);
    }
    strip.append(node);
  }
  return strip;
}

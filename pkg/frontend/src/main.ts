// Entry point: hash routing between the runs list and a run view.

import { ApiClient } from "./api.js";
import { RunPage } from "./app.js";

const client = new ApiClient("");

async function renderIndex(root: HTMLElement): Promise<void> {
  const page = document.createElement("div");
  page.className = "index-page";
  const heading = document.createElement("h2");
  heading.textContent = "Runs";
  page.append(heading);

  const form = document.createElement("div");
  form.className = "create-form";
  const textarea = document.createElement("textarea");
  textarea.placeholder = "Describe the task in a few sentences…";
  const feedback = document.createElement("select");
  for (const source of ["human", "llm", "none"]) {
    const option = document.createElement("option");
    option.value = source;
    option.textContent = `feedback: ${source}`;
    feedback.append(option);
  }
  const button = document.createElement("button");
  button.className = "btn";
  button.textContent = "Start run";
  button.addEventListener("click", async () => {
    if (!textarea.value.trim()) return;
    const manifest = await client.createRun({
      description: textarea.value,
      feedback: feedback.value,
    });
    window.location.hash = `#/runs/${manifest.run_id}`;
  });
  form.append(textarea, feedback, button);
  page.append(form);

  const list = document.createElement("ul");
  list.className = "run-list";
  const { runs } = await client.listRuns();
  for (const run of runs) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = `#/runs/${run.run_id}`;
    link.textContent = `${run.run_id} — ${run.status}`;
    const desc = document.createElement("span");
    desc.className = "muted";
    desc.textContent = ` ${run.description.slice(0, 80)}`;
    item.append(link, desc);
    list.append(item);
  }
  page.append(list);
  root.replaceChildren(page);
}

async function route(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const match = window.location.hash.match(/^#\/runs\/([A-Za-z0-9_-]+)/);
  if (match) {
    await new RunPage(root, client, match[1]).load();
  } else {
    await renderIndex(root);
  }
}

window.addEventListener("hashchange", () => void route());
document.addEventListener("DOMContentLoaded", () => void route());

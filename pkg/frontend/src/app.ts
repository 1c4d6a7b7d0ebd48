// DOM shell: wires the query box, result cards, pose editor, and history
// controls to the pure state module. All ranking comes from the service.

import { CategoryInfo, EntryDetail, ExplorerClient, LabelMode, RankedHit } from "./api.js";
import {
  emptyEditor,
  clearJoints,
  EditorState,
  nextJointName,
  placeJoint,
  toKeypoints,
  undoJoint,
} from "./editor.js";
import { renderPose } from "./skeleton.js";
import {
  canGoBack,
  ExplorerState,
  goBack,
  initialState,
  pivotQuery,
  Query,
  QuerySequencer,
  submitQuery,
} from "./state.js";

const client = new ExplorerClient("");
const sequencer = new QuerySequencer();

let state: ExplorerState = initialState();
let category: CategoryInfo | null = null;
let editor: EditorState = emptyEditor([]);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

function queryLabel(query: Query | null): string {
  if (query === null) return "none";
  return query.kind === "person" ? query.personId : "sketched pose";
}

async function renderResults(): Promise<void> {
  const box = el<HTMLDivElement>("results");
  const hits = state.results?.hits ?? [];
  el<HTMLSpanElement>("current-query").textContent = queryLabel(state.currentQuery);
  el<HTMLButtonElement>("back-btn").disabled = !canGoBack(state);
  el<HTMLDivElement>("error-box").textContent = state.error ?? "";

  if (hits.length === 0) {
    box.innerHTML = state.results ? "<p>No neighbors found.</p>" : "";
    return;
  }

  // Thumbnails need each entry's keypoints; fetch them alongside.
  const details = await Promise.all(hits.map((h) => client.entry(h.person_id).catch(() => null)));
  box.innerHTML = hits.map((hit, i) => card(hit, details[i] ?? null)).join("");
  box.querySelectorAll<HTMLElement>("[data-person]").forEach((node) => {
    node.addEventListener("click", () => {
      const id = node.dataset["person"];
      if (id) void runQuery({ kind: "person", personId: id });
    });
  });
}

function card(hit: RankedHit, detail: EntryDetail | null): string {
  const pose = detail && category
    ? renderPose(detail.keypoints, category.skeleton, { size: 120, margin: 10 })
    : "";
  return `
    <div class="card" data-person="${escapeHtml(hit.person_id)}">
      ${pose}
      <div class="card-meta">
        <span class="rank">#${hit.rank}</span>
        <strong>${escapeHtml(hit.person_id)}</strong>
        <span class="score">${hit.score.toFixed(4)}</span>
        <span>${escapeHtml(hit.character)} / ${escapeHtml(hit.scene)}</span>
      </div>
    </div>`;
}

async function runQuery(query: Query): Promise<void> {
  state = { ...state, k: readK(), mode: readMode() };
  const next = await sequencer.run(() => submitQuery(state, query, client));
  if (next === null) return; // superseded by a newer submission
  state = next;
  await renderResults();
}

function readK(): number {
  const value = parseInt(el<HTMLInputElement>("k-input").value, 10);
  return Number.isFinite(value) && value > 0 ? value : 5;
}

function readMode(): LabelMode {
  return el<HTMLSelectElement>("mode-select").value === "scene" ? "scene" : "character";
}

// ---- pose editor ----------------------------------------------------

const EDITOR_SIZE = 240;

function editorStatus(): string {
  const name = nextJointName(editor);
  if (name === null) return "all joints placed";
  return `click to place: ${name} (${editor.placed.length + 1}/${editor.jointNames.length})`;
}

function renderEditor(): void {
  // The editor shows raw click coordinates in a fixed frame rather than
  // the fitted view renderPose produces, so clicks stay where they land.
  const svg = renderEditorCanvas(toKeypoints(editor), category?.skeleton ?? []);
  el<HTMLDivElement>("editor-canvas").innerHTML = svg;
  el<HTMLSpanElement>("editor-status").textContent = editorStatus();
  el<HTMLButtonElement>("editor-submit").disabled = editor.placed.length === 0;
  const canvas = el<HTMLDivElement>("editor-canvas").querySelector("svg");
  canvas?.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    editor = placeJoint(editor, event.clientX - rect.left, event.clientY - rect.top);
    renderEditor();
  });
}

function renderEditorCanvas(flat: number[], edges: [number, number][]): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${EDITOR_SIZE} ${EDITOR_SIZE}" ` +
      `width="${EDITOR_SIZE}" height="${EDITOR_SIZE}" class="editor-frame">`,
  ];
  for (const [a, b] of edges) {
    const i = 3 * (a - 1);
    const j = 3 * (b - 1);
    if (!flat[i + 2] || !flat[j + 2]) continue;
    parts.push(
      `<line x1="${flat[i] ?? 0}" y1="${flat[i + 1] ?? 0}" x2="${flat[j] ?? 0}" ` +
        `y2="${flat[j + 1] ?? 0}" stroke="#2b8a9d" stroke-width="2"/>`,
    );
  }
  for (let i = 0; i + 2 < flat.length; i += 3) {
    if (!flat[i + 2]) continue;
    parts.push(`<circle cx="${flat[i] ?? 0}" cy="${flat[i + 1] ?? 0}" r="4" fill="#e8734a"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

// ---- bootstrap ------------------------------------------------------

async function loadDirectory(): Promise<void> {
  const page = await client.entries(0, 24);
  const list = el<HTMLDivElement>("directory");
  list.innerHTML = page.entries
    .map((e) =>
      `<button class="entry" data-person="${escapeHtml(e.person_id)}">` +
      `${escapeHtml(e.person_id)} <small>${escapeHtml(e.character)}</small></button>`)
    .join("");
  list.querySelectorAll<HTMLElement>("[data-person]").forEach((node) => {
    node.addEventListener("click", () => {
      const id = node.dataset["person"];
      if (id) void runQuery({ kind: "person", personId: id });
    });
  });
  el<HTMLSpanElement>("entry-count").textContent = String(page.total);
}

export async function start(): Promise<void> {
  category = await client.category();
  editor = emptyEditor(category.keypoints);

  el<HTMLFormElement>("query-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const id = el<HTMLInputElement>("query-input").value.trim();
    if (id) void runQuery({ kind: "person", personId: id });
  });
  el<HTMLButtonElement>("back-btn").addEventListener("click", () => {
    state = goBack(state);
    void renderResults();
  });
  el<HTMLButtonElement>("editor-submit").addEventListener("click", () => {
    void runQuery({ kind: "pose", keypoints: toKeypoints(editor) });
  });
  el<HTMLButtonElement>("editor-undo").addEventListener("click", () => {
    editor = undoJoint(editor);
    renderEditor();
  });
  el<HTMLButtonElement>("editor-clear").addEventListener("click", () => {
    editor = clearJoints(editor);
    renderEditor();
  });

  renderEditor();
  await Promise.all([loadDirectory(), renderResults()]);
}

if (typeof document !== "undefined" && document.getElementById("results")) {
  void start().catch((err) => {
    const box = document.getElementById("error-box");
    if (box) box.textContent = `failed to start: ${(err as Error).message}`;
  });
}

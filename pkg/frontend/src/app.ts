// Wires the DOM to the API client: compose or upload a query, submit, browse
// ranked results with explanations, open raw models, revisit past queries.

import { ApiClient, ApiError, RequestSequencer } from "./api.js";
import { renderClassification, renderError, renderResults, renderStats,
         escapeHtml } from "./render.js";
import { QueryHistory, validateQueryJson } from "./state.js";

const EXAMPLE_QUERY = `{
 "modelType": "uml",
 "objects": [
  {"id": "s1", "class": "State", "attrs": {"name": ["Talking"]}},
  {"id": "t1", "class": "Transition",
   "attrs": {"name": ["answer call"], "kind": ["external"]},
   "refs": {"target": ["s1"]}}
 ]
}`;

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

export function startApp(): void {
    const api = new ApiClient("");
    const sequencer = new RequestSequencer();
    const history = new QueryHistory(window.localStorage);

    const editor = el<HTMLTextAreaElement>("query-editor");
    const upload = el<HTMLInputElement>("query-upload");
    const typeSelect = el<HTMLSelectElement>("model-type");
    const maxResults = el<HTMLInputElement>("max-results");
    const explain = el<HTMLInputElement>("explain");
    const submit = el<HTMLButtonElement>("submit");
    const classifyButton = el<HTMLButtonElement>("classify");
    const banner = el<HTMLDivElement>("banner");
    const resultsPane = el<HTMLDivElement>("results");
    const statsPane = el<HTMLDivElement>("stats");
    const historyPane = el<HTMLUListElement>("history");
    const viewer = el<HTMLPreElement>("model-viewer");
    const validation = el<HTMLSpanElement>("validation");

    editor.value = EXAMPLE_QUERY;

    function showError(message: string): void {
        banner.innerHTML = renderError(message);
    }

    function clearError(): void {
        banner.innerHTML = "";
    }

    function revalidate(): void {
        const problem = validateQueryJson(editor.value);
        validation.textContent = problem ?? "";
        submit.disabled = problem !== null;
        classifyButton.disabled = problem !== null;
    }

    function renderHistory(): void {
        const entries = history.list();
        historyPane.innerHTML = entries.map((entry, i) =>
            `<li><a href="#" data-history="${i}">${escapeHtml(entry.modelType)} · ` +
            `${entry.modelText.length} chars · ${escapeHtml(entry.savedAt)}</a></li>`
        ).join("");
    }

    async function refreshStats(): Promise<void> {
        try {
            const body = await api.stats();
            statsPane.innerHTML = renderStats(body.indexes);
            const current = typeSelect.value;
            typeSelect.innerHTML = body.indexes.map((s) =>
                `<option value="${escapeHtml(s.model_type)}">` +
                `${escapeHtml(s.model_type)}</option>`).join("");
            if (current) typeSelect.value = current;
        } catch (e) {
            statsPane.innerHTML = renderError((e as Error).message);
        }
    }

    async function runSearch(): Promise<void> {
        clearError();
        const token = sequencer.issue();
        resultsPane.setAttribute("aria-busy", "true");
        try {
            const body = await api.search({
                modelText: editor.value,
                modelType: typeSelect.value,
                maxResults: Number(maxResults.value) || 20,
                explain: explain.checked,
            });
            if (!sequencer.isCurrent(token)) return;  // a newer search is in flight
            resultsPane.innerHTML = renderResults(body);
            history.push({
                modelText: editor.value,
                modelType: typeSelect.value,
                maxResults: Number(maxResults.value) || 20,
                explain: explain.checked,
            });
            renderHistory();
        } catch (e) {
            if (!sequencer.isCurrent(token)) return;
            showError(e instanceof ApiError ? `${e.status}: ${e.message}`
                : (e as Error).message);
        } finally {
            resultsPane.removeAttribute("aria-busy");
        }
    }

    async function runClassify(): Promise<void> {
        clearError();
        try {
            const body = await api.classify({
                modelText: editor.value,
                modelType: typeSelect.value,
                maxResults: 20,
                explain: false,
            }, 2);
            resultsPane.innerHTML = renderClassification(body);
        } catch (e) {
            showError(e instanceof ApiError ? `${e.status}: ${e.message}`
                : (e as Error).message);
        }
    }

    async function openModel(id: string): Promise<void> {
        try {
            const body = await api.modelBytes(id);
            viewer.textContent = body.text;
            viewer.scrollIntoView({ behavior: "smooth" });
        } catch (e) {
            showError((e as Error).message);
        }
    }

    editor.addEventListener("input", revalidate);
    upload.addEventListener("change", async () => {
        const file = upload.files?.[0];
        if (!file) return;
        editor.value = await file.text();
        revalidate();
    });
    submit.addEventListener("click", (event) => {
        event.preventDefault();
        void runSearch();
    });
    classifyButton.addEventListener("click", (event) => {
        event.preventDefault();
        void runClassify();
    });
    resultsPane.addEventListener("click", (event) => {
        const target = (event.target as HTMLElement).closest(".model-link");
        if (target) {
            event.preventDefault();
            void openModel(target.getAttribute("data-model-id") ?? "");
        }
    });
    historyPane.addEventListener("click", (event) => {
        const target = (event.target as HTMLElement).closest("[data-history]");
        if (!target) return;
        event.preventDefault();
        const entry = history.list()[Number(target.getAttribute("data-history"))];
        if (!entry) return;
        editor.value = entry.modelText;
        typeSelect.value = entry.modelType;
        maxResults.value = String(entry.maxResults);
        explain.checked = entry.explain;
        revalidate();
    });

    revalidate();
    renderHistory();
    void refreshStats();
}

if (typeof document !== "undefined" && document.getElementById("query-editor")) {
    startApp();
}

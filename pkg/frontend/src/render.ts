// Pure HTML-string renderers for the UI; kept DOM-free so they are unit
// testable under node. Attribute segments draw as ovals, class segments as
// rounded rectangles, matching the path notation of the engine.

import type { ClassifyResponse, IndexStats, MatchedPath, SearchResponse,
              SearchResult } from "./api.js";

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;")
        .replace(/'/g, "&#39;");
}

export function formatScore(score: number): string {
    return score.toFixed(2);
}

// Per-path contributions must add up to the displayed score (within 1e-6
// relative); a mismatch means the response is inconsistent and is surfaced.
export function contributionMismatch(result: SearchResult): boolean {
    if (!result.matchedPaths || result.matchedPaths.length === 0) return false;
    const sum = result.matchedPaths.reduce((acc, p) => acc + p.contribution, 0);
    const scale = Math.max(Math.abs(result.score), 1e-12);
    return Math.abs(sum - result.score) / scale > 1e-6;
}

export function renderPathSegments(path: MatchedPath): string {
    if (!path.segments || path.segments.length === 0) {
        return `<code>${escapeHtml(path.path)}</code>`;
    }
    const parts = path.segments.map((segment) => {
        const label = escapeHtml(segment.label);
        if (segment.kind === "edge") {
            return `<span class="seg-edge">—${label}→</span>`;
        }
        return `<span class="seg-${segment.kind}">${label}</span>`;
    });
    return `<span class="path">${parts.join("")}</span>`;
}

export function renderMatchedPaths(result: SearchResult): string {
    if (!result.matchedPaths || result.matchedPaths.length === 0) return "";
    const rows = result.matchedPaths.map((p) =>
        `<li>${renderPathSegments(p)}` +
        `<span class="contribution">+${p.contribution.toFixed(4)}</span></li>`);
    const warning = contributionMismatch(result)
        ? `<p class="warning">matched-path contributions do not sum to the score</p>`
        : "";
    return `${warning}<ul class="matched">${rows.join("")}</ul>`;
}

export function renderResults(response: SearchResponse): string {
    if (response.results.length === 0) {
        return `<p class="empty">No models matched this query.</p>`;
    }
    const rows = response.results.map((result, i) => {
        const matched = renderMatchedPaths(result);
        const details = matched
            ? `<details><summary>matched paths (${result.matchedPaths!.length})` +
              `</summary>${matched}</details>`
            : "";
        return `<tr>
<td class="rank">${i + 1}</td>
<td class="id"><a href="#" class="model-link" data-model-id="${escapeHtml(result.id)}">` +
            `${escapeHtml(result.id)}</a>${details}</td>
<td class="score">${formatScore(result.score)}</td>
</tr>`;
    });
    const stats = response.stats;
    return `<table class="results">
<thead><tr><th>#</th><th>model</th><th>score</th></tr></thead>
<tbody>${rows.join("\n")}</tbody>
</table>
<p class="query-stats">${stats.distinctQueryPaths} distinct query paths ` +
        `(${stats.queryPaths} total), ${stats.elapsedMs.toFixed(1)} ms</p>`;
}

export function renderError(message: string): string {
    return `<div class="banner error" role="alert">${escapeHtml(message)}</div>`;
}

export function renderStats(indexes: IndexStats[]): string {
    if (indexes.length === 0) return `<p class="empty">No indexes found.</p>`;
    const rows = indexes.map((s) =>
        `<tr><td>${escapeHtml(s.model_type)}</td><td>${s.models}</td>` +
        `<td>${s.avdl.toFixed(1)}</td><td>${s.stop_paths}</td></tr>`);
    return `<table class="stats">
<thead><tr><th>type</th><th>models</th><th>avg paths</th><th>stop paths</th></tr></thead>
<tbody>${rows.join("\n")}</tbody>
</table>`;
}

export function renderClassification(body: ClassifyResponse): string {
    const weights = Object.entries(body.label_weights)
        .sort((a, b) => b[1] - a[1])
        .map(([label, weight]) =>
            `<li>${escapeHtml(label)}: ${weight.toFixed(2)}</li>`);
    const neighbors = body.neighbors.map((n) =>
        `<li>${escapeHtml(n.id)} (${escapeHtml(n.label)}, ${formatScore(n.score)})</li>`);
    return `<p>label: <strong>${escapeHtml(body.label)}</strong> (k=${body.k})</p>
<ul class="weights">${weights.join("")}</ul>
<ul class="neighbors">${neighbors.join("")}</ul>`;
}

// Typed client for the pathmark HTTP API. The UI talks to the documented
// endpoints only; every function returns the parsed JSON body or throws
// ApiError with the server's diagnostic text.

export interface PathSegment {
    kind: "attribute" | "class" | "edge";
    label: string;
}

export interface MatchedPath {
    path: string;
    contribution: number;
    segments: PathSegment[];
}

export interface SearchResult {
    id: string;
    score: number;
    matchedPaths?: MatchedPath[];
}

export interface SearchStats {
    queryPaths: number;
    distinctQueryPaths: number;
    elapsedMs: number;
}

export interface SearchResponse {
    results: SearchResult[];
    stats: SearchStats;
}

export interface IndexStats {
    model_type: string;
    models: number;
    avdl: number;
    stop_paths: number;
    stop_path_threshold: number;
    zero_total_models: number;
}

export interface StatsResponse {
    indexes: IndexStats[];
}

export interface Neighbor {
    id: string;
    score: number;
    label: string;
}

export interface ClassifyResponse {
    label: string;
    label_weights: Record<string, number>;
    k: number;
    neighbors: Neighbor[];
}

export interface SearchRequest {
    modelText: string;
    fileName?: string;
    modelType: string;
    maxResults: number;
    explain: boolean;
}

export class ApiError extends Error {
    constructor(readonly status: number, message: string) {
        super(message);
    }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorText(response: Response): Promise<string> {
    try {
        const body = await response.json();
        if (body && typeof body.error === "string") return body.error;
        if (body && body.detail) return JSON.stringify(body.detail);
    } catch {
        // fall through to the generic message
    }
    return `request failed with status ${response.status}`;
}

export function buildSearchForm(request: SearchRequest): FormData {
    const form = new FormData();
    form.append("file", new Blob([request.modelText], { type: "application/json" }),
        request.fileName ?? "query.json");
    form.append("modelType", request.modelType);
    form.append("maxResults", String(request.maxResults));
    form.append("explain", request.explain ? "true" : "false");
    return form;
}

export class ApiClient {
    constructor(readonly baseUrl: string = "", private readonly fetchFn: FetchLike =
        (input, init) => fetch(input, init)) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await this.fetchFn(this.baseUrl + path, init);
        if (!response.ok) {
            throw new ApiError(response.status, await errorText(response));
        }
        return response.json() as Promise<T>;
    }

    search(request: SearchRequest): Promise<SearchResponse> {
        return this.request<SearchResponse>("/search", {
            method: "POST",
            body: buildSearchForm(request),
        });
    }

    stats(): Promise<StatsResponse> {
        return this.request<StatsResponse>("/stats");
    }

    classify(request: SearchRequest, k: number): Promise<ClassifyResponse> {
        const form = new FormData();
        form.append("file", new Blob([request.modelText]), "query.json");
        form.append("modelType", request.modelType);
        form.append("k", String(k));
        return this.request<ClassifyResponse>("/classify", { method: "POST", body: form });
    }

    async modelBytes(id: string): Promise<{ text: string; contentType: string }> {
        const response = await this.fetchFn(`${this.baseUrl}/model/${encodeURIComponent(id)}`);
        if (!response.ok) {
            throw new ApiError(response.status, await errorText(response));
        }
        return {
            text: await response.text(),
            contentType: response.headers.get("content-type") ?? "",
        };
    }
}

// Discards stale responses: only the most recently issued token may apply.
export class RequestSequencer {
    private current = 0;

    issue(): number {
        return ++this.current;
    }

    isCurrent(token: number): boolean {
        return token === this.current;
    }
}

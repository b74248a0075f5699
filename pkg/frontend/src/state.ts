// Client-side query history so earlier queries can be revisited and edited.

export interface HistoryEntry {
    modelText: string;
    modelType: string;
    maxResults: number;
    explain: boolean;
    savedAt: string;
}

interface StorageLike {
    getItem(key: string): string | null;
    setItem(key: string, value: string): void;
}

const KEY = "pathmark.queryHistory";

export class QueryHistory {
    constructor(private readonly storage: StorageLike,
                private readonly limit: number = 20) {}

    list(): HistoryEntry[] {
        const raw = this.storage.getItem(KEY);
        if (!raw) return [];
        try {
            const parsed = JSON.parse(raw);
            return Array.isArray(parsed) ? (parsed as HistoryEntry[]) : [];
        } catch {
            return [];
        }
    }

    push(entry: Omit<HistoryEntry, "savedAt">): HistoryEntry[] {
        const next: HistoryEntry[] = [
            { ...entry, savedAt: new Date().toISOString() },
            // editing and resubmitting a query should not duplicate it
            ...this.list().filter((e) => e.modelText !== entry.modelText
                || e.modelType !== entry.modelType),
        ].slice(0, this.limit);
        this.storage.setItem(KEY, JSON.stringify(next));
        return next;
    }
}

export function validateQueryJson(text: string): string | null {
    let parsed: unknown;
    try {
        parsed = JSON.parse(text);
    } catch (e) {
        return `not valid JSON: ${(e as Error).message}`;
    }
    if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
        return "query must be a JSON object";
    }
    const doc = parsed as Record<string, unknown>;
    if (typeof doc.modelType !== "string" || doc.modelType === "") {
        return 'query needs a non-empty "modelType" string';
    }
    if (doc.objects !== undefined && !Array.isArray(doc.objects)) {
        return '"objects" must be an array';
    }
    return null;
}

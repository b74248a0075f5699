// End-to-end check against a running backend; set PATHMARK_URL to enable:
//
//   pathmark serve --index ./idx --port 8931 &
//   PATHMARK_URL=http://127.0.0.1:8931 npm test

import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiClient } from "../src/api.js";
import { contributionMismatch } from "../src/render.js";

const base = process.env.PATHMARK_URL;

test("live backend round trip", { skip: !base }, async () => {
    const client = new ApiClient(base!);
    const stats = await client.stats();
    assert.ok(stats.indexes.length >= 1);
    const modelType = stats.indexes[0]!.model_type;

    const body = await client.search({
        modelText: JSON.stringify({
            modelType,
            objects: [{ id: "s1", class: "State", attrs: { name: ["Talking"] } }],
        }),
        modelType,
        maxResults: 5,
        explain: true,
    });
    assert.ok(Array.isArray(body.results));
    for (const result of body.results) {
        assert.equal(contributionMismatch(result), false);
    }
    if (body.results.length > 0) {
        const model = await client.modelBytes(body.results[0]!.id);
        assert.ok(model.text.length > 0);
    }
});

import { PassThrough } from "node:stream";
import { describe, expect, it } from "vitest";

import { EmotionModel, HIDDEN_SIZE } from "../src/model.js";
import { handleRequest, serveStream } from "../src/protocol.js";

const model = new EmotionModel(0);

async function roundTrip(lines: string[]): Promise<string[]> {
    const input = new PassThrough();
    const output = new PassThrough();
    const done = serveStream(model, input, output);
    for (const line of lines) input.write(line + "\n");
    input.end();
    await done;
    return output.read().toString("utf-8").trimEnd().split("\n");
}

describe("protocol v1 request handling", () => {
    it("answers info with the model shape", () => {
        const response = handleRequest(model, { id: 1, op: "info" });
        expect(response.id).toBe(1);
        expect((response.info as { num_layers: number }).num_layers).toBe(6);
    });

    it("answers encode with lowercase whitespace tokens", () => {
        const response = handleRequest(model, { id: 2, op: "encode", text: "I feel SAD" });
        expect(response.tokens).toEqual(["i", "feel", "sad"]);
    });

    it("answers activations with the layer vector and prediction", () => {
        const response = handleRequest(model, {
            id: 3,
            op: "activations",
            layer: 5,
            tokens: ["i", "feel", "sad", "."],
            mask: [],
        });
        expect(response.id).toBe(3);
        expect(response.activations).toHaveLength(HIDDEN_SIZE);
        expect(typeof response.prediction).toBe("number");
    });

    it("masking is honored", () => {
        const base = handleRequest(model, {
            id: 4, op: "activations", layer: 5, tokens: ["i", "feel", "sad", "."], mask: [],
        });
        const masked = handleRequest(model, {
            id: 5, op: "activations", layer: 5, tokens: ["i", "feel", "sad", "."], mask: [2],
        });
        expect(masked.activations).not.toEqual(base.activations);
    });

    it("surfaces operational failures as error responses", () => {
        const badLayer = handleRequest(model, {
            id: 6, op: "activations", layer: 42, tokens: ["x"],
        });
        expect(badLayer.id).toBe(6);
        expect(typeof badLayer.error).toBe("string");
        const badOp = handleRequest(model, { id: 7, op: "nonsense" });
        expect(badOp.error).toContain("unknown op");
        const noTokens = handleRequest(model, { id: 8, op: "activations", layer: 0 });
        expect(typeof noTokens.error).toBe("string");
    });
});

describe("protocol v1 stream server", () => {
    it("answers one line per request and keeps going after junk", async () => {
        const lines = await roundTrip([
            '{"id":1,"op":"info"}',
            "this is not json",
            '{"id":2,"op":"encode","text":"so sad"}',
        ]);
        expect(lines).toHaveLength(3);
        const first = JSON.parse(lines[0]);
        expect(first.id).toBe(1);
        const junk = JSON.parse(lines[1]);
        expect(junk.id).toBeNull();
        expect(typeof junk.error).toBe("string");
        const second = JSON.parse(lines[2]);
        expect(second.id).toBe(2);
        expect(second.tokens).toEqual(["so", "sad"]);
    });

    it("echoes request ids verbatim", async () => {
        const lines = await roundTrip([
            '{"id":17,"op":"info"}',
            '{"id":"string-id","op":"info"}',
        ]);
        expect(JSON.parse(lines[0]).id).toBe(17);
        expect(JSON.parse(lines[1]).id).toBe("string-id");
    });
});

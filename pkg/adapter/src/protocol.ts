/**
 * Oracle wire protocol v1 server: one JSON object per line in, one response
 * line out, ids echoed. Requests are handled serially; every failure is
 * surfaced as an error response so the stream never crashes.
 */

import { createInterface } from "node:readline";
import { createServer, type Server } from "node:net";
import type { Readable, Writable } from "node:stream";

import { EmotionModel } from "./model.js";

type Json = Record<string, unknown>;

export function handleRequest(model: EmotionModel, request: Json): Json {
    const id = request.id ?? null;
    try {
        const op = request.op;
        if (op === "info") {
            return { id, info: model.info() };
        }
        if (op === "encode") {
            const text = typeof request.text === "string" ? request.text : "";
            return { id, tokens: model.encode(text) };
        }
        if (op === "activations") {
            const layer = Number(request.layer);
            const tokens = Array.isArray(request.tokens)
                ? request.tokens.map((t) => String(t))
                : null;
            if (tokens === null) {
                return { id, error: "text oracle requires a tokens array" };
            }
            const mask = Array.isArray(request.mask) ? request.mask.map(Number) : [];
            const acts = model.activations(layer, tokens, mask);
            return {
                id,
                activations: Array.from(acts),
                prediction: model.predict(tokens, mask),
            };
        }
        return { id, error: `unknown op ${JSON.stringify(op ?? null)}` };
    } catch (err) {
        return { id, error: err instanceof Error ? err.message : String(err) };
    }
}

export function serveStream(model: EmotionModel, input: Readable, output: Writable): Promise<void> {
    return new Promise((resolve) => {
        const lines = createInterface({ input, crlfDelay: Infinity });
        lines.on("line", (line) => {
            const trimmed = line.trim();
            if (trimmed === "") return;
            let response: Json;
            try {
                response = handleRequest(model, JSON.parse(trimmed) as Json);
            } catch {
                response = { id: null, error: "request line is not valid JSON" };
            }
            output.write(JSON.stringify(response) + "\n");
        });
        lines.on("close", resolve);
    });
}

export function serveTcp(model: EmotionModel, port: number): Server {
    const server = createServer((socket) => {
        void serveStream(model, socket, socket);
    });
    server.listen(port);
    return server;
}

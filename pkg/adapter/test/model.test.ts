import { describe, expect, it } from "vitest";

import { EmotionModel, HIDDEN_SIZE, NUM_LAYERS } from "../src/model.js";

const TOKENS = ["i", "feel", "so", "sad", "today", "."];

describe("EmotionModel", () => {
    it("reports its shape via info()", () => {
        const info = new EmotionModel(0).info();
        expect(info.num_layers).toBe(NUM_LAYERS);
        expect(info.hidden_sizes).toHaveLength(NUM_LAYERS);
        expect(info.hidden_sizes[0]).toBe(HIDDEN_SIZE);
        expect(info.num_classes).toBe(4);
        expect(info.modality).toBe("text");
        expect(info.mask_token).toBe("[MASK]");
    });

    it("is deterministic across instances and calls", () => {
        const a = new EmotionModel(7);
        const b = new EmotionModel(7);
        for (let layer = 0; layer < NUM_LAYERS; layer++) {
            expect(Array.from(a.activations(layer, TOKENS))).toEqual(
                Array.from(b.activations(layer, TOKENS)),
            );
        }
        expect(a.predict(TOKENS)).toBe(b.predict(TOKENS));
        expect(Array.from(a.activations(2, TOKENS))).toEqual(
            Array.from(a.activations(2, TOKENS)),
        );
    });

    it("changes activations when tokens are masked", () => {
        const model = new EmotionModel(0);
        const base = model.activations(NUM_LAYERS - 1, TOKENS);
        const masked = model.activations(NUM_LAYERS - 1, TOKENS, [3]);
        expect(Array.from(masked)).not.toEqual(Array.from(base));
    });

    it("masking every token kills the deep lexical signal", () => {
        const model = new EmotionModel(0);
        const all = TOKENS.map((_, i) => i);
        const masked = model.activations(NUM_LAYERS - 1, TOKENS, all);
        expect(Array.from(masked)).toEqual(new Array(HIDDEN_SIZE).fill(0));
    });

    it("predicts the lexicon-matching class on a clear example", () => {
        const model = new EmotionModel(0);
        expect(model.predict(["i", "feel", "so", "sad", "today", "."])).toBe(3);
        expect(model.predict(["what", "a", "happy", "amazing", "day", "."])).toBe(1);
    });

    it("treats hashtag forms as lexicon hits", () => {
        const model = new EmotionModel(0);
        expect(model.predict(["#sad", "what", "a", "day", "."])).toBe(3);
    });

    it("rejects bad layers and mask indices", () => {
        const model = new EmotionModel(0);
        expect(() => model.activations(NUM_LAYERS, TOKENS)).toThrow(RangeError);
        expect(() => model.activations(-1, TOKENS)).toThrow(RangeError);
        expect(() => model.activations(0, TOKENS, [99])).toThrow(RangeError);
    });

    it("separates classes better in deeper layers", () => {
        const model = new EmotionModel(0);
        const sad = ["i", "feel", "so", "sad", "today", "."];
        const joy = ["i", "feel", "so", "happy", "today", "."];
        const contrast = (layer: number): number => {
            const a = model.activations(layer, sad);
            const b = model.activations(layer, joy);
            let diff = 0;
            for (let j = 0; j < HIDDEN_SIZE; j++) diff += Math.abs(a[j] - b[j]);
            return diff;
        };
        expect(contrast(NUM_LAYERS - 1)).toBeGreaterThan(contrast(0));
    });

    it("tokenizes by lowercased whitespace", () => {
        const model = new EmotionModel(0);
        expect(model.encode("I feel  SAD today")).toEqual(["i", "feel", "sad", "today"]);
    });
});

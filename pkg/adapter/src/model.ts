/**
 * Built-in six-layer text sentiment model.
 *
 * Each layer pools one vector over the (possibly masked) token sequence.
 * A neuron mixes a lexical detector with a syntactic feature; the lexical
 * weight grows with depth ((l+1)/num_layers), and each neuron's lexicon
 * coverage widens with depth, so deeper layers separate the emotion
 * classes more cleanly. The class prediction reads the deepest layer.
 * Everything is a pure function of (seed, tokens, mask).
 */

import { CLASS_NAMES, EMOTION_LEXICONS, FILLERS, normalizeToken } from "./lexicons.js";
import { Pcg32 } from "./pcg32.js";

export const NUM_LAYERS = 6;
export const HIDDEN_SIZE = 64;
export const MASK_TOKEN = "[MASK]";

interface Neuron {
    classIndex: number;
    lexicon: Set<string>;       // subset of the class lexicon, grows with depth
    synFeature: number;         // which syntactic statistic feeds the neuron
}

const SYN_FEATURES = 5;

function synStats(tokens: string[], masked: Set<number>): number[] {
    let fillers = 0;
    let punct = 0;
    let first = "";
    let last = "";
    let visible = 0;
    for (let i = 0; i < tokens.length; i++) {
        if (masked.has(i)) continue;
        const t = tokens[i].toLowerCase();
        visible++;
        if (first === "") first = t;
        last = t;
        if (FILLERS.includes(t)) fillers++;
        if (t === "." || t === "!") punct++;
    }
    return [
        (visible % 7) / 6,
        (fillers % 5) / 4,
        (first.length % 5) / 4,
        (last.length % 5) / 4,
        (punct % 3) / 2,
    ];
}

export class EmotionModel {
    readonly seed: number;
    private readonly layers: Neuron[][];

    constructor(seed = 0) {
        this.seed = seed;
        const rng = new Pcg32(seed, 1234);
        this.layers = [];
        for (let l = 0; l < NUM_LAYERS; l++) {
            // coverage grows with depth but stays partial, so no single
            // deep neuron separates a class perfectly
            const size = Math.ceil((13 * (l + 1)) / NUM_LAYERS);
            const neurons: Neuron[] = [];
            for (let j = 0; j < HIDDEN_SIZE; j++) {
                const classIndex = j % CLASS_NAMES.length;
                const full = EMOTION_LEXICONS[CLASS_NAMES[classIndex]];
                const picks = new Set<string>();
                while (picks.size < Math.min(size, full.length)) {
                    picks.add(rng.pick(full));
                }
                neurons.push({ classIndex, lexicon: picks, synFeature: rng.bounded(SYN_FEATURES) });
            }
            this.layers.push(neurons);
        }
    }

    /** Pooled activation vector at `layer` for the masked token sequence. */
    activations(layer: number, tokens: string[], mask: number[] = []): Float64Array {
        if (layer < 0 || layer >= NUM_LAYERS) {
            throw new RangeError(`layer ${layer} outside [0, ${NUM_LAYERS})`);
        }
        for (const idx of mask) {
            if (!Number.isInteger(idx) || idx < 0 || idx >= tokens.length) {
                throw new RangeError(`mask index ${idx} outside the token sequence`);
            }
        }
        const masked = new Set(mask);
        const syn = synStats(tokens, masked);
        const counts = new Map<string, number>();
        for (let i = 0; i < tokens.length; i++) {
            if (masked.has(i)) continue;
            const plain = normalizeToken(tokens[i]);
            counts.set(plain, (counts.get(plain) ?? 0) + 1);
        }
        const weight = (layer + 1) / NUM_LAYERS;
        const out = new Float64Array(HIDDEN_SIZE);
        const neurons = this.layers[layer];
        for (let j = 0; j < HIDDEN_SIZE; j++) {
            const neuron = neurons[j];
            let hits = 0;
            for (const word of neuron.lexicon) {
                hits += counts.get(word) ?? 0;
            }
            const lex = hits > 0 ? 1 + 0.25 * Math.min(hits - 1, 2) : 0;
            out[j] = weight * lex + (1 - weight) * syn[neuron.synFeature];
        }
        return out;
    }

    /** Argmax class from the deepest layer; ties go to the lower index. */
    predict(tokens: string[], mask: number[] = []): number {
        const deep = this.activations(NUM_LAYERS - 1, tokens, mask);
        const scores = new Array(CLASS_NAMES.length).fill(0);
        const neurons = this.layers[NUM_LAYERS - 1];
        for (let j = 0; j < HIDDEN_SIZE; j++) {
            scores[neurons[j].classIndex] += deep[j];
        }
        let best = 0;
        for (let c = 1; c < scores.length; c++) {
            if (scores[c] > scores[best]) best = c;
        }
        return best;
    }

    /** Whitespace tokenizer matching the corpus generator's tokens. */
    encode(text: string): string[] {
        return text.toLowerCase().split(/\s+/).filter((t) => t.length > 0);
    }

    info() {
        return {
            num_layers: NUM_LAYERS,
            hidden_sizes: new Array(NUM_LAYERS).fill(HIDDEN_SIZE),
            num_classes: CLASS_NAMES.length,
            mask_token: MASK_TOKEN,
            modality: "text",
        };
    }
}

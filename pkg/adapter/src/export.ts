/**
 * Exports per-layer NLAD activation dumps and annotated corpus JSONL for
 * the train and test splits.
 *
 *   node dist/export.js --out-dir DIR [--train 600] [--test 500]
 *                       [--seed 0] [--layers 0,1,2,3,4,5]
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { corpusToJsonl, generateCorpus, type AnnotatedExample } from "./corpus.js";
import { EmotionModel, HIDDEN_SIZE, NUM_LAYERS } from "./model.js";
import { encodeNlad } from "./nlad.js";

function argValue(argv: string[], flag: string, fallback: string): string {
    const at = argv.indexOf(flag);
    return at >= 0 ? argv[at + 1] : fallback;
}

export function exportSplit(
    model: EmotionModel,
    examples: AnnotatedExample[],
    layers: number[],
    outDir: string,
    split: string,
): void {
    const n = examples.length;
    const labels = new Uint32Array(n);
    const predictions = new Uint32Array(n);
    const docIds = examples.map((ex) => ex.doc_id);
    for (let i = 0; i < n; i++) {
        labels[i] = examples[i].label;
        predictions[i] = model.predict(examples[i].tokens);
    }
    for (const layer of layers) {
        const values = new Float32Array(n * HIDDEN_SIZE);
        for (let i = 0; i < n; i++) {
            const acts = model.activations(layer, examples[i].tokens);
            values.set(acts.map((v) => Math.fround(v)), i * HIDDEN_SIZE);
        }
        const bytes = encodeNlad({
            layer,
            n,
            h: HIDDEN_SIZE,
            numClasses: 4,
            values,
            labels,
            predictions,
            docIds,
        });
        writeFileSync(join(outDir, `${split}_layer${layer}.nlad`), bytes);
    }
    writeFileSync(join(outDir, `corpus_${split}.jsonl`), corpusToJsonl(examples));
}

function main(): void {
    const argv = process.argv.slice(2);
    const outDir = argValue(argv, "--out-dir", "export");
    const trainCount = Number(argValue(argv, "--train", "600"));
    const testCount = Number(argValue(argv, "--test", "500"));
    const seed = Number(argValue(argv, "--seed", "0"));
    const layers = argValue(argv, "--layers", "0,1,2,3,4,5")
        .split(",")
        .map((s) => Number(s.trim()))
        .filter((l) => Number.isInteger(l) && l >= 0 && l < NUM_LAYERS);

    mkdirSync(outDir, { recursive: true });
    const model = new EmotionModel(seed);
    exportSplit(model, generateCorpus(trainCount, seed + 1, "train"), layers, outDir, "train");
    exportSplit(model, generateCorpus(testCount, seed + 2, "test"), layers, outDir, "test");
    console.error(
        `exported ${layers.length} layers x {train:${trainCount}, test:${testCount}} to ${outDir}`,
    );
}

const isEntry = process.argv[1]?.endsWith("export.js");
if (isEntry) main();

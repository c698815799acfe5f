/**
 * Deterministic tweet-like corpus generation plus rule-based annotation.
 *
 * Generation draws from sentence templates over closed word lists; the
 * annotator works only from the token stream (sentence splitting on
 * terminal punctuation, first pronoun subject, first known verb), so
 * annotations are re-derived rather than echoed from the templates.
 */

import {
    CLASS_NAMES,
    EMOTION_LEXICONS,
    END_PUNCT,
    FILLERS,
    NOUNS,
    SUBJECTS,
    VERBS,
    emotionClassOf,
} from "./lexicons.js";
import { Pcg32 } from "./pcg32.js";

export interface AnnotatedExample {
    doc_id: string;
    tokens: string[];
    sentences: [number, number][];
    subject_index: (number | null)[];
    verb_index: (number | null)[];
    label: number;
}

const CROSS_CLASS_NOISE = 0.12;
const HASHTAG_RATE = 0.25;

function emotionToken(rng: Pcg32, classIndex: number): string {
    const word = rng.pick(EMOTION_LEXICONS[CLASS_NAMES[classIndex]]);
    return rng.nextF64() < HASHTAG_RATE ? `#${word}` : word;
}

/** One sentence (token list) carrying the class signal. */
function emotionSentence(rng: Pcg32, classIndex: number): string[] {
    const emo = () => emotionToken(rng, classIndex);
    const templates: (() => string[])[] = [
        () => [rng.pick(SUBJECTS), rng.pick(VERBS), "so", emo(), rng.pick(FILLERS), rng.pick(END_PUNCT)],
        () => [rng.pick(SUBJECTS), rng.pick(VERBS), emo(), "about", "the", rng.pick(NOUNS), rng.pick(END_PUNCT)],
        () => ["the", rng.pick(NOUNS), "was", "really", emo(), rng.pick(END_PUNCT)],
        () => [emo(), "what", "a", rng.pick(NOUNS), rng.pick(END_PUNCT)],
        () => [rng.pick(SUBJECTS), rng.pick(VERBS), "the", rng.pick(NOUNS), "and", rng.pick(SUBJECTS), rng.pick(VERBS), emo(), rng.pick(END_PUNCT)],
        () => [rng.pick(FILLERS), rng.pick(FILLERS), rng.pick(SUBJECTS), rng.pick(VERBS), emo(), "again", rng.pick(END_PUNCT)],
    ];
    return rng.pick(templates)();
}

/** A neutral sentence with no emotion vocabulary. */
function neutralSentence(rng: Pcg32): string[] {
    const templates: (() => string[])[] = [
        () => [rng.pick(SUBJECTS), rng.pick(VERBS), "the", rng.pick(NOUNS), rng.pick(END_PUNCT)],
        () => ["the", rng.pick(NOUNS), "is", "on", "the", rng.pick(NOUNS), rng.pick(END_PUNCT)],
        () => [rng.pick(FILLERS), rng.pick(SUBJECTS), rng.pick(VERBS), "it", rng.pick(END_PUNCT)],
    ];
    return rng.pick(templates)();
}

export function generateTokens(rng: Pcg32, label: number): string[] {
    const tokens: string[] = [];
    const sentenceCount = 1 + rng.bounded(2);
    const emotionAt = rng.bounded(sentenceCount);
    for (let s = 0; s < sentenceCount; s++) {
        tokens.push(...(s === emotionAt ? emotionSentence(rng, label) : neutralSentence(rng)));
    }
    if (rng.nextF64() < CROSS_CLASS_NOISE) {
        const other = (label + 1 + rng.bounded(CLASS_NAMES.length - 1)) % CLASS_NAMES.length;
        // replace a non-terminal, non-signal token with an off-class word
        const slot = rng.bounded(Math.max(1, tokens.length - 1));
        if (!END_PUNCT.includes(tokens[slot]) && emotionClassOf(tokens[slot]) !== label) {
            tokens[slot] = emotionToken(rng, other);
        }
    }
    return tokens;
}

/** Sentence spans, first-pronoun subject, first known verb, per sentence. */
export function annotate(tokens: string[]): {
    sentences: [number, number][];
    subject_index: (number | null)[];
    verb_index: (number | null)[];
} {
    const sentences: [number, number][] = [];
    let start = 0;
    for (let i = 0; i < tokens.length; i++) {
        if (END_PUNCT.includes(tokens[i])) {
            sentences.push([start, i + 1]);
            start = i + 1;
        }
    }
    if (start < tokens.length) sentences.push([start, tokens.length]);

    const subject_index: (number | null)[] = [];
    const verb_index: (number | null)[] = [];
    for (const [s, e] of sentences) {
        let subject: number | null = null;
        let verb: number | null = null;
        for (let i = s; i < e; i++) {
            if (subject === null && SUBJECTS.includes(tokens[i])) subject = i;
            if (verb === null && VERBS.includes(tokens[i])) verb = i;
        }
        subject_index.push(subject);
        verb_index.push(verb);
    }
    return { sentences, subject_index, verb_index };
}

export function generateCorpus(count: number, seed: number, prefix = "doc"): AnnotatedExample[] {
    const rng = new Pcg32(seed);
    const examples: AnnotatedExample[] = [];
    for (let i = 0; i < count; i++) {
        const label = rng.bounded(CLASS_NAMES.length);
        const tokens = generateTokens(rng, label);
        const annotations = annotate(tokens);
        examples.push({ doc_id: `${prefix}${i}`, tokens, label, ...annotations });
    }
    return examples;
}

export function corpusToJsonl(examples: AnnotatedExample[]): string {
    return (
        examples
            .map((ex) =>
                JSON.stringify({
                    doc_id: ex.doc_id,
                    tokens: ex.tokens,
                    sentences: ex.sentences,
                    subject_index: ex.subject_index,
                    verb_index: ex.verb_index,
                    label: ex.label,
                })
            )
            .join("\n") + "\n"
    );
}

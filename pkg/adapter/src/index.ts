export { Pcg32 } from "./pcg32.js";
export { CLASS_NAMES, EMOTION_LEXICONS, emotionClassOf, normalizeToken } from "./lexicons.js";
export { annotate, corpusToJsonl, generateCorpus, generateTokens } from "./corpus.js";
export type { AnnotatedExample } from "./corpus.js";
export { EmotionModel, HIDDEN_SIZE, MASK_TOKEN, NUM_LAYERS } from "./model.js";
export { encodeNlad } from "./nlad.js";
export type { DumpPayload } from "./nlad.js";
export { handleRequest, serveStream, serveTcp } from "./protocol.js";
export { exportSplit } from "./export.js";

/** Emotion vocabulary and closed word classes for the built-in model. */

export const CLASS_NAMES = ["anger", "joy", "optimism", "sadness"] as const;

export const EMOTION_LEXICONS: Record<string, string[]> = {
    anger: [
        "angry", "furious", "rage", "mad", "outraged", "annoyed", "hate",
        "awful", "disgusting", "terrible", "fuming", "irritated", "hostile",
        "offended", "bitter", "livid",
    ],
    joy: [
        "happy", "joy", "amazing", "wonderful", "laughing", "smiling",
        "delighted", "fantastic", "glee", "cheerful", "hilarious", "fun",
        "excited", "lovely", "thrilled", "bliss",
    ],
    optimism: [
        "hope", "hopeful", "better", "improve", "bright", "promising",
        "believe", "forward", "progress", "growth", "opportunity", "faith",
        "stronger", "healing", "recover", "optimistic",
    ],
    sadness: [
        "sad", "depression", "depressing", "lost", "crying", "lonely",
        "sadness", "grief", "mourn", "nightmare", "anxiety", "hopeless",
        "miserable", "heartbroken", "tears", "gloomy",
    ],
};

export const SUBJECTS = ["i", "we", "you", "they", "he", "she", "everyone", "nobody"];

export const VERBS = [
    "feel", "felt", "am", "was", "keep", "think", "know", "see", "need",
    "want", "miss", "remember", "watch", "hear",
];

export const FILLERS = [
    "the", "a", "so", "very", "really", "still", "just", "again", "always",
    "never", "today", "tonight", "morning", "user", "about", "with", "this",
    "that", "it", "and", "but", "of", "in", "on", "at", "my", "your",
];

export const NOUNS = [
    "day", "night", "news", "story", "moment", "weather", "game", "song",
    "movie", "week", "world", "life", "dream", "thing", "time", "place",
];

export const END_PUNCT = [".", "!"];

/** Lexicon lookup on the normalized (lowercased, '#'-stripped) form. */
export function emotionClassOf(token: string): number {
    const plain = normalizeToken(token);
    for (let c = 0; c < CLASS_NAMES.length; c++) {
        if (EMOTION_LEXICONS[CLASS_NAMES[c]].includes(plain)) return c;
    }
    return -1;
}

export function normalizeToken(token: string): string {
    const lower = token.toLowerCase();
    return lower.startsWith("#") ? lower.slice(1) : lower;
}

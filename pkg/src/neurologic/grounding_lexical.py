"""Grounding predicates over text via causal token masking.

For every corpus example whose top active clause belongs to the target
class, each in-sentence token is masked once; if any tracked (positive)
predicate of that clause turns off, the occurrence is causal.  Causal
occurrences are binned into lexical templates (hashtag, sentence edges,
subject/verb windows, exists) and scored with

    s = idf(w) * flips(w, t) / total(w, t),
    idf(w) = ln((N_docs + 1) / (df(w) + 1)),

keeping pairs with s >= tau, sorted by descending s.
"""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from . import errors


class TemplateType(Enum):
    IS_HASHTAG = "is_hashtag"
    AT_START = "at_start"
    AT_END = "at_end"
    BEFORE_SUBJECT = "before_subject"
    AFTER_SUBJECT = "after_subject"
    BEFORE_VERB = "before_verb"
    AFTER_VERB = "after_verb"
    EXISTS = "exists"


_TEMPLATE_ORDER = {t: i for i, t in enumerate(TemplateType)}


@dataclass
class LexicalParams:
    alpha: float = 0.20
    window: int = 6
    tau: float = 0.03
    lowercase_normalize: bool = True
    flip_mode: str = "predicate"        # "predicate" | "class"

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.flip_mode not in ("predicate", "class"):
            raise ValueError(f"bad flip_mode {self.flip_mode!r}")


@dataclass(frozen=True)
class AtomicAbstractionLex:
    keyword: str
    template: TemplateType

    def __post_init__(self):
        if not self.keyword:
            raise ValueError("keyword must be nonempty")


@dataclass
class GroundedRule:
    abstraction: AtomicAbstractionLex
    flips: int
    total: int
    flip_rate: float
    idf: float
    score: float
    target_class: int
    clause_id: int = 0

    @property
    def keyword(self):
        return self.abstraction.keyword

    @property
    def template(self):
        return self.abstraction.template


@dataclass
class GroundingRun:
    rules: list
    target_class: int
    tested_examples: int
    partial: bool = False
    buckets: dict = None        # keyword -> [10 causal-occurrence counts]


def normalize_keyword(token, lowercase=True):
    """Lowercase and strip non-leading '#' characters."""
    t = token.lower() if lowercase else token
    if t.startswith("#"):
        return "#" + t[1:].replace("#", "")
    return t.replace("#", "")


def idf(word, corpus):
    """ln((N + 1) / (df + 1)); df counts documents containing the word."""
    if not corpus:
        raise errors.EmptyCorpus("idf needs a nonempty corpus")
    df = 0
    for ex in corpus:
        if any(normalize_keyword(t) == word for t in ex.tokens):
            df += 1
    return math.log((len(corpus) + 1) / (df + 1))


def assign_template(token_index, example, params):
    """First matching positional template for an in-sentence token."""
    k = example.sentence_of(token_index)
    if k is None:
        raise errors.IndexOutsideSentence(
            f"token {token_index} is not inside any sentence span"
        )
    if example.tokens[token_index].startswith("#"):
        return TemplateType.IS_HASHTAG
    start, end = example.sentences[k]
    length = end - start
    pos = token_index - start
    edge = math.ceil(params.alpha * length)
    if pos < edge:
        return TemplateType.AT_START
    if pos >= length - edge:
        return TemplateType.AT_END
    subj = example.subject_index[k]
    if subj is not None and token_index != subj and abs(token_index - subj) <= params.window:
        return TemplateType.BEFORE_SUBJECT if token_index < subj else TemplateType.AFTER_SUBJECT
    verb = example.verb_index[k]
    if verb is not None and token_index != verb and abs(token_index - verb) <= params.window:
        return TemplateType.BEFORE_VERB if token_index < verb else TemplateType.AFTER_VERB
    return TemplateType.EXISTS


def _predicate_truth(activations, predicates):
    return [float(activations[p.neuron]) >= p.threshold for p in predicates]


def causal_test(example, token_index, predicates, oracle, baseline=None):
    """True iff masking the token turns off any of the given predicates.

    All predicates must be true on the unmasked input (PredicateNotActive
    otherwise).  `baseline` lets callers reuse one unmasked query per
    example.
    """
    predicates = list(predicates)
    if not predicates:
        raise errors.PredicateNotActive("no predicates to track")
    layer = predicates[0].layer
    if baseline is None:
        baseline, _ = oracle.query_activations(layer, tokens=example.tokens, mask=())
    if not all(_predicate_truth(baseline, predicates)):
        raise errors.PredicateNotActive(
            "tracked predicates must be true before masking"
        )
    masked, _ = oracle.query_activations(layer, tokens=example.tokens, mask=(token_index,))
    return not all(_predicate_truth(masked, predicates))


def ground_class(corpus, rule, predicate_set, oracle, params=None, threads=1):
    """Grounded (keyword, template) rules for one class's DNF.

    Every causal occurrence is recorded under its positional template and
    additionally under EXISTS; totals count all tested occurrences.  Rules
    with at least one flip and score >= tau are returned in descending
    score order (ties: more flips, then keyword, then template order).
    """
    params = params or LexicalParams()
    if not corpus:
        raise errors.EmptyCorpus("grounding needs a nonempty corpus")
    predicates = predicate_set.all_predicates()
    layer = predicate_set.layer

    flips = {}
    totals = {}
    clause_of = {}
    buckets = {}
    tested_examples = 0
    partial = False

    def record(key, flipped, clause_id):
        totals[key] = totals.get(key, 0) + 1
        if flipped:
            flips[key] = flips.get(key, 0) + 1
            clause_of.setdefault(key, clause_id)

    try:
        for ex in corpus:
            baseline, base_pred = oracle.query_activations(
                layer, tokens=ex.tokens, mask=()
            )
            truth = [
                float(baseline[p.neuron]) >= p.threshold for p in predicates
            ]
            satisfied = [
                (i, cl)
                for i, cl in enumerate(rule.clauses)
                if cl.satisfied(truth)
            ]
            if not satisfied:
                continue
            clause_id, top = max(satisfied, key=lambda item: item[1].support)
            tracked = [predicates[pid] for pid, positive in top.literals if positive]
            if params.flip_mode == "predicate" and not tracked:
                continue
            tested_examples += 1

            indices = [
                i
                for span in ex.sentences
                for i in range(span[0], span[1])
                if normalize_keyword(ex.tokens[i], params.lowercase_normalize)
            ]

            def flipped_at(i):
                masked, masked_pred = oracle.query_activations(
                    layer, tokens=ex.tokens, mask=(i,)
                )
                if params.flip_mode == "class":
                    return masked_pred != base_pred
                return any(
                    float(masked[p.neuron]) < p.threshold for p in tracked
                )

            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    results = dict(zip(indices, pool.map(flipped_at, indices)))
            else:
                results = {i: flipped_at(i) for i in indices}

            for i in indices:
                keyword = normalize_keyword(ex.tokens[i], params.lowercase_normalize)
                template = assign_template(i, ex, params)
                record((keyword, template), results[i], clause_id)
                record((keyword, TemplateType.EXISTS), results[i], clause_id)
                if results[i]:
                    bucket = min(9, (10 * i) // len(ex.tokens))
                    buckets.setdefault(keyword, [0] * 10)[bucket] += 1
    except (errors.OracleFailure, errors.Transport, errors.Timeout, errors.PeerClosed):
        partial = True

    idf_cache = {}

    def idf_of(word):
        if word not in idf_cache:
            idf_cache[word] = idf(word, corpus)
        return idf_cache[word]

    rules_out = []
    for key, flip_count in flips.items():
        keyword, template = key
        total = totals[key]
        word_idf = idf_of(keyword)
        score = word_idf * flip_count / total
        if score >= params.tau:
            rules_out.append(
                GroundedRule(
                    abstraction=AtomicAbstractionLex(keyword, template),
                    flips=flip_count,
                    total=total,
                    flip_rate=flip_count / total,
                    idf=word_idf,
                    score=score,
                    target_class=rule.target_class,
                    clause_id=clause_of.get(key, 0),
                )
            )
    rules_out.sort(
        key=lambda r: (
            -r.score,
            -r.flips,
            r.keyword,
            _TEMPLATE_ORDER[r.template],
        )
    )
    return GroundingRun(
        rules=rules_out,
        target_class=rule.target_class,
        tested_examples=tested_examples,
        partial=partial,
        buckets=buckets,
    )


# ---- output ----

def grounding_to_json(run):
    return {
        "class": run.target_class,
        "tested_examples": run.tested_examples,
        "partial": run.partial,
        "rules": [
            {
                "keyword": r.keyword,
                "template": r.template.value,
                "flips": r.flips,
                "total": r.total,
                "flip_rate": r.flip_rate,
                "idf": r.idf,
                "score": r.score,
                "clause_id": r.clause_id,
            }
            for r in run.rules
        ],
    }


def grounding_from_json(obj):
    rules = [
        GroundedRule(
            abstraction=AtomicAbstractionLex(
                r["keyword"], TemplateType(r["template"])
            ),
            flips=int(r["flips"]),
            total=int(r["total"]),
            flip_rate=float(r["flip_rate"]),
            idf=float(r["idf"]),
            score=float(r["score"]),
            target_class=int(obj["class"]),
            clause_id=int(r.get("clause_id", 0)),
        )
        for r in obj["rules"]
    ]
    return GroundingRun(
        rules=rules,
        target_class=int(obj["class"]),
        tested_examples=int(obj.get("tested_examples", 0)),
        partial=bool(obj.get("partial", False)),
        buckets=None,
    )


def grounding_table(run):
    """Aligned text table: Keyword | Template | Flips | Total | Rate | Score."""
    headers = ("Keyword", "Template", "Flips", "Total", "Rate", "Score")
    rows = [
        (
            r.keyword,
            r.template.value,
            str(r.flips),
            str(r.total),
            f"{r.flip_rate:.2f}",
            f"{r.score:.4f}",
        )
        for r in run.rules
    ]
    widths = [
        max(len(headers[i]), max((len(row[i]) for row in rows), default=0))
        for i in range(len(headers))
    ]
    lines = [
        " | ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "-+-".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append(" | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines) + "\n"


def write_bucket_csv(run, path):
    """Causal-occurrence counts per keyword over 10 relative-position buckets."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["keyword"] + [f"bucket{i}" for i in range(10)])
        for keyword in sorted(run.buckets or {}):
            writer.writerow([keyword] + run.buckets[keyword])


def save_grounding(run, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(grounding_to_json(run), f, indent=2)
        f.write("\n")

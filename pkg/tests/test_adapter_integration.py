"""End-to-end checks against the text-model adapter (trend-level only).

Exercises the adapter purely through its external surfaces: exported NLAD
dumps + corpus JSONL, and the oracle wire protocol over stdio.  Skipped
when node or the built adapter is unavailable.
"""

import pathlib
import shutil
import subprocess
import sys

import numpy as np
import pytest

from neurologic.grounding_lexical import LexicalParams, ground_class
from neurologic.mining import evaluate_predicates, mine_predicates
from neurologic.oracle import ProtocolClient
from neurologic.rules import distill, score
from neurologic.store import load_corpus, read_activation_dump
from neurologic.tree import TreeParams

ROOT = pathlib.Path(__file__).resolve().parent.parent
ADAPTER = ROOT / "adapter"
SERVE = ADAPTER / "dist" / "serve.js"
EXPORT = ADAPTER / "dist" / "export.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not SERVE.exists(),
    reason="node or the built adapter is unavailable (run `npm run build` in adapter/)",
)

# closed word classes mirrored from the adapter's corpus generator
FUNCTION_WORDS = {
    "the", "a", "so", "very", "really", "still", "just", "again", "always",
    "never", "today", "tonight", "morning", "user", "about", "with", "this",
    "that", "it", "and", "but", "of", "in", "on", "at", "my", "your",
    "i", "we", "you", "they", "he", "she", "everyone", "nobody",
    "feel", "felt", "am", "was", "is", "keep", "think", "know", "see",
    "need", "want", "miss", "remember", "watch", "hear", ".", "!",
}

DISTILL = TreeParams(max_depth=7, min_samples_leaf=15, min_gain=2e-3)
SADNESS = 3


@pytest.fixture(scope="module")
def export_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("adapter_export")
    subprocess.run(
        [
            "node", str(EXPORT), "--out-dir", str(out),
            "--train", "600", "--test", "500", "--seed", "0",
        ],
        check=True,
        capture_output=True,
    )
    return out


def test_export_shapes(export_dir):
    for split, n in (("train", 600), ("test", 500)):
        for layer in range(6):
            dump = read_activation_dump(export_dir / f"{split}_layer{layer}.nlad")
            assert (dump.n, dump.h, dump.layer) == (n, 64, layer)
            assert dump.num_classes == 4
            assert dump.predictions is not None
        corpus = load_corpus(export_dir / f"corpus_{split}.jsonl")
        assert len(corpus) == n


def test_purity_trend_across_layers(export_dir):
    purities = []
    for layer in range(6):
        dump = read_activation_dump(export_dir / f"train_layer{layer}.nlad")
        purities.append(mine_predicates(dump, 15).mean_purity())
    assert all(b >= a - 0.02 for a, b in zip(purities, purities[1:])), purities
    assert purities[-1] - purities[0] >= 0.3, purities


def test_layer6_rule_model_fidelity(export_dir):
    train = read_activation_dump(export_dir / "train_layer5.nlad")
    test = read_activation_dump(export_dir / "test_layer5.nlad")
    pset = mine_predicates(train, 15)
    model = distill(
        evaluate_predicates(pset, train),
        train.predictions,
        DISTILL,
        num_classes=4,
        predicate_set=pset,
    )
    metrics = score(
        model,
        evaluate_predicates(pset, test),
        test.labels,
        test.predictions,
        0.0,
    )
    assert metrics.fidelity >= 0.70, metrics


def test_sadness_grounding_is_emotion_dominated(export_dir):
    train = read_activation_dump(export_dir / "train_layer5.nlad")
    pset = mine_predicates(train, 15)
    model = distill(
        evaluate_predicates(pset, train),
        train.predictions,
        DISTILL,
        num_classes=4,
        predicate_set=pset,
    )
    corpus = load_corpus(export_dir / "corpus_test.jsonl")[:150]
    with ProtocolClient.spawn(["node", str(SERVE), "--stdio"], timeout=30) as client:
        run = ground_class(
            corpus, model.rules[SADNESS], pset, client, LexicalParams(), threads=1
        )
    assert run.tested_examples > 0
    assert len(run.rules) >= 5
    top = run.rules[:10]
    emotion_like = [
        r for r in top if r.keyword.lstrip("#") not in FUNCTION_WORDS
    ]
    assert len(emotion_like) >= 0.8 * len(top), [r.keyword for r in top]


def test_protocol_conformance_fuzz(export_dir):
    rng = np.random.default_rng(0)
    vocab = ["sad", "happy", "angry", "hope", "the", "game", "i", "feel", "#lost", "."]
    with ProtocolClient.spawn(["node", str(SERVE), "--stdio"], timeout=30) as client:
        info = client.info()
        assert info.modality == "text"
        assert info.mask_token
        assert info.num_layers == 6
        for _ in range(40):
            length = int(rng.integers(1, 12))
            tokens = [vocab[int(rng.integers(0, len(vocab)))] for _ in range(length)]
            layer = int(rng.integers(0, info.num_layers))
            mask_count = int(rng.integers(0, length + 1))
            mask = sorted(
                int(i) for i in rng.choice(length, size=mask_count, replace=False)
            )
            acts, prediction = client.query_activations(layer, tokens=tokens, mask=mask)
            assert acts.shape == (info.hidden_sizes[layer],)
            assert np.all(np.isfinite(acts))
            assert 0 <= prediction < info.num_classes
            again, pred2 = client.query_activations(layer, tokens=tokens, mask=mask)
            assert np.array_equal(acts, again) and prediction == pred2


def test_masking_all_versus_none_differs(export_dir):
    with ProtocolClient.spawn(["node", str(SERVE), "--stdio"], timeout=30) as client:
        tokens = ["i", "feel", "so", "sad", "today", "."]
        base, _ = client.query_activations(5, tokens=tokens)
        masked, _ = client.query_activations(5, tokens=tokens, mask=list(range(len(tokens))))
        assert not np.array_equal(base, masked)

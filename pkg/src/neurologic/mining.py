"""Hidden-predicate mining: per-neuron threshold search and top-k selection.

For every neuron and every class, a linear scan over the distinct activation
values finds the threshold maximizing

    purity(t) = |{x in X_c : z >= t}| / |X_c| + |{x in X_notc : z < t}| / |X_notc|

which lies in [1, 2] (the cut keeping all samples scores exactly 1).  Ties
take the highest threshold (smallest support).  Neurons are then ranked per
class by purity, ties toward the lower neuron index, and the top-k become
hidden predicates p_j(x) = [z_j >= t_j].
"""

import json
from dataclasses import dataclass
from math import isfinite

import numpy as np

from . import errors
from ._kernels import best_cuts
from .store import ActivationDump


@dataclass(frozen=True)
class Predicate:
    layer: int
    neuron: int
    threshold: float
    target_class: int
    purity: float
    support: int

    def __post_init__(self):
        if not isfinite(self.threshold):
            raise ValueError("threshold must be finite")
        if not 1.0 <= self.purity <= 2.0:
            raise ValueError(f"purity {self.purity} outside [1, 2]")
        if self.support < 1:
            raise ValueError("support must be >= 1")


@dataclass
class PredicateSet:
    layer: int
    k: int
    per_class: list            # per_class[c] = [Predicate, ...] descending purity
    clipped: bool = False

    def __post_init__(self):
        for c, preds in enumerate(self.per_class):
            neurons = [p.neuron for p in preds]
            if len(set(neurons)) != len(neurons):
                raise ValueError(f"duplicate neuron in class {c} predicates")
            purities = [p.purity for p in preds]
            if any(a < b for a, b in zip(purities, purities[1:])):
                raise ValueError(f"class {c} predicates not sorted by purity")

    @property
    def num_classes(self):
        return len(self.per_class)

    def all_predicates(self):
        """Predicates in global column order: class order, then rank order."""
        out = []
        for preds in self.per_class:
            out.extend(preds)
        return out

    def mean_purity(self):
        preds = self.all_predicates()
        return sum(p.purity for p in preds) / len(preds)


def optimal_threshold(activations, labels, target_class):
    """Best (threshold, purity, support) for one activation vector and class."""
    acts = np.ascontiguousarray(activations, dtype=np.float64)
    labels = np.asarray(labels)
    n = acts.shape[0]
    if n < 2:
        raise errors.OneClassOnly("need at least 2 samples")
    positive = labels == target_class
    n_pos = int(positive.sum())
    if n_pos == 0 or n_pos == n:
        raise errors.OneClassOnly(
            f"class {target_class} must be present along with other classes"
        )
    order = np.argsort(-acts)
    a_sorted = np.ascontiguousarray(acts[order])
    y_sorted = np.ascontiguousarray(positive[order].astype(np.int64))
    counts = np.array([n - n_pos, n_pos], dtype=np.int64)
    purity, cut = best_cuts(a_sorted, y_sorted, counts)
    k = int(cut[1])
    return float(a_sorted[k - 1]), float(purity[1]), k


def mine_predicates(dump, k):
    """Top-k hidden predicates per class from an activation dump."""
    if k < 1:
        raise errors.KTooLarge("top-k must be >= 1")
    n, h = dump.n, dump.h
    num_classes = dump.num_classes
    labels = np.ascontiguousarray(dump.labels.astype(np.int64))
    class_counts = np.bincount(labels, minlength=num_classes).astype(np.int64)
    if np.any(class_counts == 0) or np.any(class_counts == n):
        raise errors.OneClassOnly("every class must appear, and none may cover all rows")

    clipped = k > h
    k_eff = min(k, h)

    purity = np.empty((num_classes, h), dtype=np.float64)
    threshold = np.empty((num_classes, h), dtype=np.float64)
    support = np.empty((num_classes, h), dtype=np.int64)
    values = dump.values.astype(np.float64)
    for j in range(h):
        col = values[:, j]
        order = np.argsort(-col)
        a_sorted = np.ascontiguousarray(col[order])
        y_sorted = np.ascontiguousarray(labels[order])
        p, cut = best_cuts(a_sorted, y_sorted, class_counts)
        purity[:, j] = p
        support[:, j] = cut
        threshold[:, j] = a_sorted[cut - 1]

    per_class = []
    for c in range(num_classes):
        ranked = sorted(range(h), key=lambda j: (-purity[c, j], j))[:k_eff]
        per_class.append(
            [
                Predicate(
                    layer=dump.layer,
                    neuron=j,
                    threshold=float(threshold[c, j]),
                    target_class=c,
                    purity=float(purity[c, j]),
                    support=int(support[c, j]),
                )
                for j in ranked
            ]
        )
    return PredicateSet(layer=dump.layer, k=k, per_class=per_class, clipped=clipped)


def evaluate_predicates(pset, source):
    """Binary matrix (n, total predicates): entry 1 iff activation >= threshold.

    `source` is an ActivationDump (layer-checked) or a raw (n, h) matrix.
    Column order follows PredicateSet.all_predicates().
    """
    if isinstance(source, ActivationDump):
        if source.layer != pset.layer:
            raise errors.LayerMismatch(
                f"dump layer {source.layer} != predicate layer {pset.layer}"
            )
        values = source.values
    else:
        values = np.asarray(source)
    preds = pset.all_predicates()
    if values.ndim != 2 or (preds and values.shape[1] <= max(p.neuron for p in preds)):
        raise errors.ShapeMismatch("activation matrix too narrow for predicate neurons")
    bits = np.empty((values.shape[0], len(preds)), dtype=np.uint8)
    for i, p in enumerate(preds):
        bits[:, i] = values[:, p.neuron].astype(np.float64) >= p.threshold
    return bits


def predicates_to_json(pset):
    return {
        "layer": pset.layer,
        "k": pset.k,
        "clipped": pset.clipped,
        "classes": [
            {
                "class": c,
                "predicates": [
                    {
                        "neuron": p.neuron,
                        "threshold": p.threshold,
                        "purity": p.purity,
                        "support": p.support,
                    }
                    for p in preds
                ],
            }
            for c, preds in enumerate(pset.per_class)
        ],
    }


def predicates_from_json(obj):
    layer = int(obj["layer"])
    per_class = []
    for entry in obj["classes"]:
        c = int(entry["class"])
        per_class.append(
            [
                Predicate(
                    layer=layer,
                    neuron=int(p["neuron"]),
                    threshold=float(p["threshold"]),
                    target_class=c,
                    purity=float(p["purity"]),
                    support=int(p["support"]),
                )
                for p in entry["predicates"]
            ]
        )
    return PredicateSet(
        layer=layer,
        k=int(obj["k"]),
        per_class=per_class,
        clipped=bool(obj.get("clipped", False)),
    )


def save_predicates(pset, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(predicates_to_json(pset), f, indent=2)
        f.write("\n")


def load_predicates(path):
    with open(path, "r", encoding="utf-8") as f:
        return predicates_from_json(json.load(f))

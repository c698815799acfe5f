"""Deterministic CART decision trees (Gini impurity).

Shared by rule distillation and tabular grounding.  Split candidates are
midpoints between consecutive distinct sorted values; ties break toward the
lower feature index, then the lower threshold; routing sends x_f <= threshold
left.  Zero-gain splits are taken only when min_gain allows them (the
binary-XOR truth table needs them), and recursion still terminates because
each side keeps at least min_samples_leaf rows.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import errors
from ._kernels import best_gini_split


@dataclass
class TreeParams:
    max_depth: int = 8
    min_samples_leaf: int = 5
    min_gain: float = 1e-4

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_gain < 0:
            raise ValueError("min_gain must be >= 0")


@dataclass
class SplitNode:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass
class LeafNode:
    label: int
    counts: list


@dataclass
class DecisionTree:
    nodes: list                 # preorder; nodes[0] is the root
    num_classes: int
    num_features: int

    @property
    def num_leaves(self):
        return sum(1 for n in self.nodes if isinstance(n, LeafNode))

    def depth(self):
        def walk(i):
            node = self.nodes[i]
            if isinstance(node, LeafNode):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)


def fit_tree(features, labels, params, num_classes=None):
    """Greedy best-first CART fit; deterministic for identical inputs."""
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise errors.EmptyInput("features must be a nonempty (n, d) matrix")
    if y.shape != (X.shape[0],):
        raise errors.ShapeMismatch("labels length must equal n")
    if num_classes is None:
        num_classes = int(y.max()) + 1
    d = X.shape[1]
    min_leaf = params.min_samples_leaf

    nodes = []

    def build(idx, depth):
        sub_y = y[idx]
        counts = np.bincount(sub_y, minlength=num_classes)
        node_id = len(nodes)

        def make_leaf():
            nodes.append(LeafNode(label=int(np.argmax(counts)), counts=counts.tolist()))
            return node_id

        if depth >= params.max_depth or np.count_nonzero(counts) <= 1:
            return make_leaf()
        if idx.size < 2 * min_leaf:
            return make_leaf()

        best_gain = -1.0
        best = None              # (feature, pos, order)
        for f in range(d):
            col = X[idx, f]
            order = np.argsort(col, kind="stable")
            x_sorted = np.ascontiguousarray(col[order])
            y_sorted = np.ascontiguousarray(sub_y[order])
            gain, pos = best_gini_split(x_sorted, y_sorted, num_classes, min_leaf)
            if pos != -1 and gain > best_gain:
                best_gain = gain
                best = (f, pos, idx[order], x_sorted)
        if best is None or best_gain < params.min_gain:
            return make_leaf()

        f, pos, ordered_idx, x_sorted = best
        threshold = (x_sorted[pos - 1] + x_sorted[pos]) / 2.0
        nodes.append(None)       # placeholder, filled after children exist
        left_id = build(ordered_idx[:pos], depth + 1)
        right_id = build(ordered_idx[pos:], depth + 1)
        nodes[node_id] = SplitNode(
            feature=f, threshold=float(threshold), left=left_id, right=right_id
        )
        return node_id

    build(np.arange(X.shape[0]), 0)
    return DecisionTree(nodes=nodes, num_classes=num_classes, num_features=d)


def tree_predict(tree, x):
    """Route one sample to a leaf; boundary x_f == threshold goes left."""
    x = np.asarray(x, dtype=np.float64)
    node = tree.nodes[0]
    while isinstance(node, SplitNode):
        if node.feature >= x.shape[0]:
            raise errors.FeatureOutOfRange(
                f"tree needs feature {node.feature}, sample has {x.shape[0]}"
            )
        node = tree.nodes[node.left if x[node.feature] <= node.threshold else node.right]
    return node.label


def tree_predict_batch(tree, X):
    X = np.asarray(X, dtype=np.float64)
    need = max(
        (n.feature for n in tree.nodes if isinstance(n, SplitNode)), default=-1
    )
    if need >= X.shape[1]:
        raise errors.FeatureOutOfRange(
            f"tree needs feature {need}, matrix has {X.shape[1]} columns"
        )
    out = np.empty(X.shape[0], dtype=np.int64)
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        node_id, idx = stack.pop()
        if idx.size == 0:
            continue
        node = tree.nodes[node_id]
        if isinstance(node, LeafNode):
            out[idx] = node.label
            continue
        go_left = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


def extract_paths(tree):
    """One (literals, leaf class, leaf counts) triple per leaf, preorder.

    Literals are (feature, op, threshold) with op in {"<=", ">"}, listed
    root-to-leaf; evaluating the conjunction reproduces leaf routing.
    """
    paths = []

    def walk(i, literals):
        node = tree.nodes[i]
        if isinstance(node, LeafNode):
            paths.append((tuple(literals), node.label, list(node.counts)))
            return
        literals.append((node.feature, "<=", node.threshold))
        walk(node.left, literals)
        literals.pop()
        literals.append((node.feature, ">", node.threshold))
        walk(node.right, literals)
        literals.pop()

    walk(0, [])
    return paths


def tree_to_json(tree):
    out = []
    for node in tree.nodes:
        if isinstance(node, LeafNode):
            out.append({"type": "leaf", "class": node.label, "counts": node.counts})
        else:
            out.append(
                {
                    "type": "split",
                    "feature": node.feature,
                    "threshold": node.threshold,
                    "left": node.left,
                    "right": node.right,
                }
            )
    return {"num_classes": tree.num_classes, "num_features": tree.num_features, "nodes": out}


def tree_from_json(obj):
    nodes = []
    for entry in obj["nodes"]:
        if entry["type"] == "leaf":
            nodes.append(LeafNode(label=int(entry["class"]), counts=list(entry["counts"])))
        else:
            nodes.append(
                SplitNode(
                    feature=int(entry["feature"]),
                    threshold=float(entry["threshold"]),
                    left=int(entry["left"]),
                    right=int(entry["right"]),
                )
            )
    return DecisionTree(
        nodes=nodes,
        num_classes=int(obj["num_classes"]),
        num_features=int(obj["num_features"]),
    )


def save_tree(tree, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(tree_to_json(tree), f, indent=2)
        f.write("\n")

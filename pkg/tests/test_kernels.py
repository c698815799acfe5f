"""Cross-backend equality: the compiled core must match the pure fallback
bit for bit (same candidates, tie-breaks, and float rounding)."""

import numpy as np
import pytest

from neurologic._kernels import BACKEND, pure

try:
    from neurologic._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def test_active_backend_reported():
    assert BACKEND in ("compiled", "pure")


@needs_core
def test_best_cuts_backends_agree_exactly():
    rng = np.random.default_rng(10)
    for _ in range(200):
        num_classes = int(rng.integers(2, 5))
        n = int(rng.integers(num_classes + 1, 64))
        labels = np.concatenate(
            [np.arange(num_classes), rng.integers(0, num_classes, size=n - num_classes)]
        ).astype(np.int64)
        rng.shuffle(labels)
        acts = np.round(rng.normal(size=n), 1)  # ties on purpose
        order = np.argsort(-acts)
        a_sorted = np.ascontiguousarray(acts[order])
        y_sorted = np.ascontiguousarray(labels[order])
        counts = np.bincount(labels, minlength=num_classes).astype(np.int64)
        p1, k1 = pure.best_cuts(a_sorted, y_sorted, counts)
        p2, k2 = _core.best_cuts(a_sorted, y_sorted, counts)
        assert p1.tolist() == p2.tolist()
        assert k1.tolist() == k2.tolist()


@needs_core
def test_best_gini_split_backends_agree_exactly():
    rng = np.random.default_rng(11)
    for _ in range(200):
        num_classes = int(rng.integers(2, 4))
        n = int(rng.integers(2, 80))
        labels = rng.integers(0, num_classes, size=n).astype(np.int64)
        x = np.round(rng.normal(size=n), 1)
        order = np.argsort(x, kind="stable")
        x_sorted = np.ascontiguousarray(x[order])
        y_sorted = np.ascontiguousarray(labels[order])
        min_leaf = int(rng.integers(1, 4))
        g1, p1 = pure.best_gini_split(x_sorted, y_sorted, num_classes, min_leaf)
        g2, p2 = _core.best_gini_split(x_sorted, y_sorted, num_classes, min_leaf)
        assert (g1, p1) == (g2, p2)

"""On-disk formats: NLAD activation dumps, labeled CSV datasets, corpus JSONL.

NLAD v1 layout (see README for the byte-level description):
  1. one UTF-8 JSON header line ending in '\\n'
  2. n*h little-endian float32 values, row-major
  3. n little-endian uint32 labels
  4. n little-endian uint32 predictions    (if has_predictions)
  5. one JSON array line with n doc ids    (if has_doc_ids)

All loaded objects are immutable: numpy buffers are marked read-only.
"""

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import errors
from .rng import Pcg32

NLAD_MAGIC = "NLAD"
NLAD_VERSION = 1


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass
class ActivationDump:
    """One layer's activations for n samples plus labels and metadata."""

    layer: int
    values: np.ndarray          # (n, h) float32
    labels: np.ndarray          # (n,) uint32, class indices
    num_classes: int
    predictions: Optional[np.ndarray] = None   # (n,) uint32, network argmax
    doc_ids: Optional[list] = None

    def __post_init__(self):
        self.values = _frozen(np.asarray(self.values, dtype=np.float32))
        self.labels = _frozen(np.asarray(self.labels, dtype=np.uint32))
        if self.values.ndim != 2:
            raise errors.ShapeMismatch("values must be a 2-D (n, h) matrix")
        n, h = self.values.shape
        if n < 1 or h < 1:
            raise errors.ShapeMismatch("need n >= 1 and h >= 1")
        if self.labels.shape != (n,):
            raise errors.ShapeMismatch("labels length must equal n")
        if not np.all(np.isfinite(self.values)):
            raise errors.NonFiniteValue("activation values must be finite")
        if self.num_classes < 1:
            raise errors.LabelOutOfRange("num_classes must be >= 1")
        if self.labels.max() >= self.num_classes:
            raise errors.LabelOutOfRange("label >= num_classes")
        if self.predictions is not None:
            self.predictions = _frozen(np.asarray(self.predictions, dtype=np.uint32))
            if self.predictions.shape != (n,):
                raise errors.ShapeMismatch("predictions length must equal n")
            if self.predictions.max() >= self.num_classes:
                raise errors.LabelOutOfRange("prediction >= num_classes")
        if self.doc_ids is not None:
            self.doc_ids = [str(d) for d in self.doc_ids]
            if len(self.doc_ids) != n:
                raise errors.ShapeMismatch("doc_ids length must equal n")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def h(self):
        return self.values.shape[1]

    def equals(self, other):
        """Bitwise equality of payload and metadata."""
        return (
            self.layer == other.layer
            and self.num_classes == other.num_classes
            and self.values.tobytes() == other.values.tobytes()
            and np.array_equal(self.labels, other.labels)
            and (
                (self.predictions is None and other.predictions is None)
                or (
                    self.predictions is not None
                    and other.predictions is not None
                    and np.array_equal(self.predictions, other.predictions)
                )
            )
            and self.doc_ids == other.doc_ids
        )


def write_activation_dump(dump, path):
    header = {
        "magic": NLAD_MAGIC,
        "version": NLAD_VERSION,
        "layer": int(dump.layer),
        "n": int(dump.n),
        "h": int(dump.h),
        "num_classes": int(dump.num_classes),
        "has_predictions": dump.predictions is not None,
        "has_doc_ids": dump.doc_ids is not None,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header).encode("utf-8") + b"\n")
        f.write(dump.values.astype("<f4", copy=False).tobytes(order="C"))
        f.write(dump.labels.astype("<u4", copy=False).tobytes())
        if dump.predictions is not None:
            f.write(dump.predictions.astype("<u4", copy=False).tobytes())
        if dump.doc_ids is not None:
            f.write(json.dumps(dump.doc_ids).encode("utf-8") + b"\n")


def _read_exact(f, count, what):
    data = f.read(count)
    if len(data) != count:
        raise errors.TruncatedPayload(
            f"expected {count} bytes of {what}, got {len(data)}"
        )
    return data


def read_activation_dump(path):
    with open(path, "rb") as f:
        line = f.readline(1 << 20)
        if not line.endswith(b"\n"):
            raise errors.MalformedHeader("missing newline-terminated header line")
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise errors.MalformedHeader(f"header is not valid JSON: {exc}") from exc
        if not isinstance(header, dict):
            raise errors.MalformedHeader("header must be a JSON object")
        if header.get("magic") != NLAD_MAGIC:
            raise errors.BadMagic(f"bad magic {header.get('magic')!r}")
        if header.get("version") != NLAD_VERSION:
            raise errors.BadMagic(f"unsupported version {header.get('version')!r}")
        try:
            layer = int(header["layer"])
            n = int(header["n"])
            h = int(header["h"])
            num_classes = int(header["num_classes"])
            has_predictions = bool(header["has_predictions"])
            has_doc_ids = bool(header["has_doc_ids"])
        except (KeyError, TypeError, ValueError) as exc:
            raise errors.MalformedHeader(f"missing or invalid header field: {exc}") from exc
        if n < 1 or h < 1:
            raise errors.MalformedHeader("header must declare n >= 1 and h >= 1")

        values = np.frombuffer(
            _read_exact(f, 4 * n * h, "float32 values"), dtype="<f4"
        ).reshape(n, h)
        if not np.all(np.isfinite(values)):
            raise errors.NonFiniteValue("payload contains non-finite values")
        labels = np.frombuffer(_read_exact(f, 4 * n, "labels"), dtype="<u4")
        predictions = None
        if has_predictions:
            predictions = np.frombuffer(_read_exact(f, 4 * n, "predictions"), dtype="<u4")
        doc_ids = None
        if has_doc_ids:
            tail = f.read()
            try:
                doc_ids = json.loads(tail.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise errors.TruncatedPayload(f"doc_ids line unreadable: {exc}") from exc
            if not isinstance(doc_ids, list) or len(doc_ids) != n:
                raise errors.TruncatedPayload("doc_ids must be a JSON array of n strings")
        return ActivationDump(
            layer=layer,
            values=values,
            labels=labels,
            num_classes=num_classes,
            predictions=predictions,
            doc_ids=doc_ids,
        )


@dataclass
class LabeledDataset:
    features: np.ndarray        # (n, d) float64
    labels: np.ndarray          # (n,) uint32
    num_classes: int
    feature_names: Optional[list] = None

    def __post_init__(self):
        self.features = _frozen(np.asarray(self.features, dtype=np.float64))
        self.labels = _frozen(np.asarray(self.labels, dtype=np.uint32))
        if self.features.ndim != 2 or self.features.shape[1] < 1:
            raise errors.ShapeMismatch("features must be (n, d) with d >= 1")
        if self.labels.shape != (self.features.shape[0],):
            raise errors.ShapeMismatch("labels length must equal n")
        if self.labels.size and self.labels.max() >= self.num_classes:
            raise errors.LabelOutOfRange("label >= num_classes")
        if self.feature_names is not None and len(self.feature_names) != self.d:
            raise errors.ShapeMismatch("feature_names length must equal d")

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def take(self, indices):
        return LabeledDataset(
            features=self.features[indices],
            labels=self.labels[indices],
            num_classes=self.num_classes,
            feature_names=self.feature_names,
        )


def ingest_csv(path, label_column, num_classes):
    """Load a headered CSV into a LabeledDataset.

    Features are all non-label columns in header order; the label column
    must hold integers in [0, num_classes).
    """
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise errors.MalformedHeader("empty CSV file") from None
        header = [c.strip() for c in header]
        if label_column not in header:
            raise errors.MissingLabelColumn(
                f"label column {label_column!r} not in header {header}"
            )
        label_idx = header.index(label_column)
        feature_names = [c for i, c in enumerate(header) if i != label_idx]

        rows = []
        labels = []
        for r, record in enumerate(reader):
            if len(record) != len(header):
                raise errors.ParseError(
                    path,
                    f"row has {len(record)} cells, header has {len(header)}",
                    line=r + 2,
                )
            feats = []
            for c, cell in enumerate(record):
                cell = cell.strip()
                if c == label_idx:
                    try:
                        value = float(cell)
                    except ValueError:
                        raise errors.NonNumericCell(r, c, cell) from None
                    if not value.is_integer():
                        raise errors.NonNumericCell(r, c, cell)
                    label = int(value)
                    if not 0 <= label < num_classes:
                        raise errors.LabelOutOfRange(
                            f"label {label} at row {r} outside [0, {num_classes})"
                        )
                    labels.append(label)
                else:
                    try:
                        feats.append(float(cell))
                    except ValueError:
                        raise errors.NonNumericCell(r, c, cell) from None
            rows.append(feats)
        if not rows:
            raise errors.EmptyInput("CSV has a header but no data rows")
    return LabeledDataset(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.uint32),
        num_classes=num_classes,
        feature_names=feature_names,
    )


def write_csv(ds, path, label_column="label"):
    """Inverse of ingest_csv (used by the CLI to persist generated data)."""
    names = ds.feature_names or [f"x{i}" for i in range(ds.d)]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(list(names) + [label_column])
        for i in range(ds.n):
            writer.writerow([repr(float(v)) for v in ds.features[i]] + [int(ds.labels[i])])


def split_dataset(ds, test_fraction, seed):
    """Deterministic stratified train/test split.

    Per-class test counts are round(fraction * class_count), adjusted so
    both splits are nonempty whenever n >= 2.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if ds.n < 2:
        raise errors.DegenerateSplit("need at least 2 samples to split")

    rng = Pcg32(seed)
    per_class = [np.flatnonzero(ds.labels == c).tolist() for c in range(ds.num_classes)]
    test_idx = []
    for members in per_class:
        if not members:
            continue
        rng.shuffle(members)
        take = round(test_fraction * len(members))
        test_idx.extend(members[:take])

    test_set = set(test_idx)
    all_idx = list(range(ds.n))
    # rebalance so neither split is empty
    if not test_set:
        largest = max(per_class, key=len)
        test_set.add(largest[0])
    if len(test_set) == ds.n:
        largest = max(per_class, key=len)
        for i in reversed(largest):
            if i in test_set:
                test_set.discard(i)
                break
    train = [i for i in all_idx if i not in test_set]
    test = [i for i in all_idx if i in test_set]
    if not train or not test:
        raise errors.DegenerateSplit("cannot make both splits nonempty")
    return ds.take(train), ds.take(test)


@dataclass
class AnnotatedExample:
    """A tokenized document with sentence spans and per-sentence annotations.

    `sentences` holds half-open [start, end) token spans, sorted and disjoint.
    `subject_index` / `verb_index` are parallel to `sentences`; entries may be
    None when the sentence has no detected subject/verb.
    """

    doc_id: str
    tokens: list
    sentences: list
    label: int
    subject_index: list = field(default_factory=list)
    verb_index: list = field(default_factory=list)

    def __post_init__(self):
        if not self.subject_index:
            self.subject_index = [None] * len(self.sentences)
        if not self.verb_index:
            self.verb_index = [None] * len(self.sentences)
        if len(self.subject_index) != len(self.sentences) or len(
            self.verb_index
        ) != len(self.sentences):
            raise errors.ShapeMismatch("per-sentence annotations must match sentence count")
        prev_end = 0
        for k, (s, e) in enumerate(self.sentences):
            if not (0 <= s < e <= len(self.tokens)):
                raise errors.ShapeMismatch(f"sentence span ({s}, {e}) out of bounds")
            if s < prev_end:
                raise errors.ShapeMismatch("sentence spans must be sorted and disjoint")
            prev_end = e
            for idx in (self.subject_index[k], self.verb_index[k]):
                if idx is not None and not s <= idx < e:
                    raise errors.ShapeMismatch(
                        f"annotation index {idx} outside sentence span ({s}, {e})"
                    )

    def sentence_of(self, token_index):
        """Index of the sentence containing token_index, or None."""
        for k, (s, e) in enumerate(self.sentences):
            if s <= token_index < e:
                return k
        return None


def load_corpus(path):
    examples = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise errors.ParseError(path, f"bad JSON: {exc}", line=lineno) from exc
            try:
                examples.append(
                    AnnotatedExample(
                        doc_id=str(obj["doc_id"]),
                        tokens=list(obj["tokens"]),
                        sentences=[tuple(span) for span in obj["sentences"]],
                        label=int(obj["label"]),
                        subject_index=list(obj.get("subject_index") or []),
                        verb_index=list(obj.get("verb_index") or []),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise errors.ParseError(path, f"bad example: {exc}", line=lineno) from exc
    return examples


def write_corpus(examples, path):
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(
                json.dumps(
                    {
                        "doc_id": ex.doc_id,
                        "tokens": ex.tokens,
                        "sentences": [list(span) for span in ex.sentences],
                        "subject_index": ex.subject_index,
                        "verb_index": ex.verb_index,
                        "label": ex.label,
                    }
                )
                + "\n"
            )

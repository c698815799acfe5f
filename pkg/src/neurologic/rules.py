"""DNF rule construction, tree distillation, and model metrics.

The exhaustive DNF has one full-length clause per distinct predicate bit
vector seen for a class.  Distillation fits a decision tree on the bit
matrix against teacher labels (network predictions by default) and converts
each root-to-leaf path into a clause, giving a compact rule model whose
predictions coincide with the tree everywhere.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import errors
from .mining import predicates_from_json, predicates_to_json
from .tree import extract_paths, fit_tree, tree_from_json, tree_predict_batch, tree_to_json

ENUMERATED = "enumerated"
DISTILLED = "distilled"


@dataclass(frozen=True)
class Clause:
    literals: tuple             # ((predicate id, positive: bool), ...)
    source: str
    support: int

    def __post_init__(self):
        pids = [pid for pid, _ in self.literals]
        if len(set(pids)) != len(pids):
            raise ValueError("a predicate may appear only once per clause")

    def literal_set(self):
        return frozenset(self.literals)

    def satisfied(self, bits):
        return all(bool(bits[pid]) == positive for pid, positive in self.literals)


@dataclass
class DnfRule:
    target_class: int
    clauses: list

    def __post_init__(self):
        seen = set()
        for clause in self.clauses:
            key = clause.literal_set()
            if key in seen:
                raise ValueError("clauses must be distinct as literal sets")
            seen.add(key)


@dataclass
class RuleModel:
    tree: object                # distillation DecisionTree
    rules: list                 # rules[c] = DnfRule for class c
    default_class: int
    num_predicates: int
    predicate_set: object = None

    @property
    def num_clauses(self):
        return sum(len(r.clauses) for r in self.rules)


@dataclass
class Metrics:
    accuracy: float
    fidelity: float
    runtime_seconds: float
    num_clauses: int
    avg_clause_length: float

    def __post_init__(self):
        if not (0.0 <= self.accuracy <= 1.0 and 0.0 <= self.fidelity <= 1.0):
            raise ValueError("accuracy and fidelity must lie in [0, 1]")
        if self.num_clauses < 1:
            raise ValueError("num_clauses must be >= 1")


def enumerate_clauses(bits, target_class):
    """Exhaustive DNF over the class rows of the predicate matrix.

    One clause per distinct row: set bits become positive literals, clear
    bits negated ones.  Clauses are ordered by descending support
    (multiplicity), ties by ascending lexicographic bit pattern.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 2:
        raise errors.ShapeMismatch("bits must be (rows, m)")
    uniq, counts = np.unique(bits, axis=0, return_counts=True)
    order = np.argsort(-counts, kind="stable")
    clauses = [
        Clause(
            literals=tuple((pid, bool(row[pid])) for pid in range(bits.shape[1])),
            source=ENUMERATED,
            support=int(counts[i]),
        )
        for i, row in ((i, uniq[i]) for i in order)
    ]
    return DnfRule(target_class=target_class, clauses=clauses)


def _path_to_clause(literals, support):
    converted = tuple(
        (feature, op == ">") for feature, op, _threshold in literals
    )
    return Clause(literals=converted, source=DISTILLED, support=support)


def distill(bits, teacher_labels, params, num_classes=None, predicate_set=None):
    """Fit the distillation tree on predicate bits and extract per-class rules."""
    bits = np.asarray(bits, dtype=np.uint8)
    teacher = np.asarray(teacher_labels, dtype=np.int64)
    if bits.ndim != 2 or bits.shape[0] == 0:
        raise errors.EmptyInput("need a nonempty bit matrix")
    if teacher.shape != (bits.shape[0],):
        raise errors.LengthMismatch("teacher labels must align with bit rows")
    if num_classes is None:
        num_classes = int(teacher.max()) + 1

    tree = fit_tree(bits.astype(np.float64), teacher, params, num_classes=num_classes)
    counts = np.bincount(teacher, minlength=num_classes)
    default_class = int(np.argmax(counts))

    per_class = [[] for _ in range(num_classes)]
    for literals, leaf_class, leaf_counts in extract_paths(tree):
        per_class[leaf_class].append(_path_to_clause(literals, int(sum(leaf_counts))))
    rules = [DnfRule(target_class=c, clauses=cl) for c, cl in enumerate(per_class)]
    return RuleModel(
        tree=tree,
        rules=rules,
        default_class=default_class,
        num_predicates=bits.shape[1],
        predicate_set=predicate_set,
    )


def rule_predict(model, bits_row):
    """Class of the unique satisfied clause (tree paths partition the space)."""
    bits_row = np.asarray(bits_row)
    if bits_row.shape != (model.num_predicates,):
        raise errors.LengthMismatch(
            f"row has {bits_row.shape} bits, model expects {model.num_predicates}"
        )
    for rule in model.rules:
        for clause in rule.clauses:
            if clause.satisfied(bits_row):
                return rule.target_class
    return model.default_class


def rule_predict_batch(model, bits):
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 2 or bits.shape[1] != model.num_predicates:
        raise errors.LengthMismatch(
            f"bit matrix width {bits.shape} != {model.num_predicates}"
        )
    out = np.full(bits.shape[0], model.default_class, dtype=np.int64)
    for rule in model.rules:
        for clause in rule.clauses:
            mask = np.ones(bits.shape[0], dtype=bool)
            for pid, positive in clause.literals:
                mask &= bits[:, pid].astype(bool) == positive
            out[mask] = rule.target_class
    return out


def score(model, bits, truth_labels, teacher_labels, runtime_seconds):
    """Table-style metrics: accuracy vs truth, fidelity vs the network."""
    bits = np.asarray(bits, dtype=np.uint8)
    truth = np.asarray(truth_labels)
    teacher = np.asarray(teacher_labels)
    if not bits.shape[0] == truth.shape[0] == teacher.shape[0]:
        raise errors.LengthMismatch("bits, truth, and teacher lengths must align")
    preds = rule_predict_batch(model, bits)
    clauses = [c for rule in model.rules for c in rule.clauses]
    num_clauses = len(clauses)
    total_literals = sum(len(c.literals) for c in clauses)
    return Metrics(
        accuracy=float((preds == truth).mean()),
        fidelity=float((preds == teacher).mean()),
        runtime_seconds=float(runtime_seconds),
        num_clauses=num_clauses,
        avg_clause_length=total_literals / num_clauses,
    )


# ---- rendering / persistence ----

def render_clause(clause, names=None):
    if not clause.literals:
        return "TRUE"
    parts = []
    for pid, positive in clause.literals:
        name = names[pid] if names else f"p{pid}"
        parts.append(name if positive else f"¬{name}")
    return "(" + " ∧ ".join(parts) + ")"


def render_rule(rule, names=None):
    if not rule.clauses:
        return f"FALSE ⇒ class {rule.target_class}"
    body = " ∨ ".join(render_clause(c, names) for c in rule.clauses)
    return f"{body} ⇒ class {rule.target_class}"


def model_to_json(model):
    return {
        "num_predicates": model.num_predicates,
        "default_class": model.default_class,
        "predicates": predicates_to_json(model.predicate_set)
        if model.predicate_set is not None
        else None,
        "tree": tree_to_json(model.tree),
        "rules": [
            {
                "class": rule.target_class,
                "clauses": [
                    {
                        "literals": [[pid, positive] for pid, positive in c.literals],
                        "source": c.source,
                        "support": c.support,
                        "text": render_clause(c),
                    }
                    for c in rule.clauses
                ],
                "text": render_rule(rule),
            }
            for rule in model.rules
        ],
    }


def model_from_json(obj):
    rules = [
        DnfRule(
            target_class=int(entry["class"]),
            clauses=[
                Clause(
                    literals=tuple((int(p), bool(b)) for p, b in c["literals"]),
                    source=c.get("source", DISTILLED),
                    support=int(c.get("support", 0)),
                )
                for c in entry["clauses"]
            ],
        )
        for entry in obj["rules"]
    ]
    pset = predicates_from_json(obj["predicates"]) if obj.get("predicates") else None
    return RuleModel(
        tree=tree_from_json(obj["tree"]),
        rules=rules,
        default_class=int(obj["default_class"]),
        num_predicates=int(obj["num_predicates"]),
        predicate_set=pset,
    )


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_json(model), f, indent=2)
        f.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as f:
        return model_from_json(json.load(f))


def metrics_to_json(m):
    return {
        "accuracy": m.accuracy,
        "fidelity": m.fidelity,
        "runtime_seconds": m.runtime_seconds,
        "num_clauses": m.num_clauses,
        "avg_clause_length": m.avg_clause_length,
    }


def metrics_from_json(obj):
    return Metrics(
        accuracy=float(obj["accuracy"]),
        fidelity=float(obj["fidelity"]),
        runtime_seconds=float(obj["runtime_seconds"]),
        num_clauses=int(obj["num_clauses"]),
        avg_clause_length=float(obj["avg_clause_length"]),
    )

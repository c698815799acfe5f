import itertools
import json

import numpy as np
import pytest

from neurologic import errors
from neurologic.rules import (
    Clause,
    DnfRule,
    Metrics,
    distill,
    enumerate_clauses,
    model_from_json,
    model_to_json,
    render_clause,
    render_rule,
    rule_predict,
    rule_predict_batch,
    score,
)
from neurologic.tree import TreeParams, tree_predict_batch

LOOSE = TreeParams(max_depth=12, min_samples_leaf=1, min_gain=0.0)


def literal_sets(rule):
    return [clause.literal_set() for clause in rule.clauses]


class TestEnumerate:
    def test_worked_four_predicate_example(self):
        rows = [
            [1, 1, 1, 1],
            [1, 1, 1, 0],
            [1, 1, 1, 0],
            [1, 1, 0, 1],
            [1, 1, 0, 1],
        ]
        rule = enumerate_clauses(rows, target_class=0)
        expected = {
            frozenset({(0, True), (1, True), (2, True), (3, True)}),
            frozenset({(0, True), (1, True), (2, True), (3, False)}),
            frozenset({(0, True), (1, True), (2, False), (3, True)}),
        }
        assert set(literal_sets(rule)) == expected
        assert len(rule.clauses) == 3
        # ordering contract: support desc, then ascending lexicographic bits
        assert [c.support for c in rule.clauses] == [2, 2, 1]
        assert rule.clauses[0].literal_set() == frozenset(
            {(0, True), (1, True), (2, False), (3, True)}
        )

    def test_single_all_zero_row(self):
        rule = enumerate_clauses([[0, 0]], target_class=1)
        assert literal_sets(rule) == [frozenset({(0, False), (1, False)})]
        assert rule.clauses[0].support == 1

    def test_identical_rows_collapse(self):
        rule = enumerate_clauses([[1, 0]] * 7, target_class=0)
        assert len(rule.clauses) == 1
        assert rule.clauses[0].support == 7

    def test_completeness_on_random_bits(self):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, size=(40, 5)).astype(np.uint8)
        rule = enumerate_clauses(bits, target_class=0)
        for row in bits:
            assert any(c.satisfied(row) for c in rule.clauses)


class TestDistill:
    def test_two_class_keyed_bits_give_single_literal_clauses(self):
        teacher = np.array([0, 0, 1, 1, 0, 1])
        bits = np.stack([(teacher == 0), (teacher == 1)], axis=1).astype(np.uint8)
        model = distill(bits, teacher, LOOSE, num_classes=2)
        assert model.tree.depth() <= 2
        for c in range(2):
            clauses = model.rules[c].clauses
            assert len(clauses) == 1
            assert len(clauses[0].literals) == 1

    def test_four_class_keyed_bits(self):
        rng = np.random.default_rng(1)
        teacher = rng.integers(0, 4, size=80)
        bits = np.stack([teacher == c for c in range(4)], axis=1).astype(np.uint8)
        model = distill(bits, teacher, LOOSE, num_classes=4)
        assert model.tree.depth() <= 4
        preds = rule_predict_batch(model, bits)
        assert np.array_equal(preds, teacher)

    def test_constant_teacher_gives_universal_clause(self):
        bits = np.array([[0, 1], [1, 0], [1, 1]], dtype=np.uint8)
        model = distill(bits, [1, 1, 1], LOOSE, num_classes=2)
        assert model.default_class == 1
        assert model.num_clauses == 1
        clause = model.rules[1].clauses[0]
        assert clause.literals == ()
        assert rule_predict(model, [0, 0]) == 1

    def test_rule_predict_equals_tree_predict_on_hypercube(self):
        rng = np.random.default_rng(2)
        for m in (3, 5, 8):
            bits = rng.integers(0, 2, size=(60, m)).astype(np.uint8)
            teacher = rng.integers(0, 3, size=60)
            model = distill(bits, teacher, LOOSE, num_classes=3)
            cube = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.uint8)
            assert np.array_equal(
                rule_predict_batch(model, cube),
                tree_predict_batch(model.tree, cube.astype(float)),
            )

    def test_distilled_not_larger_than_enumerated(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            bits = rng.integers(0, 2, size=(50, 6)).astype(np.uint8)
            teacher = rng.integers(0, 2, size=50)
            model = distill(bits, teacher, LOOSE, num_classes=2)
            for c in range(2):
                class_rows = bits[teacher == c]
                if class_rows.shape[0] == 0:
                    continue
                enumerated = enumerate_clauses(class_rows, c)
                assert len(model.rules[c].clauses) <= len(enumerated.clauses)

    def test_distilled_clause_sets_distinct(self):
        rng = np.random.default_rng(4)
        bits = rng.integers(0, 2, size=(100, 7)).astype(np.uint8)
        teacher = rng.integers(0, 3, size=100)
        model = distill(bits, teacher, LOOSE, num_classes=3)
        seen = [c.literal_set() for r in model.rules for c in r.clauses]
        assert len(seen) == len(set(seen))

    def test_clause_length_bounded_by_predicate_count(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            m = int(rng.integers(2, 9))
            bits = rng.integers(0, 2, size=(80, m)).astype(np.uint8)
            teacher = rng.integers(0, 2, size=80)
            model = distill(bits, teacher, LOOSE, num_classes=2)
            metrics = score(model, bits, teacher, teacher, 0.0)
            assert metrics.avg_clause_length <= m
            for rule in model.rules:
                for clause in rule.clauses:
                    assert len(clause.literals) <= m

    def test_empty_input_rejected(self):
        with pytest.raises(errors.EmptyInput):
            distill(np.zeros((0, 3), dtype=np.uint8), [], LOOSE)


class TestPredictAndScore:
    def make_model(self):
        bits = np.array(
            [[1, 0], [1, 1], [0, 0], [0, 1], [1, 0], [0, 0]], dtype=np.uint8
        )
        teacher = np.array([1, 1, 0, 0, 1, 0])
        return distill(bits, teacher, LOOSE, num_classes=2), bits, teacher

    def test_satisfying_row_returns_class(self):
        model, bits, teacher = self.make_model()
        for row, label in zip(bits, teacher):
            assert rule_predict(model, row) == label

    def test_length_mismatch(self):
        model, _, _ = self.make_model()
        with pytest.raises(errors.LengthMismatch):
            rule_predict(model, [1, 0, 1])
        with pytest.raises(errors.LengthMismatch):
            score(model, np.zeros((2, 2), np.uint8), [0], [0, 1], 0.0)

    def test_perfect_model_scores_one(self):
        model, bits, teacher = self.make_model()
        metrics = score(model, bits, teacher, teacher, runtime_seconds=1.5)
        assert metrics.accuracy == 1.0
        assert metrics.fidelity == 1.0
        assert metrics.runtime_seconds == 1.5

    def test_average_clause_length_arithmetic(self):
        model, _, _ = self.make_model()
        model.rules = [
            DnfRule(0, [Clause(((0, True), (1, False), (2, True)), "distilled", 1)]),
            DnfRule(1, [Clause(tuple((i, True) for i in range(5)), "distilled", 1)]),
        ]
        model.num_predicates = 5
        metrics = score(
            model,
            np.zeros((1, 5), np.uint8),
            [0],
            [0],
            0.0,
        )
        assert metrics.avg_clause_length == 4.0

    def test_fidelity_bounded_by_leaf_histograms(self):
        model, bits, teacher = self.make_model()
        metrics = score(model, bits, bits[:, 0], teacher, 0.0)
        from neurologic.tree import LeafNode

        hist_acc = sum(
            max(n.counts) for n in model.tree.nodes if isinstance(n, LeafNode)
        ) / len(teacher)
        assert metrics.fidelity >= hist_acc - 1e-12


def test_metrics_invariants():
    with pytest.raises(ValueError):
        Metrics(accuracy=1.2, fidelity=0.5, runtime_seconds=0, num_clauses=1, avg_clause_length=1)
    with pytest.raises(ValueError):
        Metrics(accuracy=0.5, fidelity=0.5, runtime_seconds=0, num_clauses=0, avg_clause_length=0)


def test_render_readable():
    clause = Clause(((3, True), (7, False)), "distilled", 2)
    assert render_clause(clause) == "(p3 ∧ ¬p7)"
    rule = DnfRule(2, [clause])
    assert render_rule(rule).endswith("⇒ class 2")


def test_model_json_round_trip():
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, size=(60, 5)).astype(np.uint8)
    teacher = rng.integers(0, 2, size=60)
    model = distill(bits, teacher, TreeParams(max_depth=4, min_samples_leaf=2, min_gain=1e-4), num_classes=2)
    payload = json.loads(json.dumps(model_to_json(model)))
    again = model_from_json(payload)
    cube = rng.integers(0, 2, size=(64, 5)).astype(np.uint8)
    assert np.array_equal(rule_predict_batch(again, cube), rule_predict_batch(model, cube))

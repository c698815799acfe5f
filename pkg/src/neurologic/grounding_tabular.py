"""Grounding hidden predicates in raw feature space.

Each predicate p_j induces a supervised dataset over the class rows
(features -> predicate truth).  Two grounders approximate it: a decision
tree, and enumerative synthesis over a small DSL of threshold atoms on
feature functions combined with not/and/or.  The synthesis objective is
misclassification rate plus lambda times expression node count.
"""

import json
import re
from dataclasses import dataclass, field
from math import isfinite

import numpy as np

from . import errors
from .tree import extract_paths, fit_tree, tree_predict_batch

LEQ = "<="
GT = ">"


@dataclass
class GroundingDataset:
    rows: np.ndarray            # (n_c, d) features of class-c samples
    targets: np.ndarray         # (n_c,) predicate truth in {0, 1}
    predicate_id: int
    n_active: int = 0
    n_inactive: int = 0
    trivial: bool = False

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.uint8)
        self.n_active = int(self.targets.sum())
        self.n_inactive = int(self.targets.shape[0] - self.n_active)
        self.trivial = self.n_active == 0 or self.n_inactive == 0


def build_grounding_dataset(ds, target_class, predicate_values, predicate_id=0):
    """Restrict to X_c and pair features with the predicate's truth values."""
    predicate_values = np.asarray(predicate_values)
    if predicate_values.shape[0] != ds.n:
        raise errors.LengthMismatch("predicate evaluations must align with dataset rows")
    mask = ds.labels == target_class
    if not mask.any():
        raise errors.EmptyClass(f"no rows with label {target_class}")
    return GroundingDataset(
        rows=ds.features[mask],
        targets=predicate_values[mask].astype(np.uint8),
        predicate_id=predicate_id,
    )


def ground_with_tree(gd, params):
    """Decision-tree grounder; returns (tree, agreement on gd rows)."""
    if gd.trivial:
        raise errors.TrivialTarget("predicate is single-valued on the class rows")
    tree = fit_tree(gd.rows, gd.targets.astype(np.int64), params, num_classes=2)
    agreement = float((tree_predict_batch(tree, gd.rows) == gd.targets).mean())
    return tree, agreement


# ---- DSL ----

@dataclass(frozen=True)
class FuncSpec:
    """A real-valued function of the feature vector.

    kind "feat": x_f; "sq": x_f^2; "lin": w1*x_f1 + w2*x_f2.
    terms is ((feature, weight), ...) with one entry for feat/sq.
    """

    kind: str
    terms: tuple

    def evaluate_matrix(self, X):
        if self.kind == "feat":
            f, _ = self.terms[0]
            return X[:, f]
        if self.kind == "sq":
            f, _ = self.terms[0]
            return X[:, f] * X[:, f]
        out = np.zeros(X.shape[0], dtype=np.float64)
        for f, w in self.terms:
            out = out + w * X[:, f]
        return out

    def max_feature(self):
        return max(f for f, _ in self.terms)

    def render(self, names=None):
        def name(f):
            return names[f] if names else f"x{f}"

        if self.kind == "feat":
            return name(self.terms[0][0])
        if self.kind == "sq":
            return f"{name(self.terms[0][0])}²"
        return " + ".join(f"{w:g}·{name(f)}" for f, w in self.terms)


@dataclass(frozen=True)
class Atom:
    fn: FuncSpec
    op: str                     # "<=" or ">"
    theta: float

    def __post_init__(self):
        if self.op not in (LEQ, GT):
            raise ValueError(f"bad comparator {self.op!r}")
        if not isfinite(self.theta):
            raise ValueError("theta must be finite")


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


def expr_size(expr):
    if isinstance(expr, Atom):
        return 1
    if isinstance(expr, Not):
        return 1 + expr_size(expr.child)
    return 1 + expr_size(expr.left) + expr_size(expr.right)


def eval_expression(expr, x):
    """Boolean value of the expression on one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(expr, Atom):
        if expr.fn.max_feature() >= x.shape[0]:
            raise errors.FeatureOutOfRange(
                f"expression references feature {expr.fn.max_feature()}, "
                f"vector has {x.shape[0]}"
            )
        value = float(expr.fn.evaluate_matrix(x[None, :])[0])
        return value <= expr.theta if expr.op == LEQ else value > expr.theta
    if isinstance(expr, Not):
        return not eval_expression(expr.child, x)
    if isinstance(expr, And):
        return eval_expression(expr.left, x) and eval_expression(expr.right, x)
    if isinstance(expr, Or):
        return eval_expression(expr.left, x) or eval_expression(expr.right, x)
    raise TypeError(f"not an expression node: {expr!r}")


def eval_matrix(expr, X):
    X = np.asarray(X, dtype=np.float64)
    if isinstance(expr, Atom):
        if expr.fn.max_feature() >= X.shape[1]:
            raise errors.FeatureOutOfRange(
                f"expression references feature {expr.fn.max_feature()}, "
                f"matrix has {X.shape[1]} columns"
            )
        values = expr.fn.evaluate_matrix(X)
        return values <= expr.theta if expr.op == LEQ else values > expr.theta
    if isinstance(expr, Not):
        return ~eval_matrix(expr.child, X)
    if isinstance(expr, And):
        return eval_matrix(expr.left, X) & eval_matrix(expr.right, X)
    if isinstance(expr, Or):
        return eval_matrix(expr.left, X) | eval_matrix(expr.right, X)
    raise TypeError(f"not an expression node: {expr!r}")


def render(expr, names=None):
    if isinstance(expr, Atom):
        return f"({expr.fn.render(names)} {expr.op} {expr.theta:g})"
    if isinstance(expr, Not):
        return f"¬{render(expr.child, names)}"
    if isinstance(expr, And):
        return f"({render(expr.left, names)} ∧ {render(expr.right, names)})"
    return f"({render(expr.left, names)} ∨ {render(expr.right, names)})"


# ---- synthesis ----

@dataclass
class SynthesisParams:
    lambda_: float = 0.01
    max_size: int = 9
    beam_width: int = 64
    quantiles: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    coef_grid: tuple = (-1.0, 1.0, -0.5, 0.5)
    functions: tuple = ("feat", "sq", "lin")
    max_levels: int = 4
    exhaustive: bool = False

    def __post_init__(self):
        if self.lambda_ < 0:
            raise ValueError("lambda must be >= 0")
        if self.max_size < 1 or self.beam_width < 1:
            raise ValueError("max_size and beam_width must be >= 1")
        if self.exhaustive and self.max_size > 3:
            raise ValueError("exhaustive mode supports max_size <= 3 only")


@dataclass
class SynthesisResult:
    expression: object
    objective: float
    loss: float
    size: int
    budget_exhausted: bool = False


@dataclass
class _Candidate:
    expr: object
    truth: np.ndarray
    size: int
    seq: int
    loss: float
    objective: float

    def key(self):
        return (self.objective, self.size, self.seq)


def _function_specs(d, params):
    specs = []
    for kind in params.functions:
        if kind == "feat":
            specs.extend(FuncSpec("feat", ((f, 1.0),)) for f in range(d))
        elif kind == "sq":
            specs.extend(FuncSpec("sq", ((f, 1.0),)) for f in range(d))
        elif kind == "lin":
            for f1 in range(d):
                for f2 in range(f1 + 1, d):
                    for w1 in params.coef_grid:
                        for w2 in params.coef_grid:
                            specs.append(FuncSpec("lin", ((f1, w1), (f2, w2))))
        else:
            raise ValueError(f"unknown function kind {kind!r}")
    return specs


def atom_grid(X, params):
    """All atoms over the function specs with per-function decile thresholds."""
    atoms = []
    for spec in _function_specs(X.shape[1], params):
        values = spec.evaluate_matrix(X)
        thresholds = []
        for q in params.quantiles:
            t = float(np.quantile(values, q))
            if not thresholds or t != thresholds[-1]:
                thresholds.append(t)
        for op in (LEQ, GT):
            for theta in thresholds:
                atoms.append(Atom(spec, op, theta))
    return atoms


def synthesize_expression(gd, params=None):
    """Search the DSL for the expression minimizing loss + lambda * size.

    Deterministic: candidates are ordered by (objective, size, construction
    order).  Beam search by default; `exhaustive=True` (max_size <= 3)
    enumerates the full grammar of sizes 1-3.
    """
    params = params or SynthesisParams()
    if gd.trivial:
        raise errors.TrivialTarget("predicate is single-valued on the class rows")
    X = gd.rows
    targets = gd.targets.astype(bool)
    n = targets.shape[0]
    lam = params.lambda_

    seq_counter = [0]

    def make(expr, truth, size):
        loss = float(np.count_nonzero(truth != targets)) / n
        cand = _Candidate(
            expr=expr,
            truth=truth,
            size=size,
            seq=seq_counter[0],
            loss=loss,
            objective=loss + lam * size,
        )
        seq_counter[0] += 1
        return cand

    atoms = [make(a, eval_matrix(a, X), 1) for a in atom_grid(X, params)]
    if not atoms:
        raise errors.EmptyInput("atom grid is empty")

    if params.exhaustive:
        pool = list(atoms)
        if params.max_size >= 2:
            pool.extend(make(Not(a.expr), ~a.truth, 2) for a in atoms)
        if params.max_size >= 3:
            for i in range(len(atoms)):
                for j in range(i + 1, len(atoms)):
                    a, b = atoms[i], atoms[j]
                    pool.append(make(And(a.expr, b.expr), a.truth & b.truth, 3))
                    pool.append(make(Or(a.expr, b.expr), a.truth | b.truth, 3))
        best = min(pool, key=_Candidate.key)
        return SynthesisResult(
            expression=best.expr,
            objective=best.objective,
            loss=best.loss,
            size=best.size,
            budget_exhausted=False,
        )

    def dedupe(cands):
        by_truth = {}
        for c in cands:
            key = c.truth.tobytes()
            prev = by_truth.get(key)
            if prev is None or c.key() < prev.key():
                by_truth[key] = c
        return sorted(by_truth.values(), key=_Candidate.key)

    beam = dedupe(atoms)[: params.beam_width]
    best = beam[0]
    budget_exhausted = False
    for level in range(params.max_levels):
        fresh = []
        for c in beam:
            if c.size + 1 <= params.max_size:
                fresh.append(make(Not(c.expr), ~c.truth, c.size + 1))
        for i in range(len(beam)):
            for j in range(i + 1, len(beam)):
                a, b = beam[i], beam[j]
                size = a.size + b.size + 1
                if size > params.max_size:
                    continue
                fresh.append(make(And(a.expr, b.expr), a.truth & b.truth, size))
                fresh.append(make(Or(a.expr, b.expr), a.truth | b.truth, size))
        if not fresh:
            break
        beam = dedupe(beam + fresh)[: params.beam_width]
        if beam[0].key() < best.key():
            best = beam[0]
        else:
            break
    else:
        budget_exhausted = best.loss > 0.0

    return SynthesisResult(
        expression=best.expr,
        objective=best.objective,
        loss=best.loss,
        size=best.size,
        budget_exhausted=budget_exhausted,
    )


def tree_to_expression(tree):
    """OR of AND-chains over the paths the tree labels 1 (true).

    Lets the tree grounder reuse the expression machinery; truth values on
    any input match tree routing.
    """
    def path_expr(literals):
        expr = None
        for feature, op, theta in literals:
            atom = Atom(FuncSpec("feat", ((feature, 1.0),)), op, float(theta))
            expr = atom if expr is None else And(expr, atom)
        if expr is None:
            anchor = Atom(FuncSpec("feat", ((0, 1.0),)), LEQ, 0.0)
            return Or(anchor, Not(anchor))      # tautology for a bare root leaf
        return expr

    positive = [literals for literals, leaf_class, _ in extract_paths(tree) if leaf_class == 1]
    if not positive:
        anchor = Atom(FuncSpec("feat", ((0, 1.0),)), LEQ, 0.0)
        return And(anchor, Not(anchor))          # contradiction: tree never says 1
    expr = path_expr(positive[0])
    for literals in positive[1:]:
        expr = Or(expr, path_expr(literals))
    return expr


# ---- s-expression serialization ----

def to_sexpr(expr):
    if isinstance(expr, Atom):
        fn = expr.fn
        if fn.kind == "feat":
            f = f"x{fn.terms[0][0]}"
        elif fn.kind == "sq":
            f = f"(sq x{fn.terms[0][0]})"
        else:
            inner = " ".join(f"{w!r} x{f}" for f, w in fn.terms)
            f = f"(lin {inner})"
        return f"({expr.op} {f} {expr.theta!r})"
    if isinstance(expr, Not):
        return f"(not {to_sexpr(expr.child)})"
    if isinstance(expr, And):
        return f"(and {to_sexpr(expr.left)} {to_sexpr(expr.right)})"
    return f"(or {to_sexpr(expr.left)} {to_sexpr(expr.right)})"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_sexpr(text):
    tokens = _TOKEN.findall(text)
    pos = [0]

    def next_token():
        if pos[0] >= len(tokens):
            raise errors.ParseError("<sexpr>", "unexpected end of input")
        tok = tokens[pos[0]]
        pos[0] += 1
        return tok

    def parse_feature(tok):
        if not re.fullmatch(r"x\d+", tok):
            raise errors.ParseError("<sexpr>", f"expected feature name, got {tok!r}")
        return int(tok[1:])

    def parse_fn():
        tok = next_token()
        if tok == "(":
            head = next_token()
            if head == "sq":
                spec = FuncSpec("sq", ((parse_feature(next_token()), 1.0),))
                if next_token() != ")":
                    raise errors.ParseError("<sexpr>", "expected ) after sq")
                return spec
            if head == "lin":
                terms = []
                while True:
                    tok = next_token()
                    if tok == ")":
                        break
                    terms.append((parse_feature(next_token()), float(tok)))
                return FuncSpec("lin", tuple((f, w) for f, w in terms))
            raise errors.ParseError("<sexpr>", f"unknown function {head!r}")
        return FuncSpec("feat", ((parse_feature(tok), 1.0),))

    def parse_node():
        tok = next_token()
        if tok != "(":
            raise errors.ParseError("<sexpr>", f"expected (, got {tok!r}")
        head = next_token()
        if head in (LEQ, GT):
            fn = parse_fn()
            theta = float(next_token())
            node = Atom(fn, head, theta)
        elif head == "not":
            node = Not(parse_node())
        elif head == "and":
            node = And(parse_node(), parse_node())
        elif head == "or":
            node = Or(parse_node(), parse_node())
        else:
            raise errors.ParseError("<sexpr>", f"unknown operator {head!r}")
        if next_token() != ")":
            raise errors.ParseError("<sexpr>", "expected )")
        return node

    node = parse_node()
    if pos[0] != len(tokens):
        raise errors.ParseError("<sexpr>", "trailing tokens after expression")
    return node


def result_to_json(result, names=None):
    return {
        "sexpr": to_sexpr(result.expression),
        "text": render(result.expression, names),
        "objective": result.objective,
        "loss": result.loss,
        "size": result.size,
        "budget_exhausted": result.budget_exhausted,
    }

"""Command-line pipeline driver.

Thin adapters only: each subcommand parses flags, calls library operations,
and writes files; no algorithmic logic lives here.  Exit codes: 0 success,
1 domain error, 2 usage error.
"""

import argparse
import json
import os
import sys
import time
from importlib import resources

import numpy as np

from . import errors, grounding_lexical, grounding_tabular, mining, mlp, rules, store
from .oracle import spawn_protocol_client
from .tree import TreeParams

DISTILL_DEFAULTS = TreeParams(max_depth=7, min_samples_leaf=15, min_gain=2e-3)


def _threads_default():
    value = os.environ.get("NEUROLOGIC_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _add_tree_flags(parser):
    parser.add_argument("--max-depth", type=int, default=DISTILL_DEFAULTS.max_depth)
    parser.add_argument(
        "--min-leaf", type=int, default=DISTILL_DEFAULTS.min_samples_leaf
    )
    parser.add_argument("--min-gain", type=float, default=DISTILL_DEFAULTS.min_gain)


def _tree_params(args):
    return TreeParams(
        max_depth=args.max_depth,
        min_samples_leaf=args.min_leaf,
        min_gain=args.min_gain,
    )


def _load_dataset(args):
    return store.ingest_csv(args.data, args.label_column, args.num_classes)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="neurologic",
        description="Extract DNF rules from neural activations and ground them.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=_threads_default(),
        help="worker cap for oracle queries (NEUROLOGIC_THREADS fallback)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-xor", help="generate the synthetic XOR benchmark CSV")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-mlp", help="train the feed-forward network")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--num-classes", type=int, required=True)
    p.add_argument("--config", help="MLP config JSON (overrides the flags below)")
    p.add_argument("--hidden", default="64,32", help="comma-separated hidden sizes")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-out", help="per-epoch loss history CSV")

    p = sub.add_parser("dump-acts", help="dump hidden-layer activations to NLAD")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--num-classes", type=int, required=True)
    p.add_argument("--layer", type=int, required=True)
    p.add_argument(
        "--split",
        choices=["train", "test", "all"],
        default="train",
        help="which split of the data to dump (default: train)",
    )
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("mine", help="mine top-k hidden predicates per class")
    p.add_argument("--dump", required=True)
    p.add_argument("--top-k", type=int, default=15)
    p.add_argument("--out", required=True)

    p = sub.add_parser("build-rules", help="build and distill the DNF rule model")
    p.add_argument("--dump", required=True)
    p.add_argument("--predicates", required=True)
    p.add_argument(
        "--teacher",
        choices=["predictions", "labels"],
        default="predictions",
        help="distill against network predictions (default) or ground truth",
    )
    _add_tree_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score a rule model on a dump")
    p.add_argument("--rules", required=True)
    p.add_argument("--dump", required=True)
    p.add_argument("--runtime", type=float, default=0.0)
    p.add_argument("--out")

    p = sub.add_parser("ground-tabular", help="ground one predicate in feature space")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--num-classes", type=int, required=True)
    p.add_argument("--dump", required=True)
    p.add_argument("--predicates", required=True)
    p.add_argument("--class", dest="target_class", type=int, required=True)
    p.add_argument("--rank", type=int, default=0, help="predicate rank within the class")
    p.add_argument("--grounder", choices=["synthesis", "tree"], default="synthesis")
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.01)
    p.add_argument("--max-size", type=int, default=9)
    p.add_argument("--beam-width", type=int, default=64)
    p.add_argument("--exhaustive", action="store_true")
    _add_tree_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("ground-lexical", help="ground a class DNF over a text corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--class", dest="target_class", type=int, required=True)
    p.add_argument(
        "--oracle",
        required=True,
        nargs="+",
        help="oracle endpoint: host:port, or an argv to spawn over stdio",
    )
    p.add_argument("--alpha", type=float, default=0.20)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--tau", type=float, default=0.03)
    p.add_argument("--flip-mode", choices=["predicate", "class"], default="predicate")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--out")
    p.add_argument("--buckets-out", help="positional bucket histogram CSV")
    p.add_argument("--table", action="store_true", help="print the aligned table")

    p = sub.add_parser("report", help="render metrics or grounded rules")
    p.add_argument("--metrics")
    p.add_argument("--grounded")
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")

    p = sub.add_parser("pipeline", help="end-to-end run printing a metrics row")
    p.add_argument("--dataset", choices=["xor"], default="xor")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--top-k", type=int)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--out", help="write the metrics JSON here as well")

    return parser


def _cmd_gen_xor(args):
    ds = mlp.generate_xor(args.n, args.seed)
    store.write_csv(ds, args.out)
    print(f"wrote {ds.n} rows to {args.out}")
    return 0


def _mlp_config(args, d, num_classes):
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            cfg = mlp.config_from_json(json.load(f))
        return cfg
    hidden = [int(s) for s in args.hidden.split(",") if s]
    return mlp.MlpConfig(
        layer_sizes=[d] + hidden + [num_classes],
        seed=args.seed,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
    )


def _cmd_train_mlp(args):
    ds = _load_dataset(args)
    config = _mlp_config(args, ds.d, ds.num_classes)
    result = mlp.train_mlp(config, ds)
    mlp.save_model(result.model, args.out)
    if args.loss_out:
        mlp.save_loss_history(result.loss_history, args.loss_out)
    final = result.loss_history[-1] if result.loss_history else float("nan")
    print(f"trained {config.layer_sizes} for {config.epochs} epochs, final loss {final:.4f}")
    return 0


def _cmd_dump_acts(args):
    ds = _load_dataset(args)
    if args.split != "all":
        train, test = store.split_dataset(ds, args.test_fraction, args.seed)
        ds = train if args.split == "train" else test
    model = mlp.load_model(args.model)
    dump = mlp.dump_activations(model, ds, args.layer)
    store.write_activation_dump(dump, args.out)
    print(f"wrote dump n={dump.n} h={dump.h} layer={dump.layer} to {args.out}")
    return 0


def _cmd_mine(args):
    dump = store.read_activation_dump(args.dump)
    pset = mining.mine_predicates(dump, args.top_k)
    mining.save_predicates(pset, args.out)
    note = " (clipped to h)" if pset.clipped else ""
    print(
        f"mined {len(pset.all_predicates())} predicates "
        f"(k={args.top_k}{note}), mean purity {pset.mean_purity():.3f}"
    )
    return 0


def _cmd_build_rules(args):
    dump = store.read_activation_dump(args.dump)
    pset = mining.load_predicates(args.predicates)
    bits = mining.evaluate_predicates(pset, dump)
    if args.teacher == "predictions":
        if dump.predictions is None:
            raise errors.EmptyInput("dump has no predictions; use --teacher labels")
        teacher = dump.predictions
    else:
        teacher = dump.labels
    model = rules.distill(
        bits,
        teacher,
        _tree_params(args),
        num_classes=dump.num_classes,
        predicate_set=pset,
    )
    rules.save_model(model, args.out)
    print(f"distilled {model.num_clauses} clauses over {model.num_predicates} predicates")
    return 0


def _cmd_evaluate(args):
    model = rules.load_model(args.rules)
    dump = store.read_activation_dump(args.dump)
    if model.predicate_set is None:
        raise errors.EmptyInput("rules file lacks the predicate set")
    bits = mining.evaluate_predicates(model.predicate_set, dump)
    teacher = dump.predictions if dump.predictions is not None else dump.labels
    metrics = rules.score(model, bits, dump.labels, teacher, args.runtime)
    payload = rules.metrics_to_json(metrics)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    print(_metrics_text(payload), end="")
    return 0


def _cmd_ground_tabular(args):
    ds = _load_dataset(args)
    dump = store.read_activation_dump(args.dump)
    pset = mining.load_predicates(args.predicates)
    if not 0 <= args.target_class < len(pset.per_class):
        raise errors.LabelOutOfRange(f"class {args.target_class} not in predicate set")
    ranked = pset.per_class[args.target_class]
    if not 0 <= args.rank < len(ranked):
        raise errors.KTooLarge(f"rank {args.rank} outside [0, {len(ranked)})")
    predicate = ranked[args.rank]
    column = dump.values[:, predicate.neuron].astype(np.float64) >= predicate.threshold
    gd = grounding_tabular.build_grounding_dataset(
        ds, args.target_class, column.astype(np.uint8), predicate_id=predicate.neuron
    )
    if args.grounder == "tree":
        tree, agreement = grounding_tabular.ground_with_tree(gd, _tree_params(args))
        expr = grounding_tabular.tree_to_expression(tree)
        payload = {
            "grounder": "tree",
            "agreement": agreement,
            "sexpr": grounding_tabular.to_sexpr(expr),
            "text": grounding_tabular.render(expr, ds.feature_names),
        }
    else:
        params = grounding_tabular.SynthesisParams(
            lambda_=args.lambda_,
            max_size=args.max_size,
            beam_width=args.beam_width,
            exhaustive=args.exhaustive,
        )
        result = grounding_tabular.synthesize_expression(gd, params)
        payload = {"grounder": "synthesis"}
        payload.update(grounding_tabular.result_to_json(result, ds.feature_names))
    payload["predicate"] = {
        "class": args.target_class,
        "rank": args.rank,
        "neuron": predicate.neuron,
        "threshold": predicate.threshold,
        "n_active": gd.n_active,
        "n_inactive": gd.n_inactive,
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    print(text)
    return 0


def _cmd_ground_lexical(args):
    corpus = store.load_corpus(args.corpus)
    model = rules.load_model(args.rules)
    if model.predicate_set is None:
        raise errors.EmptyInput("rules file lacks the predicate set")
    if not 0 <= args.target_class < len(model.rules):
        raise errors.LabelOutOfRange(f"class {args.target_class} not in rule model")
    params = grounding_lexical.LexicalParams(
        alpha=args.alpha,
        window=args.window,
        tau=args.tau,
        flip_mode=args.flip_mode,
    )
    endpoint = args.oracle[0] if len(args.oracle) == 1 else list(args.oracle)
    client = spawn_protocol_client(endpoint, timeout=args.timeout)
    try:
        run = grounding_lexical.ground_class(
            corpus,
            model.rules[args.target_class],
            model.predicate_set,
            client,
            params,
            threads=args.threads,
        )
    finally:
        client.close()
    if args.out:
        grounding_lexical.save_grounding(run, args.out)
    if args.buckets_out:
        grounding_lexical.write_bucket_csv(run, args.buckets_out)
    if args.table:
        print(grounding_lexical.grounding_table(run), end="")
    else:
        print(json.dumps(grounding_lexical.grounding_to_json(run), indent=2))
    if run.partial:
        print("warning: oracle failed mid-run; results are partial", file=sys.stderr)
    return 0


def _metrics_text(payload):
    headers = ["Accuracy", "Fidelity", "Runtime(s)", "Clauses", "AvgLen"]
    row = [
        f"{payload['accuracy']:.4f}",
        f"{payload['fidelity']:.4f}",
        f"{payload['runtime_seconds']:.2f}",
        str(payload["num_clauses"]),
        f"{payload['avg_clause_length']:.2f}",
    ]
    widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join(v.ljust(w) for v, w in zip(row, widths)),
    ]
    return "\n".join(lines) + "\n"


def _metrics_csv(payload):
    keys = ["accuracy", "fidelity", "runtime_seconds", "num_clauses", "avg_clause_length"]
    return (
        ",".join(keys)
        + "\n"
        + ",".join(repr(payload[k]) if isinstance(payload[k], float) else str(payload[k]) for k in keys)
        + "\n"
    )


def _cmd_report(args):
    if bool(args.metrics) == bool(args.grounded):
        raise errors.EmptyInput("pass exactly one of --metrics or --grounded")
    if args.metrics:
        try:
            with open(args.metrics, "r", encoding="utf-8") as f:
                payload = json.load(f)
            payload = rules.metrics_to_json(rules.metrics_from_json(payload))
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise errors.ParseError(args.metrics, str(exc)) from exc
        if args.format == "json":
            print(json.dumps(payload, indent=2, sort_keys=True))
        elif args.format == "csv":
            print(_metrics_csv(payload), end="")
        else:
            print(_metrics_text(payload), end="")
        return 0
    try:
        with open(args.grounded, "r", encoding="utf-8") as f:
            run = grounding_lexical.grounding_from_json(json.load(f))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise errors.ParseError(args.grounded, str(exc)) from exc
    if args.format == "json":
        print(json.dumps(grounding_lexical.grounding_to_json(run), indent=2, sort_keys=True))
    elif args.format == "csv":
        lines = ["keyword,template,flips,total,rate,score"]
        for r in run.rules:
            lines.append(
                f"{r.keyword},{r.template.value},{r.flips},{r.total},"
                f"{r.flip_rate!r},{r.score!r}"
            )
        print("\n".join(lines))
    else:
        print(grounding_lexical.grounding_table(run), end="")
    return 0


def load_pipeline_config(dataset):
    with resources.files("neurologic.configs").joinpath(f"{dataset}.json").open(
        "r", encoding="utf-8"
    ) as f:
        return json.load(f)


def run_pipeline(dataset="xor", seed=0, n=None, top_k=None, test_fraction=None, epochs=None):
    """gen -> train -> dump -> mine -> distill -> score on the test split."""
    cfg = load_pipeline_config(dataset)
    n = n or cfg["n"]
    top_k = top_k or cfg["top_k"]
    test_fraction = test_fraction or cfg["test_fraction"]
    distill_params = TreeParams(
        max_depth=cfg["distill"]["max_depth"],
        min_samples_leaf=cfg["distill"]["min_samples_leaf"],
        min_gain=cfg["distill"]["min_gain"],
    )
    t0 = time.perf_counter()
    ds = mlp.generate_xor(n, seed)
    train, test = store.split_dataset(ds, test_fraction, seed)
    config = mlp.MlpConfig(
        layer_sizes=list(cfg["layer_sizes"]),
        seed=seed,
        learning_rate=cfg["learning_rate"],
        epochs=epochs or cfg["epochs"],
        batch_size=cfg["batch_size"],
    )
    model = mlp.train_mlp(config, train).model
    last_hidden = config.num_hidden - 1
    dump_train = mlp.dump_activations(model, train, last_hidden)
    dump_test = mlp.dump_activations(model, test, last_hidden)
    pset = mining.mine_predicates(dump_train, top_k)
    bits_train = mining.evaluate_predicates(pset, dump_train)
    rule_model = rules.distill(
        bits_train,
        dump_train.predictions,
        distill_params,
        num_classes=ds.num_classes,
        predicate_set=pset,
    )
    runtime = time.perf_counter() - t0
    bits_test = mining.evaluate_predicates(pset, dump_test)
    metrics = rules.score(
        rule_model, bits_test, dump_test.labels, dump_test.predictions, runtime
    )
    return metrics, rule_model


def _cmd_pipeline(args):
    metrics, _ = run_pipeline(
        dataset=args.dataset,
        seed=args.seed,
        n=args.n,
        top_k=args.top_k,
        test_fraction=args.test_fraction,
        epochs=args.epochs,
    )
    payload = rules.metrics_to_json(metrics)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    print(f"dataset={args.dataset} seed={args.seed}")
    print(_metrics_text(payload), end="")
    return 0


_COMMANDS = {
    "gen-xor": _cmd_gen_xor,
    "train-mlp": _cmd_train_mlp,
    "dump-acts": _cmd_dump_acts,
    "mine": _cmd_mine,
    "build-rules": _cmd_build_rules,
    "evaluate": _cmd_evaluate,
    "ground-tabular": _cmd_ground_tabular,
    "ground-lexical": _cmd_ground_lexical,
    "report": _cmd_report,
    "pipeline": _cmd_pipeline,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except errors.NeuroLogicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

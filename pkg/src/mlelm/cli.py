"""Command-line interface tying the toolkit together.

Subcommands: ``stats`` (dataset statistics, optionally verified against
expected values), ``train``, ``predict``, ``evaluate``, ``crossval`` and
``bench``.

Exit codes: 0 success, 1 operational error, 2 statistics-verification
failure. Timing lines are routed to stderr so that stdout and every
written file are byte-identical across runs with the same flags and seed;
the bench command's stdout is the timing table itself and is therefore
the one output that varies run to run.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from sklearn.base import clone

from .cv import cross_validate
from .data import load_arff, load_delimited, split, verify_against_spec
from .elm import ACTIVATIONS, ElmClassifier, load_model, save_model
from .errors import MlelmError
from .metrics import METRIC_FIELDS, example_based_metrics

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SPEC_MISMATCH = 2


@dataclass(frozen=True)
class TimingReport:
    """Median wall-clock seconds around the train and predict paths only;
    parsing and file I/O are never included."""

    dataset: str
    n_train: int
    n_test: int
    hidden_neurons: int
    train_seconds: float
    test_seconds: float


class _Parser(argparse.ArgumentParser):
    # Usage errors are operational errors (exit 1); exit 2 is reserved for
    # specification-verification failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _add_dataset_args(p, labels_required=True, repeated=False):
    action = "append" if repeated else "store"
    p.add_argument(
        "--dataset",
        action=action,
        required=True,
        help="path to the dataset file" + (" (repeatable)" if repeated else ""),
    )
    p.add_argument(
        "--labels",
        action=action,
        type=int,
        required=labels_required,
        default=None,
        help="number of trailing label attributes"
        + ("; repeat to match --dataset" if repeated else ""),
    )
    p.add_argument(
        "--labels-at-start",
        action="store_true",
        help="labels are the leading attributes instead of the trailing ones",
    )
    p.add_argument(
        "--data-format",
        choices=("auto", "arff", "delimited"),
        default="auto",
        help="file format; auto picks ARFF for .arff files, delimited otherwise",
    )
    p.add_argument("--delimiter", default=",", help="delimiter for delimited files")
    p.add_argument("--name", default=None, help="dataset display name")


def _add_estimator_args(p):
    p.add_argument(
        "--hidden",
        type=int,
        default=None,
        help="hidden layer width (default: min(1000, 10*labels + 2*features))",
    )
    p.add_argument("--activation", choices=sorted(ACTIVATIONS), default="sigmoid")
    p.add_argument(
        "--ridge",
        default="auto",
        help='Gram regularization: "auto" or a nonnegative number '
        "(0 solves the exact normal equations)",
    )
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument(
        "--threshold",
        default="auto",
        help='decision threshold: "auto" (calibrated on training scores) '
        'or "fixed:<value>"',
    )
    p.add_argument(
        "--top1-fallback",
        action="store_true",
        help="assign the best-scoring label when a prediction would be empty",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlelm", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "stats", help="dataset statistics, optionally verified against expected values"
    )
    _add_dataset_args(p)
    p.add_argument(
        "--expected",
        default=None,
        help="JSON file with expected samples/features/labels/"
        "label_cardinality/label_density",
    )
    p.add_argument("--report", default=None, help="write key=value report here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train a model and write it to disk")
    _add_dataset_args(p)
    _add_estimator_args(p)
    p.add_argument("--model", required=True, help="output model file (MLELM1)")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict label sets for a feature file")
    _add_dataset_args(p, labels_required=False)
    p.add_argument("--model", required=True, help="trained model file")
    p.add_argument("--out", required=True, help="output predictions file")
    p.add_argument(
        "--scores", action="store_true", help="append raw scores to each line"
    )
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="evaluate a model on a labeled dataset")
    _add_dataset_args(p)
    p.add_argument("--model", required=True, help="trained model file")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("crossval", help="k-fold cross-validation")
    _add_dataset_args(p)
    _add_estimator_args(p)
    p.add_argument("--k", type=int, default=10, help="number of folds")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("bench", help="wall-clock train/test timing table")
    _add_dataset_args(p, repeated=True)
    _add_estimator_args(p)
    p.add_argument(
        "--test-fraction", type=float, default=0.3, help="held-out fraction"
    )
    p.add_argument(
        "--repeats", type=int, default=5, help="measurements per dataset (median wins)"
    )
    p.set_defaults(func=cmd_bench)
    return parser


def _load_dataset(path, labels, args):
    fmt = args.data_format
    if fmt == "auto":
        fmt = "arff" if str(path).lower().endswith(".arff") else "delimited"
    if fmt == "arff":
        ds = load_arff(
            path,
            labels,
            labels_at_end=not args.labels_at_start,
            name=args.name,
        )
    else:
        ds = load_delimited(path, labels, delimiter=args.delimiter, name=args.name)
    if not ds.name:
        ds = replace(ds, name=Path(path).stem)
    return ds


def _estimator_from_args(args) -> ElmClassifier:
    if args.ridge == "auto":
        ridge = None
    else:
        ridge = float(args.ridge)
    if args.threshold == "auto":
        threshold = "auto"
    elif args.threshold.startswith("fixed:"):
        threshold = float(args.threshold[len("fixed:") :])
    else:
        raise ValueError('--threshold must be "auto" or "fixed:<value>"')
    return ElmClassifier(
        hidden_neurons=args.hidden,
        activation=args.activation,
        seed=args.seed,
        ridge=ridge,
        threshold=threshold,
        top1_fallback=args.top1_fallback,
    )


def _write_report(path, pairs) -> None:
    if not path:
        return
    text = "".join(f"{key}={value}\n" for key, value in pairs)
    Path(path).write_text(text, encoding="utf-8")


def _timing_line(name: str, seconds: float) -> None:
    print(f"{name}={seconds:.4f}", file=sys.stderr)


def _count(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.4f}"


def cmd_stats(args) -> int:
    ds = _load_dataset(args.dataset, args.labels, args)
    stats = ds.stats()
    rows = [
        ("dataset", ds.name),
        ("samples", stats.samples),
        ("features", stats.features),
        ("labels", stats.labels),
        ("label_cardinality", f"{stats.label_cardinality:.4f}"),
        ("label_density", f"{stats.label_density:.4f}"),
    ]
    if ds.n_features != stats.features:
        rows.insert(3, ("expanded_features", ds.n_features))
    for key, value in rows:
        print(f"{key}\t{value}")
    pairs = [("command", "stats")] + [(k, v) for k, v in rows]

    code = EXIT_OK
    if args.expected:
        expected = json.loads(Path(args.expected).read_text(encoding="utf-8"))
        verification = verify_against_spec(ds, expected)
        for check in verification.checks:
            status = "PASS" if check.passed else "FAIL"
            print(
                f"verify {check.field}\texpected={_count(check.expected)}"
                f"\tactual={_count(check.actual)}\t{status}"
            )
            pairs.append((f"verify_{check.field}", status))
        overall = "PASS" if verification.passed else "FAIL"
        print(f"verification\t{overall}")
        pairs.append(("verification", overall))
        if not verification.passed:
            code = EXIT_SPEC_MISMATCH
    _write_report(args.report, pairs)
    return code


def cmd_train(args) -> int:
    ds = _load_dataset(args.dataset, args.labels, args)
    estimator = _estimator_from_args(args)
    start = time.perf_counter()
    estimator.fit(ds.features, ds.labels, label_names=ds.label_names)
    train_seconds = time.perf_counter() - start
    save_model(estimator, args.model)
    print(f"model\t{args.model}")
    print(f"hidden_neurons\t{estimator.hidden_neurons_}")
    print(f"threshold\t{estimator.threshold_:.6f}")
    print(f"threshold_method\t{estimator.threshold_report_.method}")
    print(f"training_residual\t{estimator.training_residual_:.3e}")
    _timing_line("train_seconds", train_seconds)
    _write_report(
        args.report,
        [
            ("command", "train"),
            ("dataset", ds.name),
            ("samples", ds.n_samples),
            ("features", ds.n_features),
            ("labels", ds.n_labels),
            ("hidden_neurons", estimator.hidden_neurons_),
            ("activation", estimator.activation),
            ("seed", estimator.seed),
            ("ridge", f"{estimator.ridge_effective_:.10e}"),
            ("threshold", f"{estimator.threshold_:.10f}"),
            ("threshold_method", estimator.threshold_report_.method),
            ("training_residual", f"{estimator.training_residual_:.10e}"),
            ("model", args.model),
        ],
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    ds = _load_dataset(args.dataset, args.labels or 0, args)
    start = time.perf_counter()
    scores = model.decision_function(ds.features)
    predicted = model._labels_from_scores(scores)
    test_seconds = time.perf_counter() - start

    lines = []
    for i in range(predicted.shape[0]):
        names = [
            model.label_names_[j]
            for j in range(predicted.shape[1])
            if predicted[i, j]
        ]
        line = ",".join(names)
        if args.scores:
            line += "\t" + " ".join(f"{v:.6f}" for v in scores[i])
        lines.append(line)
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"predictions\t{args.out}")
    print(f"samples\t{predicted.shape[0]}")
    _timing_line("test_seconds", test_seconds)
    _write_report(
        args.report,
        [
            ("command", "predict"),
            ("dataset", ds.name),
            ("samples", predicted.shape[0]),
            ("out", args.out),
        ],
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    ds = _load_dataset(args.dataset, args.labels, args)
    if ds.n_labels != model.n_labels_:
        raise ValueError(
            f"dataset has {ds.n_labels} labels but the model predicts "
            f"{model.n_labels_}"
        )
    start = time.perf_counter()
    scores = model.decision_function(ds.features)
    predicted = model._labels_from_scores(scores)
    test_seconds = time.perf_counter() - start
    report = example_based_metrics(predicted, ds.labels)

    print(f"samples\t{report.sample_count}")
    for field in METRIC_FIELDS:
        print(f"{field}\t{getattr(report, field):.4f}")
    _timing_line("test_seconds", test_seconds)
    pairs = [
        ("command", "evaluate"),
        ("dataset", ds.name),
        ("samples", report.sample_count),
    ]
    pairs += [(field, f"{getattr(report, field):.10f}") for field in METRIC_FIELDS]
    _write_report(args.report, pairs)
    return EXIT_OK


def cmd_crossval(args) -> int:
    ds = _load_dataset(args.dataset, args.labels, args)
    estimator = _estimator_from_args(args)
    report = cross_validate(estimator, ds, args.k, args.seed)
    for field in METRIC_FIELDS:
        mean = getattr(report.mean, field)
        std = getattr(report.stddev, field)
        print(f"{field}: {mean:.4f}(±{std:.4f})")
    pairs = [
        ("command", "crossval"),
        ("dataset", ds.name),
        ("k", report.k),
        ("seed", report.seed),
    ]
    for field in METRIC_FIELDS:
        pairs.append((f"{field}_mean", f"{getattr(report.mean, field):.10f}"))
        pairs.append((f"{field}_std", f"{getattr(report.stddev, field):.10f}"))
    _write_report(args.report, pairs)
    return EXIT_OK


def bench_dataset(estimator, dataset, test_fraction=0.3, seed=0, repeats=5):
    """Measure train/test wall-clock time on a seeded split.

    The same configuration is fitted ``repeats`` times; returns a
    :class:`TimingReport` carrying the medians plus the raw samples as
    ``(report, train_times, test_times)``.
    """
    train_ds, test_ds = split(dataset, test_fraction, seed)
    train_times = []
    test_times = []
    fitted = None
    for _ in range(repeats):
        model = clone(estimator)
        start = time.perf_counter()
        model.fit(train_ds.features, train_ds.labels, label_names=train_ds.label_names)
        train_times.append(time.perf_counter() - start)
        start = time.perf_counter()
        scores = model.decision_function(test_ds.features)
        model._labels_from_scores(scores)
        test_times.append(time.perf_counter() - start)
        fitted = model
    report = TimingReport(
        dataset=dataset.name,
        n_train=train_ds.n_samples,
        n_test=test_ds.n_samples,
        hidden_neurons=fitted.hidden_neurons_,
        train_seconds=statistics.median(train_times),
        test_seconds=statistics.median(test_times),
    )
    return report, train_times, test_times


def cmd_bench(args) -> int:
    paths = args.dataset
    label_counts = args.labels
    if len(label_counts) == 1:
        label_counts = label_counts * len(paths)
    if len(label_counts) != len(paths):
        raise ValueError(
            f"got {len(paths)} --dataset flags but {len(label_counts)} --labels"
        )
    estimator = _estimator_from_args(args)
    print("dataset\tn_train\tn_test\thidden\ttrain_s\ttest_s")
    failures = 0
    for path, labels in zip(paths, label_counts):
        try:
            ds = _load_dataset(path, labels, args)
            report, train_times, test_times = bench_dataset(
                estimator, ds, args.test_fraction, args.seed, args.repeats
            )
        except (MlelmError, OSError, ValueError) as exc:
            failures += 1
            print(f"bench: {path}: {exc}", file=sys.stderr)
            continue
        for i, (tr, te) in enumerate(zip(train_times, test_times)):
            print(
                f"bench {report.dataset} repeat {i}: train={tr:.4f} test={te:.4f}",
                file=sys.stderr,
            )
        print(
            f"{report.dataset}\t{report.n_train}\t{report.n_test}"
            f"\t{report.hidden_neurons}"
            f"\t{report.train_seconds:.4f}\t{report.test_seconds:.4f}"
        )
    return EXIT_ERROR if failures else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MlelmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

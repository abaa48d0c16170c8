"""Command-line entry point: featurize, train, evaluate, predict, rules, benchmark."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from typing import Optional, Sequence

import numpy as np

from .dataset import SCORED_FEATURES, DataError, Dataset, featurize_sql, load_csv, load_features_csv
from .evaluation import DEFAULT_GRID, benchmark, benchmark_json, evaluate_model, render_table, summarize
from .linalg import SvdError
from .logic import BoundaryMode, NeuronKind
from .network import ModelConfig, TrainingError, dumps_model, load_model, score_batch, train
from .rules import extract_rules, render_rules, rules_to_json
from .selection import SelectionError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAIN = 0, 1, 2, 3
SEED_ENV = "FNN_SEED"

log = logging.getLogger("fnn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed_default() -> Optional[int]:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return None  # reported as a usage error once parsing is done


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integer or comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected number or comma-separated numbers, got {text!r}") from None


def _add_model_flags(p: argparse.ArgumentParser, lists: bool) -> None:
    ints, floats = (_int_list, _float_list) if lists else (int, float)
    p.add_argument("--m", type=ints, help="fuzzy sets per feature")
    p.add_argument("--b", type=ints, help="bootstrap replications")
    p.add_argument("--rho", type=floats, help="consensus threshold in (0, 1]")
    p.add_argument("--alpha", type=float, default=0.01, help="leaky ReLU slope")
    p.add_argument("--neuron", choices=[k.value for k in NeuronKind], default="uni")
    p.add_argument("--boundary", choices=[m.value for m in BoundaryMode], default="max")
    p.add_argument("--lc-cap", type=int, default=200, help="screened candidate cap")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds")
    p.add_argument("--lambda-rule", choices=["min", "1se"], default="min")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fnn", description="Fuzzy neural network for SQL-injection detection.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, data=True, data_required=True):
        if data:
            p.add_argument("--data", required=data_required, help="input CSV")
        p.add_argument("--label", default="Class", help="label column name")
        p.add_argument("--seed", type=int, default=_seed_default(), help=f"random seed (fallback ${SEED_ENV})")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", choices=["json", "text"], default="json")

    p = sub.add_parser("featurize", help="length/entropy features from SQL text")
    common(p)
    p.add_argument("--text-column", default="query", help="column holding the SQL statement")
    p.add_argument("--scores", help="JSON table: statement -> {malice, confidence, levelDifference}")

    p = sub.add_parser("train", help="fit a model and write it as JSON")
    common(p)
    _add_model_flags(p, lists=False)

    p = sub.add_parser("evaluate", help="metrics of a saved model on labeled data")
    common(p)
    p.add_argument("--model", required=True)

    p = sub.add_parser("predict", help="labels and scores for unlabeled rows")
    common(p)
    p.add_argument("--model", required=True)

    p = sub.add_parser("rules", help="export the model's fuzzy rules")
    common(p, data_required=False)
    p.add_argument("--model", required=True)
    p.add_argument("--decimals", type=int, default=4)

    p = sub.add_parser("benchmark", help="grid search plus repeated 70/30 runs")
    common(p)
    _add_model_flags(p, lists=True)
    p.add_argument("--grid", choices=["paper", "custom"], default="paper")
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--train-fraction", type=float, default=0.7)
    return parser


# -- output -----------------------------------------------------------------

def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".fnn-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


# -- commands ---------------------------------------------------------------

def _config(args) -> ModelConfig:
    kw = dict(alpha=args.alpha, neuron_kind=args.neuron, boundary_mode=args.boundary, lc_cap=args.lc_cap,
              cv_folds=args.folds, lambda_rule=args.lambda_rule, seed=args.seed)
    try:
        return ModelConfig(**kw, **{k: v for k, v in (("M", args.m), ("b", args.b), ("rho", args.rho))
                                     if v is not None and not isinstance(v, tuple)})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read_rows(path: str) -> list[dict]:
    if not os.path.isfile(path):
        raise DataError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def cmd_featurize(args) -> int:
    rows = _read_rows(args.data)
    if not rows:
        raise DataError(f"{args.data}: no statements")
    if args.text_column not in rows[0]:
        raise DataError(f"{args.data}: text column {args.text_column!r} not found")
    scorer = None
    if args.scores:
        if not os.path.isfile(args.scores):
            raise DataError(f"score file not found: {args.scores}")
        with open(args.scores, encoding="utf-8") as fh:
            scorer = json.load(fh)
    feats = featurize_sql([r[args.text_column] for r in rows], scorer, require_scores=scorer is not None)
    names = ["length", "entropy"] + (list(SCORED_FEATURES) if scorer is not None else [])
    has_label = args.label in rows[0]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names + ([args.label] if has_label else []))
    for src, row in zip(rows, feats):
        w.writerow([repr(row[n]) for n in names] + ([src[args.label]] if has_label else []))
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_train(args) -> int:
    config = _config(args)
    data = load_csv(args.data, args.label)
    model = train(data, config)
    _emit(args, dumps_model(model))
    r = model.report
    print(f"trained: L={r['L']} L_c={r['L_c']} L_s={r['L_s']}", file=sys.stderr)
    return EXIT_OK


def _aligned(data: Dataset, names: Sequence[str]) -> Dataset:
    missing = [n for n in names if n not in data.feature_names]
    if missing:
        raise DataError(f"data lacks model feature columns {missing}")
    cols = [data.feature_names.index(n) for n in names]
    return Dataset(data.X[:, cols], data.y, tuple(names))


def _load_model(path: str):
    if not os.path.isfile(path):
        raise DataError(f"model file not found: {path}")
    try:
        return load_model(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: not a valid model file ({exc})") from None


def cmd_evaluate(args) -> int:
    model = _load_model(args.model)
    data = _aligned(load_csv(args.data, args.label), model.feature_names)
    m = evaluate_model(model, data)
    if args.format == "text":
        _emit(args, render_table([(model.config.neuron_kind.value.upper(), summarize([m]))]))
    else:
        _emit(args, _dump_json(m.to_dict(include_timings=False)))
    return EXIT_OK


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    X = load_features_csv(args.data, model.feature_names)
    scores = score_batch(model, X)
    labels = np.where(scores >= 0, 1, -1)
    if args.format == "text":
        _emit(args, "".join(f"{int(l)}\t{s!r}\n" for l, s in zip(labels, scores.tolist())))
    else:
        _emit(args, _dump_json({"predictions": labels.tolist(), "scores": scores.tolist()}))
    return EXIT_OK


def cmd_rules(args) -> int:
    model = _load_model(args.model)
    data = None
    if args.data:
        data = _aligned(load_csv(args.data, args.label), model.feature_names)
    try:
        rules = extract_rules(model, data)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if args.decimals < 1:
        raise UsageError("--decimals must be at least 1")
    _emit(args, render_rules(rules, args.decimals) if args.format == "text" else rules_to_json(rules))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    base = _config(args)
    if args.grid == "paper":
        grid = dict(DEFAULT_GRID)
        for key, flag in (("M", args.m), ("b", args.b), ("rho", args.rho)):
            if flag is not None:
                raise UsageError(f"--grid paper fixes {key}; use --grid custom to set it")
    else:
        grid = {"M": args.m or (base.M,), "b": args.b or (base.b,), "rho": args.rho or (base.rho,)}
        try:
            for M in grid["M"]:
                for b in grid["b"]:
                    for rho in grid["rho"]:
                        ModelConfig(M=M, b=b, rho=rho)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    if not 0 < args.train_fraction < 1:
        raise UsageError("--train-fraction must lie in (0, 1)")
    data = load_csv(args.data, args.label)
    t0 = time.perf_counter()
    result = benchmark(data, grid, base, runs=args.runs, seed=args.seed,
                       train_fraction=args.train_fraction, folds=args.folds)
    doc = benchmark_json(result, seed=args.seed, data_path=os.path.basename(args.data))
    doc["grid"] = {k: list(v) for k, v in grid.items()}
    doc["train_fraction"] = args.train_fraction
    text = _dump_json(doc)
    if args.out:
        write_atomic(args.out, text)
    if args.format == "text" or args.out:
        sys.stdout.write(result["table"])
    else:
        sys.stdout.write(text)
    best = result["grid"].best
    print(f"best: M={best.M} b={best.b} rho={best.rho}; wall time {time.perf_counter() - t0:.1f} s",
          file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "featurize": cmd_featurize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "rules": cmd_rules,
    "benchmark": cmd_benchmark,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.seed is None:
            raise UsageError(f"${SEED_ENV} must be an integer")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TrainingError, SelectionError, SvdError, np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_TRAIN


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()

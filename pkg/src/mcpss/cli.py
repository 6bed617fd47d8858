"""Command-line entry point: ``mcpss {train,predict,evaluate,ablate,sweep-breakpoint}``.

Configuration precedence, lowest first: built-in defaults, ``--config``
JSON file, ``MCPSS_<FIELD>`` environment variables, command-line flags.
Every command writes the effective configuration to ``config.json`` in its
output directory; passing that file back with ``--config`` replays the run.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 optimiser failed to converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .aggregate import WEIGHTED_RULES, parse_sweep
from .errors import ConfigError, ConvergenceError, MCPError, ParseError
from .evaluate import metrics, confusion
from .pipeline import (
    ABLATION_ROWS,
    FKNN_LABELS,
    RunConfig,
    TrainedModels,
    ablation_predictions,
    compute_streams,
    cross_validated_streams,
    cv_result,
    evaluation_predictions,
    load_dataset,
    sweep,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4

log = logging.getLogger("mcpss")


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("data")
    g.add_argument("--format", choices=("paired", "fasta"))
    g.add_argument("--eight-state", action="store_true", default=None,
                   help="structure lines use the 8-state alphabet")
    g.add_argument("--config", metavar="JSON", help="configuration file")
    g.add_argument("-o", "--output-dir", metavar="DIR")
    g = p.add_argument_group("measure")
    g.add_argument("--window-size", type=int, metavar="H")
    g.add_argument("--ngram-n", type=int, metavar="N")
    g.add_argument("--measure", choices=tuple(FKNN_LABELS))
    g.add_argument("--rho-orientation", choices=("rate", "verbatim"))
    g = p.add_argument_group("fuzzy knn")
    g.add_argument("--k", type=int)
    g.add_argument("--k-prime", type=int)
    g.add_argument("--fuzziness-m", type=float, metavar="M")
    g = p.add_argument_group("svm")
    g.add_argument("--svm-c", type=float, metavar="C")
    g.add_argument("--svm-gamma", type=float, metavar="GAMMA")
    g.add_argument("--svm-tol", type=float, metavar="TOL")
    g.add_argument("--svm-max-iter", type=int, metavar="N")
    g.add_argument("--spectrum-clip", action=argparse.BooleanOptionalAction, default=None)
    g = p.add_argument_group("aggregation")
    g.add_argument("--aggregation", type=int, choices=(1, 2, 3, 4, 5))
    g.add_argument("--wheel", type=int, choices=(1, 2))
    g.add_argument("--breakpoint", type=float, metavar="B")
    g.add_argument("--validation-fraction", type=float, metavar="F")
    g.add_argument("--breakpoint-sweep", metavar="START:STOP:STEP")
    g.add_argument("--draws", type=int)
    g.add_argument("--samples-per-decision", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--no-filter", dest="final_filter", action="store_const", const=False, default=None,
                   help="skip the closing filter pass")
    g.add_argument("--post-filter", action=argparse.BooleanOptionalAction, default=None,
                   help="pre-filter both classifier streams under rule 5 (default on)")
    g = p.add_argument_group("evaluation")
    g.add_argument("--folds", type=int)
    g.add_argument("--test-set", metavar="PATH")
    g.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


_NON_CONFIG = {"command", "config", "verbose", "models", "input", "handler"}


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="mcpss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train and persist both classifiers")
    p.add_argument("dataset")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="predict structures with trained models")
    p.add_argument("--models", required=True, metavar="DIR")
    p.add_argument("input", help="sequence file (fasta without a structure sibling is fine)")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="k-fold or independent-test metrics")
    p.add_argument("dataset")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("ablate", parents=[common], help="measure ablation and all five rules")
    p.add_argument("dataset")
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("sweep-breakpoint", parents=[common], help="wheel-2 breakpoint accuracy curve")
    p.add_argument("dataset")
    p.set_defaults(handler=cmd_sweep_breakpoint)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}


def _config(args, base=None) -> RunConfig:
    return RunConfig.resolve(_overrides(args), args.config, base=base)


def _outdir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _persist_config(out: Path, config: RunConfig) -> None:
    _write_json(out / "config.json", config.snapshot())


def cmd_train(args) -> int:
    config = _config(args)
    train = load_dataset(config.dataset, config)
    out = _outdir(config)
    t0 = time.perf_counter()
    models = TrainedModels.train(train, config)
    manifest = models.save(out)
    _persist_config(out, config)
    _write_json(out / "timings.json", {"train_s": time.perf_counter() - t0})
    print(f"trained on {len(train)} proteins ({train.residue_count} residues) -> {out}")
    for name, digest in sorted(manifest["files"].items()):
        print(f"  {name}  sha256 {digest}")
    return EXIT_OK


def cmd_predict(args) -> int:
    models = TrainedModels.load(args.models)
    base = models.config.snapshot()
    base.update(dataset=None, output_dir=RunConfig().output_dir)
    config = _config(args, base=base)
    models.check_compatible(config)
    data = load_dataset(args.input, config)
    run = models.predict(list(data), config)
    out = _outdir(config)
    run.write_table(out / "predictions.tsv")
    run.write_structures(out / "structures.txt")
    summary = run.summary()
    timings = summary.pop("timings")
    _write_json(out / "run.json", summary)
    _write_json(out / "timings.json", timings)
    _persist_config(out, config)
    for pid, s in zip(run.protein_ids, run.structures):
        print(f">{pid}\n{s}")
    if run.report is not None:
        print(run.report.table("final structures vs supplied labels"))
    return EXIT_OK


def _report_block(name, pooled, folds=None) -> dict:
    block = {"pooled": pooled.to_dict()}
    if folds is not None:
        block["folds"] = [r.to_dict() for r in folds]
    return block


def cmd_evaluate(args) -> int:
    config = _config(args)
    data = load_dataset(config.dataset, config)
    out = _outdir(config)
    t0 = time.perf_counter()
    lines = []
    if config.test_set:
        test = load_dataset(config.test_set, config)
        overlap = set(data.ids) & set(test.ids)
        if overlap:
            log.warning("%d protein ids occur in both train and test sets", len(overlap))
        streams = compute_streams(data, test, config)
        preds = evaluation_predictions(streams, config)
        truths = [r.structure for r in test]
        report = {"mode": "independent", "train": data.name, "test": test.name, "variants": {}}
        for name, p in preds.items():
            rep = metrics(confusion(truths, p))
            report["variants"][name] = _report_block(name, rep)
            lines.append(rep.table(name))
    else:
        streams = cross_validated_streams(data, config)
        preds = evaluation_predictions(streams, config)
        cv = cv_result(streams, preds, config.folds)
        report = {"mode": "kfold", "folds": config.folds, "dataset": data.name, "variants": {}}
        for name in cv.variants:
            pooled = cv.pooled(name)
            report["variants"][name] = _report_block(name, pooled, cv.fold_reports(name))
            lines.append(pooled.table(f"{name} (pooled over {config.folds} folds)"))
    _write_json(out / "metrics.json", report)
    (out / "metrics.txt").write_text("\n\n".join(lines) + "\n", encoding="utf-8")
    _write_json(out / "timings.json", {"evaluate_s": time.perf_counter() - t0})
    _persist_config(out, config)
    print("\n\n".join(lines))
    return EXIT_OK


def format_ablation(rows) -> str:
    head = f"{'method':<24} {'Q3':>7} {'Q_H':>7} {'Q_E':>7} {'Q_C':>7}"
    body = [f"{name:<24} {r.q3:7.2f} {r.q['H']:7.2f} {r.q['E']:7.2f} {r.q['C']:7.2f}" for name, r in rows]
    return "\n".join([head, *body])


def cmd_ablate(args) -> int:
    config = _config(args)
    data = load_dataset(config.dataset, config)
    out = _outdir(config)
    t0 = time.perf_counter()
    streams = cross_validated_streams(data, config, tuple(FKNN_LABELS))
    cv = cv_result(streams, ablation_predictions(streams, config), config.folds)
    rows = [(name, cv.pooled(name)) for name in ABLATION_ROWS]
    _write_json(out / "ablation.json", {
        "dataset": data.name,
        "folds": config.folds,
        "rows": [{"method": n, **r.to_dict()} for n, r in rows],
    })
    with open(out / "ablation.tsv", "w", encoding="utf-8") as fh:
        fh.write("method\tq3\tq_H\tq_E\tq_C\n")
        for n, r in rows:
            fh.write(f"{n}\t{r.q3:.4f}\t{r.q['H']:.4f}\t{r.q['E']:.4f}\t{r.q['C']:.4f}\n")
    _write_json(out / "timings.json", {"ablate_s": time.perf_counter() - t0})
    _persist_config(out, config)
    print(format_ablation(rows))
    return EXIT_OK


def cmd_sweep_breakpoint(args) -> int:
    config = _config(args)
    if config.aggregation not in WEIGHTED_RULES:
        raise ConfigError(f"aggregation: the sweep needs a weighted rule {sorted(WEIGHTED_RULES)}")
    data = load_dataset(config.dataset, config)
    out = _outdir(config)
    t0 = time.perf_counter()
    streams = cross_validated_streams(data, config)
    curve = sweep(streams, config, parse_sweep(config.breakpoint_sweep), rule=config.aggregation)
    best = max(range(len(curve)), key=lambda t: curve[t][1])
    with open(out / "sweep.tsv", "w", encoding="utf-8") as fh:
        fh.write("breakpoint\taccuracy\targmax\n")
        for t, (b, acc) in enumerate(curve):
            fh.write(f"{b:.6g}\t{acc:.6f}\t{'*' if t == best else ''}\n")
    _write_json(out / "sweep.json", {
        "rule": config.aggregation,
        "draws": config.draws,
        "curve": [{"breakpoint": b, "accuracy": a} for b, a in curve],
        "argmax": curve[best][0],
    })
    _write_json(out / "timings.json", {"sweep_s": time.perf_counter() - t0})
    _persist_config(out, config)
    for t, (b, acc) in enumerate(curve):
        print(f"{b:6.3f}  {acc:7.3f}{'  <- argmax' if t == best else ''}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"mcpss: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"mcpss: optimiser did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ParseError, FileNotFoundError, MCPError, ValueError) as exc:
        print(f"mcpss: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
